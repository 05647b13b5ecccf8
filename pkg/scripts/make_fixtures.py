#!/usr/bin/env python3
"""Regenerate the deterministic test fixtures under tests/data/.

The corpus, contrastive cells, and embeddings share one word pool so the
whole CLI pipeline can run on them end to end. Rerunning this script must
reproduce every fixture byte for byte.
"""

from __future__ import annotations

import gzip
import json
from pathlib import Path

import numpy as np

from lexshift.embeddings import EmbeddingStore, write_word2vec_text
from lexshift.stemming import porter_stem

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "tests" / "data"

DONOR_WORDS = [
    "garden", "market", "window", "coffee", "silver", "mountain", "river",
    "forest", "bridge", "castle", "candle", "butter", "ladder", "meadow",
    "pepper", "saddle", "timber", "velvet", "walnut", "willow", "anchor",
    "barrel", "basket", "bottle", "button", "carpet", "cattle", "copper",
    "corner", "cotton", "dinner", "doctor", "engine", "feather", "finger",
    "flower", "gravel", "hammer", "harbor", "jacket", "kitchen", "lantern",
]
GPTISH_WORDS = ["delve", "boast", "swift", "meticulous", "comprehend", "underscore"]
FILLER = ["the", "and", "is", "was", "of", "to", "in", "that", "for", "with"]

N_MONTHS = 66  # 2018-12 .. 2024-05
EVENT_INDEX = 47  # 2022-11 is the last pre month
DOCS_PER_MONTH = 40


def month_of_index(i: int) -> tuple[int, int]:
    o = 2018 * 12 + 11 + i  # 2018-12 has ordinal 2018*12+11
    return (o // 12, o % 12 + 1)


def make_corpus(rng: np.random.Generator) -> list[dict]:
    words = DONOR_WORDS + GPTISH_WORDS
    base = {w: rng.uniform(0.08, 0.30) for w in DONOR_WORDS}
    base.update({w: rng.uniform(0.04, 0.10) for w in GPTISH_WORDS})
    docs = []
    doc_no = 0
    for m in range(N_MONTHS):
        y, mo = month_of_index(m)
        trend = 1.0 + 0.002 * m
        post_months = max(0, m - EVENT_INDEX)
        for d in range(DOCS_PER_MONTH):
            chosen = []
            for w in words:
                p = base[w] * trend
                if w == "delve":
                    p = base[w] + 0.012 * post_months  # adoption after the event
                if rng.random() < min(p, 0.95):
                    chosen.append(w)
            if not chosen:
                chosen = [words[int(rng.integers(len(words)))]]
            fill = [FILLER[int(rng.integers(len(FILLER)))] for _ in range(4)]
            body = list(chosen) + fill
            rng.shuffle(body)
            doc_no += 1
            docs.append(
                {
                    "id": f"doc{doc_no:06d}",
                    "timestamp": f"{y:04d}-{mo:02d}-{1 + (d % 28):02d}",
                    "category": "talks",
                    "text": " ".join(body) + ".",
                }
            )
    return docs


def write_corpus(docs: list[dict]) -> None:
    lines = [json.dumps(d, sort_keys=True) for d in docs]
    payload = ("\n".join(lines) + "\n").encode("utf-8")
    (DATA / "corpus.jsonl").write_bytes(payload)
    with open(DATA / "corpus.jsonl.gz", "wb") as fh:
        with gzip.GzipFile(filename="", mode="wb", fileobj=fh, mtime=0) as gz:
            gz.write(payload)


def make_contrastive(rng: np.random.Generator) -> None:
    out = DATA / "contrastive"
    out.mkdir(parents=True, exist_ok=True)
    cells = [("arx", "gptA", "polish"), ("bio", "gptA", "polish")]
    human_rate = {w: 0.35 for w in DONOR_WORDS}
    human_rate.update({w: 0.10 for w in GPTISH_WORDS})
    edited_rate = dict(human_rate)
    edited_rate.update({"delve": 0.80, "boast": 0.60, "swift": 0.55, "meticulous": 0.50})

    def draw_docs(rates: dict[str, float], n_docs: int) -> list[list[str]]:
        docs = [[w for w in rates if rng.random() < rates[w]] for _ in range(n_docs)]
        # no word may appear in every document of a side (saturation guard)
        for w in rates:
            hits = [i for i, d in enumerate(docs) if w in d]
            if len(hits) == n_docs:
                docs[hits[0]] = [x for x in docs[hits[0]] if x != w]
        for i, d in enumerate(docs):
            if not d:
                docs[i] = ["garden"]
        return docs

    suffixes = [" were noted.", " were seen.", " appeared often.", " came up twice."]
    for ds, model, prompt in cells:
        human = draw_docs(human_rate, 10)
        edited = draw_docs(edited_rate, 10)
        stem_name = f"{ds}__{model}__{prompt}"
        with open(out / f"{stem_name}.human.txt", "w", encoding="utf-8", newline="\n") as fh:
            for i, d in enumerate(human):
                fh.write("The " + " and the ".join(d) + suffixes[i % 4] + "\n")
        with open(out / f"{stem_name}.edited.txt", "w", encoding="utf-8", newline="\n") as fh:
            for i, d in enumerate(edited):
                fh.write("The " + " and the ".join(d) + suffixes[i % 4] + "\n")


def make_embeddings(rng: np.random.Generator) -> None:
    stems = sorted({porter_stem(w) for w in DONOR_WORDS + GPTISH_WORDS})
    stems += ["absentword", "sparewordon", "sparewordtw"]
    vectors = {w: rng.normal(size=8) for w in stems}
    store = EmbeddingStore.from_vectors(vectors)
    write_word2vec_text(store, DATA / "embeddings.txt")


def make_scenario_file() -> None:
    (DATA / "scenario_small.cfg").write_text(
        "\n".join(
            [
                "# small simulation scenario for smoke tests",
                "n_months_pre = 30",
                "n_months_post = 10",
                "docs_per_month = 300",
                "noise_sd = 0.03",
                "slope_per_year = 0.01",
                "seed = 17",
                "start_month = 2020-01",
                "treated_words = adopted000",
                "treated_bases = -1.0",
                "treated_deltas = 0.3",
                "n_null_words = 25",
                "null_base_min = -1.15",
                "null_base_max = -0.85",
                "replicates = 2",
                "pool_size = 20",
                "",
            ]
        ),
        encoding="utf-8",
    )


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    write_corpus(make_corpus(np.random.default_rng(20181201)))
    make_contrastive(np.random.default_rng(20190101))
    make_embeddings(np.random.default_rng(20190202))
    make_scenario_file()
    print(f"fixtures written under {DATA}")


if __name__ == "__main__":
    main()
