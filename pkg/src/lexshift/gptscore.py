"""Log-odds word preference scores between paired human and edited corpora.

Each contrastive cell pairs human-written documents with their edited
versions for one (dataset, model, prompt) combination. A word's score is
the median log-odds ratio of its smoothed document frequency across 1000
Monte Carlo draws of hierarchical Dirichlet cell weights, so that the
unknown real-world mix of datasets, models, and prompts is marginalized
out rather than fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import PreprocessConfig, preprocess_text
from .stemming import porter_stem

CellKey = tuple[str, str, str]


class SaturationError(ValueError):
    """A probability reached 1; the word occurs in every document."""


@dataclass(frozen=True)
class ContrastiveCell:
    dataset_id: str
    model_id: str
    prompt_id: str
    human_docs: tuple[frozenset[str], ...]
    edited_docs: tuple[frozenset[str], ...]

    def __post_init__(self) -> None:
        if len(self.human_docs) != len(self.edited_docs):
            raise ValueError("human and edited documents must be pairwise aligned")
        if not self.human_docs:
            raise ValueError("cell must contain at least one document pair")

    @property
    def key(self) -> CellKey:
        return (self.dataset_id, self.model_id, self.prompt_id)


@dataclass(frozen=True)
class LorEntry:
    p_human: float
    p_gpt: float
    lor: float


@dataclass(frozen=True)
class LorTable:
    """Per-(word, cell) smoothed probabilities and log-odds ratios."""

    cells: tuple[CellKey, ...]
    entries: Mapping[str, tuple[LorEntry, ...]]
    saturated: tuple[str, ...]


@dataclass(frozen=True)
class GptScore:
    word: str
    score: float
    interval: tuple[float, float]
    n_samples: int
    n_cells: int

    def __post_init__(self) -> None:
        lo, hi = self.interval
        if not (lo <= self.score <= hi):
            raise ValueError("score must lie inside its interval")


@dataclass(frozen=True)
class WeightSample:
    cells: tuple[CellKey, ...]
    lam: np.ndarray

    def __post_init__(self) -> None:
        if abs(float(self.lam.sum()) - 1.0) > 1e-12:
            raise ValueError("cell weights must sum to 1")
        self.lam.setflags(write=False)


def doc_probability(docs: Sequence[frozenset[str]], word: str) -> float:
    """Smoothed document frequency (k+1)/(n+1) of ``word`` in ``docs``."""
    n = len(docs)
    if n == 0:
        raise ValueError("docs must be nonempty")
    k = sum(1 for d in docs if word in d)
    return (k + 1) / (n + 1)


def log_odds(p: float) -> float:
    if p >= 1.0:
        raise SaturationError(f"probability {p} saturated at 1; word occurs in every document")
    if p <= 0.0:
        raise ValueError(f"probability must be positive, got {p}")
    return math.log(p / (1.0 - p))


def compute_lor(cell: ContrastiveCell, word: str) -> float:
    """Log-odds ratio of edited-side vs human-side document frequency."""
    return log_odds(doc_probability(cell.edited_docs, word)) - log_odds(
        doc_probability(cell.human_docs, word)
    )


# Words the editing prompts themselves inject, removed from every vocabulary.
# "claritiy" keeps a legacy misspelling excluded alongside the correct form.
EXCLUDED_PROMPT_WORDS = (
    "rephrase",
    "polish",
    "dear",
    "text",
    "certainly",
    "subject",
    "readable",
    "clarity",
    "claritiy",
    "enhance",
    "version",
    "title",
)


def excluded_prompt_stems() -> frozenset[str]:
    return frozenset(porter_stem(w) for w in EXCLUDED_PROMPT_WORDS)


def vocabulary_filter(
    cells: Sequence[ContrastiveCell], threshold: float = 0.001
) -> set[str]:
    """Stems whose raw document frequency reaches ``threshold`` on either
    side of at least one cell, minus the prompt-word exclusion list."""
    if not cells:
        raise ValueError("cells must be nonempty")
    kept: set[str] = set()
    for cell in cells:
        for docs in (cell.human_docs, cell.edited_docs):
            n = len(docs)
            counts: dict[str, int] = {}
            for d in docs:
                for w in d:
                    counts[w] = counts.get(w, 0) + 1
            kept.update(w for w, k in counts.items() if k / n >= threshold)
    return kept - excluded_prompt_stems()


# -- Dirichlet cell weighting ---------------------------------------------------


def _as_generator(rng_seed: int | np.random.Generator) -> np.random.Generator:
    if isinstance(rng_seed, np.random.Generator):
        return rng_seed
    return np.random.default_rng(rng_seed)


def sample_substream(root_seed: int, index: int) -> np.random.Generator:
    """Deterministic per-index substream of a root seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(root_seed, spawn_key=(index,))))


def sample_weight(grid: Iterable[CellKey], rng_seed: int | np.random.Generator = 0) -> WeightSample:
    """One draw of hierarchical Dirichlet weights over grid cells.

    Flat Dirichlets over datasets, then models within dataset, then prompts
    within (dataset, model); a cell's weight is the product along its
    branch. Only branches present in the grid participate, so the weights
    of present cells sum to one.
    """
    cells = tuple(sorted(set(grid)))
    if not cells:
        raise ValueError("grid must be nonempty")
    rng = _as_generator(rng_seed)
    datasets = sorted({d for d, _, _ in cells})
    models = {d: sorted({m for dd, m, _ in cells if dd == d}) for d in datasets}
    prompts = {
        (d, m): sorted({p for dd, mm, p in cells if (dd, mm) == (d, m)})
        for d in datasets
        for m in models[d]
    }

    def flat_dirichlet(k: int) -> np.ndarray:
        g = rng.standard_gamma(1.0, size=k)
        return g / g.sum()

    p_d = dict(zip(datasets, flat_dirichlet(len(datasets))))
    p_m = {}
    p_p = {}
    for d in datasets:
        p_m[d] = dict(zip(models[d], flat_dirichlet(len(models[d]))))
        for m in models[d]:
            p_p[(d, m)] = dict(zip(prompts[(d, m)], flat_dirichlet(len(prompts[(d, m)]))))
    lam = np.array([p_d[d] * p_m[d][m] * p_p[(d, m)][p] for d, m, p in cells])
    lam = lam / lam.sum()
    return WeightSample(cells, lam)


def draw_weight_samples(
    grid: Iterable[CellKey], n_samples: int, rng_seed: int
) -> tuple[tuple[CellKey, ...], np.ndarray]:
    """Matrix of ``n_samples`` weight draws, one per-sample substream each."""
    cells = tuple(sorted(set(grid)))
    lam = np.empty((n_samples, len(cells)))
    for s in range(n_samples):
        lam[s] = sample_weight(cells, sample_substream(rng_seed, s)).lam
    return cells, lam


def _mix(lam: np.ndarray, p: np.ndarray) -> np.ndarray:
    # Convex mixture anchored at the smallest cell probability: exact when
    # all cells agree, and clipped into the cells' range against float drift.
    lo = p.min()
    mixed = lo + lam @ (p - lo)
    return np.clip(mixed, lo, p.max())


def _score_from_probs(
    word: str,
    p_human: np.ndarray,
    p_gpt: np.ndarray,
    lam: np.ndarray,
    n_samples: int,
) -> GptScore:
    ph_hat = _mix(lam, p_human)
    pg_hat = _mix(lam, p_gpt)
    lors = np.array([log_odds(g) - log_odds(h) for h, g in zip(ph_hat, pg_hat)])
    lo, hi = np.percentile(lors, [2.5, 97.5])
    return GptScore(word, float(np.median(lors)), (float(lo), float(hi)), n_samples, len(p_human))


def gpt_score(
    word: str,
    cells: Sequence[ContrastiveCell],
    n_samples: int = 1000,
    rng_seed: int = 0,
) -> GptScore:
    """Dirichlet-weighted score: probabilities are mixed across cells first,
    log-odds applied to the mixtures, and the sample median reported with a
    2.5/97.5 percentile interval."""
    by_key = {c.key: c for c in sorted(cells, key=lambda c: c.key)}
    if len(by_key) != len(cells):
        raise ValueError("duplicate cell keys in grid")
    keys, lam = draw_weight_samples(by_key, n_samples, rng_seed)
    p_human = np.array([doc_probability(by_key[k].human_docs, word) for k in keys])
    p_gpt = np.array([doc_probability(by_key[k].edited_docs, word) for k in keys])
    return _score_from_probs(word, p_human, p_gpt, lam, n_samples)


def build_lor_table(cells: Sequence[ContrastiveCell], vocab: Iterable[str]) -> LorTable:
    keys = tuple(sorted(c.key for c in cells))
    by_key = {c.key: c for c in cells}
    entries: dict[str, tuple[LorEntry, ...]] = {}
    saturated: list[str] = []
    for word in sorted(vocab):
        row = []
        try:
            for k in keys:
                cell = by_key[k]
                ph = doc_probability(cell.human_docs, word)
                pg = doc_probability(cell.edited_docs, word)
                row.append(LorEntry(ph, pg, log_odds(pg) - log_odds(ph)))
        except SaturationError:
            saturated.append(word)
            continue
        entries[word] = tuple(row)
    return LorTable(keys, entries, tuple(saturated))


def score_vocabulary(
    cells: Sequence[ContrastiveCell],
    vocab: Iterable[str] | None = None,
    n_samples: int = 1000,
    rng_seed: int = 0,
    threshold: float = 0.001,
) -> tuple[list[GptScore], list[str]]:
    """Score every vocabulary word with a shared set of weight draws.

    Returns scores sorted by score descending (ties by word) plus the list
    of words dropped because a weighted probability saturated at 1.
    """
    if vocab is None:
        vocab = vocabulary_filter(cells, threshold)
    by_key = {c.key: c for c in cells}
    if len(by_key) != len(cells):
        raise ValueError("duplicate cell keys in grid")
    keys, lam = draw_weight_samples(by_key, n_samples, rng_seed)
    scores: list[GptScore] = []
    dropped: list[str] = []
    for word in sorted(vocab):
        p_human = np.array([doc_probability(by_key[k].human_docs, word) for k in keys])
        p_gpt = np.array([doc_probability(by_key[k].edited_docs, word) for k in keys])
        try:
            scores.append(_score_from_probs(word, p_human, p_gpt, lam, n_samples))
        except SaturationError:
            dropped.append(word)
    scores.sort(key=lambda s: (-s.score, s.word))
    return scores, dropped


# -- contrastive directory loading ----------------------------------------------


def load_contrastive_dir(
    path: str | Path, cfg: PreprocessConfig | None = None
) -> tuple[list[ContrastiveCell], list[str]]:
    """Load ``<dataset>__<model>__<prompt>.human.txt`` / ``.edited.txt`` pairs.

    One document per line. ``*.txt`` files hold raw text and go through
    preprocessing; ``*.stems.txt`` files hold already-stemmed documents as
    space-separated stems and are taken verbatim. Returns the cells plus a
    list of unreadable cell names (missing side, empty side, or mismatched
    pair counts).
    """
    root = Path(path)
    cells: list[ContrastiveCell] = []
    failures: list[str] = []
    found = sorted(
        [(p, True) for p in root.glob("*.human.stems.txt")]
        + [(p, False) for p in root.glob("*.human.txt") if not p.name.endswith(".human.stems.txt")],
        key=lambda e: e[0].name,
    )
    for human_path, pre_stemmed in found:
        suffix = ".human.stems.txt" if pre_stemmed else ".human.txt"
        stem_name = human_path.name[: -len(suffix)]
        parts = stem_name.split("__")
        if len(parts) != 3:
            failures.append(f"{stem_name}: bad cell name (want dataset__model__prompt)")
            continue
        edited_path = root / (stem_name + suffix.replace("human", "edited"))
        if not edited_path.exists():
            failures.append(f"{stem_name}: missing edited side")
            continue
        human_lines = human_path.read_text("utf-8").splitlines()
        edited_lines = edited_path.read_text("utf-8").splitlines()
        if len(human_lines) != len(edited_lines):
            failures.append(
                f"{stem_name}: {len(human_lines)} human vs {len(edited_lines)} edited documents"
            )
            continue
        if not human_lines:
            failures.append(f"{stem_name}: empty cell")
            continue
        if pre_stemmed:
            to_docs = lambda lines: tuple(frozenset(t.split()) for t in lines)
        else:
            to_docs = lambda lines: tuple(preprocess_text(t, cfg) for t in lines)
        cells.append(
            ContrastiveCell(parts[0], parts[1], parts[2], to_docs(human_lines), to_docs(edited_lines))
        )
    return cells, failures


SCORES_CSV_HEADER = "word,score,lo95,hi95,n_cells"


def write_scores_csv(scores: Sequence[GptScore], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SCORES_CSV_HEADER + "\n")
        for s in scores:
            fh.write(f"{s.word},{s.score!r},{s.interval[0]!r},{s.interval[1]!r},{s.n_cells}\n")


def read_scores_csv(path: str | Path) -> dict[str, float]:
    out: dict[str, float] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != SCORES_CSV_HEADER:
            raise ValueError(f"unexpected scores CSV header: {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            word, score, _, _, _ = line.split(",")
            out[word] = float(score)
    return out
