"""Corpus ingestion, text preprocessing, and monthly word-frequency series.

Documents are time-stamped text units. Preprocessing runs a fixed six-step
pipeline (tokenize, lowercase, stop words, non-alphabetic filter, length
filter, Porter stemming) and yields the distinct stem set per document;
monthly series then count, per word, the documents containing it.
"""

from __future__ import annotations

import gzip
import io
import json
import math
import re
import unicodedata
from dataclasses import dataclass, field
from datetime import date
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .stemming import porter_stem

Month = tuple[int, int]

_TOKEN_SPLIT = re.compile(r"[^a-z0-9]+")
_ALPHA = re.compile(r"[a-z]+\Z")


def load_default_stopwords() -> frozenset[str]:
    text = resources.files("lexshift.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


DEFAULT_STOPWORDS = load_default_stopwords()


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Load a one-word-per-line stop-word file, lowercased."""
    words = Path(path).read_text("utf-8").splitlines()
    return frozenset(w.strip().lower() for w in words if w.strip())


@dataclass(frozen=True)
class PreprocessConfig:
    stopwords: frozenset[str] = DEFAULT_STOPWORDS
    min_token_length: int = 3
    alphabetic_only: bool = True
    stemming_enabled: bool = True

    def __post_init__(self) -> None:
        if self.min_token_length < 1:
            raise ValueError("min_token_length must be >= 1")


@dataclass(frozen=True)
class Document:
    id: str
    timestamp: date
    text: str
    category: str | None = None


def preprocess_text(text: str, cfg: PreprocessConfig | None = None) -> frozenset[str]:
    """Run the six-step pipeline on raw text; returns the distinct stem set.

    Order: tokenize on non-alphanumeric boundaries, lowercase, drop stop
    words, drop tokens with non-alphabetic characters, drop tokens shorter
    than the minimum length, Porter-stem. Input is NFC-normalized first;
    non-ASCII characters act as token boundaries.
    """
    if cfg is None:
        cfg = PreprocessConfig()
    lowered = unicodedata.normalize("NFC", text).lower()
    stems: set[str] = set()
    for tok in _TOKEN_SPLIT.split(lowered):
        if not tok:
            continue
        if tok in cfg.stopwords:
            continue
        if cfg.alphabetic_only and not _ALPHA.fullmatch(tok):
            continue
        if len(tok) < cfg.min_token_length:
            continue
        if cfg.stemming_enabled and _ALPHA.fullmatch(tok):
            tok = porter_stem(tok)
        stems.add(tok)
    return frozenset(stems)


def preprocess(doc: Document, cfg: PreprocessConfig | None = None) -> frozenset[str]:
    return preprocess_text(doc.text, cfg)


# -- month arithmetic ---------------------------------------------------------


def month_of(d: date) -> Month:
    return (d.year, d.month)


def month_str(m: Month) -> str:
    return f"{m[0]:04d}-{m[1]:02d}"


def parse_month(s: str) -> Month:
    y, mo = s.split("-")
    m = (int(y), int(mo))
    if not 1 <= m[1] <= 12:
        raise ValueError(f"invalid month: {s!r}")
    return m


def month_ordinal(m: Month) -> int:
    return m[0] * 12 + (m[1] - 1)


def shift_month(m: Month, k: int) -> Month:
    o = month_ordinal(m) + k
    return (o // 12, o % 12 + 1)


def month_range(start: Month, end: Month) -> tuple[Month, ...]:
    if month_ordinal(start) > month_ordinal(end):
        raise ValueError("month range start after end")
    n = month_ordinal(end) - month_ordinal(start) + 1
    return tuple(shift_month(start, k) for k in range(n))


def shift_date_months(d: date, k: int) -> date:
    """Shift a date by whole months, clamping the day to the month length."""
    y, mo = shift_month((d.year, d.month), k)
    for day in (d.day, 30, 29, 28):
        try:
            return date(y, mo, day)
        except ValueError:
            continue
    raise AssertionError("unreachable")


# -- frequency series ---------------------------------------------------------


@dataclass(frozen=True)
class FrequencySeries:
    """Monthly document-containment counts for one word.

    ``log_rel_freq[t] = log10((contain_count[t] + 1) / (doc_count[t] + 1))``,
    the add-one-smoothed log relative document frequency.
    """

    word: str
    months: tuple[Month, ...]
    doc_count: np.ndarray
    contain_count: np.ndarray
    log_rel_freq: np.ndarray
    zero_doc_months: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        n = len(self.months)
        if not (len(self.doc_count) == len(self.contain_count) == len(self.log_rel_freq) == n):
            raise ValueError("month/count length mismatch")
        ordinals = [month_ordinal(m) for m in self.months]
        if any(b - a != 1 for a, b in zip(ordinals, ordinals[1:])):
            raise ValueError("months must be contiguous and ascending")
        if np.any(self.contain_count < 0) or np.any(self.contain_count > self.doc_count):
            raise ValueError("need 0 <= contain_count <= doc_count")
        for arr in (self.doc_count, self.contain_count, self.log_rel_freq):
            arr.setflags(write=False)

    def month_index(self, m: Month) -> int:
        return month_ordinal(m) - month_ordinal(self.months[0])


def frequency_series(
    word: str,
    months: Sequence[Month],
    doc_count: Sequence[int],
    contain_count: Sequence[int],
) -> FrequencySeries:
    """Build a FrequencySeries, computing the smoothed log relative frequency."""
    n = np.asarray(doc_count, dtype=np.int64)
    c = np.asarray(contain_count, dtype=np.int64)
    lrf = np.log10((c + 1.0) / (n + 1.0))
    zero = tuple(int(i) for i in np.flatnonzero(n == 0))
    return FrequencySeries(word, tuple(months), n, c, lrf, zero)


def build_frequency_series(
    corpus: Iterable[Document],
    vocab: Iterable[str],
    window: tuple[date, date],
    cfg: PreprocessConfig | None = None,
) -> dict[str, FrequencySeries]:
    """Count, per month and word, the documents whose stem set contains it.

    Documents outside the window are ignored (ingest is expected to have
    filtered and counted them already). Months with no documents are kept
    with zero counts and flagged on each series.
    """
    vocab = set(vocab)
    if not vocab:
        raise ValueError("vocab must be nonempty")
    start, end = window
    if start >= end:
        raise ValueError("window start must precede window end")
    months = month_range(month_of(start), month_of(end))
    if len(months) < 2:
        raise ValueError("window must span at least 2 months")
    base = month_ordinal(months[0])
    n_months = len(months)
    doc_count = np.zeros(n_months, dtype=np.int64)
    contain: dict[str, np.ndarray] = {w: np.zeros(n_months, dtype=np.int64) for w in vocab}
    for doc in corpus:
        idx = month_ordinal(month_of(doc.timestamp)) - base
        if idx < 0 or idx >= n_months:
            continue
        doc_count[idx] += 1
        for w in preprocess(doc, cfg):
            arr = contain.get(w)
            if arr is not None:
                arr[idx] += 1
    return {
        w: frequency_series(w, months, doc_count.copy(), contain[w]) for w in sorted(vocab)
    }


# -- corpus file ingestion -----------------------------------------------------


@dataclass
class IngestReport:
    kept: int = 0
    rejected: dict[str, int] = field(default_factory=dict)
    rejected_lines: dict[str, list[int]] = field(default_factory=dict)
    per_month: dict[str, int] = field(default_factory=dict)

    MAX_LINES_PER_REASON = 100

    def reject(self, reason: str, line_no: int) -> None:
        self.rejected[reason] = self.rejected.get(reason, 0) + 1
        lines = self.rejected_lines.setdefault(reason, [])
        if len(lines) < self.MAX_LINES_PER_REASON:
            lines.append(line_no)

    @property
    def total_rejected(self) -> int:
        return sum(self.rejected.values())

    def to_dict(self) -> dict:
        return {
            "kept": self.kept,
            "rejected_total": self.total_rejected,
            "rejected": dict(sorted(self.rejected.items())),
            "rejected_lines": {k: v for k, v in sorted(self.rejected_lines.items())},
            "per_month": dict(sorted(self.per_month.items())),
        }


def _open_maybe_gzip(path: str | Path) -> io.TextIOWrapper:
    raw = open(path, "rb")
    head = raw.read(2)
    raw.seek(0)
    if head == b"\x1f\x8b":
        return io.TextIOWrapper(gzip.GzipFile(fileobj=raw), encoding="utf-8")
    return io.TextIOWrapper(raw, encoding="utf-8")


def load_documents(
    path: str | Path, window: tuple[date, date] | None = None
) -> tuple[list[Document], IngestReport]:
    """Read newline-delimited JSON documents, validating each record.

    Invalid records (bad JSON, missing fields, bad timestamps, duplicate
    ids) and documents outside the window are rejected and counted; the
    rest of the file is still processed.
    """
    docs: list[Document] = []
    report = IngestReport()
    seen: set[str] = set()
    with _open_maybe_gzip(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                report.reject("bad_json", line_no)
                continue
            if not isinstance(rec, dict):
                report.reject("bad_record", line_no)
                continue
            doc_id = rec.get("id")
            ts = rec.get("timestamp")
            text = rec.get("text")
            if not isinstance(doc_id, str) or not isinstance(ts, str) or not isinstance(text, str):
                report.reject("missing_field", line_no)
                continue
            try:
                when = date.fromisoformat(ts)
            except ValueError:
                report.reject("bad_timestamp", line_no)
                continue
            if doc_id in seen:
                report.reject("duplicate_id", line_no)
                continue
            if window is not None and not (window[0] <= when <= window[1]):
                report.reject("out_of_window", line_no)
                continue
            seen.add(doc_id)
            category = rec.get("category")
            docs.append(Document(doc_id, when, text, category if isinstance(category, str) else None))
            key = month_str(month_of(when))
            report.per_month[key] = report.per_month.get(key, 0) + 1
            report.kept += 1
    return docs, report


# -- CSV interchange -----------------------------------------------------------

FREQUENCY_CSV_HEADER = "word,year,month,doc_count,contain_count,log_rel_freq"


def write_frequency_csv(series: Mapping[str, FrequencySeries], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(FREQUENCY_CSV_HEADER + "\n")
        for word in sorted(series):
            s = series[word]
            for i, (y, mo) in enumerate(s.months):
                fh.write(
                    f"{word},{y},{mo},{int(s.doc_count[i])},{int(s.contain_count[i])},"
                    f"{float(s.log_rel_freq[i])!r}\n"
                )


def read_frequency_csv(path: str | Path) -> dict[str, FrequencySeries]:
    rows: dict[str, list[tuple[Month, int, int]]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != FREQUENCY_CSV_HEADER:
            raise ValueError(f"unexpected frequency CSV header: {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            word, y, mo, n, c, _ = line.split(",")
            rows.setdefault(word, []).append(((int(y), int(mo)), int(n), int(c)))
    out: dict[str, FrequencySeries] = {}
    for word, entries in rows.items():
        entries.sort(key=lambda e: month_ordinal(e[0]))
        months = [e[0] for e in entries]
        out[word] = frequency_series(word, months, [e[1] for e in entries], [e[2] for e in entries])
    return out


def smoothed_log_rel_freq(contain: int, total: int) -> float:
    """Add-one-smoothed log10 relative document frequency for one month."""
    return math.log10((contain + 1) / (total + 1))
