"""Synthetic control fitting and placebo inference for word-usage series.

A treated word's counterfactual is a convex combination of "donor" word
series fitted to match the treated series before the event. Significance
comes from permutation placebos (refit every donor as if it were treated)
and from in-time placebos (refit with fake earlier event dates).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import date
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import FrequencySeries, Month, month_of, month_ordinal, shift_date_months
from .embeddings import EmbeddingStore

RATIO_FLOOR = 1e-15


class DonorSelectionError(ValueError):
    pass


@dataclass(frozen=True)
class DonorPool:
    treated_word: str
    strategy: str
    donors: tuple[str, ...]
    series: Mapping[str, FrequencySeries] | None = None

    def __post_init__(self) -> None:
        if self.treated_word in self.donors:
            raise ValueError("treated word cannot be its own donor")
        if len(set(self.donors)) != len(self.donors):
            raise ValueError("duplicate donors")
        if self.strategy not in ("untreated", "synonym", "random"):
            raise ValueError(f"unknown strategy {self.strategy!r}")

    def with_series(self, store: Mapping[str, FrequencySeries]) -> "DonorPool":
        """Attach word series from a frequency store, checking a common grid."""
        words = (self.treated_word,) + self.donors
        missing = [w for w in words if w not in store]
        if missing:
            raise KeyError(f"words missing from frequency store: {missing[:5]}")
        grid = store[self.treated_word].months
        for w in self.donors:
            if store[w].months != grid:
                raise ValueError(f"donor {w!r} has a different month grid")
        return replace(self, series={w: store[w] for w in words})

    @property
    def months(self) -> tuple[Month, ...]:
        if self.series is None:
            raise ValueError("pool has no series attached")
        return self.series[self.treated_word].months


@dataclass(frozen=True)
class SyntheticFit:
    weights: dict[str, float]
    pre_mspe: float
    post_mspe: float
    ratio: float | None  # None when pre_mspe is (numerically) zero

    @property
    def ratio_defined(self) -> bool:
        return self.ratio is not None


@dataclass(frozen=True)
class PlaceboOutcome:
    treated_ratio: float
    donor_ratios: tuple[float, ...]
    p_value: float
    excluded_donors: tuple[str, ...]


@dataclass(frozen=True)
class InTimePlaceboResult:
    fake_dates: tuple[date, ...]
    ratios: tuple[float | None, ...]
    true_ratio: float | None
    skipped: tuple[date, ...]


# -- donor selection -------------------------------------------------------------


def _score_value(s) -> float:
    return float(getattr(s, "score", s))


def untreated_candidates(
    treated: str,
    scores: Mapping[str, object],
    embeddings: EmbeddingStore,
    fraction: float = 0.1,
) -> list[str]:
    """The ``fraction`` of scored-and-embedded words (treated excluded)
    whose scores are closest to zero; ties break lexicographically."""
    pool = [w for w in scores if w != treated and w in embeddings]
    n_keep = int(len(pool) * fraction)
    pool.sort(key=lambda w: (abs(_score_value(scores[w])), w))
    return pool[:n_keep]


def select_donors_untreated(
    treated: str,
    scores: Mapping[str, object],
    embeddings: EmbeddingStore,
    pool_size: int = 100,
) -> DonorPool:
    """Near-zero-score words, then the most cosine-similar among them."""
    if treated not in embeddings:
        raise DonorSelectionError(f"treated word {treated!r} has no embedding")
    n_scored = sum(1 for w in scores if w != treated and w in embeddings)
    if n_scored < 10 * pool_size:
        raise DonorSelectionError(
            f"need at least {10 * pool_size} scored words with embeddings, have {n_scored}"
        )
    candidates = untreated_candidates(treated, scores, embeddings)
    if len(candidates) < pool_size:
        raise DonorSelectionError(
            f"only {len(candidates)} near-zero-score candidates for pool of {pool_size}"
        )
    sims = embeddings.similarities(treated, candidates)
    candidates.sort(key=lambda w: (-sims[w], w))
    return DonorPool(treated, "untreated", tuple(candidates[:pool_size]))


def select_donors_synonym(
    treated: str,
    embeddings: EmbeddingStore,
    pool_size: int = 100,
    vocab: Iterable[str] | None = None,
) -> DonorPool:
    """The words most cosine-similar to the treated word, score-unrestricted."""
    if treated not in embeddings:
        raise DonorSelectionError(f"treated word {treated!r} has no embedding")
    pool = sorted(set(vocab) if vocab is not None else embeddings.vectors)
    pool = [w for w in pool if w != treated and w in embeddings]
    if len(pool) < pool_size:
        raise DonorSelectionError(f"only {len(pool)} candidates for pool of {pool_size}")
    sims = embeddings.similarities(treated, pool)
    pool.sort(key=lambda w: (-sims[w], w))
    return DonorPool(treated, "synonym", tuple(pool[:pool_size]))


def select_donors_random(
    treated: str,
    vocab: Iterable[str],
    pool_size: int = 100,
    rng_seed: int = 0,
) -> DonorPool:
    """Uniform sample without replacement from the vocabulary."""
    pool = sorted(set(vocab) - {treated})
    if len(pool) < pool_size:
        raise DonorSelectionError(f"only {len(pool)} candidates for pool of {pool_size}")
    rng = np.random.default_rng(rng_seed)
    chosen = rng.choice(len(pool), size=pool_size, replace=False)
    return DonorPool(treated, "random", tuple(pool[i] for i in sorted(chosen)))


# -- simplex-constrained least squares --------------------------------------------


def fit_weights(treated_pre: np.ndarray, donors_pre: np.ndarray, max_iter: int | None = None) -> np.ndarray:
    """Minimize ||y - Xw||^2 over the probability simplex (w >= 0, sum w = 1).

    Primal active-set method: start at the best single-donor vertex, solve
    the equality-constrained problem on the current support, step back to
    the boundary when a weight would go negative, and grow the support with
    the most violated stationarity condition until none remains. Exact for
    a quadratic objective, so it terminates at the constrained optimum.
    """
    y = np.asarray(treated_pre, dtype=np.float64)
    X = np.asarray(donors_pre, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError(f"shape mismatch: treated {y.shape}, donors {X.shape}")
    if y.shape[0] < 2:
        raise ValueError("need at least 2 pre-treatment months")
    if X.shape[1] < 1:
        raise ValueError("need at least 1 donor")
    if not (np.isfinite(y).all() and np.isfinite(X).all()):
        raise ValueError("non-finite values in fit inputs")

    n_donors = X.shape[1]
    if n_donors == 1:
        return np.array([1.0])

    G = X.T @ X
    b = X.T @ y
    # gradient scale for the stationarity tolerance
    scale = max(1.0, float(np.abs(G).max()), float(np.abs(b).max()))
    tol = 1e-11 * scale

    def objective(w: np.ndarray) -> float:
        r = X @ w - y
        return float(r @ r)

    # start from the best single-donor fit
    vertex_obj = np.diag(G) - 2.0 * b
    j0 = int(np.argmin(vertex_obj))
    w = np.zeros(n_donors)
    w[j0] = 1.0
    free = [j0]

    best_w = w.copy()
    best_obj = objective(w)
    limit = max_iter if max_iter is not None else 6 * n_donors + 60

    for _ in range(limit):
        f = np.array(free)
        k = len(f)
        kkt = np.zeros((k + 1, k + 1))
        kkt[:k, :k] = 2.0 * G[np.ix_(f, f)]
        kkt[:k, k] = 1.0
        kkt[k, :k] = 1.0
        rhs = np.concatenate([2.0 * b[f], [1.0]])
        sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
        u = sol[:k]

        if u.min() >= -1e-12:
            w = np.zeros(n_donors)
            w[f] = np.clip(u, 0.0, None)
            w /= w.sum()
            obj = objective(w)
            if obj < best_obj:
                best_obj, best_w = obj, w.copy()
            # stationarity: bound coordinates need gradient >= the free-set level
            g = 2.0 * (G @ w - b)
            mu = float(g[f].mean())
            bound = [j for j in range(n_donors) if j not in set(free)]
            if not bound:
                break
            viol = mu - g[bound]
            worst = int(np.argmax(viol))
            if viol[worst] <= tol:
                break
            free.append(bound[worst])
        else:
            # partial step toward u until the first weight hits zero
            w_f = w[f]
            d = u - w_f
            neg = np.flatnonzero(u < 0)
            with np.errstate(divide="ignore", invalid="ignore"):
                steps = w_f[neg] / (w_f[neg] - u[neg])
            alpha = float(np.clip(np.nanmin(steps), 0.0, 1.0))
            w_f = w_f + alpha * d
            w = np.zeros(n_donors)
            w[f] = np.clip(w_f, 0.0, None)
            total = w.sum()
            if total <= 0:
                w[f[int(np.argmax(u))]] = 1.0
            else:
                w /= total
            free = [j for j in free if w[j] > 1e-14]
            if not free:
                free = [int(np.argmax(w))]

    if objective(w) > best_obj:
        w = best_w
    return w


def pre_post_split(months: Sequence[Month], event_date: date) -> tuple[np.ndarray, np.ndarray]:
    """Indices of pre months (through the event month) and post months."""
    event = month_ordinal(month_of(event_date))
    ordinals = np.array([month_ordinal(m) for m in months])
    pre = np.flatnonzero(ordinals <= event)
    post = np.flatnonzero(ordinals > event)
    if len(pre) == 0 or len(post) == 0:
        raise ValueError("event date must fall strictly inside the series window")
    return pre, post


def _donor_matrix(donors: Sequence[str], series: Mapping[str, FrequencySeries]) -> np.ndarray:
    return np.column_stack([series[w].log_rel_freq for w in donors])


def synthetic_series(weights: Mapping[str, float], series: Mapping[str, FrequencySeries]) -> np.ndarray:
    donors = list(weights)
    return _donor_matrix(donors, series) @ np.array([weights[w] for w in donors])


def mspe_ratio(
    weights: Mapping[str, float],
    treated: FrequencySeries,
    donors: Mapping[str, FrequencySeries],
    event_date: date,
) -> SyntheticFit:
    """Pre/post mean squared prediction error of the weighted combination.

    The event month belongs to the pre period; the ratio is flagged
    undefined (None) when the pre-period error is numerically zero.
    """
    pre, post = pre_post_split(treated.months, event_date)
    synth = synthetic_series(weights, donors)
    err = treated.log_rel_freq - synth
    pre_mspe = float(np.mean(err[pre] ** 2))
    post_mspe = float(np.mean(err[post] ** 2))
    ratio = post_mspe / pre_mspe if pre_mspe >= RATIO_FLOOR else None
    return SyntheticFit(dict(weights), pre_mspe, post_mspe, ratio)


def fit_pool(
    pool: DonorPool, event_date: date, donors: Sequence[str] | None = None, treated: str | None = None
) -> SyntheticFit:
    """Fit simplex weights on the pre period and evaluate the MSPE split."""
    if pool.series is None:
        raise ValueError("pool has no series attached")
    treated = treated if treated is not None else pool.treated_word
    donor_words = tuple(donors) if donors is not None else pool.donors
    t_series = pool.series[treated]
    pre, _ = pre_post_split(t_series.months, event_date)
    X = _donor_matrix(donor_words, pool.series)
    w = fit_weights(t_series.log_rel_freq[pre], X[pre])
    weights = {d: float(w[i]) for i, d in enumerate(donor_words)}
    donor_series = {d: pool.series[d] for d in donor_words}
    return mspe_ratio(weights, t_series, donor_series, event_date)


def placebo_p_value(treated_ratio: float, donor_ratios: Sequence[float]) -> float:
    """Permutation p-value: (1 + #{donor ratios >= treated}) / (#donors + 1)."""
    n_ge = sum(1 for r in donor_ratios if r >= treated_ratio)
    return (1 + n_ge) / (len(donor_ratios) + 1)


def placebo_test(pool: DonorPool, event_date: date, min_donor_ratios: int = 19) -> PlaceboOutcome:
    """Refit each donor as if it were treated, its pool being the other donors.

    Donors whose pre-period fit is exact (undefined ratio) are excluded and
    reported. Errors out when fewer than ``min_donor_ratios`` donor ratios
    are computable, since the p-value resolution would exceed 0.05.
    """
    treated_fit = fit_pool(pool, event_date)
    if not treated_fit.ratio_defined:
        raise ValueError("treated word has an undefined MSPE ratio (exact pre-period fit)")
    donor_ratios: list[float] = []
    excluded: list[str] = []
    for donor in pool.donors:
        rest = tuple(d for d in pool.donors if d != donor)
        fit = fit_pool(pool, event_date, donors=rest, treated=donor)
        if fit.ratio_defined:
            donor_ratios.append(fit.ratio)
        else:
            excluded.append(donor)
    if len(donor_ratios) < min_donor_ratios:
        raise ValueError(
            f"only {len(donor_ratios)} computable donor ratios; need {min_donor_ratios}"
        )
    p = placebo_p_value(treated_fit.ratio, donor_ratios)
    return PlaceboOutcome(treated_fit.ratio, tuple(donor_ratios), p, tuple(excluded))


def in_time_placebo(
    pool: DonorPool,
    true_event_date: date,
    n_fake: int = 8,
    spacing_months: int = 3,
    min_pre_months: int = 12,
) -> InTimePlaceboResult:
    """Refit with fake event dates every three months over the two years
    before the true event; each fake date gets fresh weights on its
    shortened pre period and an MSPE ratio over the full window."""
    if pool.series is None:
        raise ValueError("pool has no series attached")
    months = pool.months
    true_pre, _ = pre_post_split(months, true_event_date)
    if len(true_pre) < n_fake * spacing_months:
        raise ValueError(
            f"window has {len(true_pre)} pre months; need at least {n_fake * spacing_months}"
        )
    fake_dates: list[date] = []
    ratios: list[float | None] = []
    skipped: list[date] = []
    base_ord = month_ordinal(months[0])
    for k in range(1, n_fake + 1):
        fake = shift_date_months(true_event_date, -spacing_months * k)
        n_pre_fake = month_ordinal(month_of(fake)) - base_ord + 1
        if n_pre_fake < min_pre_months:
            skipped.append(fake)
            continue
        fake_dates.append(fake)
        ratios.append(fit_pool(pool, fake).ratio)
    true_fit = fit_pool(pool, true_event_date)
    return InTimePlaceboResult(tuple(fake_dates), tuple(ratios), true_fit.ratio, tuple(skipped))
