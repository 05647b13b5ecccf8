"""Piecewise-linear difference-in-differences regression with Gibbs sampling.

The model regresses log10 relative frequency on a common intercept and
trend, a post-event trend change shared by both series, and an extra
post-event trend change for the treated series only (the causal effect of
interest). Coefficients get zero-mean normal priors and the noise scale a
half-Cauchy prior; the linear-Gaussian structure makes a blocked Gibbs
sampler exact, so no general-purpose MCMC machinery is needed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import FrequencySeries, Month, month_of, month_ordinal

PARAM_NAMES = ("alpha", "beta", "beta_post", "beta_gpt_post", "sigma")
MODES = ("hinge", "as_printed")


@dataclass(frozen=True)
class PriorSpec:
    coef_prior_scale: float = 10.0
    sigma_prior_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.coef_prior_scale <= 0 or self.sigma_prior_scale <= 0:
            raise ValueError("prior scales must be strictly positive")


@dataclass(frozen=True)
class DidDataset:
    """Stacked observations for the control (d_gpt=0) and treated (d_gpt=1)
    series on a shared month grid; t is years since the window start."""

    t: np.ndarray
    d_post: np.ndarray
    d_gpt: np.ndarray
    y: np.ndarray
    t_event: float
    mode: str = "hinge"

    def __post_init__(self) -> None:
        n = len(self.y)
        if not (len(self.t) == len(self.d_post) == len(self.d_gpt) == n):
            raise ValueError("observation arrays must share a length")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        groups = set(np.unique(self.d_gpt).tolist())
        if groups != {0, 1}:
            raise ValueError("need exactly two groups: d_gpt in {0, 1}")
        if not np.array_equal(self.d_post, (self.t > self.t_event).astype(self.d_post.dtype)):
            raise ValueError("d_post must equal 1 exactly when t > t_event")
        for arr in (self.t, self.d_post, self.d_gpt, self.y):
            arr.setflags(write=False)

    @property
    def n_obs(self) -> int:
        return len(self.y)


def design_matrix(dataset: DidDataset) -> np.ndarray:
    t, dp, dg = dataset.t, dataset.d_post.astype(float), dataset.d_gpt.astype(float)
    if dataset.mode == "hinge":
        post_term = (t - dataset.t_event) * dp
    else:
        post_term = t * dp
    return np.column_stack([np.ones_like(t), t, post_term, dg * post_term])


def t_event_from(months: Sequence[Month], event_date: date) -> float:
    """Time coordinate (years since the first month) of the event month."""
    idx = month_ordinal(month_of(event_date)) - month_ordinal(months[0])
    if not 0 <= idx < len(months) - 1:
        raise ValueError("event date must fall inside the series window")
    return idx / 12.0


def build_design(
    treated: FrequencySeries,
    control: np.ndarray,
    t_event: float,
    mode: str = "hinge",
) -> tuple[DidDataset, np.ndarray]:
    """Pair a treated series with its synthetic control into a DiD dataset."""
    control = np.asarray(control, dtype=np.float64)
    if control.shape != treated.log_rel_freq.shape:
        raise ValueError("treated and control series must share the month grid")
    n = len(control)
    t_months = np.arange(n) / 12.0
    t = np.concatenate([t_months, t_months])
    d_gpt = np.concatenate([np.zeros(n, dtype=np.int64), np.ones(n, dtype=np.int64)])
    y = np.concatenate([control, treated.log_rel_freq])
    d_post = (t > t_event).astype(np.int64)
    dataset = DidDataset(t, d_post, d_gpt, y, t_event, mode)
    return dataset, design_matrix(dataset)


def build_design_from_arrays(
    y_treated: np.ndarray,
    y_control: np.ndarray,
    t_event: float,
    mode: str = "hinge",
) -> tuple[DidDataset, np.ndarray]:
    y_treated = np.asarray(y_treated, dtype=np.float64)
    y_control = np.asarray(y_control, dtype=np.float64)
    if y_treated.shape != y_control.shape:
        raise ValueError("treated and control series must share the month grid")
    n = len(y_treated)
    t_months = np.arange(n) / 12.0
    t = np.concatenate([t_months, t_months])
    d_gpt = np.concatenate([np.zeros(n, dtype=np.int64), np.ones(n, dtype=np.int64)])
    y = np.concatenate([y_control, y_treated])
    d_post = (t > t_event).astype(np.int64)
    dataset = DidDataset(t, d_post, d_gpt, y, t_event, mode)
    return dataset, design_matrix(dataset)


@dataclass(frozen=True)
class DidPosterior:
    """Post-warmup draws with shape (chains, draws, 5), columns PARAM_NAMES."""

    draws: np.ndarray
    warmup: int
    rng_seed: int
    rhat: dict[str, float]
    ess: dict[str, float]

    def flat(self, param: str) -> np.ndarray:
        idx = PARAM_NAMES.index(param)
        return self.draws[:, :, idx].reshape(-1)

    @property
    def n_chains(self) -> int:
        return self.draws.shape[0]

    @property
    def draws_per_chain(self) -> int:
        return self.draws.shape[1]

    @property
    def max_rhat(self) -> float:
        return max(self.rhat.values())


def split_rhat(chains: np.ndarray) -> float:
    """Potential scale reduction on half-chains: sqrt(var+ / W)."""
    m, n = chains.shape
    half = n // 2
    seqs = np.vstack([chains[:, :half], chains[:, half : 2 * half]])
    n = half
    means = seqs.mean(axis=1)
    variances = seqs.var(axis=1, ddof=1)
    w = variances.mean()
    b = n * means.var(ddof=1)
    var_plus = (n - 1) / n * w + b / n
    if w <= 0:
        return 1.0
    return float(np.sqrt(var_plus / w))


def effective_sample_size(chains: np.ndarray) -> float:
    """Autocorrelation-based ESS using paired (Geyer) truncation."""
    m, n = chains.shape
    means = chains.mean(axis=1)
    variances = chains.var(axis=1, ddof=1)
    w = variances.mean()
    b = n * means.var(ddof=1) if m > 1 else 0.0
    var_plus = (n - 1) / n * w + b / n
    if var_plus <= 0:
        return float(m * n)
    acov = np.zeros(n)
    for c in range(m):
        x = chains[c] - chains[c].mean()
        full = np.correlate(x, x, mode="full")[n - 1 :] / n
        acov += full
    acov /= m
    rho = 1.0 - (w - acov) / var_plus
    # sum autocorrelations over consecutive pairs while the pair sum stays positive
    tau = 1.0
    t = 1
    while t + 1 < n:
        pair = rho[t] + rho[t + 1]
        if pair <= 0:
            break
        tau += 2.0 * pair
        t += 2
    return float(m * n / tau)


def sample_posterior(
    dataset: DidDataset,
    priors: PriorSpec | None = None,
    chains: int = 4,
    draws_per_chain: int = 1000,
    rng_seed: int = 0,
) -> DidPosterior:
    """Blocked Gibbs over (coefficients | sigma) and (sigma | coefficients).

    The half-Cauchy prior on sigma is expanded with an auxiliary
    inverse-gamma variable so every conditional is conjugate. Each chain
    runs its own substream; an equal-length warm-up is run and discarded
    before the ``draws_per_chain`` retained draws.
    """
    if priors is None:
        priors = PriorSpec()
    X = design_matrix(dataset)
    y = dataset.y
    n, p = X.shape
    if n < 8:
        raise ValueError(f"need at least 8 observations, have {n}")
    if np.linalg.matrix_rank(X) < p:
        raise ValueError("design matrix is rank deficient")

    xtx = X.T @ X
    xty = X.T @ y
    prior_prec = np.eye(p) / priors.coef_prior_scale**2
    a_scale = priors.sigma_prior_scale**2

    warmup = draws_per_chain
    total = warmup + draws_per_chain
    gens = [
        np.random.Generator(np.random.PCG64(np.random.SeedSequence(rng_seed, spawn_key=(c,))))
        for c in range(chains)
    ]
    draws = np.empty((chains, draws_per_chain, 5))

    for c, rng in enumerate(gens):
        # overdispersed start: sigma from its prior
        sigma2 = float(np.clip(priors.sigma_prior_scale * abs(rng.standard_cauchy()), 1e-4, 1e4)) ** 2
        for it in range(total):
            prec = xtx / sigma2 + prior_prec
            chol = np.linalg.cholesky(prec)
            mean = np.linalg.solve(prec, xty / sigma2)
            z = rng.standard_normal(p)
            theta = mean + np.linalg.solve(chol.T, z)
            resid = y - X @ theta
            ssr = float(resid @ resid)
            # auxiliary variable keeping the half-Cauchy conditionals conjugate
            a = (1.0 / sigma2 + 1.0 / a_scale) / rng.standard_gamma(1.0)
            sigma2 = (ssr / 2.0 + 1.0 / a) / rng.standard_gamma((n + 1) / 2.0)
            if it >= warmup:
                draws[c, it - warmup, :4] = theta
                draws[c, it - warmup, 4] = math.sqrt(sigma2)

    rhat = {name: split_rhat(draws[:, :, i]) for i, name in enumerate(PARAM_NAMES)}
    ess = {name: effective_sample_size(draws[:, :, i]) for i, name in enumerate(PARAM_NAMES)}
    posterior = DidPosterior(draws, warmup, rng_seed, rhat, ess)
    bad = {k: v for k, v in rhat.items() if v > 1.05}
    if bad:
        warnings.warn(f"split-Rhat above 1.05 for: {bad}", RuntimeWarning, stacklevel=2)
    return posterior


@dataclass(frozen=True)
class ParamSummary:
    mean: float
    median: float
    hdi95: tuple[float, float]
    annual_pct_change: float | None


def hdi(draws: np.ndarray, mass: float = 0.95) -> tuple[float, float]:
    """Shortest interval containing ``mass`` of the draws."""
    x = np.sort(np.asarray(draws).reshape(-1))
    n = len(x)
    k = max(2, math.ceil(mass * n))  # window of k order statistics
    if k >= n:
        return (float(x[0]), float(x[-1]))
    widths = x[k - 1 :] - x[: n - k + 1]
    i = int(np.argmin(widths))
    return (float(x[i]), float(x[i + k - 1]))


def annual_pct_change(log10_slope: float) -> float:
    """Convert a log10-per-year slope into percent growth per year."""
    return 100.0 * (10.0**log10_slope - 1.0)


def summarize(posterior: DidPosterior) -> dict[str, ParamSummary]:
    if posterior.draws.size == 0:
        raise ValueError("posterior has no draws")
    out: dict[str, ParamSummary] = {}
    for name in PARAM_NAMES:
        x = posterior.flat(name)
        mean = float(x.mean())
        pct = annual_pct_change(mean) if name in ("beta", "beta_post", "beta_gpt_post") else None
        out[name] = ParamSummary(mean, float(np.median(x)), hdi(x), pct)
    return out


# -- file interchange --------------------------------------------------------------

PAIRED_CSV_HEADER = "year,month,y_treated,y_control"
DRAWS_CSV_HEADER = "chain,iter,alpha,beta,beta_post,beta_gpt_post,sigma"


def write_paired_series(
    months: Sequence[Month], y_treated: np.ndarray, y_control: np.ndarray, path: str | Path
) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(PAIRED_CSV_HEADER + "\n")
        for (y, mo), yt, yc in zip(months, y_treated, y_control):
            fh.write(f"{y},{mo},{float(yt)!r},{float(yc)!r}\n")


def read_paired_series(path: str | Path) -> tuple[list[Month], np.ndarray, np.ndarray]:
    months: list[Month] = []
    yt: list[float] = []
    yc: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != PAIRED_CSV_HEADER:
            raise ValueError(f"unexpected paired-series header: {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            y, mo, a, b = line.split(",")
            months.append((int(y), int(mo)))
            yt.append(float(a))
            yc.append(float(b))
    return months, np.array(yt), np.array(yc)


def write_draws_csv(posterior: DidPosterior, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(DRAWS_CSV_HEADER + "\n")
        for c in range(posterior.n_chains):
            for i in range(posterior.draws_per_chain):
                vals = ",".join(repr(float(v)) for v in posterior.draws[c, i])
                fh.write(f"{c},{i},{vals}\n")


def posterior_summary_dict(posterior: DidPosterior) -> dict:
    summaries = summarize(posterior)
    return {
        "params": {
            name: {
                "mean": s.mean,
                "median": s.median,
                "hdi95": list(s.hdi95),
                "annual_pct_change": s.annual_pct_change,
            }
            for name, s in summaries.items()
        },
        "diagnostics": {
            "rhat": posterior.rhat,
            "ess": posterior.ess,
            "warmup_iterations": posterior.warmup,
        },
        "chains": posterior.n_chains,
        "draws_per_chain": posterior.draws_per_chain,
        "seed": posterior.rng_seed,
    }
