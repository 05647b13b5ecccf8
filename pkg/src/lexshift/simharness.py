"""Synthetic corpora with known adoption effects, for end-to-end validation.

Each word's latent log10 containment probability follows a common linear
trend plus, for treated words, an extra hinge slope starting at the event
month; observed counts are binomial draws per month. Because ground truth
enters as a hinge slope on the same scale the regression estimates, the
simulated effect and the estimand coincide and the whole causal pipeline
can be checked against known answers.
"""

from __future__ import annotations

import calendar
from dataclasses import dataclass
from datetime import date
from typing import Mapping

import numpy as np

from .corpus import FrequencySeries, Month, frequency_series, month_range, shift_month
from .didreg import (
    PriorSpec,
    build_design,
    sample_posterior,
    summarize,
)
from .syncontrol import (
    DonorPool,
    fit_pool,
    in_time_placebo,
    placebo_test,
    select_donors_random,
    synthetic_series,
)


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class WordSpec:
    word: str
    base_log10: float
    delta_per_year: float = 0.0
    treated: bool | None = None  # None: treated iff delta != 0

    @property
    def is_treated(self) -> bool:
        return self.treated if self.treated is not None else self.delta_per_year != 0.0


@dataclass(frozen=True)
class AdoptionScenario:
    n_months_pre: int
    n_months_post: int
    docs_per_month: int
    words: tuple[WordSpec, ...]
    slope_per_year: float = 0.0
    noise_sd: float = 0.0
    rng_seed: int = 0
    start_month: Month = (2018, 12)

    def __post_init__(self) -> None:
        if self.n_months_pre < 2 or self.n_months_post < 1:
            raise ValueError("need at least 2 pre months and 1 post month")
        if self.docs_per_month < 1:
            raise ValueError("docs_per_month must be >= 1")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be nonnegative")
        names = [w.word for w in self.words]
        if len(set(names)) != len(names):
            raise ValueError("duplicate word names in scenario")
        n_treated = sum(1 for w in self.words if w.is_treated)
        n_null = len(self.words) - n_treated
        if n_treated and n_null < 20 * n_treated:
            raise ValueError(
                f"need at least 20 null words per treated word ({n_null} nulls, {n_treated} treated)"
            )
        # deterministic part of the latent log10 probability must stay below 0
        t = np.arange(self.n_months) / 12.0
        hinge = np.maximum(0.0, t - self.t_event)
        for w in self.words:
            latent = w.base_log10 + self.slope_per_year * t + w.delta_per_year * hinge
            if latent.max() >= 0.0:
                raise ValueError(f"latent probability for {w.word!r} leaves (0, 1)")

    @property
    def n_months(self) -> int:
        return self.n_months_pre + self.n_months_post

    @property
    def months(self) -> tuple[Month, ...]:
        return month_range(self.start_month, shift_month(self.start_month, self.n_months - 1))

    @property
    def event_month(self) -> Month:
        return shift_month(self.start_month, self.n_months_pre - 1)

    @property
    def event_date(self) -> date:
        y, m = self.event_month
        return date(y, m, calendar.monthrange(y, m)[1])

    @property
    def t_event(self) -> float:
        return (self.n_months_pre - 1) / 12.0

    @property
    def treated_words(self) -> tuple[str, ...]:
        return tuple(w.word for w in self.words if w.is_treated)

    @property
    def null_words(self) -> tuple[str, ...]:
        return tuple(w.word for w in self.words if not w.is_treated)


@dataclass(frozen=True)
class SimulatedCorpus:
    scenario: AdoptionScenario
    series: dict[str, FrequencySeries]
    latent_log10: dict[str, np.ndarray]


def simulate_series(scenario: AdoptionScenario) -> SimulatedCorpus:
    """Draw monthly containment counts and build frequency series.

    Latent per-word-month log10 p gets independent normal noise; counts are
    Binomial(docs_per_month, p); the series use the same add-one smoothing
    as corpus ingestion so downstream code sees identical inputs.
    """
    rng = np.random.default_rng(scenario.rng_seed)
    months = scenario.months
    t = np.arange(scenario.n_months) / 12.0
    hinge = np.maximum(0.0, t - scenario.t_event)
    doc_count = np.full(scenario.n_months, scenario.docs_per_month, dtype=np.int64)
    series: dict[str, FrequencySeries] = {}
    latents: dict[str, np.ndarray] = {}
    for spec in scenario.words:
        latent = spec.base_log10 + scenario.slope_per_year * t + spec.delta_per_year * hinge
        if scenario.noise_sd > 0:
            latent = latent + rng.normal(0.0, scenario.noise_sd, size=scenario.n_months)
        p = 10.0**latent
        if np.any(p >= 1.0) or np.any(p <= 0.0):
            raise SimulationError(f"latent probability for {spec.word!r} left (0, 1)")
        contain = rng.binomial(doc_count, p)
        series[spec.word] = frequency_series(spec.word, months, doc_count, contain)
        latents[spec.word] = latent
    return SimulatedCorpus(scenario, series, latents)


@dataclass(frozen=True)
class PipelineRow:
    word: str
    true_delta: float
    effect_mean: float | None = None
    effect_hdi: tuple[float, float] | None = None
    hdi_covers_truth: bool | None = None
    max_rhat: float | None = None
    placebo_p: float | None = None
    treated_ratio: float | None = None
    intime_true_ratio: float | None = None
    intime_fake_max: float | None = None
    intime_true_is_peak: bool | None = None


@dataclass(frozen=True)
class PipelineReport:
    rows: tuple[PipelineRow, ...]

    CSV_HEADER = (
        "word,true_delta,effect_mean,effect_lo95,effect_hi95,hdi_covers_truth,"
        "max_rhat,placebo_p,treated_ratio,intime_true_ratio,intime_fake_max,intime_true_is_peak"
    )

    def write_csv(self, path) -> None:
        def fmt(v) -> str:
            if v is None:
                return ""
            if isinstance(v, bool):
                return str(int(v))
            if isinstance(v, float):
                return repr(v)
            return str(v)

        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.CSV_HEADER + "\n")
            for r in self.rows:
                lo, hi = r.effect_hdi if r.effect_hdi is not None else (None, None)
                cells = [
                    r.word,
                    fmt(r.true_delta),
                    fmt(r.effect_mean),
                    fmt(lo),
                    fmt(hi),
                    fmt(r.hdi_covers_truth),
                    fmt(r.max_rhat),
                    fmt(r.placebo_p),
                    fmt(r.treated_ratio),
                    fmt(r.intime_true_ratio),
                    fmt(r.intime_fake_max),
                    fmt(r.intime_true_is_peak),
                ]
                fh.write(",".join(cells) + "\n")


def _analysis_pool(
    treated: str,
    corpus: SimulatedCorpus,
    pool_size: int,
    rng_seed: int,
) -> DonorPool:
    nulls = corpus.scenario.null_words
    size = min(pool_size, len(set(nulls) - {treated}))
    pool = select_donors_random(treated, nulls, pool_size=size, rng_seed=rng_seed)
    return pool.with_series(corpus.series)


def evaluate_pipeline(
    scenario: AdoptionScenario,
    pool_size: int = 100,
    run_placebo: bool = True,
    run_intime: bool = True,
    run_did: bool = True,
    priors: PriorSpec | None = None,
    chains: int = 4,
    draws_per_chain: int = 1000,
) -> PipelineReport:
    """Run donor selection, synthetic fit, placebo tests, and the DiD
    regression for every treated word, reporting truth vs estimates."""
    if not scenario.treated_words:
        raise ValueError("scenario has no treated word to evaluate")
    corpus = simulate_series(scenario)
    deltas = {w.word: w.delta_per_year for w in scenario.words}
    rows: list[PipelineRow] = []
    for i, word in enumerate(scenario.treated_words):
        pool = _analysis_pool(word, corpus, pool_size, rng_seed=scenario.rng_seed + 7919 * (i + 1))
        fit = fit_pool(pool, scenario.event_date)
        row = PipelineRow(word=word, true_delta=deltas[word], treated_ratio=fit.ratio)
        if run_placebo:
            outcome = placebo_test(pool, scenario.event_date)
            row = _replace(row, placebo_p=outcome.p_value)
        if run_intime:
            it = in_time_placebo(pool, scenario.event_date)
            fakes = [r for r in it.ratios if r is not None]
            peak = (
                it.true_ratio is not None
                and bool(fakes)
                and it.true_ratio > max(fakes)
            )
            row = _replace(
                row,
                intime_true_ratio=it.true_ratio,
                intime_fake_max=max(fakes) if fakes else None,
                intime_true_is_peak=peak,
            )
        if run_did:
            synth = synthetic_series(fit.weights, pool.series)
            dataset, _ = build_design(corpus.series[word], synth, scenario.t_event)
            posterior = sample_posterior(
                dataset,
                priors,
                chains=chains,
                draws_per_chain=draws_per_chain,
                rng_seed=scenario.rng_seed + 104729 * (i + 1),
            )
            summary = summarize(posterior)["beta_gpt_post"]
            lo, hi = summary.hdi95
            row = _replace(
                row,
                effect_mean=summary.mean,
                effect_hdi=summary.hdi95,
                hdi_covers_truth=lo <= deltas[word] <= hi,
                max_rhat=posterior.max_rhat,
            )
        rows.append(row)
    return PipelineReport(tuple(rows))


def _replace(row: PipelineRow, **kwargs) -> PipelineRow:
    from dataclasses import replace as _dc_replace

    return _dc_replace(row, **kwargs)


# -- scenario builders and replicate experiments -------------------------------------


def null_scenario(
    n_null_words: int = 40,
    n_months_pre: int = 48,
    n_months_post: int = 18,
    docs_per_month: int = 4000,
    noise_sd: float = 0.05,
    slope_per_year: float = 0.02,
    base_range: tuple[float, float] = (-1.3, -0.8),
    rng_seed: int = 0,
) -> AdoptionScenario:
    """All-null scenario; the first word is flagged treated for analysis."""
    rng = np.random.default_rng(rng_seed + 555_000_001)
    bases = rng.uniform(*base_range, size=n_null_words + 1)
    words = [WordSpec("subject000", float(bases[0]), 0.0, treated=True)]
    words += [
        WordSpec(f"null{i:03d}", float(bases[i + 1]), 0.0) for i in range(n_null_words)
    ]
    return AdoptionScenario(
        n_months_pre,
        n_months_post,
        docs_per_month,
        tuple(words),
        slope_per_year=slope_per_year,
        noise_sd=noise_sd,
        rng_seed=rng_seed,
    )


def effect_scenario(
    delta_per_year: float = 0.15,
    n_null_words: int = 60,
    n_months_pre: int = 48,
    n_months_post: int = 18,
    docs_per_month: int = 200_000,
    noise_sd: float = 0.05,
    slope_per_year: float = 0.02,
    treated_base: float = -1.0,
    base_range: tuple[float, float] = (-1.05, -0.95),
    rng_seed: int = 0,
) -> AdoptionScenario:
    """One treated word with a known hinge effect over null donors."""
    rng = np.random.default_rng(rng_seed + 555_000_002)
    bases = rng.uniform(*base_range, size=n_null_words)
    words = [WordSpec("adopted000", treated_base, delta_per_year)]
    words += [WordSpec(f"null{i:03d}", float(bases[i]), 0.0) for i in range(n_null_words)]
    return AdoptionScenario(
        n_months_pre,
        n_months_post,
        docs_per_month,
        tuple(words),
        slope_per_year=slope_per_year,
        noise_sd=noise_sd,
        rng_seed=rng_seed,
    )


def run_placebo_calibration(
    replicates: int = 200,
    pool_size: int = 39,
    rng_seed: int = 1,
    **scenario_kwargs,
) -> np.ndarray:
    """Placebo p-values across independent all-null replicates."""
    pvals = np.empty(replicates)
    for r in range(replicates):
        scenario = null_scenario(rng_seed=rng_seed + r, **scenario_kwargs)
        report = evaluate_pipeline(
            scenario, pool_size=pool_size, run_intime=False, run_did=False
        )
        pvals[r] = report.rows[0].placebo_p
    return pvals


def run_effect_recovery(
    replicates: int = 100,
    delta_per_year: float = 0.15,
    pool_size: int = 60,
    rng_seed: int = 2,
    chains: int = 4,
    draws_per_chain: int = 1000,
    **scenario_kwargs,
) -> PipelineReport:
    """DiD effect estimates across replicates of a known-effect scenario."""
    rows: list[PipelineRow] = []
    for r in range(replicates):
        scenario = effect_scenario(
            delta_per_year=delta_per_year, rng_seed=rng_seed + r, **scenario_kwargs
        )
        report = evaluate_pipeline(
            scenario,
            pool_size=pool_size,
            run_placebo=False,
            run_intime=False,
            chains=chains,
            draws_per_chain=draws_per_chain,
        )
        rows.append(report.rows[0])
    return PipelineReport(tuple(rows))


def run_intime_specificity(
    replicates: int = 100,
    delta_per_year: float = 0.3,
    pool_size: int = 25,
    noise_sd: float = 0.02,
    docs_per_month: int = 20_000,
    rng_seed: int = 3,
    **scenario_kwargs,
) -> PipelineReport:
    """In-time placebo outcomes across replicates with a true-date effect."""
    rows: list[PipelineRow] = []
    for r in range(replicates):
        scenario = effect_scenario(
            delta_per_year=delta_per_year,
            noise_sd=noise_sd,
            docs_per_month=docs_per_month,
            n_null_words=max(25, pool_size),
            rng_seed=rng_seed + r,
            **scenario_kwargs,
        )
        report = evaluate_pipeline(
            scenario, pool_size=pool_size, run_placebo=False, run_did=False
        )
        rows.append(report.rows[0])
    return PipelineReport(tuple(rows))


# -- flat scenario config files --------------------------------------------------------


def scenario_from_config(cfg: Mapping[str, str]) -> tuple[AdoptionScenario, dict]:
    """Build a scenario from flat key=value pairs.

    Treated words come from parallel comma-separated lists; null words are
    generated with bases drawn uniformly from a configured range. Returns
    the scenario plus runner options (replicates, pool_size).
    """

    def get(key: str, default: str | None = None) -> str:
        if key in cfg:
            return cfg[key]
        if default is None:
            raise KeyError(f"scenario config missing required key {key!r}")
        return default

    n_pre = int(get("n_months_pre", "48"))
    n_post = int(get("n_months_post", "18"))
    docs = int(get("docs_per_month", "2000"))
    noise = float(get("noise_sd", "0.05"))
    slope = float(get("slope_per_year", "0.0"))
    seed = int(get("seed", "0"))
    start = get("start_month", "2018-12")
    sy, sm = start.split("-")
    start_month = (int(sy), int(sm))

    treated_names = [w.strip() for w in get("treated_words", "").split(",") if w.strip()]
    treated_bases = [float(x) for x in get("treated_bases", "").split(",") if x.strip()]
    treated_deltas = [float(x) for x in get("treated_deltas", "").split(",") if x.strip()]
    if not (len(treated_names) == len(treated_bases) == len(treated_deltas)):
        raise ValueError("treated_words, treated_bases, treated_deltas must align")

    n_null = int(get("n_null_words", "40"))
    lo = float(get("null_base_min", "-1.3"))
    hi = float(get("null_base_max", "-0.8"))
    rng = np.random.default_rng(seed + 555_000_003)
    null_bases = rng.uniform(lo, hi, size=n_null)

    words = [
        WordSpec(name, base, delta, treated=True)
        for name, base, delta in zip(treated_names, treated_bases, treated_deltas)
    ]
    words += [WordSpec(f"null{i:03d}", float(null_bases[i]), 0.0) for i in range(n_null)]
    scenario = AdoptionScenario(
        n_pre,
        n_post,
        docs,
        tuple(words),
        slope_per_year=slope,
        noise_sd=noise,
        rng_seed=seed,
        start_month=start_month,
    )
    options = {
        "replicates": int(get("replicates", "1")),
        "pool_size": int(get("pool_size", "100")),
    }
    return scenario, options
