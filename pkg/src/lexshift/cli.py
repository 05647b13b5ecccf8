"""Batch command-line front door for the analysis pipeline.

Commands compose through files in the output directory: ``ingest`` writes
the monthly frequency store, ``score`` the word scores, ``synth`` the
fitted synthetic control and paired series, and ``placebo`` / ``intime`` /
``did`` the inference outputs. Every command is deterministic given the
config and seed.
"""

from __future__ import annotations

import json
import sys
from datetime import date
from pathlib import Path

import click
import numpy as np

from . import corpus as corpus_mod
from . import didreg, gptscore, simharness, syncontrol
from .config import RunConfig, parse_flat_config
from .corpus import PreprocessConfig, load_stopwords, month_str
from .embeddings import EmbeddingStore


def _load_config(config_path: str, out: str | None, seed: int | None) -> RunConfig:
    overrides: dict = {}
    if out is not None:
        overrides["out_dir"] = Path(out)
    if seed is not None:
        overrides["seed"] = seed
    try:
        return RunConfig.from_file(config_path, **overrides)
    except (ValueError, FileNotFoundError) as exc:
        raise click.ClickException(str(exc))


def _preprocess_config(cfg: RunConfig) -> PreprocessConfig:
    stopwords = (
        load_stopwords(cfg.stopword_file) if cfg.stopword_file else corpus_mod.DEFAULT_STOPWORDS
    )
    return PreprocessConfig(
        stopwords=stopwords,
        min_token_length=cfg.min_token_length,
        alphabetic_only=cfg.alphabetic_only,
        stemming_enabled=cfg.stemming,
    )


def _write_json(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _fail(message: str, code: int = 1) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


_CONFIG_OPT = click.option("--config", "config_path", required=True, type=click.Path(exists=True))
_OUT_OPT = click.option("--out", "out", default=None, type=click.Path(), help="Output directory override.")
_SEED_OPT = click.option("--seed", "seed", default=None, type=int, help="Root seed override.")


@click.group()
def main() -> None:
    """Detect and causally attribute shifts in word usage over time."""


@main.command()
@_CONFIG_OPT
@_OUT_OPT
@_SEED_OPT
def ingest(config_path: str, out: str | None, seed: int | None) -> None:
    """Read the document corpus and write the monthly frequency store."""
    cfg = _load_config(config_path, out, seed)
    try:
        cfg.require("corpus")
    except FileNotFoundError as exc:
        _fail(str(exc))
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    pre_cfg = _preprocess_config(cfg)
    docs, report = corpus_mod.load_documents(cfg.corpus, (cfg.window_start, cfg.window_end))
    vocab: set[str] = set()
    for doc in docs:
        vocab |= corpus_mod.preprocess(doc, pre_cfg)
    report_path = cfg.out_dir / "ingest_report.json"
    if not docs or not vocab:
        _write_json({"ingest": report.to_dict(), "vocab_size": 0}, report_path)
        _fail(f"no usable documents ingested from {cfg.corpus} (see {report_path})")
    series = corpus_mod.build_frequency_series(
        docs, vocab, (cfg.window_start, cfg.window_end), pre_cfg
    )
    corpus_mod.write_frequency_csv(series, cfg.out_dir / "frequencies.csv")
    _write_json({"ingest": report.to_dict(), "vocab_size": len(vocab)}, report_path)
    click.echo(
        f"ingested {report.kept} documents ({report.total_rejected} rejected), "
        f"{len(vocab)} words -> {cfg.out_dir / 'frequencies.csv'}"
    )


@main.command()
@_CONFIG_OPT
@_OUT_OPT
@_SEED_OPT
def score(config_path: str, out: str | None, seed: int | None) -> None:
    """Score vocabulary words from the paired contrastive corpora."""
    cfg = _load_config(config_path, out, seed)
    try:
        cfg.require("contrastive_dir")
    except FileNotFoundError as exc:
        _fail(str(exc))
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    cells, failures = gptscore.load_contrastive_dir(cfg.contrastive_dir, _preprocess_config(cfg))
    for failure in failures:
        click.echo(f"unreadable cell: {failure}", err=True)
    if not cells:
        _fail("all contrastive cells failed to load")
    scores, dropped = gptscore.score_vocabulary(
        cells,
        n_samples=cfg.score_samples,
        rng_seed=cfg.seed,
        threshold=cfg.score_threshold,
    )
    gptscore.write_scores_csv(scores, cfg.out_dir / "scores.csv")
    _write_json(
        {
            "n_cells": len(cells),
            "n_words": len(scores),
            "dropped_saturated": dropped,
            "unreadable_cells": failures,
            "n_samples": cfg.score_samples,
        },
        cfg.out_dir / "score_report.json",
    )
    click.echo(f"scored {len(scores)} words over {len(cells)} cells")
    for s in scores[: cfg.top_k]:
        click.echo(f"{s.word:>20s}  {s.score:+.4f}  [{s.interval[0]:+.4f}, {s.interval[1]:+.4f}]")


def _build_pool(cfg: RunConfig, word: str, store) -> syncontrol.DonorPool:
    vocab = set(store)
    if cfg.strategy == "random":
        return syncontrol.select_donors_random(word, vocab, cfg.pool_size, rng_seed=cfg.seed)
    cfg.require("embeddings")
    embeddings = EmbeddingStore.from_word2vec_text(cfg.embeddings)
    if cfg.strategy == "synonym":
        return syncontrol.select_donors_synonym(word, embeddings, cfg.pool_size, vocab=vocab)
    scores_path = cfg.out_dir / "scores.csv"
    if not scores_path.exists():
        raise FileNotFoundError(f"untreated strategy needs {scores_path}; run 'score' first")
    scores = gptscore.read_scores_csv(scores_path)
    scores = {w: s for w, s in scores.items() if w in vocab}
    return syncontrol.select_donors_untreated(word, scores, embeddings, cfg.pool_size)


def _load_pool_with_series(cfg: RunConfig, word: str) -> syncontrol.DonorPool:
    freq_path = cfg.out_dir / "frequencies.csv"
    if not freq_path.exists():
        raise FileNotFoundError(f"frequency store not found: {freq_path}; run 'ingest' first")
    store = corpus_mod.read_frequency_csv(freq_path)
    if word not in store:
        raise KeyError(f"word {word!r} not present in the frequency store")
    pool = _build_pool(cfg, word, store)
    return pool.with_series(store)


@main.command()
@_CONFIG_OPT
@_OUT_OPT
@_SEED_OPT
@click.option("--word", required=True, help="Treated word (stem).")
@click.option("--strategy", default=None, type=click.Choice(["untreated", "synonym", "random"]))
def synth(config_path: str, out: str | None, seed: int | None, word: str, strategy: str | None) -> None:
    """Fit a synthetic control for one word and emit plot-ready series."""
    cfg = _load_config(config_path, out, seed)
    if strategy:
        cfg.strategy = strategy
    try:
        pool = _load_pool_with_series(cfg, word)
    except (FileNotFoundError, KeyError, ValueError) as exc:
        _fail(str(exc))
    fit = syncontrol.fit_pool(pool, cfg.event_date)
    word_dir = cfg.out_dir / "synth" / word
    word_dir.mkdir(parents=True, exist_ok=True)
    with open(word_dir / "weights.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("donor,weight\n")
        for donor in pool.donors:
            fh.write(f"{donor},{fit.weights[donor]!r}\n")
    synth_y = syncontrol.synthetic_series(fit.weights, pool.series)
    treated_y = pool.series[word].log_rel_freq
    with open(word_dir / "series.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("ym,y_treated,y_synth\n")
        for m, yt, ys in zip(pool.months, treated_y, synth_y):
            fh.write(f"{month_str(m)},{float(yt)!r},{float(ys)!r}\n")
    didreg.write_paired_series(pool.months, treated_y, synth_y, word_dir / "paired_series.csv")
    _write_json(
        {
            "word": word,
            "strategy": pool.strategy,
            "n_donors": len(pool.donors),
            "pre_mspe": fit.pre_mspe,
            "post_mspe": fit.post_mspe,
            "ratio": fit.ratio,
            "p_value": None,
        },
        word_dir / "summary.json",
    )
    ratio_txt = f"{fit.ratio:.3f}" if fit.ratio is not None else "undefined"
    click.echo(f"{word}: pre_mspe={fit.pre_mspe:.3e} post_mspe={fit.post_mspe:.3e} ratio={ratio_txt}")


@main.command()
@_CONFIG_OPT
@_OUT_OPT
@_SEED_OPT
@click.option("--word", required=True)
@click.option("--strategy", default=None, type=click.Choice(["untreated", "synonym", "random"]))
def placebo(config_path: str, out: str | None, seed: int | None, word: str, strategy: str | None) -> None:
    """Permutation placebo test: rank the word's MSPE ratio among donors."""
    cfg = _load_config(config_path, out, seed)
    if strategy:
        cfg.strategy = strategy
    try:
        pool = _load_pool_with_series(cfg, word)
        outcome = syncontrol.placebo_test(pool, cfg.event_date)
    except (FileNotFoundError, KeyError, ValueError) as exc:
        _fail(str(exc))
    word_dir = cfg.out_dir / "placebo" / word
    word_dir.mkdir(parents=True, exist_ok=True)
    kept = [d for d in pool.donors if d not in outcome.excluded_donors]
    with open(word_dir / "ratios.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("word,ratio\n")
        fh.write(f"{word},{outcome.treated_ratio!r}\n")
        for donor, ratio in zip(kept, outcome.donor_ratios):
            fh.write(f"{donor},{ratio!r}\n")
    _write_json(
        {
            "word": word,
            "treated_ratio": outcome.treated_ratio,
            "p_value": outcome.p_value,
            "n_donor_ratios": len(outcome.donor_ratios),
            "excluded_donors": list(outcome.excluded_donors),
        },
        word_dir / "placebo.json",
    )
    click.echo(f"{word}: ratio={outcome.treated_ratio:.3f} p={outcome.p_value:.4f}")


@main.command()
@_CONFIG_OPT
@_OUT_OPT
@_SEED_OPT
@click.option("--word", required=True)
@click.option("--strategy", default=None, type=click.Choice(["untreated", "synonym", "random"]))
def intime(config_path: str, out: str | None, seed: int | None, word: str, strategy: str | None) -> None:
    """In-time placebo: refit with fake event dates before the true one."""
    cfg = _load_config(config_path, out, seed)
    if strategy:
        cfg.strategy = strategy
    try:
        pool = _load_pool_with_series(cfg, word)
        result = syncontrol.in_time_placebo(pool, cfg.event_date)
    except (FileNotFoundError, KeyError, ValueError) as exc:
        _fail(str(exc))
    word_dir = cfg.out_dir / "intime" / word
    word_dir.mkdir(parents=True, exist_ok=True)
    with open(word_dir / "ratios.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("fake_date,ratio\n")
        for d, r in zip(result.fake_dates, result.ratios):
            fh.write(f"{d.isoformat()},{'' if r is None else repr(r)}\n")
    _write_json(
        {
            "word": word,
            "true_event_date": cfg.event_date.isoformat(),
            "true_ratio": result.true_ratio,
            "fake_dates": [d.isoformat() for d in result.fake_dates],
            "ratios": list(result.ratios),
            "skipped": [d.isoformat() for d in result.skipped],
        },
        word_dir / "summary.json",
    )
    click.echo(f"{word}: true ratio={result.true_ratio} over {len(result.fake_dates)} fake dates")


@main.command()
@_CONFIG_OPT
@_OUT_OPT
@_SEED_OPT
@click.option("--word", required=True)
@click.option("--mode", default=None, type=click.Choice(["hinge", "as_printed"]))
def did(config_path: str, out: str | None, seed: int | None, word: str, mode: str | None) -> None:
    """Bayesian piecewise DiD regression on the synth output for a word."""
    cfg = _load_config(config_path, out, seed)
    if mode:
        cfg.did_mode = mode
    paired_path = cfg.out_dir / "synth" / word / "paired_series.csv"
    if not paired_path.exists():
        _fail(f"paired series not found: {paired_path}; run 'synth --word {word}' first")
    months, y_treated, y_control = didreg.read_paired_series(paired_path)
    try:
        t_event = didreg.t_event_from(months, cfg.event_date)
        dataset, _ = didreg.build_design_from_arrays(y_treated, y_control, t_event, cfg.did_mode)
        posterior = didreg.sample_posterior(
            dataset,
            didreg.PriorSpec(cfg.coef_prior_scale, cfg.sigma_prior_scale),
            chains=cfg.chains,
            draws_per_chain=cfg.draws_per_chain,
            rng_seed=cfg.seed,
        )
    except ValueError as exc:
        _fail(str(exc))
    word_dir = cfg.out_dir / "did" / word
    word_dir.mkdir(parents=True, exist_ok=True)
    payload = didreg.posterior_summary_dict(posterior)
    payload["word"] = word
    payload["mode"] = cfg.did_mode
    payload["rhat_warning"] = posterior.max_rhat > 1.05
    _write_json(payload, word_dir / "posterior.json")
    didreg.write_draws_csv(posterior, word_dir / "draws.csv")
    if posterior.max_rhat > 1.05:
        click.echo(f"warning: split-Rhat above 1.05 (max {posterior.max_rhat:.3f})", err=True)
    s = didreg.summarize(posterior)["beta_gpt_post"]
    click.echo(
        f"{word}: beta_gpt_post={s.mean:+.4f} hdi95=[{s.hdi95[0]:+.4f}, {s.hdi95[1]:+.4f}] "
        f"annual_change={s.annual_pct_change:+.1f}%"
    )


@main.command()
@_CONFIG_OPT
@_OUT_OPT
@_SEED_OPT
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True))
def simulate(config_path: str, out: str | None, seed: int | None, scenario_path: str) -> None:
    """Run the simulation harness and report truth vs pipeline estimates."""
    cfg = _load_config(config_path, out, seed)
    try:
        scenario, options = simharness.scenario_from_config(parse_flat_config(scenario_path))
    except (ValueError, KeyError) as exc:
        _fail(f"invalid scenario: {exc}")
    sim_dir = cfg.out_dir / "simulate"
    sim_dir.mkdir(parents=True, exist_ok=True)
    replicates = options["replicates"]
    rows = []
    for r in range(replicates):
        rep_scenario = scenario if replicates == 1 else _reseed(scenario, scenario.rng_seed + r)
        report = simharness.evaluate_pipeline(
            rep_scenario,
            pool_size=options["pool_size"],
            priors=didreg.PriorSpec(cfg.coef_prior_scale, cfg.sigma_prior_scale),
            chains=cfg.chains,
            draws_per_chain=cfg.draws_per_chain,
        )
        rows.extend(report.rows)
    full = simharness.PipelineReport(tuple(rows))
    full.write_csv(sim_dir / "report.csv")
    effects = [r for r in rows if r.effect_mean is not None]
    calibration = {
        "replicates": replicates,
        "n_rows": len(rows),
        "placebo_rejection_rate_5pct": (
            float(np.mean([r.placebo_p <= 0.05 for r in rows if r.placebo_p is not None]))
            if any(r.placebo_p is not None for r in rows)
            else None
        ),
        "hdi_coverage": (
            float(np.mean([r.hdi_covers_truth for r in effects])) if effects else None
        ),
        "mean_abs_effect_error": (
            float(np.mean([abs(r.effect_mean - r.true_delta) for r in effects])) if effects else None
        ),
        "intime_peak_rate": (
            float(np.mean([r.intime_true_is_peak for r in rows if r.intime_true_is_peak is not None]))
            if any(r.intime_true_is_peak is not None for r in rows)
            else None
        ),
    }
    _write_json(calibration, sim_dir / "calibration.json")
    click.echo(f"simulated {replicates} replicate(s), {len(rows)} treated-word rows")


def _reseed(scenario: simharness.AdoptionScenario, seed: int) -> simharness.AdoptionScenario:
    from dataclasses import replace

    return replace(scenario, rng_seed=seed)


if __name__ == "__main__":
    main()
