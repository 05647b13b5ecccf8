import numpy as np
import pytest

from lexshift.corpus import frequency_series, month_range, shift_month
from lexshift.didreg import (
    PARAM_NAMES,
    DidDataset,
    PriorSpec,
    annual_pct_change,
    build_design,
    build_design_from_arrays,
    hdi,
    read_paired_series,
    sample_posterior,
    split_rhat,
    summarize,
    t_event_from,
    write_draws_csv,
    write_paired_series,
)

from oracles import ols_normal_equations

DIFFUSE = PriorSpec(coef_prior_scale=1e6, sigma_prior_scale=1.0)


def simulate_pair(n_pre=48, n_post=18, coefs=(-1.0, 0.02, -0.01, 0.15), sigma=0.05, seed=1):
    rng = np.random.default_rng(seed)
    n = n_pre + n_post
    t = np.arange(n) / 12.0
    te = (n_pre - 1) / 12.0
    h = np.maximum(0.0, t - te) * (t > te)
    a, b, bp, bg = coefs
    yc = a + b * t + bp * h + rng.normal(0, sigma, n)
    yt = a + b * t + (bp + bg) * h + rng.normal(0, sigma, n)
    return yt, yc, te


class TestBuildDesign:
    def test_pre_event_rows_have_zero_post_terms(self):
        yt, yc, te = simulate_pair()
        for mode in ("hinge", "as_printed"):
            ds, X = build_design_from_arrays(yt, yc, te, mode)
            pre_rows = X[ds.d_post == 0]
            assert np.all(pre_rows[:, 2:] == 0.0)

    def test_hinge_row_one_year_after_event(self):
        yt, yc, te = simulate_pair()
        ds, X = build_design_from_arrays(yt, yc, te)
        n = len(yt)
        idx = n + round((te + 1.0) * 12)  # treated block row at t = te + 1
        assert X[idx] == pytest.approx([1.0, te + 1.0, 1.0, 1.0])

    def test_as_printed_uses_raw_t(self):
        yt, yc, te = simulate_pair()
        ds, X = build_design_from_arrays(yt, yc, te, "as_printed")
        post = ds.d_post == 1
        assert np.all(X[post, 2] == ds.t[post])

    def test_hinge_mean_continuous_at_event(self):
        yt, yc, te = simulate_pair()
        ds, _ = build_design_from_arrays(yt, yc, te)
        rng = np.random.default_rng(0)
        for _ in range(20):
            theta = rng.normal(size=4)

            def mean_at(tv, dg):
                row = np.array([1.0, tv, (tv - te) * (tv > te), dg * (tv - te) * (tv > te)])
                return row @ theta

            for dg in (0, 1):
                left = mean_at(te, dg)
                right = mean_at(te + 1e-9, dg)
                assert abs(right - left) < 1e-6

    def test_grid_mismatch_rejected(self):
        with pytest.raises(ValueError):
            build_design_from_arrays(np.zeros(10), np.zeros(11), 0.3)

    def test_build_design_from_series(self):
        months = month_range((2020, 1), shift_month((2020, 1), 23))
        s = frequency_series("w", months, [50] * 24, list(range(24)))
        control = s.log_rel_freq + 0.01
        ds, X = build_design(s, control, t_event=11 / 12.0)
        assert ds.n_obs == 48
        assert X.shape == (48, 4)

    def test_t_event_from_months(self):
        months = month_range((2018, 12), shift_month((2018, 12), 65))
        from datetime import date

        assert t_event_from(months, date(2022, 11, 30)) == pytest.approx(47 / 12)
        with pytest.raises(ValueError):
            t_event_from(months, date(2024, 5, 20))  # no post months left

    def test_two_groups_required(self):
        t = np.arange(10) / 12.0
        with pytest.raises(ValueError, match="two groups"):
            DidDataset(t, (t > 0.3).astype(int), np.zeros(10, dtype=int), np.zeros(10), 0.3)


class TestSampler:
    def test_constant_series_concentrates(self):
        n = 30
        yc = np.full(n, -2.0)
        yt = np.full(n, -2.0)
        ds, _ = build_design_from_arrays(yt, yc, (20 - 1) / 12.0)
        post = sample_posterior(ds, PriorSpec(), chains=4, draws_per_chain=400, rng_seed=5)
        s = summarize(post)
        assert s["alpha"].mean == pytest.approx(-2.0, abs=0.01)
        for name in ("beta", "beta_post", "beta_gpt_post"):
            assert abs(s[name].mean) < 0.01
        assert np.all(post.flat("sigma") > 0)

    def test_recovers_known_coefficients(self):
        yt, yc, te = simulate_pair(seed=1)
        ds, _ = build_design_from_arrays(yt, yc, te)
        post = sample_posterior(ds, PriorSpec(), rng_seed=42)
        s = summarize(post)
        for name, truth in zip(PARAM_NAMES, (-1.0, 0.02, -0.01, 0.15, 0.05)):
            assert s[name].mean == pytest.approx(truth, abs=0.05)
        assert post.max_rhat < 1.05

    def test_diffuse_prior_matches_ols(self):
        yt, yc, te = simulate_pair(seed=7)
        ds, X = build_design_from_arrays(yt, yc, te)
        post = sample_posterior(ds, DIFFUSE, rng_seed=11)
        ols = ols_normal_equations(X, ds.y)
        s = summarize(post)
        for i, name in enumerate(PARAM_NAMES[:4]):
            assert s[name].mean == pytest.approx(ols[i], abs=1e-2)

    def test_group_swap_negates_effect(self):
        yt, yc, te = simulate_pair(seed=9)
        ds_fwd, _ = build_design_from_arrays(yt, yc, te)
        ds_rev, _ = build_design_from_arrays(yc, yt, te)
        fwd = summarize(sample_posterior(ds_fwd, DIFFUSE, rng_seed=13))
        rev = summarize(sample_posterior(ds_rev, DIFFUSE, rng_seed=14))
        assert rev["beta_gpt_post"].mean == pytest.approx(-fwd["beta_gpt_post"].mean, abs=5e-3)
        assert rev["beta_post"].mean == pytest.approx(
            fwd["beta_post"].mean + fwd["beta_gpt_post"].mean, abs=5e-3
        )

    def test_time_rescaling_contract(self):
        yt, yc, te = simulate_pair(seed=15)
        ds_years, _ = build_design_from_arrays(yt, yc, te)
        # months instead of years: t scaled by 12, slopes shrink by 1/12
        n = len(yt)
        t_m = np.concatenate([np.arange(n), np.arange(n)]).astype(float)
        ds_months = DidDataset(
            t_m,
            (t_m > te * 12).astype(int),
            np.concatenate([np.zeros(n, int), np.ones(n, int)]),
            np.concatenate([yc, yt]),
            te * 12,
        )
        s_years = summarize(sample_posterior(ds_years, DIFFUSE, rng_seed=16))
        s_months = summarize(sample_posterior(ds_months, DIFFUSE, rng_seed=17))
        for name in ("beta", "beta_post", "beta_gpt_post"):
            assert s_months[name].mean == pytest.approx(s_years[name].mean / 12.0, abs=2e-3)

    def test_seed_reproducibility(self):
        yt, yc, te = simulate_pair(seed=21)
        ds, _ = build_design_from_arrays(yt, yc, te)
        a = sample_posterior(ds, PriorSpec(), chains=2, draws_per_chain=200, rng_seed=23)
        b = sample_posterior(ds, PriorSpec(), chains=2, draws_per_chain=200, rng_seed=23)
        assert np.array_equal(a.draws, b.draws)

    def test_rank_deficiency_rejected(self):
        # no post months at all: post columns are identically zero
        n = 20
        t = np.concatenate([np.arange(n), np.arange(n)]) / 12.0
        ds = DidDataset(
            t,
            np.zeros(2 * n, int),
            np.concatenate([np.zeros(n, int), np.ones(n, int)]),
            np.zeros(2 * n),
            t_event=10.0,
        )
        with pytest.raises(ValueError, match="rank"):
            sample_posterior(ds)

    def test_too_few_observations_rejected(self):
        yt, yc, te = np.zeros(3), np.zeros(3), 1 / 12.0
        yt = yt + [0.0, 0.1, 0.2]
        ds, _ = build_design_from_arrays(yt, yc, te)
        with pytest.raises(ValueError, match="observations"):
            sample_posterior(ds)

    def test_rhat_warning_raised(self, monkeypatch):
        import lexshift.didreg as mod

        yt, yc, te = simulate_pair(seed=31)
        ds, _ = build_design_from_arrays(yt, yc, te)
        monkeypatch.setattr(mod, "split_rhat", lambda chains: 2.0)
        with pytest.warns(RuntimeWarning, match="Rhat"):
            sample_posterior(ds, PriorSpec(), chains=2, draws_per_chain=50, rng_seed=1)

    def test_prior_validation(self):
        with pytest.raises(ValueError):
            PriorSpec(coef_prior_scale=0.0)
        with pytest.raises(ValueError):
            PriorSpec(sigma_prior_scale=-1.0)


class TestDiagnostics:
    def test_split_rhat_identical_chains_near_one(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=400)
        chains = np.vstack([x, x, x, x])
        assert split_rhat(chains) == pytest.approx(1.0, abs=0.05)

    def test_split_rhat_detects_shifted_chains(self):
        rng = np.random.default_rng(4)
        chains = np.vstack(
            [rng.normal(0, 1, 400), rng.normal(5, 1, 400), rng.normal(0, 1, 400), rng.normal(5, 1, 400)]
        )
        assert split_rhat(chains) > 1.5


class TestSummaries:
    def test_hdi_shortest_interval(self):
        draws = np.concatenate([np.linspace(0, 1, 950), np.linspace(10, 30, 50)])
        lo, hi = hdi(draws, 0.95)
        assert lo == pytest.approx(0.0, abs=0.01)
        assert hi <= 1.5

    def test_hdi_brackets_median(self):
        rng = np.random.default_rng(8)
        draws = rng.normal(3.0, 1.0, size=4000)
        lo, hi = hdi(draws)
        assert lo <= np.median(draws) <= hi

    def test_percent_change_conversions(self):
        assert annual_pct_change(0.0) == 0.0
        assert annual_pct_change(0.0969) == pytest.approx(25.0, abs=0.05)
        assert annual_pct_change(0.1761) == pytest.approx(50.0, abs=0.05)

    def test_summarize_reports_pct_for_slopes_only(self):
        yt, yc, te = simulate_pair(seed=41)
        ds, _ = build_design_from_arrays(yt, yc, te)
        s = summarize(sample_posterior(ds, PriorSpec(), chains=2, draws_per_chain=300, rng_seed=2))
        assert s["alpha"].annual_pct_change is None
        assert s["sigma"].annual_pct_change is None
        assert s["beta_gpt_post"].annual_pct_change is not None
        for name in PARAM_NAMES:
            assert s[name].hdi95[0] <= s[name].median <= s[name].hdi95[1]


class TestFiles:
    def test_paired_series_round_trip(self, tmp_path):
        months = month_range((2021, 1), (2021, 12))
        yt = np.linspace(-1, -0.5, 12)
        yc = np.linspace(-1.1, -0.6, 12)
        path = tmp_path / "paired.csv"
        write_paired_series(months, yt, yc, path)
        m2, yt2, yc2 = read_paired_series(path)
        assert m2 == list(months)
        assert np.array_equal(yt, yt2) and np.array_equal(yc, yc2)

    def test_draws_csv_header(self, tmp_path):
        yt, yc, te = simulate_pair(seed=51)
        ds, _ = build_design_from_arrays(yt, yc, te)
        post = sample_posterior(ds, PriorSpec(), chains=2, draws_per_chain=150, rng_seed=3)
        path = tmp_path / "draws.csv"
        write_draws_csv(post, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "chain,iter,alpha,beta,beta_post,beta_gpt_post,sigma"
        assert len(lines) == 1 + 2 * 150
