import gc
import time

import numpy as np
import pytest
from scipy.stats import t as t_dist

from tarp.data import Dataset
from tarp.ensemble import (
    PLAIN_RP_BASELINE,
    ReplicateError,
    TarpConfig,
    fit_tarp,
    m_range,
    mixture_t_quantile,
    predict_tarp,
    sample_config_grid,
)
from tarp.posterior import central_interval, predictive
from tarp.projection import compress


def toy_dataset(seed=0, n=60, p=25, informative=4):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    beta = np.zeros(p)
    beta[:informative] = 1.5
    y = X @ beta + rng.standard_normal(n)
    return Dataset(X, y)


class TestConfigGrid:
    def test_documented_range(self):
        # ceil(2 ln 2000) = 16, floor(3*200/4) = 150
        assert m_range(200, 2000) == (16, 150)
        configs = sample_config_grid(200, 2000, 200, master_seed=1)
        ms = np.array([c.m for c in configs])
        assert ms.min() >= 16 and ms.max() <= 150

    def test_psi_range(self):
        configs = sample_config_grid(100, 500, 100, master_seed=2)
        psis = np.array([c.psi for c in configs])
        assert np.all((psis > 0.1) & (psis < 0.4))

    def test_deterministic(self):
        a = sample_config_grid(100, 400, 10, master_seed=3)
        b = sample_config_grid(100, 400, 10, master_seed=3)
        assert a == b
        c = sample_config_grid(100, 400, 10, master_seed=4)
        assert a != c

    def test_single_config(self):
        configs = sample_config_grid(50, 100, 1, master_seed=0)
        assert len(configs) == 1

    def test_clamps_for_tiny_n(self):
        # 2 ln p exceeds 3n/4: the range resets to start at 1
        lo, hi = m_range(6, 1000)
        assert (lo, hi) == (1, 4)

    def test_pcr_has_no_psi(self):
        configs = sample_config_grid(50, 100, 5, variant="ris_pcr", master_seed=0)
        assert all(c.psi is None for c in configs)

    def test_rejects_bad_count(self):
        with pytest.raises(ValueError):
            sample_config_grid(50, 100, 0)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TarpConfig(m=0, psi=0.2, delta=1.0, variant="ris_rp", seed=1)
        with pytest.raises(ValueError):
            TarpConfig(m=3, psi=0.7, delta=1.0, variant="ris_rp", seed=1)
        with pytest.raises(ValueError):
            TarpConfig(m=3, psi=0.2, delta=1.0, variant="nope", seed=1)


class TestFitTarp:
    def test_identical_seeds_identical_posteriors(self):
        ds = toy_dataset()
        cfg = TarpConfig(m=5, psi=0.2, delta=1.0, variant="ris_rp", seed=99)
        model = fit_tarp(ds, [cfg, cfg, cfg])
        locations = [rep.posterior.location for rep in model.replicates]
        for loc in locations[1:]:
            np.testing.assert_array_equal(loc, locations[0])

    def test_baseline_skips_screening(self):
        ds = toy_dataset()
        cfg = TarpConfig(
            m=5, psi=0.2, delta=1.0, variant=PLAIN_RP_BASELINE, seed=3
        )
        model = fit_tarp(ds, [cfg])
        assert model.replicates[0].projection.gamma.count == ds.p

    def test_replicates_share_data_hash(self):
        ds = toy_dataset()
        model = fit_tarp(ds, sample_config_grid(ds.n, ds.p, 3, master_seed=5))
        assert len(model.train_data_hash) == 64

    def test_thread_count_does_not_change_results(self):
        ds = toy_dataset()
        configs = sample_config_grid(ds.n, ds.p, 6, master_seed=6)
        m1 = fit_tarp(ds, configs, threads=1)
        m4 = fit_tarp(ds, configs, threads=4)
        for r1, r4 in zip(m1.replicates, m4.replicates):
            np.testing.assert_array_equal(
                r1.posterior.location, r4.posterior.location
            )

    def test_replicate_error_carries_index(self):
        ds = toy_dataset()
        good = sample_config_grid(ds.n, ds.p, 2, master_seed=7)
        bad = TarpConfig(m=5, psi=0.2, delta=1.0, variant="ris_rp", seed=1)
        object.__setattr__(bad, "m", -3)  # corrupt after validation
        with pytest.raises(ReplicateError, match="replicate 2"):
            fit_tarp(ds, [*good, bad])

    def test_empty_config_list_rejected(self):
        with pytest.raises(ValueError):
            fit_tarp(toy_dataset(), [])

    def test_runtime_roughly_linear_in_replicates(self):
        # fixed (n, p, m) per replicate: wall time should track the count,
        # within a factor of 2 of linear; batches are sized so each run is
        # hundreds of milliseconds, large enough to swamp timer/GC noise
        ds = toy_dataset(n=300, p=3000)
        small = [
            TarpConfig(m=200, psi=0.3, delta=1.0, variant=PLAIN_RP_BASELINE, seed=i)
            for i in range(6)
        ]
        large = small * 5

        def best_of(configs, tries=3):
            times = []
            for _ in range(tries):
                gc.collect()
                start = time.perf_counter()
                fit_tarp(ds, configs)
                times.append(time.perf_counter() - start)
            return min(times)

        ratio = best_of(large) / best_of(small)
        assert 5 / 2 <= ratio <= 5 * 2


class TestMixtureQuantile:
    def test_single_component_matches_t_quantile(self):
        q = mixture_t_quantile(
            np.array([7.0]), np.array([[1.0, 2.0]]), np.array([[4.0, 9.0]]), 0.25
        )
        expected = np.array([1.0, 2.0]) + t_dist.ppf(0.25, 7.0) * np.array([2.0, 3.0])
        np.testing.assert_allclose(q, expected, atol=1e-8)

    def test_identical_components_collapse(self):
        locs = np.tile([[0.5, -1.0]], (4, 1))
        scales = np.tile([[1.0, 2.0]], (4, 1))
        dfs = np.full(4, 10.0)
        q = mixture_t_quantile(dfs, locs, scales, 0.75)
        expected = mixture_t_quantile(dfs[:1], locs[:1], scales[:1], 0.75)
        np.testing.assert_allclose(q, expected, atol=1e-10)

    def test_cdf_at_solution_hits_target(self):
        rng = np.random.default_rng(0)
        N, k = 6, 9
        dfs = rng.uniform(4, 40, N)
        locs = rng.standard_normal((N, k))
        scales = rng.uniform(0.5, 3.0, (N, k))
        for prob in (0.25, 0.5, 0.75):
            q = mixture_t_quantile(dfs, locs, scales, prob)
            cdf = t_dist.cdf(
                (q[None, :] - locs) / np.sqrt(scales), dfs[:, None]
            ).mean(axis=0)
            np.testing.assert_allclose(cdf, prob, atol=1e-8)

    def test_bracketed_by_component_quantiles(self):
        rng = np.random.default_rng(1)
        dfs = rng.uniform(5, 30, 5)
        locs = rng.standard_normal((5, 4))
        scales = rng.uniform(0.5, 2.0, (5, 4))
        q = mixture_t_quantile(dfs, locs, scales, 0.3)
        comp = locs + t_dist.ppf(0.3, dfs)[:, None] * np.sqrt(scales)
        assert np.all(q >= comp.min(axis=0) - 1e-12)
        assert np.all(q <= comp.max(axis=0) + 1e-12)

    def test_mixture_cdf_monotone_in_prob(self):
        rng = np.random.default_rng(2)
        dfs = rng.uniform(5, 30, 4)
        locs = rng.standard_normal((4, 3))
        scales = rng.uniform(0.5, 2.0, (4, 3))
        quantiles = [
            mixture_t_quantile(dfs, locs, scales, prob)
            for prob in (0.1, 0.25, 0.5, 0.75, 0.9)
        ]
        for lower, higher in zip(quantiles, quantiles[1:]):
            assert np.all(lower < higher)

    def test_invalid_prob(self):
        with pytest.raises(ValueError):
            mixture_t_quantile(np.ones(1), np.zeros((1, 1)), np.ones((1, 1)), 0.0)


class TestPredictTarp:
    def test_single_replicate_equals_plain_interval(self):
        ds = toy_dataset()
        configs = sample_config_grid(ds.n, ds.p, 1, master_seed=11)
        model = fit_tarp(ds, configs)
        X_new = np.random.default_rng(12).standard_normal((15, ds.p))
        pred = predict_tarp(model, X_new, level=0.5)
        rep = model.replicates[0]
        Xs = model.standardization.transform_design(X_new)
        single = predictive(rep.posterior, compress(Xs, rep.projection))
        lo, hi = central_interval(single, 0.5)
        shift = model.standardization.response_mean
        np.testing.assert_allclose(pred.lower, lo + shift, atol=1e-7)
        np.testing.assert_allclose(pred.upper, hi + shift, atol=1e-7)

    def test_point_prediction_permutation_invariant(self):
        ds = toy_dataset()
        configs = sample_config_grid(ds.n, ds.p, 5, master_seed=13)
        X_new = np.random.default_rng(14).standard_normal((8, ds.p))
        fwd = predict_tarp(fit_tarp(ds, configs), X_new)
        rev = predict_tarp(fit_tarp(ds, configs[::-1]), X_new)
        np.testing.assert_allclose(fwd.point, rev.point, atol=1e-12)

    def test_decentering_commutes_with_averaging(self):
        ds = toy_dataset()
        configs = sample_config_grid(ds.n, ds.p, 4, master_seed=15)
        model = fit_tarp(ds, configs)
        X_new = np.random.default_rng(16).standard_normal((6, ds.p))
        pred = predict_tarp(model, X_new)
        Xs = model.standardization.transform_design(X_new)
        centered = np.mean(
            [
                compress(Xs, rep.projection) @ rep.posterior.location
                for rep in model.replicates
            ],
            axis=0,
        )
        np.testing.assert_allclose(
            pred.point,
            model.standardization.inverse_response(centered),
            atol=1e-12,
        )

    def test_deterministic_end_to_end(self):
        ds = toy_dataset()
        X_new = np.random.default_rng(17).standard_normal((5, ds.p))

        def run():
            configs = sample_config_grid(ds.n, ds.p, 3, master_seed=18)
            model = fit_tarp(ds, configs, master_seed=18)
            return predict_tarp(model, X_new, level=0.5)

        a, b = run(), run()
        np.testing.assert_array_equal(a.point, b.point)
        np.testing.assert_array_equal(a.lower, b.lower)
        np.testing.assert_array_equal(a.upper, b.upper)

    def test_binary_prediction_averages_probabilities(self):
        rng = np.random.default_rng(19)
        X = rng.standard_normal((80, 10))
        y = (X[:, 0] + 0.5 * rng.standard_normal(80) > 0).astype(float)
        ds = Dataset(X, y, response_kind="binary")
        configs = sample_config_grid(ds.n, ds.p, 3, master_seed=20)
        model = fit_tarp(ds, configs)
        pred = predict_tarp(model, X[:10])
        assert pred.response_kind == "binary"
        assert np.all((pred.probability >= 0) & (pred.probability <= 1))
        assert pred.point is None

    def test_dimension_mismatch(self):
        ds = toy_dataset()
        model = fit_tarp(ds, sample_config_grid(ds.n, ds.p, 2, master_seed=21))
        with pytest.raises(ValueError):
            predict_tarp(model, np.zeros((3, ds.p + 1)))
