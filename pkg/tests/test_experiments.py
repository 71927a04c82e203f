import math

import numpy as np
import pytest

from graphon_usvt.experiments import (ExperimentConfig, build_graphon, fit_loglog_slope,
                                      run_conditioning_frequency, run_invariance_suite,
                                      run_rate_experiment, theory_slope)
from graphon_usvt.graphon import EigenFunction, SpectralGraphon, trig_decay_graphon
from graphon_usvt.sampler import stream_rng


class TestFit:
    def test_exact_power(self):
        pts = [(n, n ** -0.75) for n in (100, 200, 400, 800)]
        f = fit_loglog_slope(pts)
        assert f.slope == pytest.approx(-0.75) and f.r2 == pytest.approx(1.0)

    def test_constant(self):
        f = fit_loglog_slope([(n, 0.2) for n in (10, 20, 40)])
        assert f.slope == pytest.approx(0.0, abs=1e-12)

    def test_noisy_line_against_closed_form(self):
        rng = np.random.default_rng(0)
        n = np.geomspace(50, 5000, 12)
        y = 2.0 * n ** -0.6 * np.exp(rng.normal(0, 0.05, n.size))
        f = fit_loglog_slope(zip(n, y))
        X = np.column_stack([np.ones(n.size), np.log(n)])
        beta = np.linalg.solve(X.T @ X, X.T @ np.log(y))
        assert f.slope == pytest.approx(beta[1], rel=1e-12)
        assert abs(f.slope + 0.6) <= 2 * f.slope_se

    @pytest.mark.parametrize("pts", [[(10, 1.0)], [(10, 1.0), (20, 0.0)], [(10, 1.0), (10, 2.0)]])
    def test_errors(self, pts):
        with pytest.raises(ValueError):
            fit_loglog_slope(pts)


class TestConfig:
    @pytest.mark.parametrize("kw", [{"n_grid": (100, 50)}, {"n_grid": (4, 50)}, {"replicates": 0},
                                    {"n_grid": ()}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            ExperimentConfig(**kw)

    def test_build_graphon_errors(self):
        with pytest.raises(ValueError, match="graphon.family"):
            build_graphon({"family": "nope"})
        with pytest.raises(ValueError, match="graphon.p"):
            build_graphon({"family": "sbm", "p": 0.3})


class TestRate:
    def test_single_n_has_undefined_slope(self):
        res = run_rate_experiment(ExperimentConfig(n_grid=(60,), replicates=1))
        assert not res.slope_defined and math.isnan(res.slope)
        assert res.fit_json()["slope"] is None

    def test_reproducible(self):
        cfg = ExperimentConfig(n_grid=(40, 80), replicates=3, seed=5)
        a, b = run_rate_experiment(cfg), run_rate_experiment(cfg)
        assert [r.mse for r in a.replicates] == [r.mse for r in b.replicates]

    def test_workers_match_serial(self):
        a = run_rate_experiment(ExperimentConfig(n_grid=(40, 80), replicates=3, seed=5))
        b = run_rate_experiment(ExperimentConfig(n_grid=(40, 80), replicates=3, seed=5, workers=3))
        assert [r.mse for r in a.replicates] == [r.mse for r in b.replicates]

    def test_constant_graphon_fast_rate(self):
        cfg = ExperimentConfig(graphon={"family": "constant", "p": 0.5}, n_grid=(100, 200, 400, 800),
                               replicates=5, seed=3)
        res = run_rate_experiment(cfg)
        assert all(s.mean_rank == 1.0 for s in res.summary)
        assert res.slope <= -0.8

    def test_conditioned_latents(self):
        res = run_rate_experiment(ExperimentConfig(n_grid=(60, 120), replicates=2, conditioned=True))
        assert len(res.replicates) == 4

    def test_failure_names_replicate(self):
        # a graphon that leaves [0, 1] between validation grid points
        W = SpectralGraphon([0.9, 0.2], [EigenFunction.constant(), EigenFunction.trig(1)], validate=False)
        with pytest.raises(RuntimeError, match="replicate 0 at n=40"):
            run_rate_experiment(ExperimentConfig(n_grid=(40,), replicates=1), W)

    def test_theory_slope(self):
        assert theory_slope(2.0) == pytest.approx(-0.75)
        assert theory_slope(1.25) == pytest.approx(-0.6)


class TestConditioning:
    def test_lambda_zero(self):
        res = run_conditioning_frequency(200, 50, lam1=0.0, rng=stream_rng(0))
        assert res.lower.freq == 1.0

    def test_defaults_at_1000(self):
        res = run_conditioning_frequency(1000, 300, rng=stream_rng(1))
        assert res.m == 36 and res.lower.freq > 0.5 and res.joint.freq > 0

    def test_trials(self):
        with pytest.raises(ValueError):
            run_conditioning_frequency(100, 0)


class TestInvariance:
    def test_identity_zero(self):
        rows = run_invariance_suite(trig_decay_graphon(2.0, 20), ["identity"], 256)
        assert rows[0].deviation == 0.0

    def test_half_swap_and_wrap(self):
        rows = run_invariance_suite(trig_decay_graphon(2.0, 40), ["half-swap", "wrap-2"], 1024)
        assert all(r.deviation <= 1e-6 for r in rows)

    def test_rank_one_wrap(self):
        W = SpectralGraphon([0.5], [EigenFunction.constant()])
        W1 = SpectralGraphon([0.4], [EigenFunction.trig(1)], validate=False)
        rows = run_invariance_suite(W1, ["wrap-2"], 1024) + run_invariance_suite(W, ["wrap-2"], 1024)
        assert all(r.deviation <= 1e-6 for r in rows)

    def test_unsupported(self):
        with pytest.raises(ValueError):
            run_invariance_suite(trig_decay_graphon(2.0, 5), ["rotate"], 64)
