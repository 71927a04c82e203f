import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphon_usvt.graphon import (EigenFunction, MeasurePreservingMap, SbmSpec, SpectralGraphon,
                                  apply_measure_preserving, constant_graphon, decay_envelope_check,
                                  diagonal_partial_sums, discretize_operator, evaluate, from_sbm,
                                  inner_product, operator_spectrum, parse_map, step_block_index,
                                  tail_eigen_sum, trace_norm, trig_decay_graphon)


def cos_graphon(a=0.1):
    return SpectralGraphon([0.5, a], [EigenFunction.constant(), EigenFunction.trig(1, "cos")])


class TestEigenFunction:
    def test_step_norm_is_one(self):
        v = np.array([0.6, -0.8, 0.0])
        f = EigenFunction.step(v)
        assert abs(inner_product(f, f) - 1.0) < 1e-12

    def test_step_rejects_non_unit_coefficients(self):
        with pytest.raises(ValueError):
            EigenFunction.step([1.0, 1.0])

    def test_half_open_boundaries(self):
        # ((j-1)/m, j/m]: 0.5 belongs to block 1 of 2, 0 goes to block 1
        assert step_block_index(np.array([0.0, 0.5, 0.5000001, 1.0]), 2).tolist() == [0, 0, 1, 1]

    def test_trig_orthonormal_closed_form(self):
        fs = [EigenFunction.constant()] + [EigenFunction.trig(f, p) for f in (1, 2, 3) for p in ("cos", "sin")]
        G = np.array([[inner_product(a, b) for b in fs] for a in fs])
        assert np.max(np.abs(G - np.eye(len(fs)))) < 1e-12

    def test_step_trig_inner_product_matches_quadrature(self):
        f = EigenFunction.step(np.array([1, -1, 2, 0]) / math.sqrt(6))
        g = EigenFunction.trig(3, "sin")
        x = (np.arange(200_000) + 0.5) / 200_000
        assert inner_product(f, g) == pytest.approx(np.mean(f(x) * g(x)), abs=1e-8)

    def test_step_step_different_block_counts(self):
        f = EigenFunction.step(np.array([1.0, -1.0]) / math.sqrt(2))
        g = EigenFunction.step(np.array([1.0, 1.0, -1.0]) / math.sqrt(3))
        x = (np.arange(6000) + 0.5) / 6000
        assert inner_product(f, g) == pytest.approx(np.mean(f(x) * g(x)), abs=1e-12)


class TestEvaluate:
    def test_constant(self):
        assert evaluate(constant_graphon(0.3), 0.3, 0.7) == pytest.approx(0.3)

    def test_sbm_lookup(self):
        W = from_sbm(SbmSpec(np.array([[0.6, 0.2], [0.2, 0.6]])))
        assert evaluate(W, 0.1, 0.9) == pytest.approx(0.2, abs=1e-14)

    def test_trig_closed_form(self):
        assert evaluate(cos_graphon(), 0.0, 0.0) == pytest.approx(0.7)

    @pytest.mark.parametrize("x", [-0.1, 1.5, float("nan")])
    def test_out_of_range(self, x):
        with pytest.raises(ValueError):
            evaluate(constant_graphon(0.5), x, 0.5)

    def test_vectorised(self):
        out = evaluate(cos_graphon(), np.array([0.0, 0.5]), np.array([0.0, 0.0]))
        assert out == pytest.approx([0.7, 0.3])


class TestConstruction:
    def test_invalid_range_rejected(self):
        with pytest.raises(ValueError, match="leaves"):
            SpectralGraphon([0.5, 0.4], [EigenFunction.constant(), EigenFunction.trig(1)])

    def test_non_orthonormal_rejected(self):
        with pytest.raises(ValueError, match="orthonormal"):
            SpectralGraphon([0.3, 0.1], [EigenFunction.trig(1), EigenFunction.trig(1)])

    def test_sort_order_and_read_only(self):
        W = SpectralGraphon([0.1, 0.5, -0.1],
                            [EigenFunction.trig(1), EigenFunction.constant(), EigenFunction.trig(2)])
        assert W.eigenvalues.tolist() == [0.5, 0.1, -0.1]
        with pytest.raises(ValueError):
            W.eigenvalues[0] = 0.2

    def test_decay_metadata_validated(self):
        with pytest.raises(ValueError, match="decay"):
            SpectralGraphon([0.5, 0.2], [EigenFunction.constant(), EigenFunction.trig(1)], alpha=2, C=0.5)


class TestSbm:
    def test_rank_one(self):
        W = from_sbm(SbmSpec(np.full((2, 2), 0.4)))
        nz = W.eigenvalues[np.abs(W.eigenvalues) > 1e-12]
        assert nz == pytest.approx([0.4])
        x = np.linspace(0, 1, 7)
        idx = int(np.argmax(np.abs(W.eigenvalues)))
        assert np.allclose(np.abs(W.eigenfunctions[idx](x)), 1.0)

    @pytest.mark.parametrize("B,expected", [
        ([[0.6, 0.2], [0.2, 0.6]], [0.4, 0.2]),
        ([[0.3, 0.0], [0.0, 0.3]], [0.15, 0.15]),
    ])
    def test_eigenvalues_against_discretisation(self, B, expected):
        W = from_sbm(SbmSpec(np.array(B)))
        assert sorted(W.eigenvalues) == pytest.approx(sorted(expected), abs=1e-12)
        assert operator_spectrum(W, 400)[:2] == pytest.approx(sorted(expected, reverse=True), abs=1e-3)

    @pytest.mark.parametrize("B", [[[0.5, 0.1], [0.2, 0.5]], [[1.2, 0.0], [0.0, 0.5]], [[0.1, 0.2]]])
    def test_bad_matrices(self, B):
        with pytest.raises(ValueError):
            from_sbm(SbmSpec(np.array(B)))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 8), st.integers(0, 10_000))
    def test_eigenvalues_times_k_equal_eig_b(self, k, seed):
        rng = np.random.default_rng(seed)
        X = rng.random((k, k))
        B = np.triu(X) + np.triu(X, 1).T
        W = from_sbm(SbmSpec(B))
        assert np.sort(W.eigenvalues * k) == pytest.approx(np.linalg.eigvalsh(B), abs=1e-10)


class TestDecay:
    def test_equality_everywhere_passes(self):
        funcs = [EigenFunction.constant()] + [EigenFunction.trig(f) for f in range(1, 4)]
        W = SpectralGraphon(0.1 * np.arange(1, 5) ** -2.0, funcs)
        k = np.arange(1, 5)
        ok, idx = decay_envelope_check(W, 2.0, float(W.eigenvalues[0]))
        assert ok and idx is None
        assert np.all(W.eigenvalues == pytest.approx(W.eigenvalues[0] * k ** -2.0))

    def test_first_violation_index(self):
        W = SpectralGraphon([0.25, 0.25], [EigenFunction.constant(), EigenFunction.trig(1)], validate=False)
        assert decay_envelope_check(W, 1.0, 0.25) == (False, 2)

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            decay_envelope_check(constant_graphon(0.5), 0.0, 1.0)

    def test_tail_sums(self):
        W = trig_decay_graphon(2.0, 10)
        assert tail_eigen_sum(W, 10) == 0.0
        assert tail_eigen_sum(W, 0) == pytest.approx(float(np.sum(W.eigenvalues ** 2)))

    def test_harmonic_tail_under_envelope(self):
        # omega_i = i^-1 listed to 10^4; the tail past k = 10 is below 1/10
        omega = 1.0 / np.arange(1, 10_001)
        tail = float(np.sum(omega[10:] ** 2))
        # only the eigenvalue list matters here, so skip validation of the basis
        W = SpectralGraphon(omega, [EigenFunction.constant()] * omega.size, alpha=1.0, C=1.0,
                            validate=False)
        got, bound = tail_eigen_sum(W, 10, envelope=True)
        assert got == pytest.approx(tail)
        assert bound == pytest.approx(0.1) and got <= bound

    def test_envelope_needs_alpha_above_half(self):
        W = SpectralGraphon([0.5], [EigenFunction.constant()], alpha=0.5, C=0.5)
        with pytest.raises(ValueError):
            tail_eigen_sum(W, 1, envelope=True)

    @pytest.mark.parametrize("alpha", [1.25, 2.0, 3.0])
    def test_trig_family_valid(self, alpha):
        W = trig_decay_graphon(alpha, 200)
        lo, hi = W.range_on_grid(512)
        assert 0.0 <= lo and hi <= 1.0
        assert decay_envelope_check(W, alpha, W.C)[0]

    def test_trig_family_pure_power_law_when_possible(self):
        W = trig_decay_graphon(2.0, 200)
        k = np.arange(1, 201)
        assert W.eigenvalues == pytest.approx(W.C * k ** -2.0, rel=1e-12)


class TestMaps:
    def test_parse(self):
        assert parse_map("wrap-3") == MeasurePreservingMap("wrap", 3)
        for bad in ("spin", "wrap-x", "wrap-0"):
            with pytest.raises(ValueError):
                parse_map(bad)

    def test_identity_unchanged(self):
        W = cos_graphon()
        V = apply_measure_preserving(W, "identity")
        x = np.linspace(0, 1, 11)
        assert np.array_equal(V.kernel(x, x), W.kernel(x, x))

    def test_constant_invariant(self):
        W = constant_graphon(0.4)
        for tag in ("half-swap", "wrap-3"):
            x = np.linspace(0, 1, 9)
            assert np.allclose(apply_measure_preserving(W, tag).kernel(x, x), 0.4)

    @pytest.mark.parametrize("tag,grid", [("half-swap", 1000), ("wrap-2", 1000), ("wrap-5", 1000)])
    def test_spectrum_invariance(self, tag, grid):
        W = trig_decay_graphon(2.0, 20)
        h = parse_map(tag)
        after = operator_spectrum(apply_measure_preserving(W, h), grid)
        ref = h.matched_resolution(grid)
        before = np.concatenate([operator_spectrum(W, ref), np.zeros(grid - ref)])
        assert np.max(np.abs(np.sort(after) - np.sort(before))) < 1e-6

    def test_composed_inner_products(self):
        h = parse_map("wrap-2")
        f = EigenFunction.trig(1).compose(h)
        g = EigenFunction.trig(2).compose(h)
        assert inner_product(f, g) == pytest.approx(0.0, abs=1e-12)


class TestDiscretisation:
    def test_constant(self):
        spec = operator_spectrum(constant_graphon(0.3), 50)
        assert spec[0] == pytest.approx(0.3) and np.allclose(spec[1:], 0, atol=1e-14)

    def test_trig(self):
        spec = operator_spectrum(cos_graphon(), 1000)
        assert spec[:2] == pytest.approx([0.5, 0.1], abs=1e-9)

    def test_symmetric(self):
        D = discretize_operator(trig_decay_graphon(2.0, 30), 64)
        assert np.array_equal(D, D.T)

    def test_zero_grid(self):
        with pytest.raises(ValueError):
            discretize_operator(constant_graphon(0.5), 0)


def test_diagonal_partial_sums_stop_at_rank():
    W = trig_decay_graphon(2.0, 12)
    x = np.linspace(0, 1, 33)
    S = diagonal_partial_sums(W, x)
    assert np.allclose(S[-1], np.diag(W.kernel(x, x)), atol=1e-14)


def test_trace_norm():
    assert trace_norm(from_sbm(SbmSpec(np.array([[0.2, 0.6], [0.6, 0.2]])))) == pytest.approx(0.4 + 0.2)
