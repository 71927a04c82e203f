import numpy as np
import pytest

from graphon_usvt.graphon import (EigenFunction, SbmSpec, SpectralGraphon, constant_graphon, from_sbm,
                                  tail_eigen_sum, trig_decay_graphon)
from graphon_usvt.sampler import probability_matrix, sample_latents, stream_rng
from graphon_usvt.spectra import (diagonal_constant, diagonal_tail_check, diagonal_tail_profile,
                                  eigen_tail_profile, low_rank_truncation, offdiagonal_moment,
                                  tail_bound, tail_decay_certificate)


def draw(W, n, seed=0):
    xi = sample_latents(n, stream_rng(seed))
    return xi, probability_matrix(W, xi)


def test_rank_r_tail_vanishes():
    M = np.outer([1, 2, 3.0], [1, 2, 3.0]) / 20
    t = eigen_tail_profile(M).t
    assert abs(t[1]) < 1e-15 and abs(t[2]) < 1e-15


def test_t0_is_frobenius():
    _, M = draw(trig_decay_graphon(2.0, 30), 120)
    assert eigen_tail_profile(M).t[0] == pytest.approx(np.sum(M ** 2) / 120 ** 2, rel=1e-12)


def test_constant_graphon_two_ways():
    n = 300
    _, M = draw(constant_graphon(0.5), n)
    lam = np.linalg.eigvalsh(M)
    top = lam[np.argmax(np.abs(lam))]
    t1 = eigen_tail_profile(M).t[1]
    assert t1 == pytest.approx((np.sum(M ** 2) - top ** 2) / n ** 2, abs=1e-10)


def test_profile_monotone_nonnegative():
    _, M = draw(trig_decay_graphon(2.0, 40), 150)
    t = eigen_tail_profile(M).t
    assert np.all(t >= -1e-15) and np.all(np.diff(t) <= 1e-15)


class TestTruncation:
    W = trig_decay_graphon(2.0, 20)

    def test_zero_rank(self):
        xi, _ = draw(self.W, 10)
        assert not low_rank_truncation(self.W, xi, 0).any()

    def test_full_rank_matches_offdiagonal(self):
        xi, M = draw(self.W, 40)
        N = low_rank_truncation(self.W, xi, self.W.rank)
        off = ~np.eye(40, dtype=bool)
        assert np.allclose(N[off], M[off], atol=1e-12)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_offdiagonal_residual_nonincreasing(self, seed):
        # M has a zero diagonal while N_k does not, so only off-diagonal entries are compared
        xi, M = draw(self.W, 60, seed)
        off = ~np.eye(60, dtype=bool)
        res = [np.linalg.norm((M - low_rank_truncation(self.W, xi, k))[off]) for k in range(self.W.rank + 1)]
        assert all(b <= a + 1e-12 for a, b in zip(res, res[1:]))

    def test_too_large(self):
        xi, _ = draw(self.W, 5)
        with pytest.raises(ValueError):
            low_rank_truncation(self.W, xi, 21)

    @pytest.mark.parametrize("k", [1, 5, 20])
    def test_eckart_young_direction(self, k):
        W = trig_decay_graphon(2.0, 60)
        xi, M = draw(W, 200, seed=k)
        tail = eigen_tail_profile(M).t[k]
        assert tail <= np.sum((M - low_rank_truncation(W, xi, k)) ** 2) / 200 ** 2 + 1e-15


class TestDiagonal:
    def test_finite_rank_zero(self):
        W = trig_decay_graphon(2.0, 10)
        assert diagonal_tail_check(W, 10) == 0.0
        assert diagonal_tail_check(constant_graphon(0.3), 1) == 0.0

    def test_decreasing(self):
        W = trig_decay_graphon(2.0, 200)
        assert diagonal_tail_check(W, 50) < diagonal_tail_check(W, 5)

    def test_step_exact_on_grid(self):
        B = np.array([[0.6, 0.2, 0.1], [0.2, 0.5, 0.3], [0.1, 0.3, 0.4]])
        W = from_sbm(SbmSpec(B))
        prof = diagonal_tail_profile(W, 3 * 1024)
        # oracle: per-block diagonal tails integrated exactly over the 3 blocks
        F = W.features(np.array([1 / 6, 1 / 2, 5 / 6]))
        terms = F ** 2 * W.eigenvalues
        tails = np.cumsum(terms[:, ::-1], axis=1)[:, ::-1]
        exact = np.sqrt(np.mean(tails ** 2, axis=0))
        assert prof[:-1] == pytest.approx(exact, abs=1e-12)
        assert prof[-1] == 0.0

    def test_constant_reports_components(self):
        W = trig_decay_graphon(2.0, 200)
        d = diagonal_constant(W)
        assert d.value == pytest.approx(2 * d.trace_norm + 2 * d.B)


class TestCertificate:
    def test_finite_rank_past_rank(self):
        W = trig_decay_graphon(2.0, 8)
        cert = tail_decay_certificate(W, 120, [10, 20], 5, seed=1)
        for r in cert.rows:
            assert r.mc_estimate <= cert.diag.value / cert.n + 3 * r.std_err

    def test_alpha_two_passes_and_monotone(self):
        W = trig_decay_graphon(2.0, 200)
        cert = tail_decay_certificate(W, 300, [1, 10], 10, seed=2)
        assert cert.passed
        assert cert.rows[0].mc_estimate > cert.rows[1].mc_estimate

    def test_bound_closed_form(self):
        assert tail_bound(2.0, 1.0, 10, 500, 5.0) == pytest.approx(2 * 10 ** -3 / 3 + 0.01)

    def test_needs_metadata_and_alpha(self):
        with pytest.raises(ValueError):
            tail_decay_certificate(constant_graphon(0.5), 50, [1], 2)
        W = SpectralGraphon([0.5], [EigenFunction.constant()], alpha=0.5, C=0.5)
        with pytest.raises(ValueError):
            tail_decay_certificate(W, 50, [1], 2)

    def test_workers_match_serial(self):
        W = trig_decay_graphon(2.0, 30)
        a = tail_decay_certificate(W, 80, [2, 5], 4, seed=3, workers=1)
        b = tail_decay_certificate(W, 80, [2, 5], 4, seed=3, workers=3)
        assert [r.mc_estimate for r in a.rows] == [r.mc_estimate for r in b.rows]


@pytest.mark.parametrize("k", [2, 10])
def test_offdiagonal_moment_bound(k):
    W = trig_decay_graphon(2.0, 200)
    est, se = offdiagonal_moment(W, k, 100_000, stream_rng(41, k))
    assert est <= 2 * tail_eigen_sum(W, k) + 3 * se
