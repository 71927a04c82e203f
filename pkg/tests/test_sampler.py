import math

import numpy as np
import pytest

from graphon_usvt.graphon import SbmSpec, constant_graphon, from_sbm, trig_decay_graphon
from graphon_usvt.sampler import (LAMBDA_LOWER, LAMBDA_UPPER, LatentSample, bin_counts, bin_index,
                                  chernoff_lower_tail, default_bins, probability_matrix,
                                  sample_adjacency, sample_latents, sample_latents_conditioned,
                                  stream_rng)


def test_empty_sample():
    assert sample_latents(0, stream_rng(1)).n == 0


def test_same_seed_same_vector():
    a = sample_latents(50, seed=7, stream=3)
    b = sample_latents(50, seed=7, stream=3)
    assert np.array_equal(a.xi, b.xi) and a.seed == 7 and a.stream == 3


def test_streams_differ():
    assert not np.array_equal(stream_rng(1, 0).random(5), stream_rng(1, 1).random(5))


def test_large_sample_mean():
    # sd of the mean is 1/sqrt(12 n) ~ 9.1e-4, so 0.005 is about 5.5 sd
    assert abs(sample_latents(100_000, stream_rng(3)).xi.mean() - 0.5) < 0.005


def test_latents_read_only_and_validated():
    xi = sample_latents(5, stream_rng(1))
    with pytest.raises(ValueError):
        xi.xi[0] = 0.3
    with pytest.raises(ValueError):
        LatentSample(np.array([0.2, 1.2]))


class TestProbabilityMatrix:
    def test_constant(self):
        M = probability_matrix(constant_graphon(0.3), sample_latents(3, stream_rng(0)))
        assert np.allclose(M[~np.eye(3, dtype=bool)], 0.3) and np.all(np.diag(M) == 0)

    def test_single_node(self):
        assert probability_matrix(constant_graphon(0.3), np.array([0.4])).tolist() == [[0.0]]

    def test_sbm_lookup(self):
        W = from_sbm(SbmSpec(np.array([[0.6, 0.2], [0.2, 0.6]])))
        assert probability_matrix(W, np.array([0.1, 0.9])) == pytest.approx(np.array([[0, 0.2], [0.2, 0]]))

    def test_bitwise_symmetric(self):
        M = probability_matrix(trig_decay_graphon(2.0, 50), sample_latents(200, stream_rng(4)))
        assert np.array_equal(M, M.T) and np.all(np.diag(M) == 0.0)


class TestAdjacency:
    def test_zero_and_complete(self):
        n = 6
        assert not sample_adjacency(np.zeros((n, n)), stream_rng(0)).any()
        full = np.ones((n, n)) - np.eye(n)
        assert np.array_equal(sample_adjacency(full, stream_rng(0)), full.astype(np.int8))

    def test_rejects_bad_entries(self):
        M = np.full((3, 3), 1.5)
        np.fill_diagonal(M, 0)
        with pytest.raises(ValueError):
            sample_adjacency(M, stream_rng(0))

    def test_density(self):
        n, R = 200, 100
        M = np.full((n, n), 0.3)
        np.fill_diagonal(M, 0)
        rng = stream_rng(5)
        pairs = n * (n - 1) / 2
        dens = np.mean([np.triu(sample_adjacency(M, rng), 1).sum() / pairs for _ in range(R)])
        # sd of the mean density is sqrt(0.21 / (pairs R)) ~ 2.3e-4
        assert abs(dens - 0.3) < 0.01

    def test_entrywise_mean_tracks_source(self):
        n, R = 50, 2000
        M = probability_matrix(trig_decay_graphon(2.0, 20), sample_latents(n, stream_rng(6)))
        rng = stream_rng(7)
        acc = np.zeros((n, n))
        for _ in range(R):
            acc += sample_adjacency(M, rng)
        assert np.max(np.abs(acc / R - M)) <= 0.05


class TestBins:
    def test_counts_example(self):
        bc = bin_counts(np.array([0.1, 0.3, 0.6, 0.9]), 2)
        assert bc.counts.tolist() == [2, 2]

    def test_partition_and_last_bin_closed(self):
        x = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
        assert bin_index(x, 4).tolist() == [0, 1, 2, 3, 3]
        assert bin_counts(x, 4).counts.sum() == 5

    def test_default_bins(self):
        assert default_bins(1000) == 36
        assert default_bins(2) == 1

    def test_zero_bins(self):
        with pytest.raises(ValueError):
            bin_counts(np.array([0.5]), 0)

    def test_single_bin_accepts_first_draw(self):
        cs = sample_latents_conditioned(100, 1, rng=stream_rng(0))
        assert cs.attempts == 1

    def test_conditioned_output_in_event(self):
        cs = sample_latents_conditioned(500, default_bins(500), rng=stream_rng(9))
        assert bin_counts(cs.latents, default_bins(500)).event

    def test_exhausted_attempts(self):
        with pytest.raises(RuntimeError, match="attempts"):
            sample_latents_conditioned(20, 10, 0.99, 1.01, rng=stream_rng(0), max_attempts=5)

    def test_mean_attempts(self):
        rng = stream_rng(10)
        attempts = [sample_latents_conditioned(1000, 36, rng=rng).attempts for _ in range(500)]
        assert np.mean(attempts) <= 4

    @pytest.mark.parametrize("n", [100, 1000])
    @pytest.mark.parametrize("lam", [0.3, 0.5])
    def test_chernoff_certificate(self, n, lam):
        m = default_bins(n)
        rng = stream_rng(11, n)
        trials = 4000
        hits = sum(int(bin_counts(sample_latents(n, rng), m).counts[0] < lam * n / m) for _ in range(trials))
        freq = hits / trials
        se = math.sqrt(max(freq * (1 - freq), 1.0 / trials) / trials)
        assert freq <= chernoff_lower_tail(n, lam) + 3 * se


def test_lambda_defaults():
    assert LAMBDA_LOWER == pytest.approx(1 - 1 / math.sqrt(2))
    assert LAMBDA_UPPER == pytest.approx(1 + 1 / math.sqrt(2))
