"""Latent variables, probability matrices and adjacency matrices.

Randomness comes from one root seed; independent per-replicate streams are
derived with ``stream_rng(seed, stream)``, which keys a
``numpy.random.SeedSequence`` by ``spawn_key=(stream,)``.  Two streams of the
same seed are statistically independent and each is reproducible on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphon import SpectralGraphon, RANGE_TOL

DEFAULT_SEED = 20240917
LAMBDA_LOWER = 1.0 - 1.0 / math.sqrt(2.0)
LAMBDA_UPPER = 1.0 + 1.0 / math.sqrt(2.0)


def stream_rng(seed: int = DEFAULT_SEED, stream: int = 0, *sub: int) -> np.random.Generator:
    """Generator for replicate stream ``stream`` of root ``seed``.

    Extra integers in ``sub`` split a stream further (e.g. latents vs edges).
    """
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(stream),) + tuple(sub)))


@dataclass(frozen=True, eq=False)
class LatentSample:
    xi: np.ndarray
    seed: int | None = None
    stream: int | None = None

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float).ravel()
        if np.any(~np.isfinite(xi)) or np.any(xi < 0.0) or np.any(xi > 1.0):
            raise ValueError("latent positions must lie in [0, 1]")
        xi.setflags(write=False)
        object.__setattr__(self, "xi", xi)

    @property
    def n(self) -> int:
        return self.xi.size

    def __len__(self):
        return self.xi.size


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return stream_rng(DEFAULT_SEED if rng is None else int(rng))


def sample_latents(n: int, rng=None, *, seed: int | None = None, stream: int | None = None) -> LatentSample:
    """n iid Uniform[0, 1] latent positions.

    Pass a ``Generator`` as ``rng``, or leave it out and give ``seed`` /
    ``stream`` to derive one (the sample then records both).
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if rng is None or not isinstance(rng, np.random.Generator):
        if rng is not None:
            seed = int(rng)
        seed = DEFAULT_SEED if seed is None else seed
        stream = 0 if stream is None else stream
        gen = stream_rng(seed, stream)
    else:
        gen = rng
    return LatentSample(gen.random(n), seed=seed, stream=stream)


def probability_matrix(W: SpectralGraphon, xi) -> np.ndarray:
    """M_ij = W(xi_i, xi_j) for i != j and M_ii = 0.

    The upper triangle is mirrored, so M is bitwise symmetric.
    """
    x = xi.xi if isinstance(xi, LatentSample) else np.asarray(xi, dtype=float).ravel()
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("latent positions must lie in [0, 1]")
    n = x.size
    K = W.kernel(x, x) if n else np.zeros((0, 0))
    M = np.triu(K, 1)
    if n > 1:
        off = M[np.triu_indices(n, 1)]
        if not np.all(np.isfinite(off)):
            raise ValueError("graphon evaluation produced a non-finite value")
        lo, hi = float(off.min()), float(off.max())
        if lo < -RANGE_TOL or hi > 1.0 + RANGE_TOL:
            raise ValueError(f"graphon values outside [0, 1] on this sample: [{lo}, {hi}]")
        np.clip(M, 0.0, 1.0, out=M)
    return M + M.T


def check_probability_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("probability matrix must be square")
    if not np.array_equal(M, M.T):
        raise ValueError("probability matrix must be symmetric")
    if np.any(np.diag(M) != 0.0):
        raise ValueError("probability matrix must have a zero diagonal")
    if np.any(~np.isfinite(M)) or np.any(M < 0.0) or np.any(M > 1.0):
        raise ValueError("probability matrix entries must lie in [0, 1]")
    return M


def sample_adjacency(M, rng=None) -> np.ndarray:
    """Symmetric 0/1 matrix with independent Bernoulli(M_ij) edges for i < j."""
    M = check_probability_matrix(M)
    gen = _as_rng(rng)
    n = M.shape[0]
    iu = np.triu_indices(n, 1)
    A = np.zeros((n, n), dtype=np.int8)
    A[iu] = gen.random(iu[0].size) < M[iu]
    return A + A.T


def default_bins(n: int) -> int:
    """m = floor(n / (4 ln n)), at least 1."""
    if n < 2:
        return 1
    return max(1, int(math.floor(n / (4.0 * math.log(n)))))


def bin_index(x, m: int) -> np.ndarray:
    """0-based bin of each point: bins [(i-1)/m, i/m) with the last bin closed."""
    x = np.asarray(x, dtype=float)
    return np.minimum(np.floor(x * m).astype(np.int64), m - 1)


@dataclass(frozen=True)
class BinCounts:
    counts: np.ndarray
    lower: bool
    upper: bool

    @property
    def event(self) -> bool:
        return self.lower and self.upper


def bin_counts(xi, m: int, lam1: float = LAMBDA_LOWER, lam2: float = LAMBDA_UPPER) -> BinCounts:
    """Counts s_i of latents per bin plus the flags
    ``all(s >= lam1 n/m)`` and ``all(s <= lam2 n/m)``."""
    if m < 1:
        raise ValueError("bin count m must be at least 1")
    x = xi.xi if isinstance(xi, LatentSample) else np.asarray(xi, dtype=float).ravel()
    n = x.size
    s = np.bincount(bin_index(x, m), minlength=m)
    return BinCounts(s, bool(np.all(s >= lam1 * n / m)), bool(np.all(s <= lam2 * n / m)))


@dataclass(frozen=True, eq=False)
class ConditionedSample:
    latents: LatentSample
    attempts: int
    counts: np.ndarray


def sample_latents_conditioned(n: int, m: int, lam1: float = LAMBDA_LOWER,
                               lam2: float = LAMBDA_UPPER, rng=None,
                               max_attempts: int = 10_000) -> ConditionedSample:
    """Rejection-sample latents until every bin holds between lam1 n/m and
    lam2 n/m points."""
    if not 0.0 < lam1 < 1.0 < lam2:
        raise ValueError("need 0 < lam1 < 1 < lam2")
    if m < 1:
        raise ValueError("bin count m must be at least 1")
    gen = _as_rng(rng)
    for attempt in range(1, max_attempts + 1):
        xi = sample_latents(n, gen)
        bc = bin_counts(xi, m, lam1, lam2)
        if bc.event:
            return ConditionedSample(xi, attempt, bc.counts)
    raise RuntimeError(
        f"conditioning event not reached in {max_attempts} attempts "
        f"(n={n}, m={m}, lam1={lam1}, lam2={lam2})"
    )


def chernoff_lower_tail(n: int, lam: float) -> float:
    """Bound n^(-2 (1 - lam)^2) on P(s_1 < lam n/m) at m = n / (4 ln n)."""
    return float(n ** (-2.0 * (1.0 - lam) ** 2))
