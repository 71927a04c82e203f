"""From graphon eigen-decay to tail decay of probability-matrix spectra."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graphon import SpectralGraphon, tail_eigen_sum, trace_norm
from .sampler import DEFAULT_SEED, LatentSample, probability_matrix, sample_latents, stream_rng
from .usvt import _check_symmetric, _eigh

DIAGONAL_GRID = 4096


@dataclass(frozen=True, eq=False)
class TailProfile:
    """t[k] = (1/n^2) * sum_{i > k} lambda_i^2 for k = 0..n-1."""

    t: np.ndarray
    n: int
    replicates: int = 1
    std_err: np.ndarray | None = field(default=None)

    def __getitem__(self, k):
        return self.t[k]


def eigen_tail_profile(M) -> TailProfile:
    M = _check_symmetric(M)
    n = M.shape[0]
    lam = _eigh(M)[0]
    sq = lam[np.argsort(-np.abs(lam), kind="stable")] ** 2
    # 0-based t[k] sums the eigenvalues after the k largest
    t = np.cumsum(sq[::-1])[::-1] / n ** 2 if n else np.zeros(0)
    return TailProfile(t, n)


def low_rank_truncation(W: SpectralGraphon, xi, k: int) -> np.ndarray:
    """N = sum_{i <= k} omega_i Phi_i Phi_i^T, diagonal kept."""
    if not 0 <= k <= W.rank:
        raise ValueError(f"k = {k} exceeds the listed rank {W.rank}")
    x = xi.xi if isinstance(xi, LatentSample) else np.asarray(xi, dtype=float)
    if k == 0:
        return np.zeros((x.size, x.size))
    F = W.features(x)[:, :k]
    N = (F * W.eigenvalues[:k]) @ F.T
    return 0.5 * (N + N.T)


def diagonal_tail_profile(W: SpectralGraphon, grid: int = DIAGONAL_GRID) -> np.ndarray:
    """Entry k is the L2 norm (midpoint rule) of sum_{i > k} omega_i phi_i(x)^2,
    for k = 0..rank."""
    if grid < 1:
        raise ValueError("grid must be at least 1")
    g = (np.arange(grid) + 0.5) / grid
    terms = W.features(g) ** 2 * W.eigenvalues
    tails = np.cumsum(terms[:, ::-1], axis=1)[:, ::-1]
    tails = np.column_stack([tails, np.zeros(grid)])
    return np.sqrt(np.mean(tails ** 2, axis=0))


def diagonal_tail_check(W: SpectralGraphon, k: int, grid: int = DIAGONAL_GRID) -> float:
    if k < 0:
        raise ValueError("k must be nonnegative")
    prof = diagonal_tail_profile(W, grid)
    return float(prof[min(k, W.rank)])


@dataclass(frozen=True)
class DiagonalConstant:
    """C_diag = 2 * trace norm + 2 * B, with B = max_k ||diagonal tail_k||^2."""

    trace_norm: float
    B: float

    @property
    def value(self) -> float:
        return 2.0 * self.trace_norm + 2.0 * self.B


def diagonal_constant(W: SpectralGraphon, grid: int = DIAGONAL_GRID) -> DiagonalConstant:
    return DiagonalConstant(trace_norm(W), float(np.max(diagonal_tail_profile(W, grid) ** 2)))


@dataclass(frozen=True)
class CertificateRow:
    k: int
    mc_estimate: float
    std_err: float
    bound: float
    passed: bool
    listed_tail_bound: float


@dataclass(frozen=True, eq=False)
class TailCertificate:
    rows: list
    diag: DiagonalConstant
    n: int
    replicates: int
    alpha: float
    C: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def tail_bound(alpha: float, C: float, k: int, n: int, c_diag: float) -> float:
    """2 C^2 k^(1 - 2 alpha) / (2 alpha - 1) + C_diag / n."""
    return 2.0 * C ** 2 * k ** (1.0 - 2.0 * alpha) / (2.0 * alpha - 1.0) + c_diag / n


def _tail_replicate(W, n, seed, r):
    xi = sample_latents(n, stream_rng(seed, r))
    return eigen_tail_profile(probability_matrix(W, xi)).t


def monte_carlo_tail(W: SpectralGraphon, n: int, replicates: int, seed: int = DEFAULT_SEED,
                     workers: int = 1) -> TailProfile:
    """Average of eigen_tail_profile over independent (xi, M) draws."""
    if replicates < 1:
        raise ValueError("need at least one replicate")
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(workers) as pool:
            profiles = list(pool.map(lambda r: _tail_replicate(W, n, seed, r), range(replicates)))
    else:
        profiles = [_tail_replicate(W, n, seed, r) for r in range(replicates)]
    P = np.vstack(profiles)
    se = P.std(axis=0, ddof=1) / math.sqrt(replicates) if replicates > 1 else np.zeros(n)
    return TailProfile(P.mean(axis=0), n, replicates, se)


def tail_decay_certificate(W: SpectralGraphon, n: int, ks, replicates: int,
                           seed: int = DEFAULT_SEED, workers: int = 1) -> TailCertificate:
    """Monte Carlo check of the tail-decay bound for each cut in ``ks``.

    A cut passes when the averaged tail is at most the bound plus three
    standard errors.
    """
    if W.alpha is None:
        raise ValueError("graphon carries no decay metadata")
    if W.alpha <= 0.5:
        raise ValueError("tail-decay certificate needs alpha > 1/2")
    ks = [int(ks)] if np.isscalar(ks) else [int(k) for k in ks]
    if any(k < 1 or k >= n for k in ks):
        raise ValueError("cuts must satisfy 1 <= k <= n - 1")
    diag = diagonal_constant(W)
    prof = monte_carlo_tail(W, n, replicates, seed, workers)
    rows = []
    for k in ks:
        bound = tail_bound(W.alpha, W.C, k, n, diag.value)
        # same decomposition with the exact tail of the listed eigenvalues
        listed = 2.0 * tail_eigen_sum(W, k) + diag.value / n
        est, se = float(prof.t[k]), float(prof.std_err[k])
        rows.append(CertificateRow(k, est, se, bound, est <= bound + 3.0 * se, listed))
    return TailCertificate(rows, diag, n, replicates, W.alpha, W.C)


def offdiagonal_moment(W: SpectralGraphon, k: int, pairs: int, rng) -> tuple[float, float]:
    """Monte Carlo E|M_uv - N_uv|^2 over independent latent pairs, with its
    standard error."""
    x = rng.random(pairs)
    y = rng.random(pairs)
    Fx, Fy = W.features(x), W.features(y)
    resid = np.sum(Fx[:, k:] * Fy[:, k:] * W.eigenvalues[k:], axis=1)
    sq = resid ** 2
    return float(sq.mean()), float(sq.std(ddof=1) / math.sqrt(pairs))

