"""Universal singular value thresholding for symmetric adjacency matrices."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_THRESHOLD_CONSTANT = 4.0
MAX_N = 6000


@dataclass(frozen=True)
class UsvtConfig:
    """Threshold rule plus post-processing switches.

    Give either an absolute ``tau`` or a constant ``c`` (tau = c sqrt(n));
    with neither, c defaults to 4.
    """

    tau: float | None = None
    c: float | None = None
    clip: bool = True
    zero_diagonal: bool = True
    max_n: int = MAX_N

    def __post_init__(self):
        if self.tau is not None and self.c is not None:
            raise ValueError("give either tau or c, not both")
        if self.tau is not None and not self.tau >= 0:
            raise ValueError("tau must be nonnegative")
        if self.c is not None and not self.c >= 0:
            raise ValueError("c must be nonnegative")

    def threshold(self, n: int) -> float:
        if self.tau is not None:
            return float(self.tau)
        c = DEFAULT_THRESHOLD_CONSTANT if self.c is None else self.c
        return float(c * math.sqrt(n))


@dataclass(frozen=True, eq=False)
class UsvtEstimate:
    M_hat: np.ndarray
    retained: np.ndarray
    singular_values: np.ndarray
    tau: float

    @property
    def retained_rank(self) -> int:
        return int(self.retained.size)


def fingerprint(A) -> str:
    A = np.ascontiguousarray(A)
    return hashlib.sha256(A.shape.__repr__().encode() + A.tobytes()).hexdigest()[:16]


def _check_symmetric(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if not np.array_equal(A, A.T):
        raise ValueError("matrix must be symmetric")
    return A


def check_adjacency(A) -> np.ndarray:
    A = _check_symmetric(A)
    if not np.all((A == 0) | (A == 1)):
        raise ValueError("adjacency matrix must be binary")
    if np.any(np.diag(A) != 0):
        raise ValueError("adjacency matrix must have a zero diagonal")
    return A


def _eigh(A):
    try:
        return np.linalg.eigh(np.asarray(A, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"eigendecomposition failed for matrix {fingerprint(A)}: {exc}"
        ) from exc


def clip_and_zero(M, clip: bool = True, zero_diagonal: bool = True) -> np.ndarray:
    """Round entries into [0, 1], then zero the diagonal."""
    M = np.array(M, dtype=float)
    if clip:
        np.clip(M, 0.0, 1.0, out=M)
    if zero_diagonal:
        np.fill_diagonal(M, 0.0)
    return M


def usvt_estimate(A, cfg: UsvtConfig | None = None) -> UsvtEstimate:
    """USVT estimate of the probability matrix behind adjacency matrix A.

    For symmetric A the singular values are |eigenvalues| and each singular
    pair is u_i, sign(lambda_i) u_i, so sum_{s_i >= tau} s_i u_i v_i^T is the
    eigen-expansion restricted to |lambda_i| >= tau.
    """
    cfg = cfg or UsvtConfig()
    A = check_adjacency(A)
    n = A.shape[0]
    if n > cfg.max_n:
        raise ValueError(f"n = {n} exceeds the dense limit {cfg.max_n}")
    tau = cfg.threshold(n)
    lam, U = _eigh(A)
    order = np.argsort(-np.abs(lam), kind="stable")
    lam, U = lam[order], U[:, order]
    s = np.abs(lam)
    keep = np.flatnonzero(s >= tau)
    Uk = U[:, keep]
    M_hat = (Uk * lam[keep]) @ Uk.T
    M_hat = 0.5 * (M_hat + M_hat.T)
    M_hat = clip_and_zero(M_hat, cfg.clip, cfg.zero_diagonal)
    return UsvtEstimate(M_hat, keep, s, tau)


def mse(M_hat, M) -> float:
    """(1/n^2) * ||M_hat - M||_F^2 over all entries, diagonal included."""
    M_hat = np.asarray(M_hat, dtype=float)
    M = np.asarray(M, dtype=float)
    if M_hat.shape != M.shape or M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"shape mismatch: {M_hat.shape} vs {M.shape}")
    n = M.shape[0]
    if n == 0:
        return 0.0
    return float(np.sum((M_hat - M) ** 2) / n ** 2)


@dataclass(frozen=True, eq=False)
class SpectralProfile:
    eigenvalues: np.ndarray
    singular_values: np.ndarray


def spectral_profile(M) -> SpectralProfile:
    """Eigenvalues sorted by |lambda| descending, and their absolute values."""
    M = _check_symmetric(M)
    lam = _eigh(M)[0]
    lam = lam[np.argsort(-np.abs(lam), kind="stable")]
    return SpectralProfile(lam, np.abs(lam))
