"""Centred orthonormal frames, subspace distances and frame packings."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codes import Codebook

ORTHO_TOL = 1e-10
SIN_THETA_TOL = 1e-9
# the stacked bound is attained exactly by constant codewords; leave room for roundoff
CERT_RTOL = 1e-12


def check_centered_frame(V, tol: float = ORTHO_TOL) -> np.ndarray:
    """Validate V^T V = I and zero column sums; return V as a float array."""
    V = np.asarray(V, dtype=float)
    if V.ndim != 2 or V.shape[1] > V.shape[0]:
        raise ValueError(f"frame must be a tall m x k matrix, got shape {V.shape}")
    err = np.max(np.abs(V.T @ V - np.eye(V.shape[1]))) if V.size else 0.0
    if err > tol:
        raise ValueError(f"frame is not orthonormal (max |V^T V - I| = {err:.3g})")
    colsum = np.max(np.abs(V.sum(axis=0))) if V.size else 0.0
    if colsum > tol:
        raise ValueError(f"frame columns are not centred (max |column sum| = {colsum:.3g})")
    return V


def random_centered_frame(m: int, k: int, rng, retries: int = 10) -> np.ndarray:
    """Gaussian m x k draw, columns projected off the all-ones vector, then
    orthonormalised (QR)."""
    if not 1 <= k <= m - 1:
        raise ValueError(f"need 1 <= k <= m - 1, got m={m}, k={k}")
    for _ in range(retries):
        X = rng.standard_normal((m, k))
        X -= X.mean(axis=0)
        Q, R = np.linalg.qr(X)
        if np.min(np.abs(np.diag(R))) > 1e-8 * max(1.0, np.max(np.abs(np.diag(R)))):
            Q -= Q.mean(axis=0)
            return Q
    raise RuntimeError(f"rank-deficient draws in {retries} attempts (m={m}, k={k})")


def projection_distance_sq(V, U) -> float:
    """||V V^T - U U^T||_F^2 = 2k - 2 ||V^T U||_F^2 for orthonormal V, U."""
    k = V.shape[1]
    return float(max(0.0, 2.0 * k - 2.0 * np.sum((V.T @ U) ** 2)))


def pairwise_projection_distances(frames) -> np.ndarray:
    """Matrix of ||V_i V_i^T - V_j V_j^T||_F^2 for a stack of frames."""
    F = np.asarray(frames, dtype=float)
    count, _, k = F.shape
    D = np.zeros((count, count))
    for i in range(count - 1):
        G = np.einsum("mk,jml->jkl", F[i], F[i + 1:])
        D[i, i + 1:] = np.maximum(0.0, 2.0 * k - 2.0 * np.sum(G ** 2, axis=(1, 2)))
    return D + D.T


@dataclass(frozen=True, eq=False)
class SinTheta:
    angles: np.ndarray
    sin_theta_sq: float
    proj_distance: float
    linf: tuple

    @property
    def residual(self) -> float:
        return abs(self.sin_theta_sq - self.proj_distance)


def sin_theta_metrics(V, U) -> SinTheta:
    """Canonical angles between span(V) and span(U) plus both distances.

    Angles come from the singular values of V^T U (their cosines); the
    identity ||sin Theta||_F^2 = ||V V^T - U U^T||_F^2 / 2 is checked.
    """
    V = np.asarray(V, dtype=float)
    U = np.asarray(U, dtype=float)
    if V.shape != U.shape:
        raise ValueError(f"dimension mismatch: {V.shape} vs {U.shape}")
    cos = np.clip(np.linalg.svd(V.T @ U, compute_uv=False), 0.0, 1.0)
    angles = np.sort(np.arccos(cos))[::-1]
    sin_sq = float(np.sum(1.0 - cos ** 2))
    E = V @ V.T
    F = U @ U.T
    proj = 0.5 * float(np.sum((E - F) ** 2))
    if abs(sin_sq - proj) > SIN_THETA_TOL:
        raise ArithmeticError(f"sin-theta identity off by {abs(sin_sq - proj):.3g}")
    return SinTheta(angles, sin_sq, proj, (float(np.max(np.abs(E))), float(np.max(np.abs(F)))))


@dataclass(frozen=True, eq=False)
class PackingSet:
    """Frames in the centred Stiefel set with certified separation.

    ``separation_bound`` is the certified lower bound on every pairwise
    ||V V^T - V' V'^T||_F^2, ``min_separation`` the measured minimum and
    ``linf_bound`` a bound on every ||V V^T||_inf.
    """

    frames: np.ndarray
    separation_bound: float
    min_separation: float
    linf_bound: float
    delta: float | None = None
    exhausted: bool = False
    code: Codebook | None = None

    @property
    def size(self) -> int:
        return self.frames.shape[0]

    @property
    def m(self) -> int:
        return self.frames.shape[1]

    @property
    def k(self) -> int:
        return self.frames.shape[2]

    def __len__(self):
        return self.size

    def __getitem__(self, i):
        return self.frames[i]

    def linf_norms(self) -> np.ndarray:
        return np.array([np.max(np.abs(V @ V.T)) for V in self.frames])

    def verify(self) -> list[str]:
        """Recheck every invariant; return a list of violations."""
        problems = []
        for i, V in enumerate(self.frames):
            try:
                check_centered_frame(V)
            except ValueError as exc:
                problems.append(f"frame {i}: {exc}")
        if self.size > 1:
            D = pairwise_projection_distances(self.frames)
            D[np.diag_indices(self.size)] = np.inf
            i, j = np.unravel_index(np.argmin(D), D.shape)
            if D[i, j] < self.separation_bound:
                problems.append(
                    f"separation: frames {i} and {j} at {D[i, j]!r} < certified {self.separation_bound!r}")
        linf = self.linf_norms()
        if linf.size and linf.max() > self.linf_bound:
            problems.append(f"linf: frame {int(linf.argmax())} has {linf.max()!r} > {self.linf_bound!r}")
        return problems


def greedy_frame_packing(m: int, k: int, delta: float = 0.25, target: int = 8,
                         budget: int = 10_000, rng=None) -> PackingSet:
    """Draw random centred frames and keep those at projection distance
    >= delta * k from everything kept so far."""
    if not 1 <= k <= m - 1 - k:
        raise ValueError(f"need 1 <= k <= m - 1 - k, got m={m}, k={k}")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if target < 1:
        raise ValueError("target size must be at least 1")
    rng = rng if rng is not None else np.random.default_rng(0)
    need = delta * k
    kept = []
    draws = 0
    while len(kept) < target and draws < budget:
        draws += 1
        V = random_centered_frame(m, k, rng)
        if all(projection_distance_sq(V, U) >= need for U in kept):
            kept.append(V)
    if len(kept) < min(2, target):
        raise RuntimeError(
            f"budget of {budget} draws exhausted with {len(kept)} frame(s); "
            f"delta={delta} is too large for m={m}, k={k}")
    frames = np.array(kept)
    D = pairwise_projection_distances(frames)
    min_sep = float(np.min(D[np.triu_indices(len(kept), 1)])) if len(kept) > 1 else math.inf
    linf = float(max(np.max(np.abs(V @ V.T)) for V in frames))
    return PackingSet(frames, need, min_sep, linf, delta, exhausted=len(kept) < target)


def block_stack_frames(base: PackingSet, code: Codebook) -> PackingSet:
    """Frames V_w = [U_{w(1)}; ...; U_{w(m2)}] / sqrt(m2), one per codeword.

    Every ||V_w V_w^T||_inf is at most 1/m2.  Pairs at Hamming distance rho
    are separated by at least base_min * (rho / m2)^2, where base_min is the
    measured minimum base separation; the packing certifies it at rho = d.
    """
    if code.N != base.size:
        raise ValueError(f"code alphabet {code.N} does not match {base.size} base frames")
    if base.size > 1 and not base.min_separation > 0:
        raise ValueError("base frames are not mutually separated")
    m2 = code.n
    frames = base.frames[code.words].reshape(code.size, m2 * base.m, base.k) / math.sqrt(m2)
    base_min = base.min_separation if base.size > 1 else 0.0
    cert = base_min * (code.d / m2) ** 2 * (1.0 - CERT_RTOL)
    if code.size > 1:
        D = pairwise_projection_distances(frames)
        min_sep = float(np.min(D[np.triu_indices(code.size, 1)]))
    else:
        min_sep = math.inf
    return PackingSet(frames, cert, min_sep, 1.0 / m2, base.delta, code=code)


def pair_separation_certificate(base: PackingSet, code: Codebook) -> np.ndarray:
    """Per-pair certified lower bound base_min * (rho_H(w, w') / m2)^2,
    shaved by a relative 1e-12 for roundoff."""
    W = code.words
    rho = np.count_nonzero(W[:, None, :] != W[None, :, :], axis=2)
    return base.min_separation * (rho / code.n) ** 2 * (1.0 - CERT_RTOL)


def von_neumann_gap(U1, U2, W1, W2) -> tuple[float, float]:
    """|tr(U2^T U1 W1^T W2)| and sum_l sigma_l(U2^T U1) sigma_l(W1^T W2)."""
    A = U2.T @ U1
    B = W1.T @ W2
    lhs = abs(float(np.trace(A @ B)))
    rhs = float(np.sum(np.linalg.svd(A, compute_uv=False) * np.linalg.svd(B, compute_uv=False)))
    return lhs, rhs
