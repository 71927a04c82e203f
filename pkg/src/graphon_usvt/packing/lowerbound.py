"""Step graphons indexed by frames, Bernoulli KL bounds and Fano ingredients."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import rel_entr

from ..graphon import EigenFunction, SpectralGraphon, step_block_index
from ..sampler import LAMBDA_LOWER, LAMBDA_UPPER, LatentSample, bin_counts, probability_matrix
from .frames import PackingSet, check_centered_frame

L_CAP = 0.1
KL_CONST = 16.0 / 3.0
SAFE_RANGE = (0.25, 0.75)


@dataclass(frozen=True)
class LowerBoundValidity:
    """Entry range of W_V over block pairs plus the a-priori envelope."""

    lo: float
    hi: float
    argmin: tuple
    argmax: tuple
    envelope_hi: float

    @property
    def ok(self) -> bool:
        return self.lo >= SAFE_RANGE[0] and self.hi <= SAFE_RANGE[1]


def _block_values(V, alpha, L):
    k = V.shape[1]
    m = V.shape[0]
    return 0.5 + L * k ** (-alpha) * m * (V @ V.T)


def lower_bound_validity(V, alpha: float, L: float) -> LowerBoundValidity:
    V = np.asarray(V, dtype=float)
    k = V.shape[1]
    B = _block_values(V, alpha, L)
    amin = np.unravel_index(np.argmin(B), B.shape)
    amax = np.unravel_index(np.argmax(B), B.shape)
    return LowerBoundValidity(float(B[amin]), float(B[amax]),
                              (int(amin[0]) + 1, int(amin[1]) + 1),
                              (int(amax[0]) + 1, int(amax[1]) + 1),
                              0.5 + 4.0 * L * k ** (1.0 - alpha))


def build_lower_bound_graphon(V, alpha: float, L: float) -> SpectralGraphon:
    """W_V(x, y) = 1/2 + L k^-alpha sum_i phi_i(x) phi_i(y), phi_i the step
    function of column i of V on m equal blocks.

    Every block value must lie in [1/4, 3/4]; otherwise the error names the
    (1-based) offending block pair.
    """
    if not L > 0:
        raise ValueError("L must be positive")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    V = check_centered_frame(V)
    k = V.shape[1]
    val = lower_bound_validity(V, alpha, L)
    if not val.ok:
        bad, where = (val.lo, val.argmin) if val.lo < SAFE_RANGE[0] else (val.hi, val.argmax)
        raise ValueError(f"W_V entry {bad!r} on block pair {where} leaves [1/4, 3/4]; L={L!r} is too large")
    omega = [0.5] + [L * k ** (-alpha)] * k
    funcs = [EigenFunction.constant()] + [EigenFunction.step(V[:, i]) for i in range(k)]
    return SpectralGraphon(omega, funcs, alpha=alpha, C=max(0.5, L * 2.0 ** alpha),
                           name=f"lower-bound(m={V.shape[0]}, k={k})", validate=False)


def max_valid_L(frames, alpha: float, cap: float = L_CAP) -> float:
    """Largest L <= cap keeping every W_V in [1/4, 3/4].

    Block values are 1/2 + L k^-alpha m (V V^T)_ab, linear in L, so the
    limit is k^alpha / (4 m max|V V^T|) in closed form.
    """
    F = np.asarray(frames, dtype=float)
    if F.ndim == 2:
        F = F[None]
    _, m, k = F.shape
    peak = max(float(np.max(np.abs(V @ V.T))) for V in F)
    limit = k ** alpha / (4.0 * m * peak) * (1.0 - 1e-12)
    return float(min(cap, limit))


def kl_bernoulli(p, q):
    """KL(Ber(p) || Ber(q)) in nats; inf where q hits 0 or 1 and p does not."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any((p < 0) | (p > 1) | (q < 0) | (q > 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    out = rel_entr(p, q) + rel_entr(1.0 - p, 1.0 - q)
    return float(out) if out.ndim == 0 else out


def kl_bound_check(p, q):
    """KL(p || q) <= (16/3)(q - p)^2, defined for p, q in [1/4, 3/4]."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    lo, hi = SAFE_RANGE
    if np.any((p < lo) | (p > hi) | (q < lo) | (q > hi)):
        raise ValueError("the quadratic KL bound only applies on [1/4, 3/4]")
    ok = kl_bernoulli(p, q) <= KL_CONST * (q - p) ** 2
    return bool(ok) if np.ndim(ok) == 0 else ok


@dataclass(frozen=True, eq=False)
class FanoReport:
    alpha_N: float
    beta_N: float
    log_M: float
    ratio: float
    L: float
    n: int
    m: int
    k: int
    pair_mse: np.ndarray
    proj_dist: np.ndarray
    distance_ratio: np.ndarray
    bracket: np.ndarray
    separation_floor: float

    @property
    def size(self) -> int:
        return self.pair_mse.shape[0]

    def bracket_holds(self, rtol: float = 1e-9) -> bool:
        iu = np.triu_indices(self.size, 1)
        r = self.distance_ratio[iu]
        lo, hi = self.bracket[0][iu], self.bracket[1][iu]
        return bool(np.all(r >= lo * (1 - rtol) - 1e-15) and np.all(r <= hi * (1 + rtol) + 1e-15))

    def summary(self) -> dict:
        return {"alpha_N": self.alpha_N, "beta_N": self.beta_N, "log_M": self.log_M,
                "ratio": self.ratio, "L": self.L, "n": self.n, "m": self.m, "k": self.k,
                "size": self.size, "separation_floor": self.separation_floor,
                "bracket_holds": self.bracket_holds()}


def block_counts(xi, m: int) -> np.ndarray:
    """Latents per block under the step convention ((j-1)/m, j/m]."""
    x = xi.xi if isinstance(xi, LatentSample) else np.asarray(xi, dtype=float)
    return np.bincount(step_block_index(x, m), minlength=m)


def subspace_distance_ratio(V, U, s) -> tuple[float, float, float]:
    """Exact ||M_V - M_U||_F^2 / (n^2 k^-2a L^2 ||D||_F^2) from block counts s,
    with its bracket.

    With D = V V^T - U U^T, the numerator equals (k^-a L m)^2 times
    sum_ab s_a s_b D_ab^2 - sum_a s_a D_aa^2 (the diagonal of M is zero).
    """
    s = np.asarray(s, dtype=float)
    m = s.size
    n = s.sum()
    D = V @ V.T - U @ U.T
    dd = float(np.sum(D ** 2))
    if dd == 0.0:
        raise ValueError("identical subspaces")
    diag = float(np.sum(np.diag(D) ** 2))
    num = float(s @ (D ** 2) @ s) - float(np.sum(s * np.diag(D) ** 2))
    scale = (m / n) ** 2
    ratio = scale * num / dd
    lo = scale * (s.min() ** 2 - s.max() * diag / dd)
    hi = scale * s.max() ** 2
    return ratio, lo, hi


def fano_diagnostics(packing: PackingSet, xi, alpha: float, L: float | None = None,
                     lam1: float = LAMBDA_LOWER, lam2: float = LAMBDA_UPPER) -> FanoReport:
    """Separation and KL ingredients of the Fano argument on one latent draw.

    ``xi`` must satisfy the bin-count event for the packing's own m.
    """
    frames = packing.frames if isinstance(packing, PackingSet) else np.asarray(packing, dtype=float)
    size, m, k = frames.shape
    if size < 2:
        raise ValueError("a packing needs at least 2 frames")
    x = xi.xi if isinstance(xi, LatentSample) else np.asarray(xi, dtype=float)
    n = x.size
    bc = bin_counts(x, m, lam1, lam2)
    if not bc.event:
        raise ValueError(f"latents fall outside the conditioning event for m={m} "
                         f"(bin counts {bc.counts.min()}..{bc.counts.max()})")
    L = max_valid_L(frames, alpha) if L is None else float(L)
    Ms = [probability_matrix(build_lower_bound_graphon(V, alpha, L), x) for V in frames]
    s = block_counts(x, m)
    sq = np.zeros((size, size))
    proj = np.zeros((size, size))
    ratio = np.full((size, size), np.nan)
    bracket = np.full((2, size, size), np.nan)
    for i in range(size):
        for j in range(i + 1, size):
            sq[i, j] = sq[j, i] = float(np.sum((Ms[i] - Ms[j]) ** 2))
            D = frames[i] @ frames[i].T - frames[j] @ frames[j].T
            proj[i, j] = proj[j, i] = float(np.sum(D ** 2))
            if proj[i, j] == 0.0:
                raise ValueError(f"frames {i} and {j} span the same subspace")
            r, lo, hi = subspace_distance_ratio(frames[i], frames[j], s)
            ratio[i, j] = ratio[j, i] = r
            bracket[:, i, j] = bracket[:, j, i] = (lo, hi)
    iu = np.triu_indices(size, 1)
    alpha_N = float(np.min(sq[iu])) / n ** 2
    beta_N = KL_CONST * float(np.max(sq[iu]))
    log_M = math.log(size)
    floor = lam1 ** 2 * k ** (-2.0 * alpha) * L ** 2 * float(np.min(proj[iu]))
    return FanoReport(alpha_N, beta_N, log_M, (beta_N + math.log(2.0)) / log_M, L, n, m, k,
                      sq / n ** 2, proj, ratio, bracket, floor)


@dataclass(frozen=True)
class LowerBoundDims:
    n: int
    k: int
    m: int
    m1: int
    m2: int
    d: int


def lower_bound_dimensions(n: int, alpha: float, max_steps: int = 100_000) -> LowerBoundDims:
    """k = max(1, floor((n ln n)^(1/(2 alpha)))), m1 = 4k, m = floor(n / (4 ln n)).

    n is raised until m1 divides m exactly (m2 = m / m1 >= 1); the code
    distance is d = ceil(m2 / 4).
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    for cand in range(n, n + max_steps):
        k = max(1, int(math.floor((cand * math.log(cand)) ** (1.0 / (2.0 * alpha)))))
        m1 = 4 * k
        m = max(1, int(math.floor(cand / (4.0 * math.log(cand)))))
        if m >= m1 and m % m1 == 0:
            m2 = m // m1
            return LowerBoundDims(cand, k, m, m1, m2, max(1, math.ceil(m2 / 4)))
    raise RuntimeError(f"no admissible n in [{n}, {n + max_steps})")
