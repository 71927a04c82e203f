"""Graphons represented through a finite spectral expansion.

A graphon is stored as a list of eigenvalue / eigenfunction pairs

    W(x, y) = sum_i omega_i * phi_i(x) * phi_i(y)

with eigenfunctions drawn from three closed-form families (constant, step,
trigonometric).  Closed forms make orthonormality and range checks exact or
cheap, and every infinite-decay family is realised by truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

VALIDATION_GRID = 512
RANGE_TOL = 1e-9

# ---------------------------------------------------------------------------
# measure-preserving maps


@dataclass(frozen=True)
class MeasurePreservingMap:
    """A built-in measure-preserving bijection of [0, 1] (up to null sets).

    ``kind`` is ``"identity"``, ``"half-swap"`` (x -> x + 1/2 mod 1) or
    ``"wrap"`` (x -> fold*x - floor(fold*x)).
    """

    kind: str
    fold: int = 1

    def __post_init__(self):
        if self.kind not in ("identity", "half-swap", "wrap"):
            raise ValueError(f"unsupported measure-preserving map {self.kind!r}")
        if self.kind == "wrap" and (int(self.fold) != self.fold or self.fold < 1):
            raise ValueError(f"wrap fold must be a positive integer, got {self.fold}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "identity":
            return x
        if self.kind == "half-swap":
            return np.where(x <= 0.5, x + 0.5, x - 0.5)
        fx = self.fold * x
        return fx - np.floor(fx)

    @property
    def tag(self) -> str:
        return f"wrap-{self.fold}" if self.kind == "wrap" else self.kind

    def matched_resolution(self, grid: int) -> int:
        """Grid size m' such that this map sends the midpoint grid of size
        ``grid`` onto (copies of) the midpoint grid of size m'."""
        if self.kind == "wrap":
            if grid % self.fold:
                raise ValueError(f"grid {grid} is not divisible by wrap fold {self.fold}")
            return grid // self.fold
        if self.kind == "half-swap" and grid % 2:
            raise ValueError("half-swap needs an even grid to map midpoints onto midpoints")
        return grid


def parse_map(tag) -> MeasurePreservingMap:
    """Accept a map object or a tag such as ``"half-swap"``, ``"wrap-3"``."""
    if isinstance(tag, MeasurePreservingMap):
        return tag
    if tag in ("identity", "half-swap"):
        return MeasurePreservingMap(tag)
    if isinstance(tag, str) and tag.startswith("wrap-"):
        try:
            return MeasurePreservingMap("wrap", int(tag[5:]))
        except ValueError:
            pass
    raise ValueError(f"unsupported measure-preserving map {tag!r}")


# ---------------------------------------------------------------------------
# eigenfunctions


def step_block_index(x, blocks: int) -> np.ndarray:
    """0-based index of the block ((j-1)/m, j/m] containing x; x = 0 goes to
    the first block."""
    x = np.asarray(x, dtype=float)
    idx = np.ceil(x * blocks).astype(np.int64) - 1
    return np.clip(idx, 0, blocks - 1)


@dataclass(frozen=True)
class EigenFunction:
    """Unit-norm function on [0, 1] in one of three closed-form variants.

    * ``constant``: phi(x) = 1
    * ``step``: phi(x) = sqrt(m) * v_j on ((j-1)/m, j/m], with sum(v**2) = 1
    * ``trig``: sqrt(2) cos(2 pi f x) or sqrt(2) sin(2 pi f x)

    ``maps`` lists measure-preserving maps applied to the argument first
    (``maps[0]`` is applied first), i.e. phi(x) = base(h_k(...h_1(x))).
    """

    kind: str
    coef: tuple = ()
    freq: int = 0
    phase: str = "cos"
    maps: tuple = ()

    def __post_init__(self):
        if self.kind == "step":
            v = np.asarray(self.coef, dtype=float)
            if v.ndim != 1 or v.size == 0:
                raise ValueError("step eigenfunction needs a non-empty coefficient vector")
            if abs(float(v @ v) - 1.0) > 1e-12:
                raise ValueError(f"step coefficients must have unit norm, got {float(v @ v)!r}")
        elif self.kind == "trig":
            if int(self.freq) != self.freq or self.freq < 1:
                raise ValueError("trig frequency must be a positive integer")
            if self.phase not in ("cos", "sin"):
                raise ValueError("trig phase must be 'cos' or 'sin'")
        elif self.kind != "constant":
            raise ValueError(f"unknown eigenfunction variant {self.kind!r}")

    @classmethod
    def constant(cls) -> "EigenFunction":
        return cls("constant")

    @classmethod
    def step(cls, coef) -> "EigenFunction":
        return cls("step", coef=tuple(float(c) for c in np.asarray(coef, dtype=float)))

    @classmethod
    def trig(cls, freq: int, phase: str = "cos") -> "EigenFunction":
        return cls("trig", freq=int(freq), phase=phase)

    @property
    def blocks(self) -> int:
        return len(self.coef)

    def base(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.ones_like(x)
        if self.kind == "step":
            v = np.asarray(self.coef)
            return math.sqrt(len(v)) * v[step_block_index(x, len(v))]
        arg = 2.0 * np.pi * self.freq * x
        return math.sqrt(2.0) * (np.cos(arg) if self.phase == "cos" else np.sin(arg))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        for h in self.maps:
            x = h(x)
        return self.base(x)

    def compose(self, h: MeasurePreservingMap) -> "EigenFunction":
        """Return x -> self(h(x))."""
        if h.kind == "identity":
            return self
        return replace(self, maps=(h,) + self.maps)


def _trig_integral(freq: int, phase: str, a: float, b: float) -> float:
    w = 2.0 * np.pi * freq
    if phase == "cos":
        return math.sqrt(2.0) * (math.sin(w * b) - math.sin(w * a)) / w
    return math.sqrt(2.0) * (math.cos(w * a) - math.cos(w * b)) / w


def inner_product(f: EigenFunction, g: EigenFunction) -> float:
    """L2 inner product of two eigenfunctions, in closed form.

    Both functions must carry the same map chain; composing with a common
    measure-preserving map leaves the inner product unchanged.
    """
    if f.maps != g.maps:
        raise ValueError("closed-form inner product needs a common map chain")
    if f.kind == "constant" and g.kind == "constant":
        return 1.0
    if f.kind == "constant" or g.kind == "constant":
        other = g if f.kind == "constant" else f
        if other.kind == "trig":
            return 0.0
        v = np.asarray(other.coef)
        return float(v.sum() / math.sqrt(v.size))
    if f.kind == "trig" and g.kind == "trig":
        return 1.0 if (f.freq, f.phase) == (g.freq, g.phase) else 0.0
    if f.kind == "step" and g.kind == "step":
        mf, mg = f.blocks, g.blocks
        lcm = mf * mg // math.gcd(mf, mg)
        a = np.repeat(np.asarray(f.coef) * math.sqrt(mf), lcm // mf)
        b = np.repeat(np.asarray(g.coef) * math.sqrt(mg), lcm // mg)
        return float(a @ b / lcm)
    step, trig = (f, g) if f.kind == "step" else (g, f)
    m = step.blocks
    total = sum(
        c * _trig_integral(trig.freq, trig.phase, j / m, (j + 1) / m)
        for j, c in enumerate(step.coef)
    )
    return float(math.sqrt(m) * total)


# ---------------------------------------------------------------------------
# graphons


@dataclass(frozen=True, eq=False, init=False)
class SpectralGraphon:
    """Finite-rank graphon W(x, y) = sum_i omega_i phi_i(x) phi_i(y).

    Pairs are sorted by |omega| descending, ties broken by sign (positive
    first) and then by construction order.  ``alpha``/``C`` are optional
    decay metadata asserting |omega_k| <= C k^-alpha.
    """

    eigenvalues: np.ndarray
    eigenfunctions: tuple
    alpha: float | None = None
    C: float | None = None
    name: str = "graphon"

    def __init__(self, eigenvalues, eigenfunctions, alpha=None, C=None,
                 name="graphon", validate=True):
        omega = np.asarray(eigenvalues, dtype=float).ravel()
        funcs = tuple(eigenfunctions)
        if omega.size != len(funcs):
            raise ValueError("need one eigenfunction per eigenvalue")
        if not np.all(np.isfinite(omega)) or np.any(np.abs(omega) > 1.0 + 1e-12):
            raise ValueError("graphon eigenvalues must be finite and lie in [-1, 1]")
        order = sorted(range(omega.size), key=lambda i: (-abs(omega[i]), -np.sign(omega[i]), i))
        omega = omega[order]
        omega.setflags(write=False)
        object.__setattr__(self, "eigenvalues", omega)
        object.__setattr__(self, "eigenfunctions", tuple(funcs[i] for i in order))
        object.__setattr__(self, "alpha", None if alpha is None else float(alpha))
        object.__setattr__(self, "C", None if C is None else float(C))
        object.__setattr__(self, "name", name)
        if (alpha is None) != (C is None):
            raise ValueError("decay metadata needs both alpha and C")
        if validate:
            self.validate()

    @property
    def rank(self) -> int:
        return self.eigenvalues.size

    def features(self, x) -> np.ndarray:
        """Matrix Phi with Phi[a, i] = phi_i(x_a)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.rank == 0:
            return np.zeros((x.size, 0))
        return np.column_stack([phi(x) for phi in self.eigenfunctions])

    def kernel(self, x, y) -> np.ndarray:
        """Unchecked matrix of W(x_a, y_b)."""
        Fx = self.features(x)
        Fy = Fx if y is x else self.features(y)
        return (Fx * self.eigenvalues) @ Fy.T

    def gram(self) -> np.ndarray:
        funcs = self.eigenfunctions
        G = np.empty((self.rank, self.rank))
        for i in range(self.rank):
            for j in range(i, self.rank):
                G[i, j] = G[j, i] = inner_product(funcs[i], funcs[j])
        return G

    def is_pure_step(self) -> bool:
        return all(f.kind in ("constant", "step") for f in self.eigenfunctions)

    def range_on_grid(self, grid: int = VALIDATION_GRID) -> tuple[float, float]:
        g = (np.arange(grid) + 0.5) / grid
        K = self.kernel(g, g)
        lo, hi = float(K.min()), float(K.max())
        if self.is_pure_step() and self.rank:
            blocks = [f.blocks for f in self.eigenfunctions if f.kind == "step"]
            lcm = math.lcm(*blocks) if blocks else 1
            if lcm <= 4096:
                # one midpoint per cell of the common refinement covers every value
                c = (np.arange(lcm) + 0.5) / lcm
                Kc = self.kernel(c, c)
                lo, hi = min(lo, float(Kc.min())), max(hi, float(Kc.max()))
        return lo, hi

    def validate(self, grid: int = VALIDATION_GRID) -> None:
        G = self.gram()
        err = np.max(np.abs(G - np.eye(self.rank))) if self.rank else 0.0
        if err > 1e-10:
            raise ValueError(f"eigenfunctions are not orthonormal (max Gram error {err:.3g})")
        lo, hi = self.range_on_grid(grid)
        if lo < -RANGE_TOL or hi > 1.0 + RANGE_TOL:
            raise ValueError(f"graphon leaves [0, 1] on the validation grid: range [{lo}, {hi}]")
        if self.alpha is not None:
            ok, k = decay_envelope_check(self, self.alpha, self.C)
            if not ok:
                raise ValueError(f"decay metadata violated at index {k}")


def evaluate(W: SpectralGraphon, x, y):
    """W(x, y) for points (or broadcastable arrays) in [0, 1].

    Values outside [0, 1] by more than 1e-9 raise; smaller excursions are
    rounding and are clipped.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    for name, z in (("x", x), ("y", y)):
        if np.any(~np.isfinite(z)) or np.any(z < 0.0) or np.any(z > 1.0):
            raise ValueError(f"{name} must lie in [0, 1]")
    x, y = np.broadcast_arrays(x, y)
    val = np.zeros(x.shape)
    for w, phi in zip(W.eigenvalues, W.eigenfunctions):
        val = val + w * phi(x) * phi(y)
    if not np.all(np.isfinite(val)):
        raise ValueError("graphon evaluation produced a non-finite value")
    lo, hi = float(val.min(initial=0.0)), float(val.max(initial=0.0))
    if lo < -RANGE_TOL or hi > 1.0 + RANGE_TOL:
        bad = np.unravel_index(np.argmax(np.maximum(-val, val - 1.0)), val.shape)
        raise ValueError(
            f"W({float(x[bad])!r}, {float(y[bad])!r}) = {float(val[bad])!r} is outside [0, 1]"
        )
    val = np.clip(val, 0.0, 1.0)
    return float(val) if val.ndim == 0 else val


# ---------------------------------------------------------------------------
# constructors


def constant_graphon(p: float) -> SpectralGraphon:
    if not 0.0 <= p <= 1.0:
        raise ValueError("constant graphon value must lie in [0, 1]")
    return SpectralGraphon([p], [EigenFunction.constant()], name=f"constant({p})")


@dataclass(frozen=True)
class SbmSpec:
    """Equal-block stochastic block model with connectivity matrix B."""

    B: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1] or B.shape[0] == 0:
            raise ValueError("B must be a non-empty square matrix")
        if not np.array_equal(B, B.T):
            raise ValueError("B must be symmetric")
        if np.any(B < 0.0) or np.any(B > 1.0):
            raise ValueError("entries of B must lie in [0, 1]")
        object.__setattr__(self, "B", B)

    @property
    def k(self) -> int:
        return self.B.shape[0]


def from_sbm(spec: SbmSpec | np.ndarray) -> SpectralGraphon:
    """Step graphon of an equal-block SBM.

    With B = U diag(lam) U^T the graphon has eigenvalues lam / k and
    eigenfunctions sqrt(k) * sum_j u_ij 1(x in block j).
    """
    if not isinstance(spec, SbmSpec):
        spec = SbmSpec(np.asarray(spec, dtype=float))
    k = spec.k
    lam, U = np.linalg.eigh(spec.B)
    funcs = []
    for i in range(k):
        u = U[:, i]
        lead = np.flatnonzero(np.abs(u) > 1e-12)[0]
        if u.sum() < -1e-12 or (abs(u.sum()) <= 1e-12 and u[lead] < 0):
            u = -u
        funcs.append(EigenFunction.step(u))
    return SpectralGraphon(lam / k, funcs, name=f"sbm(k={k})")


def trig_sequence(count: int) -> list[EigenFunction]:
    """cos(2 pi x), sin(2 pi x), cos(4 pi x), sin(4 pi x), ..."""
    return [EigenFunction.trig((j + 2) // 2, "cos" if j % 2 == 0 else "sin") for j in range(count)]


def _trig_sup_bound(weights: np.ndarray) -> float:
    # cos/sin pair at frequency f with weights a, b:
    # a*2cos cos + b*2sin sin = (a+b)cos(2pi f(x-y)) + (a-b)cos(2pi f(x+y)),
    # bounded by |a+b| + |a-b| = 2 max(|a|, |b|)
    padded = np.append(np.abs(weights), 0.0) if weights.size % 2 else np.abs(weights)
    pairs = padded.reshape(-1, 2)
    return float(2.0 * pairs.max(axis=1).sum())


def trig_decay_graphon(alpha: float, rank: int = 200, C: float | None = None,
                       offset: float | None = None) -> SpectralGraphon:
    """Graphon with eigenvalues omega_i = C i^-alpha on a trigonometric basis.

    Index 1 is the constant eigenfunction with eigenvalue ``offset``;
    indices 2..rank use cos/sin pairs of increasing frequency.  With both
    omitted, C is the largest value for which a sup-norm bound s certifies
    W in [0, 1] with a constant level >= C.  For s <= 1 the level equals C
    (a pure power law); for s > 1 it is C s.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if rank < 1:
        raise ValueError("rank must be at least 1")
    i = np.arange(2, rank + 1, dtype=float)
    shape = i ** (-float(alpha))
    s = _trig_sup_bound(shape)
    if C is None:
        if offset is None:
            # largest C admitting a certified constant level >= C
            C = 1.0 / (max(1.0, s) + s)
        else:
            C = min(offset, 1.0 - offset) / s if s > 0 else 1.0
    if offset is None:
        offset = C * max(1.0, s)
    if C <= 0:
        raise ValueError("C must be positive")
    if offset - C * s < -RANGE_TOL or offset + C * s > 1.0 + RANGE_TOL:
        raise ValueError(f"trig-decay graphon with C={C}, offset={offset} is not certified valid")
    omega = np.concatenate([[offset], C * shape])
    funcs = [EigenFunction.constant()] + trig_sequence(rank - 1)
    k = np.arange(1, rank + 1, dtype=float)
    # envelope constant over the sorted sequence
    env = float(np.max(np.sort(np.abs(omega))[::-1] * k ** alpha))
    return SpectralGraphon(omega, funcs, alpha=alpha, C=env,
                           name=f"trig-decay(alpha={alpha}, rank={rank})")


# ---------------------------------------------------------------------------
# spectral diagnostics


def decay_envelope_check(W: SpectralGraphon, alpha: float, C: float,
                         rtol: float = 1e-12) -> tuple[bool, int | None]:
    """Check |omega_k| <= C k^-alpha for every listed k.

    Returns ``(True, None)`` or ``(False, k)`` with the smallest violating
    1-based index.
    """
    if alpha <= 0 or C <= 0:
        raise ValueError("alpha and C must be positive")
    k = np.arange(1, W.rank + 1, dtype=float)
    bad = np.abs(W.eigenvalues) > C * k ** (-alpha) * (1.0 + rtol)
    if bad.any():
        return False, int(np.flatnonzero(bad)[0]) + 1
    return True, None


def tail_eigen_sum(W: SpectralGraphon, k: int, envelope: bool = False):
    """sum_{i > k} omega_i^2 over the listed eigenvalues.

    With ``envelope=True`` also returns the integral bound
    C^2 k^(1 - 2 alpha) / (2 alpha - 1) from the decay metadata.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    tail = float(np.sum(W.eigenvalues[k:] ** 2))
    if not envelope:
        return tail
    if W.alpha is None:
        raise ValueError("graphon carries no decay metadata")
    if W.alpha <= 0.5:
        raise ValueError("tail envelope needs alpha > 1/2")
    bound = math.inf if k == 0 else W.C ** 2 * k ** (1.0 - 2.0 * W.alpha) / (2.0 * W.alpha - 1.0)
    return tail, bound


def trace_norm(W: SpectralGraphon) -> float:
    return float(np.abs(W.eigenvalues).sum())


def apply_measure_preserving(W: SpectralGraphon, h) -> SpectralGraphon:
    """Graphon (x, y) -> W(h(x), h(y)); the eigenvalue list is unchanged."""
    h = parse_map(h)
    funcs = [phi.compose(h) for phi in W.eigenfunctions]
    name = W.name if h.kind == "identity" else f"{W.name}o{h.tag}"
    return SpectralGraphon(W.eigenvalues, funcs, alpha=W.alpha, C=W.C, name=name, validate=False)


def discretize_operator(W: SpectralGraphon, m: int) -> np.ndarray:
    """Midpoint discretisation D_ij = W(g_i, g_j) / m, g_i = (i - 1/2) / m."""
    if m < 1:
        raise ValueError("grid size must be at least 1")
    g = (np.arange(m) + 0.5) / m
    D = W.kernel(g, g) / m
    return 0.5 * (D + D.T)


def operator_spectrum(W: SpectralGraphon, m: int) -> np.ndarray:
    """Eigenvalues of the discretised operator, sorted descending."""
    return np.sort(np.linalg.eigvalsh(discretize_operator(W, m)))[::-1]


def diagonal_partial_sums(W: SpectralGraphon, x) -> np.ndarray:
    """Row k holds sum_{i <= k+1} omega_i phi_i(x)^2."""
    F = W.features(x)
    return np.cumsum((F ** 2 * W.eigenvalues).T, axis=0)


def block_range(W: SpectralGraphon) -> tuple[float, float]:
    """Exact range of a pure-step graphon over its block refinement."""
    if not W.is_pure_step():
        raise ValueError("exact block range needs a pure step graphon")
    blocks = [f.blocks for f in W.eigenfunctions if f.kind == "step"] or [1]
    lcm = math.lcm(*blocks)
    c = (np.arange(lcm) + 0.5) / lcm
    K = W.kernel(c, c)
    return float(K.min()), float(K.max())
