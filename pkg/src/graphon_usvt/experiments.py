"""Monte Carlo studies: USVT rate slopes, bin-count event frequencies and
spectral invariance under measure-preserving maps."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .graphon import (SbmSpec, SpectralGraphon, constant_graphon, from_sbm,
                      operator_spectrum, apply_measure_preserving, parse_map, trig_decay_graphon)
from .sampler import (DEFAULT_SEED, LAMBDA_LOWER, LAMBDA_UPPER, bin_counts, default_bins,
                      probability_matrix, sample_adjacency, sample_latents,
                      sample_latents_conditioned, stream_rng)
from .usvt import UsvtConfig, mse, usvt_estimate

STREAM_STRIDE = 1 << 20

FAMILY_KEYS = {
    "trig-decay": {"family", "alpha", "rank", "C", "offset"},
    "constant": {"family", "p"},
    "sbm": {"family", "B"},
}


def build_graphon(spec: dict, alpha: float | None = None) -> SpectralGraphon:
    """Graphon from a family document such as ``{"family": "trig-decay", "rank": 200}``.

    ``alpha`` fills in the trig-decay exponent when the document omits it.
    """
    fam = spec.get("family")
    if fam not in FAMILY_KEYS:
        raise ValueError(f"graphon.family: unknown family {fam!r}")
    extra = set(spec) - FAMILY_KEYS[fam]
    if extra:
        raise ValueError(f"graphon.{sorted(extra)[0]}: unknown key for family {fam!r}")
    if fam == "constant":
        return constant_graphon(float(spec.get("p", 0.5)))
    if fam == "sbm":
        if "B" not in spec:
            raise ValueError("graphon.B: required for family 'sbm'")
        return from_sbm(SbmSpec(np.asarray(spec["B"], dtype=float)))
    a = spec.get("alpha", alpha)
    if a is None:
        raise ValueError("graphon.alpha: required for family 'trig-decay'")
    return trig_decay_graphon(float(a), int(spec.get("rank", 200)), spec.get("C"), spec.get("offset"))


@dataclass(frozen=True)
class ExperimentConfig:
    graphon: dict = field(default_factory=lambda: {"family": "trig-decay", "rank": 200})
    alpha: float = 2.0
    n_grid: tuple = (200, 400, 800, 1600)
    replicates: int = 20
    seed: int = DEFAULT_SEED
    usvt: UsvtConfig = field(default_factory=UsvtConfig)
    out: str | None = None
    workers: int = 1
    conditioned: bool = False
    lam1: float = LAMBDA_LOWER
    lam2: float = LAMBDA_UPPER

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        object.__setattr__(self, "n_grid", grid)
        if not grid:
            raise ValueError("n_grid: must not be empty")
        if any(n < 8 for n in grid):
            raise ValueError("n_grid: every n must be at least 8")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("n_grid: must be strictly increasing")
        if self.replicates < 1:
            raise ValueError("replicates: must be at least 1")
        if self.workers < 1:
            raise ValueError("workers: must be at least 1")


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r2: float
    slope_se: float


def fit_loglog_slope(points) -> SlopeFit:
    """Ordinary least squares of ln(value) on ln(n)."""
    pts = [(float(n), float(v)) for n, v in points]
    if len(pts) < 2:
        raise ValueError("need at least 2 points for a slope")
    if any(v <= 0 for _, v in pts) or any(n <= 0 for n, _ in pts):
        raise ValueError("log-log fit needs positive n and values")
    x = np.log([n for n, _ in pts])
    y = np.log([v for _, v in pts])
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        raise ValueError("need at least 2 distinct n values")
    slope = float(xc @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    dof = len(pts) - 2
    se = math.sqrt(ss_res / dof / sxx) if dof > 0 else math.nan
    return SlopeFit(slope, intercept, r2, se)


@dataclass(frozen=True)
class ReplicateRow:
    n: int
    replicate: int
    mse: float
    retained_rank: int
    seed_stream: int


@dataclass(frozen=True)
class SummaryRow:
    n: int
    mean_mse: float
    stderr: float
    mean_rank: float


@dataclass(frozen=True, eq=False)
class RateResult:
    replicates: list
    summary: list
    fit: SlopeFit | None
    theory_slope: float
    inversions: int

    @property
    def slope(self) -> float:
        return math.nan if self.fit is None else self.fit.slope

    @property
    def slope_defined(self) -> bool:
        return self.fit is not None

    def fit_json(self) -> dict:
        f = self.fit
        return {"slope": None if f is None else f.slope,
                "intercept": None if f is None else f.intercept,
                "r2": None if f is None else f.r2,
                "theory_slope": self.theory_slope,
                "slope_defined": self.slope_defined,
                "monotone_inversions": self.inversions}


def theory_slope(alpha: float) -> float:
    return -(2.0 * alpha - 1.0) / (2.0 * alpha)


def rate_replicate(W: SpectralGraphon, n: int, rep: int, seed: int, cfg: UsvtConfig,
                   condition: tuple | None = None) -> ReplicateRow:
    """One (latents, M, A, estimate) draw on stream n * 2^20 + rep.

    ``condition = (lam1, lam2)`` rejection-samples the latents into the
    bin-count event first.
    """
    stream = n * STREAM_STRIDE + rep
    rng = stream_rng(seed, stream)
    try:
        if condition is None:
            xi = sample_latents(n, rng)
        else:
            xi = sample_latents_conditioned(n, default_bins(n), *condition, rng=rng).latents
        M = probability_matrix(W, xi)
        est = usvt_estimate(sample_adjacency(M, rng), cfg)
    except Exception as exc:
        raise RuntimeError(f"replicate {rep} at n={n} (stream {stream}) failed: {exc}") from exc
    return ReplicateRow(n, rep, mse(est.M_hat, M), est.retained_rank, stream)


def run_rate_experiment(cfg: ExperimentConfig, W: SpectralGraphon | None = None) -> RateResult:
    """USVT mean squared error over the n grid and its log-log slope."""
    W = build_graphon(cfg.graphon, cfg.alpha) if W is None else W
    jobs = [(n, r) for n in cfg.n_grid for r in range(cfg.replicates)]

    def one(job):
        cond = (cfg.lam1, cfg.lam2) if cfg.conditioned else None
        return rate_replicate(W, job[0], job[1], cfg.seed, cfg.usvt, cond)

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            rows = list(pool.map(one, jobs))
    else:
        rows = [one(j) for j in jobs]
    summary = []
    for n in cfg.n_grid:
        errs = np.array([r.mse for r in rows if r.n == n])
        ranks = np.array([r.retained_rank for r in rows if r.n == n])
        se = float(errs.std(ddof=1) / math.sqrt(errs.size)) if errs.size > 1 else 0.0
        summary.append(SummaryRow(n, float(errs.mean()), se, float(ranks.mean())))
    means = [s.mean_mse for s in summary]
    fit = None
    if len(summary) >= 2 and all(v > 0 for v in means):
        fit = fit_loglog_slope([(s.n, s.mean_mse) for s in summary])
    inversions = sum(b > a for a, b in zip(means, means[1:]))
    return RateResult(rows, summary, fit, theory_slope(cfg.alpha), inversions)


@dataclass(frozen=True)
class EventFrequency:
    freq: float
    stderr: float


@dataclass(frozen=True)
class ConditioningResult:
    n: int
    m: int
    trials: int
    lam1: float
    lam2: float
    lower: EventFrequency
    upper: EventFrequency
    joint: EventFrequency

    def as_dict(self) -> dict:
        out = {"n": self.n, "m": self.m, "trials": self.trials, "lam1": self.lam1, "lam2": self.lam2}
        for name in ("lower", "upper", "joint"):
            ev = getattr(self, name)
            out[name] = {"freq": ev.freq, "stderr": ev.stderr}
        return out


def _freq(hits: int, trials: int) -> EventFrequency:
    p = hits / trials
    return EventFrequency(p, math.sqrt(p * (1.0 - p) / trials))


def run_conditioning_frequency(n: int, trials: int, lam1: float = LAMBDA_LOWER,
                               lam2: float = LAMBDA_UPPER, rng=None) -> ConditioningResult:
    """Frequencies of the lower, upper and joint bin-count events with
    m = floor(n / (4 ln n))."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = stream_rng(DEFAULT_SEED) if rng is None else rng
    m = default_bins(n)
    lo = hi = both = 0
    for _ in range(trials):
        bc = bin_counts(sample_latents(n, rng), m, lam1, lam2)
        lo += bc.lower
        hi += bc.upper
        both += bc.event
    return ConditioningResult(n, m, trials, lam1, lam2, _freq(lo, trials), _freq(hi, trials),
                              _freq(both, trials))


@dataclass(frozen=True)
class InvarianceRow:
    map: str
    grid: int
    reference_grid: int
    deviation: float


def run_invariance_suite(W: SpectralGraphon, maps=("identity", "half-swap", "wrap-2"),
                         grid: int = 1024) -> list[InvarianceRow]:
    """Max deviation between sorted discretised spectra of W and W o h.

    For an n-fold wrap the transformed graphon on ``grid`` points is compared
    with W on grid / n points (zero-padded): the wrapped midpoints land
    exactly on the coarser midpoints.
    """
    rows = []
    for tag in maps:
        h = parse_map(tag)
        ref_grid = h.matched_resolution(grid)
        after = operator_spectrum(apply_measure_preserving(W, h), grid)
        before = operator_spectrum(W, ref_grid)
        before = np.sort(np.concatenate([before, np.zeros(grid - ref_grid)]))[::-1]
        rows.append(InvarianceRow(h.tag, grid, ref_grid, float(np.max(np.abs(after - before)))))
    return rows
