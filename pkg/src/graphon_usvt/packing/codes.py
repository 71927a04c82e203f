"""N-ary codes under Hamming distance and the Varshamov-Gilbert bound."""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

LEX_LIMIT = 10 ** 6
EXHAUSTIVE_LIMIT = 1 << 26


def hamming_distance(a, b) -> int:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(a != b))


def entropy_hN(N: int, p: float) -> float:
    """h_N(p) = p log_N(N-1) - p log_N(p) - (1-p) log_N(1-p).

    The endpoints return their limits (0 and log_N(N-1)) with a warning.
    """
    if N < 2:
        raise ValueError("alphabet size N must be at least 2")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    lnN = math.log(N)
    if p == 0.0 or p == 1.0:
        warnings.warn(f"h_N evaluated at the endpoint p={p}; returning the continuous limit",
                      RuntimeWarning, stacklevel=2)
        return 0.0 if p == 0.0 else math.log(N - 1) / lnN
    return (p * math.log(N - 1) - p * math.log(p) - (1.0 - p) * math.log1p(-p)) / lnN


def hamming_ball_volume(N: int, n: int, r: int) -> int:
    """V_N(n, r) = sum_{j <= r} C(n, j) (N - 1)^j, exactly."""
    if N < 2 or n < 0:
        raise ValueError("need N >= 2 and n >= 0")
    if not 0 <= r <= n:
        raise ValueError(f"radius r={r} must lie in [0, n={n}]")
    return sum(math.comb(n, j) * (N - 1) ** j for j in range(r + 1))


@dataclass(frozen=True)
class EntropyBoundCheck:
    volume: int
    log_bound: float
    holds: bool
    exact: bool


def hamming_entropy_bound(N: int, n: int, p) -> EntropyBoundCheck:
    """Check V_N(n, floor(pn)) <= N^(h_N(p) n).

    With p rational and pn, (1-p)n integers the right side is the rational
    (N-1)^(pn) / (p^(pn) (1-p)^((1-p)n)) and the comparison is exact;
    otherwise it is done in 60-digit arithmetic.
    """
    pf = Fraction(p).limit_denominator(10 ** 9) if not isinstance(p, Fraction) else p
    if not 0 < pf <= 1 - Fraction(1, N):
        raise ValueError("p must lie in (0, 1 - 1/N]")
    r = math.floor(pf * n)
    vol = hamming_ball_volume(N, n, r)
    a, b = pf * n, (1 - pf) * n
    if a.denominator == 1 and b.denominator == 1:
        rhs = Fraction((N - 1) ** int(a)) / (pf ** int(a) * (1 - pf) ** int(b))
        holds = vol <= rhs
        exact = True
    else:
        with mpmath.workdps(60):
            P = mpmath.mpf(pf.numerator) / pf.denominator
            h = (P * mpmath.log(N - 1) - P * mpmath.log(P) - (1 - P) * mpmath.log(1 - P)) / mpmath.log(N)
            holds = bool(mpmath.log(vol) <= h * n * mpmath.log(N))
        exact = False
    log_bound = entropy_hN(N, float(pf)) * n * math.log(N)
    return EntropyBoundCheck(vol, log_bound, bool(holds), exact)


@dataclass(frozen=True, eq=False)
class Codebook:
    """Code over the alphabet {0, ..., N-1} (0-based symbols).

    ``maximal`` means no word of {0..N-1}^n could be added without breaking
    the distance d, which implies the Varshamov-Gilbert size guarantee.
    """

    N: int
    n: int
    d: int
    words: np.ndarray
    method: str
    maximal: bool

    @property
    def size(self) -> int:
        return self.words.shape[0]

    @property
    def vg_bound(self) -> Fraction:
        return Fraction(self.N ** self.n, hamming_ball_volume(self.N, self.n, self.d - 1))

    @property
    def deterministic(self) -> bool:
        return self.method == "lexicographic"

    def meets_vg_bound(self) -> bool:
        return self.size >= self.vg_bound

    def min_distance(self) -> int:
        """Exhaustive pairwise minimum distance (n + 1 for a single word)."""
        W = self.words
        best = self.n + 1
        for i in range(W.shape[0] - 1):
            dist = np.count_nonzero(W[i + 1:] != W[i], axis=1)
            best = min(best, int(dist.min()))
        return best

    def has_min_distance(self) -> bool:
        """True iff all pairs are at distance >= d.

        Small codes are checked pairwise; larger ones by looking up every
        word's radius-(d-1) ball in a codeword index, O(M |ball|).
        """
        if self.size * (self.size - 1) // 2 <= 10 ** 4 or self.N ** self.n > EXHAUSTIVE_LIMIT:
            return self.min_distance() >= self.d
        powers = self.N ** np.arange(self.n - 1, -1, -1, dtype=np.int64)
        present = np.zeros(self.N ** self.n, dtype=bool)
        idx = self.words @ powers
        if np.unique(idx).size != idx.size:
            return False
        present[idx] = True
        for p in _ball_patterns(self.N, self.n, self.d - 1)[1:]:
            if present[((self.words + p) % self.N) @ powers].any():
                return False
        return True


def _ball_patterns(N: int, n: int, r: int) -> np.ndarray:
    rows = [np.zeros((1, n), dtype=np.int64)]
    for j in range(1, r + 1):
        vals = np.array(list(itertools.product(range(1, N), repeat=j)), dtype=np.int64)
        for pos in itertools.combinations(range(n), j):
            block = np.zeros((vals.shape[0], n), dtype=np.int64)
            block[:, pos] = vals
            rows.append(block)
    return np.vstack(rows)


def _digits(index: int, N: int, n: int) -> np.ndarray:
    out = np.empty(n, dtype=np.int64)
    for i in range(n - 1, -1, -1):
        index, out[i] = divmod(index, N)
    return out


def vg_greedy_codebook(N: int, n: int, d: int, rng=None, max_size: int | None = None,
                       lex_limit: int = LEX_LIMIT, exhaustive_limit: int = EXHAUSTIVE_LIMIT,
                       sample_budget: int = 200_000) -> Codebook:
    """Greedy code of length n over N symbols with minimum distance d.

    * N^n <= lex_limit: scan words lexicographically, keep each word not yet
      within distance d-1 of a kept one (deterministic, maximal).
    * N^n <= exhaustive_limit: the same scan in a random order (maximal).
    * otherwise: random words tested against the kept ones until
      ``sample_budget`` consecutive rejections (no size guarantee).

    ``max_size`` stops early; the result is then not maximal.
    """
    if N < 2:
        raise ValueError("alphabet size N must be at least 2")
    if not 1 <= d <= n:
        raise ValueError(f"need 1 <= d <= n, got d={d}, n={n}")
    if rng is None:
        rng = np.random.default_rng(0)
    total = N ** n
    limit = max_size if max_size is not None else math.inf
    if total > exhaustive_limit:
        return _random_sample_code(N, n, d, rng, limit, sample_budget)

    powers = N ** np.arange(n - 1, -1, -1, dtype=np.int64)
    patterns = _ball_patterns(N, n, d - 1)
    covered = np.zeros(total, dtype=bool)
    if total <= lex_limit:
        method, order = "lexicographic", None
    else:
        method, order = "random-order", rng.permutation(total)
    kept = []
    chunk = 256
    stopped = False
    for start in range(0, total, chunk):
        block = np.arange(start, min(start + chunk, total)) if order is None else order[start:start + chunk]
        for c in block[~covered[block]]:
            if covered[c]:
                continue
            digits = _digits(int(c), N, n)
            kept.append(digits)
            covered[((digits + patterns) % N) @ powers] = True
            if len(kept) >= limit:
                stopped = True
                break
        if stopped:
            break
    words = np.array(kept, dtype=np.int64).reshape(-1, n)
    maximal = not stopped or bool(covered.all())
    return Codebook(N, n, d, words, method, maximal)


def _random_sample_code(N, n, d, rng, limit, budget) -> Codebook:
    kept = np.empty((0, n), dtype=np.int64)
    misses = 0
    while misses < budget and kept.shape[0] < limit:
        w = rng.integers(0, N, size=n)
        if kept.shape[0] == 0 or np.count_nonzero(kept != w, axis=1).min() >= d:
            kept = np.vstack([kept, w])
            misses = 0
        else:
            misses += 1
    return Codebook(N, n, d, kept, "random-sample", False)
