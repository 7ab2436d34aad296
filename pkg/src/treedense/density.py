"""Horizon-n proxies for the best path density.

``M_n`` is the largest number of open edges on a descending path of length
``n`` from the root; ``M_n / n`` stands in for the supremum over infinite
paths of the limsup density.  Three routes compute it:

* ``exact_bernoulli_distribution``: the law of ``M_n`` under Bernoulli(p)
  from the subtree recursion, O(n^2).
* ``enumerate_oracle``: brute force over every configuration of a small ball.
* ``max_path_dfs``: branch-and-bound search on one sample of any edge law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .samplers import (
    STREAM_FANOUT,
    BipartiteSite,
    MaxOfK,
    ModeError,
    ball_states,
    compile_program,
    is_edge_process,
    path_edge_states,
    side_bit,
)
from .tree import Seed, TreeParams, path_count

ENUMERATION_EDGE_LIMIT = 24
DEFAULT_BARRIER_CAP = 10**6


class CapacityError(ValueError):
    """The requested brute-force computation is too large."""


@dataclass(frozen=True)
class PathRecord:
    path: tuple[int, ...]
    n: int
    open_count: int
    copy_counts: tuple[int, ...] | None = None

    @property
    def average(self) -> float:
        return self.open_count / self.n


@dataclass(frozen=True)
class MaxPathDistribution:
    d: int
    p: float
    n: int
    cdf: np.ndarray = field(repr=False)
    tail: np.ndarray | None = field(default=None, repr=False)  # P(M_n > m), when known

    @property
    def pmf(self) -> np.ndarray:
        return np.diff(self.cdf, prepend=0.0)

    @property
    def mean(self) -> float:
        tail = self.tail if self.tail is not None else 1.0 - self.cdf
        return math.fsum(tail[:-1])

    @property
    def mean_density(self) -> float:
        return self.mean / self.n


@dataclass(frozen=True)
class DensityEstimate:
    n: int
    value: float
    mean: float
    ci: tuple[float, float]
    method: str
    record: PathRecord | None = None


@dataclass(frozen=True)
class Survival:
    probability: float
    limit: float
    theta: float


@dataclass(frozen=True)
class BarrierResult:
    count: int
    capped: bool
    example: PathRecord | None


@dataclass(frozen=True)
class CopyDensity:
    record: PathRecord
    best_copy_average: float
    pigeonhole_bound: float


def _check_args(d, p, n):
    TreeParams(d)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"horizon must be a positive integer, got {n}")


def _seed(seed) -> Seed:
    return seed if isinstance(seed, Seed) else Seed(int(seed))


# -- exact recursion -----------------------------------------------------------

def _extend_tail(u: np.ndarray, p: float, power: int) -> np.ndarray:
    """One recursion step on tail probabilities u(m) = 1 - Q(m) = P(max > m).

    Working with tails keeps u(m) = 0 exact beyond the current depth; in the
    Q form, p + (1 - p) != 1 in floating point seeds a spurious 1e-16 tail
    that the recursion amplifies and that drags the front ahead.
    """
    shifted = np.empty_like(u)
    shifted[0] = 1.0
    shifted[1:] = u[:-1]
    w = np.clip(p * shifted + (1.0 - p) * u, 0.0, 1.0)
    out = np.ones_like(u)
    below = w < 1.0
    out[below] = -np.expm1(power * np.log1p(-w[below]))
    return np.clip(out, 0.0, 1.0)


def _tails(d: int, p: float, n: int) -> list[np.ndarray]:
    u = np.zeros(n + 1)
    out = [u]
    for _ in range(n):
        u = _extend_tail(u, p, d - 1)
        out.append(u)
    return out


def nonroot_cdfs(d: int, p: float, n: int) -> list[np.ndarray]:
    """CDFs of the maximum below a non-root vertex, for depths 0..n.

    Entry ``j`` has length ``n + 1``; ``cdfs[j][m] = P(max over length-j paths <= m)``.
    """
    _check_args(d, p, max(n, 1))
    return [1.0 - u for u in _tails(d, p, n)]


def nonroot_expectations(d: int, p: float, n: int) -> np.ndarray:
    """Expected non-root maxima E_0..E_n."""
    _check_args(d, p, max(n, 1))
    return np.array([math.fsum(u[:j]) for j, u in enumerate(_tails(d, p, n))])


def exact_bernoulli_distribution(d: int, p: float, n: int) -> MaxPathDistribution:
    _check_args(d, p, n)
    u = np.zeros(n + 1)
    for _ in range(n - 1):
        u = _extend_tail(u, p, d - 1)
    u = _extend_tail(u, p, d)
    u[n] = 0.0
    cdf = np.maximum.accumulate(1.0 - u)
    return MaxPathDistribution(d, float(p), int(n), cdf, u)


def _survival_limit(d: int, p: float, tol: float = 1e-12, max_iter: int = 10**7):
    if p * (d - 1) <= 1.0:
        return 0.0, 0.0
    theta = 1.0
    for _ in range(max_iter):
        nxt = 1.0 - (1.0 - p * theta) ** (d - 1)
        if abs(nxt - theta) < tol:
            theta = nxt
            break
        theta = nxt
    return theta, 1.0 - (1.0 - p * theta) ** d


def survival_fully_open(d: int, p: float, n: int) -> Survival:
    """P(some length-n path from the root is fully open), and its n -> inf limit."""
    dist = exact_bernoulli_distribution(d, p, n)
    theta, limit = _survival_limit(d, p)
    return Survival(float(dist.tail[n - 1]), limit, theta)


# -- brute force ------------------------------------------------------------------

def ball_edge_count(d: int, n: int) -> int:
    return sum(path_count(d, j) for j in range(1, n + 1))


def enumerate_oracle(d: int, p: float, n: int) -> MaxPathDistribution:
    """Law of M_n by summing over every open/closed assignment of the ball."""
    _check_args(d, p, n)
    n_edges = ball_edge_count(d, n)
    if n_edges > ENUMERATION_EDGE_LIMIT:
        raise CapacityError(f"ball of radius {n} in the {d}-regular tree has {n_edges} edges "
                            f"(limit {ENUMERATION_EDGE_LIMIT})")
    configs = np.arange(1 << n_edges, dtype=np.uint32)
    next_bit = iter(range(n_edges))

    # bit positions are assigned depth-first; the result does not depend on the labelling
    def best_below(depth: int) -> np.ndarray:
        fan = d if depth == 0 else d - 1
        acc = np.zeros(configs.shape, np.int8)
        if depth == n:
            return acc
        for _ in range(fan):
            bit = ((configs >> np.uint32(next(next_bit))) & np.uint32(1)).astype(np.int8)
            np.maximum(acc, bit + best_below(depth + 1), out=acc)
        return acc

    m = best_below(0).astype(np.int64)
    ones = np.bitwise_count(configs).astype(np.int64)
    table = np.bincount(m * (n_edges + 1) + ones, minlength=(n + 1) * (n_edges + 1))
    table = table.reshape(n + 1, n_edges + 1)
    k = np.arange(n_edges + 1)
    weights = np.array([p**j * (1.0 - p) ** (n_edges - j) for j in k])
    pmf = np.array([math.fsum(table[i] * weights) for i in range(n + 1)])
    cdf = np.minimum(np.cumsum(pmf), 1.0)
    cdf[n] = 1.0
    return MaxPathDistribution(d, float(p), int(n), cdf)


def ball_max_path(spec, seed, d: int, n: int) -> PathRecord:
    """Max-path by dynamic programming over the fully sampled ball.

    Independent of the DFS traversal; practical for balls up to a few million edges.
    """
    if not is_edge_process(spec):
        raise ModeError("ball_max_path needs an edge process")
    levels = ball_states(spec, _seed(seed), d, n)
    best = [None] * n
    below = np.zeros(levels[-1].shape, np.int64)
    for j in range(n - 1, -1, -1):
        best[j] = levels[j].astype(np.int64) + below
        if j:
            below = best[j].reshape(-1, d - 1).max(axis=1)
    path = []
    q = int(np.argmax(best[0]))
    path.append(q)
    for j in range(1, n):
        row = best[j][q * (d - 1):(q + 1) * (d - 1)]
        i = int(np.argmax(row))
        path.append(i)
        q = q * (d - 1) + i
    return PathRecord(tuple(path), n, int(best[0].max()))


# -- branch and bound --------------------------------------------------------------

def max_path_sweep(spec, seed, d: int, horizons: Iterable[int], prune: bool = True):
    """Maxima M_h for several horizons in one traversal.

    Returns ``(maxima, record)``: a dict horizon -> max open count, and the
    argmax record at the largest horizon.
    """
    if not is_edge_process(spec):
        raise ModeError("max-path search needs an edge process")
    TreeParams(d)
    hs = sorted(set(int(h) for h in horizons))
    if not hs or hs[0] < 1:
        raise ValueError("horizons must be positive")
    seed = _seed(seed)
    n = hs[-1]
    requested = np.zeros(n + 1, np.bool_)
    requested[hs] = True
    prog = compile_program(spec, seed.stream)
    best, path, _ = _kernels.dfs_max(*prog.arrays, np.uint64(seed.value), d, n,
                                     requested, bool(prune))
    record = PathRecord(tuple(int(i) for i in path), n, int(best[n]))
    return {h: int(best[h]) for h in hs}, record


def max_path_dfs(spec, seed, d: int, n: int, prune: bool = True) -> PathRecord:
    """Lexicographically smallest length-n path with the most open edges."""
    _, record = max_path_sweep(spec, seed, d, [n], prune)
    return record


def search_size(spec, seed, d: int, n: int, prune: bool = True) -> int:
    """Number of edges the DFS evaluates (pruning diagnostics)."""
    seed = _seed(seed)
    requested = np.zeros(n + 1, np.bool_)
    requested[n] = True
    prog = compile_program(spec, seed.stream)
    return int(_kernels.dfs_max(*prog.arrays, np.uint64(seed.value), d, n, requested, prune)[2])


def best_copy_density(spec: MaxOfK, seed, d: int, n: int) -> CopyDensity:
    """Per-copy open counts along the argmax path of a MaxOfK law."""
    if not isinstance(spec, MaxOfK):
        raise ModeError("best_copy_density needs a MaxOfK law")
    seed = _seed(seed)
    record = max_path_dfs(spec, seed, d, n)
    per_copy = np.array([
        path_edge_states(spec.base, seed.with_stream(seed.stream * STREAM_FANOUT + i), record.path, d)
        for i in range(spec.k)
    ])
    combined = int(per_copy.max(axis=0).sum())
    if combined != record.open_count:
        raise AssertionError("copy states disagree with the max process along the path")
    counts = tuple(int(c) for c in per_copy.sum(axis=1))
    record = PathRecord(record.path, n, record.open_count, counts)
    return CopyDensity(record, max(counts) / n, math.ceil(record.open_count / spec.k) / n)


# -- site process ----------------------------------------------------------------

def site_level_states(spec: BipartiteSite, seed, d: int, depth: int) -> np.ndarray:
    if not isinstance(spec, BipartiteSite):
        raise ModeError(f"{spec!r} is not a site process")
    size = 1 if depth == 0 else path_count(d, depth)
    return np.full(size, int(depth % 2 == side_bit(_seed(seed))), np.int64)


def site_path_range(spec: BipartiteSite, seed, d: int, n: int) -> tuple[int, int]:
    """(min, max) over length-n descending paths of the open sites among x_1..x_n."""
    lo = hi = np.zeros(path_count(d, n), np.int64)
    for j in range(n, 0, -1):
        states = site_level_states(spec, seed, d, j)
        lo, hi = lo + states, hi + states
        if j > 1:
            lo = lo.reshape(-1, d - 1).min(axis=1)
            hi = hi.reshape(-1, d - 1).max(axis=1)
    return int(lo.min()), int(hi.max())


def site_path_density(spec: BipartiteSite, seed, d: int, n: int) -> DensityEstimate:
    """Best density of open sites among x_1..x_n over length-n descending paths.

    Site states of :class:`BipartiteSite` depend on depth only, so every path
    sees the same sequence and the maximum is a parity count.
    """
    if not isinstance(spec, BipartiteSite):
        raise ModeError(f"{spec!r} is not a site process")
    TreeParams(d)
    if n < 1:
        raise ValueError("horizon must be positive")
    b = side_bit(_seed(seed))
    value = sum(1 for j in range(1, n + 1) if j % 2 == b) / n
    return DensityEstimate(n, value, value, (value, value), "enumeration")


# -- sustained density ----------------------------------------------------------

def barrier_survival(spec, seed, d: int, n: int, a: float, c: float,
                     cap: int = DEFAULT_BARRIER_CAP) -> BarrierResult:
    """Count length-n paths whose every prefix of length j has at least a*j - c open edges.

    The count stops at ``cap``; ``capped`` tells the two cases apart.
    """
    if not is_edge_process(spec):
        raise ModeError("barrier search needs an edge process")
    if not 0.0 <= a <= 1.0 or c < 0:
        raise ValueError("need 0 <= a <= 1 and c >= 0")
    if cap < 1:
        raise ValueError("cap must be positive")
    TreeParams(d)
    seed = _seed(seed)
    prog = compile_program(spec, seed.stream)
    count, capped, path, first_open = _kernels.barrier_count(
        *prog.arrays, np.uint64(seed.value), d, n, float(a), float(c), int(cap))
    example = None
    if first_open >= 0:
        example = PathRecord(tuple(int(i) for i in path), n, int(first_open))
    return BarrierResult(int(count), bool(capped), example)


def horizon_sweep(d: int, p: float, horizons: Sequence[int]) -> list[tuple[int, float, float]]:
    """(n, E[M_n]/n, P(M_n = n)) rows from the exact recursion."""
    rows = []
    for n in horizons:
        dist = exact_bernoulli_distribution(d, p, n)
        rows.append((n, dist.mean_density, float(dist.tail[n - 1])))
    return rows
