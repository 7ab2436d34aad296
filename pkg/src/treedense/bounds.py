"""Closed-form thresholds and lower-bound curves for the best achievable path density.

``a_threshold(d, k)`` is the marginal at which the maximum of k iid copies
reaches the infinite-cluster threshold 2/d; at that marginal some copy has
density at least 1/k along an open path.  ``lower_bound_curve`` combines
these with the trivial bound ``D >= p`` and with monotonicity in p.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .tree import TreeParams


@dataclass(frozen=True)
class BoundsPoint:
    p: float
    lower: float
    source: str  # "trivial" | "haggstrom" | "k-copies"
    k: int | None = None


@dataclass(frozen=True)
class CoverageReport:
    d: int
    k_max: int
    intervals: list[tuple[int, float, float]]  # (k, a(d,k), 1/k)
    gaps: list[tuple[float, float]]
    overlap: dict[int, bool]  # k -> a(d,k) <= 1/(k+1)
    grid_step: float


def _check_d(d):
    TreeParams(d)


def haggstrom_threshold(d: int) -> float:
    """Marginal above which every invariant percolation has an infinite cluster."""
    _check_d(d)
    return 2.0 / d


def a_threshold(d: int, k: int) -> float:
    _check_d(d)
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if k == 1:
        return 2.0 / d
    # expm1/log1p keep precision when k is large and the threshold is tiny
    return -math.expm1(math.log1p(-2.0 / d) / k)


def f_bound(d: int, eps: float) -> float:
    """First-moment density bound log(2(d-1)) / log(1/eps) for Bernoulli(eps).

    Values above 1 are vacuous but returned unclamped.
    """
    _check_d(d)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return math.log(2 * (d - 1)) / math.log(1.0 / eps)


def continuity_modulus(d: int, p: float, q: float) -> float:
    """Bound on D_d(q) - D_d(p) obtained from a Bernoulli(3(q-p)) sprinkle.

    Returns ``inf`` when 3(q-p) >= 1 (no bound).
    """
    if not 0.0 <= p < q <= 1.0:
        raise ValueError(f"need 0 <= p < q <= 1, got p={p}, q={q}")
    eps = 3.0 * (q - p)
    if eps >= 1.0:
        return math.inf
    return f_bound(d, eps)


def _largest_k_below(p: float) -> int:
    """Largest integer k with 1/k > p (0 if none)."""
    k = math.ceil(1.0 / p) - 1
    while k >= 1 and not 1.0 / k > p:
        k -= 1
    while 1.0 / (k + 1) > p:
        k += 1
    return k


def lower_bound_curve(d: int, p: float) -> BoundsPoint:
    """Best known lower bound on D_d(p)."""
    _check_d(d)
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if p >= haggstrom_threshold(d):
        return BoundsPoint(p, 1.0, "haggstrom", None)
    best = BoundsPoint(p, p, "trivial", None)
    k = 2
    while 1.0 / k > p:
        if a_threshold(d, k) <= p:
            return BoundsPoint(p, 1.0 / k, "k-copies", k)
        k += 1
    return best


def _covered(d: int, p: float) -> bool:
    # the only candidate is the largest k with p < 1/k, since a(d, k) decreases in k
    k = _largest_k_below(p)
    return k >= 1 and a_threshold(d, k) <= p


def interval_coverage(d: int, k_max: int = 64, grid_step: float = 1e-4,
                      truncate: bool = False) -> CoverageReport:
    """Scan (0, 1) on a grid for points outside every interval [a(d,k), 1/k).

    With ``truncate=False`` each grid point is tested against its one
    candidate k, however large; ``k_max`` then only limits the listed
    intervals and overlap checks.  ``truncate=True`` restricts the union to
    k <= k_max.  Gaps are reported as (first uncovered grid point, next
    covered grid point or 1).
    """
    _check_d(d)
    if k_max < 1 or grid_step <= 0:
        raise ValueError("need k_max >= 1 and grid_step > 0")
    intervals = [(k, a_threshold(d, k), 1.0 / k) for k in range(1, k_max + 1)]
    overlap = {k: a <= 1.0 / (k + 1) for k, a, _ in intervals}

    if truncate:
        def covered(p):
            return any(a <= p < hi for _, a, hi in intervals)
    else:
        def covered(p):
            return _covered(d, p)

    digits = max(0, -math.floor(math.log10(grid_step))) + 3
    gaps = []
    start = None
    i = 1
    while True:
        p = round(i * grid_step, digits)
        if p >= 1.0:
            break
        if covered(p):
            if start is not None:
                gaps.append((start, p))
                start = None
        elif start is None:
            start = p
        i += 1
    if start is not None:
        gaps.append((start, 1.0))
    return CoverageReport(d, k_max, intervals, gaps, overlap, grid_step)


def overlap_criterion(d: int, k: int) -> tuple[float, float]:
    """Both sides of (1 - 1/(k+1))^k <= 1 - 2/d, the condition for a(d,k) <= 1/(k+1)."""
    _check_d(d)
    return (1.0 - 1.0 / (k + 1)) ** k, 1.0 - 2.0 / d


def dinf_lower(x: float) -> float:
    """Known lower bound 1/k* on the large-degree limit, k* the smallest k with 1/k < x."""
    if not 0.0 < x < 1.0:
        raise ValueError(f"x must lie in (0, 1), got {x}")
    k = math.floor(1.0 / x) + 1
    while k > 2 and 1.0 / (k - 1) < x:
        k -= 1
    while not 1.0 / k < x:
        k += 1
    return 1.0 / k


def binary_relative_entropy(a: float, p: float) -> float:
    out = 0.0
    if a > 0:
        out += a * math.log(a / p)
    if a < 1:
        out += (1 - a) * math.log((1 - a) / (1 - p))
    return out


def sharp_bernoulli_density_bound(d: int, p: float, xtol: float = 1e-12) -> float:
    """Density a > p at which the expected number of length-n paths with a*n open edges stops growing.

    Solves KL(a || p) = log(d - 1) on (p, 1); returns 1 when KL(1 || p) <= log(d - 1).
    """
    _check_d(d)
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    target = math.log(d - 1)
    if math.log(1.0 / p) <= target:
        return 1.0
    return brentq(lambda a: binary_relative_entropy(a, p) - target, p, 1.0, xtol=xtol, rtol=4 * 2.0**-52)


def largest_trivial_point(d: int, grid_step: float = 1e-4) -> float:
    """Largest grid p < 2/d where the known-bounds curve still equals p."""
    _check_d(d)
    best = 0.0
    i = 1
    while True:
        p = round(i * grid_step, 12)
        if p >= haggstrom_threshold(d):
            return best
        if lower_bound_curve(d, p).source == "trivial":
            best = p
        i += 1
