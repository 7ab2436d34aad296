"""Confidence intervals and order-independent aggregation."""
from __future__ import annotations

import math
from typing import Iterable

Z95 = 1.959963984540054


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (95% by default)."""
    if trials < 1:
        raise ValueError("Wilson interval needs at least one trial")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes={successes} outside [0, {trials}]")
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return lo, hi


def mean_interval(samples: Iterable[float], z: float = Z95,
                  bounds: tuple[float, float] = (0.0, 1.0)) -> tuple[float, float, float]:
    """Mean and normal-approximation interval, clipped to ``bounds``.

    Sums use :func:`math.fsum`, so the result does not depend on sample order.
    """
    xs = list(samples)
    n = len(xs)
    if n < 1:
        raise ValueError("mean interval needs at least one sample")
    mean = math.fsum(xs) / n
    if n == 1:
        return mean, mean, mean
    var = math.fsum((x - mean) ** 2 for x in xs) / (n - 1)
    half = z * math.sqrt(var / n)
    return mean, max(bounds[0], mean - half), min(bounds[1], mean + half)
