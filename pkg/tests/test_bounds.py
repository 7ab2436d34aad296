import math

import mpmath as mp
import numpy as np
import pytest

from treedense.bounds import (
    a_threshold,
    binary_relative_entropy,
    continuity_modulus,
    dinf_lower,
    f_bound,
    haggstrom_threshold,
    interval_coverage,
    largest_trivial_point,
    lower_bound_curve,
    overlap_criterion,
    sharp_bernoulli_density_bound,
)


def test_a_threshold_values():
    assert a_threshold(3, 1) == 2 / 3
    assert a_threshold(3, 2) == pytest.approx(1 - 1 / math.sqrt(3), abs=1e-15)
    assert a_threshold(3, 2) == pytest.approx(0.4226497308, abs=1e-9)
    assert a_threshold(3, 6) == pytest.approx(0.1673, abs=1e-4)
    assert a_threshold(3, 5) == pytest.approx(0.1973, abs=1e-4)
    assert a_threshold(3, 6) > 1 / 6 + 1e-9
    assert a_threshold(3, 5) < 1 / 5 - 1e-9
    assert a_threshold(4, 3) == pytest.approx(1 - 2 ** (-1 / 3), abs=1e-15)
    for args in [(2, 1), (3, 0)]:
        with pytest.raises(ValueError):
            a_threshold(*args)


def test_a_threshold_against_mpmath():
    mp.mp.dps = 40
    for d in (3, 4, 7, 100):
        for k in (1, 2, 3, 64, 10**4):
            exact = 1 - mp.root(1 - mp.mpf(2) / d, k)
            assert a_threshold(d, k) == pytest.approx(float(exact), rel=1e-13)


def test_a_threshold_monotone():
    for d in (3, 4, 9):
        vals = [a_threshold(d, k) for k in range(1, 200)]
        assert all(x > y for x, y in zip(vals, vals[1:]))
        assert a_threshold(d, 1) == 2 / d
    for k in (1, 3, 10):
        vals = [a_threshold(d, k) for d in range(3, 200)]
        assert all(x > y for x, y in zip(vals, vals[1:]))
    assert a_threshold(4, 10**6) < 1e-6


def test_overlap_for_d_at_least_4():
    for d in (4, 5, 6, 10, 50):
        for k in range(1, 10**4 + 1):
            assert a_threshold(d, k) <= 1 / (k + 1) + 1e-12
    lhs, rhs = overlap_criterion(4, 1)
    assert lhs == 0.5 and rhs == 0.5
    lhs_seq = [overlap_criterion(4, k)[0] for k in range(1, 100)]
    assert all(x >= y for x, y in zip(lhs_seq, lhs_seq[1:]))


def test_f_bound():
    assert f_bound(3, 0.25) == pytest.approx(1.0, abs=1e-15)
    assert f_bound(3, 0.01) == pytest.approx(float(mp.log(4) / mp.log(100)), abs=1e-12)
    assert f_bound(3, 0.01) == pytest.approx(0.3010299957, abs=1e-9)
    grid = [10.0**-k for k in range(1, 40)]
    vals = [f_bound(3, e) for e in grid]
    assert all(x > y for x, y in zip(vals, vals[1:]))
    assert vals[-1] < 0.02
    for d in (3, 5, 12):
        assert f_bound(d, 1 / (2 * (d - 1))) == pytest.approx(1.0, abs=1e-15)
    for eps in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            f_bound(3, eps)


def test_haggstrom():
    assert haggstrom_threshold(3) == 2 / 3
    assert haggstrom_threshold(4) == 0.5
    assert haggstrom_threshold(100) == 0.02


def test_lower_bound_examples():
    pt = lower_bound_curve(3, 0.45)
    assert (pt.lower, pt.source, pt.k) == (0.5, "k-copies", 2)
    pt = lower_bound_curve(3, 0.7)
    assert (pt.lower, pt.source) == (1.0, "haggstrom")
    pt = lower_bound_curve(4, 0.21)
    assert (pt.lower, pt.source, pt.k) == (1 / 3, "k-copies", 3)
    pt = lower_bound_curve(3, 0.55)
    assert (pt.lower, pt.source) == (0.55, "trivial")


def brute_lower(d, p):
    best = max(p, 1.0 if p >= 2 / d else 0.0)
    for k in range(1, math.ceil(1 / p) + 2):
        if a_threshold(d, k) <= p:
            best = max(best, 1 / k)
    return best


@pytest.mark.parametrize("d", [3, 4, 7])
def test_lower_bound_curve_monotone_and_exact(d):
    grid = np.arange(1, 10**4) * 1e-4
    lows = [lower_bound_curve(d, float(p)).lower for p in grid]
    assert all(x <= y for x, y in zip(lows, lows[1:]))
    for p in grid[::97]:
        assert lower_bound_curve(d, float(p)).lower == pytest.approx(brute_lower(d, float(p)))


def test_coverage_d4_no_gaps():
    rep = interval_coverage(4, 64, 1e-4)
    assert rep.gaps == []
    assert all(rep.overlap.values())


def test_coverage_d3():
    rep = interval_coverage(3, 64, 1e-4)
    assert any(abs(lo - 0.5) < 1e-4 and abs(hi - 2 / 3) < 1e-4 for lo, hi in rep.gaps)
    assert any(lo <= 1 / 6 and hi >= a_threshold(3, 6) for lo, hi in rep.gaps)
    assert rep.intervals[1] == (2, a_threshold(3, 2), 0.5)
    gaps = rep.gaps
    assert all(a[1] <= b[0] for a, b in zip(gaps, gaps[1:]))


def test_coverage_truncated():
    rep = interval_coverage(4, 64, 1e-4, truncate=True)
    assert len(rep.gaps) == 1
    lo, hi = rep.gaps[0]
    assert lo == 1e-4 and abs(hi - a_threshold(4, 64)) < 1e-4


def test_coverage_brute_force_agrees():
    # direct membership in the union over a long k range
    for d in (3, 4):
        rep = interval_coverage(d, 64, 1e-3)
        uncovered = set()
        for i in range(1, 1000):
            p = round(i * 1e-3, 6)
            if not any(a_threshold(d, k) <= p < 1 / k for k in range(1, 2000)):
                uncovered.add(p)
        from_gaps = {round(i * 1e-3, 6) for i in range(1, 1000)
                     if any(lo <= round(i * 1e-3, 6) < hi for lo, hi in rep.gaps)}
        assert uncovered == from_gaps


def test_continuity_modulus():
    assert continuity_modulus(3, 0.1, 0.1 + 1 / 12) == pytest.approx(1.0, abs=1e-12)
    assert continuity_modulus(3, 0.2, 0.203) == pytest.approx(math.log(4) / math.log(1 / 0.009), abs=1e-9)
    assert continuity_modulus(3, 0.2, 0.203) == pytest.approx(0.2943, abs=1e-4)
    vals = [continuity_modulus(3, 0.3, 0.3 + 10.0**-k) for k in range(2, 16)]
    assert all(x > y for x, y in zip(vals, vals[1:])) and vals[-1] < 0.05
    assert continuity_modulus(3, 0.0, 0.5) == math.inf
    with pytest.raises(ValueError):
        continuity_modulus(3, 0.5, 0.5)


def test_dinf_lower():
    assert dinf_lower(0.3) == 0.25
    assert dinf_lower(0.5) == 1 / 3
    assert dinf_lower(0.999999) == 0.5
    assert dinf_lower(1 / 3) == 0.25
    for x in np.arange(1, 10**4) * 1e-4:
        v = dinf_lower(float(x))
        assert v < x
        k = round(1 / v)
        assert k == 2 or not 1 / (k - 1) < x


def test_sharp_bound():
    v = sharp_bernoulli_density_bound(3, 0.01)
    assert v == pytest.approx(0.277, abs=1e-3)
    assert v <= f_bound(3, 0.01)
    assert binary_relative_entropy(v, 0.01) == pytest.approx(math.log(2), abs=1e-8)
    assert sharp_bernoulli_density_bound(3, 0.6) == 1.0
    assert sharp_bernoulli_density_bound(3, 1e-12) < 0.05
    for d in (3, 4, 8):
        for p in (1e-6, 0.001, 0.02, 0.1, 0.3):
            s = sharp_bernoulli_density_bound(d, p)
            assert p < s <= 1.0
            if f_bound(d, p) < 1:
                assert s <= f_bound(d, p)


def test_largest_trivial_point():
    p = largest_trivial_point(3)
    assert 0.5 <= p < 2 / 3
    assert lower_bound_curve(3, p).source == "trivial"
