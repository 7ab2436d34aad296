"""
Lower bounds on the best path density
=====================================

Where does the combinatorial lower bound beat the trivial ``D >= p``?
"""

import numpy as np

from treedense.bounds import a_threshold, interval_coverage, lower_bound_curve, overlap_criterion

# a(d, k): the marginal at which the max of k copies reaches 2/d
for d in (3, 4, 5):
    print(f"d={d}:", "  ".join(f"a({d},{k})={a_threshold(d, k):.4f}" for k in range(1, 7)))

# For d=3 the interval [a(3,k), 1/k) is nonempty only up to k=5
print()
for k in range(2, 8):
    a = a_threshold(3, k)
    print(f"k={k}  a={a:.6f}  1/k={1 / k:.6f}  {'useful' if a < 1 / k else 'empty'}")

# The curve itself, sampled on a coarse grid
print("\n    p   d=3           d=4")
for p in np.arange(0.05, 0.75, 0.05):
    row = [lower_bound_curve(d, float(p)) for d in (3, 4)]
    cells = "  ".join(f"{pt.lower:.4f} {pt.source[:4]:<4}" for pt in row)
    print(f"{p:5.2f}  {cells}")

# Consecutive intervals overlap once d >= 4, so (0, 1) is covered
for d in range(3, 7):
    gaps = interval_coverage(d, k_max=64, grid_step=1e-4).gaps
    lhs, rhs = overlap_criterion(d, 1)
    print(f"d={d}: {len(gaps)} gaps; (1-1/2)^1={lhs:.3f} vs 1-2/d={rhs:.3f}")
    for lo, hi in gaps:
        print(f"    uncovered [{lo}, {hi})")
