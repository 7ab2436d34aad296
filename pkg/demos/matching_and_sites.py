"""
Two invariant processes with density one half
=============================================

A mutual-choice matching never opens two adjacent edges, so no path does
better than alternate.  The bipartite site process opens every other level.
"""

import numpy as np

from treedense.density import max_path_sweep, site_path_range
from treedense.samplers import BipartiteSite, MutualChoiceMatching, ball_states, exact_marginal
from treedense.tree import Seed

d = 3
m = MutualChoiceMatching()
print("matching marginal, exact:", exact_marginal(m, d))

levels = ball_states(m, Seed(1), d, 6)
print("open fraction by depth:", [round(float(s.mean()), 3) for s in levels])

horizons = [4, 8, 16, 32]
maxima = np.array([list(max_path_sweep(m, Seed(i), d, horizons)[0].values()) for i in range(200)])
for h, col in zip(horizons, maxima.T):
    print(f"n={h:2d}  mean M_n/n {col.mean() / h:.3f}  max {col.max() / h:.3f}")

site = BipartiteSite()
for i in range(4):
    print(f"seed {i}: open sites on length-16 paths range over {site_path_range(site, Seed(i), d, 16)}")
