"""
Max of two copies and the pigeonhole step
=========================================

At marginal a(3,2) the max of two independent Bernoulli copies has
marginal 2/3.  Along any fully open path one copy owns at least half the
edges.  The DFS finds the best path; we then split it by copy.
"""

from treedense.bounds import a_threshold
from treedense.density import best_copy_density, search_size
from treedense.samplers import Bernoulli, MaxOfK, exact_marginal
from treedense.tree import Seed

base = a_threshold(3, 2)
spec = MaxOfK(Bernoulli(base), 2)
print(f"base marginal {base:.10f}  -> max-of-2 marginal {exact_marginal(spec):.10f}")

n = 24
full = 0
worst = 1.0
for i in range(500):
    res = best_copy_density(spec, Seed(i), 3, n)
    if res.record.open_count == n:
        full += 1
        worst = min(worst, res.best_copy_average)
print(f"{full}/500 seeds have a fully open length-{n} path; worst best-copy share {worst:.3f}")

# Pruning keeps the search small
res = best_copy_density(spec, Seed(0), 3, n)
print("seed 0 path:", "".join(map(str, res.record.path)), "copy counts", res.record.copy_counts)
print("edges visited with / without pruning:",
      search_size(spec, Seed(0), 3, 16), search_size(spec, Seed(0), 3, 16, prune=False))
