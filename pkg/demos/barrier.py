"""
Paths that keep a density the whole way
=======================================

M_n/n only asks for density at the end.  The barrier search asks that
every prefix of length j carries at least a*j - c open edges, and counts
the paths that manage it (up to a cap).
"""

from treedense.bounds import sharp_bernoulli_density_bound
from treedense.density import barrier_survival
from treedense.samplers import parse_sampler
from treedense.tree import Seed

p = 0.4226497308103742
spec = parse_sampler(f"bernoulli({p})")
print(f"first-moment ceiling for Bernoulli({p:.4f}): {sharp_bernoulli_density_bound(3, p):.4f}")

# survival collapses as a approaches that ceiling
n, c, cap = 60, 2.0, 10**4
for a in (0.85, 0.9, 0.93, 0.95, 0.97):
    counts = sorted(barrier_survival(spec, Seed(i), 3, n, a, c, cap).count for i in range(100))
    alive = sum(x > 0 for x in counts)
    print(f"a={a:.2f}  surviving seeds {alive:3d}/100  median survivors {counts[50]}")

r = barrier_survival(spec, Seed(0), 3, n, 0.9, c, cap=10)
print("capped:", r.capped, " first surviving path:", "".join(map(str, r.example.path)))
