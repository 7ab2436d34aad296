"""
Exact law of the max path sum under Bernoulli percolation
=========================================================

The subtree recursion gives the full distribution of M_n without sampling.
We watch E[M_n]/n settle and compare with the first-moment bounds.
"""

from treedense.bounds import f_bound, sharp_bernoulli_density_bound
from treedense.density import enumerate_oracle, exact_bernoulli_distribution, survival_fully_open

# Tiny case: recursion against brute force over all 2^9 configurations
rec = exact_bernoulli_distribution(3, 0.5, 2)
brute = enumerate_oracle(3, 0.5, 2)
print("E[M_2] recursion", rec.mean, " enumeration", brute.mean, " 449/256 =", 449 / 256)

# Density at growing horizons
d = 3
for p in (0.01, 0.05, 0.2):
    sharp = sharp_bernoulli_density_bound(d, p)
    cells = []
    for n in (8, 32, 128, 512, 2048):
        cells.append(f"{exact_bernoulli_distribution(d, p, n).mean_density:.4f}")
    print(f"p={p:<5} E[M_n]/n at n=8..2048: {' '.join(cells)}   sharp {sharp:.4f}  f {min(1, f_bound(d, p)):.4f}")

# Fully open paths: survival above 1/(d-1), extinction below
for p in (0.4, 0.5, 0.6, 2 / 3):
    s = survival_fully_open(3, p, 400)
    print(f"p={p:.4f}  P(M_400 = 400) = {s.probability:.6g}  limit {s.limit:.6g}")
