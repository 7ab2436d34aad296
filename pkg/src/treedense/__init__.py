"""Best achievable path density for percolation on d-regular trees.

Submodules: ``tree`` (addresses, hashing), ``samplers`` (percolation laws),
``density`` (max-path computations), ``bounds`` (closed-form bounds),
``harness`` (experiments) and ``cli``.
"""
from .bounds import (
    a_threshold,
    continuity_modulus,
    dinf_lower,
    f_bound,
    haggstrom_threshold,
    interval_coverage,
    lower_bound_curve,
    sharp_bernoulli_density_bound,
)
from .density import (
    barrier_survival,
    best_copy_density,
    enumerate_oracle,
    exact_bernoulli_distribution,
    max_path_dfs,
    site_path_density,
    survival_fully_open,
)
from .samplers import (
    Bernoulli,
    BipartiteSite,
    Complement,
    MaxOfK,
    MutualChoiceMatching,
    parse_sampler,
    render,
)
from .tree import Seed, TreeParams

__version__ = "0.1.0"
