"""Monte Carlo checks of comparison inequalities between uniformly random
Stiefel frames and Gaussian matrices of the same shape."""

from .constants import (
    alpha_bounds_integral,
    alpha_bounds_sum,
    alpha_exact,
    alpha_report,
    chi_mean,
    comparison_factor,
    gordon_bound,
)
from .estimation import McEstimate, Verdict, compare, estimate_expectation
from .experiments import (
    run_convex_comparison,
    run_converse1,
    run_converse2,
    run_counterexample,
    run_distribution_selftests,
    run_maxentry_study,
    run_ncgauss,
    run_sublinear_comparison,
    run_sublinear_grid,
)
from .factorizations import polar_factorize, psd_sqrt, qr_positive_diagonal, sample_bartlett_R
from .functionals import ConvexFunctional, NormSpec, PhiSpec, eval_norm, eval_phi
from .sampling import (
    Dims,
    derive_substream,
    sample_chi,
    sample_haar_stiefel,
    sample_normalized_gaussian,
    sample_standard_gaussian,
    sample_uniform_permutation,
)

__version__ = "0.1.0"
