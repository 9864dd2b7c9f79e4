"""Exact averaging constant alpha(k, n), its bounds, and Gordon's bound.

``alpha(k, n)`` is the mean of ``E X_i`` over ``i = 1..k`` where ``X_i`` is chi
with ``n - i + 1`` degrees of freedom. The Gaussian comparison factor is
``sqrt(n) / alpha(k, n)``, which never exceeds ``1 + k / (2n)``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from ._validation import check_dim_pair, check_positive_int

__all__ = [
    "AlphaReport",
    "chi_mean",
    "log_gamma_half_ratio",
    "alpha_exact",
    "alpha_bounds_sum",
    "alpha_bounds_integral",
    "comparison_factor",
    "gordon_bound",
    "alpha_report",
    "alpha_table",
]

# Coefficients c_j of x**-j in the asymptotic series of
#   log Gamma(x + 1/2) - log Gamma(x) - (1/2) log x,
# c_j = (-1)^n (2^(1-n) - 2) B_n / (n (n - 1)) with n = j + 1 (B_n Bernoulli).
_HALF_RATIO_SERIES = (
    (1, -1.0 / 8.0),
    (3, 1.0 / 192.0),
    (5, -1.0 / 640.0),
    (7, 17.0 / 14336.0),
    (9, -31.0 / 18432.0),
    (11, 691.0 / 180224.0),
    (13, -5461.0 / 425984.0),
)
# Above this x the truncated series is exact to double precision, while the
# difference of two large log-gammas loses ~log10(x) digits to cancellation.
_SERIES_CUTOFF = 16.0


def log_gamma_half_ratio(x):
    """``log(Gamma(x + 1/2) / Gamma(x))`` for ``x > 0``, accurate for large ``x``."""
    if x <= 0:
        raise ValueError(f"x must be positive, got {x}")
    if x < _SERIES_CUTOFF:
        return float(gammaln(x + 0.5) - gammaln(x))
    inv = 1.0 / x
    tail = sum(c * inv**j for j, c in reversed(_HALF_RATIO_SERIES))
    return 0.5 * math.log(x) + tail


def chi_mean(p):
    """Mean of a chi variate with ``p`` degrees of freedom.

    ``E Xi = sqrt(2) * Gamma((p + 1)/2) / Gamma(p/2)``, evaluated through
    log-gamma differences so nothing overflows; for ``p >= 32`` the difference
    comes from its asymptotic series, which keeps full relative precision up
    to very large ``p``.

    Examples
    --------
    >>> round(chi_mean(1), 10)
    0.7978845608
    """
    p = check_positive_int(p, "p")
    x = p / 2.0
    if x < _SERIES_CUTOFF:
        return math.exp(0.5 * math.log(2.0) + log_gamma_half_ratio(x))
    # sqrt(2x) * exp(tail) avoids recombining a large logarithm
    return math.sqrt(p) * math.exp(log_gamma_half_ratio(x) - 0.5 * math.log(x))


def alpha_exact(k, n):
    """``(1/k) * sum_{i=1..k} chi_mean(n - i + 1)``."""
    k, n = check_dim_pair(k, n)
    return math.fsum(chi_mean(n - i + 1) for i in range(1, k + 1)) / k


def alpha_bounds_sum(k, n):
    """Finite-sum bounds ``(lower, upper)`` on ``alpha(k, n)``.

    ``lower = (1/k) sum_{i=0}^{k-1} sqrt(n - i - 1/2)`` and
    ``upper = (1/k) sum_{i=0}^{k-1} sqrt(n - i)``.
    """
    k, n = check_dim_pair(k, n)
    lower = math.fsum(math.sqrt(n - (i + 0.5)) for i in range(k)) / k
    upper = math.fsum(math.sqrt(n - i) for i in range(k)) / k
    return lower, upper


def alpha_bounds_integral(k, n):
    """Closed-form bounds ``(lower, upper)`` on ``alpha(k, n)`` from the
    midpoint and trapezoid rules applied to ``x -> sqrt(n - x)`` on ``[0, k]``."""
    k, n = check_dim_pair(k, n)
    lower = 2.0 / (3.0 * k) * (n**1.5 - (n - k) ** 1.5)
    upper = lower + 1.0 / (2.0 * k) * (math.sqrt(n) - math.sqrt(n - k))
    return lower, upper


def comparison_factor(k, n):
    """Return ``(exact, bound)`` with ``exact = sqrt(n) / alpha(k, n)`` and
    ``bound = 1 + k / (2n)``."""
    k, n = check_dim_pair(k, n)
    return math.sqrt(n) / alpha_exact(k, n), 1.0 + k / (2.0 * n)


def gordon_bound(dims):
    """Upper bound ``1 + sqrt(k/n)`` on the mean spectral norm of an ``n x k``
    matrix with N(0, 1/n) entries."""
    return 1.0 + math.sqrt(dims.k / dims.n)


@dataclass(frozen=True)
class AlphaReport:
    k: int
    n: int
    alpha_exact: float
    lower_sum: float
    upper_sum: float
    lower_int: float
    upper_int: float
    factor_exact: float
    factor_bound: float

    def sandwich_holds(self, tol=1e-9):
        """Check every ordering the bounds guarantee.

        The integral upper bound is not ordered against the sum upper bound.
        """
        return (
            self.lower_int <= self.lower_sum + tol
            and self.lower_sum <= self.alpha_exact + tol
            and self.alpha_exact <= self.upper_sum + tol
            and self.lower_int <= self.alpha_exact + tol
            and self.alpha_exact <= self.upper_int + tol
            and self.factor_exact <= self.factor_bound + 1e-12
        )


def alpha_report(k, n):
    k, n = check_dim_pair(k, n)
    a = alpha_exact(k, n)
    lo_s, up_s = alpha_bounds_sum(k, n)
    lo_i, up_i = alpha_bounds_integral(k, n)
    return AlphaReport(
        k=k,
        n=n,
        alpha_exact=a,
        lower_sum=lo_s,
        upper_sum=up_s,
        lower_int=lo_i,
        upper_int=up_i,
        factor_exact=math.sqrt(n) / a,
        factor_bound=1.0 + k / (2.0 * n),
    )


def alpha_table(n_max):
    """AlphaReports for every ``1 <= k <= n <= n_max``, ordered by ``n`` then ``k``.

    Chi means are computed once per degree of freedom and reused through
    running sums, so the full table costs O(n_max^2).
    """
    n_max = check_positive_int(n_max, "n_max")
    means = np.array([0.0] + [chi_mean(p) for p in range(1, n_max + 1)])
    rows = []
    for n in range(1, n_max + 1):
        terms = means[n:0:-1]  # chi_mean(n), chi_mean(n - 1), ..., chi_mean(1)
        half = np.sqrt(n - (np.arange(n) + 0.5))
        full = np.sqrt(n - np.arange(n, dtype=float))
        for k in range(1, n + 1):
            a = math.fsum(terms[:k]) / k
            lo_i, up_i = alpha_bounds_integral(k, n)
            rows.append(
                AlphaReport(
                    k=k,
                    n=n,
                    alpha_exact=a,
                    lower_sum=math.fsum(half[:k]) / k,
                    upper_sum=math.fsum(full[:k]) / k,
                    lower_int=lo_i,
                    upper_int=up_i,
                    factor_exact=math.sqrt(n) / a,
                    factor_bound=1.0 + k / (2.0 * n),
                )
            )
    return rows
