"""Seeded experiments checking each comparison inequality.

Every ``run_*`` function estimates both sides of an inequality from
independent ensembles (even substreams for the left side, odd for the right)
and returns a report carrying the estimates, the constant that was applied
and a :class:`~stiefel_compare.estimation.Verdict`.
"""

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .constants import alpha_exact, chi_mean
from .estimation import (
    VIOLATED,
    GaussianSampler,
    HaarSampler,
    McEstimate,
    MultiFunctional,
    OrthogonalSumSampler,
    TriangularSampler,
    compare,
    estimate_expectation,
    sample_values,
)
from .factorizations import qr_positive_diagonal, sample_bartlett_R
from .functionals import ConvexFunctional, NormSpec, PhiSpec, eval_norm
from .sampling import (
    Dims,
    derive_substream,
    sample_haar_stiefel,
    sample_standard_gaussian,
    sample_uniform_permutation,
)

__all__ = [
    "ComparisonReport",
    "CounterexampleReport",
    "MaxEntryRow",
    "SelfTestResult",
    "run_sublinear_comparison",
    "run_sublinear_grid",
    "run_convex_comparison",
    "run_ncgauss",
    "rademacher_mean_abs",
    "run_converse1",
    "check_right_ideal",
    "converse1_moment_ratio",
    "run_converse2",
    "run_maxentry_study",
    "maxentry_bound",
    "run_counterexample",
    "run_distribution_selftests",
    "DEFAULT_GRID_DIMS",
    "DEFAULT_GRID_NORMS",
    "DEFAULT_GRID_PHIS",
]

DEFAULT_GRID_DIMS = ((8, 2), (16, 4), (16, 16), (64, 16), (64, 64))
DEFAULT_GRID_NORMS = (NormSpec("spectral"), NormSpec("frobenius"), NormSpec("max_entry"))
DEFAULT_GRID_PHIS = (PhiSpec("identity"), PhiSpec("hinge", c=1.0), PhiSpec("power", m=2.0))

# Reserved substream for fixed auxiliary draws (e.g. the rotation in the
# invariance self-test); never used by a sample loop.
_AUX_STREAM = 2**64 - 1


@dataclass
class ComparisonReport:
    """One theorem instance: ``lhs`` is the side claimed to be the smaller."""

    theorem_id: str
    dims: Dims
    norm: str
    phi: str
    factor_used: float
    lhs: McEstimate
    rhs: McEstimate
    verdict: object
    wall_time: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def violated(self):
        return self.verdict.status == VIOLATED


def _split_streams():
    """(offset, stride) pairs for the left and right ensembles."""
    return (0, 2), (1, 2)


def run_sublinear_comparison(
    dims,
    norm_spec,
    phi_spec=PhiSpec(),
    n_samples=10_000,
    seed=0,
    submatrix_j=None,
    factor_override=None,
    z=3.0,
    workers=None,
):
    """Check ``E phi(|Q|) <= E phi((1 + k/2n) |G|)``.

    ``Q`` is Haar on the Stiefel manifold and ``G`` has N(0, 1/n) entries.
    With ``submatrix_j`` both sides use ``|L_j(.)|`` where ``L_j`` keeps the
    first ``j`` rows and rescales by ``sqrt(n/j)``. ``factor_override``
    replaces the constant; it exists to check that a wrong constant is caught.
    """
    return run_sublinear_grid(
        [dims],
        [norm_spec],
        [phi_spec],
        n_samples=n_samples,
        seed=seed,
        submatrix_j=submatrix_j,
        factor_override=factor_override,
        z=z,
        workers=workers,
    )[0]


def run_sublinear_grid(
    dims_list=DEFAULT_GRID_DIMS,
    norms=DEFAULT_GRID_NORMS,
    phis=DEFAULT_GRID_PHIS,
    n_samples=10_000,
    seed=0,
    submatrix_j=None,
    factor_override=None,
    z=3.0,
    workers=None,
):
    """:func:`run_sublinear_comparison` over a grid, sharing draws per dims.

    Each report is bit-identical to the corresponding single run: draws
    depend only on ``(seed, substream)``, never on which functionals are
    evaluated on them.
    """
    reports = []
    (lo, ls), (ro, rs) = _split_streams()
    for d in dims_list:
        dims = d if isinstance(d, Dims) else Dims(*d)
        factor = 1.0 + dims.rho / 2.0 if factor_override is None else float(factor_override)
        pairs = list(itertools.product(norms, phis))
        lhs_f = MultiFunctional(
            tuple(ConvexFunctional(nm, ph, restrict_rows=submatrix_j) for nm, ph in pairs)
        )
        rhs_f = MultiFunctional(
            tuple(
                ConvexFunctional(nm, ph, scale=factor, restrict_rows=submatrix_j) for nm, ph in pairs
            )
        )
        start = time.perf_counter()
        lv = sample_values(HaarSampler(dims), lhs_f, n_samples, seed, lo, ls, workers)
        rv = sample_values(GaussianSampler(dims), rhs_f, n_samples, seed, ro, rs, workers)
        elapsed = (time.perf_counter() - start) / len(pairs)
        for col, (nm, ph) in enumerate(pairs):
            lhs = McEstimate.from_values(lv[:, col], seed)
            rhs = McEstimate.from_values(rv[:, col], seed)
            label = nm.label if submatrix_j is None else f"{nm.label}[rows={submatrix_j}]"
            reports.append(
                ComparisonReport(
                    theorem_id="theorem1",
                    dims=dims,
                    norm=label,
                    phi=ph.label,
                    factor_used=factor,
                    lhs=lhs,
                    rhs=rhs,
                    verdict=compare(lhs, rhs, z),
                    wall_time=elapsed,
                    details={"submatrix_j": submatrix_j},
                )
            )
    return reports


def run_convex_comparison(
    dims, functional, sense="convex", n_samples=10_000, seed=0, z=3.0, workers=None
):
    """Check ``E f(Q) <= E f(Gamma / alpha)`` for convex ``f`` (reversed for concave).

    ``Gamma`` is standard Gaussian and ``alpha = alpha_exact(k, n)``. The
    report's ``lhs`` is the side claimed to be smaller: the Stiefel side for
    ``sense="convex"``, the Gaussian side for ``sense="concave"``.
    """
    if sense == "convex" and not functional.is_convex:
        raise ValueError("functional is not convex")
    if sense == "concave" and not functional.is_concave:
        raise ValueError("functional is not concave")
    if sense not in ("convex", "concave"):
        raise ValueError(f"sense must be 'convex' or 'concave', got {sense!r}")
    alpha = alpha_exact(dims.k, dims.n)
    (lo, ls), (ro, rs) = _split_streams()
    start = time.perf_counter()
    stiefel = estimate_expectation(HaarSampler(dims), functional, n_samples, seed, lo, ls, workers)
    gauss = estimate_expectation(
        GaussianSampler(dims, normalized=False, scale=1.0 / alpha),
        functional,
        n_samples,
        seed,
        ro,
        rs,
        workers,
    )
    lhs, rhs = (stiefel, gauss) if sense == "convex" else (gauss, stiefel)
    return ComparisonReport(
        theorem_id="convex",
        dims=dims,
        norm=functional.label,
        phi=functional.phi.label,
        factor_used=1.0 / alpha,
        lhs=lhs,
        rhs=rhs,
        verdict=compare(lhs, rhs, z),
        wall_time=time.perf_counter() - start,
        details={"sense": sense, "alpha": alpha, "lhs_side": "stiefel" if sense == "convex" else "gaussian"},
    )


def run_ncgauss(
    n, A_list, norm_spec, phi_spec=PhiSpec(), n_samples=10_000, seed=0, factor=1.5, z=3.0, workers=None
):
    """Check ``E phi(|sum Q_j A_j|) <= E phi(1.5 |sum G_j A_j|)``.

    ``Q_j`` are independent Haar orthogonal ``n x n`` matrices and ``G_j``
    independent normalized Gaussian ones.
    """
    A = tuple(np.asarray(a, dtype=np.float64).reshape(n, n) for a in A_list)
    if not A:
        raise ValueError("need at least one coefficient matrix")
    dims = Dims(n, n)
    (lo, ls), (ro, rs) = _split_streams()
    start = time.perf_counter()
    lhs = estimate_expectation(
        OrthogonalSumSampler(A, "haar"), ConvexFunctional(norm_spec, phi_spec), n_samples, seed, lo, ls, workers
    )
    rhs = estimate_expectation(
        OrthogonalSumSampler(A, "gaussian"),
        ConvexFunctional(norm_spec, phi_spec, scale=factor),
        n_samples,
        seed,
        ro,
        rs,
        workers,
    )
    return ComparisonReport(
        theorem_id="ncgauss",
        dims=dims,
        norm=norm_spec.label,
        phi=phi_spec.label,
        factor_used=factor,
        lhs=lhs,
        rhs=rhs,
        verdict=compare(lhs, rhs, z),
        wall_time=time.perf_counter() - start,
        details={"J": len(A)},
    )


def rademacher_mean_abs(coeffs):
    """Exact ``E |sum_j eps_j a_j|`` for i.i.d. signs, by enumerating all patterns."""
    a = np.asarray(coeffs, dtype=np.float64)
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=a.size)))
    return float(np.mean(np.abs(signs @ a)))


def check_right_ideal(norm_spec, dims, n_pairs=100, seed=0):
    """Largest excess ``|AB| - |A| ||B||`` over random Gaussian pairs
    ``A`` (n x k), ``B`` (k x k). Nonpositive (up to round-off) for a right
    operator ideal norm."""
    worst = -math.inf
    spectral = NormSpec("spectral")
    for i in range(n_pairs):
        stream = derive_substream(seed, i)
        A = stream.standard_normal(dims.shape)
        B = stream.standard_normal((dims.k, dims.k))
        excess = eval_norm(norm_spec, A @ B) - eval_norm(norm_spec, A) * eval_norm(spectral, B)
        worst = max(worst, excess)
    return worst


def run_converse1(dims, norm_spec, n_samples=10_000, seed=0, z=3.0, workers=None):
    """Check ``E |G| <= (1 + sqrt(k/n)) E |Q|`` for a right operator ideal norm."""
    if not norm_spec.right_ideal:
        raise ValueError(f"{norm_spec.label} is not a right operator ideal norm")
    factor = 1.0 + math.sqrt(dims.rho)
    f = ConvexFunctional(norm_spec)
    (lo, ls), (ro, rs) = _split_streams()
    start = time.perf_counter()
    lhs = estimate_expectation(GaussianSampler(dims), f, n_samples, seed, lo, ls, workers)
    q = estimate_expectation(HaarSampler(dims), f, n_samples, seed, ro, rs, workers)
    rhs = q.scaled(factor)
    excess = check_right_ideal(norm_spec, dims, n_pairs=100, seed=seed)
    return ComparisonReport(
        theorem_id="converse1",
        dims=dims,
        norm=norm_spec.label,
        phi="identity",
        factor_used=factor,
        lhs=lhs,
        rhs=rhs,
        verdict=compare(lhs, rhs, z),
        wall_time=time.perf_counter() - start,
        details={"stiefel_mean": q.mean, "right_ideal_max_excess": excess},
    )


def converse1_moment_ratio(dims, norm_spec, m, n_samples=10_000, seed=0, workers=None):
    """Empirical ``E |G|^m / ((1 + sqrt(rho)) E |Q|^m)``; reported, not bounded."""
    phi = PhiSpec("power", m=m)
    f = ConvexFunctional(norm_spec, phi)
    (lo, ls), (ro, rs) = _split_streams()
    g = estimate_expectation(GaussianSampler(dims), f, n_samples, seed, lo, ls, workers)
    q = estimate_expectation(HaarSampler(dims), f, n_samples, seed, ro, rs, workers)
    return g.mean / ((1.0 + math.sqrt(dims.rho)) * q.mean)


@dataclass(frozen=True, eq=False)
class _Converse2Draw:
    dims: Dims
    t_choice: str

    def __call__(self, stream):
        T = TriangularSampler(self.dims, self.t_choice)(stream)
        Q = sample_haar_stiefel(self.dims, stream)
        return T, Q


@dataclass(frozen=True, eq=False)
class _Converse2Norms:
    yy: NormSpec
    yz: NormSpec

    def __call__(self, draw):
        T, Q = draw
        return np.array([eval_norm(self.yy, T), eval_norm(self.yz, Q)])


def run_converse2(dims, Y, Z, t_choice="bartlett_R", n_samples=10_000, seed=0, z=3.0, workers=None):
    """Check ``E ||G||_{Y->Z} <= (n^{-1/2} E ||T||_{Y->Y}) (E ||Q||_{Y->Z})``.

    ``G`` is ``n x k`` normalized Gaussian, ``T`` the Bartlett factor ``R`` or
    the Wishart root ``W``, ``Q`` Haar. ``T`` and ``Q`` are independent draws
    from the right-hand substreams; the product's standard error comes from
    the delta method.
    """
    yz = NormSpec.op(Y, Z)
    yy = NormSpec.op(Y, Y)
    (lo, ls), (ro, rs) = _split_streams()
    start = time.perf_counter()
    lhs = estimate_expectation(GaussianSampler(dims), ConvexFunctional(yz), n_samples, seed, lo, ls, workers)
    vals = sample_values(_Converse2Draw(dims, t_choice), _Converse2Norms(yy, yz), n_samples, seed, ro, rs, workers)
    t_est = McEstimate.from_values(vals[:, 0], seed).scaled(1.0 / math.sqrt(dims.n))
    q_est = McEstimate.from_values(vals[:, 1], seed)
    rhs = McEstimate(
        mean=t_est.mean * q_est.mean,
        stderr=math.hypot(t_est.mean * q_est.stderr, q_est.mean * t_est.stderr),
        n_samples=n_samples,
        master_seed=seed,
    )
    return ComparisonReport(
        theorem_id="converse2",
        dims=dims,
        norm=yz.label,
        phi="identity",
        factor_used=t_est.mean,
        lhs=lhs,
        rhs=rhs,
        verdict=compare(lhs, rhs, z),
        wall_time=time.perf_counter() - start,
        details={"T": t_choice, "T_factor_stderr": t_est.stderr, "stiefel_mean": q_est.mean},
    )


def maxentry_bound(n):
    """``3 sqrt((log n + 1/4) / n)``, the bound on ``E max |Q_ij|`` for Haar ``Q`` in O(n)."""
    return 3.0 * math.sqrt((math.log(n) + 0.25) / n)


@dataclass(frozen=True)
class MaxEntryRow:
    n: int
    estimate: McEstimate
    bound: float
    normalized_mean: float
    normalized_stderr: float

    @property
    def separation(self):
        """Gap to the bound in standard errors."""
        if self.estimate.stderr == 0:
            return math.inf
        return (self.bound - self.estimate.mean) / self.estimate.stderr

    @property
    def below_bound(self):
        return self.estimate.mean <= self.bound


def _max_abs_entry(M):
    return float(np.max(np.abs(M)))


def run_maxentry_study(n_list, n_samples=10_000, seed=0, workers=None):
    """Estimate ``E max |Q_ij|`` for Haar orthogonal ``Q`` in dimension ``n``.

    Also records the mean of ``sqrt(n / log n) * max |Q_ij|``, whose almost
    sure liminf and limsup are 2 and sqrt(6); these limits are not checked.
    Dimension ``n_list[i]`` uses substreams ``i*n_samples .. (i+1)*n_samples - 1``.
    """
    rows = []
    for idx, n in enumerate(n_list):
        if n < 2:
            raise ValueError(f"max-entry study needs n >= 2, got {n}")
        est = estimate_expectation(
            HaarSampler(Dims(n, n)), _max_abs_entry, n_samples, seed, idx * n_samples, 1, workers
        )
        c = math.sqrt(n / math.log(n))
        rows.append(MaxEntryRow(n, est, maxentry_bound(n), c * est.mean, c * est.stderr))
    return rows


@dataclass
class CounterexampleReport:
    """``E phi(beta ||G||)`` against ``E phi(||Q||)`` for ``phi(t) = ((t)_+ - 1)_+``."""

    beta: float
    dims: Dims
    gaussian: McEstimate
    stiefel: McEstimate
    stiefel_max: float
    wall_time: float = 0.0

    @property
    def gaussian_positive(self):
        return self.gaussian.mean - 3.0 * self.gaussian.stderr > 0

    @property
    def stiefel_zero(self):
        """Every Stiefel sample is zero up to round-off in ``||Q|| = 1``."""
        return self.stiefel_max <= 1e-12


def run_counterexample(beta, dims, n_samples=10_000, seed=0, workers=None):
    """No factor ``beta`` makes ``E phi(beta |G|) <= E phi(|Q|)`` hold in general."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    hinge = PhiSpec("hinge", c=1.0)
    spectral = NormSpec("spectral")
    (lo, ls), (ro, rs) = _split_streams()
    start = time.perf_counter()
    g = estimate_expectation(
        GaussianSampler(dims), ConvexFunctional(spectral, hinge, scale=beta), n_samples, seed, lo, ls, workers
    )
    sv = sample_values(HaarSampler(dims), ConvexFunctional(spectral, hinge), n_samples, seed, ro, rs, workers)
    return CounterexampleReport(
        beta=float(beta),
        dims=dims,
        gaussian=g,
        stiefel=McEstimate.from_values(sv, seed),
        stiefel_max=float(np.max(np.abs(sv))),
        wall_time=time.perf_counter() - start,
    )


@dataclass(frozen=True)
class SelfTestResult:
    name: str
    statistic: float
    threshold: float
    passed: bool

    def __post_init__(self):
        # numpy scalars would render as "True" / "np.float64(...)"
        object.__setattr__(self, "statistic", float(self.statistic))
        object.__setattr__(self, "threshold", float(self.threshold))
        object.__setattr__(self, "passed", bool(self.passed))


@dataclass(frozen=True)
class _BartlettDraw:
    """Per draw: upper triangle of the QR factor ``R`` of a Gaussian, upper
    triangle of a directly sampled Bartlett ``R``, and ``P R P^T`` (QR factor)."""

    dims: Dims

    def __call__(self, stream):
        k = self.dims.k
        iu = np.triu_indices(k)
        _, R = qr_positive_diagonal(sample_standard_gaussian(self.dims, stream), validate=False)
        perm = sample_uniform_permutation(k, stream)
        B = sample_bartlett_R(self.dims, stream)
        return np.concatenate([R[iu], B[iu], R[np.ix_(perm, perm)].ravel()])


@dataclass(frozen=True, eq=False)
class _InvarianceDraw:
    """Scalar statistics of ``U Q`` for a fixed orthogonal ``U``."""

    dims: Dims
    U: np.ndarray

    def __call__(self, stream):
        Q = self.U @ sample_haar_stiefel(self.dims, stream)
        return np.array([np.max(np.abs(Q)), Q[0, 0]])


def _identity(x):
    return x


def _z(mean, target, se):
    if se == 0:
        return 0.0 if mean == target else math.inf
    return abs(mean - target) / se


def run_distribution_selftests(dims, n_samples=100_000, seed=0, z=3.0, workers=None):
    """Distributional checks on the samplers and factorizations.

    * Bartlett moments, for both the QR factor of a Gaussian and the directly
      sampled factor: ``E R_ii = chi_mean(n - i + 1)``, ``E R_ij = 0`` and
      ``Var R_ij = 1`` (within 5%) above the diagonal.
    * Haar left invariance: max-entry and ``Q_11`` of ``Q`` and ``U Q`` agree
      in mean (two-sample z-test) for a fixed Haar orthogonal ``U``.
    * Symmetrization: ``E P R P^T = alpha(k, n) I`` entrywise for a uniform
      permutation ``P``.
    """
    n, k = dims.n, dims.k
    results = []
    vals = sample_values(_BartlettDraw(dims), _identity, n_samples, seed, 0, 1, workers)
    iu = np.triu_indices(k)
    m = len(iu[0])
    means = np.mean(vals, axis=0)
    ses = np.std(vals, axis=0, ddof=1) / math.sqrt(n_samples)
    variances = np.var(vals, axis=0, ddof=1)
    for fam, base in (("qr_R", 0), ("bartlett_R", m)):
        for pos, (i, j) in enumerate(zip(*iu)):
            c = base + pos
            if i == j:
                stat = _z(means[c], chi_mean(n - i), ses[c])
                results.append(SelfTestResult(f"{fam}[{i+1},{i+1}] mean", stat, z, stat <= z))
            else:
                stat = _z(means[c], 0.0, ses[c])
                results.append(SelfTestResult(f"{fam}[{i+1},{j+1}] mean", stat, z, stat <= z))
                rel = abs(variances[c] - 1.0)
                results.append(SelfTestResult(f"{fam}[{i+1},{j+1}] variance", rel, 0.05, rel <= 0.05))
    alpha = alpha_exact(k, n)
    for a in range(k):
        for b in range(k):
            c = 2 * m + a * k + b
            target = alpha if a == b else 0.0
            stat = _z(means[c], target, ses[c])
            results.append(SelfTestResult(f"PRP^T[{a+1},{b+1}] mean", stat, z, stat <= z))

    U = sample_haar_stiefel(Dims(n, n), derive_substream(seed, _AUX_STREAM))
    eye = np.eye(n)
    plain = sample_values(_InvarianceDraw(dims, eye), _identity, n_samples, seed, 0, 2, workers)
    rotated = sample_values(_InvarianceDraw(dims, U), _identity, n_samples, seed, 1, 2, workers)
    for col, name in enumerate(("max_entry", "Q11")):
        a = McEstimate.from_values(plain[:, col], seed)
        b = McEstimate.from_values(rotated[:, col], seed)
        stat = _z(a.mean, b.mean, math.hypot(a.stderr, b.stderr))
        results.append(SelfTestResult(f"left_invariance {name}", stat, z, stat <= z))
    return results
