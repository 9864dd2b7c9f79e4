import math

import numpy as np
import pytest

from stiefel_compare.constants import alpha_exact, chi_mean
from stiefel_compare.estimation import CONSISTENT, VIOLATED
from stiefel_compare.experiments import (
    check_right_ideal,
    converse1_moment_ratio,
    maxentry_bound,
    rademacher_mean_abs,
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
from stiefel_compare.functionals import ConvexFunctional, NormSpec, PhiSpec
from stiefel_compare.sampling import Dims

SPECTRAL = NormSpec("spectral")
FROB = NormSpec("frobenius")
MAXE = NormSpec("max_entry")


class TestSublinear:
    def test_square_spectral(self):
        r = run_sublinear_comparison(Dims(16, 16), SPECTRAL, n_samples=500)
        assert abs(r.lhs.mean - 1) <= 1e-10 and r.lhs.stderr <= 1e-10
        assert r.factor_used == 1.5
        assert 1.0 <= r.rhs.mean <= 3.0
        assert r.verdict.status == CONSISTENT

    def test_scalar_case(self):
        r = run_sublinear_comparison(Dims(1, 1), MAXE, n_samples=20_000)
        assert r.lhs.mean == 1.0
        assert abs(r.rhs.mean - 1.5 * math.sqrt(2 / math.pi)) <= 3 * r.rhs.stderr
        assert r.verdict.status == CONSISTENT

    def test_maxentry_small_hinge(self):
        r = run_sublinear_comparison(Dims(64, 16), MAXE, PhiSpec("hinge", c=0.2), n_samples=10_000)
        assert r.verdict.status == CONSISTENT

    def test_grid_matches_single_runs(self):
        dims = [(8, 2), (6, 6)]
        norms = [SPECTRAL, MAXE]
        phis = [PhiSpec(), PhiSpec("power", m=2.0)]
        grid = run_sublinear_grid(dims, norms, phis, n_samples=200, seed=4)
        assert len(grid) == 8
        i = 0
        for d in dims:
            for nm in norms:
                for ph in phis:
                    single = run_sublinear_comparison(Dims(*d), nm, ph, n_samples=200, seed=4)
                    assert (single.lhs, single.rhs, single.verdict) == (grid[i].lhs, grid[i].rhs, grid[i].verdict)
                    i += 1

    def test_margin_monotone_in_factor(self):
        margins = [
            run_sublinear_comparison(Dims(8, 2), FROB, n_samples=400, factor_override=f).verdict.z_margin
            for f in (0.8, 1.0, 1.25, 1.5, 2.0)
        ]
        assert all(a < b for a, b in zip(margins, margins[1:]))

    def test_factor_override_detects(self):
        r = run_sublinear_comparison(Dims(32, 32), SPECTRAL, n_samples=300, factor_override=0.5)
        assert r.verdict.status == VIOLATED and r.violated

    @pytest.mark.parametrize("j", [1, 4, 16])
    def test_submatrix(self, j):
        dims = Dims(16, 4)
        r = run_sublinear_comparison(dims, SPECTRAL, n_samples=2000, submatrix_j=j)
        assert r.norm == f"spectral[rows={j}]"
        assert r.verdict.status != VIOLATED
        bound = (1 + dims.k / (2 * dims.n)) * (1 + math.sqrt(dims.k / j))
        assert r.rhs.mean - 3 * r.rhs.stderr <= bound


class TestConvex:
    def test_frobenius(self):
        dims = Dims(16, 4)
        r = run_convex_comparison(dims, ConvexFunctional(FROB), n_samples=2000)
        assert abs(r.lhs.mean - 2) <= 1e-12
        expected = chi_mean(64) / alpha_exact(4, 16)
        assert abs(r.rhs.mean - expected) <= 3 * r.rhs.stderr
        assert r.factor_used == pytest.approx(1 / alpha_exact(4, 16))
        assert r.verdict.status == CONSISTENT

    def test_concave_negated_max_entry(self):
        g = ConvexFunctional(MAXE, negate=True)
        r = run_convex_comparison(Dims(8, 2), g, "concave", n_samples=4000)
        assert r.details["lhs_side"] == "gaussian"
        assert r.verdict.status == CONSISTENT

    def test_linear_equality(self):
        L = np.zeros((6, 3))
        L[0, 0] = 1.0
        f = ConvexFunctional(linear=L)
        r = run_convex_comparison(Dims(6, 3), f, n_samples=4000)
        assert abs(r.lhs.mean) <= 3 * r.lhs.stderr
        assert abs(r.rhs.mean) <= 3 * r.rhs.stderr

    def test_sense_mismatch(self):
        with pytest.raises(ValueError):
            run_convex_comparison(Dims(4, 2), ConvexFunctional(FROB), "concave", n_samples=10)
        with pytest.raises(ValueError):
            run_convex_comparison(Dims(4, 2), ConvexFunctional(FROB), "affine", n_samples=10)


class TestNcGauss:
    def test_single_identity_reduces(self):
        r = run_ncgauss(6, [np.eye(6)], SPECTRAL, n_samples=400, seed=2)
        s = run_sublinear_comparison(Dims(6, 6), SPECTRAL, n_samples=400, seed=2)
        assert r.lhs.mean == pytest.approx(1.0, abs=1e-10)
        assert r.factor_used == s.factor_used == 1.5
        assert r.rhs == s.rhs

    def test_two_halves(self):
        r = run_ncgauss(8, [0.5 * np.eye(8)] * 2, FROB, n_samples=4000)
        assert r.verdict.status == CONSISTENT

    def test_rademacher_exact(self):
        assert rademacher_mean_abs([1, 2, 3]) == 3.0
        r = run_ncgauss(1, [[1.0], [2.0], [3.0]], MAXE, n_samples=4000)
        # each 1x1 Haar orthogonal matrix is a uniform sign
        assert abs(r.lhs.mean - 3.0) <= 3 * r.lhs.stderr
        assert abs(r.rhs.mean - 1.5 * math.sqrt(14) * math.sqrt(2 / math.pi)) <= 3 * r.rhs.stderr
        assert r.verdict.status == CONSISTENT

    def test_empty_and_mismatch(self):
        with pytest.raises(ValueError):
            run_ncgauss(3, [], SPECTRAL, n_samples=10)
        with pytest.raises(ValueError):
            run_ncgauss(3, [np.eye(2)], SPECTRAL, n_samples=10)


class TestConverse1:
    def test_frobenius_closed_form(self):
        r = run_converse1(Dims(16, 4), FROB, n_samples=4000)
        assert r.factor_used == 1.5
        assert r.rhs.mean == pytest.approx(3.0, abs=1e-12)
        assert abs(r.lhs.mean - chi_mean(64) / 4) <= 3 * r.lhs.stderr
        assert r.verdict.status == CONSISTENT
        assert r.details["right_ideal_max_excess"] <= 1e-12

    def test_square_spectral(self):
        r = run_converse1(Dims(16, 16), SPECTRAL, n_samples=1000)
        assert r.rhs.mean == pytest.approx(2.0, abs=1e-10)
        assert r.verdict.status == CONSISTENT

    def test_single_column(self):
        r = run_converse1(Dims(64, 1), SPECTRAL, n_samples=2000)
        assert chi_mean(64) / 8 < 1
        assert abs(r.lhs.mean - chi_mean(64) / 8) <= 3 * r.lhs.stderr
        assert r.verdict.status == CONSISTENT

    def test_rejects_non_ideal(self):
        with pytest.raises(ValueError):
            run_converse1(Dims(4, 2), MAXE, n_samples=10)

    @pytest.mark.parametrize("spec", [SPECTRAL, FROB])
    def test_right_ideal_property(self, spec):
        assert check_right_ideal(spec, Dims(7, 3), n_pairs=200) <= 1e-12

    def test_max_entry_fails_right_ideal(self):
        assert check_right_ideal(MAXE, Dims(7, 3), n_pairs=200) > 0

    def test_moment_ratio_is_finite(self):
        ratio = converse1_moment_ratio(Dims(8, 2), FROB, 2, n_samples=500)
        assert 0 < ratio < 10


class TestConverse2:
    def test_square_l2_wishart_near_equality(self):
        r = run_converse2(Dims(8, 8), "l2", "l2", "wishart_W", n_samples=2000)
        assert r.details["stiefel_mean"] == pytest.approx(1.0, abs=1e-10)
        # RHS estimates the same quantity as LHS
        assert abs(r.verdict.z_margin) <= 4

    def test_l1_linf_bartlett(self):
        r = run_converse2(Dims(16, 4), "l1", "linf", "bartlett_R", n_samples=4000)
        assert r.verdict.status == CONSISTENT

    def test_linf_linf_wishart(self):
        r = run_converse2(Dims(8, 8), "linf", "linf", "wishart_W", n_samples=4000)
        assert r.verdict.status == CONSISTENT

    def test_unsupported_pair(self):
        with pytest.raises(ValueError):
            run_converse2(Dims(4, 2), "l2", "l1", n_samples=10)


class TestMaxEntry:
    def test_bound_substitution(self):
        assert maxentry_bound(256) == pytest.approx(3 * math.sqrt((8 * math.log(2) + 0.25) / 256), rel=1e-15)
        assert maxentry_bound(256) == pytest.approx(0.451372, abs=5e-7)

    def test_small_n(self):
        (row,) = run_maxentry_study([2], n_samples=1000)
        assert math.isfinite(row.bound) and row.below_bound
        assert 1 / math.sqrt(2) <= row.estimate.mean <= 1

    def test_rows_and_separation(self):
        rows = run_maxentry_study([16, 32], n_samples=500)
        assert [r.n for r in rows] == [16, 32]
        for r in rows:
            assert r.below_bound and r.separation > 3
            assert r.normalized_mean == pytest.approx(math.sqrt(r.n / math.log(r.n)) * r.estimate.mean)

    def test_rejects_n1(self):
        with pytest.raises(ValueError):
            run_maxentry_study([1], n_samples=10)


class TestCounterexample:
    def test_beta_one_and_half(self):
        r = run_counterexample(1.5, Dims(8, 8), n_samples=2000)
        assert r.gaussian_positive and r.stiefel_zero

    def test_beta_one(self):
        r = run_counterexample(1.0, Dims(4, 4), n_samples=2000)
        assert r.stiefel_zero

    def test_small_beta_recorded(self):
        r = run_counterexample(0.1, Dims(4, 4), n_samples=2000)
        assert r.gaussian.mean >= 0 and r.stiefel_zero

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            run_counterexample(0.0, Dims(4, 4))


class TestSelfTests:
    def test_all_pass(self):
        results = run_distribution_selftests(Dims(8, 3), n_samples=20_000, seed=1)
        assert all(r.passed for r in results), [r for r in results if not r.passed]
        names = {r.name.split("[")[0] for r in results}
        assert {"qr_R", "bartlett_R", "PRP^T"} <= names
        assert any("invariance" in r.name for r in results)
