import cmath
import math

import numpy as np
import pytest

from cubicphase.cubic import (
    commutator_approx_residual,
    factor_operator,
    gamma_factors,
    ideal_cubic_gate,
    monomial_identity_report,
    polynomial_identity_report,
    u_n_convergence_norms,
    u_n_operator,
)
from cubicphase.hilbert import (
    FockOperator,
    interior_max_norm,
    quadrature_p,
    quadrature_x,
)


class TestGammaFactors:
    def test_magnitude_and_phase(self):
        dec = gamma_factors(0.03, 1)
        assert abs(dec.gamma_l[0]) == pytest.approx(0.03 ** (1 / 3), rel=1e-12)
        assert cmath.phase(dec.gamma_l[0]) == pytest.approx(math.pi / 6, abs=1e-12)

    def test_sum_vanishes(self):
        dec = gamma_factors(0.1, 3)
        assert abs(sum(dec.gamma_l)) < 1e-12

    def test_pair_products_vanish(self):
        g = gamma_factors(0.05, 2).gamma_l
        s2 = g[0] * g[1] + g[0] * g[2] + g[1] * g[2]
        assert abs(s2) < 1e-12

    def test_product_is_i_gamma_over_n(self):
        for gamma, n in [(0.03, 1), (0.1, 7)]:
            g = gamma_factors(gamma, n).gamma_l
            assert abs(g[0] * g[1] * g[2] - 1j * gamma / n) < 1e-12

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            gamma_factors(0.0, 1)
        with pytest.raises(ValueError):
            gamma_factors(0.03, 0)


class TestFactorOperator:
    def test_zero_is_identity(self):
        assert np.array_equal(factor_operator(0.0, 8).matrix, np.eye(8))

    @pytest.mark.parametrize("gamma,n", [(0.03, 1), (0.03, 7), (0.1, 3)])
    def test_factorization_identity(self, gamma, n):
        c = 40
        dec = gamma_factors(gamma, n)
        prod = np.eye(c, dtype=complex)
        for gl in dec.gamma_l:
            prod = prod @ factor_operator(gl, c).matrix
        x3 = np.linalg.matrix_power(quadrature_x(c).matrix, 3)
        target = np.eye(c) + 1j * (gamma / n) * x3
        assert interior_max_norm(prod - target, (c,), 2) < 1e-10

    @pytest.mark.parametrize("gamma,n", [(0.03, 1), (0.1, 3)])
    def test_norm_identity(self, gamma, n):
        c = 40
        dec = gamma_factors(gamma, n)
        prod = np.eye(c, dtype=complex)
        for gl in dec.gamma_l:
            prod = prod @ factor_operator(gl, c).matrix
        x6 = np.linalg.matrix_power(quadrature_x(c).matrix, 6)
        lhs = prod.conj().T @ prod
        rhs = np.eye(c) + (gamma / n) ** 2 * x6
        assert interior_max_norm(lhs - rhs, (c,), 2) < 1e-8


class TestUnOperator:
    def test_convergence_monotone(self):
        norms = u_n_convergence_norms(0.03, (1, 2, 4, 8, 16), 40)
        assert all(a > b for a, b in zip(norms, norms[1:]))

    def test_convergence_slope(self):
        ns = (1, 2, 4, 8, 16)
        norms = u_n_convergence_norms(0.03, ns, 40)
        slope = np.polyfit(np.log(ns), np.log(norms), 1)[0]
        assert -1.2 < slope < -0.8

    def test_commutes_with_x(self):
        c = 30
        un = u_n_operator(0.03, 2, c).matrix
        x = quadrature_x(c).matrix
        assert np.abs(un @ x - x @ un).max() < 1e-10

    def test_scalar_eigenvalue_check(self):
        # at x = 1: |(1 + 0.03i) − e^{0.03i}| ≈ 4.5e−4
        diff = abs((1 + 0.03j) - cmath.exp(0.03j))
        assert diff == pytest.approx(4.4996e-4, rel=1e-3)


class TestIdealCubicGate:
    def test_zero_strength_identity(self):
        assert np.abs(ideal_cubic_gate(0.0, 12).matrix - np.eye(12)).max() < 1e-12

    def test_unitary_interior(self):
        g = ideal_cubic_gate(0.03, 40).matrix
        assert interior_max_norm(g.conj().T @ g - np.eye(40), (40,), 8) < 1e-8

    def test_commutes_with_x(self):
        g = ideal_cubic_gate(0.03, 30).matrix
        x = quadrature_x(30).matrix
        assert interior_max_norm(g @ x - x @ g, (30,), 5) < 1e-10


class TestCommutatorApprox:
    def test_zero_time(self):
        x, p = quadrature_x(30), quadrature_p(30)
        assert commutator_approx_residual(x, p, 0.0) < 1e-14

    def test_equal_operators(self):
        x = quadrature_x(30)
        assert commutator_approx_residual(x, x, 0.2) < 1e-12

    def test_central_pair_exact_identity(self):
        # [x̂, p̂] = i is central: the group identity is exact, the residual is
        # the truncation floor (frozen from a build-time run), far below C·t³
        x, p = quadrature_x(40), quadrature_p(40)
        assert commutator_approx_residual(x, p, 0.1, margin=5) < 1e-7

    def test_cubic_scaling_noncentral(self):
        # (x̂², p̂²) has a non-central commutator: residual halving ratio → 8
        c = 40
        x2 = FockOperator(
            np.linalg.matrix_power(quadrature_x(c).matrix, 2), (c,), hermitian_hint=True
        )
        p2 = FockOperator(
            np.linalg.matrix_power(quadrature_p(c).matrix, 2), (c,), hermitian_hint=True
        )
        ts = (0.1, 0.05, 0.025)
        rs = [commutator_approx_residual(x2, p2, t, margin=8) for t in ts]
        ratios = [rs[i] / rs[i + 1] for i in range(2)]
        assert all(5.0 < r < 11.0 for r in ratios)
        assert ratios[-1] == pytest.approx(8.0, abs=1.2)

    def test_rejects_non_hermitian(self):
        c = 10
        x = quadrature_x(c)
        bad = FockOperator(np.triu(np.ones((c, c))), (c,))
        with pytest.raises(ValueError):
            commutator_approx_residual(x, bad, 0.1)


class TestMonomialIdentity:
    def test_m4_proportional(self):
        rep = monomial_identity_report(4, 40)
        assert rep.residual < 1e-6
        assert rep.fitted_constant == pytest.approx(4.0, abs=1e-9)

    def test_constant_cutoff_stable(self):
        c40 = monomial_identity_report(4, 40).fitted_constant
        c60 = monomial_identity_report(4, 60).fitted_constant
        assert abs(c40 - c60) < 1e-6

    def test_rhs_hermitian(self):
        rep = monomial_identity_report(4, 40)
        dev = rep.rhs_matrix - rep.rhs_matrix.conj().T
        assert interior_max_norm(dev, (40,), rep.margin) < 1e-8

    def test_m5(self):
        rep = monomial_identity_report(5, 40)
        assert rep.residual < 1e-6
        assert rep.fitted_constant == pytest.approx(4.0, abs=1e-8)

    def test_rejects_small_m(self):
        with pytest.raises(ValueError):
            monomial_identity_report(3, 30)


class TestPolynomialIdentity:
    def test_m1_n1(self):
        rep = polynomial_identity_report(1, 1, 40)
        assert rep.residual < 1e-6
        assert rep.fitted_constant == pytest.approx(2.0, abs=1e-10)

    def test_lhs_hermitian(self):
        rep = polynomial_identity_report(1, 1, 30)
        assert np.abs(rep.lhs_matrix - rep.lhs_matrix.conj().T).max() < 1e-10

    def test_m2_n1(self):
        rep = polynomial_identity_report(2, 1, 40)
        assert rep.residual < 1e-6
        assert rep.fitted_constant == pytest.approx(2.0, abs=1e-9)

    def test_m1_n2_sum_term_runs(self):
        rep = polynomial_identity_report(1, 2, 40)
        assert rep.residual < 1e-6

    def test_cutoff_stability(self):
        for m, n in ((1, 1), (2, 1)):
            c40 = polynomial_identity_report(m, n, 40).fitted_constant
            c60 = polynomial_identity_report(m, n, 60).fitted_constant
            assert abs(c40 - c60) < 1e-6
