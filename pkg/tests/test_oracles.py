"""Brute-force oracles and identity pipelines."""

import math

import numpy as np
import pytest

from itermellin import engine, oracles
from itermellin.arith import binomial, divisor_sigma, factorial
from itermellin.quadrature import EvalParams
from itermellin.theta import make_builtin_theta

PI = math.pi
P = EvalParams()


class TestQSums:
    def test_q11_closed_form(self):
        assert abs(oracles.q_sum((1, 1), 1e-8) - PI**4 / 72) < 1e-9

    def test_depth_one_is_zeta(self):
        assert abs(oracles.q_sum((2,), 1e-10) - PI**4 / 90) < 1e-12

    def test_q21_against_brute_double_sum(self):
        # independent small brute-force sum with a crude bound
        m = np.arange(1.0, 1501.0)
        n = np.arange(1.0, 1501.0)
        total = 0.0
        for nv in n:
            total += float(np.sum((m**2 + nv**2) ** -2.0)) / nv**2
        # the discarded tails are below ~2e-7 for these exponents
        assert abs(oracles.q_sum((2, 1), 1e-8) - total) < 1e-6

    def test_depth3_runs(self):
        v = oracles.q_sum((1, 1, 1), 1e-4)
        assert 0 < v < 2

    def test_budget_error(self):
        with pytest.raises(oracles.SummationBudgetError):
            oracles.q_sum((1, 1, 1), 1e-12)

    def test_bad_exponents(self):
        with pytest.raises(ValueError):
            oracles.q_sum((0, 1))


class TestReduction:
    def test_printed_examples(self):
        assert oracles.reduce_d_to_q((1, 2)) == {(1, 2): 1, (2, 1): 1}
        assert oracles.reduce_d_to_q((2, 1)) == {(2, 1): 1}

    @pytest.mark.parametrize("l1", [1, 2, 3, 4])
    @pytest.mark.parametrize("l2", [1, 2, 3, 4])
    def test_binomial_closed_form(self, l1, l2):
        want = {
            (l1 + k, l2 - k): factorial(l1 - 1) * factorial(l2 - 1) * binomial(l1 + k - 1, k)
            for k in range(l2)
        }
        assert oracles.reduce_d_to_q((l1, l2)) == want

    def test_depth_one(self):
        assert oracles.reduce_d_to_q((3,)) == {(3,): 2}


class TestMzv:
    def test_zeta2(self):
        assert abs(oracles.mzv_sum((2,), 1e-10) - PI**2 / 6) < 1e-12

    def test_euler_identity_by_summation(self):
        z12 = oracles.mzv_sum((1, 2), 1e-7)
        z3 = oracles.mzv_sum((3,), 1e-10)
        assert abs(z12 - z3) < 1e-7

    def test_divergent_rejected(self):
        with pytest.raises(ValueError):
            oracles.mzv_sum((2, 1))

    def test_depth2_convergent_head(self):
        # zeta(2,3) against a plain double loop
        k = np.arange(1.0, 4001.0)
        inner = np.concatenate(([0.0], np.cumsum(k**-2.0)[:-1]))
        brute = float(np.sum(inner * k**-3.0))
        assert abs(oracles.mzv_sum((2, 3), 1e-8) - brute) < 1e-6


class TestDirichletDouble:
    def test_delta_coefficients_converge(self):
        from itermellin.arith import ramanujan_tau

        d, dd = oracles.dirichlet_double(
            lambda n: float(ramanujan_tau(n)),
            lambda n: float(ramanujan_tau(n)),
            12,
            14.0,
            1e-6,
            growth_a=(2.0, 7.0),
            growth_b=(2.0, 7.0),
        )
        assert np.isfinite(d.real) and np.isfinite(dd.real)

    def test_zero_stream(self):
        d, dd = oracles.dirichlet_double(
            lambda n: 0.0, lambda n: 1.0, 4, 6.0, 1e-8, (0.0, 0.0), (1.0, 0.0)
        )
        assert d == 0 and dd == 0

    def test_convergence_precheck(self):
        with pytest.raises(ValueError):
            oracles.dirichlet_double(
                lambda n: float(divisor_sigma(3, n)),
                lambda n: float(divisor_sigma(3, n)),
                1,
                3.0,
                1e-6,
                (2.0, 3.0),
                (2.0, 3.0),
            )

    def test_lambda_bridge_p2(self):
        """Lambda(f,g;p,s) as a combination of products of single values
        and completed double Dirichlet series, f = g = G4, p=2, s=9."""
        g4 = make_builtin_theta("eisenstein", 4)
        e1 = engine.build_expression((g4,))
        e2 = engine.build_expression((g4, g4))
        p_, s = 2, 9.0
        a0 = 1.0 / 240
        lhs, _ = engine.lambda_eval(e2, (float(p_), s), P)
        lam = lambda x: engine.lambda_eval(e1, (x,), P)[0]
        rhs = lam(float(p_)) * lam(s) + a0 / p_ * lam(s + p_) - a0 / s * lam(s + p_)
        for r in range(p_):
            _, dd = oracles.dirichlet_double(
                lambda n: float(divisor_sigma(3, n)),
                lambda n: float(divisor_sigma(3, n)),
                p_ - r,
                s + r,
                1e-8,
                (2.0, 3.0),
                (2.0, 3.0),
            )
            rhs -= binomial(p_ - 1, r) * dd
        assert abs(lhs - rhs) < 1e-6


class TestBindingLemma:
    @pytest.mark.parametrize("args", [(1, 1, 1, 2.0), (2, 3, 5, 1.5), (3, 2, 7, 0.8 + 1.1j)])
    def test_examples(self, args):
        assert oracles.binding_lemma_defect(*args) < 1e-10

    def test_p1_single_term(self):
        # p = 1 reduces the right-hand sum to its r = 0 term
        assert oracles.binding_lemma_defect(1, 4, 9, 1.3) < 1e-12

    def test_precondition(self):
        with pytest.raises(ValueError):
            oracles.binding_lemma_defect(1, 1, 1, -0.5)


class TestRealEisenstein:
    def test_functional_equation_via_continuation(self):
        a, _, _ = oracles.real_eisenstein(1j, 1.3, P)
        b, _, _ = oracles.real_eisenstein(1j, -0.3, P)
        assert abs(a - b) < 1e-7

    def test_modular_invariance(self):
        z = 2j
        a, _, _ = oracles.real_eisenstein(z, 1.5, P)
        b, _, _ = oracles.real_eisenstein(-1 / z, 1.5, P)
        assert abs(a - b) < 1e-8
        z = 0.3 + 1.7j
        a, _, _ = oracles.real_eisenstein(z, 1.5, P)
        b, _, _ = oracles.real_eisenstein(-1 / z, 1.5, P)
        assert abs(a - b) < 1e-8

    def test_against_raw_lattice_sum(self):
        raw = oracles.eisenstein_lattice_sum(2j, 2.5, 300.0)
        th, _, _ = oracles.real_eisenstein(2j, 2.5, P)
        gamma_r = PI**-2.5 * math.gamma(2.5)
        assert abs(raw - th / gamma_r) < 5e-7

    def test_einf_assembly(self):
        _, _, einf = oracles.real_eisenstein(2j, 1.5, P)
        direct = oracles.xi_value(3.0, P) * 2**1.5 + oracles.xi_value(2.0, P) * 2**-0.5
        assert abs(einf - direct) < 1e-10

    def test_decomposition_consistency(self):
        e, e0, einf = oracles.real_eisenstein(1.0j, 2.0, P)
        assert abs(e - (e0 + einf)) < 1e-14


class TestXiViaEisenstein:
    def test_one_one(self):
        assert abs(oracles.xi_via_eisenstein(1.0, 1.0, P) - PI**2 / 72) < 1e-9

    def test_cross_pipeline(self):
        e2 = engine.build_expression((make_builtin_theta("riemann"),) * 2)
        ref, _ = engine.lambda_eval(e2, (2.6, 1.8), P)
        assert abs(oracles.xi_via_eisenstein(1.3, 0.9, P) - ref) < 1e-6

    def test_reflection_symmetry(self):
        e2 = engine.build_expression((make_builtin_theta("riemann"),) * 2)
        ref, _ = engine.lambda_eval(e2, (1 - 2 * 1.2, 1 - 2 * 1.1), P)
        assert abs(oracles.xi_via_eisenstein(1.1, 1.2, P) - ref) < 1e-6

    def test_convergence_region(self):
        with pytest.raises(ValueError):
            oracles.xi_via_eisenstein(0.2, 0.2, P)


class TestEichler:
    def test_22_value(self):
        assert abs(oracles.eichler_xi((2, 2), P) - PI**2 / 72) < 1e-9

    @pytest.mark.parametrize("pair", [(2, 4), (4, 2), (6, 2)])
    def test_cross_pipeline(self, pair):
        e2 = engine.build_expression((make_builtin_theta("riemann"),) * 2)
        ref, _ = engine.lambda_eval(e2, (float(pair[0]), float(pair[1])), P)
        assert abs(oracles.eichler_xi(pair, P) - ref) < 1e-7

    def test_unknown_pair(self):
        with pytest.raises(ValueError):
            oracles.eichler_xi((8, 2), P)


class TestMzvReconstruction:
    def test_all_lengths(self):
        recs = {r["case"]: r["defect"] for r in oracles.mzv_reconstruction_check(P)}
        assert recs["pi*Lambda(theta+;1) = -8 log 2"] < 1e-10
        assert recs["Lambda(theta-;1) = 0"] < 1e-10
        assert recs["pi^2*Lambda(theta-,theta+;1,1)"] < 1e-8
        assert recs["pi^3*Lambda(theta-,theta-,theta+;1,1,1)"] < 1e-7


class TestRichardson:
    def test_limit_of_polynomial(self):
        f = lambda e: 3.0 + 2 * e + 5 * e**2 + e**3
        assert abs(oracles.richardson_limit(f, 0.1, 3) - 3.0) < 1e-12
