"""Norm sequences, order estimation, transforms, coefficient bound checks."""

import math
import random
from fractions import Fraction as F

import pytest

from gevreylab import (
    LinearForm,
    TruncatedSeries,
    p_adic_decompose,
    parse_series,
)
from gevreylab.division import PAdicDecomposition, ResidueClass
from gevreylab.gevrey import (
    NormSequence,
    blowup,
    estimate_order,
    isotropic_gevrey_check,
    linear_change,
    monomial_gevrey_check,
    norm_sequence,
    ramify,
)
from gevreylab.solver import solve_padic
from helpers import build_problem, random_series, s

ELL2 = LinearForm([1, 1])


def factorial_series(count, trunc):
    terms = {(n, n): F(math.factorial(n)) for n in range(count + 1)}
    return TruncatedSeries(2, trunc, terms)


def constant_decomposition(values, trunc):
    """Fake decomposition whose level n is the constant values[n]."""
    P = s("x1 x2", 2, trunc)
    alpha = (1, 1)
    coeffs = tuple(
        ResidueClass(alpha, TruncatedSeries.constant(2, trunc, v))
        for v in values
    )
    return PAdicDecomposition(P, ELL2, coeffs, (trunc,) * len(values))


class TestNormSequence:
    def test_constant_levels(self):
        dec = constant_decomposition([F(math.factorial(n)) for n in range(8)], 10)
        ns = norm_sequence(dec, "sum", F(1, 3))
        assert ns.values == tuple(float(math.factorial(n)) for n in range(8))

    def test_geometric_sum_bounded(self):
        f = parse_series("x1/(1-x1)", 2, 12)
        dec = p_adic_decompose(f, s("x2", 2, 12), ELL2, 6)
        ns = norm_sequence(dec, "sum", F(1, 2))
        assert ns.values[0] <= 1.0
        assert all(v == 0.0 for v in ns.values[1:])

    def test_zero_decomposition(self):
        dec = constant_decomposition([F(0)] * 8, 10)
        assert all(v == 0.0 for v in norm_sequence(dec).values)

    def test_max_proxy(self):
        dec = p_adic_decompose(s("3 x1 - 5 x1^2", 2, 8), s("x2", 2, 8), ELL2, 2)
        ns = norm_sequence(dec, "max", F(1, 2))
        assert ns.values[0] == 5.0

    def test_bad_proxy(self):
        dec = constant_decomposition([F(1)], 4)
        with pytest.raises(ValueError):
            norm_sequence(dec, "median")


class TestEstimateOrder:
    def test_factorials(self):
        ns = NormSequence(tuple(float(math.factorial(n)) for n in range(31)),
                          "sum", F(1, 2))
        est = estimate_order(ns)
        assert 0.9 <= est.s_hat <= 1.1
        assert not est.inconclusive

    def test_flat(self):
        ns = NormSequence((1.0,) * 31, "sum", F(1, 2))
        est = estimate_order(ns)
        assert -0.1 <= est.s_hat <= 0.1

    def test_squared_factorials(self):
        ns = NormSequence(tuple(float(math.factorial(n)) ** 2 for n in range(31)),
                          "sum", F(1, 2))
        assert 1.8 <= estimate_order(ns).s_hat <= 2.2

    def test_scale_invariance(self):
        base = [float(math.factorial(n)) for n in range(31)]
        ns1 = NormSequence(tuple(base), "sum", F(1, 2))
        scaled = tuple(3.0 * 0.4 ** n * v for n, v in enumerate(base))
        ns2 = NormSequence(scaled, "sum", F(1, 2))
        assert abs(estimate_order(ns1).s_hat - estimate_order(ns2).s_hat) < 0.05

    def test_finite_support_is_order_zero(self):
        ns = NormSequence((0.0, 1.0) + (0.0,) * 10, "sum", F(1, 2))
        est = estimate_order(ns)
        assert est.s_hat == 0.0 and not est.inconclusive
        assert "finitely supported" in est.note

    def test_too_few_points(self):
        ns = NormSequence((0.0, 1.0, 2.0), "sum", F(1, 2))
        with pytest.raises(ValueError, match="too few"):
            estimate_order(ns)

    def test_geometric_is_order_zero(self):
        ns = NormSequence(tuple(2.0 ** n for n in range(25)), "sum", F(1, 2))
        assert abs(estimate_order(ns).s_hat) < 0.05


class TestLinearChange:
    def test_identity(self):
        f = s("1 + 2 x1 - x2^3", 2, 8)
        assert linear_change(f, [[1, 0], [0, 1]]) == f

    def test_factorial_series_mixes(self):
        # f(x1, x2) = sum n! (x1 x2)^n at A = [[1,1],[1,-1]] becomes
        # sum binom(j+k, j) (j+k)! (-1)^k xi1^{2j} xi2^{2k}: expanding
        # (xi1^2 - xi2^2)^n puts the sign on the xi2 exponent
        f = factorial_series(5, 10)
        g = linear_change(f, [[1, 1], [1, -1]])
        for j in range(3):
            for k in range(3):
                want = F(math.comb(j + k, j) * math.factorial(j + k) * (-1) ** k)
                assert g.coeff((2 * j, 2 * k)) == want
        # odd exponents vanish
        assert all(e[0] % 2 == 0 and e[1] % 2 == 0 for e in g.terms)

    def test_round_trip(self):
        rng = random.Random(17)
        a = [[F(1), F(1)], [F(0), F(1)]]
        a_inv = [[F(1), F(-1)], [F(0), F(1)]]
        for _ in range(10):
            f = random_series(rng, 2, 8)
            assert linear_change(linear_change(f, a), a_inv) == f


class TestBlowup:
    def test_monomial(self):
        assert blowup(s("x1 x2", 2, 6)) == s("x1^2 x2", 2, 6)

    def test_homogeneous_unit_factor(self):
        out = blowup(s("x1^2 + x2^2", 2, 6))
        assert out == s("x1^2 + x1^2 x2^2", 2, 6)
        # unit factor after dividing by x1^2
        from gevreylab import monomial_divide
        q, r = monomial_divide(out, (2, 0))
        assert q == s("1 + x2^2", 2, 4) and r.series.is_zero

    def test_ring_homomorphism(self):
        rng = random.Random(29)
        for _ in range(15):
            f = random_series(rng, 2, 5)
            g = random_series(rng, 2, 5)
            f_full = TruncatedSeries(2, 10, f.terms)
            g_full = TruncatedSeries(2, 10, g.terms)
            assert blowup(f_full * g_full) == blowup(f_full) * blowup(g_full)
            assert blowup(f_full + g_full) == blowup(f_full) + blowup(g_full)

    def test_dimension_guard(self):
        with pytest.raises(ValueError):
            blowup(s("x1", 1, 4))


class TestRamify:
    def test_cube(self):
        assert ramify(s("x1", 2, 6), 0, 3) == s("x1^3", 2, 6)

    def test_identity(self):
        f = s("1 + x1 x2", 2, 6)
        assert ramify(f, 1, 1) == f

    def test_composes_with_blowup(self):
        # x^2 - eps, ramified eps -> eta^2, blown up: z^2 (1 - zeta^2)
        f = s("x1^2 - x2", 2, 8)
        chain = blowup(ramify(f, 1, 2))
        assert chain == s("x1^2 - x1^2 x2^2", 2, 8)


class TestMonomialBoundCheck:
    def test_sharp_constant(self):
        f = factorial_series(6, 12)
        report = monomial_gevrey_check(f, (1, 1), 1, 1)
        assert abs(report.c_min - 1.0) < 1e-9
        assert not report.growing

    def test_polynomial_any_order(self):
        f = s("1 + 3 x1 + x2^2", 2, 6)
        report = monomial_gevrey_check(f, (1, 0), 0, 4)
        assert math.isfinite(report.c_min)

    def test_mismatch_grows(self):
        terms = {(n, 0): F(math.factorial(n)) for n in range(13)}
        f = TruncatedSeries(2, 12, terms)
        report = monomial_gevrey_check(f, (0, 1), 1, 1)
        assert report.growing
        degs = sorted(report.ratio_by_degree)
        assert report.ratio_by_degree[degs[-1]] > report.ratio_by_degree[degs[0]]


class TestPropertyInstances:
    def test_divisor_power_rescales_order(self):
        # decompositions wrt P and P^2 of sum n!(x1x2)^n: s ratio ~ 2.
        # Depths stay one below the data edge: the very last level of a
        # truncated input lacks part of its residue pattern and would skew
        # a short fit.
        f = factorial_series(14, 28)
        P = s("x1 x2", 2, 28)
        P2 = s("x1^2 x2^2", 2, 28)
        dec1 = p_adic_decompose(f, P, ELL2, 13)
        dec2 = p_adic_decompose(f, P2, ELL2, 6)
        s1 = estimate_order(norm_sequence(dec1)).s_hat
        s2 = estimate_order(norm_sequence(dec2)).s_hat
        assert abs(s2 / s1 - 2.0) <= 0.2

    def test_isotropic_bound_for_order_two_divisor(self):
        # P = x1^2 + x2^2 with the radial operator: solution is P-1-Gevrey,
        # so the plain coefficients obey a (1/2,1/2) bound for some C, A
        T = 16
        prob = build_problem(2, T, "x1^2 + x2^2", ["1/2 x1", "1/2 x2"],
                             ["-x1^2"], [[F(1)]])
        rep = solve_padic(prob)
        plain = rep.plain[0]
        flattening = False
        for a in (1.0, 2.0, 4.0, 8.0):
            report = isotropic_gevrey_check(plain, 0.5, a)
            degs = sorted(report.ratio_by_degree)
            tail = [report.ratio_by_degree[m] for m in degs[len(degs) // 2 :]]
            if all(b <= a_ * (1 + 1e-9) for a_, b in zip(tail, tail[1:])):
                flattening = True
                break
        assert flattening

    def test_blowup_gevrey_transfer(self):
        # multidimensional Euler after blow-up: z1-levels grow factorially
        prob = build_problem(2, 16, "x1", ["x1", "(x2 - 1) x2"],
                             ["x1^2 x2"], [[F(-1)]])
        rep = solve_padic(prob)
        est = estimate_order(norm_sequence(rep.decompositions[0]))
        assert 0.8 <= est.s_hat <= 1.2
