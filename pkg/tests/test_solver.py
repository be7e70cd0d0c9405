"""Solver branches, hypothesis checks, the direct oracle, companion systems."""

import math
import random
from fractions import Fraction as F

import pytest

from gevreylab import (
    LinearForm,
    SeriesVector,
    TruncatedSeries,
    p_adic_decompose,
    parse_series,
    residue,
)
from gevreylab.division import DivisionError, dominates, min_exponent
from gevreylab.linalg import poly_eval
from gevreylab.solver import (
    DegreeSystemSingular,
    DivisibilityRefusal,
    HypothesisRefusal,
    PDEProblem,
    ResonanceError,
    RightHandSide,
    apply_L,
    check_divides,
    companion_augment,
    implicit_root,
    pde_residual,
    solve,
    solve_convergent,
    solve_direct,
    solve_padic,
    solve_y0,
)
from helpers import build_problem, euler_problem, random_series, s

ELL2 = LinearForm([1, 1])


class TestApplyL:
    def test_single_coefficient(self):
        a = [s("x1", 2, 6), s("0", 2, 6)]
        assert apply_L(a, s("x1 x2", 2, 6)) == s("x1 x2", 2, 5)

    def test_quasi_homogeneous_eigenvalue(self):
        lam = (F(2), F(3))
        a = [s("2 x1", 2, 8), s("3 x2", 2, 8)]
        for beta in ((1, 0), (2, 1), (0, 3)):
            mono = TruncatedSeries.monomial(2, 8, beta)
            eig = lam[0] * beta[0] + lam[1] * beta[1]
            assert apply_L(a, mono) == mono.truncate(7) * eig

    def test_hamiltonian_annihilates(self):
        P = s("x1^2 + x1 x2^3", 2, 9)
        a = [P.partial(1), -P.partial(0)]
        assert apply_L(a, P.truncate(8)).is_zero


class TestCheckDivides:
    def test_power_times_unit(self):
        # P = x^k Q(eps) with L = x d/dx gives h = k
        k = 3
        prob = build_problem(
            2, 10, f"x1^{k} (1 + x2)", ["x1", "0"], ["x1"], [[F(-1)]]
        )
        h = check_divides(prob)
        assert h.agrees_up_to(s("3", 2, h.trunc), h.trunc)

    def test_monomial_with_radial_operator(self):
        # P = x^alpha, L = sum b_j x_j d_j gives h = sum alpha_j b_j
        prob = build_problem(
            2, 10, "x1^2 x2", ["(1 + x2) x1", "2 x2"], ["x1"], [[F(-1)]]
        )
        h = check_divides(prob)
        expect = s("2 (1 + x2) + 2", 2, h.trunc)
        assert h.agrees_up_to(expect, h.trunc)

    def test_zero_is_divisible_swapped_is_not(self):
        ok = build_problem(2, 8, "x2", ["0", "x2"], ["x1"], [[F(2)]])
        assert check_divides(ok).is_zero is False  # L(P) = x2 = P * 1
        annihilated = build_problem(2, 8, "x2", ["x2", "0"], ["x1"], [[F(2)]])
        assert check_divides(annihilated).is_zero  # L = x2 d1 kills x2
        bad = build_problem(2, 8, "x1", ["x2", "0"], ["x1"], [[F(2)]])
        with pytest.raises(DivisibilityRefusal) as err:
            check_divides(bad)
        assert not err.value.residue_series.is_zero


class TestY0:
    def test_euler_root_and_residue(self):
        prob = euler_problem(12)
        root = implicit_root(prob.rhs)
        assert root[0] == s("x1", 1, 12)
        assert solve_y0(prob)[0].is_zero

    def test_ode_example(self):
        prob = build_problem(2, 10, "x2", ["x1", "0"], ["-x1/(1-x1)"], [[F(2)]])
        y0 = solve_y0(prob)
        expect = parse_series("1/2 x1/(1-x1)", 2, 10)
        assert y0[0].agrees_up_to(expect, y0[0].trunc)

    def test_zero_forcing(self):
        prob = build_problem(1, 8, "x1", ["x1"], ["0"], [[F(-1)]])
        assert solve_y0(prob)[0].is_zero

    def test_nonzero_constant_rejected(self):
        prob = build_problem(1, 8, "x1", ["x1"], ["1 + x1"], [[F(-1)]])
        with pytest.raises(HypothesisRefusal):
            implicit_root(prob.rhs)

    def test_newton_initial_guess_irrelevant(self):
        prob = build_problem(
            1, 10, "x1", ["x1"], ["x1 + x1^2"], [[F(-1)]],
            nonlinear=[((2,), ["1"])],
        )
        base = implicit_root(prob.rhs)
        for seed in (1, 2, 3):
            rng = random.Random(seed)
            guess = SeriesVector([random_series(rng, 1, 10, zero_constant=True)])
            again = implicit_root(prob.rhs, guess)
            assert again == base


class TestDivergentBranch:
    def test_euler_decomposition_and_plain(self):
        rep = solve_padic(euler_problem(15))
        assert rep.branch == "divergent"
        assert rep.h.agrees_up_to(s("1", 1, rep.h.trunc), rep.h.trunc)
        for n in range(14):
            assert rep.plain[0].coeff((n + 1,)) == F((-1) ** n * math.factorial(n))
        for n in range(1, 10):
            level = rep.decompositions[0].coefficient(n)
            want = F((-1) ** (n - 1) * math.factorial(n - 1))
            assert level.constant_term() == want
        assert rep.residual_vanishes

    def test_ode_example_closed_form(self):
        rep = solve_padic(build_problem(2, 12, "x2", ["x1", "0"],
                                        ["-x1/(1-x1)"], [[F(2)]]))
        plain = rep.plain[0]
        for n in range(plain.trunc + 1):
            for m in range(plain.trunc + 1 - n):
                want = F(n ** m, 2 ** (m + 1)) if n >= 1 else F(0)
                assert plain.coeff((n, m)) == want

    def test_f_of_p_family(self):
        # L(P) = 0 makes the solution exactly f(P)
        T = 12
        P = s("x1^2 + x2", 2, T)
        a = [s("1", 2, T), s("-2 x1", 2, T)]
        f_of_p = parse_series("x1/(1-x1)", 1, T).substitute([P])
        rhs = RightHandSide(SeriesVector([-f_of_p]), [[F(1)]])
        prob = PDEProblem(P, a, rhs, LinearForm([1, 2]), T)
        rep = solve_padic(prob)
        assert rep.h.is_zero
        assert rep.plain[0].agrees_up_to(f_of_p, rep.plain[0].trunc)
        assert rep.residual_vanishes

    def test_monomial_family_golden(self):
        # x1 x2 (x1 d1 + x2 d2) y = y - x1^2 x2: lambda=(1,1), mu=1
        rep = solve_padic(build_problem(2, 20, "x1 x2", ["x1", "x2"],
                                        ["-x1^2 x2"], [[F(1)]]))
        plain = rep.plain[0]
        for n in range(6):
            exps = (n + 2, n + 1)
            if sum(exps) > plain.trunc:
                break
            binom = F(1)
            for j in range(n):
                binom *= F(-3, 2) - j
            binom /= math.factorial(n)
            want = binom * F(-1) ** n * math.factorial(n) * F(2) ** n
            assert plain.coeff(exps) == want
            # same thing, resolved: the odd double factorial
            assert want == math.prod(range(3, 2 * n + 2, 2)) if n else want == 1
        assert all(e[0] - 2 == e[1] - 1 for e in plain.terms)

    def test_c_identically_zero(self):
        rep = solve(build_problem(1, 8, "x1", ["x1"], ["0"], [[F(-1)]]))
        assert rep.plain[0].is_zero and rep.residual_vanishes

    def test_residue_constraint_on_levels(self):
        rep = solve_padic(build_problem(2, 12, "x2", ["x1", "0"],
                                        ["-x1/(1-x1)"], [[F(2)]]))
        alpha = min_exponent(rep.decompositions[0].P, ELL2)
        for n in range(len(rep.decompositions[0])):
            level = rep.decompositions[0].coefficient(n)
            assert not any(dominates(alpha, e) for e in level.terms)

    def test_exhaustion_error(self):
        with pytest.raises(DivisionError):
            solve_padic(euler_problem(6), terms=40)


class TestConvergentBranch:
    def test_single_linear_equation(self):
        rep = solve_convergent(build_problem(1, 10, "x1", ["1"], ["-x1"],
                                             [[F(1, 2)]]))
        assert rep.branch == "convergent"
        assert rep.plain[0] == s("-2 x1", 1, rep.plain[0].trunc)
        assert rep.residual_vanishes

    def test_resonance_detected(self):
        with pytest.raises(ResonanceError) as err:
            solve_convergent(build_problem(1, 10, "x1", ["1"], ["-x1"], [[F(3)]]))
        assert err.value.level == 3

    def test_richer_convergent_solution(self):
        rep = solve_convergent(build_problem(1, 14, "x1", ["1"],
                                             ["-x1/(1-x1)"], [[F(1, 2)]]))
        assert rep.residual_vanishes
        direct = solve_direct(build_problem(1, 14, "x1", ["1"],
                                            ["-x1/(1-x1)"], [[F(1, 2)]]))
        upto = min(rep.plain[0].trunc, direct[0].trunc)
        assert rep.plain[0].agrees_up_to(direct[0], upto)

    def test_growth_is_at_most_geometric(self):
        rep = solve_convergent(build_problem(1, 20, "x1", ["1"],
                                             ["-x1/(1-x1)"], [[F(1, 2)]]))
        values = []
        for n in range(1, rep.plain[0].trunc + 1):
            c = rep.plain[0].coeff((n,))
            if c:
                values.append(math.log(abs(F(c))) / n)
        half = values[: max(2, len(values) // 2)]
        bound = max(half) + 1.0
        assert all(v <= bound for v in values)

    def test_zero_of_lp_rejected(self):
        prob = build_problem(2, 8, "x1", ["x2", "0"], ["x1"], [[F(2)]])
        with pytest.raises(HypothesisRefusal, match="L\\(P\\)\\(0\\)"):
            solve_convergent(prob)

    def test_lambda_alpha_zero_family(self):
        # <lambda, alpha> = 0: L = x1 d1 - x2 d2 kills P = x1 x2; Thm 1 gives
        # the convergent series sum <l,b>^n mu^-(n+1) x^{n a + b}
        mu = F(2)
        prob = build_problem(2, 16, "x1 x2", ["x1", "-x2"], ["-x1^2"], [[mu]])
        rep = solve(prob)
        assert rep.branch == "divergent" and rep.h.is_zero
        lam_beta = F(2)  # <lambda, beta> with beta = (2, 0)
        plain = rep.plain[0]
        for n in range(7):
            exps = (n + 2, n)
            if sum(exps) > plain.trunc:
                break
            assert plain.coeff(exps) == lam_beta ** n / mu ** (n + 1)
        direct = solve_direct(prob)
        assert direct[0].agrees_up_to(plain, min(direct[0].trunc, plain.trunc))


class TestDirectOracle:
    def test_euler(self):
        out = solve_direct(euler_problem(12))
        for n in range(12):
            assert out[0].coeff((n + 1,)) == F((-1) ** n * math.factorial(n))

    def test_exact_polynomial_solution(self):
        out = solve_direct(build_problem(1, 12, "x1", ["x1"],
                                         ["x1 + x1^2"], [[F(-1)]]))
        assert out[0] == s("x1", 1, 12)

    def test_singular_degree_reported(self):
        # resonance mu = 2 hits degree 2 for x y' = mu y - c
        with pytest.raises(DegreeSystemSingular) as err:
            solve_direct(build_problem(1, 8, "x1", ["1"],
                                       ["-x1 - x1^2"], [[F(2)]]))
        assert err.value.degree == 2

    def test_nonlinear_system(self):
        prob = build_problem(
            1, 10, "x1", ["x1"], ["x1"], [[F(-1)]],
            nonlinear=[((2,), ["1"])],
        )
        rep = solve_padic(prob)
        direct = solve_direct(prob)
        upto = min(rep.plain[0].trunc, direct[0].trunc)
        assert rep.plain[0].agrees_up_to(direct[0], upto)
        assert rep.residual_vanishes


class TestStarSumEnumeration:
    def test_matches_tuple_enumeration_through_level_three(self):
        """Direct multi-index tuple enumeration of the nonlinear sum.

        Rebuilds y_1..y_3 via the textbook recursion, enumerating the tuples
        (I, m, n_{l,j}) explicitly, and compares with the solver's
        compositional program.
        """
        T = 12
        prob = build_problem(
            1, T, "x1", ["x1"], ["x1"], [[F(-1)]],
            nonlinear=[((2,), ["1 + x1"]), ((3,), ["2"])],
        )
        rep = solve_padic(prob, terms=3)
        P, ell = prob.P, prob.ell

        y0 = solve_y0(prob)
        assert y0[0].is_zero  # shift is a no-op here, tuples use raw data
        levels = {0: TruncatedSeries.zero(1, T)}

        dec_c = p_adic_decompose(prob.rhs.c[0], P, ell, 3)
        dec_ai = {
            index: p_adic_decompose(vec[0], P, ell, 3)
            for index, vec in prob.rhs.nonlinear
        }
        h = check_divides(prob)

        def rq(series, power):
            cur = series
            dec = p_adic_decompose(cur, P, ell, power)
            return dec.coefficient(power)

        mu = F(-1)
        for n in range(1, 4):
            b = -dec_c.coefficient(n)
            for k in range(2, n + 1):
                u = apply_L(prob.a, SeriesVector([levels[k - 1]]))[0]
                u = u + levels[k - 1] * h * (k - 1)
                b = b + rq(u, n - k)
            # nonlinear star sum by explicit tuples
            star = TruncatedSeries.zero(1, b.trunc)
            for k in range(2, n + 1):
                for (index, _vec) in prob.rhs.nonlinear:
                    j = index[0]
                    if j > k:
                        continue
                    for m in range(0, k - j + 1):
                        rest = k - m
                        for combo in _compositions(rest, j):
                            prod = dec_ai[index].coefficient(m)
                            for piece in combo:
                                prod = prod * levels[piece]
                            star = star + rq(prod, n - k)
            b = b - star
            levels[n] = residue(b * (1 / mu), P, ell)
            got = rep.decompositions[0].coefficient(n)
            upto = min(levels[n].trunc, got.trunc)
            assert got.agrees_up_to(levels[n], upto)


def _compositions(total, parts):
    """Ordered tuples of `parts` positive integers summing to `total`."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


class TestCompanion:
    def test_two_by_two_block_structure(self):
        prob = euler_problem(10)
        augmented, poly = companion_augment(prob, [TruncatedSeries.zero(1, 10)], 2)
        assert augmented.size == 2
        assert augmented.rhs.mu == ((F(0), F(1)), (F(-1), F(0)))
        # characteristic polynomial sigma^2 + 1: roots +-i
        assert poly == [F(1), F(0), F(1)]
        assert poly_eval(poly, F(0)) == 1

    def test_companion_of_symmetric_weights(self):
        # (PL)^2 y = y: mu = 1 block gives [[0,1],[1,0]]
        prob = build_problem(1, 8, "x1", ["x1"], ["x1"], [[F(1)]])
        augmented, poly = companion_augment(prob, [TruncatedSeries.zero(1, 8)], 2)
        assert augmented.rhs.mu == ((F(0), F(1)), (F(1), F(0)))
        assert poly == [F(-1), F(0), F(1)]  # sigma^2 - 1

    def test_higher_order_residual(self):
        T = 14
        prob = euler_problem(T)
        u1 = s("1/2", 1, T)
        augmented, _ = companion_augment(prob, [u1], 2)
        rep = solve_padic(augmented)
        y = rep.plain[0]
        # apply (PL) twice plus u1 (PL) once directly on the first component
        def pl(f):
            from gevreylab.solver import mul_order_gap
            return mul_order_gap(prob.P, apply_L(prob.a, f), f.trunc)
        lhs = pl(pl(y)) + u1 * pl(y)
        rhs = prob.rhs.c[0] + y * F(-1)
        diff = lhs - rhs
        assert diff.is_zero
        # second block really is PL of the first
        assert rep.plain[1].agrees_up_to(pl(y), min(rep.plain[1].trunc, pl(y).trunc))

    def test_k_validation(self):
        prob = euler_problem(8)
        with pytest.raises(ValueError):
            companion_augment(prob, [], 1)
        with pytest.raises(ValueError):
            companion_augment(prob, [], 2)


class TestAutoSelect:
    def test_prefers_divisibility(self):
        rep = solve(euler_problem(10))
        assert rep.branch == "divergent"

    def test_falls_back_to_convergent(self):
        rep = solve(build_problem(1, 10, "x1", ["1"], ["-x1"], [[F(1, 2)]]))
        assert rep.branch == "convergent"

    def test_total_refusal(self):
        prob = build_problem(2, 8, "x1", ["x2", "0"], ["-x1/(1-x1)"], [[F(2)]])
        with pytest.raises(HypothesisRefusal, match="neither branch"):
            solve(prob)


class TestReportShape:
    def test_json_dict(self):
        rep = solve(euler_problem(10))
        doc = rep.to_json_dict()
        assert doc["branch"] == "divergent"
        assert doc["h"] == "1"
        assert isinstance(doc["plain"], list)
        assert doc["decomposition"][0]["terms"][1]["series"] == "1"
        assert doc["residual_vanishes"] is True

    def test_residual_diagnostics(self):
        rep = solve(euler_problem(10))
        res = pde_residual(
            euler_problem(10), rep.plain
        )
        assert res.is_zero and res.trunc == rep.residual_order


class TestWiderCoverage:
    def test_convergent_with_mixing_operator(self):
        # x1 (d1 + d2): the degree-preserving part is genuinely non-diagonal
        prob = build_problem(2, 10, "x1", ["1", "1"], ["-x1 - x2"], [[F(1, 2)]])
        rep = solve_convergent(prob)
        direct = solve_direct(prob)
        upto = min(rep.plain[0].trunc, direct[0].trunc)
        assert rep.plain[0].agrees_up_to(direct[0], upto)
        assert rep.residual_vanishes

    def test_coupled_system_with_varying_linear_part(self):
        prob = build_problem(
            2, 9, "x1 x2", ["x1", "x2"],
            ["x1 + x2^2", "-x2"],
            [[F(1), F(1)], [F(0), F(-2)]],
            A_texts=[["x1", "0"], ["x2", "x1 x2"]],
        )
        rep = solve_padic(prob)
        direct = solve_direct(prob)
        for comp in range(2):
            upto = min(rep.plain[comp].trunc, direct[comp].trunc)
            assert rep.plain[comp].agrees_up_to(direct[comp], upto)
        assert rep.residual_vanishes
