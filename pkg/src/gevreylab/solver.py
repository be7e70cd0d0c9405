"""Series solver for P(x) * L(y) = F(x, y) at a singular locus.

``solve`` validates the structural hypotheses, picks a branch, and returns
the unique formal solution both as a P-adic decomposition and as a plain
truncated series:

  * divergent branch: P divides L(P); the coefficient recursion runs over
    residues with the level-n feedback term (n-1) h y_{n-1};
  * convergent branch: L(P)(0) != 0; the recursion solves with the matrix
    mu - n L(P) I + A0 after an exact per-level resonance check.

``solve_direct`` is an independent brute-force oracle: it assembles and
solves the exact linear system for each homogeneous component in the total
degree grading, touching none of the division machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .division import (
    LinearForm,
    PAdicDecomposition,
    ResidueClass,
    min_exponent,
    p_adic_decompose,
    p_adic_multiply,
    residue,
    weierstrass_divide,
)
from .linalg import (
    charpoly,
    mat_det,
    mat_solve,
    neumann_inverse,
    poly_compose,
    scalar_diagonal,
)
from .series import (
    SeriesMatrix,
    SeriesVector,
    TruncatedSeries,
    _mul_terms,
    _raw,
    iter_exponents,
)


class HypothesisRefusal(Exception):
    """A theorem hypothesis fails; carries a machine-readable diagnostic."""

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details


class DivisibilityRefusal(HypothesisRefusal):
    """P does not divide L(P); carries the nonzero division residue."""

    def __init__(self, residue_series: TruncatedSeries):
        from .textform import series_to_text

        super().__init__(
            "P does not divide L(P); the division residue "
            f"{series_to_text(residue_series)} is nonzero",
            residue=series_to_text(residue_series),
        )
        self.residue_series = residue_series


class ResonanceError(HypothesisRefusal):
    """det(mu - n L(P)(0) I) = 0 at some level n."""

    def __init__(self, n: int):
        super().__init__(
            f"resonance: mu - n*L(P)(0)*I is singular at n = {n}", level=n
        )
        self.level = n


class DegreeSystemSingular(HypothesisRefusal):
    """The direct degree-by-degree solve hit a singular linear system."""

    def __init__(self, degree: int):
        super().__init__(
            f"singular linear system for the degree-{degree} homogeneous "
            "component; the problem violates the theorem hypotheses",
            degree=degree,
        )
        self.degree = degree


class RightHandSide:
    """F(x, y) = c(x) + (mu + A(x)) y + sum_{|I|>=2} A_I(x) y^I.

    mu must be exactly invertible and A must vanish at the origin; the
    nonlinear list is finite, so F is a polynomial in y and every evaluation
    below is exact.
    """

    __slots__ = ("c", "mu", "A", "nonlinear")

    def __init__(self, c: SeriesVector, mu, A: Optional[SeriesMatrix] = None,
                 nonlinear: Sequence = ()):
        n = c.size
        mu = tuple(tuple(row) for row in mu)
        if len(mu) != n or any(len(row) != n for row in mu):
            raise ValueError("mu must be square of the system size")
        if A is None:
            A = SeriesMatrix.zero(n, c.dim, c.trunc)
        if A.size != n or A.dim != c.dim:
            raise ValueError("A must match the system size and dimension")
        if any(s.constant_term() for row in A.rows for s in row):
            raise ValueError("A must vanish at the origin")
        clean = []
        for index, coeff in nonlinear:
            index = tuple(index)
            if len(index) != n:
                raise ValueError("nonlinear index length must equal the size")
            if sum(index) < 2:
                raise ValueError("nonlinear indices need total degree >= 2")
            if coeff.size != n or coeff.dim != c.dim:
                raise ValueError("nonlinear coefficient shape mismatch")
            clean.append((index, coeff))
        if mat_det(mu) == 0:
            raise ValueError("mu must be invertible")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "nonlinear", tuple(clean))

    def __setattr__(self, name, value):
        raise AttributeError("RightHandSide is immutable")

    @property
    def size(self) -> int:
        return self.c.size

    @property
    def dim(self) -> int:
        return self.c.dim

    @property
    def trunc(self) -> int:
        return self.c.trunc

    def mu_series(self, trunc: int) -> SeriesMatrix:
        return SeriesMatrix.from_constant(self.mu, self.dim, trunc)

    def evaluate(self, y: SeriesVector) -> SeriesVector:
        """F(x, y(x)) for a series vector y."""
        out = self.c + self.mu_series(y.trunc).mul_vector(y) + self.A.mul_vector(y)
        for index, coeff in self.nonlinear:
            out = out + coeff.mul_series(y.monomial_power(index))
        return out

    def jacobian(self, y: SeriesVector) -> SeriesMatrix:
        """dF/dy at (x, y(x)) as a series matrix."""
        jac = self.mu_series(y.trunc) + self.A
        for index, coeff in self.nonlinear:
            for axis, e in enumerate(index):
                if e == 0:
                    continue
                lowered = list(index)
                lowered[axis] -= 1
                factor = y.monomial_power(tuple(lowered)) * e
                col = coeff.mul_series(factor)
                jac = SeriesMatrix(
                    [
                        [
                            jac[i, j] + (col[i] if j == axis else 0)
                            for j in range(self.size)
                        ]
                        for i in range(self.size)
                    ]
                )
        return jac

    def shifted(self, y0: SeriesVector) -> "RightHandSide":
        """Re-center: the data of w -> F(x, w + y0), exact Taylor shift."""
        if any(s.constant_term() for s in y0):
            raise ValueError("the shift must vanish at the origin")
        new_c = self.evaluate(y0)
        jac = self.jacobian(y0)
        new_a = jac - self.mu_series(jac.trunc)
        buckets = {}
        for index, coeff in self.nonlinear:
            for sub in _sub_indices(index):
                if sum(sub) < 2:
                    continue  # the 0th and 1st order parts are c and A
                binom = 1
                for i_full, i_sub in zip(index, sub):
                    binom *= math.comb(i_full, i_sub)
                rest = tuple(a - b for a, b in zip(index, sub))
                contrib = coeff.mul_series(y0.monomial_power(rest)).scale(binom)
                if sub in buckets:
                    buckets[sub] = buckets[sub] + contrib
                else:
                    buckets[sub] = contrib
        nonlinear = [
            (idx, vec) for idx, vec in sorted(buckets.items()) if not vec.is_zero
        ]
        return RightHandSide(new_c, self.mu, new_a, nonlinear)


def _sub_indices(index):
    """All componentwise sub-indices of a multi-index."""
    if not index:
        yield ()
        return
    for head in range(index[0] + 1):
        for tail in _sub_indices(index[1:]):
            yield (head,) + tail


class PDEProblem:
    """The triple (P, L, F) plus the monomial order and working precision."""

    __slots__ = ("P", "a", "rhs", "ell", "trunc")

    def __init__(self, P: TruncatedSeries, a: Sequence[TruncatedSeries],
                 rhs: RightHandSide, ell: Optional[LinearForm] = None,
                 trunc: Optional[int] = None):
        dim = P.dim
        a = tuple(a)
        if len(a) != dim:
            raise ValueError("need one operator coefficient per variable")
        if ell is None:
            ell = LinearForm.standard(dim)
        if ell.dim != dim:
            raise ValueError("linear form dimension mismatch")
        if P.is_zero:
            raise ValueError("P must be nonzero")
        if P.constant_term():
            raise ValueError("P must vanish at the origin")
        if all(s.is_zero for s in a):
            raise ValueError("the operator coefficients must not all vanish")
        if rhs.dim != dim:
            raise ValueError("right-hand side dimension mismatch")
        if trunc is None:
            trunc = min([P.trunc, rhs.trunc] + [s.trunc for s in a])
        for s in (P, rhs.c[0], *a):
            if s.trunc < trunc:
                raise ValueError(
                    f"an input is certified only to {s.trunc} < trunc {trunc}"
                )
        object.__setattr__(self, "P", P.truncate(trunc))
        object.__setattr__(self, "a", tuple(s.truncate(trunc) for s in a))
        object.__setattr__(self, "rhs", _truncate_rhs(rhs, trunc))
        object.__setattr__(self, "ell", ell)
        object.__setattr__(self, "trunc", trunc)

    def __setattr__(self, name, value):
        raise AttributeError("PDEProblem is immutable")

    @property
    def dim(self) -> int:
        return self.P.dim

    @property
    def size(self) -> int:
        return self.rhs.size


def _truncate_rhs(rhs: RightHandSide, trunc: int) -> RightHandSide:
    if rhs.trunc == trunc and rhs.A.trunc == trunc:
        return rhs
    return RightHandSide(
        rhs.c.truncate(trunc),
        rhs.mu,
        rhs.A.truncate(trunc),
        [(i, v.truncate(trunc)) for i, v in rhs.nonlinear],
    )


@dataclass(frozen=True)
class SolverReport:
    branch: str
    h: Optional[TruncatedSeries]
    y0: SeriesVector
    decompositions: tuple
    plain: SeriesVector
    residual_order: int
    residual_vanishes: bool

    def to_json_dict(self):
        from .textform import series_to_text

        return {
            "branch": self.branch,
            "h": series_to_text(self.h) if self.h is not None else None,
            "y0": [series_to_text(s) for s in self.y0],
            "plain": [series_to_text(s) for s in self.plain],
            "decomposition": [d.to_json_dict() for d in self.decompositions],
            "residual_order": self.residual_order,
            "residual_vanishes": self.residual_vanishes,
        }


# -- the differential operator ------------------------------------------------


def apply_L(a: Sequence[TruncatedSeries], f):
    """L(f) = sum_j a_j * df/dx_j for a scalar series or a series vector."""
    if isinstance(f, SeriesVector):
        return SeriesVector([apply_L(a, s) for s in f])
    acc = None
    for axis, coeff in enumerate(a):
        term = coeff * f.partial(axis)
        acc = term if acc is None else acc + term
    return acc


def mul_order_gap(P: TruncatedSeries, g: TruncatedSeries, target: int) -> TruncatedSeries:
    """P*g certified through ``target`` using the positive order of P.

    With o(P) >= 1 a degree-m product coefficient needs g only through
    degree m-1, so P * L(y) stays certified at the trunc of y itself.
    """
    oP = P.order()
    if oP is None:
        return TruncatedSeries.zero(P.dim, target)
    window = min(target, g.trunc + oP, P.trunc)
    return _raw(P.dim, window, _mul_terms(P.terms, g.terms, window))


def pde_residual(problem: PDEProblem, y: SeriesVector) -> SeriesVector:
    """P*L(y) - F(x, y), certified through y.trunc."""
    fy = problem.rhs.evaluate(y)
    out = []
    for i in range(problem.size):
        ly = apply_L(problem.a, y[i])
        pl = mul_order_gap(problem.P, ly, y.trunc)
        out.append(pl - fy[i])
    return SeriesVector(out)


# -- hypothesis checks ---------------------------------------------------------


def check_divides(problem: PDEProblem) -> TruncatedSeries:
    """h with L(P) = P*h, or a DivisibilityRefusal carrying the residue."""
    lp = apply_L(problem.a, problem.P)
    q, r = weierstrass_divide(lp, problem.P, problem.ell)
    if r.series.is_zero:
        return q
    raise DivisibilityRefusal(r.series)


def _lp_constant(problem: PDEProblem):
    return apply_L(problem.a, problem.P).constant_term()


# -- step 1: the implicit root and y0 ------------------------------------------


def implicit_root(rhs: RightHandSide, initial: Optional[SeriesVector] = None) -> SeriesVector:
    """Newton solve of F(x, Y(x)) = 0 with Y(0) = 0, exact on the window.

    Each step doubles the valuation of the error, so convergence takes at
    most log2(trunc)+2 steps from any initial guess vanishing at the origin.
    """
    if rhs.c[0].constant_term() or any(s.constant_term() for s in rhs.c):
        raise HypothesisRefusal("F(0, 0) must vanish for a formal solution")
    y = initial if initial is not None else SeriesVector.zero(
        rhs.size, rhs.dim, rhs.trunc
    )
    if any(s.constant_term() for s in y):
        raise ValueError("the initial guess must vanish at the origin")
    budget = max(3, math.ceil(math.log2(rhs.trunc + 1)) + 2)
    for _ in range(budget):
        fy = rhs.evaluate(y)
        if fy.is_zero:
            return y
        step = neumann_inverse(rhs.jacobian(y)).mul_vector(fy)
        y = y - step
    fy = rhs.evaluate(y)
    if fy.is_zero:
        return y
    raise RuntimeError(
        "Newton iteration failed to converge; impossible with invertible mu"
    )


def solve_y0(problem: PDEProblem, initial: Optional[SeriesVector] = None) -> SeriesVector:
    """The unique residue-space solution of the level-zero equation."""
    root = implicit_root(problem.rhs, initial)
    return _vec_residue(root, problem.P, problem.ell)


def shift_problem(problem: PDEProblem, y0: SeriesVector) -> PDEProblem:
    """Change variables y -> y + y0; afterwards P divides the constant part."""
    rhs = problem.rhs.shifted(y0)
    adjusted = []
    for i in range(problem.size):
        ly = apply_L(problem.a, y0[i])
        pl = mul_order_gap(problem.P, ly, y0.trunc)
        adjusted.append(rhs.c[i] - pl)
    new_rhs = RightHandSide(SeriesVector(adjusted), rhs.mu, rhs.A, rhs.nonlinear)
    return PDEProblem(problem.P, problem.a, new_rhs, problem.ell,
                      min(problem.trunc, new_rhs.trunc))


# -- decomposition helpers ------------------------------------------------------


def _vec_residue(v: SeriesVector, P, ell) -> SeriesVector:
    return SeriesVector([residue(s, P, ell) for s in v])


def _dec_vec(v: SeriesVector, P, ell, depth: int):
    return [p_adic_decompose(s, P, ell, depth) for s in v]


def _vec_level(decs, n: int) -> SeriesVector:
    return SeriesVector([d.coefficient(n) for d in decs])


def _dec_mat(m: SeriesMatrix, P, ell, depth: int):
    return [[p_adic_decompose(m[i, j], P, ell, depth) for j in range(m.size)]
            for i in range(m.size)]


def _mat_level(decs, n: int, dim: int) -> SeriesMatrix:
    size = len(decs)
    return SeriesMatrix(
        [[decs[i][j].coefficient(n) for j in range(size)] for i in range(size)]
    )


def _solution_decomposition(P, ell, levels, valid):
    alpha = min_exponent(P, ell)
    coeffs = tuple(ResidueClass(alpha, s) for s in levels)
    return PAdicDecomposition(P, ell, coeffs, tuple(valid))


class _StarAccumulator:
    """Level-n coefficients of sum_I A_I y^I from decompositions.

    Products of decompositions follow the exact double-sum rule, so every
    level keeps its honest certified window; composing with the partial sum
    y_1 P + ... + y_{n-1} P^{n-1} is algebraically the same thing.
    """

    def __init__(self, P, ell, nonlinear, depth):
        self.P = P
        self.ell = ell
        self.depth = depth
        self.nonlinear = nonlinear
        self.dec_ai = [
            [p_adic_decompose(vec[i], P, ell, depth) for i in range(vec.size)]
            for _, vec in nonlinear
        ]

    def level(self, ys, n: int) -> Optional[SeriesVector]:
        """Level-n coefficient using solution levels ys[1..n-1].

        The partial sum is exactly its own decomposition with zero levels at
        0 and at n (the shift removed y_0, the tail cannot reach level n in
        any product with |I| >= 2), so the levels are padded accordingly.
        """
        if not self.nonlinear or n < 2:
            return None
        comp_decs = []
        size = ys[0].size
        top = ys[0].trunc
        for comp in range(size):
            levels = [TruncatedSeries.zero(self.P.dim, top)]
            levels += [ys[k][comp] for k in range(1, n)]
            levels.append(TruncatedSeries.zero(self.P.dim, top))
            dec = _solution_decomposition(
                self.P, self.ell, levels, [s.trunc for s in levels]
            )
            comp_decs.append(dec)
        out = None
        for (index, _vec), dec_vecs in zip(self.nonlinear, self.dec_ai):
            power = None
            for comp, e in enumerate(index):
                for _ in range(e):
                    power = comp_decs[comp] if power is None else p_adic_multiply(
                        power, comp_decs[comp]
                    )
            entries = []
            for i in range(len(dec_vecs)):
                full = p_adic_multiply(power, dec_vecs[i])
                entries.append(
                    full.coefficient(n) if n <= full.max_index
                    else TruncatedSeries.zero(self.P.dim, 0)
                )
            term = SeriesVector(entries)
            out = term if out is None else out + term
        return out


# -- theorem branches -----------------------------------------------------------


def default_terms(problem: PDEProblem) -> int:
    oP = problem.P.order()
    return max(1, problem.trunc // oP)


def _zero_report(problem: PDEProblem, branch: str, h) -> SolverReport:
    zero_vec = SeriesVector.zero(problem.size, problem.dim, problem.trunc)
    alpha = min_exponent(problem.P, problem.ell)
    zero = TruncatedSeries.zero(problem.dim, problem.trunc)
    decs = tuple(
        PAdicDecomposition(
            problem.P, problem.ell,
            (ResidueClass(alpha, zero),), (problem.trunc,),
        )
        for _ in range(problem.size)
    )
    res = pde_residual(problem, zero_vec)
    return SolverReport(
        branch=branch, h=h, y0=zero_vec, decompositions=decs, plain=zero_vec,
        residual_order=res.trunc, residual_vanishes=res.is_zero,
    )


def solve_padic(problem: PDEProblem, terms: Optional[int] = None) -> SolverReport:
    """Divergent branch: P | L(P).  Runs the residue recursion level by level."""
    h = check_divides(problem)
    if terms is None:
        terms = default_terms(problem)
    if problem.rhs.c.is_zero:
        return _zero_report(problem, "divergent", h)
    P, ell = problem.P, problem.ell
    y0 = solve_y0(problem)
    shifted = shift_problem(problem, y0)
    size = problem.size

    dec_c = _dec_vec(shifted.rhs.c, P, ell, terms)
    if not _vec_level(dec_c, 0).is_zero:
        raise RuntimeError(
            "internal inconsistency: the re-centered constant part is not "
            "divisible by P"
        )
    have_a = not shifted.rhs.A.is_zero
    if have_a:
        dec_a = _dec_mat(shifted.rhs.A, P, ell, terms)
        a0 = _mat_level(dec_a, 0, problem.dim)
    else:
        dec_a = None
        a0 = SeriesMatrix.zero(size, problem.dim, shifted.trunc)
    inv0 = neumann_inverse(shifted.rhs.mu_series(shifted.trunc) + a0)
    star = _StarAccumulator(P, ell, shifted.rhs.nonlinear, terms)

    ys = [y0]
    dec_u1 = {}
    dec_u2 = {}
    for n in range(1, terms + 1):
        prev = ys[n - 1]
        u1 = apply_L(problem.a, prev)
        if not h.is_zero and n >= 2:
            u1 = u1 + prev.mul_series(h).scale(n - 1)
        dec_u1[n] = _dec_vec(u1, P, ell, max(terms - n, 0))

        b = -_vec_level(dec_c, n)
        for k in range(2, n + 1):
            b = b + _vec_level(dec_u1[k], n - k)
        if have_a:
            w_n = None
            for j in range(1, n):
                piece = _mat_level(dec_a, n - j, problem.dim).mul_vector(ys[j])
                w_n = piece if w_n is None else w_n + piece
            if w_n is not None:
                b = b - _vec_residue(w_n, P, ell)
            for k in range(1, n):
                b = b - _vec_level(dec_u2[k], n - k)
        s_n = star.level(ys, n)
        if s_n is not None:
            b = b - s_n

        yn = _vec_residue(inv0.mul_vector(b), P, ell)
        ys.append(yn)
        if have_a:
            u2 = None
            for j in range(1, n + 1):
                piece = _mat_level(dec_a, n - j, problem.dim).mul_vector(ys[j])
                u2 = piece if u2 is None else u2 + piece
            dec_u2[n] = _dec_vec(u2, P, ell, max(terms - n, 0))

    return _finish_report(problem, "divergent", h, y0, ys)


def solve_convergent(problem: PDEProblem, terms: Optional[int] = None) -> SolverReport:
    """Convergent branch: L(P)(0) != 0 with the exact resonance check."""
    lp = apply_L(problem.a, problem.P)
    lp0 = lp.constant_term()
    if not lp0:
        raise HypothesisRefusal(
            "L(P)(0) = 0: the convergent branch does not apply"
        )
    if terms is None:
        terms = default_terms(problem)
    size = problem.size
    for n in range(1, terms + 1):
        shifted_mu = [
            [problem.rhs.mu[i][j] - (n * lp0 if i == j else 0)
             for j in range(size)]
            for i in range(size)
        ]
        if mat_det(shifted_mu) == 0:
            raise ResonanceError(n)
    if problem.rhs.c.is_zero:
        return _zero_report(problem, "convergent", None)
    P, ell = problem.P, problem.ell
    y0 = solve_y0(problem)
    shifted = shift_problem(problem, y0)

    dec_c = _dec_vec(shifted.rhs.c, P, ell, terms)
    if not _vec_level(dec_c, 0).is_zero:
        raise RuntimeError(
            "internal inconsistency: the re-centered constant part is not "
            "divisible by P"
        )
    have_a = not shifted.rhs.A.is_zero
    if have_a:
        dec_a = _dec_mat(shifted.rhs.A, P, ell, terms)
        a0 = _mat_level(dec_a, 0, problem.dim)
    else:
        dec_a = None
        a0 = SeriesMatrix.zero(size, problem.dim, shifted.trunc)
    star = _StarAccumulator(P, ell, shifted.rhs.nonlinear, terms)

    ys = [y0]
    dec_u1 = {}
    dec_u2 = {}
    dec_u3 = {}
    for n in range(1, terms + 1):
        prev = ys[n - 1]
        dec_u1[n] = _dec_vec(apply_L(problem.a, prev), P, ell, max(terms - n, 0))

        d = -_vec_level(dec_c, n)
        for k in range(2, n + 1):
            d = d + _vec_level(dec_u1[k], n - k)
        for k in range(1, n):
            d = d + _vec_level(dec_u3[k], n - k)
        if have_a:
            w_n = None
            for j in range(1, n):
                piece = _mat_level(dec_a, n - j, problem.dim).mul_vector(ys[j])
                w_n = piece if w_n is None else w_n + piece
            if w_n is not None:
                d = d - _vec_residue(w_n, P, ell)
            for k in range(1, n):
                d = d - _vec_level(dec_u2[k], n - k)
        s_n = star.level(ys, n)
        if s_n is not None:
            d = d - s_n

        matrix = (
            shifted.rhs.mu_series(d.trunc)
            - scalar_diagonal(lp.truncate(min(lp.trunc, d.trunc)), size)
            .map(lambda s: s * n)
            + a0.truncate(min(a0.trunc, d.trunc))
        )
        yn = _vec_residue(neumann_inverse(matrix).mul_vector(d), P, ell)
        ys.append(yn)
        if have_a:
            u2 = None
            for j in range(1, n + 1):
                piece = _mat_level(dec_a, n - j, problem.dim).mul_vector(ys[j])
                u2 = piece if u2 is None else u2 + piece
            dec_u2[n] = _dec_vec(u2, P, ell, max(terms - n, 0))
        u3 = SeriesVector([lp * s for s in ys[n]]).scale(n)
        dec_u3[n] = _dec_vec(u3, P, ell, max(terms - n, 0))

    return _finish_report(problem, "convergent", None, y0, ys)


def _finish_report(problem, branch, h, y0, ys) -> SolverReport:
    size = problem.size
    decs = []
    for comp in range(size):
        levels = [y[comp] for y in ys]
        decs.append(
            _solution_decomposition(
                problem.P, problem.ell, levels, [s.trunc for s in levels]
            )
        )
    plain = SeriesVector([d.recompose() for d in decs])
    res = pde_residual(problem, plain)
    return SolverReport(
        branch=branch,
        h=h,
        y0=y0,
        decompositions=tuple(decs),
        plain=plain,
        residual_order=res.trunc,
        residual_vanishes=res.is_zero,
    )


def solve(problem: PDEProblem, terms: Optional[int] = None) -> SolverReport:
    """Auto-select the branch: divisibility first, then L(P)(0) != 0."""
    try:
        return solve_padic(problem, terms)
    except DivisibilityRefusal as refusal:
        if _lp_constant(problem):
            return solve_convergent(problem, terms)
        raise HypothesisRefusal(
            "neither branch applies: P does not divide L(P) and L(P)(0) = 0",
            residue=refusal.details.get("residue"),
        ) from refusal


# -- the independent degree-by-degree oracle ------------------------------------


def solve_direct(problem: PDEProblem) -> SeriesVector:
    """Brute-force solve in the total grading, independent of the division
    machinery.

    For every degree m the exact linear system for the homogeneous component
    y_m is assembled over the field and solved by Gauss elimination; the
    degree-preserving part of P*L (present when order(P) = 1 and some
    a_j(0) != 0) sits on the matrix side, everything already known on the
    right.
    """
    size, dim, T = problem.size, problem.dim, problem.trunc
    if any(s.constant_term() for s in problem.rhs.c):
        raise HypothesisRefusal("F(0, 0) must vanish for a formal solution")
    terms_acc = [dict() for _ in range(size)]

    for m in range(T + 1):
        current = SeriesVector(
            [TruncatedSeries(dim, T, terms_acc[i]) for i in range(size)]
        )
        residual = pde_residual(problem, current)
        rhs_coeffs = []
        basis = [(exps, comp) for exps in iter_exponents(dim, m)
                 for comp in range(size)]
        for exps, comp in basis:
            rhs_coeffs.append(-residual[comp].coeff(exps))
        matrix = [[Fraction(0)] * len(basis) for _ in basis]
        for col, (exps, comp) in enumerate(basis):
            image = _phi_m(problem, exps, comp, m, size, dim)
            for row, (r_exps, r_comp) in enumerate(basis):
                matrix[row][col] = image[r_comp].get(r_exps, Fraction(0))
        solution = mat_solve(matrix, rhs_coeffs)
        if solution is None:
            raise DegreeSystemSingular(m)
        for (exps, comp), value in zip(basis, solution):
            if value:
                terms_acc[comp][exps] = value
    return SeriesVector([TruncatedSeries(dim, T, terms_acc[i]) for i in range(size)])


def _phi_m(problem, exps, comp, m, size, dim):
    """Degree-m image of the basis monomial x^exps e_comp under the
    degree-preserving part of P*L - mu."""
    out = [dict() for _ in range(size)]
    if m >= 1:
        mono = TruncatedSeries.monomial(dim, m, exps)
        ly = apply_L(problem.a, mono)
        pl = mul_order_gap(problem.P, ly, m)
        for e, c in pl.terms.items():
            if sum(e) == m:
                out[comp][e] = out[comp].get(e, Fraction(0)) + c
    for i in range(size):
        v = problem.rhs.mu[i][comp]
        if v:
            out[i][exps] = out[i].get(exps, Fraction(0)) - v
    return out


# -- higher order systems --------------------------------------------------------


def companion_augment(problem: PDEProblem, u: Sequence[TruncatedSeries], k: int):
    """First-order companion system for (P L)^k y + sum u_j (P L)^j y = F.

    Returns the augmented problem in w = (y, PL y, ..., (PL)^{k-1} y) and the
    exact characteristic polynomial p_mu(sigma^k + u_{k-1}(0) sigma^{k-1} +
    ... + u_1(0) sigma) whose roots drive the convergent-branch resonance
    check.
    """
    if k < 2:
        raise ValueError("companion form needs k >= 2")
    u = tuple(u)
    if len(u) != k - 1:
        raise ValueError("need exactly k-1 lower-order coefficients")
    n = problem.size
    dim, trunc = problem.dim, problem.trunc
    big = n * k
    zero = TruncatedSeries.zero(dim, trunc)

    c_entries = [zero] * (big - n) + list(problem.rhs.c)
    mu_big = [[Fraction(0)] * big for _ in range(big)]
    a_big = [[zero] * big for _ in range(big)]
    for block in range(k - 1):
        for i in range(n):
            mu_big[block * n + i][(block + 1) * n + i] = Fraction(1)
    for i in range(n):
        for j in range(n):
            mu_big[(k - 1) * n + i][j] = problem.rhs.mu[i][j]
            a_big[(k - 1) * n + i][j] = problem.rhs.A[i, j]
    for j, u_j in enumerate(u, start=1):
        u0 = u_j.constant_term()
        varying = u_j - TruncatedSeries.constant(dim, u_j.trunc, u0)
        for i in range(n):
            mu_big[(k - 1) * n + i][j * n + i] -= u0
            a_big[(k - 1) * n + i][j * n + i] = a_big[(k - 1) * n + i][j * n + i] - varying
    nonlinear = []
    for index, coeff in problem.rhs.nonlinear:
        big_index = tuple(index) + (0,) * (big - n)
        big_coeff = SeriesVector([zero] * (big - n) + list(coeff))
        nonlinear.append((big_index, big_coeff))

    rhs = RightHandSide(SeriesVector(c_entries), mu_big,
                        SeriesMatrix(a_big), nonlinear)
    augmented = PDEProblem(problem.P, problem.a, rhs, problem.ell, trunc)

    inner = [Fraction(0)] + [s.constant_term() for s in u] + [Fraction(1)]
    poly = poly_compose(charpoly(problem.rhs.mu), inner)
    return augmented, poly
