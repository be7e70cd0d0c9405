"""Division machinery: shifts, monomial division, generalized Weierstrass
division by a germ P, and P-adic decomposition/recomposition.

Division by P is steered by a positive rational weight vector (a linear form
on exponents) refined to a total monomial order by a graded-lexicographic
tiebreak.  Remainders live in the residue space Delta_alpha of series with no
monomial x^beta satisfying alpha <= beta componentwise, where alpha is the
weight-minimal exponent of P.

Truncation bookkeeping is explicit: dividing certified data yields quotients
and remainders whose ``trunc`` fields state exactly which total degrees are
still trustworthy.  Uncertified coefficients are never reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .series import TruncatedSeries, monomials_up_to
from .series import _mul_terms, _raw  # shared sparse kernels


class LinearForm:
    """Positive rational weights on exponents plus a graded-lex tiebreak.

    A genuinely injective form would need irrational weight ratios, so the
    total order used everywhere is (weight value, total degree, lex), with
    the lex step reading exponents from the last variable backwards: among
    equal-weight equal-degree monomials the one leaning on later variables
    is the larger, so x1^2 x2 precedes x1 x2^2.
    """

    __slots__ = ("weights",)

    def __init__(self, weights: Sequence):
        ws = tuple(Fraction(w) for w in weights)
        if not ws:
            raise ValueError("empty weight vector")
        if any(w <= 0 for w in ws):
            raise ValueError("all weights must be positive")
        object.__setattr__(self, "weights", ws)

    def __setattr__(self, name, value):
        raise AttributeError("LinearForm is immutable")

    @classmethod
    def standard(cls, dim: int) -> "LinearForm":
        return cls((1,) * dim)

    @property
    def dim(self) -> int:
        return len(self.weights)

    def value(self, exps) -> Fraction:
        if len(exps) != self.dim:
            raise ValueError("exponent length mismatch")
        return sum((w * e for w, e in zip(self.weights, exps)), Fraction(0))

    def key(self, exps):
        """Total-order sort key on exponents."""
        return (self.value(exps), sum(exps), tuple(reversed(tuple(exps))))

    def __eq__(self, other):
        if not isinstance(other, LinearForm):
            return NotImplemented
        return self.weights == other.weights

    def __repr__(self):
        return f"LinearForm({[str(w) for w in self.weights]})"


def dominates(alpha, beta) -> bool:
    """Componentwise alpha <= beta."""
    return all(a <= b for a, b in zip(alpha, beta))


@dataclass(frozen=True)
class ResidueClass:
    """A series certified to lie in Delta_alpha: no exponent >= alpha."""

    alpha: tuple
    series: TruncatedSeries

    def __post_init__(self):
        if len(self.alpha) != self.series.dim:
            raise ValueError("alpha length must match series dim")
        for exps in self.series.terms:
            if dominates(self.alpha, exps):
                raise ValueError(
                    f"exponent {exps} violates the residue constraint for {self.alpha}"
                )


def min_exponent(f: TruncatedSeries, ell: LinearForm):
    """The exponent of f minimal for ell's total order (nu_ell)."""
    if f.is_zero:
        raise ValueError("the zero series has no minimal exponent")
    if ell.dim != f.dim:
        raise ValueError("linear form dimension mismatch")
    return min(f.terms, key=ell.key)


def shift(f: TruncatedSeries, axis: int) -> TruncatedSeries:
    """S_j: drop terms with exponent 0 on `axis`, lower the rest by one.

    Equals (f - f|_{x_j=0}) / x_j.  Costs one certified order: a degree-m
    output coefficient comes from a degree-(m+1) input coefficient.
    """
    if not 0 <= axis < f.dim:
        raise ValueError(f"axis {axis} out of range for dim {f.dim}")
    if f.trunc == 0:
        raise ValueError("cannot shift a series truncated at order 0")
    out = {}
    for exps, c in f.terms.items():
        e = exps[axis]
        if e == 0:
            continue
        out[exps[:axis] + (e - 1,) + exps[axis + 1 :]] = c
    return _raw(f.dim, f.trunc - 1, out)


def monomial_divide(f: TruncatedSeries, alpha) -> tuple:
    """Canonical division f = q * x^alpha + r with r in Delta_alpha.

    The quotient is the composition of shifts S_1^a1 ... S_d^ad; both parts
    are exact on their certified windows.
    """
    alpha = tuple(alpha)
    if len(alpha) != f.dim:
        raise ValueError("alpha length mismatch")
    if any(a < 0 for a in alpha):
        raise ValueError("alpha must be non-negative")
    deg_alpha = sum(alpha)
    if deg_alpha == 0:
        raise ValueError("alpha must be nonzero")
    if f.trunc < deg_alpha:
        raise ValueError(
            f"trunc {f.trunc} too small to divide by a degree-{deg_alpha} monomial"
        )
    q = f
    for axis, e in enumerate(alpha):
        for _ in range(e):
            q = shift(q, axis)
    r_terms = {e: c for e, c in f.terms.items() if not dominates(alpha, e)}
    r = _raw(f.dim, f.trunc, r_terms)
    return q, ResidueClass(alpha, r)


def _quotient_terms(terms: dict, alpha) -> dict:
    """Raw Q_alpha on a term map: keep beta >= alpha, subtract alpha."""
    out = {}
    for exps, c in terms.items():
        if dominates(alpha, exps):
            out[tuple(e - a for e, a in zip(exps, alpha))] = c
    return out


class DivisionError(ValueError):
    """Ill-posed division input (zero P, unit P, insufficient truncation)."""


def weierstrass_divide(
    g: TruncatedSeries, P: TruncatedSeries, ell: LinearForm
) -> tuple:
    """Generalized Weierstrass division g = q*P + r, r in Delta_{nu_ell(P)}.

    P is scaled internally so its minimal-exponent coefficient is one; the
    scalar is folded back into q.  The quotient is the fixed point of
    q <- Q_alpha(g - q*Ptilde), iterated on the truncated monomial grid until
    stationary.  Each pass strictly raises the weight value of the defect, so
    on a finite grid the iteration always terminates; a budget of
    (#monomials)+1 passes guards against implementation bugs.

    Certified windows:
      * P a scaled monomial, or every term of Ptilde of total degree >=
        |alpha|: q is exact through T - |alpha| and r through T, where
        T = min(g.trunc, P.trunc).  Equal weights always land here.
      * otherwise the weight grading and the degree grading disagree and a
        conservative conversion is applied.
    """
    if ell.dim != g.dim or P.dim != g.dim:
        raise ValueError("dimension mismatch")
    if P.is_zero:
        raise DivisionError("cannot divide by the zero series")
    if P.constant_term():
        raise DivisionError("divisor must vanish at the origin")
    T = min(g.trunc, P.trunc)
    alpha = min_exponent(P, ell)
    deg_alpha = sum(alpha)
    if T < deg_alpha:
        raise DivisionError(
            f"trunc {T} cannot certify any quotient coefficient for a divisor "
            f"with minimal exponent of degree {deg_alpha}"
        )
    lead = P.terms[alpha]
    p_norm = {e: c / lead for e, c in P.terms.items() if sum(e) <= T}
    p_tilde = dict(p_norm)
    del p_tilde[alpha]

    if not p_tilde:
        exact = True
    else:
        exact = min(sum(e) for e in p_tilde) >= deg_alpha
    if exact:
        q_trunc = T - deg_alpha
        r_trunc = T
    else:
        lmin, lmax = min(ell.weights), max(ell.weights)
        q_trunc = math.floor((lmin * T - ell.value(alpha)) / lmax)
        r_trunc = math.floor(lmin * T / lmax)
    if q_trunc < 0:
        raise DivisionError(
            f"trunc {T} cannot certify any quotient coefficient for this divisor"
        )

    g_terms = {e: c for e, c in g.terms.items() if sum(e) <= T}
    q_terms = {}
    budget = monomials_up_to(g.dim, T) + 1
    for _ in range(budget):
        defect = dict(g_terms)
        if q_terms and p_tilde:
            for e, c in _mul_terms(q_terms, p_tilde, T).items():
                s = defect.get(e, 0) - c
                if s:
                    defect[e] = s
                else:
                    defect.pop(e, None)
        new_q = _quotient_terms(defect, alpha)
        if new_q == q_terms:
            break
        q_terms = new_q
    else:
        raise RuntimeError(
            "weierstrass division did not stabilize within its pass budget; "
            "this indicates a bug, not a mathematical failure"
        )

    # r = g - q * P_norm on the grid; lands in Delta_alpha at the fixed point.
    r_terms = dict(g_terms)
    for e, c in _mul_terms(q_terms, p_norm, T).items():
        s = r_terms.get(e, 0) - c
        if s:
            r_terms[e] = s
        else:
            r_terms.pop(e, None)

    q_final = {
        e: c / lead for e, c in q_terms.items() if sum(e) <= q_trunc and c
    }
    r_final = {e: c for e, c in r_terms.items() if sum(e) <= r_trunc}
    q = _raw(g.dim, q_trunc, q_final)
    r = _raw(g.dim, r_trunc, r_final)
    return q, ResidueClass(alpha, r)


def residue(f: TruncatedSeries, P: TruncatedSeries, ell: LinearForm) -> TruncatedSeries:
    """R_{P,ell}(f): the remainder of Weierstrass division.

    Falls back to the below-order(P) window when the truncation cannot
    certify any quotient coefficient; the remainder survives there because
    q*P cannot reach degrees under order(P).
    """
    if P.is_zero:
        raise DivisionError("cannot divide by the zero series")
    if P.constant_term():
        raise DivisionError("divisor must vanish at the origin")
    alpha = min_exponent(P, ell)
    if min(f.trunc, P.trunc) >= sum(alpha):
        return weierstrass_divide(f, P, ell)[1].series
    return _residue_floor(f, P, ell).series


def quotient(f: TruncatedSeries, P: TruncatedSeries, ell: LinearForm) -> TruncatedSeries:
    """Q_{P,ell}(f): the quotient of Weierstrass division."""
    return weierstrass_divide(f, P, ell)[0]


@dataclass(frozen=True)
class PAdicDecomposition:
    """The expansion f = sum_n f_n P^n with every f_n in Delta_{nu_ell(P)}.

    ``valid_orders[n]`` is the total degree through which f_n is certified;
    coefficients above it are simply not stored.
    """

    P: TruncatedSeries
    ell: LinearForm
    coeffs: tuple
    valid_orders: tuple

    def __post_init__(self):
        if len(self.coeffs) != len(self.valid_orders):
            raise ValueError("coefficients and valid orders must align")

    @property
    def max_index(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self):
        return len(self.coeffs)

    def coefficient(self, n: int) -> TruncatedSeries:
        return self.coeffs[n].series

    def recompose(self) -> TruncatedSeries:
        """sum_n f_n P^n through every degree all stored data certifies.

        The blanket min-rule would clamp the sum to the weakest f_n window,
        but f_n * P^n is certified through valid_orders[n] + n*order(P)
        thanks to the order gap of P^n, so the products are assembled on the
        raw term maps with that sharper cutoff.
        """
        oP = self.P.order()
        if oP is None:
            raise ValueError("decomposition divisor is zero")
        limit = (self.max_index + 1) * oP - 1
        target = min(
            min(v + n * oP for n, v in enumerate(self.valid_orders)),
            limit,
            self.P.trunc,
        )
        if target < 0:
            raise ValueError("no certified degrees to recompose")
        dim = self.P.dim
        p_cut = {e: c for e, c in self.P.terms.items() if sum(e) <= target}
        acc = {}
        p_power = {(0,) * dim: Fraction(1)}
        for n, rc in enumerate(self.coeffs):
            if n > 0:
                p_power = _mul_terms(p_power, p_cut, target)
            for e, c in _mul_terms(rc.series.terms, p_power, target).items():
                s = acc.get(e, 0) + c
                if s:
                    acc[e] = s
                else:
                    acc.pop(e, None)
        return _raw(dim, target, acc)

    def to_json_dict(self):
        from .textform import series_to_text

        return {
            "P": series_to_text(self.P),
            "ell_weights": [str(w) for w in self.ell.weights],
            "terms": [
                {
                    "n": n,
                    "series": series_to_text(rc.series),
                    "valid_order": self.valid_orders[n],
                }
                for n, rc in enumerate(self.coeffs)
            ],
        }


def _residue_floor(cur: TruncatedSeries, P: TruncatedSeries, ell: LinearForm):
    """Certified residue when no quotient coefficient is representable.

    Below degree order(P) the product q*P contributes nothing, so the
    residue equals the input there, and such low degrees can never dominate
    the minimal exponent of P.
    """
    T = min(cur.trunc, P.trunc)
    oP = P.order()
    r_trunc = min(T, oP - 1)
    if r_trunc < 0:
        raise DivisionError("no certified degrees remain for the residue")
    return ResidueClass(min_exponent(P, ell), cur.truncate(r_trunc))


def p_adic_decompose(
    f: TruncatedSeries, P: TruncatedSeries, ell: LinearForm, terms: int
) -> PAdicDecomposition:
    """Iterated division: coefficient n is R(Q^n(f)), for n = 0..terms.

    Each quotient costs certified orders, so ``terms * order(P) <= f.trunc``
    is needed for the full run; exceeding it raises with the failing index.
    The final index only needs a residue, which survives one step longer
    than the quotient chain.
    """
    if terms < 0:
        raise ValueError("terms must be >= 0")
    coeffs = []
    valid = []
    cur = f
    for n in range(terms + 1):
        try:
            q, r = weierstrass_divide(cur, P, ell)
        except DivisionError as exc:
            if n == terms:
                r = _residue_floor(cur, P, ell)
                q = None
            else:
                raise DivisionError(
                    f"decomposition exhausted certified orders at index {n}: {exc}"
                ) from exc
        coeffs.append(r)
        valid.append(r.series.trunc)
        if q is not None:
            cur = q
    return PAdicDecomposition(P, ell, tuple(coeffs), tuple(valid))


def recompose_error(f: TruncatedSeries, dec: PAdicDecomposition) -> Optional[int]:
    """First degree at which recomposition disagrees with f, None if none."""
    rec = dec.recompose()
    upto = min(rec.trunc, f.trunc)
    for m in range(upto + 1):
        if not rec.agrees_up_to(f, m):
            return m
    return None


def p_adic_multiply(a: PAdicDecomposition, b: PAdicDecomposition) -> PAdicDecomposition:
    """Decomposition of the product from two decompositions.

    Pairwise products of coefficients are each re-divided by P, and the
    n-th output gathers R(Q^{n-k}(f_j g_{k-j})) over all splits, exactly the
    double-sum product rule for series in P.
    """
    if a.P != b.P or a.ell != b.ell:
        raise ValueError("decompositions must share P and the linear form")
    P, ell = a.P, a.ell
    alpha = min_exponent(P, ell)
    target = min(a.max_index, b.max_index)
    acc = [None] * (target + 1)
    valid = [None] * (target + 1)
    for i in range(target + 1):
        for j in range(target + 1 - i):
            h = a.coefficient(i) * b.coefficient(j)
            sub = p_adic_decompose(h, P, ell, target - i - j)
            for m, rc in enumerate(sub.coeffs):
                n = i + j + m
                v = sub.valid_orders[m]
                if acc[n] is None:
                    acc[n] = rc.series
                    valid[n] = v
                else:
                    acc[n] = acc[n] + rc.series
                    valid[n] = min(valid[n], v)
    coeffs = tuple(
        ResidueClass(alpha, s.truncate(min(s.trunc, v)))
        for s, v in zip(acc, valid)
    )
    return PAdicDecomposition(P, ell, coeffs, tuple(valid))
