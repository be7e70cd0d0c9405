"""Shared builders for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction

from gevreylab import (
    LinearForm,
    SeriesMatrix,
    SeriesVector,
    TruncatedSeries,
    parse_series,
)
from gevreylab.solver import PDEProblem, RightHandSide


def s(text: str, dim: int, trunc: int) -> TruncatedSeries:
    return parse_series(text, dim, trunc)


def build_problem(dim, trunc, P_text, a_texts, c_texts, mu,
                  ell_weights=None, A_texts=None, nonlinear=None):
    P = parse_series(P_text, dim, trunc)
    a = [parse_series(t, dim, trunc) for t in a_texts]
    c = SeriesVector([parse_series(t, dim, trunc) for t in c_texts])
    A = None
    if A_texts is not None:
        A = SeriesMatrix(
            [[parse_series(t, dim, trunc) for t in row] for row in A_texts]
        )
    nl = []
    if nonlinear:
        for index, texts in nonlinear:
            nl.append(
                (index, SeriesVector([parse_series(t, dim, trunc) for t in texts]))
            )
    ell = LinearForm(ell_weights) if ell_weights is not None else None
    return PDEProblem(P, a, RightHandSide(c, mu, A, nl), ell, trunc)


def random_series(rng: random.Random, dim: int, trunc: int,
                  max_terms: int = 6, zero_constant: bool = False,
                  coeff_bound: int = 5) -> TruncatedSeries:
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        exps = tuple(rng.randint(0, max(1, trunc // dim)) for _ in range(dim))
        if sum(exps) > trunc or (zero_constant and sum(exps) == 0):
            continue
        num = rng.randint(-coeff_bound, coeff_bound)
        den = rng.randint(1, 4)
        if num:
            terms[exps] = terms.get(exps, Fraction(0)) + Fraction(num, den)
    terms = {e: c for e, c in terms.items() if c}
    return TruncatedSeries(dim, trunc, terms)


def euler_problem(trunc: int) -> PDEProblem:
    """x^2 y' + y = x as P=x, L=x d/dx, F = x - y."""
    return build_problem(1, trunc, "x1", ["x1"], ["x1"], [[Fraction(-1)]])
