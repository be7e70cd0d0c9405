"""Exact linear algebra over the rational (or Gaussian-rational) field.

Plain Gauss-Jordan on small dense matrices backs determinant, solve and
inverse; the series-matrix inverse expands a Neumann sum around the inverse
of the constant term, staying inside exact arithmetic throughout.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

from .series import SeriesMatrix, TruncatedSeries


def _rows(matrix) -> list:
    return [list(row) for row in matrix]


def mat_det(matrix):
    """Exact determinant by fraction Gauss elimination."""
    m = _rows(matrix)
    n = len(m)
    if any(len(r) != n for r in m):
        raise ValueError("determinant needs a square matrix")
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col]), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det = det * m[col][col]
        for r in range(col + 1, n):
            if m[r][col]:
                factor = m[r][col] / m[col][col]
                for c in range(col, n):
                    m[r][c] = m[r][c] - factor * m[col][c]
    return det


def mat_solve(matrix, rhs) -> Optional[list]:
    """Solve A x = b exactly; None when the system is singular."""
    a = _rows(matrix)
    b = list(rhs)
    n = len(a)
    if len(b) != n:
        raise ValueError("rhs length mismatch")
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col]), None)
        if pivot is None:
            return None
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            b[col], b[pivot] = b[pivot], b[col]
        piv = a[col][col]
        for r in range(n):
            if r != col and a[r][col]:
                factor = a[r][col] / piv
                for c in range(col, n):
                    a[r][c] = a[r][c] - factor * a[col][c]
                b[r] = b[r] - factor * b[col]
    return [b[i] / a[i][i] for i in range(n)]


def mat_invert(matrix) -> Optional[list]:
    """Exact inverse; None when singular."""
    m = _rows(matrix)
    n = len(m)
    aug = [row + [Fraction(1) if i == j else Fraction(0) for j in range(n)]
           for i, row in enumerate(m)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col]), None)
        if pivot is None:
            return None
        if pivot != col:
            aug[col], aug[pivot] = aug[pivot], aug[col]
        piv = aug[col][col]
        aug[col] = [v / piv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                factor = aug[r][col]
                aug[r] = [v - factor * w for v, w in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def charpoly(matrix) -> list:
    """Coefficients of det(t I - M), ascending: [c0, ..., c_{n-1}, 1].

    Faddeev-LeVerrier keeps everything exact with only divisions by
    integers.
    """
    m = _rows(matrix)
    n = len(m)
    coeffs = [Fraction(0)] * n + [Fraction(1)]
    aux = [[Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)]
    for k in range(1, n + 1):
        # aux <- M * aux
        aux = [
            [sum((m[i][t] * aux[t][j] for t in range(n)), Fraction(0)) for j in range(n)]
            for i in range(n)
        ]
        trace = sum((aux[i][i] for i in range(n)), Fraction(0))
        c = -trace / k
        coeffs[n - k] = c
        for i in range(n):
            aux[i][i] = aux[i][i] + c
    return coeffs


def poly_compose(outer: Sequence, inner: Sequence) -> list:
    """Coefficients of outer(inner(t)), both ascending, exact."""
    result = [Fraction(0)]
    for c in reversed(list(outer)):
        # result = result * inner + c
        prod = [Fraction(0)] * (len(result) + len(inner) - 1)
        for i, a in enumerate(result):
            if a:
                for j, b in enumerate(inner):
                    prod[i + j] += a * b
        prod[0] += Fraction(c)
        result = prod
    while len(result) > 1 and not result[-1]:
        result.pop()
    return result


def poly_eval(coeffs: Sequence, value):
    acc = Fraction(0)
    for c in reversed(list(coeffs)):
        acc = acc * value + c
    return acc


def neumann_inverse(m: SeriesMatrix) -> SeriesMatrix:
    """Inverse of a series matrix whose constant term is invertible.

    With M = C + B, o(B) >= 1:  M^{-1} = sum_k (-C^{-1} B)^k C^{-1}, a finite
    sum on truncated data since each factor raises the order.
    """
    c = m.constant()
    c_inv = mat_invert(c)
    if c_inv is None:
        raise ValueError("constant term of the series matrix is singular")
    dim, trunc, n = m.dim, m.trunc, m.size
    c_inv_series = SeriesMatrix.from_constant(c_inv, dim, trunc)
    b = m - SeriesMatrix.from_constant(c, dim, trunc)
    if b.is_zero:
        return c_inv_series
    step = c_inv_series.mul_matrix(b).map(lambda s: -s)
    acc = c_inv_series
    term = c_inv_series
    for _ in range(trunc):
        term = step.mul_matrix(term)
        if term.is_zero:
            break
        acc = acc + term
    return acc


def identity_series(size: int, dim: int, trunc: int) -> SeriesMatrix:
    one = TruncatedSeries.one(dim, trunc)
    zero = TruncatedSeries.zero(dim, trunc)
    return SeriesMatrix(
        [[one if i == j else zero for j in range(size)] for i in range(size)]
    )


def scalar_diagonal(f: TruncatedSeries, size: int) -> SeriesMatrix:
    zero = TruncatedSeries.zero(f.dim, f.trunc)
    return SeriesMatrix(
        [[f if i == j else zero for j in range(size)] for i in range(size)]
    )
