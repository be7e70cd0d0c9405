"""Sparse exact arithmetic for truncated multivariate formal power series.

A ``TruncatedSeries`` stores finitely many monomials ``c * x^beta`` of total
degree at most ``trunc``; monomials of higher total degree are *unknown*, not
zero.  All arithmetic keeps the conservative rule ``result.trunc =
min(operand truncs)`` (decremented by one for derivatives), so the stored
window of any value is always fully certified.

Values are immutable after construction; every operation is a pure function,
so instances may be shared freely across threads.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

from .rationals import GaussianRational, as_coefficient

Exponent = tuple


def grlex_key(exps: Exponent):
    """Graded-lexicographic sort key: total degree first, then lex."""
    return (sum(exps), exps)


def monomials_up_to(dim: int, degree: int) -> int:
    """Number of monomials in `dim` variables of total degree <= degree."""
    return math.comb(degree + dim, dim)


class TruncatedSeries:
    """Finite map exponent -> coefficient, valid through total degree ``trunc``."""

    __slots__ = ("dim", "trunc", "terms")

    def __init__(self, dim: int, trunc: int, terms=None):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        if trunc < 0:
            raise ValueError("truncation order must be >= 0")
        clean = {}
        if terms:
            for exps, coeff in terms.items():
                exps = tuple(exps)
                if len(exps) != dim:
                    raise ValueError(f"exponent {exps} does not match dim {dim}")
                if any(e < 0 for e in exps):
                    raise ValueError(f"negative exponent in {exps}")
                if sum(exps) > trunc:
                    raise ValueError(
                        f"monomial of degree {sum(exps)} exceeds trunc {trunc}"
                    )
                coeff = as_coefficient(coeff)
                if coeff:
                    clean[exps] = coeff
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "trunc", trunc)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedSeries is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, dim: int, trunc: int) -> "TruncatedSeries":
        return cls(dim, trunc)

    @classmethod
    def constant(cls, dim: int, trunc: int, value) -> "TruncatedSeries":
        return cls(dim, trunc, {(0,) * dim: value})

    @classmethod
    def one(cls, dim: int, trunc: int) -> "TruncatedSeries":
        return cls.constant(dim, trunc, 1)

    @classmethod
    def monomial(cls, dim: int, trunc: int, exps, coeff=1) -> "TruncatedSeries":
        return cls(dim, trunc, {tuple(exps): coeff})

    @classmethod
    def variable(cls, dim: int, trunc: int, axis: int) -> "TruncatedSeries":
        """The coordinate series x_{axis+1} (axis is 0-based)."""
        if not 0 <= axis < dim:
            raise ValueError(f"axis {axis} out of range for dim {dim}")
        exps = tuple(1 if j == axis else 0 for j in range(dim))
        return cls(dim, trunc, {exps: 1})

    # -- basic queries -----------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, exps):
        exps = tuple(exps)
        if len(exps) != self.dim:
            raise ValueError("exponent length mismatch")
        return self.terms.get(exps, Fraction(0))

    def constant_term(self):
        return self.terms.get((0,) * self.dim, Fraction(0))

    def order(self):
        """Least total degree with a nonzero coefficient.

        Returns ``None`` when every stored coefficient vanishes: the order
        then exceeds ``trunc`` and no integer value would be honest.
        """
        if not self.terms:
            return None
        return min(sum(e) for e in self.terms)

    def support(self):
        """Stored exponents in graded-lexicographic order."""
        return sorted(self.terms, key=grlex_key)

    def agrees_up_to(self, other: "TruncatedSeries", upto: int) -> bool:
        """Equality of all coefficients of total degree <= upto."""
        if self.dim != other.dim:
            return False
        if upto > min(self.trunc, other.trunc):
            raise ValueError("comparison order exceeds certified window")
        for exps in set(self.terms) | set(other.terms):
            if sum(exps) <= upto and self.coeff(exps) != other.coeff(exps):
                return False
        return True

    # -- ring operations ---------------------------------------------------

    def _check_dim(self, other):
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            other = TruncatedSeries.constant(self.dim, self.trunc, other)
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        self._check_dim(other)
        trunc = min(self.trunc, other.trunc)
        out = {}
        for exps, c in self.terms.items():
            if sum(exps) <= trunc:
                out[exps] = c
        for exps, c in other.terms.items():
            if sum(exps) > trunc:
                continue
            s = out.get(exps, 0) + c
            if s:
                out[exps] = s
            else:
                out.pop(exps, None)
        return _raw(self.dim, trunc, out)

    __radd__ = __add__

    def __neg__(self):
        return _raw(self.dim, self.trunc, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self.scale(other)
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        self._check_dim(other)
        trunc = min(self.trunc, other.trunc)
        out = _mul_terms(self.terms, other.terms, trunc)
        return _raw(self.dim, trunc, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self.scale(other)
        return NotImplemented

    def scale(self, factor):
        factor = as_coefficient(factor)
        if not factor:
            return TruncatedSeries.zero(self.dim, self.trunc)
        return _raw(
            self.dim, self.trunc, {e: c * factor for e, c in self.terms.items()}
        )

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("series powers need a non-negative integer")
        result = TruncatedSeries.one(self.dim, self.trunc)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- calculus and structure -------------------------------------------

    def partial(self, axis: int) -> "TruncatedSeries":
        """Formal partial derivative along 0-based ``axis``; costs one order."""
        if not 0 <= axis < self.dim:
            raise ValueError(f"axis {axis} out of range for dim {self.dim}")
        if self.trunc == 0:
            raise ValueError("cannot differentiate a series truncated at order 0")
        out = {}
        for exps, c in self.terms.items():
            e = exps[axis]
            if e == 0:
                continue
            new = exps[:axis] + (e - 1,) + exps[axis + 1 :]
            out[new] = c * e
        return _raw(self.dim, self.trunc - 1, out)

    def homogeneous_component(self, n: int) -> "TruncatedSeries":
        if n > self.trunc:
            raise ValueError(f"degree {n} exceeds trunc {self.trunc}")
        out = {e: c for e, c in self.terms.items() if sum(e) == n}
        return _raw(self.dim, self.trunc, out)

    def truncate(self, new_trunc: int) -> "TruncatedSeries":
        """Restrict the certified window; never widens it."""
        if new_trunc > self.trunc:
            raise ValueError("cannot raise the certified truncation order")
        if new_trunc == self.trunc:
            return self
        out = {e: c for e, c in self.terms.items() if sum(e) <= new_trunc}
        return _raw(self.dim, new_trunc, out)

    def substitute(self, sigma: Sequence["TruncatedSeries"]) -> "TruncatedSeries":
        """Composition f(sigma_1, ..., sigma_d); each sigma_j must vanish at 0.

        The zero constant terms make the composition well defined degree by
        degree, so the conservative min rule is exact here.
        """
        if len(sigma) != self.dim:
            raise ValueError("substitution needs one series per variable")
        target_dim = sigma[0].dim
        trunc = self.trunc
        for s in sigma:
            if s.dim != target_dim:
                raise ValueError("substitution series must share a dimension")
            if s.constant_term():
                raise ValueError("substitution series must have zero constant term")
            trunc = min(trunc, s.trunc)
        acc = {}
        powers = [[TruncatedSeries.one(target_dim, trunc)] for _ in range(self.dim)]

        def power(j, e):
            cache = powers[j]
            while len(cache) <= e:
                cache.append(cache[-1] * sigma[j].truncate(min(trunc, sigma[j].trunc)))
            return cache[e]

        for exps in self.support():
            if sum(exps) > trunc:
                continue
            c = self.terms[exps]
            prod = None
            for j, e in enumerate(exps):
                if e == 0:
                    continue
                p = power(j, e)
                prod = p if prod is None else prod * p
            if prod is None:
                term_terms = {(0,) * target_dim: c}
            else:
                term_terms = {e: cc * c for e, cc in prod.terms.items()}
            for e, cc in term_terms.items():
                s = acc.get(e, 0) + cc
                if s:
                    acc[e] = s
                else:
                    acc.pop(e, None)
        return _raw(target_dim, trunc, acc)

    def evaluate(self, point):
        """Exact value at a point with Fraction/GaussianRational coordinates."""
        if len(point) != self.dim:
            raise ValueError("point length mismatch")
        total = Fraction(0)
        powcache = [{0: Fraction(1)} for _ in range(self.dim)]

        def power(j, e):
            cache = powcache[j]
            if e not in cache:
                cache[e] = power(j, e - 1) * point[j]
            return cache[e]

        for exps, c in self.terms.items():
            val = c
            for j, e in enumerate(exps):
                if e:
                    val = val * power(j, e)
            total = total + val
        return total

    # -- dunder plumbing ----------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.trunc == other.trunc
            and self.terms == other.terms
        )

    def __repr__(self):
        return (
            f"TruncatedSeries(dim={self.dim}, trunc={self.trunc}, "
            f"nterms={len(self.terms)})"
        )


def _raw(dim: int, trunc: int, terms: dict) -> TruncatedSeries:
    """Internal constructor for pre-validated term maps (zero-free, in-window)."""
    s = object.__new__(TruncatedSeries)
    object.__setattr__(s, "dim", dim)
    object.__setattr__(s, "trunc", trunc)
    object.__setattr__(s, "terms", terms)
    return s


def _mul_terms(a: dict, b: dict, cutoff: int) -> dict:
    """Cauchy product of two term maps, discarding degrees beyond cutoff.

    Terms are bucketed by total degree so whole blocks of out-of-window
    products are skipped without touching coefficients.
    """
    if not a or not b:
        return {}
    if len(a) > len(b):
        a, b = b, a
    b_buckets = {}
    for exps, c in b.items():
        b_buckets.setdefault(sum(exps), []).append((exps, c))
    out = {}
    for exps_a, ca in a.items():
        deg_a = sum(exps_a)
        if deg_a > cutoff:
            continue
        for deg_b, bucket in b_buckets.items():
            if deg_a + deg_b > cutoff:
                continue
            for exps_b, cb in bucket:
                key = tuple(x + y for x, y in zip(exps_a, exps_b))
                s = out.get(key, 0) + ca * cb
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
    return out


def iter_exponents(dim: int, degree: int) -> Iterable[Exponent]:
    """All exponents in `dim` variables of exact total degree `degree`."""
    if dim == 1:
        yield (degree,)
        return
    for head in range(degree + 1):
        for tail in iter_exponents(dim - 1, degree - head):
            yield (head,) + tail


def iter_exponents_up_to(dim: int, degree: int) -> Iterable[Exponent]:
    for m in range(degree + 1):
        yield from iter_exponents(dim, m)


class SeriesVector:
    """Fixed-length vector of series sharing dim and trunc."""

    __slots__ = ("entries",)

    def __init__(self, entries: Sequence[TruncatedSeries]):
        entries = tuple(entries)
        if not entries:
            raise ValueError("empty vector")
        dim, trunc = entries[0].dim, entries[0].trunc
        for s in entries:
            if s.dim != dim:
                raise ValueError("vector entries must share dim")
        if len({s.trunc for s in entries}) > 1:
            trunc = min(s.trunc for s in entries)
            entries = tuple(s.truncate(trunc) for s in entries)
        object.__setattr__(self, "entries", entries)

    def __setattr__(self, name, value):
        raise AttributeError("SeriesVector is immutable")

    @classmethod
    def zero(cls, size: int, dim: int, trunc: int) -> "SeriesVector":
        return cls([TruncatedSeries.zero(dim, trunc)] * size)

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def dim(self) -> int:
        return self.entries[0].dim

    @property
    def trunc(self) -> int:
        return self.entries[0].trunc

    @property
    def is_zero(self) -> bool:
        return all(s.is_zero for s in self.entries)

    def __getitem__(self, i) -> TruncatedSeries:
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __add__(self, other):
        if not isinstance(other, SeriesVector):
            return NotImplemented
        if self.size != other.size:
            raise ValueError("vector size mismatch")
        return SeriesVector([a + b for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other):
        if not isinstance(other, SeriesVector):
            return NotImplemented
        return SeriesVector([a - b for a, b in zip(self.entries, other.entries)])

    def __neg__(self):
        return SeriesVector([-a for a in self.entries])

    def scale(self, factor) -> "SeriesVector":
        return SeriesVector([s * factor for s in self.entries])

    def mul_series(self, f: TruncatedSeries) -> "SeriesVector":
        return SeriesVector([s * f for s in self.entries])

    def truncate(self, trunc: int) -> "SeriesVector":
        return SeriesVector([s.truncate(trunc) for s in self.entries])

    def map(self, fn) -> "SeriesVector":
        return SeriesVector([fn(s) for s in self.entries])

    def monomial_power(self, index: Sequence[int]) -> TruncatedSeries:
        """y^I = prod of entries^index, the nonlinear building block."""
        if len(index) != self.size:
            raise ValueError("power index length mismatch")
        out = TruncatedSeries.one(self.dim, self.trunc)
        for s, e in zip(self.entries, index):
            if e:
                out = out * (s**e)
        return out

    def __eq__(self, other):
        if not isinstance(other, SeriesVector):
            return NotImplemented
        return self.entries == other.entries

    def __repr__(self):
        return f"SeriesVector(size={self.size}, dim={self.dim}, trunc={self.trunc})"


class SeriesMatrix:
    """Square matrix of series sharing dim and trunc."""

    __slots__ = ("rows",)

    def __init__(self, rows: Sequence[Sequence[TruncatedSeries]]):
        rows = tuple(tuple(r) for r in rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValueError("matrix must be square and non-empty")
        dim = rows[0][0].dim
        truncs = set()
        for r in rows:
            for s in r:
                if s.dim != dim:
                    raise ValueError("matrix entries must share dim")
                truncs.add(s.trunc)
        if len(truncs) > 1:
            t = min(truncs)
            rows = tuple(tuple(s.truncate(t) for s in r) for r in rows)
        object.__setattr__(self, "rows", rows)

    def __setattr__(self, name, value):
        raise AttributeError("SeriesMatrix is immutable")

    @classmethod
    def zero(cls, size: int, dim: int, trunc: int) -> "SeriesMatrix":
        z = TruncatedSeries.zero(dim, trunc)
        return cls([[z] * size for _ in range(size)])

    @classmethod
    def from_constant(cls, matrix, dim: int, trunc: int) -> "SeriesMatrix":
        return cls(
            [
                [TruncatedSeries.constant(dim, trunc, v) for v in row]
                for row in matrix
            ]
        )

    @property
    def size(self) -> int:
        return len(self.rows)

    @property
    def dim(self) -> int:
        return self.rows[0][0].dim

    @property
    def trunc(self) -> int:
        return self.rows[0][0].trunc

    @property
    def is_zero(self) -> bool:
        return all(s.is_zero for r in self.rows for s in r)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def constant(self):
        """The constant-term matrix as plain coefficients."""
        return [[s.constant_term() for s in row] for row in self.rows]

    def __add__(self, other):
        if not isinstance(other, SeriesMatrix):
            return NotImplemented
        if self.size != other.size:
            raise ValueError("matrix size mismatch")
        return SeriesMatrix(
            [
                [a + b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.rows, other.rows)
            ]
        )

    def __sub__(self, other):
        if not isinstance(other, SeriesMatrix):
            return NotImplemented
        return SeriesMatrix(
            [
                [a - b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.rows, other.rows)
            ]
        )

    def mul_vector(self, v: SeriesVector) -> SeriesVector:
        if v.size != self.size:
            raise ValueError("matrix/vector size mismatch")
        out = []
        for row in self.rows:
            acc = TruncatedSeries.zero(self.dim, min(self.trunc, v.trunc))
            for a, b in zip(row, v.entries):
                acc = acc + a * b
            out.append(acc)
        return SeriesVector(out)

    def mul_matrix(self, other: "SeriesMatrix") -> "SeriesMatrix":
        if other.size != self.size:
            raise ValueError("matrix size mismatch")
        n = self.size
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = TruncatedSeries.zero(self.dim, min(self.trunc, other.trunc))
                for k in range(n):
                    acc = acc + self.rows[i][k] * other.rows[k][j]
                row.append(acc)
            out.append(row)
        return SeriesMatrix(out)

    def truncate(self, trunc: int) -> "SeriesMatrix":
        return SeriesMatrix([[s.truncate(trunc) for s in r] for r in self.rows])

    def map(self, fn) -> "SeriesMatrix":
        return SeriesMatrix([[fn(s) for s in r] for r in self.rows])

    def __eq__(self, other):
        if not isinstance(other, SeriesMatrix):
            return NotImplemented
        return self.rows == other.rows

    def __repr__(self):
        return f"SeriesMatrix(size={self.size}, dim={self.dim}, trunc={self.trunc})"
