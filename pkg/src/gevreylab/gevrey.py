"""Gevrey-class diagnostics: norm sequences of decomposition coefficients,
order estimation by regression, coefficient-bound checks, and the coordinate
transforms (linear change, blow-up, ramification) that move problems into
divisor-friendly form.

Estimation is model fitting on finite data, never a certified class: the
growth C A^n n!^s becomes, in log space, an affine function of n plus s
times the Stirling regressor n log n - n, and s is read off a least-squares
fit with its quality attached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .division import PAdicDecomposition
from .rationals import GaussianRational
from .series import TruncatedSeries, _raw


@dataclass(frozen=True)
class NormSequence:
    """Per-level norm proxies M_n of decomposition coefficients."""

    values: tuple
    proxy: str
    radius: Fraction

    def __len__(self):
        return len(self.values)


def _coeff_magnitude(c):
    if isinstance(c, GaussianRational):
        return abs(c)
    return abs(c)


def norm_sequence(
    dec: PAdicDecomposition, proxy: str = "sum", radius=Fraction(1, 2)
) -> NormSequence:
    """M_n per level: coefficient sum at the radius (a sup bound on the
    closed polydisc of that polyradius) or the max coefficient magnitude."""
    radius = Fraction(radius)
    if radius <= 0:
        raise ValueError("radius must be positive")
    if proxy not in ("sum", "max"):
        raise ValueError("proxy must be 'sum' or 'max'")
    values = []
    for n in range(len(dec)):
        f = dec.coefficient(n)
        if proxy == "sum":
            exact = Fraction(0)
            inexact = 0.0
            for exps, c in f.terms.items():
                mag = _coeff_magnitude(c)
                if isinstance(mag, Fraction):
                    exact += mag * radius ** sum(exps)
                else:
                    inexact += mag * float(radius ** sum(exps))
            values.append(float(exact) + inexact)
        else:
            values.append(
                max((float(_coeff_magnitude(c)) for c in f.terms.values()),
                    default=0.0)
            )
    return NormSequence(tuple(values), proxy, radius)


@dataclass(frozen=True)
class GevreyEstimate:
    s_hat: float
    log_c: float
    log_a: float
    r_squared: float
    n_range: tuple
    inconclusive: bool
    note: str = ""

    def to_json_dict(self):
        return {
            "s_hat": self.s_hat,
            "log_c": self.log_c,
            "log_a": self.log_a,
            "r_squared": self.r_squared,
            "n_range": list(self.n_range),
            "inconclusive": self.inconclusive,
            "note": self.note,
        }


def estimate_order(
    ns: NormSequence, min_points: int = 6, quality_threshold: float = 0.9
) -> GevreyEstimate:
    """Fitted Gevrey order of the norm sequence.

    Design matrix [1, n, n log n - n]: the constant absorbs log C, the
    linear term log A, and the Stirling regressor isolates s.  A sequence
    that dies out entirely (a polynomial in P) is reported as order zero
    without fitting; fewer nonzero points than ``min_points`` without such a
    zero tail is an error.
    """
    values = ns.values
    rows = [(n, v) for n, v in enumerate(values) if v > 0 and n >= 1]
    if len(rows) < min_points:
        last_nz = max((n for n, v in enumerate(values) if v > 0), default=-1)
        trailing_zeros = len(values) - 1 - last_nz
        if trailing_zeros >= min_points:
            return GevreyEstimate(
                s_hat=0.0, log_c=0.0, log_a=0.0, r_squared=1.0,
                n_range=(0, len(values) - 1), inconclusive=False,
                note="finitely supported in P: polynomial tail of zeros",
            )
        raise ValueError(
            f"too few nonzero entries ({len(rows)} < {min_points}) to fit"
        )
    n_arr = np.array([r[0] for r in rows], dtype=float)
    y = np.log(np.array([r[1] for r in rows], dtype=float))
    design = np.column_stack(
        [np.ones_like(n_arr), n_arr, n_arr * np.log(n_arr) - n_arr]
    )
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    pred = design @ coef
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return GevreyEstimate(
        s_hat=float(coef[2]),
        log_c=float(coef[0]),
        log_a=float(coef[1]),
        r_squared=r2,
        n_range=(int(n_arr[0]), int(n_arr[-1])),
        inconclusive=r2 < quality_threshold,
    )


# -- coordinate transforms -------------------------------------------------


def linear_change(f: TruncatedSeries, matrix) -> TruncatedSeries:
    """f(A x): substitution by the linear forms given by the rows of A."""
    rows = [list(r) for r in matrix]
    d = f.dim
    if len(rows) != d or any(len(r) != d for r in rows):
        raise ValueError("matrix shape must match the series dimension")
    sigma = []
    for row in rows:
        terms = {}
        for j, v in enumerate(row):
            v = Fraction(v) if not isinstance(v, (Fraction, GaussianRational)) else v
            if v:
                exps = tuple(1 if t == j else 0 for t in range(d))
                terms[exps] = v
        sigma.append(TruncatedSeries(d, f.trunc, terms))
    return f.substitute(sigma)


def blowup(f: TruncatedSeries) -> TruncatedSeries:
    """Punctual blow-up chart: x_1 = z_1, x_j = z_1 z_j for j >= 2.

    Pure exponent remap (b_1, ..., b_d) -> (|b|, b_2, ..., b_d); terms whose
    image leaves the total-degree window are dropped, everything kept is
    exact.
    """
    if f.dim < 2:
        raise ValueError("blow-up needs dimension >= 2")
    out = {}
    for exps, c in f.terms.items():
        image = (sum(exps),) + exps[1:]
        if sum(image) <= f.trunc:
            out[image] = out.get(image, 0) + c
    return _raw(f.dim, f.trunc, {e: c for e, c in out.items() if c})


def ramify(f: TruncatedSeries, axis: int, k: int) -> TruncatedSeries:
    """Ramification x_axis -> x_axis^k as the exponent map b_j -> k b_j."""
    if k < 1:
        raise ValueError("ramification index must be >= 1")
    if not 0 <= axis < f.dim:
        raise ValueError(f"axis {axis} out of range for dim {f.dim}")
    if k == 1:
        return f
    out = {}
    for exps, c in f.terms.items():
        image = exps[:axis] + (exps[axis] * k,) + exps[axis + 1 :]
        if sum(image) <= f.trunc:
            out[image] = c
    return _raw(f.dim, f.trunc, out)


# -- coefficient bound checks ----------------------------------------------


def _log_magnitude(c) -> float:
    """log |c| for huge exact coefficients without float overflow."""
    if isinstance(c, GaussianRational):
        sq = c.abs_squared()
        return 0.5 * (math.log(sq.numerator) - math.log(sq.denominator))
    c = abs(c)
    if isinstance(c, Fraction):
        return math.log(c.numerator) - math.log(c.denominator)
    return math.log(c)


@dataclass(frozen=True)
class BoundCheckReport:
    """Minimal C for a coefficient bound, with its per-degree profile."""

    c_min: float
    witness: Optional[tuple]
    ratio_by_degree: dict
    s: float
    a: float

    @property
    def growing(self) -> bool:
        """True when the per-degree maxima keep rising over the last half."""
        degs = sorted(self.ratio_by_degree)
        if len(degs) < 4:
            return False
        tail = degs[len(degs) // 2 :]
        ratios = [self.ratio_by_degree[m] for m in tail]
        return all(b > a * (1 + 1e-9) for a, b in zip(ratios, ratios[1:]))

    def to_json_dict(self):
        return {
            "c_min": self.c_min,
            "witness": list(self.witness) if self.witness else None,
            "ratio_by_degree": {str(k): v for k, v in sorted(self.ratio_by_degree.items())},
            "s": self.s,
            "a": self.a,
            "growing": self.growing,
        }


def monomial_gevrey_check(
    f: TruncatedSeries, alpha, s, a
) -> BoundCheckReport:
    """Minimal C with |f_b| <= C A^{|b|} min{b_j!^{s/alpha_j} : alpha_j != 0}.

    On finite data the max ratio always exists; a mismatch between f and the
    monomial shows up as per-degree ratios that keep growing.
    """
    alpha = tuple(alpha)
    if len(alpha) != f.dim:
        raise ValueError("alpha length mismatch")
    if all(x == 0 for x in alpha):
        raise ValueError("alpha must be nonzero")
    s = float(s)
    a = float(a)
    if a <= 0:
        raise ValueError("A must be positive")
    log_a = math.log(a)
    best = None
    witness = None
    by_degree = {}
    for exps, c in f.terms.items():
        log_bound = sum(exps) * log_a + min(
            (s / aj) * math.lgamma(bj + 1)
            for aj, bj in zip(alpha, exps)
            if aj != 0
        )
        log_ratio = _log_magnitude(c) - log_bound
        ratio = math.exp(log_ratio)
        deg = sum(exps)
        if deg not in by_degree or ratio > by_degree[deg]:
            by_degree[deg] = ratio
        if best is None or ratio > best:
            best, witness = ratio, exps
    return BoundCheckReport(
        c_min=best if best is not None else 0.0,
        witness=witness,
        ratio_by_degree=by_degree,
        s=s,
        a=a,
    )


def isotropic_gevrey_check(f: TruncatedSeries, s, a) -> BoundCheckReport:
    """Minimal C with |f_b| <= C A^{|b|} (|b|!)^s over the stored window."""
    s = float(s)
    a = float(a)
    if a <= 0:
        raise ValueError("A must be positive")
    log_a = math.log(a)
    best = None
    witness = None
    by_degree = {}
    for exps, c in f.terms.items():
        deg = sum(exps)
        log_bound = deg * log_a + s * math.lgamma(deg + 1)
        ratio = math.exp(_log_magnitude(c) - log_bound)
        if deg not in by_degree or ratio > by_degree[deg]:
            by_degree[deg] = ratio
        if best is None or ratio > best:
            best, witness = ratio, exps
    return BoundCheckReport(
        c_min=best if best is not None else 0.0,
        witness=witness,
        ratio_by_degree=by_degree,
        s=s,
        a=a,
    )
