"""Numeric Nagumo norms on polydiscs, inequality checks, and the majorant
sequence driving the divergence bound.

Norms are supremum lower bounds over finite grids.  Grid points are exact:
radial magnitudes come from a nested dyadic sequence, angular positions from
rational points on the unit circle (tangent half-angle parametrization), so
series are evaluated in exact Gaussian-rational arithmetic, rescaled to pure
integers for speed, and converted to float only at the very end.  Growing
the sample counts only ever extends the grid, so the computed norm is
monotone under refinement.

Floating point lives in this module alone; everything upstream is exact.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

from .rationals import GaussianRational
from .series import SeriesMatrix, SeriesVector, TruncatedSeries

E_UPPER = Fraction(27183, 10000)  # rational upper bound of e, keeps z_n exact


@dataclass(frozen=True)
class PolyRadius:
    """Polydisc radii; the weight plateau is pinned at half of each radius."""

    r: tuple

    def __init__(self, r: Sequence):
        rs = tuple(Fraction(x) for x in r)
        if not rs or any(x <= 0 for x in rs):
            raise ValueError("all radii must be positive")
        object.__setattr__(self, "r", rs)

    @property
    def dim(self) -> int:
        return len(self.r)

    @property
    def rho(self) -> tuple:
        return tuple(x / 2 for x in self.r)


@dataclass(frozen=True)
class NagumoConfig:
    """Grid resolution; prefixes of fixed sequences, so configs nest."""

    radial: int = 8
    angular: int = 8

    def __post_init__(self):
        if self.radial < 8 or self.angular < 8:
            raise ValueError("sample counts must be at least 8")

    def refined(self, extra: int = 4) -> "NagumoConfig":
        return NagumoConfig(self.radial + extra, self.angular + extra)


def d_weight(x_abs, r):
    """The distance weight: r - |x| beyond the half-radius plateau, else r/2."""
    if x_abs < 0:
        raise ValueError("|x| must be non-negative")
    if x_abs >= r:
        raise ValueError("the point lies outside the open disc")
    half = r / 2
    return r - x_abs if x_abs >= half else half


def _radial_sequence(n: int):
    """First n dyadic fractions 1/2, 1/4, 3/4, 1/8, 3/8, ...; prefixes nest."""
    out = []
    level = 1
    while len(out) < n:
        den = 2 ** level
        for num in range(1, den, 2):
            out.append(Fraction(num, den))
            if len(out) == n:
                return out
        level += 1
    return out


def _angle_sequence(n: int):
    """First n exact unit-circle points (re, im, den) with re^2+im^2 = den^2.

    Tangent half-angle parameters inf, 0, 1, -1, 2, -2, 1/2, -1/2, 3, ...
    spread over the circle and nest as prefixes.
    """
    params = [None, Fraction(0)]
    k = 1
    while len(params) < n:
        params += [Fraction(k), Fraction(-k)]
        if k > 1:
            params += [Fraction(1, k), Fraction(-1, k)]
        k += 1
    out = []
    for t in params[:n]:
        if t is None:
            out.append((-1, 0, 1))
            continue
        p, q = t.numerator, t.denominator
        re, im, den = q * q - p * p, 2 * p * q, q * q + p * p
        g = math.gcd(math.gcd(abs(re), abs(im)), den)
        out.append((re // g, im // g, den // g))
    return out


def _coeff_ints(f: TruncatedSeries):
    """Scale coefficients to Gaussian integers over a common denominator."""
    scale = 1
    for c in f.terms.values():
        if isinstance(c, GaussianRational):
            scale = math.lcm(scale, c.real.denominator, c.imag.denominator)
        else:
            scale = math.lcm(scale, c.denominator)
    rows = []
    for exps, c in f.terms.items():
        if isinstance(c, GaussianRational):
            rows.append((int(c.real * scale), int(c.imag * scale), exps))
        else:
            rows.append((int(c * scale), 0, exps))
    return rows, scale


def _big_ratio(num: int, den: int) -> float:
    try:
        return num / den
    except OverflowError:
        shift = max(num.bit_length(), den.bit_length()) - 900
        return (num >> shift) / ((den >> shift) or 1)


def _thread_cap() -> int:
    raw = os.environ.get("GEVREYLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def nagumo_norm(f: TruncatedSeries, m: int, pr: PolyRadius, cfg: NagumoConfig) -> float:
    """Grid lower bound of sup |f(x)| prod_j d_{r_j}(|x_j|)^m.

    Series values at the rational grid points are exact; only the final
    magnitude and weight product are floats.
    """
    if m < 0:
        raise ValueError("the weight exponent must be non-negative")
    if pr.dim != f.dim:
        raise ValueError("polyradius dimension mismatch")
    if f.is_zero:
        return 0.0
    coeffs, coeff_scale = _coeff_ints(f)
    dim = f.dim
    maxdeg = [max(e[j] for e in f.terms) for j in range(dim)]
    radial = _radial_sequence(cfg.radial)
    angles = _angle_sequence(cfg.angular)

    axes = []
    for j in range(dim):
        samples = []
        for t in radial:
            rho = t * pr.r[j]
            p, q = rho.numerator, rho.denominator
            weight = float(d_weight(rho, pr.r[j])) ** m
            for ure, uim, uden in angles:
                base = q * uden
                powers = [(1, 0)]
                for _ in range(maxdeg[j]):
                    a, b = powers[-1]
                    powers.append((a * p * ure - b * p * uim,
                                   a * p * uim + b * p * ure))
                table = [
                    (a * base ** (maxdeg[j] - e), b * base ** (maxdeg[j] - e))
                    for e, (a, b) in enumerate(powers)
                ]
                samples.append((table, base ** maxdeg[j], weight))
        axes.append(samples)

    def scan(first_axis_samples):
        best = 0.0
        for combo in itertools.product(first_axis_samples, *axes[1:]):
            den = coeff_scale
            weight = 1.0
            for _, sample_den, w in combo:
                den *= sample_den
                weight *= w
            re_acc = 0
            im_acc = 0
            for cre, cim, exps in coeffs:
                tre, tim = cre, cim
                for (table, _, _), e in zip(combo, exps):
                    a, b = table[e]
                    tre, tim = tre * a - tim * b, tre * b + tim * a
                re_acc += tre
                im_acc += tim
            if re_acc or im_acc:
                mag2 = re_acc * re_acc + im_acc * im_acc
                value = math.sqrt(_big_ratio(mag2, den * den))
                cand = value * weight
                if cand > best:
                    best = cand
        return best

    cap = _thread_cap()
    if cap > 1 and len(axes[0]) > 1:
        from concurrent.futures import ThreadPoolExecutor

        chunks = [axes[0][i::cap] for i in range(cap) if axes[0][i::cap]]
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            return max(pool.map(scan, chunks))
    return scan(axes[0])


def nagumo_norm_vector(v: SeriesVector, m: int, pr: PolyRadius, cfg: NagumoConfig) -> float:
    return max(nagumo_norm(s, m, pr, cfg) for s in v)


def nagumo_norm_matrix(mat: SeriesMatrix, m: int, pr: PolyRadius, cfg: NagumoConfig) -> float:
    return max(
        sum(nagumo_norm(mat[i, j], m, pr, cfg) for j in range(mat.size))
        for i in range(mat.size)
    )


# -- the three norm inequalities --------------------------------------------


@dataclass(frozen=True)
class InequalityRow:
    name: str
    axis: Optional[int]
    lhs: float
    rhs: float
    slack: float

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs * self.slack

    @property
    def margin(self) -> float:
        return self.rhs * self.slack - self.lhs

    def to_json_dict(self):
        return {
            "name": self.name,
            "axis": self.axis,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "margin": self.margin,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class Prop21Report:
    rows: tuple

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_json_dict(self):
        return {
            "all_passed": self.all_passed,
            "rows": [r.to_json_dict() for r in self.rows],
        }


def check_prop21(
    f: TruncatedSeries,
    g: TruncatedSeries,
    m: int,
    k: int,
    pr: PolyRadius,
    cfg: NagumoConfig,
    fine: Optional[NagumoConfig] = None,
    slack: float = 1.05,
) -> Prop21Report:
    """Check the product, derivative and shift inequalities on grids.

    Left sides use the coarse grid, right sides a strictly finer one, so
    only genuine inequalities pass: the left lower bound cannot exceed the
    true sup, while the right improves toward it.
    """
    from .division import shift as shift_op

    if fine is None:
        fine = cfg.refined()
    if not (fine.radial > cfg.radial and fine.angular > cfg.angular):
        raise ValueError("the right-hand grid must be strictly finer")
    rows = []
    f_m_fine = nagumo_norm(f, m, pr, fine)
    g_k_fine = nagumo_norm(g, k, pr, fine)
    rows.append(
        InequalityRow(
            name="product", axis=None,
            lhs=nagumo_norm(f * g, m + k, pr, cfg),
            rhs=f_m_fine * g_k_fine, slack=slack,
        )
    )
    for axis in range(f.dim):
        partial_const = math.e * (m + 1) * math.prod(
            float(pr.r[i]) / 2 for i in range(f.dim) if i != axis
        )
        rows.append(
            InequalityRow(
                name="derivative", axis=axis,
                lhs=nagumo_norm(f.partial(axis), m + 1, pr, cfg),
                rhs=partial_const * f_m_fine, slack=slack,
            )
        )
    for axis in range(f.dim):
        rows.append(
            InequalityRow(
                name="shift", axis=axis,
                lhs=nagumo_norm(shift_op(f, axis), m, pr, cfg),
                rhs=(4.0 / float(pr.r[axis])) * f_m_fine, slack=slack,
            )
        )
    return Prop21Report(tuple(rows))


# -- the majorant sequence ---------------------------------------------------


@dataclass(frozen=True)
class MajorantConstants:
    """Measured or user-chosen constants of the recursion, all rational.

    ``e_upper`` replaces Euler's number by a rational upper bound so the
    whole recurrence stays exact while still dominating.
    """

    m_inverse: Fraction
    norm_r: Fraction
    norm_q: Fraction
    a: Fraction
    h0: Fraction
    e_upper: Fraction = E_UPPER

    def __post_init__(self):
        for name in ("m_inverse", "norm_r", "norm_q", "a", "h0", "e_upper"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.m_inverse <= 0 or self.norm_r <= 0 or self.norm_q <= 0:
            raise ValueError("operator constants must be positive")
        if self.a < 0 or self.h0 < 0:
            raise ValueError("a and h0 must be non-negative")


def majorant_sequence(
    constants: MajorantConstants,
    cbar: Dict[int, Fraction],
    abar: Dict[int, Fraction],
    fbar: Dict[Tuple[int, int], Fraction],
    m_max: int,
) -> list:
    """z_1..z_{m_max} of the recursive majorant, exactly in rationals.

    Tables are the normalized norm tables: cbar[n] ~ |c_n|_n / n!,
    abar[m] ~ |A_m|_m / m!, fbar[(m, j)] ~ sum_{|I|=j} |A_{I,m}|_m / m!.
    Entry 0 of the returned list is a placeholder zero.
    """
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    mr = constants.m_inverse * constants.norm_r
    big_r, big_q = constants.norm_r, constants.norm_q
    gain = constants.e_upper * constants.a + constants.h0
    cbar = {n: Fraction(v) for n, v in cbar.items()}
    abar = {n: Fraction(v) for n, v in abar.items()}
    fbar = {key: Fraction(v) for key, v in fbar.items()}
    fact = [math.factorial(i) for i in range(m_max + 1)]
    z = [Fraction(0)] * (m_max + 1)

    power_memo: Dict[Tuple[int, int], Fraction] = {}

    def z_power_coeff(j: int, t: int) -> Fraction:
        """[tau^t] of (sum_i z_i tau^i)^j; indices involved are < current n."""
        if t < j:
            return Fraction(0)
        if j == 1:
            return z[t] if t < len(z) else Fraction(0)
        key = (j, t)
        if key not in power_memo:
            power_memo[key] = sum(
                (z[i] * z_power_coeff(j - 1, t - i) for i in range(1, t - j + 2)),
                Fraction(0),
            )
        return power_memo[key]

    for n in range(1, m_max + 1):
        total = cbar.get(n, Fraction(0))
        total += big_r * gain * sum(
            (big_q ** (n - k) / fact[n - k] * z[k - 1] for k in range(2, n + 1)),
            Fraction(0),
        )
        total += big_r * sum(
            (
                big_q ** (n - k) / fact[n - k]
                * sum(
                    (abar.get(k - j, Fraction(0)) * z[j] for j in range(1, k + 1)),
                    Fraction(0),
                )
                for k in range(1, n)
            ),
            Fraction(0),
        )
        total += big_r * sum(
            (abar.get(n - j, Fraction(0)) * z[j] for j in range(1, n)),
            Fraction(0),
        )
        if fbar:
            star_total = Fraction(0)
            for k in range(2, n + 1):
                inner = Fraction(0)
                for (m_idx, j_idx), value in fbar.items():
                    if j_idx >= 2 and 0 <= m_idx <= k - j_idx:
                        inner += value * z_power_coeff(j_idx, k - m_idx)
                star_total += big_q ** (n - k) / fact[n - k] * inner
            total += big_r * star_total
        z[n] = mr * total
    return z


@dataclass(frozen=True)
class DominanceRow:
    n: int
    scaled_norm: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.scaled_norm <= self.bound

    def to_json_dict(self):
        return {
            "n": self.n,
            "scaled_norm": self.scaled_norm,
            "bound": self.bound,
            "ok": self.ok,
        }


def dominance_rows(
    scaled_norms: Sequence[float], z: Sequence[Fraction], slack: float = 1.05
) -> list:
    """Diagnostic comparison |y_n|_n / n! against z_n (1 + slack margin).

    The proof constants assume radii the finite grids only approximate, so
    these rows report margins; they are never hard assertions.
    """
    rows = []
    for n in range(1, min(len(scaled_norms), len(z))):
        rows.append(
            DominanceRow(
                n=n,
                scaled_norm=scaled_norms[n],
                bound=float(z[n]) * slack,
            )
        )
    return rows


def dominance_csv(rows: Sequence[DominanceRow]) -> str:
    """CSV rendering (n, scaled norm, majorant bound) of a dominance report."""
    lines = ["n,scaled_norm,z_bound"]
    for row in rows:
        lines.append(f"{row.n},{row.scaled_norm!r},{row.bound!r}")
    return "\n".join(lines) + "\n"
