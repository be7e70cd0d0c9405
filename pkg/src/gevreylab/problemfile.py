"""Problem-file loading: TOML sections with series expressions as strings.

A solve file:

    [problem]
    dim = 1
    size = 1
    trunc = 30
    ell = ["1"]
    P = "x1"
    a = ["x1"]

    [rhs]
    c = ["x1"]
    mu = [["-1"]]
    # A = [["0"]], [[rhs.nonlinear]] with I/coeffs are optional

    [options]
    branch = "auto"
    padic_terms = 30
    radius = "1/2"
    proxy = "sum"

Rationals are written as strings like "3/2" (plain integers also work).
The other commands read their own single sections (see the cli module).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

try:
    import tomllib as _toml
except ModuleNotFoundError:  # Python 3.10
    import tomli as _toml

from .division import LinearForm
from .series import SeriesMatrix, SeriesVector
from .solver import PDEProblem, RightHandSide
from .textform import parse_series


class ProblemFileError(ValueError):
    """Malformed problem file, with the offending location in the message."""


def _rational(value, where: str) -> Fraction:
    try:
        if isinstance(value, bool):
            raise TypeError
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, str):
            return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError):
        pass
    raise ProblemFileError(f"{where}: expected a rational like '3/2', got {value!r}")


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise ProblemFileError(f"{where}: missing required key {key!r}")
    return table[key]


def load_toml(path) -> dict:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc}") from exc
    try:
        return _toml.loads(raw.decode("utf-8"))
    except (_toml.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ProblemFileError(f"{path}: {exc}") from exc


@dataclass
class SolveOptions:
    branch: str = "auto"
    padic_terms: int | None = None
    radius: Fraction = Fraction(1, 2)
    proxy: str = "sum"
    var_names: list = field(default_factory=list)


def _parse_expr(text, dim, trunc, var_names, where):
    if not isinstance(text, str):
        raise ProblemFileError(f"{where}: expected a series expression string")
    from .textform import SeriesSyntaxError

    try:
        return parse_series(text, dim, trunc, var_names)
    except SeriesSyntaxError as exc:
        raise ProblemFileError(f"{where}: {exc}") from exc


def problem_from_dict(doc: dict, trunc_override=None) -> tuple:
    """Build (PDEProblem, SolveOptions) from a parsed solve file."""
    if "problem" not in doc:
        raise ProblemFileError("missing [problem] section")
    prob = doc["problem"]
    dim = _require(prob, "dim", "[problem]")
    if not isinstance(dim, int) or dim < 1:
        raise ProblemFileError("[problem].dim must be a positive integer")
    size = prob.get("size", 1)
    if not isinstance(size, int) or size < 1:
        raise ProblemFileError("[problem].size must be a positive integer")
    trunc = trunc_override or _require(prob, "trunc", "[problem]")
    if not isinstance(trunc, int) or trunc < 1:
        raise ProblemFileError("[problem].trunc must be a positive integer")
    var_names = prob.get("vars") or [f"x{j + 1}" for j in range(dim)]
    if len(var_names) != dim:
        raise ProblemFileError("[problem].vars must name every variable")
    weights = prob.get("ell") or [1] * dim
    ell = LinearForm([_rational(w, "[problem].ell") for w in weights])
    if ell.dim != dim:
        raise ProblemFileError("[problem].ell must have one weight per variable")

    P = _parse_expr(_require(prob, "P", "[problem]"), dim, trunc, var_names,
                    "[problem].P")
    a_texts = _require(prob, "a", "[problem]")
    if len(a_texts) != dim:
        raise ProblemFileError("[problem].a needs one coefficient per variable")
    a = [_parse_expr(t, dim, trunc, var_names, f"[problem].a[{i}]")
         for i, t in enumerate(a_texts)]

    if "rhs" not in doc:
        raise ProblemFileError("missing [rhs] section")
    rhs_tbl = doc["rhs"]
    c_texts = _require(rhs_tbl, "c", "[rhs]")
    if len(c_texts) != size:
        raise ProblemFileError("[rhs].c needs one expression per component")
    c = SeriesVector(
        [_parse_expr(t, dim, trunc, var_names, f"[rhs].c[{i}]")
         for i, t in enumerate(c_texts)]
    )
    mu_rows = _require(rhs_tbl, "mu", "[rhs]")
    mu = [[_rational(v, "[rhs].mu") for v in row] for row in mu_rows]
    A = None
    if "A" in rhs_tbl:
        A = SeriesMatrix(
            [
                [_parse_expr(t, dim, trunc, var_names, "[rhs].A") for t in row]
                for row in rhs_tbl["A"]
            ]
        )
    nonlinear = []
    for entry in rhs_tbl.get("nonlinear", []):
        index = tuple(_require(entry, "I", "[rhs.nonlinear]"))
        coeffs = _require(entry, "coeffs", "[rhs.nonlinear]")
        vec = SeriesVector(
            [_parse_expr(t, dim, trunc, var_names, "[rhs.nonlinear].coeffs")
             for t in coeffs]
        )
        nonlinear.append((index, vec))

    try:
        rhs = RightHandSide(c, mu, A, nonlinear)
        problem = PDEProblem(P, a, rhs, ell, trunc)
    except ValueError as exc:
        raise ProblemFileError(str(exc)) from exc

    opts_tbl = doc.get("options", {})
    options = SolveOptions(var_names=list(var_names))
    options.branch = opts_tbl.get("branch", "auto")
    if options.branch not in ("auto", "divergent", "convergent"):
        raise ProblemFileError("[options].branch must be auto|divergent|convergent")
    if "padic_terms" in opts_tbl:
        options.padic_terms = int(opts_tbl["padic_terms"])
    if "radius" in opts_tbl:
        options.radius = _rational(opts_tbl["radius"], "[options].radius")
    options.proxy = opts_tbl.get("proxy", "sum")
    if options.proxy not in ("sum", "max"):
        raise ProblemFileError("[options].proxy must be sum|max")
    return problem, options


def load_problem(path, trunc_override=None) -> tuple:
    return problem_from_dict(load_toml(path), trunc_override)
