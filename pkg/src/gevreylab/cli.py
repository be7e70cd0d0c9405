"""Batch front door: parse a problem file, dispatch, emit reports.

Exit codes: 0 success, 1 malformed input, 2 theorem-hypothesis refusal.
Reports are JSON (series in the canonical text grammar); norm sequences can
additionally be written as CSV.  Identical inputs produce byte-identical
artifacts.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .division import LinearForm, p_adic_decompose, weierstrass_divide
from .gevrey import estimate_order, norm_sequence
from .nagumo import NagumoConfig, PolyRadius, check_prop21
from .problemfile import ProblemFileError, _parse_expr, _rational, load_toml, problem_from_dict
from .solver import HypothesisRefusal, solve, solve_convergent, solve_padic
from .textform import SeriesSyntaxError, series_to_text


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _write_norms_csv(path: Path, values) -> None:
    lines = ["n,M_n"] + [f"{n},{v!r}" for n, v in enumerate(values)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _gevrey_block(decomposition, radius, proxy):
    ns = norm_sequence(decomposition, proxy=proxy, radius=radius)
    try:
        est = estimate_order(ns)
    except ValueError:
        return None, ns
    return est.to_json_dict(), ns


def _cmd_solve(doc, args, out_dir: Path) -> int:
    from .solver import default_terms

    problem, options = problem_from_dict(doc, args.trunc)
    terms = args.padic_terms or options.padic_terms
    if args.padic_terms is None and terms is not None:
        # a file-level term count calibrated for the file's trunc must not
        # outrun an overridden, smaller window
        terms = min(terms, default_terms(problem))
    radius = Fraction(args.radius) if args.radius else options.radius
    proxy = args.proxy or options.proxy
    if options.branch == "divergent":
        report = solve_padic(problem, terms)
    elif options.branch == "convergent":
        report = solve_convergent(problem, terms)
    else:
        report = solve(problem, terms)
    payload = report.to_json_dict()
    payload["gevrey"] = []
    norm_values = []
    for dec in report.decompositions:
        block, ns = _gevrey_block(dec, radius, proxy)
        payload["gevrey"].append(block)
        norm_values.append(ns.values)
    _write_json(out_dir / "solve.json", payload)
    if args.format == "csv":
        for i, values in enumerate(norm_values):
            _write_norms_csv(out_dir / f"norms_component{i}.csv", values)
    summary = payload["gevrey"][0]
    s_text = "n/a" if summary is None else f"{summary['s_hat']:.3f}"
    print(
        f"solved [{report.branch}] residual_vanishes={report.residual_vanishes} "
        f"s_hat={s_text} -> {out_dir / 'solve.json'}"
    )
    return 0


def _series_section(doc, section, keys, args):
    if section not in doc:
        raise ProblemFileError(f"missing [{section}] section")
    tbl = doc[section]
    dim = tbl.get("dim")
    if not isinstance(dim, int) or dim < 1:
        raise ProblemFileError(f"[{section}].dim must be a positive integer")
    trunc = args.trunc or tbl.get("trunc")
    if not isinstance(trunc, int) or trunc < 1:
        raise ProblemFileError(f"[{section}].trunc must be a positive integer")
    var_names = tbl.get("vars") or [f"x{j + 1}" for j in range(dim)]
    weights = tbl.get("ell") or [1] * dim
    ell = LinearForm([_rational(w, f"[{section}].ell") for w in weights])
    parsed = {}
    for key in keys:
        if key not in tbl:
            raise ProblemFileError(f"[{section}]: missing required key {key!r}")
        parsed[key] = _parse_expr(tbl[key], dim, trunc, var_names,
                                  f"[{section}].{key}")
    return tbl, dim, trunc, ell, parsed


def _cmd_decompose(doc, args, out_dir: Path) -> int:
    tbl, dim, trunc, ell, parsed = _series_section(doc, "decompose", ["f", "P"], args)
    terms = args.padic_terms or tbl.get("terms")
    if terms is None:
        terms = max(1, trunc // max(1, parsed["P"].order() or 1))
    dec = p_adic_decompose(parsed["f"], parsed["P"], ell, int(terms))
    payload = dec.to_json_dict()
    _write_json(out_dir / "decompose.json", payload)
    if args.format == "csv":
        radius = Fraction(args.radius) if args.radius else Fraction(1, 2)
        ns = norm_sequence(dec, proxy=args.proxy or "sum", radius=radius)
        _write_norms_csv(out_dir / "decompose_norms.csv", ns.values)
    print(f"decomposed into {len(dec)} terms -> {out_dir / 'decompose.json'}")
    return 0


def _cmd_divide(doc, args, out_dir: Path) -> int:
    tbl, dim, trunc, ell, parsed = _series_section(doc, "divide", ["g", "P"], args)
    q, r = weierstrass_divide(parsed["g"], parsed["P"], ell)
    payload = {
        "nu": list(r.alpha),
        "q": series_to_text(q),
        "q_valid_order": q.trunc,
        "r": series_to_text(r.series),
        "r_valid_order": r.series.trunc,
    }
    _write_json(out_dir / "divide.json", payload)
    print(f"divided: q has {len(q.terms)} terms, r has {len(r.series.terms)} "
          f"-> {out_dir / 'divide.json'}")
    return 0


def _cmd_gevrey(doc, args, out_dir: Path) -> int:
    tbl, dim, trunc, ell, parsed = _series_section(doc, "gevrey", ["f", "P"], args)
    terms = args.padic_terms or tbl.get("terms")
    if terms is None:
        terms = max(1, trunc // max(1, parsed["P"].order() or 1))
    radius = Fraction(args.radius) if args.radius else _rational(
        tbl.get("radius", "1/2"), "[gevrey].radius"
    )
    proxy = args.proxy or tbl.get("proxy", "sum")
    dec = p_adic_decompose(parsed["f"], parsed["P"], ell, int(terms))
    ns = norm_sequence(dec, proxy=proxy, radius=radius)
    try:
        est = estimate_order(ns).to_json_dict()
    except ValueError as exc:
        est = {"error": str(exc)}
    payload = {
        "proxy": proxy,
        "radius": str(radius),
        "norms": list(ns.values),
        "estimate": est,
    }
    _write_json(out_dir / "gevrey.json", payload)
    _write_norms_csv(out_dir / "gevrey_norms.csv", ns.values)
    s_text = est.get("s_hat", "n/a")
    print(f"gevrey estimate s_hat={s_text} -> {out_dir / 'gevrey.json'}")
    return 0


def _cmd_nagumo(doc, args, out_dir: Path) -> int:
    if "nagumo" not in doc:
        raise ProblemFileError("missing [nagumo] section")
    tbl = doc["nagumo"]
    dim = tbl.get("dim")
    if not isinstance(dim, int) or dim < 1:
        raise ProblemFileError("[nagumo].dim must be a positive integer")
    trunc = args.trunc or tbl.get("trunc")
    if not isinstance(trunc, int) or trunc < 1:
        raise ProblemFileError("[nagumo].trunc must be a positive integer")
    var_names = tbl.get("vars") or [f"x{j + 1}" for j in range(dim)]
    f = _parse_expr(tbl.get("f", "0"), dim, trunc, var_names, "[nagumo].f")
    g = _parse_expr(tbl.get("g", "0"), dim, trunc, var_names, "[nagumo].g")
    radii = tbl.get("r") or [1] * dim
    pr = PolyRadius([_rational(x, "[nagumo].r") for x in radii])
    cfg = NagumoConfig(int(tbl.get("radial", 8)), int(tbl.get("angular", 8)))
    m = int(tbl.get("m", 0))
    k = int(tbl.get("k", 0))
    slack = float(tbl.get("slack", 1.05))
    report = check_prop21(f, g, m, k, pr, cfg, slack=slack)
    _write_json(out_dir / "nagumo.json", report.to_json_dict())
    print(f"nagumo inequalities all_passed={report.all_passed} "
          f"-> {out_dir / 'nagumo.json'}")
    return 0


_COMMANDS = {
    "solve": _cmd_solve,
    "decompose": _cmd_decompose,
    "divide": _cmd_divide,
    "gevrey": _cmd_gevrey,
    "nagumo-check": _cmd_nagumo,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gevreylab",
        description="Exact series solver and Gevrey diagnostics for singular "
        "first-order PDE systems",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("file", help="TOML problem file")
    parser.add_argument("--trunc", type=int, default=None,
                        help="override the truncation order")
    parser.add_argument("--padic-terms", type=int, default=None,
                        help="number of decomposition levels")
    parser.add_argument("--radius", default=None,
                        help="norm-proxy radius, e.g. 1/2")
    parser.add_argument("--proxy", choices=["sum", "max"], default=None)
    parser.add_argument("--out", default=".", help="artifact directory")
    parser.add_argument("--format", choices=["json", "csv"], default="json",
                        help="csv additionally writes norm-sequence tables")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        doc = load_toml(args.file)
        return _COMMANDS[args.command](doc, args, out_dir)
    except HypothesisRefusal as refusal:
        payload = {"refusal": str(refusal), "details": refusal.details}
        _write_json(out_dir / "refusal.json", payload)
        print(f"refused: {refusal}", file=sys.stderr)
        return 2
    except (ProblemFileError, SeriesSyntaxError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
