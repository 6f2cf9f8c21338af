"""Command-line entry point: ``wgnlab <command> [flags]``.

Exit codes: 0 success or admissible, 1 inadmissible or failed check, 2 usage error.
JSON output carries ``schema: 1``, keeps field order fixed and prints floats
with 12 significant digits, so identical inputs give byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

SCHEMA = 1
SIG_DIGITS = 12


class UsageError(Exception):
    pass


def rational(text: str) -> Fraction:
    """Exact rational from ``3/2``, ``-1`` or ``0.25``."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a number or n/m rational, got {text!r}") from None


def _clean(obj):
    """Round floats to 12 significant digits and make the structure JSON-safe."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        obj = float(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(command: str, payload: dict) -> str:
    doc = {"schema": SCHEMA, "command": command}
    doc.update(payload)
    return json.dumps(_clean(doc), indent=2) + "\n"


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.{SIG_DIGITS}g}" if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _gnuplot_text(header: list[str], rows) -> str:
    lines = ["# " + " ".join(header)]
    for row in rows:
        lines.append(" ".join(f"{float(v):.{SIG_DIGITS}g}" for v in row))
    return "\n".join(lines) + "\n"


def _emit_table(args, header, rows) -> None:
    rows = list(rows)
    if getattr(args, "csv", None):
        _write(args.csv, _csv_text(header, rows))
    if getattr(args, "gnuplot", None):
        _write(args.gnuplot, _gnuplot_text(header, rows))


# config ----------------------------------------------------------------

CONFIG_KEYS = {"d": int, "L": float, "N": int, "corpus": str}


def load_config(path: str) -> dict:
    """Flat ``key = value`` file (``#`` comments) with grid and corpus presets."""
    out = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path!r}: {exc.strerror}") from None
    with fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"--config {path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in CONFIG_KEYS:
                raise UsageError(f"--config {path}:{lineno}: unknown key {key!r}; "
                                 f"expected one of {sorted(CONFIG_KEYS)}")
            try:
                out[key] = CONFIG_KEYS[key](value.strip('"'))
            except ValueError:
                raise UsageError(f"--config {path}:{lineno}: bad value for {key!r}: {value!r}") from None
    return out


def _grid_settings(args) -> tuple[int, float, int, str]:
    cfg = load_config(args.config) if getattr(args, "config", None) else {}
    d = args.d if args.d is not None else cfg.get("d")
    L = args.L if args.L is not None else cfg.get("L", 10.0)
    N = args.N if args.N is not None else cfg.get("N", 256)
    corpus = getattr(args, "corpus", None) or cfg.get("corpus", "zero-moment")
    if d is None:
        raise UsageError("--d is required (flag or config key 'd')")
    return int(d), float(L), int(N), corpus


# commands --------------------------------------------------------------

def _params(args, d: int | None = None):
    from .engine import GNParams

    return GNParams(int(args.d if d is None else d), float(args.p), float(args.q), float(args.r), float(args.s), float(args.t),
                    float(args.theta), float(args.alpha), float(args.beta), float(args.gamma),
                    args.derivative, "power_law" if args.family == "power" else "bracket")


def _admissibility_payload(adm) -> dict:
    return {
        "admissible": adm.admissible,
        "failed_conditions": adm.failed,
        "conditions": [{"name": c.name, "satisfied": c.satisfied, "slack": c.slack} for c in adm.conditions],
        "derived": adm.derived,
        "flags": adm.flags,
    }


def cmd_check(args) -> int:
    from .engine import check

    adm = check(_params(args))
    _write(args.out, dumps("check", _admissibility_payload(adm)))
    return 0 if adm.admissible else 1


def cmd_verify(args) -> int:
    from .engine import check, verify_inequality
    from .grid import build_grid, corpus_functions

    d, L, N, preset = _grid_settings(args)
    P = _params(args, d)
    adm = check(P)
    if not adm.admissible:
        _write(args.out, dumps("verify", _admissibility_payload(adm)))
        return 1
    g = build_grid(d, L, N)
    rep = verify_inequality(P, corpus_functions(g, preset), g, refine=not args.no_refine,
                            dilations=tuple(args.dilations))
    ratios_ok = all(math.isfinite(r.ratio) for r in rep.rows)
    payload = {
        "admissible": True,
        "grid": {"d": d, "L": L, "N": N, "corpus": preset},
        "max_ratio": rep.max_ratio,
        "refinement_drift": rep.refinement_drift,
        "dilation_drift": rep.dilation_drift,
        "singular_share": rep.singular_share,
        "edge_share": rep.edge_share,
        "rows": [{"label": r.label, "lhs": r.lhs, "rhs": r.rhs, "ratio": r.ratio} for r in rep.rows],
        "params": rep.params,
    }
    _write(args.out, dumps("verify", payload))
    _emit_table(args, ["index", "lhs", "rhs", "ratio"],
                [(i, r.lhs, r.rhs, r.ratio) for i, r in enumerate(rep.rows)])
    return 0 if ratios_ok else 1


def cmd_muckenhoupt(args) -> int:
    from .weights import DIVERGENCE_FACTOR, Weight, apq_check, estimate_apq_constant

    kinds = {"power": "power_law", "bracket": "bracket"}
    kv, kw = kinds[args.kind_v], kinds[args.kind_w]
    p, q, alpha, d = float(args.p), float(args.q), float(args.alpha), int(args.d)
    v, w = Weight(kv, float(args.gamma_v)), Weight(kw, float(args.gamma_w))
    payload = {"d": d, "p": p, "q": q, "alpha": alpha,
               "v": {"kind": kv, "gamma": v.gamma}, "w": {"kind": kw, "gamma": w.gamma}}
    in_class = None
    if kv == kw:
        ver = apq_check(kv, v.gamma, w.gamma, p, q, alpha, d)
        in_class = ver.in_class
        payload["closed_form"] = {"in_class": ver.in_class, "failed_conditions": ver.failed_conditions,
                                  "margin": ver.margin}
    else:
        payload["closed_form"] = None
    est = estimate_apq_constant(v, w, p, q, alpha, d, decades=args.decades, per_decade=args.per_decade)
    payload["estimate"] = {"value": est.value, "diverged": est.diverged,
                           "divergence_factor_per_decade": DIVERGENCE_FACTOR}
    _write(args.out, dumps("muckenhoupt", payload))
    _emit_table(args, ["radius", "running_max"], [(10.0**k, m) for k, m in est.history])
    verdict = in_class if in_class is not None else not est.diverged
    return 0 if verdict else 1


def _demo_function(name: str, g):
    from .grid import TestFunction, sample
    from .sparse import indicator_ball

    e1 = np.zeros(g.dim)
    e1[0] = 1.0
    if name == "ball":
        return indicator_ball(g, 0.0, g.extent / 10)
    if name == "two-balls":
        return indicator_ball(g, -g.extent / 8 * e1, g.extent / 10) + indicator_ball(g, g.extent / 6 * e1, g.extent / 20)
    f = sample(TestFunction.gaussian(0.0, g.extent / 10), g, warn=False)
    return f.with_values(np.abs(f.values))


def cmd_sparse_demo(args) -> int:
    from .grid import build_grid
    from .sparse import build_lattices, build_sparse_family, check_sparsity, domination_report

    d, L, N, _ = _grid_settings(args)
    g = build_grid(d, L, N)
    f = _demo_function(args.function, g)
    alpha = float(args.alpha)
    if not 0 < alpha < d:
        raise UsageError(f"--alpha must lie in ]0, {d}[")
    lats = build_lattices(d, g)
    checks = [check_sparsity(build_sparse_family(f, lat, float(args.ratio))) for lat in lats]
    rep = domination_report(f, alpha, float(args.ratio), lats)
    ok = all(c.passed for c in checks) and all(math.isfinite(x) for x in
                                               (rep.lower_constant, rep.upper_constant, rep.sparse_constant))
    payload = {
        "grid": {"d": d, "L": L, "N": N}, "function": args.function, "alpha": alpha,
        "ratio": float(args.ratio), "eta": 1 - 1 / float(args.ratio),
        "sparsity": [{"passed": c.passed, "worst_fraction": c.worst_fraction, "disjoint": c.disjoint}
                     for c in checks],
        "lower_constant": rep.lower_constant, "upper_constant": rep.upper_constant,
        "sparse_constant": rep.sparse_constant, "worst_point": list(rep.worst_point),
    }
    _write(args.out, dumps("sparse-demo", payload))
    pts = g.points().reshape(-1, d)
    _emit_table(args, [f"x{i}" for i in range(d)] + ["riesz_potential", "dyadic_sum", "sparse_sum"],
                [tuple(p) + (a, b, c) for p, a, b, c in zip(pts, rep.potential.reshape(-1),
                                                            rep.dyadic_sum.reshape(-1), rep.sparse_sum.reshape(-1))])
    return 0 if ok else 1


def cmd_constants(args) -> int:
    from .special import multiplier_constants

    d = int(args.d)
    taus = np.geomspace(float(args.tau_min), float(args.tau_max), int(args.points))
    rows, violations = [], 0
    for t in taus:
        mc = multiplier_constants(float(t), d)
        ok = abs(mc.alpha) <= mc.p_bound
        violations += not ok
        rows.append((float(t), abs(mc.alpha), abs(mc.beta), mc.p_bound, int(ok)))
    _write(args.out, dumps("constants", {"d": d, "points": len(rows), "violations": violations,
                                         "tau_min": float(taus[0]), "tau_max": float(taus[-1])}))
    _emit_table(args, ["tau", "abs_alpha", "abs_beta", "P_d", "bound_holds"], rows)
    return 0 if violations == 0 else 1


def cmd_mixed(args) -> int:
    from .engine import MixedParams, check_mixed, separable_reference_ratio, verify_mixed
    from .grid import GridFunction, TestFunction, build_grid, sample
    from .norms import ProductGridFunction

    M = MixedParams(float(args.p), float(args.q), float(args.s), float(args.gamma), int(args.d), int(args.m),
                    args.derivative)
    adm = check_mixed(M)
    if not adm.admissible:
        payload = _admissibility_payload(adm)
        if "gamma window ]s, d/p'[ nonempty" in adm.failed:
            payload["message"] = "empty admissible γ window"
        _write(args.out, dumps("mixed", payload))
        return 1
    gx = build_grid(M.d, float(args.L), int(args.N))
    gy = build_grid(M.m, float(args.L), int(args.Ny))
    w = gx.extent / 5
    e1 = np.zeros(M.d)
    e1[0] = 1.0
    g = sample(TestFunction.modulated_gaussian(0.0, w, (4 / w) * e1), gx, warn=False)
    h = sample(TestFunction.gaussian(0.0, gy.extent / 8), gy, warn=False)
    family = [ProductGridFunction.separable(g, h)]
    # non-separable member: the x-profile width depends on y
    cols = []
    for y in gy.points().reshape(-1, M.m):
        wy = w * (1 + 0.3 * math.tanh(float(y[0])))
        tf = TestFunction.modulated_gaussian(0.0, wy, (4 / wy) * e1)
        cols.append(tf(gx.points()).reshape(-1) * math.exp(-math.pi * float(y @ y) / (gy.extent / 8) ** 2))
    family.append(ProductGridFunction(gx, gy, np.stack(cols, axis=1)))
    rep = verify_mixed(M, family)
    ref = separable_reference_ratio(M, g)
    payload = {"admissible": True, "window": adm.derived["window"],
               "rows": [{"label": r.label, "lhs": r.lhs, "rhs": r.rhs, "ratio": r.ratio} for r in rep.rows],
               "separable_reference": ref,
               "separable_mismatch": abs(rep.rows[0].ratio / ref - 1),
               "swapped_over_lhs_max": rep.extra["swapped_over_lhs_max"]}
    _write(args.out, dumps("mixed", payload))
    return 0 if all(math.isfinite(r.ratio) for r in rep.rows) else 1


# parser ----------------------------------------------------------------

def _add_output(p: argparse.ArgumentParser, tables: bool = True) -> None:
    p.add_argument("--out", help="JSON output path (default stdout)")
    if tables:
        p.add_argument("--csv", help="CSV output path")
        p.add_argument("--gnuplot", help="whitespace-delimited data file for gnuplot")


def _add_gn_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=("power", "bracket"), default="power", help="weight family")
    p.add_argument("--derivative", choices=("riesz", "bessel"), default="riesz")
    for name in ("p", "q", "r", "s", "t", "theta"):
        p.add_argument(f"--{name}", type=rational, required=True)
    for name in ("alpha", "beta", "gamma"):
        p.add_argument(f"--{name}", type=rational, default=Fraction(0))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wgnlab", description="Weighted Gagliardo-Nirenberg laboratory.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="admissibility of a parameter tuple")
    p.add_argument("--d", type=int, required=True)
    _add_gn_params(p)
    _add_output(p, tables=False)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify", help="measure inequality ratios on a corpus")
    p.add_argument("--d", type=int)
    p.add_argument("--L", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--corpus", choices=("smoke", "standard", "zero-moment", "dilation-family"))
    p.add_argument("--config", help="key = value file with d, L, N, corpus")
    p.add_argument("--no-refine", action="store_true", help="skip the 2N refinement run")
    p.add_argument("--dilations", type=float, nargs="*", default=[])
    _add_gn_params(p)
    _add_output(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("muckenhoupt", help="closed-form and numerical A_{p,q}^alpha verdicts")
    p.add_argument("--kind-v", choices=("power", "bracket"), required=True)
    p.add_argument("--gamma-v", type=rational, required=True)
    p.add_argument("--kind-w", choices=("power", "bracket"), required=True)
    p.add_argument("--gamma-w", type=rational, required=True)
    for name in ("p", "q", "alpha"):
        p.add_argument(f"--{name}", type=rational, required=True)
    p.add_argument("--d", type=int, required=True, choices=(1, 2, 3))
    p.add_argument("--decades", type=int, default=4)
    p.add_argument("--per-decade", type=int, default=1)
    _add_output(p)
    p.set_defaults(func=cmd_muckenhoupt)

    p = sub.add_parser("sparse-demo", help="sparse families and Riesz potential domination")
    p.add_argument("--d", type=int)
    p.add_argument("--L", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--config", help="key = value file with d, L, N")
    p.add_argument("--function", choices=("ball", "two-balls", "gaussian"), default="ball")
    p.add_argument("--alpha", type=rational, required=True)
    p.add_argument("--ratio", type=rational, default=Fraction(2))
    _add_output(p)
    p.set_defaults(func=cmd_sparse_demo)

    p = sub.add_parser("constants", help="imaginary-power multiplier constants against P_d")
    p.add_argument("--d", type=int, required=True, choices=(1, 2, 3))
    p.add_argument("--tau-min", type=rational, default=Fraction(1, 10))
    p.add_argument("--tau-max", type=rational, required=True)
    p.add_argument("--points", type=int, default=50)
    _add_output(p)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("mixed", help="mixed-norm inequality with bracket weights")
    p.add_argument("--d", type=int, required=True, choices=(1, 2, 3))
    p.add_argument("--m", type=int, default=1, choices=(1, 2, 3))
    for name in ("p", "q", "s", "gamma"):
        p.add_argument(f"--{name}", type=rational, required=True)
    p.add_argument("--derivative", choices=("riesz", "bessel"), default="riesz")
    p.add_argument("--L", type=float, default=10.0)
    p.add_argument("--N", type=int, default=32)
    p.add_argument("--Ny", type=int, default=16)
    _add_output(p, tables=False)
    p.set_defaults(func=cmd_mixed)
    return ap


def _validate(args) -> None:
    if args.command == "check" and args.d not in (1, 2, 3):
        raise UsageError("--d must be 1, 2 or 3")
    for name in ("p", "q", "r"):
        val = getattr(args, name, None)
        if val is not None and not val > 1:
            raise UsageError(f"--{name} must exceed 1, got {val}")
    if args.command == "constants" and not (0 < args.tau_min < args.tau_max):
        raise UsageError("need 0 < --tau-min < --tau-max")
    if args.command == "sparse-demo" and not args.ratio > 1:
        raise UsageError("--ratio must exceed 1")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    try:
        _validate(args)
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"wgnlab: error: {exc}\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(f"wgnlab: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
