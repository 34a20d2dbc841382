"""Command-line front end.

    qmk classify [--q SPEC] [--bind NAME=VALUE] FILE
    qmk solve-rational [--q SPEC] (--riccati-A V | --riccati-B V | --linear A,B | FILE)
    qmk verify --family {riccati,punctured,weierstrass,sn} ...
    qmk constraints
    qmk growth [--family NAME] [--grid NR,NTHETA] [--csv PATH]
    qmk sn-eval --k K U [U ...]

Every command writes one JSON report {tool_version, config_echo, entries, summary}.
Exit status: 0 success, 1 an entry failed (UNCLASSIFIED, failed verification,
solver error), 2 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .algebra import AlgebraError, QSpec
from .classify import UNCLASSIFIED, classify, constraint_suite
from .parser import NormalizeError, ParseError, parse_equation, read_equations
from .rational import (DEFAULT_S_BOUND, SolverError, brute_force_oracle, moebius_matrix,
                       solution_key, solve_linear, solve_moebius, solve_riccati_A,
                       solve_riccati_B)

DEFAULT_TOLERANCE = 1e-9
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items() if v is not None}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, Fraction):
        return str(x)
    return x


def tolerance_from_env(default: float = DEFAULT_TOLERANCE) -> float:
    raw = os.environ.get("QMK_TOLERANCE")
    if raw is None or raw == "":
        return default
    try:
        tol = float(raw)
    except ValueError:
        raise InputError(f"QMK_TOLERANCE={raw!r} is not a number")
    if not tol >= np.finfo(float).eps:
        raise InputError("QMK_TOLERANCE must be at least machine epsilon")
    return tol


def _qspec(text: str) -> QSpec:
    try:
        return QSpec.parse(text)
    except (AlgebraError, ValueError) as exc:
        raise InputError(f"bad --q value {text!r}: {exc}")


def _bindings(items) -> dict:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise InputError(f"binding {item!r} must look like NAME=VALUE")
        out[name.strip()] = value.strip()
    return out


def _read_lines(path: str):
    try:
        if path == "-":
            return sys.stdin.read().splitlines()
        with open(path, encoding="utf-8") as fh:
            return fh.read().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}")


def _positive(name: str, v):
    if v is not None and v <= 0:
        raise InputError(f"{name} must be positive")
    return v


# -- commands --------------------------------------------------------------------------

def cmd_classify(args, tol):
    qspec = _qspec(args.q)
    binds = _bindings(args.bind)
    entries = []
    input_error = False
    for no, text in read_equations(_read_lines(args.input)):
        entry = {"input": text, "line": no}
        try:
            eq = parse_equation(text, qspec, binds)
        except (ParseError, NormalizeError, AlgebraError, ZeroDivisionError) as exc:
            entry["error"] = f"line {no}: {exc}"
            entry["ok"] = False
            input_error = True
            entries.append(entry)
            continue
        rep = classify(eq, args.regime).to_dict()
        entry["malmquist"] = rep["malmquist"]
        entry["deg_f"] = rep["deg_f"]
        entry["n"] = rep["n"]
        if "canonical" in rep:
            entry["canonical_id"] = rep["canonical"]["id"]
            entry["canonical_params"] = rep["canonical"]["params"]
            entry["transformation"] = rep["transformation"]
            if "alternatives" in rep:
                entry["alternatives"] = rep["alternatives"]
        if "constraint_residuals" in rep:
            entry["constraint_residuals"] = rep["constraint_residuals"]
        entry["verdict"] = rep["verdict"]
        if "notes" in rep:
            entry["notes"] = rep["notes"]
        entry["ok"] = rep["verdict"] != UNCLASSIFIED
        entries.append(entry)
    return entries, input_error


def _solve_entry(label, res, eq, s_bound, use_oracle):
    entry = {"input": label, "solutions": res.to_dict()}
    if use_oracle and eq is not None and eq.qspec.mode != "generic":
        orc = brute_force_oracle(eq, s_bound)
        entry["oracle_agrees"] = solution_key(orc) == solution_key(res)
        entry["ok"] = entry["oracle_agrees"]
    else:
        entry["ok"] = True
    return entry


def cmd_solve(args, tol):
    qspec = _qspec(args.q)
    s_bound = _positive("--s-bound", args.s_bound)
    k_bound = _positive("--k-bound", args.k_bound)
    use_oracle = not args.no_oracle
    entries = []
    input_error = False
    try:
        if args.riccati_A is not None:
            eq = parse_equation("f(qz) = (f + A)/(1 - f)", qspec, {"A": args.riccati_A})
            res = solve_riccati_A(_number(args.riccati_A), qspec, s_bound) \
                if _is_simple(args.riccati_A) else solve_moebius(moebius_matrix(eq), qspec, s_bound)
            entries.append(_solve_entry(f"riccati-A {args.riccati_A}", res, eq, s_bound, use_oracle))
        elif args.riccati_B is not None:
            eq = parse_equation("f(qz) = B/f", qspec, {"B": args.riccati_B})
            res = solve_riccati_B(_number(args.riccati_B), qspec, s_bound) \
                if _is_simple(args.riccati_B) else solve_moebius(moebius_matrix(eq), qspec, s_bound)
            entries.append(_solve_entry(f"riccati-B {args.riccati_B}", res, eq, s_bound, use_oracle))
        elif args.linear is not None:
            a, _, b = args.linear.partition(",")
            res = solve_linear(_number(a), _number(b or "0"), qspec, k_bound)
            entries.append({"input": f"linear {args.linear}", "solutions": res.to_dict(), "ok": True})
        elif args.input is not None:
            for no, text in read_equations(_read_lines(args.input)):
                try:
                    eq = parse_equation(text, qspec, _bindings(args.bind))
                    res = solve_moebius(moebius_matrix(eq), qspec, s_bound, label=text)
                    e = _solve_entry(text, res, eq, s_bound, use_oracle)
                    e["line"] = no
                    entries.append(e)
                except (ParseError, NormalizeError, AlgebraError, ZeroDivisionError) as exc:
                    entries.append({"input": text, "line": no, "error": f"line {no}: {exc}",
                                    "ok": False})
                    input_error = True
                except SolverError as exc:
                    entries.append({"input": text, "line": no, "error": str(exc), "ok": False})
        else:
            raise InputError("solve-rational needs --riccati-A, --riccati-B, --linear or an input file")
    except (ParseError, NormalizeError, AlgebraError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(str(exc))
    return entries, input_error


def _is_simple(text: str) -> bool:
    try:
        Fraction(text)
        return True
    except ValueError:
        return False


def _number(text: str):
    try:
        return Fraction(text.strip())
    except ValueError:
        raise InputError(f"{text!r} is not a rational number")


def _gaussian_text(c) -> str:
    re, im = c
    return f"({re}) + ({im})*i" if im != 0 else f"({re})"


def _exact_complex(text: str):
    """Gaussian rational (re, im) from '3', '1/2', '1+2i', '0.5-1j'."""
    t = text.strip().replace(" ", "")
    try:
        return Fraction(t), Fraction(0)
    except ValueError:
        pass
    try:
        c = complex(t.replace("i", "j"))
    except ValueError:
        raise InputError(f"{text!r} is not a number")
    return Fraction(c.real).limit_denominator(10 ** 12), Fraction(c.imag).limit_denominator(10 ** 12)


def _gmul(a, b):
    return a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]


def _gdiv(a, b):
    d = b[0] ** 2 + b[1] ** 2
    return (a[0] * b[0] + a[1] * b[1]) / d, (a[1] * b[0] - a[0] * b[1]) / d


def cmd_verify(args, tol):
    from . import special

    entries = []
    fam = args.family
    n_pts = _positive("--points", args.points)
    rng = np.random.default_rng(args.seed)
    if fam == "riccati":
        if args.a1 is None or args.a2 is None:
            raise InputError("--family riccati needs --a1 and --a2")
        qs = _qspec(args.q)
        if qs.mode == "generic":
            raise InputError("--family riccati needs a numeric --q")
        q = qs.value
        a1, a2 = _exact_complex(args.a1), _exact_complex(args.a2)
        s = (a1[0] ** 2 - a1[1] ** 2 + a2[0] ** 2 - a2[1] ** 2,
             2 * a1[0] * a1[1] + 2 * a2[0] * a2[1])
        p = _gmul(a1, a2)
        try:
            b = _gdiv((-2 * p[0], -2 * p[1]), s)
            sol = special.build_riccati_solution(complex(*map(float, a1)), complex(*map(float, a2)),
                                                 q, args.branch)
        except (ZeroDivisionError, ValueError) as exc:
            raise InputError(str(exc))
        bb = _gmul(b, b)
        A = (-bb[0], -bb[1])
        eq = parse_equation("f(qz) = (f + A)/(1 - f)", QSpec.generic(adjoin_i=True),
                            {"A": _gaussian_text(A)})
        pts = rng.uniform(-3, 3, n_pts) + 1j * rng.uniform(-3, 3, n_pts)
        rep = special.residual(eq, sol, pts, q=q)
        entries.append({"input": f"riccati a1={args.a1} a2={args.a2} q={args.q} branch={args.branch}",
                        "A": _gaussian_text(A), "residual_max": rep["max_residual"],
                        "points_used": rep["n_points"], "ok": rep["max_residual"] < tol})
    elif fam == "punctured":
        n_trunc = _positive("--n-trunc", args.n_trunc)
        try:
            rep = special.punctured_product_report(args.k, args.m, n_trunc, n_points=20, seed=args.seed)
        except ValueError as exc:
            raise InputError(str(exc))
        lit = rep["kappa_literal_q"]
        sh = rep["kappa_shifted_q"]
        entries.append({
            "input": f"punctured k={args.k} m={args.m} n_trunc={n_trunc}",
            "q": rep["q"],
            "residual_max": rep["consistency_max"],
            "single_valued_diff": rep["single_valued_diff"],
            "truncation_bound": rep["truncation_bound"],
            "kappa_literal_q": {"kappa": lit["kappa"], "spread": lit["spread"]},
            "kappa_half_period_q": {"multiplier": sh["multiplier"], "kappa": sh["kappa"],
                                    "kappa_expected": sh["kappa_expected"], "spread": sh["spread"]},
            "ok": rep["consistency_max"] < 1e-6 and rep["single_valued_diff"] < 1e-8
            and lit["spread"] < 1e-6,
        })
    elif fam == "weierstrass":
        z = rng.uniform(-1, 1, n_pts) + 1j * rng.uniform(-1, 1, n_pts)
        z = z[np.abs(z) > 0.05]
        H, G = special.weierstrass_pair(z, pole_tol=None)
        res = np.abs(H ** 3 + G ** 3 - 1)
        res = res[np.isfinite(res)]
        entries.append({"input": "weierstrass H^3 + G^3 = 1", "residual_max": float(np.max(res)),
                        "ok": float(np.max(res)) < tol})
    elif fam == "sn":
        pts = special.sample_regular_points(args.k, n_pts, seed=args.seed)
        r = special.sn_ode_residual(args.k, pts)
        entries.append({"input": f"sn ODE k={args.k}", "residual_max": r, "ok": r < max(tol, 1e-8)})
    else:
        raise InputError(f"unknown family {fam!r}")
    return entries, False


def cmd_constraints(args, tol):
    rep = constraint_suite(min(tol, 1e-10))
    entries = []
    for row in rep["constant_solutions"]:
        e = {"input": f"{row['id']} d={row['value']}" + (f" theta={row['theta']}" if row["theta"] else ""),
             "constraint_residuals": [{"id": row["id"], "residual": row["residual"], "zero": row["zero"]}],
             "ok": row["zero"]}
        entries.append(e)
    for row in rep["delta5_roots"]:
        entries.append({"input": f"delta5 root {row['root'][0]:.12g}{row['root'][1]:+.12g}i",
                        "residual_max": row["residual"], "ok": row["residual"] < 1e-10})
    for it in rep["iterations"]:
        entries.append({"input": f"iteration {it['form']}", "iterates": it["iterates"],
                        "ok": it["passed"]})
    return entries, False


def _grid(text):
    from .growth import Grid, GrowthError

    if text is None:
        return None
    try:
        nr, nt = (int(x) for x in text.split(","))
        return Grid(nr, nt)
    except (ValueError, GrowthError) as exc:
        raise InputError(f"bad --grid {text!r}: {exc}")


def cmd_growth(args, tol):
    from . import growth

    grid = _grid(args.grid)
    names = list(growth.STANDARD_FAMILIES) + ["dichotomy"] if args.family == "all" else [args.family]
    entries = []
    csv_parts = []
    for name in names:
        if name == "dichotomy":
            d = growth.dichotomy_check(growth.rational8, 2.0)
            entries.append({
                "input": "dichotomy rational8 o omega vs sn o omega, q = 2",
                "growth": {"zero_order": d["zero_order"].to_dict(), "contrast": d["contrast"].to_dict(),
                           "zero_order_decreasing": d["zero_order_decreasing"],
                           "contrast_decreasing": d["contrast_decreasing"],
                           "contrast_final": d["contrast_final"]},
                "ok": d["dichotomy_holds"],
            })
            csv_parts.append(("dichotomy-zero-order", d["zero_order"]))
            csv_parts.append(("dichotomy-contrast", d["contrast"]))
            continue
        fam = growth.STANDARD_FAMILIES.get(name)
        if fam is None:
            raise InputError(f"unknown growth family {name!r}")
        g = grid
        if g is not None and fam.grid.radial == "log":
            g = growth.Grid(g.n_r, g.n_theta, "log", fam.grid.r_inner)
        rep = growth.run_standard(name, g)
        e = {"input": name, "growth": rep.to_dict()}
        if fam.expected_order is not None:
            e["growth"]["expected_order"] = fam.expected_order
            e["growth"]["order_tolerance"] = fam.order_tol
            e["ok"] = rep.order_estimate is not None and \
                abs(rep.order_estimate - fam.expected_order) <= fam.order_tol
        else:
            e["ok"] = True
        entries.append(e)
        csv_parts.append((name, rep))
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write("family,r,T0\n")
            for name, rep in csv_parts:
                for r, t in zip(rep.radii, rep.T_values):
                    fh.write(f"{name},{float(r)!r},{float(t)!r}\n")
    return entries, False


def cmd_sn_eval(args, tol):
    from .special import PoleProximity, jacobi_sncndn

    if not 0.0 <= args.k < 1.0:
        raise InputError("--k must lie in [0, 1)")
    entries = []
    for text in args.u:
        try:
            u = complex(text.replace("i", "j"))
        except ValueError:
            raise InputError(f"{text!r} is not a complex number")
        try:
            sn, cn, dn = jacobi_sncndn(u, args.k, pole_tol=args.pole_tol)
            entries.append({"input": text, "sn": sn, "cn": cn, "dn": dn, "ok": True})
        except PoleProximity as exc:
            entries.append({"input": text, "error": str(exc), "ok": False})
    return entries, False


COMMANDS = {
    "classify": cmd_classify,
    "solve-rational": cmd_solve,
    "verify": cmd_verify,
    "constraints": cmd_constraints,
    "growth": cmd_growth,
    "sn-eval": cmd_sn_eval,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qmk", description="Malmquist-type q-difference equation toolkit")
    p.add_argument("--version", action="version", version=f"qmk {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, q_default="generic"):
        sp.add_argument("--q", default=q_default,
                        help="generic | root-of-unity:N | numeric:VALUE | VALUE")
        sp.add_argument("-o", "--output", help="write the JSON report here instead of stdout")
        sp.add_argument("--tol", type=float, help="numeric tolerance (overrides QMK_TOLERANCE)")

    sp = sub.add_parser("classify", help="classify equations against the canonical forms")
    common(sp)
    sp.add_argument("input", help="equation file, one equation per line ('-' for stdin)")
    sp.add_argument("--bind", action="append", metavar="NAME=VALUE")
    sp.add_argument("--regime", choices=("auto", "generic", "unrestricted"), default="auto")

    sp = sub.add_parser("solve-rational", help="rational solutions of the autonomous normal forms")
    common(sp)
    sp.add_argument("input", nargs="?")
    sp.add_argument("--bind", action="append", metavar="NAME=VALUE")
    sp.add_argument("--riccati-A", dest="riccati_A")
    sp.add_argument("--riccati-B", dest="riccati_B")
    sp.add_argument("--linear", metavar="A,B")
    sp.add_argument("--s-bound", type=int, default=DEFAULT_S_BOUND)
    sp.add_argument("--k-bound", type=int, default=DEFAULT_S_BOUND)
    sp.add_argument("--no-oracle", action="store_true", help="skip the brute-force cross-check")

    sp = sub.add_parser("verify", help="numeric residual checks of explicit solutions")
    common(sp, q_default="2")
    sp.add_argument("--family", required=True, choices=("riccati", "punctured", "weierstrass", "sn"))
    sp.add_argument("--a1")
    sp.add_argument("--a2")
    sp.add_argument("--branch", type=int, default=0)
    sp.add_argument("--k", type=float, default=0.5)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--n-trunc", type=int, default=40)
    sp.add_argument("--points", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("constraints", help="constraint residuals and iteration identities")
    common(sp)

    sp = sub.add_parser("growth", help="Ahlfors-Shimizu growth estimates")
    common(sp)
    sp.add_argument("--family", default="all",
                    help="all | rational | exp | sn | sn-square | sn-exp | dichotomy")
    sp.add_argument("--grid", metavar="NR,NTHETA")
    sp.add_argument("--csv", metavar="PATH", help="also write (r, T0) pairs as CSV")

    sp = sub.add_parser("sn-eval", help="evaluate Jacobi sn, cn, dn")
    common(sp)
    sp.add_argument("--k", type=float, required=True)
    sp.add_argument("--pole-tol", type=float, default=1e-12)
    sp.add_argument("u", nargs="+", help="complex arguments such as 0.5 or 1+2j")
    return p


def _config_echo(args, tol) -> dict:
    skip = {"output"}
    d = {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}
    d["tolerance"] = tol
    return d


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = args.tol if args.tol is not None else tolerance_from_env()
        if not tol >= np.finfo(float).eps:
            raise InputError("tolerance must be at least machine epsilon")
        entries, input_error = COMMANDS[args.command](args, tol)
    except InputError as exc:
        print(f"qmk: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    failed = sum(1 for e in entries if not e.get("ok", True))
    report = {
        "tool_version": __version__,
        "config_echo": _config_echo(args, tol),
        "entries": entries,
        "summary": {"total": len(entries), "succeeded": len(entries) - failed, "failed": failed},
    }
    text = json.dumps(_jsonable(report), indent=2, ensure_ascii=False) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if input_error:
        return EXIT_INPUT
    return EXIT_FAIL if failed else EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
