"""Command-line front end.

Exit codes: 0 success / Satisfied, 1 Violated or a failed expectation,
2 Inconclusive, blow-up or nothing found, 3 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Optional, Sequence

from . import __version__
from .closed import (BlowUpInsideBracket, BracketInvalid, NoConvergence, find_closed,
                     find_closed_nonpositive, scan_closed)
from .core import BlowUp, DomainError, integrate
from .criteria import INCONCLUSIVE, SATISFIED, SCHEMA_VERSION, THEOREMS, Settings, check_theorem
from .expr import ExprDomainError, ExprSyntaxError
from .specio import SpecError, fixture_names, load_corpus, load_spec

EXIT_OK, EXIT_FAIL, EXIT_UNDECIDED, EXIT_INPUT = 0, 1, 2, 3
INPUT_ERRORS = (SpecError, ExprSyntaxError, ExprDomainError, KeyError, TypeError, ValueError)


def _dump(doc: dict, out: Optional[str]) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _settings(args) -> Settings:
    return Settings(grid=args.grid, tol=args.tol, strict_eps=args.strict_eps)


def _input(args) -> str:
    path = args.input_flag or args.input
    if not path:
        raise SpecError("no input spec given")
    return path


def _overrides(args) -> dict:
    out = {"gamma": args.gamma, "nu": args.nu, "c": args.c, "c_plus": args.c_plus,
           "c_minus": args.c_minus, "j": args.j, "zeta": args.zeta, "zeta0": args.zeta0,
           "T": args.glue_at}
    if args.partition:
        out["partition"] = args.partition
    return out


# -- subcommands -------------------------------------------------------------

def run_check(spec, theorem: str, overrides: dict, settings: Settings):
    return check_theorem(spec.ode(), theorem, spec.theorem_params(overrides), settings)


def cmd_check(args) -> int:
    spec = load_spec(_input(args))
    report = run_check(spec, args.theorem, _overrides(args), _settings(args))
    _dump(report.to_dict(), args.out)
    print(f"{report.theorem}: {report.verdict}", file=sys.stderr)
    if report.verdict == SATISFIED:
        return EXIT_OK
    return EXIT_UNDECIDED if report.verdict == INCONCLUSIVE else EXIT_FAIL


def _write_csv(traj, out: Optional[str]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "y"])
    for t, y in traj.samples:
        w.writerow([repr(float(t)), repr(float(y))])
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def cmd_integrate(args) -> int:
    spec = load_spec(_input(args))
    ode = spec.ode()
    traj = integrate(ode, ode.t0, args.y0, ode.horizon, args.tol)
    _write_csv(traj, args.out)
    status = {"schema_version": SCHEMA_VERSION, "status": type(traj.status).__name__,
              "t_end": traj.t_end, "y_end": traj.y_end}
    if isinstance(traj.status, BlowUp):
        status["t_escape"] = traj.status.t_escape
    if isinstance(traj.status, DomainError):
        status["message"] = traj.status.message
    print(json.dumps(status, sort_keys=True), file=sys.stderr)
    return EXIT_OK if traj.reached_end else EXIT_UNDECIDED


def cmd_closed(args) -> int:
    spec = load_spec(_input(args))
    ode = spec.ode()
    doc = {"schema_version": SCHEMA_VERSION, "equation": spec.name, "tol": args.tol,
           "interval": [ode.t0, ode.horizon]}
    try:
        if args.scan:
            doc["mode"] = "scan"
            doc["range"] = list(args.scan)
            results = scan_closed(ode, tuple(args.scan), args.probes, args.tol)
        else:
            if not args.bracket:
                raise SpecError("closed needs --bracket LO HI or --scan LO HI")
            doc["mode"] = "nonpositive" if args.nonpositive else "bracket"
            doc["range"] = list(args.bracket)
            finder = find_closed_nonpositive if args.nonpositive else find_closed
            results = [finder(ode, tuple(args.bracket), args.tol)]
    except BracketInvalid as exc:
        doc.update(results=[], error=f"bracket invalid: {exc}")
        _dump(doc, args.out)
        return EXIT_FAIL
    except (BlowUpInsideBracket, NoConvergence) as exc:
        doc.update(results=[], error=str(exc))
        _dump(doc, args.out)
        return EXIT_UNDECIDED
    doc["results"] = [r.to_dict(args.embed_trajectory) for r in results]
    _dump(doc, args.out)
    return EXIT_OK if results else EXIT_UNDECIDED


# -- example corpus ----------------------------------------------------------

def _close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol


def run_entry(entry: dict) -> tuple[bool, str]:
    """Run one corpus entry; returns ``(matched, detail)``."""
    spec = load_spec(entry["fixture"])
    ode = spec.ode()
    kind = entry["kind"]
    exp = entry["expect"]
    if kind == "check":
        rep = check_theorem(ode, entry["theorem"], spec.theorem_params(entry.get("params")))
        failing = sorted(c.label for c in rep.conditions if not c.inconclusive and not c.passed())
        ok = rep.verdict == exp["verdict"]
        if "failing" in exp:
            ok = ok and failing == sorted(exp["failing"])
        return ok, f"{rep.verdict}" + (f" on {', '.join(failing)}" if failing else "")
    if kind == "integrate":
        traj = integrate(ode, ode.t0, float(entry["y0"]), ode.horizon, entry.get("tol", 1e-10))
        name = type(traj.status).__name__
        if exp["status"] != name:
            return False, name
        if "t_escape" in exp:
            t = traj.status.t_escape
            return _close(t, exp["t_escape"], exp["abs_tol"]), f"{name} at t={t:.6f}"
        if "y_end" in exp:
            return _close(traj.y_end, exp["y_end"], exp["abs_tol"]), f"y(T)={traj.y_end:.12g}"
        return True, name
    if kind == "closed":
        tol = entry.get("tol", 1e-10)
        if "scan" in entry:
            res = scan_closed(ode, tuple(entry["scan"]), entry.get("probes", 64), tol)
        elif entry.get("nonpositive"):
            res = [find_closed_nonpositive(ode, tuple(entry["bracket"]), tol)]
        else:
            res = [find_closed(ode, tuple(entry["bracket"]), tol)]
        gammas = [r.gamma_star for r in res]
        detail = "gamma* = " + ", ".join(f"{g:.10g}" for g in gammas) if gammas else "none"
        ok = True
        if "gamma_star" in exp:
            want = exp["gamma_star"]
            want = want if isinstance(want, list) else [want]
            ok = len(want) == len(gammas) and all(
                _close(g, w, exp["abs_tol"]) for g, w in zip(gammas, want))
        if "max_residual" in exp:
            ok = ok and all(r.residual <= exp["max_residual"] for r in res)
        if "note" in exp:
            ok = ok and bool(res) and exp["note"] in res[0].note
            detail += f" ({res[0].note})" if res else ""
        return ok, detail
    raise SpecError(f"unknown corpus entry kind {kind!r}")


def cmd_verify_examples(args) -> int:
    entries = load_corpus(args.corpus)
    if args.list:
        for e in entries:
            what = e.get("theorem") or e["kind"]
            print(f"{e['id']:<28} {e['fixture']:<16} {what}")
        print("fixtures: " + ", ".join(fixture_names()))
        return EXIT_OK
    failed = []
    print(f"{'entry':<28} {'result':<6} detail")
    for e in entries:
        try:
            ok, detail = run_entry(e)
        except INPUT_ERRORS + (BracketInvalid, BlowUpInsideBracket, NoConvergence) as exc:
            ok, detail = False, f"error: {exc}"
        print(f"{e['id']:<28} {'pass' if ok else 'FAIL':<6} {detail}")
        if not ok:
            failed.append(e["id"])
    print(f"{len(entries) - len(failed)}/{len(entries)} entries match")
    if failed:
        print("failing: " + ", ".join(failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def _add_input(p):
    p.add_argument("input", nargs="?", help="equation spec JSON (or a bundled fixture name)")
    p.add_argument("--input", dest="input_flag", metavar="PATH", help="equation spec JSON")
    p.add_argument("--out", metavar="PATH", help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyode",
                                     description="Global solvability and closed-solution "
                                                 "checks for polynomial first-order ODEs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="evaluate a theorem's hypotheses")
    _add_input(p)
    p.add_argument("--theorem", required=True, choices=THEOREMS, metavar="ID",
                   help="one of " + ", ".join(THEOREMS))
    for name in ("gamma", "nu", "c", "c-plus", "c-minus", "zeta0"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--j", type=int)
    p.add_argument("--zeta", help="lower comparison function as an expression in t")
    p.add_argument("--glue-at", type=float, help="gluing point T for the glued candidates")
    p.add_argument("--partition", type=float, nargs="+", help="usable-sequence partition")
    p.add_argument("--tol", type=float, default=Settings.tol)
    p.add_argument("--grid", type=int, default=Settings.grid)
    p.add_argument("--strict-eps", type=float, default=Settings.strict_eps)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("integrate", help="integrate from y(t0) = y0, CSV to stdout")
    _add_input(p)
    p.add_argument("--y0", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("closed", help="find closed solutions y(t0) = y(T)")
    _add_input(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"))
    g.add_argument("--scan", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--nonpositive", action="store_true",
                   help="apply the bracket to the reflected equation z(s) = -y(-s)")
    p.add_argument("--probes", type=int, default=64)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--embed-trajectory", action="store_true")
    p.set_defaults(func=cmd_closed)

    p = sub.add_parser("verify-examples", help="run the bundled example corpus")
    p.add_argument("--list", action="store_true", help="list corpus entries without running")
    p.add_argument("--corpus", metavar="PATH", help="alternative corpus JSON")
    p.set_defaults(func=cmd_verify_examples)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
