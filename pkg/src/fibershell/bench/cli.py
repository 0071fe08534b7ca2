"""Command line entry point: ``fibershell {list,run,verify}``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from importlib import resources
from pathlib import Path

from . import consistency  # noqa: F401  registers the consistency runner
from .io import format_report, write_run
from .runners import run_scenario
from .scenario import Scenario, ScenarioError, apply_overrides, parse, serialize

OUT_ENV = "FIBERSHELL_OUT"
DEFAULT_OUT = "fibershell-runs"

QUICK_SUITE = ("consistency", "pure_shear", "picture_frame", "uniaxial", "annulus", "annulus_gauss_study",
               "pure_bending_mesh_study", "stabilization")
FULL_SUITE = QUICK_SUITE + ("bias_extension_study", "bias_extension_unbalanced", "torsion", "torsion_compressible")


def builtin_dir():
    return resources.files("fibershell.bench") / "scenarios"


def builtin_names() -> list[str]:
    return sorted(p.name[:-4] for p in builtin_dir().iterdir() if p.name.endswith(".ini"))


def builtin_text(name: str) -> str:
    return (builtin_dir() / f"{name}.ini").read_text(encoding="utf-8")


def resolve(ref: str) -> tuple[Scenario, str]:
    """Scenario from a built-in name or a file path, plus its source text."""
    path = Path(ref)
    if path.suffix == ".ini" or path.exists():
        if not path.is_file():
            raise ScenarioError(f"scenario file not found: {ref}")
        text = path.read_text(encoding="utf-8")
    elif ref in builtin_names():
        text = builtin_text(ref)
    else:
        raise ScenarioError(f"unknown scenario '{ref}' (see 'fibershell list')")
    return parse(text), text


def _summary(text: str) -> str:
    for line in text.splitlines():
        if line.startswith("#"):
            return line.lstrip("# ").strip()
    return ""


def _overrides(args, sc: Scenario) -> Scenario:
    return apply_overrides(sc, mesh=args.mesh, steps=args.steps, gauss=args.gauss, seed=args.seed, tol=args.tol)


def cmd_list(args) -> int:
    for name in builtin_names():
        print(f"{name:28s} {_summary(builtin_text(name))}")
    return 0


def cmd_run(args) -> int:
    sc, _ = resolve(args.scenario)
    sc = _overrides(args, sc)
    rep = run_scenario(sc)
    path = write_run(rep, args.out, serialize(sc), timing=args.timing)
    sys.stdout.write(format_report(rep, timing=args.timing))
    print(f"outputs: {path}")
    return 0 if (rep.passed or not args.strict) else 1


def cmd_verify(args) -> int:
    names = args.only or (FULL_SUITE if args.full else QUICK_SUITE)
    ok = True
    for name in names:
        sc, _ = resolve(name)
        sc = _overrides(args, sc)
        rep = run_scenario(sc)
        if args.out_given:
            write_run(rep, args.out, serialize(sc))
        for c in rep.comparisons:
            tag = "PASS" if c.passed else "FAIL"
            gate = "" if c.gate else " (not gating)"
            print(f"{tag} {rep.name}: {c.name} [{c.provenance}] error={c.error:.2e} tol={c.tol:.0e}{gate}")
        for n in rep.notes:
            print(f"NOTE {rep.name}: {n}")
        print(f"{'ok' if rep.passed else 'FAILED'} {rep.name} ({rep.runtime:.1f} s)", flush=True)
        ok &= rep.passed
    print("verify:", "all gated checks passed" if ok else "gated checks failed")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fibershell", description="Fiber-reinforced shell benchmarks.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log Newton progress")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--mesh", help="element counts NxM")
        p.add_argument("--steps", type=int, help="number of load steps")
        p.add_argument("--gauss", type=int, help="Gauss order per direction")
        p.add_argument("--seed", type=int, help="imperfection seed")
        p.add_argument("--tol", type=float, help="oracle tolerance")
        p.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")

    sub.add_parser("list", help="list built-in scenarios")
    p = sub.add_parser("run", help="run one scenario and write its outputs")
    p.add_argument("scenario", help="built-in name or path to a scenario file")
    p.add_argument("--timing", action="store_true", help="record the runtime in report.txt")
    p.add_argument("--strict", action="store_true", help="exit 1 if a gated comparison fails")
    common(p)
    p = sub.add_parser("verify", help="run the oracle and property suite")
    p.add_argument("--full", action="store_true", help="include bias extension and torsion (minutes)")
    p.add_argument("--only", nargs="+", metavar="SCENARIO", help="verify only these scenarios")
    common(p)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if hasattr(args, "out"):
        args.out_given = args.out is not None
        args.out = args.out or os.environ.get(OUT_ENV, DEFAULT_OUT)
    handler = {"list": cmd_list, "run": cmd_run, "verify": cmd_verify}[args.command]
    try:
        return handler(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
