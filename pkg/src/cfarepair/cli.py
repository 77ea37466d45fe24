"""Command line: repair, verify, align and run-corpus.

Exit codes: 0 success, 1 clean failure with a classified reason, 2 usage or
input errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .align import (CombinatoricsExceeded, StructuralMismatch, align_edges, align_nodes, ast_skeleton,
                    function_pairs, variable_alignment)
from .cfa import build_cfa
from .minilang.check import check_program
from .minilang.errors import ParseError, UnsupportedFeature
from .minilang.parser import parse
from .repair.program import Config, repair_program
from .solver.session import Session, SolverCrash, solver_command

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}")


def _config(args) -> Config:
    solver = [args.solver, "-in", "-smt2"] if args.solver else None
    try:
        return Config(timeout=args.timeout, query_budget=args.query_budget, k=args.k,
                      max_pairings=args.max_pairings, max_rounds=args.max_rounds,
                      solver=solver, dump_smt=args.dump_smt, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc))


def _emit_json(data: dict, target: str):
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if target == "-":
        sys.stdout.write(text)
    else:
        Path(target).write_text(text)


def cmd_repair(args, verify_only: bool = False) -> int:
    ref, student = _read(args.ref), _read(args.student)
    report = repair_program(ref, student, _config(args), verify_only=verify_only)
    if args.json:
        _emit_json(report.to_json(timings=args.timings), args.json)
    if args.json != "-":
        if not report.ok:
            print(f"failed: {report.reason}: {report.message}", file=sys.stderr)
        elif verify_only or report.status == "verified":
            print("all edges verified")
        else:
            sys.stdout.write(report.diff)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_verify(args) -> int:
    return cmd_repair(args, verify_only=True)


def _load(src: str, what: str):
    try:
        program = parse(src)
        check_program(program)
        return program
    except (ParseError, UnsupportedFeature) as exc:
        raise UsageError(f"{what}: {exc}")


def cmd_align(args) -> int:
    ref = _load(_read(args.ref), "reference")
    student = _load(_read(args.student), "student")
    try:
        pairs = function_pairs(student, ref)
        for fs, fr in pairs:
            cs, cr = build_cfa(fs), build_cfa(fr)
            print(cr.dump())
            print(cs.dump())
            v = align_nodes(ast_skeleton(fs), ast_skeleton(fr), cs, cr)
            print("nodes " + ", ".join(f"{r}~{s}'" for s, r in v.pairs))
            for index, af in enumerate(align_edges(cs, cr, v, args.max_pairings)):
                if index >= args.candidates:
                    break
                print(f"candidate {index}")
                for e in af.edges:
                    print(f"  {e.id:10} {e.kind:7} ref={list(map(str, e.reference_label))} "
                          f"student={list(map(str, e.student_label))}")
                print(f"  pred {variable_alignment(af)}")
    except StructuralMismatch as exc:
        print(f"failed: SM: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except CombinatoricsExceeded as exc:
        print(f"failed: CombinatoricsExceeded: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except UnsupportedFeature as exc:
        print(f"failed: Unsupported: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_run_corpus(args) -> int:
    from .eval import ManifestError, run_corpus

    if not Path(args.corpus).exists():
        raise UsageError(f"no corpus at {args.corpus}")
    try:
        report = run_corpus(args.corpus, _config(args), jobs=args.jobs)
    except ManifestError as exc:
        raise UsageError(str(exc))
    if args.json:
        _emit_json(report.to_json(timings=args.timings), args.json)
    if args.json != "-":
        print(report.table())
    return EXIT_FAIL if report.unsound() else EXIT_OK


def _version() -> str:
    try:
        with Session() as s:
            solver = s.version()
    except (SolverCrash, OSError, TimeoutError) as exc:
        solver = f"unavailable ({exc})"
    return f"cfarepair {__version__}; solver {solver} ({solver_command()[0]})"


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cfarepair", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="store_true", help="print engine and solver versions")
    sub = p.add_subparsers(dest="command")

    def engine_flags(sp):
        sp.add_argument("--timeout", type=_positive_float, default=300.0, help="seconds per program")
        sp.add_argument("--query-budget", type=_positive_float, default=10.0, help="seconds per solver query")
        sp.add_argument("--k", type=_positive_int, default=4, help="candidates per synthesis round")
        sp.add_argument("--max-pairings", type=_positive_int, default=24)
        sp.add_argument("--max-rounds", type=_positive_int, default=32)
        sp.add_argument("--solver", help="solver binary (default: $CFAREPAIR_SOLVER or z3 on PATH)")
        sp.add_argument("--dump-smt", metavar="DIR", help="write every solver query to DIR")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--json", metavar="OUT", help="write the JSON report to OUT ('-' for stdout)")
        sp.add_argument("--timings", action="store_true", help="include wall times in the JSON")

    for name, help_text in (("repair", "repair a student program"),
                            ("verify", "check equivalence without repairing")):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--ref", required=True)
        sp.add_argument("--student", required=True)
        engine_flags(sp)

    sp = sub.add_parser("align", help="print automata and alignment candidates")
    sp.add_argument("--ref", required=True)
    sp.add_argument("--student", required=True)
    sp.add_argument("--max-pairings", type=_positive_int, default=24)
    sp.add_argument("--candidates", type=_positive_int, default=1, help="how many candidates to print")

    sp = sub.add_parser("run-corpus", help="repair every case of a corpus")
    sp.add_argument("corpus")
    sp.add_argument("--jobs", type=_positive_int, default=1)
    engine_flags(sp)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.version:
        print(_version())
        return EXIT_OK
    handlers = {"repair": cmd_repair, "verify": cmd_verify, "align": cmd_align,
                "run-corpus": cmd_run_corpus}
    if args.command not in handlers:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
