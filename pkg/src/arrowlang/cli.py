"""Command line front end.

Subcommands: ``run`` evaluates a program (``--trace`` prints the line
states), ``trace`` is run in trace mode, ``eq`` compares two programs
under the declared and random interpretations, ``corpus`` replays a
directory of programs against golden traces.

Exit codes: 0 success, 1 parse or type errors, 2 a failed run (zero
mass), 3 programs differ under ``eq``, 4 a corpus mismatch.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from .errors import ArrowError, NonNumericOutcome, ZeroMassState
from .parser import Program, load_file
from .proptest import gen_kernels
from .semantics import Interpretation, interpret, trace
from .subdist import FAILURE, Subdist, expected_value, ket, render_outcome
from .syntax import Generator

NORMALIZE_PRAGMA = "# mode: normalize-each-line"


def _fraction_json(q) -> dict:
    return {"num": q.numerator, "den": q.denominator}


def _subdist_json(s: Subdist) -> list:
    out = []
    for x, w in s.items():
        components = x if isinstance(x, tuple) else (x,)
        out.append({"weight": _fraction_json(w),
                    "outcome": [render_outcome(c) for c in components]})
    return out


def _trace_text(lines, result) -> str:
    body = [f"({ln.line}) {ln.text} | {ket(ln.state)}" for ln in lines]
    body.append(f"Validity: {result.validity}")
    if result.posterior is FAILURE:
        body.append("Failure")
    else:
        body.append(f"Posterior: {ket(result.posterior)}")
    return "\n".join(body) + "\n"


def _evaluate(prog: Program, normalize: bool):
    return trace(prog.typed, prog.interp, prog.texts, normalize=normalize)


def _emit_run(prog: Program, path: str, args, out) -> int:
    structured = args.format == "structured"
    doc = {"program": path, "lines": [], "failure": False}
    try:
        lines, result = _evaluate(prog, args.normalize_each_line)
    except ZeroMassState as exc:
        if structured:
            doc.update(failure=True, failure_line=exc.line,
                       validity=_fraction_json(Fraction(0)), posterior=[])
            print(json.dumps(doc, sort_keys=True), file=out)
        else:
            print(f"Failure: state mass is zero at line {exc.line}", file=out)
        return 2

    failed = result.posterior is FAILURE
    ev = None
    if args.expected_value and not failed:
        ev = expected_value(result.posterior)

    if structured:
        doc["lines"] = [
            {"line": ln.line, "statement": ln.text,
             "state": _subdist_json(ln.state), "mass": _fraction_json(ln.mass)}
            for ln in lines
        ]
        doc["validity"] = _fraction_json(result.validity)
        doc["posterior"] = [] if failed else _subdist_json(result.posterior)
        doc["failure"] = failed
        if ev is not None:
            doc["expected_value"] = _fraction_json(ev)
        print(json.dumps(doc, sort_keys=True), file=out)
        return 2 if failed else 0

    if args.trace_mode:
        out.write(_trace_text(lines, result))
    else:
        print(f"Final: {ket(result.final)}", file=out)
        print(f"Validity: {result.validity}", file=out)
        if failed:
            print("Posterior: Failure", file=out)
        else:
            print(f"Posterior: {ket(result.posterior)}", file=out)
    if ev is not None:
        print(f"Expected value: {ev}", file=out)
    return 2 if failed else 0


def cmd_run(args, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        prog = load_file(args.path)
    except (ArrowError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return 1
    try:
        return _emit_run(prog, str(args.path), args, out)
    except (NonNumericOutcome, ArrowError) as exc:
        print(f"error: {exc}", file=err)
        return 1


def _compatible(a: Program, b: Program, err) -> bool:
    for tname in set(a.interp.carriers) & set(b.interp.carriers):
        if tuple(a.interp.carriers[tname]) != tuple(b.interp.carriers[tname]):
            print(f"error: type {tname} has different carriers", file=err)
            return False
    gens_a = a.typed.sig.generators
    gens_b = b.typed.sig.generators
    for name in set(gens_a) & set(gens_b):
        if gens_a[name] != gens_b[name]:
            print(f"error: generator {name} declared with different types", file=err)
            return False
    return True


def _final(prog: Program, kernels=None) -> Subdist:
    interp = prog.interp
    if kernels is not None:
        merged = dict(interp.kernels)
        merged.update({n: kernels[n] for n in kernels if n in prog.typed.sig.generators})
        interp = Interpretation(interp.carriers, merged)
    return interpret(prog.typed, interp, ())


def _describe_counterexample(which: str, fa: Subdist, fb: Subdist, out):
    from .subdist import rescale

    print(f"programs differ under {which}", file=out)
    print(f"  left final:  {ket(fa)}", file=out)
    print(f"  right final: {ket(fb)}", file=out)
    for side, final in (("left", fa), ("right", fb)):
        res = rescale(final)
        text = "Failure" if res is FAILURE else ket(res[1])
        print(f"  {side} posterior: {text}", file=out)


def cmd_eq(args, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        a = load_file(args.path_a)
        b = load_file(args.path_b)
    except (ArrowError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return 1
    if not _compatible(a, b, err):
        return 1

    have_declared = all(
        g.name in p.interp.kernels for p in (a, b) for g in p.typed.sig.generators.values()
    )
    if have_declared:
        fa, fb = _final(a), _final(b)
        if fa != fb:
            _describe_counterexample("the declared interpretation", fa, fb, out)
            return 3

    rng = random.Random(args.seed)
    union_gens: dict[str, Generator] = dict(a.typed.sig.generators)
    union_gens.update(b.typed.sig.generators)
    carriers = dict(a.interp.carriers)
    carriers.update({t: c for t, c in b.interp.carriers.items() if t not in carriers})
    for trial in range(args.trials):
        kernels = gen_kernels(union_gens.values(), carriers, rng)
        fa, fb = _final(a, kernels), _final(b, kernels)
        if fa != fb:
            _describe_counterexample(f"random interpretation (seed {args.seed}, trial {trial})",
                                     fa, fb, out)
            for name, table in sorted(kernels.items()):
                for inputs, row in sorted(table.items(), key=str):
                    shown = ", ".join(render_outcome(v) for v in inputs)
                    print(f"    {name}({shown}) = {ket(row)}", file=out)
            return 3
    checked = "declared interpretation and " if have_declared else ""
    print(f"programs agree under the {checked}{args.trials} random interpretations", file=out)
    return 0


def cmd_corpus(args, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    root = Path(args.dir)
    programs = sorted(root.glob("*.arrow"))
    if not programs:
        print(f"warning: no .arrow files in {root}", file=err)
        return 0
    failures = []
    for path in programs:
        golden = path.with_suffix(".golden")
        name = path.stem
        if not golden.exists():
            failures.append((name, "missing golden file", None, None))
            print(f"FAIL {name} (missing golden file)", file=out)
            continue
        try:
            source = path.read_text(encoding="utf-8")
            prog = load_file(path)
            normalize = any(line.strip() == NORMALIZE_PRAGMA for line in source.splitlines())
            lines, result = _evaluate(prog, normalize)
            actual = _trace_text(lines, result)
        except ZeroMassState as exc:
            actual = f"Failure: state mass is zero at line {exc.line}\n"
        except ArrowError as exc:
            failures.append((name, f"error: {exc}", None, None))
            print(f"FAIL {name} (error: {exc})", file=out)
            continue
        expected = golden.read_text(encoding="utf-8")
        if actual == expected:
            print(f"PASS {name}", file=out)
            continue
        exp_lines = expected.splitlines()
        act_lines = actual.splitlines()
        where = next(
            (i for i, (e, g) in enumerate(zip(exp_lines, act_lines), 1) if e != g),
            min(len(exp_lines), len(act_lines)) + 1,
        )
        failures.append((name, f"first difference at line {where}",
                         exp_lines[where - 1] if where <= len(exp_lines) else "<end>",
                         act_lines[where - 1] if where <= len(act_lines) else "<end>"))
        print(f"FAIL {name} (first difference at line {where})", file=out)
    if failures:
        name, why, exp, act = failures[0]
        print(f"first failure: {name}: {why}", file=out)
        if exp is not None:
            print(f"  golden: {exp}", file=out)
            print(f"  actual: {act}", file=out)
        return 4
    return 0


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="arrowlang",
                                 description="evaluate probabilistic decision programs exactly")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_run_flags(p, trace_default: bool):
        p.add_argument("path")
        if not trace_default:
            p.add_argument("--trace", dest="trace_mode", action="store_true",
                           help="print the per-statement states")
        p.add_argument("--normalize-each-line", action="store_true",
                       help="rescale the state to mass 1 after every statement")
        p.add_argument("--expected-value", action="store_true",
                       help="print the expected value of the posterior")
        p.add_argument("--format", choices=("text", "structured"), default="text")
        p.set_defaults(trace_mode=trace_default)

    add_run_flags(sub.add_parser("run", help="evaluate a program"), trace_default=False)
    add_run_flags(sub.add_parser("trace", help="print the statement-by-statement trace"),
                  trace_default=True)

    eq = sub.add_parser("eq", help="check two programs for equal denotations")
    eq.add_argument("path_a")
    eq.add_argument("path_b")
    eq.add_argument("--trials", type=int, default=20)
    eq.add_argument("--seed", type=int, default=0)

    corpus = sub.add_parser("corpus", help="replay a directory against golden traces")
    corpus.add_argument("dir")
    return ap


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    if args.command in ("run", "trace"):
        return cmd_run(args)
    if args.command == "eq":
        return cmd_eq(args)
    return cmd_corpus(args)


if __name__ == "__main__":
    sys.exit(main())
