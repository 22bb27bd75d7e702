"""Command-line interface: ``deltalog eval|maintain|derive|check``.

Data goes to stdout, diagnostics to stderr.  Exit codes: 0 success, 1 bad
input (syntax, static checks, file formats), 2 divergence or size cap,
3 maintenance did not converge with fallback disabled, 4 property failure.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import properties
from .boolean_delta import BooleanDelta
from .derivative import Deriver, derive_program, simplify
from .errors import (
    DeltalogError,
    DivergenceError,
    NonConvergenceError,
    ParseError,
    RelationSizeError,
)
from .formula import BOTTOM, Atom, Kind, Var, render, rename_apart, rename_free
from .engine import (
    SolverConfig,
    apply_changes,
    edb_relations,
    maintain,
    solve,
)
from .parser import parse_delta, parse_facts
from .program import param, parse_program
from .relations import Relation

EXIT_OK, EXIT_INPUT, EXIT_DIVERGED, EXIT_NONCONVERGENT, EXIT_PROPERTY = 0, 1, 2, 3, 4


class InputError(DeltalogError):
    """Malformed or inconsistent input files."""


# Files --------------------------------------------------------------------


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def load_program(path: str):
    try:
        return parse_program(_read(path))
    except ParseError as exc:
        raise InputError(f"{path}:{exc}") from None


def _check_fact(program, pred, args, line, path):
    if pred in program.idb_preds:
        raise InputError(f"{path}:{line}: {pred} is defined by rules and cannot be given as a fact")
    if pred not in program.edb_preds:
        raise InputError(f"{path}:{line}: predicate {pred} does not occur in the program")
    if len(args) != program.arity(pred):
        raise InputError(
            f"{path}:{line}: {pred} has arity {program.arity(pred)}, got {len(args)} arguments"
        )


def load_facts(program, path: str | None) -> dict:
    facts = {}
    if path is None:
        return facts
    try:
        parsed = parse_facts(_read(path))
    except ParseError as exc:
        raise InputError(f"{path}:{exc}") from None
    for pred, args, line in parsed:
        _check_fact(program, pred, args, line, path)
        facts.setdefault(pred, set()).add(tuple(args))
    return facts


def load_delta(program, path: str) -> dict:
    try:
        parsed = parse_delta(_read(path))
    except ParseError as exc:
        raise InputError(f"{path}:{exc}") from None
    adds, removes = {}, {}
    for sign, pred, args, line in parsed:
        _check_fact(program, pred, args, line, path)
        row = tuple(args)
        mine, other = (adds, removes) if sign == "+" else (removes, adds)
        if row in other.get(pred, ()):
            raise InputError(f"{path}:{line}: {pred}{row} is both inserted and deleted")
        mine.setdefault(pred, set()).add(row)
    return {
        p: BooleanDelta.of(program.schema(p), adds.get(p, ()), removes.get(p, ()))
        for p in sorted(set(adds) | set(removes))
    }


# Rendering ----------------------------------------------------------------


def fact(pred: str, row: tuple, sign: str = "") -> str:
    return f"{sign}{pred}({','.join(str(c) for c in row)})."


def render_relation(pred: str, rel: Relation, sign: str = "") -> list:
    return [fact(pred, row, sign) for row in rel.sorted_rows()]


def render_rows(rel: Relation) -> str:
    rows = ["(" + ",".join(str(c) for c in r) + ")" for r in rel.sorted_rows()]
    return "{" + ", ".join(rows) + "}"


def render_solution(program, idb: dict) -> list:
    out = []
    for pred in sorted(program.idb_preds):
        rel = idb[pred]
        out.append(f"% {pred}/{program.arity(pred)}: {len(rel)} facts")
        out.extend(render_relation(pred, rel))
    return out


def render_trace(program, sol, engine: str) -> list:
    """Per-iteration tables, as ``%`` comments so the output still parses as facts."""
    out = []
    current = None
    for step in sol.trace:
        if step.stratum != current:
            current = step.stratum
            out.append(f"% stratum {', '.join(current)} ({engine})")
            if engine == "naive":
                out.append("% iteration | predicate | newly deduced facts | accumulated")
                for q in current:
                    out.append(f"% 0 | {q} | {{}} | {{}}")
            else:
                out.append("% iteration | predicate | change | accumulated")
        for q in current:
            d = step.deltas[q]
            if engine == "naive":
                out.append(
                    f"% {step.iteration} | {q} | {render_rows(step.values[q])} | "
                    f"{render_rows(step.values[q])}"
                )
            else:
                after = (step.values[q] | d.adds) - d.removes
                change = f"+{render_rows(d.adds)}"
                if d.removes:
                    change += f" -{render_rows(d.removes)}"
                out.append(f"% {step.iteration} | {q} | {change} | {render_rows(after)}")
    return out


def derived_rules(program, zero_edb: bool = False, symmetric_or: bool = False) -> list:
    """``delta_p``/``nabla_p`` rules in surface syntax, one per rule-defined predicate."""
    derivs = derive_program(program, symmetric_or)
    out = []
    for pred in sorted(program.definitions):
        first = program.rules_for(pred)[0]
        head_vars = [t.name for t in first.head.args]
        for kind, formula in ((Kind.DELTA_ADD, derivs[pred].up), (Kind.DELTA_REMOVE, derivs[pred].down)):
            if zero_edb:
                formula = simplify(formula, frozenset(program.edb_preds))
            mapping = {param(pred, i): v for i, v in enumerate(head_vars, 1)}
            formula = rename_apart(rename_free(formula, mapping), head_vars)
            head = render(Atom(pred, [Var(v) for v in head_vars], kind))
            if formula == BOTTOM:
                # a rule with body false would not parse: head variables need a body occurrence
                out.append(f"% {head} is always empty")
            else:
                out.append(f"{head} :- {render(formula, explicit_exists=False)}.")
    return out


# Commands -----------------------------------------------------------------


def _config(args, **extra) -> SolverConfig:
    return SolverConfig(max_iters=args.max_iters, **extra)


def cmd_eval(args) -> int:
    program = load_program(args.program)
    facts = load_facts(program, args.facts)
    edb = edb_relations(program, facts)
    cfg = _config(args, engine=args.engine, validate=args.validate)
    t0 = time.perf_counter()
    sol = solve(program, edb, cfg, trace=args.trace or args.timing)
    if args.timing:
        for step in sol.trace:
            print(
                f"{', '.join(step.stratum)} iteration {step.iteration}: {step.seconds * 1000:.3f} ms",
                file=sys.stderr,
            )
        print(f"total: {(time.perf_counter() - t0) * 1000:.3f} ms", file=sys.stderr)
    lines = render_trace(program, sol, args.engine) if args.trace else []
    lines += render_solution(program, sol.idb)
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.output and args.output != "-":
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_maintain(args) -> int:
    program = load_program(args.program)
    facts = load_facts(program, args.facts)
    delta = load_delta(program, args.delta)
    edb = edb_relations(program, facts)
    cfg = _config(
        args,
        engine=args.engine,
        maintenance=args.strategy,
        ev_derivative=args.ev,
        validate=args.validate,
        fallback=not args.no_fallback,
    )
    sol = solve(program, edb, cfg)
    result = maintain(program, sol, edb, delta, cfg)
    updated = apply_changes(sol.idb, result.deltas)
    lines = []
    for pred in sorted(program.idb_preds):
        d = result.deltas[pred]
        lines.append(f"% change {pred}: +{len(d.adds)} -{len(d.removes)}")
        lines += render_relation(pred, d.adds, "+")
        lines += render_relation(pred, d.removes, "-")
    if args.validate and args.strategy == "derivative":
        if result.fell_back:
            which = "; ".join(", ".join(s) for s in result.fallback)
            lines.append(f"% validation: fell back to recomputation for {which}")
        else:
            lines.append("% validation: derivative result matched recomputation")
    lines += render_solution(program, updated)
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_derive(args) -> int:
    program = load_program(args.program)
    lines = derived_rules(program, args.zero_edb, args.symmetric_or)
    sys.stdout.write("\n".join(lines) + ("\n" if lines else ""))
    return EXIT_OK


def make_deriver(args) -> Deriver:
    return Deriver(args.symmetric_or)


def cmd_check(args) -> int:
    program = load_program(args.program)
    props = properties.PROPERTIES
    if args.properties:
        props = tuple(p.strip() for p in args.properties.split(",") if p.strip())
        unknown = [p for p in props if p not in properties.PROPERTIES]
        if unknown:
            raise InputError(
                f"unknown properties {', '.join(unknown)}; choose from {', '.join(properties.PROPERTIES)}"
            )
    report = properties.check_program(
        program, args.samples, args.seed, args.universe, props, make_deriver(args)
    )
    print(f"% {args.samples} samples, {report.samples} formula cases, universe {args.universe}, seed {args.seed}")
    for p in props:
        if p in report.failures:
            print(f"{p}: FAIL ({report.counts[p]} of {report.samples} cases)")
            print(report.failures[p].render())
        else:
            print(f"{p}: pass")
    return EXIT_OK if report.ok else EXIT_PROPERTY


# Entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="deltalog", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def positive(text):
        n = int(text)
        if n < 1:
            raise argparse.ArgumentTypeError("must be a positive integer")
        return n

    def iters(p):
        p.add_argument("--max-iters", type=positive, default=10_000, metavar="N")

    p = sub.add_parser("eval", help="compute the least fixed point")
    p.add_argument("program")
    p.add_argument("facts", nargs="?")
    p.add_argument("--engine", choices=("naive", "seminaive"), default="seminaive")
    p.add_argument("--trace", action="store_true", help="print per-iteration tables")
    p.add_argument("--timing", action="store_true", help="per-iteration wall time on stderr")
    p.add_argument("--validate", action="store_true")
    p.add_argument("--output", "-o", metavar="PATH")
    iters(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("maintain", help="update a solution after an EDB change")
    p.add_argument("program")
    p.add_argument("facts")
    p.add_argument("delta")
    p.add_argument("--strategy", choices=("derivative", "trivial"), default="derivative")
    p.add_argument("--ev", choices=("dEv1", "dEv2"), default="dEv1")
    p.add_argument("--engine", choices=("naive", "seminaive"), default="seminaive")
    p.add_argument("--validate", action="store_true")
    p.add_argument("--no-fallback", action="store_true")
    iters(p)
    p.set_defaults(func=cmd_maintain)

    p = sub.add_parser("derive", help="print the delta/nabla rules")
    p.add_argument("program")
    p.add_argument("--zero-edb", action="store_true", help="simplify assuming EDB changes are empty")
    p.add_argument("--symmetric-or", action="store_true")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("check", help="randomized derivative property checks")
    p.add_argument("program")
    p.add_argument("--samples", type=positive, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--universe", type=positive, default=4)
    p.add_argument("--properties", help="comma-separated subset of: " + ", ".join(properties.PROPERTIES))
    p.add_argument("--symmetric-or", action="store_true")
    p.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NonConvergenceError as exc:
        print(f"deltalog: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENT
    except (DivergenceError, RelationSizeError) as exc:
        print(f"deltalog: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except DeltalogError as exc:
        print(f"deltalog: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
