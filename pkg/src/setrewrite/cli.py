"""Command-line front end.

Exit codes: 0 success, 1 domain error (bad input, step limit, timeout),
2 property violation (selftest failure, wrong benchmark result),
3 internal inconsistency.
"""

from __future__ import annotations

import argparse
import json
import multiprocessing
import os
import pathlib
import sys
from typing import List, Optional

from .automaton import DependencyKind, construct, export_dot
from .errors import InternalInconsistencyError, ParseError, RewriteError
from .estimator import ENGINES, SetAutomatonRewriter, check_terms, check_trs
from .rewriter import STRATEGIES
from .terms import format_position

EXIT_OK, EXIT_DOMAIN, EXIT_PROPERTY, EXIT_INTERNAL = 0, 1, 2, 3

BUNDLED = pathlib.Path(__file__).resolve().parent / "benchmarks"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_DOMAIN, f"{self.prog}: error: {message}\n")


def _read_term_arg(text: str) -> str:
    if text.startswith("@"):
        return pathlib.Path(text[1:]).read_text(encoding="utf-8")
    return text


def _trace_line(ev: dict) -> str:
    pos = format_position(ev["position"]) if "position" in ev else ""
    parts = [ev["kind"]]
    if "state" in ev:
        parts.append(f"s{ev['state']}")
    parts.append(pos)
    if "symbol" in ev:
        parts.append(ev["symbol"])
    if "rule" in ev:
        parts.append(f"R{ev['rule'] + 1}")
    if "consistent" in ev:
        parts.append("consistent" if ev["consistent"] else "inconsistent")
    return "\t".join(parts)


# -- rewrite ------------------------------------------------------------------------


def cmd_rewrite(args) -> int:
    est = SetAutomatonRewriter(engine=args.engine, relation=args.relation, max_steps=args.max_steps,
                               strategy=args.strategy, debug=args.debug, trace=args.trace)
    est.fit(args.trs)
    [t] = _terms(est, args.term)
    report = est.rewrite_one(t)
    if args.json:
        rec = report.as_dict(with_trace=args.trace)
        if args.trace:
            rec["trace"] = [_trace_line(ev) for ev in report.trace or ()]
        rec["construct_ms"] = est.construct_ms_
        rec["rewrite_ms"] = rec.pop("wall_time_ms")
        print(json.dumps(rec, sort_keys=True))
        return EXIT_OK
    if args.trace:
        for ev in report.trace or ():
            print(_trace_line(ev), file=sys.stderr)
    print(report.normal_form)
    counters = [f"steps={report.rewrite_steps}"]
    if report.symbol_inspections is not None:
        counters.append(f"inspections={report.symbol_inspections}")
        counters.append(f"checks={report.consistency_checks}")
    counters.append(f"construct_ms={est.construct_ms_:.2f}")
    counters.append(f"rewrite_ms={report.wall_time_ms:.2f}")
    print("# " + " ".join(counters), file=sys.stderr)
    return EXIT_OK


def _terms(est, text):
    return check_terms(_read_term_arg(text).strip(), est.trs_)


# -- dot ------------------------------------------------------------------------------


def cmd_dot(args) -> int:
    trs = check_trs(args.trs)
    a = construct(trs, DependencyKind(args.relation), max_states=args.max_states)
    if args.stats:
        st = a.stats()
        st["branches"] = st.pop("branch_count")
        if args.json:
            print(json.dumps(st, sort_keys=True))
        else:
            for k in ("states", "symbols", "rules", "transition_cells", "branches"):
                print(f"{k}\t{st[k]}")
        return EXIT_OK
    sys.stdout.write(export_dot(a))
    return EXIT_OK


# -- bench ---------------------------------------------------------------------------------

BENCH_COLUMNS = ("name", "engine", "solved", "rewrite_steps", "inspections", "inspections_per_step",
                 "construct_ms", "rewrite_ms")


def discover_suite(suite_dir: pathlib.Path) -> List[str]:
    if not suite_dir.is_dir():
        raise RewriteError(f"no such suite directory: {suite_dir}")
    names = sorted(p.stem for p in suite_dir.glob("*.trs"))
    for n in names:
        if not (suite_dir / f"{n}.term").is_file():
            raise RewriteError(f"benchmark {n}: missing {n}.term")
    return names


def run_benchmark(suite_dir: pathlib.Path, name: str, engine: str, max_steps: int) -> dict:
    """Run one benchmark in this process and return its row."""
    est = SetAutomatonRewriter(engine=engine, max_steps=max_steps)
    est.fit(suite_dir / f"{name}.trs")
    [t] = _terms(est, "@" + str(suite_dir / f"{name}.term"))
    report = est.rewrite_one(t)
    solved = "yes"
    nf_path = suite_dir / f"{name}.nf"
    if nf_path.is_file():
        expected = est.trs_.parse_term(nf_path.read_text(encoding="utf-8").strip())
        if expected is not report.result:
            solved = "WRONG"
    ratio = None
    if report.symbol_inspections is not None and report.rewrite_steps:
        ratio = round(report.symbol_inspections / report.rewrite_steps, 2)
    return {
        "name": name,
        "engine": engine,
        "solved": solved,
        "rewrite_steps": report.rewrite_steps,
        "inspections": report.symbol_inspections,
        "inspections_per_step": ratio,
        "construct_ms": round(est.construct_ms_, 2),
        "rewrite_ms": round(report.wall_time_ms, 2),
    }


def _bench_worker(conn, suite_dir, name, engine, max_steps):
    try:
        conn.send(("ok", run_benchmark(suite_dir, name, engine, max_steps)))
    except RewriteError as e:
        conn.send(("error", f"{type(e).__name__}: {e}"))
    except InternalInconsistencyError as e:
        conn.send(("internal", str(e)))
    finally:
        conn.close()


def _bench_row_failed(name, engine, status):
    row = {c: None for c in BENCH_COLUMNS}
    row.update(name=name, engine=engine, solved=status)
    return row


def bench_one(suite_dir, name, engine, max_steps, timeout) -> dict:
    """Run one benchmark in a child process; DNF on timeout."""
    ctx = multiprocessing.get_context("fork" if hasattr(os, "fork") else "spawn")
    recv, send = ctx.Pipe(duplex=False)
    proc = ctx.Process(target=_bench_worker, args=(send, suite_dir, name, engine, max_steps))
    proc.start()
    send.close()
    got = None
    if recv.poll(timeout):
        try:
            got = recv.recv()
        except EOFError:
            got = None
    if proc.is_alive():
        proc.terminate()
    proc.join()
    if got is None:
        return _bench_row_failed(name, engine, "DNF" if proc.exitcode in (None, -15) else "ERROR")
    kind, payload = got
    if kind == "ok":
        return payload
    row = _bench_row_failed(name, engine, "ERROR" if kind == "error" else "INTERNAL")
    row["detail"] = payload
    return row


def cmd_bench(args) -> int:
    suite_dir = pathlib.Path(args.suite_dir) if args.suite_dir else BUNDLED
    names = discover_suite(suite_dir)
    if args.only:
        names = [n for n in names if n in set(args.only)]
    rows = [bench_one(suite_dir, n, args.engine, args.max_steps, args.timeout) for n in names]
    failures = sum(r["solved"] != "yes" for r in rows)
    if args.json:
        for r in rows:
            print(json.dumps(r, sort_keys=True))
        print(json.dumps({"total_failures": failures}))
    else:
        print("\t".join(BENCH_COLUMNS))
        for r in rows:
            print("\t".join("-" if r[c] is None else str(r[c]) for c in BENCH_COLUMNS))
        print(f"Total failures: {failures}")
    if any(r["solved"] == "INTERNAL" for r in rows):
        return EXIT_INTERNAL
    if any(r["solved"] == "WRONG" for r in rows):
        return EXIT_PROPERTY
    return EXIT_DOMAIN if failures else EXIT_OK


# -- selftest ----------------------------------------------------------------------------------


def cmd_selftest(args) -> int:
    from .fuzz import selftest

    report = selftest(args.iterations, args.seed, laws=not args.no_laws)
    if report.ok:
        print(f"selftest passed: {report.iterations} cases, seed {report.seed}, "
              f"{report.unique} with a known unique normal form, {report.skipped} skipped, "
              f"{report.seconds:.1f}s")
        return EXIT_OK
    v = report.violations[0]
    print(f"selftest FAILED (seed {report.seed}, case {v.case.label})", file=sys.stderr)
    print(str(v), file=sys.stderr)
    return EXIT_INTERNAL if v.check == "internal" else EXIT_PROPERTY


# -- entry point ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="setrewrite", description="Term rewriting with set automata.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("rewrite", help="normalise a term")
    r.add_argument("trs", help="TRS file")
    r.add_argument("term", help="ground term, or @FILE to read it from a file")
    r.add_argument("--engine", choices=ENGINES, default="stack")
    r.add_argument("--relation", choices=[k.value for k in DependencyKind], default=None,
                   help="dependency relation (default: outermost for stack, standard otherwise)")
    r.add_argument("--strategy", choices=sorted(STRATEGIES), default="reduce-on-discovery")
    r.add_argument("--max-steps", type=int, default=10**9)
    r.add_argument("--trace", action="store_true", help="print engine events to stderr")
    r.add_argument("--debug", action="store_true", help="check engine invariants while running")
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_rewrite)

    d = sub.add_parser("dot", help="print the set automaton as DOT")
    d.add_argument("trs")
    d.add_argument("--relation", choices=[k.value for k in DependencyKind], default="standard")
    d.add_argument("--max-states", type=int, default=1_000_000)
    d.add_argument("--stats", action="store_true", help="print sizes instead of the graph")
    d.add_argument("--json", action="store_true")
    d.set_defaults(func=cmd_dot)

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("suite_dir", nargs="?", help="directory of NAME.trs/NAME.term[/NAME.nf] (default: bundled)")
    b.add_argument("--engine", choices=ENGINES, default="stack")
    b.add_argument("--timeout", type=float, default=60.0, help="seconds per benchmark")
    b.add_argument("--max-steps", type=int, default=10**9)
    b.add_argument("--only", nargs="*", help="benchmark names to run")
    b.add_argument("--json", action="store_true")
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("selftest", help="randomised cross-check against brute force")
    s.add_argument("--iterations", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--no-laws", action="store_true", help="skip the configuration-tree law checks")
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except InternalInconsistencyError as e:
        print(f"internal inconsistency: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except (RewriteError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
