"""Command-line front end: solve, entail, oracle-check, corpus runs.

Exit codes: 10 satisfiable, 20 unsatisfiable, 30 unknown, 1 usage or
pipeline error.  Entailment mode reports the verdict of the conjoined
instance (entailed = 20, not entailed = 10).
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

from .model import Atom, ProgramError
from .oracle import DomainTooLarge, OracleError, enumerate_classical_models, enumerate_stable_models
from .parser import ParseError, parse_formula_text, parse_program
from .smtlib import (
    EntailmentStatus,
    SmtInstance,
    SolverLaunchError,
    SolverProtocolError,
    SpatialModel,
    Status,
    check_entailed,
    default_solver_command,
    emit_smtlib,
    solve,
)
from .spatial import CATALOG
from .transform import PipelineResult, pretty_completion, pretty_ground, run_pipeline

EXIT_CODES = {"sat": 10, "unsat": 20, "unknown": 30, "error": 1}


@dataclass
class RunConfig:
    input_path: Optional[Path]
    solver: Optional[list[str]] = None
    timeout: float = 60.0
    mode: str = "solve"  # solve | entail | oracle-check
    query: Optional[str] = None
    dump_ground: bool = False
    dump_completion: bool = False
    dump_smt: Optional[Path] = None
    fmt: str = "human"
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.mode not in ("solve", "entail", "oracle-check"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class RunReport:
    mode: str
    verdict: str  # sat | unsat | unknown | error
    entailment: Optional[str] = None
    model: Optional[SpatialModel] = None
    timings: dict = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)
    timed_out: bool = False
    dumps: list[str] = field(default_factory=list)
    oracle: Optional[dict] = None

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]


def run(config: RunConfig) -> RunReport:
    """Execute the full pipeline on one input file."""
    t0 = time.perf_counter()
    timings = {"parse": 0.0, "transform": 0.0, "emit": 0.0, "solve": 0.0, "total": 0.0}
    report = RunReport(mode=config.mode, verdict="error", timings=timings)
    assert config.input_path is not None
    try:
        text = config.input_path.read_text(encoding="utf-8")
    except OSError as e:
        report.diagnostics.append(f"[input] {e}")
        timings["total"] = time.perf_counter() - t0
        return report
    try:
        t = time.perf_counter()
        program = parse_program(text)
        timings["parse"] = time.perf_counter() - t

        t = time.perf_counter()
        result = run_pipeline(program)
        timings["transform"] = time.perf_counter() - t
        if config.dump_ground:
            report.dumps.append("% ground theory\n" + pretty_ground(result.ground))
        if config.dump_completion:
            report.dumps.append("% completion\n" + pretty_completion(result.completed))

        if config.mode == "oracle-check":
            report.oracle = _oracle_check(result)
            report.verdict = "sat" if report.oracle["match"] else "error"
            timings["total"] = time.perf_counter() - t0
            return report

        query_asserts = ()
        if config.mode == "entail":
            assert config.query is not None
            from .model import neg

            query = parse_formula_text(config.query, program)
            from .smtlib import _validate_query

            _validate_query(result.ground, query)
            query_asserts = (neg(query),)

        t = time.perf_counter()
        instance = emit_smtlib(result.completed, query_asserts=query_asserts)
        timings["emit"] = time.perf_counter() - t
        if config.dump_smt is not None:
            config.dump_smt.write_text(instance.text, encoding="ascii")

        t = time.perf_counter()
        verdict = solve(instance, config.solver, config.timeout)
        timings["solve"] = time.perf_counter() - t

        report.verdict = verdict.status.value
        report.model = verdict.model
        report.timed_out = verdict.timed_out
        if config.mode == "entail":
            report.entailment = {
                Status.UNSAT: "entailed",
                Status.SAT: "not-entailed",
                Status.UNKNOWN: "unknown",
            }[verdict.status]
    except (ParseError, ProgramError, OracleError, DomainTooLarge) as e:
        report.diagnostics.append(_diagnostic(e))
    except (SolverLaunchError, SolverProtocolError) as e:
        report.diagnostics.append(f"[solver] {e}")
    timings["total"] = time.perf_counter() - t0
    return report


def _diagnostic(e: Exception) -> str:
    if isinstance(e, ParseError):
        return f"[parse] {e}"
    if isinstance(e, ProgramError):
        return str(e)
    return f"[oracle] {e}"


def _oracle_check(result: PipelineResult) -> dict:
    stable = enumerate_stable_models(result.ground)
    classical = enumerate_classical_models(result.completed.sentences, result.ground)
    stable_keys = {str(m) for m in stable}
    classical_keys = {str(m) for m in classical}
    return {
        "stable_models": sorted(stable_keys),
        "completion_models": sorted(classical_keys),
        "match": stable_keys == classical_keys,
    }


# ---------------------------------------------------------------------------
# Output formatting


def _format_value(value: Union[Fraction, float]) -> str:
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return f"{value.numerator}.0" if value.numerator == int(value) else str(value)
        return f"{float(value):.6g}"
    return f"{value:.6g}"


def human_report(report: RunReport) -> str:
    lines: list[str] = []
    lines.extend(report.dumps)
    if report.oracle is not None:
        lines.append("stable models:")
        lines.extend(f"  {m}" for m in report.oracle["stable_models"])
        lines.append("completion models:")
        lines.extend(f"  {m}" for m in report.oracle["completion_models"])
        lines.append("match: " + ("yes" if report.oracle["match"] else "NO"))
        lines.append(f"total time: {report.timings['total']:.3f}s")
        return "\n".join(lines)
    if report.verdict == "error":
        lines.append("error")
        lines.extend(f"  {d}" for d in report.diagnostics)
        return "\n".join(lines)
    if report.entailment is not None:
        lines.append(report.entailment.upper().replace("-", "_"))
    lines.append(report.verdict + (" (timeout)" if report.timed_out else ""))
    if report.model is not None:
        for key in sorted(report.model.parameters, key=lambda k: (k[1], k[2] if k[2] is not None else -1, k[0])):
            fn, obj, step = key
            if obj.startswith(("pair_", "triple_", "aux_")):
                continue  # internal solver witnesses
            app = f"{fn}({obj})" if step is None else f"{fn}({obj},{step})"
            lines.append(f"  {app} = {_format_value(report.model.parameters[key])}")
        for atom in sorted(report.model.atoms, key=str):
            value = report.model.atoms[atom]
            if value or _is_shown(atom):
                lines.append(f"  {atom} = {'true' if value else 'false'}")
        for fn in sorted(report.model.functions, key=str):
            lines.append(f"  {fn} = {report.model.functions[fn]}")
    t = report.timings
    lines.append(
        f"total time: {t['total']:.3f}s (parse {t['parse']:.3f}s, transform {t['transform']:.3f}s, "
        f"emit {t['emit']:.3f}s, solve {t['solve']:.3f}s)"
    )
    return "\n".join(lines)


def _is_shown(atom: Atom) -> bool:
    return CATALOG.has_relation(atom.pred)


def structured_report(report: RunReport) -> dict:
    model = None
    if report.model is not None:
        model = {
            "parameters": [
                {
                    "function": fn,
                    "object": obj,
                    "step": step,
                    "value": float(v),
                    "exact": str(v) if isinstance(v, Fraction) else None,
                }
                for (fn, obj, step), v in sorted(
                    report.model.parameters.items(), key=lambda kv: str(kv[0])
                )
            ],
            "atoms": [
                {"atom": str(a), "value": v}
                for a, v in sorted(report.model.atoms.items(), key=lambda kv: str(kv[0]))
            ],
            "functions": [
                {"term": str(t), "value": str(v)}
                for t, v in sorted(report.model.functions.items(), key=lambda kv: str(kv[0]))
            ],
            "raw": {name: b.raw for name, b in sorted(report.model.bindings.items())},
        }
    out = {
        "mode": report.mode,
        "verdict": report.verdict,
        "entailment": report.entailment,
        "timed_out": report.timed_out,
        "model": model,
        "timings": report.timings,
        "diagnostics": report.diagnostics,
    }
    if report.oracle is not None:
        out["oracle"] = report.oracle
    return out


# ---------------------------------------------------------------------------
# Corpus runner


@dataclass
class CorpusRow:
    name: str
    expected: str
    verdict: str
    elapsed: float
    ok: bool
    detail: str = ""


def run_corpus(directory: Path, config: RunConfig) -> tuple[list[CorpusRow], int]:
    """Run every .aspmtqs file with an expected-verdict sidecar."""
    files = sorted(directory.glob("*.aspmtqs"))
    rows: list[CorpusRow] = []

    def run_one(path: Path) -> Optional[CorpusRow]:
        sidecar = path.with_suffix(".expected.json")
        if not sidecar.exists():
            print(f"warning: {path.name}: no expected-verdict sidecar, skipped", file=sys.stderr)
            return None
        spec = json.loads(sidecar.read_text(encoding="utf-8"))
        start = time.perf_counter()
        detail: list[str] = []
        try:
            program = parse_program(path.read_text(encoding="utf-8"))
            result = run_pipeline(program)
            instance = emit_smtlib(result.completed)
            verdict = solve(instance, config.solver, config.timeout)
            got = verdict.status.value
            ok = got == spec.get("verdict")
            if not ok:
                detail.append(f"verdict {got} != expected {spec.get('verdict')}")
            for query_text in spec.get("entailed", []):
                query = parse_formula_text(query_text, program)
                res = check_entailed(result.completed, query, config.solver, config.timeout)
                if res.status is not EntailmentStatus.ENTAILED:
                    ok = False
                    detail.append(f"{query_text}: expected entailed, got {res.status.value}")
            for query_text in spec.get("not_entailed", []):
                query = parse_formula_text(query_text, program)
                res = check_entailed(result.completed, query, config.solver, config.timeout)
                if res.status is not EntailmentStatus.NOT_ENTAILED:
                    ok = False
                    detail.append(f"{query_text}: expected not entailed, got {res.status.value}")
        except Exception as e:  # a corrupted file must not sink other rows
            got = "error"
            ok = False
            detail.append(str(e))
        return CorpusRow(
            path.name, spec.get("verdict", "?"), got, time.perf_counter() - start, ok, "; ".join(detail)
        )

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(run_one, files))
    else:
        results = [run_one(f) for f in files]
    rows = [r for r in results if r is not None]
    failures = sum(1 for r in rows if not r.ok)
    return rows, (1 if failures else 0)


def print_corpus(rows: list[CorpusRow]) -> None:
    width = max((len(r.name) for r in rows), default=10)
    for r in rows:
        status = "pass" if r.ok else "FAIL"
        line = f"{r.name:<{width}}  expected={r.expected:<7} got={r.verdict:<7} {r.elapsed:6.2f}s  {status}"
        if r.detail:
            line += f"  [{r.detail}]"
        print(line)
    total = len(rows)
    failed = sum(1 for r in rows if not r.ok)
    print(f"{total - failed}/{total} passed")


# ---------------------------------------------------------------------------
# Entry point


def build_arg_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="aspmtqs",
        description="Compile non-monotonic spatial logic programs to SMT and solve them.",
    )
    p.add_argument("input", nargs="?", type=Path, help="program file (.aspmtqs)")
    p.add_argument("--solver", metavar="CMD", help="solver command (default: $ASPMTQS_SOLVER or bundled Z3 wrapper)")
    p.add_argument("--timeout", metavar="S", type=float, default=60.0, help="solver timeout in seconds")
    p.add_argument("--entails", metavar="FORMULA", help="check entailment of a ground formula")
    p.add_argument("--oracle-check", action="store_true", help="compare stable models against completion models (finite programs)")
    p.add_argument("--dump-ground", action="store_true", help="print the ground theory")
    p.add_argument("--dump-completion", action="store_true", help="print the completed theory")
    p.add_argument("--dump-smt", metavar="PATH", type=Path, help="write the SMT-LIB instance to PATH")
    p.add_argument("--format", dest="fmt", choices=("human", "structured"), default="human")
    p.add_argument("--jobs", type=int, default=1, help="parallel corpus jobs")
    p.add_argument("--corpus", metavar="DIR", type=Path, help="run all .aspmtqs files in DIR against sidecars")
    p.add_argument("--list-relations", action="store_true", help="print the relation catalog")
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_arg_parser().parse_args(argv)

    if args.list_relations:
        for schema in CATALOG.schemas():
            desc = f"  {schema.description}" if schema.description else ""
            print(f"{schema.signature():<50} [{schema.provenance}]{desc}")
        return 0

    solver = shlex.split(args.solver) if args.solver else None
    if args.corpus is not None:
        config = RunConfig(None, solver, args.timeout, jobs=max(1, args.jobs))
        if not args.corpus.is_dir():
            print(f"error: {args.corpus} is not a directory", file=sys.stderr)
            return 1
        rows, code = run_corpus(args.corpus, config)
        print_corpus(rows)
        return code

    if args.input is None:
        print("error: an input file is required", file=sys.stderr)
        return 1
    if args.entails and args.oracle_check:
        print("error: --entails and --oracle-check are mutually exclusive", file=sys.stderr)
        return 1
    mode = "entail" if args.entails else "oracle-check" if args.oracle_check else "solve"
    try:
        config = RunConfig(
            args.input,
            solver,
            args.timeout,
            mode=mode,
            query=args.entails,
            dump_ground=args.dump_ground,
            dump_completion=args.dump_completion,
            dump_smt=args.dump_smt,
            fmt=args.fmt,
            jobs=args.jobs,
        )
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    report = run(config)
    if config.fmt == "structured":
        print(json.dumps(structured_report(report), indent=2))
    else:
        print(human_report(report))
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
