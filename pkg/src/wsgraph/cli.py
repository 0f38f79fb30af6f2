"""Command-line entry point: ``solve``, ``corpus``, ``bench`` and ``validate``.

Exit codes: 0 answer (or clean run), 2 no answer, 1 usage/validation error
or oracle disagreement.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

from .facts import (
    META_FILE,
    BundleMeta,
    FactSyntaxError,
    ProblemBundle,
    bundle_to_facts,
    load_bundle_dir,
    load_bundle_files,
    load_problem_bundle,
    parse_fact_file,
    parse_meta,
    read_facts,
    serialize_fact_file,
)
from .graph import Diagnostic, LabeledGraph, ValidationError, problem_diagnostics, validate_knowledge_graph, validate_sentence_graph
from .matcher import (
    CompatibilityPolicy,
    CompatMode,
    SearchBudget,
    compatibility,
    enumerate_isomorphisms,
    extract_knowledge_core,
    extract_sentence_core,
)
from .oracle import InstanceTooLarge, evaluate_definition7, evaluate_rules, random_bundle
from .resolver import SolveConfig, Verdict, solve

EXIT_ANSWER = 0
EXIT_ERROR = 1
EXIT_NO_ANSWER = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors, which would collide with "no answer"
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def bundled_corpus() -> Path:
    return Path(str(resources.files("wsgraph") / "corpus"))


def _emit_diagnostics(diags: Sequence[Diagnostic]) -> None:
    for d in diags:
        print(d, file=sys.stderr)


def _config(args: argparse.Namespace, meta_policy: str | None = None) -> SolveConfig:
    mode = args.policy or meta_policy or CompatMode.CLASS_ONLY.value
    return SolveConfig(
        policy=CompatibilityPolicy(CompatMode(mode)),
        budget=SearchBudget(max_mappings=args.max_mappings, time_limit=args.time_limit),
    )


def _oracle_check(bundle, cfg: SolveConfig, verdict: Verdict) -> dict[str, Any]:
    """Compare a verdict with both reference evaluations; skipped when out of bounds."""
    policy = cfg.policy.with_pairs(bundle.synonyms, bundle.similar)
    try:
        by_rules = evaluate_rules(bundle, cfg.policy.mode)
        by_definition = evaluate_definition7(bundle.problem, bundle.knowledge, policy)
    except InstanceTooLarge as exc:
        return {"status": "skipped", "detail": str(exc)}
    mine = (verdict.answer, verdict.reason.value)
    others = {
        "rules": (by_rules.answer, by_rules.reason.value),
        "definition": (by_definition.answer, by_definition.reason.value),
    }
    disagree = sorted(name for name, v in others.items() if v != mine)
    return {"status": "disagree" if disagree else "agree", "detail": ", ".join(disagree)}


def _with_extra_aux(bundle: ProblemBundle, aux_path: str) -> ProblemBundle:
    """Re-load a bundle with the pairs of an extra aux file added."""
    facts = bundle_to_facts(bundle) + read_facts(aux_path)
    return load_problem_bundle(facts, label=bundle.label, source_paths=bundle.source_paths, metadata=bundle.metadata)


# -- solve --------------------------------------------------------------------

def cmd_solve(args: argparse.Namespace) -> int:
    problem = Path(args.problem)
    meta = BundleMeta()
    try:
        if problem.is_dir():
            if args.knowledge:
                raise ValidationError([Diagnostic("UsageError", "KNOWLEDGE must be omitted when PROBLEM is a bundle directory")])
            bundle, meta = load_bundle_dir(problem)
            if args.aux:
                bundle = _with_extra_aux(bundle, args.aux)
        else:
            if args.knowledge is None:
                raise ValidationError([Diagnostic("UsageError", "KNOWLEDGE is required unless PROBLEM is a bundle directory")])
            bundle = load_bundle_files(problem, args.knowledge, args.aux)
    except ValidationError as exc:
        _emit_diagnostics(exc.diagnostics)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    cfg = _config(args, meta.policy)
    verdict, report = solve(bundle, cfg)
    doc = report.to_dict(stable=args.stable)
    check = None
    if args.check_oracle:
        check = _oracle_check(bundle, cfg, verdict)
        doc["oracle"] = check

    if args.format == "json":
        print(json.dumps(doc, sort_keys=True, indent=2))
    else:
        print(report.to_text())
        if check is not None:
            print(f"oracle: {check['status']}" + (f" ({check['detail']})" if check["detail"] else ""))
    if check is not None and check["status"] == "disagree":
        return EXIT_ERROR
    return EXIT_ANSWER if verdict.answer is not None else EXIT_NO_ANSWER


# -- corpus -------------------------------------------------------------------

@dataclass
class CorpusRow:
    label: str
    outcome: str
    answer: str | None = None
    reason: str | None = None
    expected: str | None = None
    correct: bool | None = None
    policy: str | None = None
    mappings: int | None = None
    error: list[str] = field(default_factory=list)
    oracle: dict[str, Any] | None = None
    elapsed_ms: float = 0.0

    def to_dict(self, stable: bool) -> dict[str, Any]:
        doc: dict[str, Any] = {"label": self.label, "outcome": self.outcome}
        for key in ("answer", "reason", "expected", "policy", "mappings", "oracle"):
            value = getattr(self, key)
            if value is not None:
                doc[key] = value
        if self.correct is not None:
            doc["correct"] = self.correct
        if self.error:
            doc["error"] = self.error
        if not stable:
            doc["timing"] = {"elapsed_ms": round(self.elapsed_ms, 3)}
        return doc


@dataclass
class CorpusResult:
    rows: list[CorpusRow]

    @property
    def totals(self) -> dict[str, Any]:
        total = len(self.rows)
        answered = sum(r.outcome == "answer" for r in self.rows)
        scored = [r for r in self.rows if r.outcome == "answer" and r.correct is not None]
        correct = sum(bool(r.correct) for r in scored)
        return {
            "total": total,
            "answered": answered,
            "errors": sum(r.outcome == "error" for r in self.rows),
            "with_expected": sum(r.expected is not None for r in self.rows),
            "correct": correct,
            "accuracy": correct / len(scored) if scored else 0.0,
            "coverage": answered / total if total else 0.0,
        }

    @property
    def oracle_disagreements(self) -> list[str]:
        return [r.label for r in self.rows if r.oracle and r.oracle["status"] == "disagree"]

    def to_dict(self, stable: bool = False) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "problems": [r.to_dict(stable) for r in self.rows],
            "totals": self.totals,
        }
        if not stable:
            doc["timing"] = {"elapsed_ms": round(sum(r.elapsed_ms for r in self.rows), 3)}
        return doc

    def to_json(self, stable: bool = False) -> str:
        return json.dumps(self.to_dict(stable), sort_keys=True, indent=2) + "\n"

    def to_table(self) -> str:
        header = ("label", "outcome", "answer", "expected", "ok")
        body = []
        for r in self.rows:
            ok = "" if r.correct is None else ("yes" if r.correct else "no")
            shown = r.answer if r.outcome == "answer" else (r.reason or "; ".join(r.error)[:40])
            body.append((r.label, r.outcome, shown or "", r.expected or "", ok))
        widths = [max(len(row[i]) for row in [header, *body]) for i in range(len(header))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in [header, *body]]
        t = self.totals
        lines.append("")
        lines.append(
            f"answered {t['answered']}/{t['total']}  correct {t['correct']}  "
            f"accuracy {t['accuracy']:.4f}  coverage {t['coverage']:.4f}  errors {t['errors']}"
        )
        return "\n".join(lines)


def _meta_only(path: Path) -> BundleMeta:
    try:
        if (path / META_FILE).is_file():
            return parse_meta(read_facts(path / META_FILE))
    except ValidationError:
        pass
    return BundleMeta()


def solve_corpus_entry(path: Path, policy: str | None, max_mappings: int, time_limit: float, check_oracle: bool) -> CorpusRow:
    start = time.perf_counter()
    try:
        bundle, meta = load_bundle_dir(path)
    except ValidationError as exc:
        meta = _meta_only(path)
        return CorpusRow(path.name, "error", expected=meta.expected, error=[str(d) for d in exc.diagnostics],
                         elapsed_ms=(time.perf_counter() - start) * 1000)
    except OSError as exc:
        return CorpusRow(path.name, "error", error=[str(exc)], elapsed_ms=(time.perf_counter() - start) * 1000)

    mode = CompatMode(policy or meta.policy or CompatMode.CLASS_ONLY.value)
    cfg = SolveConfig(CompatibilityPolicy(mode), SearchBudget(max_mappings=max_mappings, time_limit=time_limit))
    verdict, report = solve(bundle, cfg)
    row = CorpusRow(
        label=path.name,
        outcome=verdict.outcome,
        answer=verdict.answer,
        reason=verdict.reason.value,
        expected=meta.expected,
        policy=mode.value,
        mappings=report.mapping_count,
    )
    if meta.expected is not None:
        row.correct = verdict.answer == meta.expected
    if check_oracle:
        row.oracle = _oracle_check(bundle, cfg, verdict)
    row.elapsed_ms = (time.perf_counter() - start) * 1000
    return row


def run_corpus(
    corpus_dir: str | Path,
    policy: str | None = None,
    max_mappings: int = SearchBudget.max_mappings,
    time_limit: float = SearchBudget.time_limit,
    check_oracle: bool = False,
    jobs: int = 1,
) -> CorpusResult:
    root = Path(corpus_dir)
    entries = sorted((p for p in root.iterdir() if p.is_dir()), key=lambda p: p.name)
    work = [(p, policy, max_mappings, time_limit, check_oracle) for p in entries]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(solve_corpus_entry, *zip(*work)))
    else:
        rows = [solve_corpus_entry(*w) for w in work]
    rows.sort(key=lambda r: r.label)
    return CorpusResult(rows)


def cmd_corpus(args: argparse.Namespace) -> int:
    corpus_dir = Path(args.corpus_dir) if args.corpus_dir else bundled_corpus()
    if not corpus_dir.is_dir():
        print(f"error: {corpus_dir} is not a directory", file=sys.stderr)
        return EXIT_ERROR
    result = run_corpus(corpus_dir, args.policy, args.max_mappings, args.time_limit, args.check_oracle, args.jobs)
    text = result.to_json(stable=args.stable)
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    if args.format == "json":
        sys.stdout.write(text)
    else:
        print(result.to_table())
    if args.check_oracle and result.oracle_disagreements:
        print(f"oracle disagreement on: {', '.join(result.oracle_disagreements)}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_ANSWER


# -- bench --------------------------------------------------------------------

def bench_instances(size: int, sentence_nodes: int, density: float, seeds: Sequence[int], n_labels: int = 3, n_classes: int = 4):
    for seed in seeds:
        rng = random.Random(f"bench:{size}:{sentence_nodes}:{seed}")
        yield random_bundle(rng, sentence_nodes, size, density, n_labels, n_classes, label=f"bench_{size}_{seed}")


def run_bench(
    sizes: Sequence[int],
    density: float,
    seeds: Sequence[int],
    repetitions: int,
    sentence_factor: float = 2.0,
    budget: SearchBudget | None = None,
) -> dict[str, Any]:
    budget = budget or SearchBudget()
    report: dict[str, Any] = {
        "config": {"density": density, "seeds": list(seeds), "repetitions": repetitions, "sentence_factor": sentence_factor},
        "sizes": [],
    }
    if repetitions <= 0 or not seeds:
        return report
    for size in sizes:
        n_sentence = max(size, round(size * sentence_factor))
        timings: list[float] = []
        mapping_counts: list[int] = []
        truncated = 0
        digest = hashlib.sha256()
        for bundle in bench_instances(size, n_sentence, density, seeds):
            digest.update(serialize_fact_file(bundle_to_facts(bundle)))
            s_core = extract_sentence_core(bundle.problem.sentence)
            k_core = extract_knowledge_core(bundle.knowledge)
            compat = compatibility(CompatibilityPolicy(), bundle.problem.sentence, bundle.knowledge)
            for _ in range(repetitions):
                start = time.perf_counter()
                result = enumerate_isomorphisms(s_core, k_core, compat, budget)
                timings.append((time.perf_counter() - start) * 1000)
            mapping_counts.append(len(result.mappings))
            truncated += not result.exhaustiveness.complete
        report["sizes"].append({
            "knowledge_nodes": size,
            "sentence_nodes": n_sentence,
            "instances": len(seeds),
            "instance_digest": digest.hexdigest(),
            "min_ms": round(min(timings), 4),
            "median_ms": round(statistics.median(timings), 4),
            "max_ms": round(max(timings), 4),
            "mean_mappings": round(statistics.fmean(mapping_counts), 3),
            "truncated": truncated,
        })
    return report


def cmd_bench(args: argparse.Namespace) -> int:
    seeds = [args.seed + i for i in range(args.seeds)]
    budget = SearchBudget(max_mappings=args.max_mappings, time_limit=args.time_limit)
    report = run_bench(args.sizes, args.density, seeds, args.repetitions, args.sentence_factor, budget)
    if args.format == "json":
        print(json.dumps(report, sort_keys=True, indent=2))
    else:
        for row in report["sizes"]:
            print(f"k={row['knowledge_nodes']:>2} s={row['sentence_nodes']:>2}  "
                  f"min {row['min_ms']:.3f}ms  median {row['median_ms']:.3f}ms  max {row['max_ms']:.3f}ms  "
                  f"mappings~{row['mean_mappings']}")
        if not report["sizes"]:
            print("no measurements")
    return EXIT_ANSWER


# -- validate -----------------------------------------------------------------

def validate_path(path: Path) -> list[Diagnostic]:
    """All diagnostics (errors and warnings) for a fact file or bundle directory."""
    if path.is_dir():
        try:
            bundle, _ = load_bundle_dir(path)
        except ValidationError as exc:
            return exc.diagnostics
        return list(bundle.warnings)

    source = str(path)
    try:
        facts = parse_fact_file(path.read_bytes(), source=source)
    except FactSyntaxError as exc:
        return exc.diagnostics

    def locate(diags: list[Diagnostic]) -> list[Diagnostic]:
        out = []
        for d in diags:
            line = next((f.line for f in facts if any(n in f.args for n in d.nodes)), None) if d.nodes else None
            out.append(d.located(line, None, source))
        return out

    diags: list[Diagnostic] = []
    by_pred: dict[str, list] = {}
    for f in facts:
        by_pred.setdefault(f.predicate, []).append(f.args)
    sentence = None
    if "has_s" in by_pred:
        try:
            sentence = validate_sentence_graph(LabeledGraph.from_edges(by_pred["has_s"]))
        except ValidationError as exc:
            diags += exc.diagnostics
    if "has_k" in by_pred:
        try:
            diags += validate_knowledge_graph(LabeledGraph.from_edges(by_pred["has_k"])).warnings
        except ValidationError as exc:
            diags += exc.diagnostics
    roles = [by_pred.get(p, []) for p in ("pronoun", "ans_ch1", "ans_ch2")]
    if sentence is not None and all(len(r) == 1 for r in roles):
        diags += problem_diagnostics(sentence, *(r[0][0] for r in roles))
    if not facts:
        diags.append(Diagnostic("EmptyFile", "no facts found", severity="warning"))
    return locate(diags)


def cmd_validate(args: argparse.Namespace) -> int:
    path = Path(args.path)
    if not path.exists():
        print(f"error: {path} does not exist", file=sys.stderr)
        return EXIT_ERROR
    diags = validate_path(path)
    for d in diags:
        print(d)
    errors = [d for d in diags if d.is_error]
    if not diags:
        print("OK")
    elif not errors and args.allow_warnings:
        print(f"OK ({len(diags)} warning{'s' if len(diags) != 1 else ''})")
    return EXIT_ERROR if errors or (diags and not args.allow_warnings) else EXIT_ANSWER


# -- wiring -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="text")
    common.add_argument("--policy", choices=[m.value for m in CompatMode], default=None,
                        help="node compatibility policy (default: bundle meta, else class_only)")
    common.add_argument("--max-mappings", type=int, default=SearchBudget.max_mappings)
    common.add_argument("--time-limit", type=float, default=SearchBudget.time_limit, metavar="SECS")
    common.add_argument("--stable", action="store_true", help="omit timing fields from reports")

    parser = _Parser(prog="wsgraph", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", parents=[common], help="solve one problem")
    p.add_argument("problem", help="problem facts file, or a bundle directory")
    p.add_argument("knowledge", nargs="?", help="knowledge facts file")
    p.add_argument("--aux", help="synonyms/similar facts file")
    p.add_argument("--check-oracle", action="store_true", help="cross-check with the reference evaluators")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("corpus", parents=[common], help="solve and score a corpus directory")
    p.add_argument("corpus_dir", nargs="?", help="defaults to the bundled sample corpus")
    p.add_argument("--check-oracle", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--report", help="also write the JSON report to this path")
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("bench", parents=[common], help="time the matcher on seeded random instances")
    p.add_argument("--sizes", type=int, nargs="+", default=[4, 5, 6, 7, 8, 9, 10], help="knowledge node counts")
    p.add_argument("--sentence-factor", type=float, default=2.0, help="sentence nodes per knowledge node")
    p.add_argument("--density", type=float, default=0.3)
    p.add_argument("--seeds", type=int, default=20, help="instances per size")
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--repetitions", type=int, default=3)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("validate", parents=[common], help="check a fact file or bundle directory")
    p.add_argument("path")
    p.add_argument("--allow-warnings", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("max_mappings", "time_limit"):
        if getattr(args, name) <= 0:
            parser.error(f"--{name.replace('_', '-')} must be positive")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
