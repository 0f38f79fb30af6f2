"""Answer derivation per mapping and final aggregation."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable

from .facts import ProblemBundle
from .graph import Diagnostic, KnowledgeGraph, WSCProblem
from .matcher import (
    COMPLETE,
    CompatibilityPolicy,
    Exhaustiveness,
    Mapping,
    SearchBudget,
    compatibility,
    enumerate_isomorphisms,
    extract_knowledge_core,
    extract_sentence_core,
    vocabulary_warnings,
)


class Choice(str, Enum):
    A1 = "A1"
    A2 = "A2"


class Reason(str, Enum):
    UNANIMOUS = "unanimous"
    NO_MAPPINGS = "no_mappings"
    NO_CANDIDATES = "no_candidates"
    CONFLICTING_CANDIDATES = "conflicting_candidates"
    TRUNCATED_SEARCH = "truncated_search"


@dataclass(frozen=True)
class CandidateAnswer:
    mapping_index: int
    choice: Choice
    node: str
    # (pronoun's knowledge image, answer choice's knowledge image)
    witness: tuple[str, str]

    def to_dict(self) -> dict[str, Any]:
        return {
            "mapping_index": self.mapping_index,
            "choice": self.choice.value,
            "node": self.node,
            "witness": list(self.witness),
        }


@dataclass(frozen=True)
class Verdict:
    answer: str | None
    reason: Reason
    candidates: tuple[CandidateAnswer, ...] = ()

    def __post_init__(self) -> None:
        if self.answer is not None:
            nodes = {c.node for c in self.candidates}
            if nodes != {self.answer}:
                raise ValueError(f"answer {self.answer} not backed by candidates {sorted(nodes)}")

    @property
    def outcome(self) -> str:
        return "answer" if self.answer is not None else "no_answer"


@dataclass(frozen=True)
class SolveConfig:
    policy: CompatibilityPolicy = CompatibilityPolicy()
    budget: SearchBudget = SearchBudget()
    treat_truncated_as_no_answer: bool = True


@dataclass
class AnswerReport:
    problem_label: str
    verdict: Verdict
    mapping_count: int
    core_sizes: dict[str, dict[str, int]]
    exhaustiveness: Exhaustiveness
    policy: str
    diagnostics: list[Diagnostic] = field(default_factory=list)
    mappings: list[Mapping] = field(default_factory=list)
    elapsed_ms: float = 0.0

    def to_dict(self, stable: bool = False) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "problem_label": self.problem_label,
            "outcome": self.verdict.outcome,
            "reason": self.verdict.reason.value,
            "mappings": self.mapping_count,
            "candidates": [c.to_dict() for c in self.verdict.candidates],
            "core_sizes": self.core_sizes,
            "exhaustive": self.exhaustiveness.complete,
            "policy": self.policy,
            "diagnostics": sorted(str(d) for d in self.diagnostics),
        }
        if self.verdict.answer is not None:
            doc["answer_node"] = self.verdict.answer
        if not self.exhaustiveness.complete:
            doc["truncated_by"] = self.exhaustiveness.bound
        if not stable:
            doc["timing"] = {"elapsed_ms": round(self.elapsed_ms, 3)}
        return doc

    def to_json(self, stable: bool = False) -> str:
        return json.dumps(self.to_dict(stable), sort_keys=True, indent=2)

    def to_text(self) -> str:
        v = self.verdict
        lines = [f"problem: {self.problem_label}"]
        lines.append(f"answer: {v.answer}" if v.answer is not None else f"no answer ({v.reason.value})")
        lines.append(f"mappings: {self.mapping_count} ({self.exhaustiveness})")
        for c in v.candidates:
            lines.append(f"  mapping {c.mapping_index}: {c.choice.value} -> {c.node} via {c.witness[0]} ~ {c.witness[1]}")
        for d in self.diagnostics:
            lines.append(f"  {d}")
        return "\n".join(lines)


def derive_candidate(problem: WSCProblem, knowledge: KnowledgeGraph, m: Mapping, index: int = 0) -> CandidateAnswer | None:
    """The answer choice this mapping licenses, if exactly one.

    A choice qualifies when it is paired with an ``is_same_as`` partner of
    the pronoun's image and no other sentence node is paired with any such
    partner.  If both choices would qualify the mapping yields nothing.
    """
    n1 = m.sentence_to_knowledge.get(problem.pronoun)
    if n1 is None:
        return None
    partners = knowledge.partners_of(n1)
    # sentence nodes sitting on a partner of the pronoun's image
    resolvers = {m.knowledge_to_sentence[n]: n for n in partners if n in m.knowledge_to_sentence}

    found = []
    for choice, node in ((Choice.A1, problem.answer_choice_1), (Choice.A2, problem.answer_choice_2)):
        if node in resolvers and all(x == node for x in resolvers):
            found.append(CandidateAnswer(index, choice, node, (n1, resolvers[node])))
    if len(found) != 1:
        return None
    return found[0]


def aggregate(
    candidates: Iterable[CandidateAnswer],
    exhaustiveness: Exhaustiveness = COMPLETE,
    cfg: SolveConfig | None = None,
    mapping_count: int | None = None,
) -> Verdict:
    cfg = cfg or SolveConfig()
    candidates = tuple(candidates)
    if not exhaustiveness.complete and cfg.treat_truncated_as_no_answer:
        return Verdict(None, Reason.TRUNCATED_SEARCH, candidates)
    if mapping_count == 0:
        return Verdict(None, Reason.NO_MAPPINGS, candidates)
    if not candidates:
        return Verdict(None, Reason.NO_CANDIDATES, candidates)
    nodes = {c.node for c in candidates}
    if len(nodes) > 1:
        return Verdict(None, Reason.CONFLICTING_CANDIDATES, candidates)
    return Verdict(nodes.pop(), Reason.UNANIMOUS, candidates)


def effective_policy(bundle: ProblemBundle, cfg: SolveConfig) -> CompatibilityPolicy:
    return cfg.policy.with_pairs(bundle.synonyms, bundle.similar)


def solve(bundle: ProblemBundle, cfg: SolveConfig | None = None) -> tuple[Verdict, AnswerReport]:
    cfg = cfg or SolveConfig()
    start = time.perf_counter()
    problem, knowledge = bundle.problem, bundle.knowledge
    policy = effective_policy(bundle, cfg)

    s_core = extract_sentence_core(problem.sentence)
    k_core = extract_knowledge_core(knowledge)
    result = enumerate_isomorphisms(s_core, k_core, compatibility(policy, problem.sentence, knowledge), cfg.budget)

    candidates = []
    for i, m in enumerate(result.mappings):
        c = derive_candidate(problem, knowledge, m, i)
        if c is not None:
            candidates.append(c)
    verdict = aggregate(candidates, result.exhaustiveness, cfg, len(result.mappings))
    elapsed = (time.perf_counter() - start) * 1000

    report = AnswerReport(
        problem_label=problem.label,
        verdict=verdict,
        mapping_count=len(result.mappings),
        core_sizes={
            "sentence": {"nodes": len(s_core.nodes), "edges": len(s_core.edges)},
            "knowledge": {"nodes": len(k_core.nodes), "edges": len(k_core.edges)},
        },
        exhaustiveness=result.exhaustiveness,
        policy=policy.mode.value,
        diagnostics=list(bundle.warnings) + vocabulary_warnings(problem.sentence, knowledge),
        mappings=result.mappings,
        elapsed_ms=elapsed,
    )
    return verdict, report
