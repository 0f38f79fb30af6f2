"""Sentence graphs, knowledge graphs and problem instances.

A sentence graph is an edge-labelled DAG over two disjoint node sets:
instance nodes (one per content token, e.g. ``man_2``) and class nodes
(``person``, ``lift``).  Every instance node points at exactly one class
node through an ``instance_of`` edge; all other edges join instance nodes.

A knowledge graph has the same shape plus one or more symmetric
``is_same_as`` edge pairs between instance nodes.

Validation never raises on the first problem: it collects every violation
and raises a single :class:`ValidationError` carrying all of them.
"""

from __future__ import annotations

import graphlib
import re
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

INSTANCE_OF = "instance_of"
IS_SAME_AS = "is_same_as"
RESERVED_LABELS = frozenset({INSTANCE_OF, IS_SAME_AS})

# WordNet-style lexicographer classes allowed for nouns and pronouns.
ENTITY_CLASSES = frozenset(
    {
        "object", "person", "group", "location", "quantity", "shape",
        "animal", "plant", "cognition", "communication", "event", "feeling",
        "act", "motive", "phenomenon", "possession", "process", "relation",
        "state", "time",
    }
)

_IDENTIFIER = re.compile(r"[A-Za-z0-9_]+")

Edge = tuple[str, str, str]


def is_identifier(text: str) -> bool:
    return isinstance(text, str) and _IDENTIFIER.fullmatch(text) is not None


@dataclass(frozen=True)
class Diagnostic:
    """One problem found while reading or validating input.

    ``nodes`` names the offending node(s) or edge endpoints so callers can
    map the diagnostic back to a source line.
    """

    code: str
    message: str
    nodes: tuple[str, ...] = ()
    severity: str = "error"
    line: int | None = None
    column: int | None = None
    source: str | None = None

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def located(self, line: int | None, column: int | None = None, source: str | None = None) -> Diagnostic:
        return Diagnostic(
            self.code,
            self.message,
            self.nodes,
            self.severity,
            line if self.line is None else self.line,
            column if self.column is None else self.column,
            source if self.source is None else self.source,
        )

    def __str__(self) -> str:
        where = []
        if self.source:
            where.append(self.source)
        if self.line is not None:
            where.append(str(self.line))
            if self.column is not None:
                where.append(str(self.column))
        prefix = ":".join(where)
        text = f"{self.severity}[{self.code}] {self.message}"
        return f"{prefix}: {text}" if prefix else text


class ValidationError(ValueError):
    """Raised with the full list of diagnostics when input is rejected."""

    def __init__(self, diagnostics: Iterable[Diagnostic]):
        self.diagnostics = list(diagnostics)
        summary = "; ".join(str(d) for d in self.diagnostics[:5])
        if len(self.diagnostics) > 5:
            summary += f"; ... ({len(self.diagnostics)} total)"
        super().__init__(summary)


class UnknownNodeError(LookupError):
    pass


class NotAnInstanceNodeError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledGraph:
    """Plain labelled digraph: a node set and a set of (source, label, target) triples."""

    nodes: frozenset[str]
    edges: frozenset[Edge]

    @classmethod
    def from_edges(cls, edges: Iterable[Edge], nodes: Iterable[str] = ()) -> LabeledGraph:
        edges = frozenset(tuple(e) for e in edges)
        all_nodes = set(nodes)
        for s, _, t in edges:
            all_nodes.add(s)
            all_nodes.add(t)
        return cls(frozenset(all_nodes), edges)


class _ClassedGraph:
    """Accessors shared by sentence and knowledge graphs."""

    graph: LabeledGraph
    instance_nodes: frozenset[str]
    class_nodes: frozenset[str]

    @property
    def nodes(self) -> frozenset[str]:
        return self.graph.nodes

    @property
    def edges(self) -> frozenset[Edge]:
        return self.graph.edges

    @cached_property
    def class_map(self) -> dict[str, str]:
        return {s: t for s, label, t in self.graph.edges if label == INSTANCE_OF}

    @cached_property
    def relation_edges(self) -> frozenset[Edge]:
        return frozenset(e for e in self.graph.edges if e[1] not in RESERVED_LABELS)

    def class_of(self, node: str) -> str:
        return class_of(self, node)


@dataclass(frozen=True)
class SentenceGraph(_ClassedGraph):
    graph: LabeledGraph
    instance_nodes: frozenset[str]
    class_nodes: frozenset[str]
    warnings: tuple[Diagnostic, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class KnowledgeGraph(_ClassedGraph):
    graph: LabeledGraph
    instance_nodes: frozenset[str]
    class_nodes: frozenset[str]
    same_as_pairs: frozenset[frozenset[str]]
    warnings: tuple[Diagnostic, ...] = field(default=(), compare=False)

    @cached_property
    def same_as_partners(self) -> dict[str, frozenset[str]]:
        partners: dict[str, set[str]] = defaultdict(set)
        for pair in self.same_as_pairs:
            x, y = sorted(pair)
            partners[x].add(y)
            partners[y].add(x)
        return {n: frozenset(p) for n, p in partners.items()}

    def partners_of(self, node: str) -> frozenset[str]:
        return self.same_as_partners.get(node, frozenset())


@dataclass(frozen=True)
class WSCProblem:
    sentence: SentenceGraph
    pronoun: str
    answer_choice_1: str
    answer_choice_2: str
    label: str = ""

    def __post_init__(self) -> None:
        diagnostics = problem_diagnostics(self.sentence, self.pronoun, self.answer_choice_1, self.answer_choice_2)
        errors = [d for d in diagnostics if d.is_error]
        if errors:
            raise ValidationError(errors)

    @property
    def choices(self) -> tuple[str, str]:
        return (self.answer_choice_1, self.answer_choice_2)


def class_of(g: SentenceGraph | KnowledgeGraph, node: str) -> str:
    if node not in g.graph.nodes:
        raise UnknownNodeError(node)
    if node not in g.instance_nodes:
        raise NotAnInstanceNodeError(f"{node} is a class node")
    return g.class_map[node]


def _edge_text(edge: Edge) -> str:
    return f"({edge[0]}, {edge[1]}, {edge[2]})"


def _classify(g: LabeledGraph, *, knowledge: bool) -> tuple[frozenset[str], frozenset[str], list[Diagnostic]]:
    diags: list[Diagnostic] = []

    for node in sorted(g.nodes):
        if not is_identifier(node):
            diags.append(Diagnostic("BadIdentifier", f"node id {node!r} is not a valid identifier", (node,)))
    for edge in sorted(g.edges):
        if not is_identifier(edge[1]):
            diags.append(Diagnostic("BadIdentifier", f"edge label {edge[1]!r} is not a valid identifier", (edge[0], edge[2])))
        missing = [n for n in (edge[0], edge[2]) if n not in g.nodes]
        if missing:
            diags.append(Diagnostic("DanglingEdge", f"edge {_edge_text(edge)} references unknown node(s) {', '.join(missing)}", tuple(missing)))

    same_as = sorted(e for e in g.edges if e[1] == IS_SAME_AS)
    if same_as and not knowledge:
        for edge in same_as:
            diags.append(Diagnostic("ReservedLabelMisuse", f"is_same_as edge {_edge_text(edge)} is not allowed in a sentence graph", (edge[0], edge[2])))

    class_edges = [e for e in g.edges if e[1] == INSTANCE_OF]
    relation = [e for e in g.edges if e[1] not in RESERVED_LABELS]

    out_class: dict[str, list[str]] = defaultdict(list)
    for s, _, t in class_edges:
        out_class[s].append(t)
    instances = frozenset(out_class)
    classes = frozenset(t for _, _, t in class_edges if t not in instances)

    for node, targets in sorted(out_class.items()):
        if len(targets) > 1:
            diags.append(Diagnostic(
                "MultipleClassMembership",
                f"instance node {node} has {len(targets)} instance_of edges ({', '.join(sorted(targets))})",
                (node,),
            ))
    for s, _, t in sorted(class_edges):
        if t in instances:
            diags.append(Diagnostic("ClassNodeMisuse", f"instance_of edge {_edge_text((s, INSTANCE_OF, t))} targets instance node {t}", (s, t)))

    for edge in sorted(relation):
        for node in (edge[0], edge[2]):
            if node in classes:
                diags.append(Diagnostic("ClassNodeMisuse", f"class node {node} appears in relation edge {_edge_text(edge)}", (node,)))
            elif node not in instances and node in g.nodes:
                diags.append(Diagnostic("MissingClassMembership", f"node {node} in edge {_edge_text(edge)} has no instance_of edge", (node,)))

    incident: set[str] = set()
    for s, _, t in g.edges:
        incident.add(s)
        incident.add(t)
    for node in sorted(g.nodes - incident):
        diags.append(Diagnostic("OrphanNode", f"node {node} has no incident edge", (node,)))

    # Acyclicity is checked over everything except is_same_as.
    sorter: graphlib.TopologicalSorter = graphlib.TopologicalSorter()
    for node in g.nodes:
        sorter.add(node)
    for s, _, t in relation + class_edges:
        sorter.add(t, s)
    try:
        sorter.prepare()
    except graphlib.CycleError as exc:
        cycle = tuple(exc.args[1])
        diags.append(Diagnostic("CycleDetected", f"cycle through {' -> '.join(cycle)}", cycle))

    return instances, classes, _dedupe(diags)


def _dedupe(diags: list[Diagnostic]) -> list[Diagnostic]:
    seen: set[Diagnostic] = set()
    out = []
    for d in diags:
        if d not in seen:
            seen.add(d)
            out.append(d)
    return out


def validate_sentence_graph(g: LabeledGraph) -> SentenceGraph:
    instances, classes, diags = _classify(g, knowledge=False)
    if diags:
        raise ValidationError(diags)
    return SentenceGraph(g, instances, classes)


def validate_knowledge_graph(g: LabeledGraph) -> KnowledgeGraph:
    instances, classes, diags = _classify(g, knowledge=True)
    warnings: list[Diagnostic] = []

    same_as = {(s, t) for s, label, t in g.edges if label == IS_SAME_AS}
    pairs: set[frozenset[str]] = set()
    for s, t in sorted(same_as):
        if s == t:
            diags.append(Diagnostic("SelfSameAs", f"is_same_as self-loop on {s}", (s,)))
            continue
        if (t, s) not in same_as:
            diags.append(Diagnostic("AsymmetricSameAs", f"({s}, is_same_as, {t}) has no reverse edge", (s, t)))
        for node in (s, t):
            if node in classes:
                diags.append(Diagnostic("SameAsOnClassNode", f"is_same_as endpoint {node} is a class node", (node,)))
            elif node not in instances and node in g.nodes:
                diags.append(Diagnostic("MissingClassMembership", f"is_same_as endpoint {node} has no instance_of edge", (node,)))
        pairs.add(frozenset((s, t)))
    if not same_as:
        diags.append(Diagnostic("MissingSameAs", "knowledge graph has no is_same_as pair"))

    diags = _dedupe(diags)
    if diags:
        raise ValidationError(diags)

    class_map = {s: t for s, label, t in g.edges if label == INSTANCE_OF}
    for node in sorted({n for pair in pairs for n in pair}):
        cls = class_map[node]
        if cls not in ENTITY_CLASSES:
            warnings.append(Diagnostic(
                "NonEntityClass",
                f"is_same_as endpoint {node} has class {cls}, which is not an entity class",
                (node,),
                severity="warning",
            ))
    return KnowledgeGraph(g, instances, classes, frozenset(pairs), tuple(warnings))


def problem_diagnostics(sentence: SentenceGraph, pronoun: str, a1: str, a2: str) -> list[Diagnostic]:
    """Cross-checks between a sentence graph and its pronoun/answer-choice nodes.

    Errors for missing or non-instance nodes; warnings for noun/pronoun
    nodes whose class is outside the entity vocabulary.
    """
    diags: list[Diagnostic] = []
    roles = [("pronoun", pronoun, "PronounNotInGraph"), ("ans_ch1", a1, "AnswerChoiceNotInGraph"), ("ans_ch2", a2, "AnswerChoiceNotInGraph")]
    for role, node, code in roles:
        if node not in sentence.instance_nodes:
            kind = "a class node" if node in sentence.class_nodes else "not in the sentence graph"
            diags.append(Diagnostic(code, f"{role} node {node} is {kind}", (node,)))
    if len({pronoun, a1, a2}) < 3:
        diags.append(Diagnostic("IndistinctProblemNodes", f"pronoun and answer choices must be distinct, got {pronoun}, {a1}, {a2}", (pronoun, a1, a2)))
    if any(d.is_error for d in diags):
        return diags
    for role, node, _ in roles:
        cls = sentence.class_map[node]
        if cls not in ENTITY_CLASSES:
            diags.append(Diagnostic(
                "NonEntityClass",
                f"{role} node {node} has class {cls}, which is not an entity class",
                (node,),
                severity="warning",
            ))
    return diags
