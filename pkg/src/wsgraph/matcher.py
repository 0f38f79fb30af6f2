"""Core-graph extraction and class-constrained subgraph matching.

The sentence core keeps every instance node that touches a relation edge
and all relation edges.  The knowledge core does the same but drops the
``is_same_as`` edges while keeping their endpoints as nodes, so the search
must place the coreferring knowledge nodes too.

A mapping pairs sentence nodes with knowledge nodes.  It must be injective,
cover every knowledge core node, pair only compatible nodes, and carry
every knowledge edge onto a sentence edge with the same label.  Extra
sentence edges are fine (the match is not induced).
"""

from __future__ import annotations

import time
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, Iterable, NamedTuple

from .graph import INSTANCE_OF, IS_SAME_AS, Diagnostic, Edge, KnowledgeGraph, SentenceGraph

Compat = Callable[[str, str], bool]


class CompatMode(str, Enum):
    CLASS_ONLY = "class_only"
    CLASS_OR_SYNONYM = "class_or_synonym"
    CLASS_OR_SYNONYM_OR_SIMILAR = "class_or_synonym_or_similar"


class Origin(str, Enum):
    SENTENCE = "sentence"
    KNOWLEDGE = "knowledge"


class NoKnowledgeCoreError(ValueError):
    pass


@dataclass(frozen=True)
class CompatibilityPolicy:
    """Which (sentence node, knowledge node) pairs may be matched.

    Pairs in ``synonyms``/``similar`` are ordered: sentence node first.
    """

    mode: CompatMode = CompatMode.CLASS_ONLY
    synonyms: frozenset[tuple[str, str]] = frozenset()
    similar: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", CompatMode(self.mode))

    def with_pairs(self, synonyms: Iterable[tuple[str, str]] = (), similar: Iterable[tuple[str, str]] = ()) -> CompatibilityPolicy:
        return CompatibilityPolicy(self.mode, self.synonyms | frozenset(synonyms), self.similar | frozenset(similar))


@dataclass(frozen=True)
class SearchBudget:
    max_mappings: int = 10_000
    time_limit: float = 10.0
    node_cap: int = 64

    def __post_init__(self) -> None:
        for name in ("max_mappings", "time_limit", "node_cap"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class CoreGraph:
    nodes: frozenset[str]
    edges: frozenset[Edge]
    origin: Origin

    @cached_property
    def out_edges(self) -> dict[str, list[tuple[str, str]]]:
        out: dict[str, list[tuple[str, str]]] = defaultdict(list)
        for s, label, t in sorted(self.edges):
            out[s].append((label, t))
        return dict(out)

    @cached_property
    def in_edges(self) -> dict[str, list[tuple[str, str]]]:
        inc: dict[str, list[tuple[str, str]]] = defaultdict(list)
        for s, label, t in sorted(self.edges):
            inc[t].append((label, s))
        return dict(inc)

    def degree(self, node: str) -> int:
        return len(self.out_edges.get(node, ())) + len(self.in_edges.get(node, ()))


@dataclass(frozen=True, order=True)
class Mapping:
    """One subgraph isomorphism as sorted (sentence_node, knowledge_node) pairs."""

    pairs: tuple[tuple[str, str], ...]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> Mapping:
        return cls(tuple(sorted(pairs)))

    @cached_property
    def sentence_to_knowledge(self) -> dict[str, str]:
        return dict(self.pairs)

    @cached_property
    def knowledge_to_sentence(self) -> dict[str, str]:
        return {k: s for s, k in self.pairs}

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


@dataclass(frozen=True)
class Exhaustiveness:
    complete: bool = True
    bound: str | None = None

    def __str__(self) -> str:
        return "complete" if self.complete else f"truncated({self.bound})"


COMPLETE = Exhaustiveness()


class MatchResult(NamedTuple):
    mappings: list[Mapping]
    exhaustiveness: Exhaustiveness


def extract_sentence_core(s: SentenceGraph) -> CoreGraph:
    edges = frozenset(e for e in s.graph.edges if e[1] != INSTANCE_OF)
    nodes = frozenset(n for e in edges for n in (e[0], e[2]))
    return CoreGraph(nodes, edges, Origin.SENTENCE)


def extract_knowledge_core(k: KnowledgeGraph) -> CoreGraph:
    non_class = [e for e in k.graph.edges if e[1] != INSTANCE_OF]
    nodes = frozenset(n for e in non_class for n in (e[0], e[2]))
    edges = frozenset(e for e in non_class if e[1] != IS_SAME_AS)
    return CoreGraph(nodes, edges, Origin.KNOWLEDGE)


def node_compatible(policy: CompatibilityPolicy, s: SentenceGraph, k: KnowledgeGraph, x: str, y: str) -> bool:
    cls = s.class_map.get(x)
    if cls is not None and cls == k.class_map.get(y):
        return True
    if policy.mode is not CompatMode.CLASS_ONLY and (x, y) in policy.synonyms:
        return True
    if policy.mode is CompatMode.CLASS_OR_SYNONYM_OR_SIMILAR and (x, y) in policy.similar:
        return True
    return False


def compatibility(policy: CompatibilityPolicy, s: SentenceGraph, k: KnowledgeGraph) -> Compat:
    def compat(x: str, y: str) -> bool:
        return node_compatible(policy, s, k, x, y)

    return compat


def vocabulary_warnings(s: SentenceGraph, k: KnowledgeGraph) -> list[Diagnostic]:
    """Knowledge class names never used in the sentence graph.

    Class matching assumes both graphs draw class names from one vocabulary;
    an unknown name usually means the knowledge was authored with a
    different lemma and needs a synonym or similarity pair.
    """
    core_nodes = extract_knowledge_core(k).nodes
    used = set(s.class_map.values())
    out = []
    for node in sorted(core_nodes):
        cls = k.class_map[node]
        if cls not in used:
            out.append(Diagnostic(
                "UnsharedClass",
                f"knowledge node {node} has class {cls}, which no sentence node has",
                (node,),
                severity="warning",
            ))
    return out


@dataclass
class _Search:
    s_core: CoreGraph
    k_core: CoreGraph
    budget: SearchBudget
    deadline: float
    order: list[str] = field(default_factory=list)
    found: list[Mapping] = field(default_factory=list)
    stopped: str | None = None
    steps: int = 0

    def run(self, domains: dict[str, set[str]]) -> None:
        self._extend({}, set(), domains, 0)

    def _extend(self, assigned: dict[str, str], used: set[str], domains: dict[str, set[str]], depth: int) -> None:
        if self.stopped:
            return
        self.steps += 1
        if self.steps % 256 == 0 and time.monotonic() > self.deadline:
            self.stopped = "time_limit"
            return
        if depth == len(self.order):
            if len(self.found) >= self.budget.max_mappings:
                self.stopped = "max_mappings"
                return
            self.found.append(Mapping.from_pairs((x, y) for y, x in assigned.items()))
            return

        y = self.order[depth]
        for x in sorted(domains[y] - used):
            pruned = self._forward_check(y, x, assigned, used, domains)
            if pruned is None:
                continue
            assigned[y] = x
            used.add(x)
            self._extend(assigned, used, pruned, depth + 1)
            used.discard(x)
            del assigned[y]
            if self.stopped:
                return

    def _forward_check(self, y: str, x: str, assigned: dict[str, str], used: set[str], domains: dict[str, set[str]]) -> dict[str, set[str]] | None:
        """Narrow the domains of unplaced knowledge nodes after placing y at x.

        Returns None when some unplaced node is left without candidates.
        Edges between y and already placed nodes were enforced when those
        nodes narrowed y's domain, so only unplaced neighbours need work.
        """
        s_out = self.s_core.out_edges
        s_in = self.s_core.in_edges
        new = dict(domains)
        for label, z in self.k_core.out_edges.get(y, ()):
            if z == y:
                if (label, x) not in s_out.get(x, ()):
                    return None
                continue
            if z in assigned:
                continue
            allowed = {t for lab, t in s_out.get(x, ()) if lab == label}
            new[z] = new[z] & allowed
        for label, z in self.k_core.in_edges.get(y, ()):
            if z == y or z in assigned:
                continue
            allowed = {t for lab, t in s_in.get(x, ()) if lab == label}
            new[z] = new[z] & allowed
        for z in self.order:
            if z == y or z in assigned:
                continue
            if not (new[z] - used - {x}):
                return None
        return new


def _search_order(k_core: CoreGraph) -> list[str]:
    return sorted(k_core.nodes, key=lambda n: (-k_core.degree(n), n))


def enumerate_isomorphisms(
    s_core: CoreGraph,
    k_core: CoreGraph,
    compat: Compat,
    budget: SearchBudget | None = None,
) -> MatchResult:
    """All mappings of the knowledge core into the sentence core.

    Backtracks over knowledge nodes in descending-degree order, starting
    each node's domain from the compatible sentence nodes and narrowing
    neighbours' domains along knowledge edges (forward checking).  Results
    come back sorted by their pair lists.
    """
    budget = budget or SearchBudget()
    if not k_core.nodes:
        raise NoKnowledgeCoreError("knowledge core has no nodes")
    for core in (k_core, s_core):
        if len(core.nodes) > budget.node_cap:
            return MatchResult([], Exhaustiveness(False, "node_cap"))

    sentence_nodes = sorted(s_core.nodes)
    domains = {y: {x for x in sentence_nodes if compat(x, y)} for y in k_core.nodes}
    if any(not d for d in domains.values()) or len(s_core.nodes) < len(k_core.nodes):
        return MatchResult([], COMPLETE)

    search = _Search(s_core, k_core, budget, time.monotonic() + budget.time_limit, _search_order(k_core))
    search.run(domains)
    flag = COMPLETE if search.stopped is None else Exhaustiveness(False, search.stopped)
    return MatchResult(sorted(search.found), flag)
