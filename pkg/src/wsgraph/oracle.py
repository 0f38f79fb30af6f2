"""Reference implementations used to cross-check the matcher and resolver.

Nothing here shares code with :mod:`wsgraph.matcher` or
:mod:`wsgraph.resolver` beyond the plain data types.  Everything is
exponential and guarded by size limits.

* :func:`brute_force_enumerate` tries every injective placement.
* :func:`evaluate_definition7` quantifies directly over those placements,
  asking which sentence nodes resolve the pronoun through ``is_same_as``.
* :func:`evaluate_rules` evaluates the declarative program over raw
  ``has_s``/``has_k`` tuples: it grounds the node/edge rules, searches the
  ``matches`` choice space under the integrity constraints, derives
  ``invalid``/``ans`` atoms per model and aggregates them.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable

from .facts import Fact, ProblemBundle, load_problem_bundle
from .graph import INSTANCE_OF, IS_SAME_AS, KnowledgeGraph, WSCProblem
from .matcher import Compat, CompatibilityPolicy, CompatMode, CoreGraph, Mapping, Origin
from .resolver import CandidateAnswer, Choice, Reason, Verdict

MAX_KNOWLEDGE_NODES = 8
MAX_SENTENCE_NODES = 12


class InstanceTooLarge(ValueError):
    pass


def _check_size(n_sentence: int, n_knowledge: int) -> None:
    if n_knowledge > MAX_KNOWLEDGE_NODES or n_sentence > MAX_SENTENCE_NODES:
        raise InstanceTooLarge(
            f"{n_knowledge} knowledge / {n_sentence} sentence core nodes exceeds "
            f"{MAX_KNOWLEDGE_NODES}/{MAX_SENTENCE_NODES}"
        )


def mapping_violations(s_core: CoreGraph, k_core: CoreGraph, compat: Compat, mapping: Mapping) -> list[str]:
    """Every way ``mapping`` fails to be a valid subgraph isomorphism."""
    problems = []
    s_nodes = [s for s, _ in mapping.pairs]
    k_nodes = [k for _, k in mapping.pairs]
    if len(set(s_nodes)) != len(s_nodes):
        problems.append("sentence node used twice")
    if len(set(k_nodes)) != len(k_nodes):
        problems.append("knowledge node used twice")
    if set(k_nodes) != set(k_core.nodes):
        problems.append("not total on the knowledge core")
    for s, k in mapping.pairs:
        if s not in s_core.nodes:
            problems.append(f"{s} is not a sentence core node")
        if not compat(s, k):
            problems.append(f"({s}, {k}) incompatible")
    image = dict((k, s) for s, k in mapping.pairs)
    for a, label, b in sorted(k_core.edges):
        if a in image and b in image and (image[a], label, image[b]) not in s_core.edges:
            problems.append(f"knowledge edge ({a}, {label}, {b}) has no image")
    return problems


def brute_force_enumerate(s_core: CoreGraph, k_core: CoreGraph, compat: Compat) -> list[Mapping]:
    _check_size(len(s_core.nodes), len(k_core.nodes))
    k_nodes = sorted(k_core.nodes)
    # Drawing each node's image from its compatible nodes only skips
    # placements the compatibility filter would reject anyway.
    options = [[x for x in sorted(s_core.nodes) if compat(x, y)] for y in k_nodes]
    found = []
    for placement in itertools.product(*options):
        if len(set(placement)) != len(placement):
            continue
        image = dict(zip(k_nodes, placement))
        if all((image[a], label, image[b]) in s_core.edges for a, label, b in k_core.edges):
            found.append(Mapping.from_pairs(zip(placement, k_nodes)))
    return sorted(found)


# -- direct reading of "most natural resolution" ----------------------------

def _definition_cores(problem: WSCProblem, knowledge: KnowledgeGraph) -> tuple[CoreGraph, CoreGraph]:
    # Every non-class node stays, even one touching no relation edge.
    s_edges = {e for e in problem.sentence.graph.edges if e[1] != INSTANCE_OF}
    k_edges = {e for e in knowledge.graph.edges if e[1] not in (INSTANCE_OF, IS_SAME_AS)}
    s_nodes = problem.sentence.graph.nodes - problem.sentence.class_nodes
    k_nodes = knowledge.graph.nodes - knowledge.class_nodes
    return (
        CoreGraph(frozenset(s_nodes), frozenset(s_edges), Origin.SENTENCE),
        CoreGraph(frozenset(k_nodes), frozenset(k_edges), Origin.KNOWLEDGE),
    )


def _same_class_compat(problem: WSCProblem, knowledge: KnowledgeGraph, policy: CompatibilityPolicy | None) -> Compat:
    s_class = {(a, c) for a, label, c in problem.sentence.graph.edges if label == INSTANCE_OF}
    k_class = {(b, c) for b, label, c in knowledge.graph.edges if label == INSTANCE_OF}
    classes = {c for _, c in s_class}
    policy = policy or CompatibilityPolicy()
    extra: set[tuple[str, str]] = set()
    if policy.mode is not CompatMode.CLASS_ONLY:
        extra |= policy.synonyms
    if policy.mode is CompatMode.CLASS_OR_SYNONYM_OR_SIMILAR:
        extra |= policy.similar

    def compat(a: str, b: str) -> bool:
        return (a, b) in extra or any((a, i) in s_class and (b, i) in k_class for i in classes)

    return compat


def evaluate_definition7(
    problem: WSCProblem,
    knowledge: KnowledgeGraph,
    policy: CompatibilityPolicy | None = None,
) -> Verdict:
    """Answer by asking, per mapping, which nodes give the pronoun its resolution.

    A choice is licensed by a mapping when it is the only sentence node that
    resolves the pronoun under it; the problem's answer is the choice that
    alone is licensed across all mappings.
    """
    s_core, k_core = _definition_cores(problem, knowledge)
    mappings = brute_force_enumerate(s_core, k_core, _same_class_compat(problem, knowledge, policy))
    same_as = {(a, b) for a, label, b in knowledge.graph.edges if label == IS_SAME_AS}

    def resolves(m: Mapping, x: str, y: str) -> tuple[str, str] | None:
        # x gives y its most natural resolution under m
        pairs = dict(m.pairs)
        if x not in pairs or y not in pairs:
            return None
        n_x, n_y = pairs[x], pairs[y]
        if (n_x, n_y) in same_as or (n_y, n_x) in same_as:
            return (n_y, n_x)
        return None

    candidates = []
    for index, m in enumerate(mappings):
        resolvers = {x for x in s_core.nodes if resolves(m, x, problem.pronoun)}
        for choice, node in ((Choice.A1, problem.answer_choice_1), (Choice.A2, problem.answer_choice_2)):
            if resolvers == {node}:
                candidates.append(CandidateAnswer(index, choice, node, resolves(m, node, problem.pronoun)))
    if not mappings:
        return Verdict(None, Reason.NO_MAPPINGS)
    licensed = {c.node for c in candidates}
    if not licensed:
        return Verdict(None, Reason.NO_CANDIDATES)
    if len(licensed) > 1:
        return Verdict(None, Reason.CONFLICTING_CANDIDATES, tuple(candidates))
    return Verdict(licensed.pop(), Reason.UNANIMOUS, tuple(candidates))


# -- literal evaluation of the rule program ---------------------------------

def evaluate_rules(bundle: ProblemBundle, mode: CompatMode | str = CompatMode.CLASS_ONLY) -> Verdict:
    """Evaluate the answer-set program over the bundle's facts.

    The choice rule over ``matches`` admits every subset of
    node_G_s x node_G_k.  Subsets are explored atom by atom; the
    functionality, class and edge constraints are monotone in ``matches``
    so a subset violating one is pruned with all its supersets, and the
    totality constraint is checked once every atom for a knowledge node has
    been decided.  Both prunings drop only subsets the constraints would
    eliminate anyway, so the surviving models are exactly the answer sets
    of the generate-and-test part.
    """
    mode = CompatMode(mode)
    p = bundle.problem
    has_s = set(p.sentence.graph.edges)
    has_k = set(bundle.knowledge.graph.edges)
    pronoun, ans_ch1, ans_ch2 = p.pronoun, p.answer_choice_1, p.answer_choice_2
    synonyms = set(bundle.synonyms)
    similar = set(bundle.similar)

    # node/edge facts of both cores
    node_G_s = {x for x, r, y in has_s if r != INSTANCE_OF} | {y for x, r, y in has_s if r != INSTANCE_OF}
    edge_G_s = {(x, r, y) for x, r, y in has_s if r != INSTANCE_OF}
    node_G_k = {x for x, r, y in has_k if r != INSTANCE_OF} | {y for x, r, y in has_k if r != INSTANCE_OF}
    edge_G_k = {(x, r, y) for x, r, y in has_k if r != INSTANCE_OF and r != IS_SAME_AS}
    _check_size(len(node_G_s), len(node_G_k))

    s_classes = {c for _, r, c in has_s if r == INSTANCE_OF}

    def valid_pair(x: str, y: str) -> bool:
        if mode is CompatMode.CLASS_ONLY:
            # :- matches(X,Y), has_s(X,"instance_of",C), not has_k(Y,"instance_of",C).
            return all((y, INSTANCE_OF, c) in has_k for a, r, c in has_s if a == x and r == INSTANCE_OF)
        # valid_pair(X,Y) :- has_s(X,"instance_of",C), has_k(Y,"instance_of",C).
        if any((x, INSTANCE_OF, c) in has_s and (y, INSTANCE_OF, c) in has_k for c in s_classes):
            return True
        if (x, y) in synonyms:
            return True
        return mode is CompatMode.CLASS_OR_SYNONYM_OR_SIMILAR and (x, y) in similar

    def violates(matches: set[tuple[str, str]], new: tuple[str, str]) -> bool:
        x, y = new
        for x1, y1 in matches:
            if y1 == y and x1 != x:  # a knowledge node matched twice
                return True
            if x1 == x and y1 != y:  # a sentence node matched twice
                return True
        if not valid_pair(x, y):  # class (or pair) constraint
            return True
        full = matches | {new}
        for x1, r, y1 in edge_G_k:  # every knowledge edge needs a sentence image
            for a, b in full:
                if b != x1:
                    continue
                for c, d in full:
                    if d == y1 and (a, r, c) not in edge_G_s:
                        return True
        return False

    k_order = sorted(node_G_k)
    atoms = [(x, y) for y in k_order for x in sorted(node_G_s)]  # ground matches/2 atoms, grouped by y
    last_atom_of = {y: max(i for i, (_, b) in enumerate(atoms) if b == y) for y in k_order}
    models: list[frozenset[tuple[str, str]]] = []

    def search(i: int, chosen: set[tuple[str, str]]) -> None:
        if i == len(atoms):
            models.append(frozenset(chosen))
            return
        atom = atoms[i]
        y = atom[1]
        for take in (True, False):
            if take:
                if violates(chosen, atom):
                    continue
                chosen.add(atom)
            if i == last_atom_of[y] and not any(b == y for _, b in chosen):  # y must be matched
                if take:
                    chosen.discard(atom)
                continue
            search(i + 1, chosen)
            if take:
                chosen.discard(atom)

    if atoms:
        search(0, set())
    else:
        models.append(frozenset())

    ordered = sorted(Mapping.from_pairs(m) for m in models)
    if not ordered:
        return Verdict(None, Reason.NO_MAPPINGS)

    answers: list[CandidateAnswer] = []
    for index, mapping in enumerate(ordered):
        matches = set(mapping.pairs)
        derived = []
        for choice, A in ((Choice.A1, ans_ch1), (Choice.A2, ans_ch2)):
            # invalid: the pronoun's image has a same-as partner matched by a node other than A
            invalid = any(
                A != X and N1 != N2 and (N1, IS_SAME_AS, N2) in has_k
                for P, N1 in matches
                if P == pronoun
                for X, N2 in matches
            )
            if invalid:
                continue
            # ans: A is matched to a same-as partner of the pronoun's image
            for P, N1 in matches:
                for A_, N2 in matches:
                    if P == pronoun and A_ == A and (N1, IS_SAME_AS, N2) in has_k:
                        derived.append(CandidateAnswer(index, choice, A, (N1, N2)))
        # :- ans(A1), ans(A2), A1 != A2.
        if len({c.node for c in derived}) > 1:
            continue
        answers.extend(derived)

    # AnswerFinder
    if not answers:
        return Verdict(None, Reason.NO_CANDIDATES)
    nodes = {c.node for c in answers}
    if len(nodes) > 1:
        return Verdict(None, Reason.CONFLICTING_CANDIDATES, tuple(answers))
    return Verdict(nodes.pop(), Reason.UNANIMOUS, tuple(answers))


# -- random instances ---------------------------------------------------------

@dataclass(frozen=True)
class RandomInstanceSpec:
    sentence_nodes: int = 6
    knowledge_nodes: int = 4
    edge_density: float = 0.4
    label_alphabet_size: int = 2
    class_alphabet_size: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        if not 3 <= self.sentence_nodes <= 10:
            raise ValueError("sentence_nodes must be in [3, 10]")
        if not 2 <= self.knowledge_nodes <= 6:
            raise ValueError("knowledge_nodes must be in [2, 6]")
        if not 0.0 <= self.edge_density <= 1.0:
            raise ValueError("edge_density must be in [0, 1]")
        if self.label_alphabet_size < 1 or self.class_alphabet_size < 1:
            raise ValueError("alphabet sizes must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


def generate_instance(spec: RandomInstanceSpec) -> ProblemBundle:
    return random_bundle(
        random.Random(spec.seed),
        spec.sentence_nodes,
        spec.knowledge_nodes,
        spec.edge_density,
        spec.label_alphabet_size,
        spec.class_alphabet_size,
        label=f"random_{spec.seed}",
    )


def random_bundle(
    rng: random.Random,
    sentence_nodes: int,
    knowledge_nodes: int,
    density: float,
    n_labels: int,
    n_classes: int,
    label: str = "random",
) -> ProblemBundle:
    """A random but always well-formed problem/knowledge pair.

    The knowledge graph is a renamed sample of the sentence graph with some
    edges dropped, relabelled or added and some classes changed, so a good
    share of instances have mappings and many do not.
    """
    labels = [f"r{i}" for i in range(n_labels)]
    classes = [f"c{i}" for i in range(n_classes)]
    words = [f"w{i}_{i + 1}" for i in range(sentence_nodes)]
    rng.shuffle(words)  # topological order is the shuffled order
    s_class = {w: rng.choice(classes) for w in words}
    s_edges = set()
    for i, j in itertools.combinations(range(sentence_nodes), 2):
        if rng.random() < density:
            s_edges.add((words[i], rng.choice(labels), words[j]))
    # Content tokens of a parsed sentence always hang off some relation.
    for i, w in enumerate(words):
        if not any(w in (a, b) for a, _, b in s_edges):
            j = rng.choice([j for j in range(sentence_nodes) if j != i])
            a, b = sorted((i, j))
            s_edges.add((words[a], rng.choice(labels), words[b]))

    k_size = min(knowledge_nodes, sentence_nodes)
    picked = sorted(rng.sample(range(sentence_nodes), k_size))
    rename = {words[i]: f"k{n}_{n + 1}" for n, i in enumerate(rng.sample(picked, k_size))}
    k_words = [rename[words[i]] for i in picked]  # still in topological order
    k_class = {rename[w]: s_class[w] for w in rename}
    k_edges = set()
    for a, r, b in sorted(s_edges):
        if a in rename and b in rename:
            roll = rng.random()
            if roll < 0.15:
                continue
            if roll < 0.25:
                r = rng.choice(labels)
            k_edges.add((rename[a], r, rename[b]))
    for i, j in itertools.combinations(range(len(k_words)), 2):
        if rng.random() < density * 0.15:
            k_edges.add((k_words[i], rng.choice(labels), k_words[j]))
    for node in k_words:
        if rng.random() < 0.1:
            k_class[node] = rng.choice(classes)

    x, y = rng.sample(k_words, 2)
    inverse = {v: w for w, v in rename.items()}
    k_words = [w for w in k_words if w in (x, y) or any(w in (a, b) for a, _, b in k_edges)]

    # Bias the pronoun/choices toward the preimages of the same-as pair.
    if rng.random() < 0.7:
        pronoun = inverse[x]
        first = inverse[y] if rng.random() < 0.8 else rng.choice([w for w in words if w != pronoun])
    else:
        pronoun, first = rng.sample(words, 2)
    second = rng.choice([w for w in words if w not in (pronoun, first)])
    a1, a2 = (first, second) if rng.random() < 0.5 else (second, first)

    problem = [Fact("has_s", (w, INSTANCE_OF, s_class[w])) for w in words]
    problem += [Fact("has_s", e) for e in sorted(s_edges)]
    problem += [Fact("pronoun", (pronoun,)), Fact("ans_ch1", (a1,)), Fact("ans_ch2", (a2,))]
    knowledge = [Fact("has_k", (w, INSTANCE_OF, k_class[w])) for w in k_words]
    knowledge += [Fact("has_k", e) for e in sorted(k_edges)]
    knowledge += [Fact("has_k", (x, IS_SAME_AS, y)), Fact("has_k", (y, IS_SAME_AS, x))]

    aux = []
    # a few synonym/similar pairs between arbitrary instance nodes
    for pred in ("synonyms", "similar"):
        for _ in range(rng.randrange(3)):
            aux.append(Fact(pred, (rng.choice(words), rng.choice(k_words))))
    return load_problem_bundle(problem, knowledge, aux, label=label)


def sample_specs(count: int, seed0: int = 0, **overrides) -> Iterable[RandomInstanceSpec]:
    rng = random.Random(seed0)
    for i in range(count):
        params = dict(
            sentence_nodes=rng.randint(4, 10),
            knowledge_nodes=rng.randint(2, 6),
            edge_density=rng.choice([0.2, 0.35, 0.5, 0.7]),
            label_alphabet_size=rng.randint(1, 3),
            class_alphabet_size=rng.randint(2, 4),
            seed=seed0 * 100_003 + i,
        )
        params.update(overrides)
        yield RandomInstanceSpec(**params)
