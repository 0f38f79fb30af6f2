from __future__ import annotations

from pathlib import Path
from typing import Iterable

import pytest

from wsgraph.cli import bundled_corpus
from wsgraph.facts import BundleMeta, Fact, ProblemBundle, bundle_to_facts, load_bundle_dir, load_problem_bundle

CORPUS = bundled_corpus()

# Pairs of the single mapping the hand-encoded lift/weak problem admits.
LIFT_WEAK_MAPPING = {
    ("weak_12", "weak_9"),
    ("lift_5", "lifts_4"),
    ("he_9", "person2_7"),
    ("man_2", "person1_1"),
    ("son_7", "someone_5"),
    ("was_10", "is_8"),
    ("not_4", "not_3"),
    ("could_3", "can_2"),
}


def corpus_bundle(label: str) -> tuple[ProblemBundle, BundleMeta]:
    return load_bundle_dir(CORPUS / label)


def make_bundle(
    sentence: dict[str, str],
    s_edges: Iterable[tuple[str, str, str]],
    knowledge: dict[str, str],
    k_edges: Iterable[tuple[str, str, str]],
    same_as: tuple[str, str] | list[tuple[str, str]],
    pronoun: str,
    a1: str,
    a2: str,
    synonyms: Iterable[tuple[str, str]] = (),
    similar: Iterable[tuple[str, str]] = (),
    label: str = "adhoc",
) -> ProblemBundle:
    """Build a bundle from class maps and relation edges."""
    problem = [Fact("has_s", (n, "instance_of", c)) for n, c in sentence.items()]
    problem += [Fact("has_s", e) for e in s_edges]
    problem += [Fact("pronoun", (pronoun,)), Fact("ans_ch1", (a1,)), Fact("ans_ch2", (a2,))]
    know = [Fact("has_k", (n, "instance_of", c)) for n, c in knowledge.items()]
    know += [Fact("has_k", e) for e in k_edges]
    pairs = [same_as] if isinstance(same_as, tuple) else same_as
    for x, y in pairs:
        know += [Fact("has_k", (x, "is_same_as", y)), Fact("has_k", (y, "is_same_as", x))]
    aux = [Fact("synonyms", p) for p in synonyms] + [Fact("similar", p) for p in similar]
    return load_problem_bundle(problem, know, aux, label=label)


def with_choices(bundle: ProblemBundle, pronoun: str, a1: str, a2: str) -> ProblemBundle:
    """The same graphs with different pronoun/answer-choice facts."""
    facts = [f for f in bundle_to_facts(bundle) if f.predicate not in ("pronoun", "ans_ch1", "ans_ch2")]
    facts += [Fact("pronoun", (pronoun,)), Fact("ans_ch1", (a1,)), Fact("ans_ch2", (a2,))]
    return load_problem_bundle(facts, label=bundle.label)


# Two same-as pairs share the pronoun's node, so more than one sentence node
# can sit on a partner of the pronoun's image.
def two_partner_bundle(a1: str = "a_2", a2: str = "b_3") -> ProblemBundle:
    return make_bundle(
        {"g_1": "give", "a_2": "person", "b_3": "person", "c_4": "person", "he_5": "person"},
        [("g_1", "agent", "a_2"), ("g_1", "recipient", "b_3"), ("g_1", "beneficiary", "c_4"), ("he_5", "trait", "g_1")],
        {"h_1": "give", "x_2": "person", "y_3": "person", "z_4": "person", "p_5": "person"},
        [("h_1", "agent", "x_2"), ("h_1", "recipient", "y_3"), ("h_1", "beneficiary", "z_4"), ("p_5", "trait", "h_1")],
        [("p_5", "x_2"), ("p_5", "z_4")],
        "he_5", a1, a2,
    )


# Two agents of one event, so the knowledge's agent can land on either.
def ambiguous_bundle() -> ProblemBundle:
    return make_bundle(
        {"g_1": "go", "a_2": "person", "b_3": "person", "he_4": "person"},
        [("g_1", "agent", "a_2"), ("g_1", "agent", "b_3"), ("he_4", "trait", "g_1")],
        {"h_1": "go", "x_2": "person", "y_3": "person"},
        [("h_1", "agent", "x_2"), ("y_3", "trait", "h_1")],
        ("x_2", "y_3"),
        "he_4", "a_2", "b_3",
    )


@pytest.fixture
def lift_weak() -> ProblemBundle:
    return corpus_bundle("lift_weak")[0]


@pytest.fixture
def lift_frail() -> ProblemBundle:
    return corpus_bundle("lift_weak_frail_synonym")[0]


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS


# One line per acceptance criterion, echoed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
