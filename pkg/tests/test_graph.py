from __future__ import annotations

import pytest

from wsgraph.graph import (
    ENTITY_CLASSES,
    Diagnostic,
    LabeledGraph,
    NotAnInstanceNodeError,
    UnknownNodeError,
    ValidationError,
    WSCProblem,
    class_of,
    is_identifier,
    validate_knowledge_graph,
    validate_sentence_graph,
)


def codes(exc: pytest.ExceptionInfo) -> set[str]:
    return {d.code for d in exc.value.diagnostics}


def sentence(*extra, classes=None):
    classes = classes or {"man_2": "person", "lift_5": "lift", "son_7": "person", "he_9": "person"}
    edges = [(n, "instance_of", c) for n, c in classes.items()]
    edges += [("lift_5", "agent", "man_2"), ("lift_5", "recipient", "son_7"), ("lift_5", "caused_by", "he_9")]
    return LabeledGraph.from_edges(edges + list(extra))


def knowledge(*extra, same_as=True):
    edges = [
        ("p1_1", "instance_of", "person"),
        ("p2_3", "instance_of", "person"),
        ("lift_2", "instance_of", "lift"),
        ("lift_2", "agent", "p1_1"),
        ("lift_2", "caused_by", "p2_3"),
    ]
    if same_as:
        edges += [("p1_1", "is_same_as", "p2_3"), ("p2_3", "is_same_as", "p1_1")]
    return LabeledGraph.from_edges(edges + list(extra))


class TestSentenceGraph:
    def test_partitions_nodes(self):
        s = validate_sentence_graph(sentence())
        assert s.instance_nodes == {"man_2", "lift_5", "son_7", "he_9"}
        assert s.class_nodes == {"person", "lift"}
        assert s.instance_nodes | s.class_nodes == s.nodes

    def test_class_lookup(self):
        s = validate_sentence_graph(sentence())
        assert class_of(s, "man_2") == "person"
        assert s.class_of("lift_5") == "lift"

    def test_class_lookup_errors(self):
        s = validate_sentence_graph(sentence())
        with pytest.raises(UnknownNodeError):
            class_of(s, "nobody_1")
        with pytest.raises(NotAnInstanceNodeError):
            class_of(s, "person")

    def test_relation_edges_exclude_class_edges(self):
        s = validate_sentence_graph(sentence())
        assert all(label != "instance_of" for _, label, _ in s.relation_edges)
        assert len(s.relation_edges) == 3

    def test_instance_node_with_two_classes(self):
        with pytest.raises(ValidationError) as exc:
            validate_sentence_graph(sentence(("man_2", "instance_of", "animal")))
        assert "MultipleClassMembership" in codes(exc)

    def test_same_as_not_allowed(self):
        with pytest.raises(ValidationError) as exc:
            validate_sentence_graph(sentence(("man_2", "is_same_as", "he_9")))
        assert "ReservedLabelMisuse" in codes(exc)

    def test_cycle_rejected(self):
        with pytest.raises(ValidationError) as exc:
            validate_sentence_graph(sentence(("man_2", "agent", "lift_5")))
        assert "CycleDetected" in codes(exc)

    def test_missing_class(self):
        with pytest.raises(ValidationError) as exc:
            validate_sentence_graph(sentence(("lift_5", "modifier", "so_11")))
        assert "MissingClassMembership" in codes(exc)

    def test_class_node_in_relation(self):
        with pytest.raises(ValidationError) as exc:
            validate_sentence_graph(sentence(("lift_5", "modifier", "person")))
        assert "ClassNodeMisuse" in codes(exc)

    def test_instance_of_into_instance(self):
        with pytest.raises(ValidationError) as exc:
            validate_sentence_graph(LabeledGraph.from_edges([("a_1", "instance_of", "b_2"), ("b_2", "instance_of", "thing")]))
        assert "ClassNodeMisuse" in codes(exc)

    def test_orphan_and_dangling(self):
        g = LabeledGraph(frozenset({"man_2", "person", "stray_4"}), frozenset({("man_2", "instance_of", "person"), ("man_2", "agent", "ghost_3")}))
        with pytest.raises(ValidationError) as exc:
            validate_sentence_graph(g)
        assert {"OrphanNode", "DanglingEdge"} <= codes(exc)

    def test_bad_identifier(self):
        with pytest.raises(ValidationError) as exc:
            validate_sentence_graph(sentence(("lift_5", "has part", "man_2")))
        assert "BadIdentifier" in codes(exc)

    def test_all_diagnostics_reported_together(self):
        g = sentence(("man_2", "instance_of", "animal"), ("lift_5", "modifier", "person"))
        with pytest.raises(ValidationError) as exc:
            validate_sentence_graph(g)
        assert {"MultipleClassMembership", "ClassNodeMisuse"} <= codes(exc)


class TestKnowledgeGraph:
    def test_same_as_pairs_are_unordered(self):
        k = validate_knowledge_graph(knowledge())
        assert k.same_as_pairs == {frozenset({"p1_1", "p2_3"})}
        assert k.partners_of("p1_1") == {"p2_3"}
        assert k.partners_of("p2_3") == {"p1_1"}
        assert k.partners_of("lift_2") == frozenset()

    def test_same_as_is_not_a_relation_edge(self):
        k = validate_knowledge_graph(knowledge())
        assert all(label != "is_same_as" for _, label, _ in k.relation_edges)

    def test_asymmetric_same_as(self):
        g = knowledge(("p1_1", "is_same_as", "p2_3"), same_as=False)
        with pytest.raises(ValidationError) as exc:
            validate_knowledge_graph(g)
        assert "AsymmetricSameAs" in codes(exc)

    def test_self_same_as(self):
        with pytest.raises(ValidationError) as exc:
            validate_knowledge_graph(knowledge(("p1_1", "is_same_as", "p1_1")))
        assert "SelfSameAs" in codes(exc)

    def test_same_as_on_class_node(self):
        g = knowledge(("p1_1", "is_same_as", "person"), ("person", "is_same_as", "p1_1"))
        with pytest.raises(ValidationError) as exc:
            validate_knowledge_graph(g)
        assert "SameAsOnClassNode" in codes(exc)

    def test_missing_same_as(self):
        with pytest.raises(ValidationError) as exc:
            validate_knowledge_graph(knowledge(same_as=False))
        assert "MissingSameAs" in codes(exc)

    def test_same_as_does_not_count_toward_cycles(self):
        validate_knowledge_graph(knowledge())

    def test_non_entity_same_as_warns(self):
        g = LabeledGraph.from_edges([
            ("run_1", "instance_of", "run"),
            ("run_2", "instance_of", "run"),
            ("run_1", "next", "run_2"),
            ("run_1", "is_same_as", "run_2"),
            ("run_2", "is_same_as", "run_1"),
        ])
        k = validate_knowledge_graph(g)
        assert {d.code for d in k.warnings} == {"NonEntityClass"}
        assert all(not d.is_error for d in k.warnings)


class TestProblem:
    def test_valid(self):
        s = validate_sentence_graph(sentence())
        p = WSCProblem(s, "he_9", "man_2", "son_7")
        assert p.choices == ("man_2", "son_7")

    def test_pronoun_must_be_instance(self):
        s = validate_sentence_graph(sentence())
        with pytest.raises(ValidationError) as exc:
            WSCProblem(s, "person", "man_2", "son_7")
        assert "PronounNotInGraph" in codes(exc)

    def test_answer_choice_missing(self):
        s = validate_sentence_graph(sentence())
        with pytest.raises(ValidationError) as exc:
            WSCProblem(s, "he_9", "woman_1", "son_7")
        assert "AnswerChoiceNotInGraph" in codes(exc)

    def test_nodes_distinct(self):
        s = validate_sentence_graph(sentence())
        with pytest.raises(ValidationError) as exc:
            WSCProblem(s, "he_9", "man_2", "man_2")
        assert "IndistinctProblemNodes" in codes(exc)


def test_entity_vocabulary_includes_documented_examples():
    assert {"object", "person", "group", "location"} <= ENTITY_CLASSES
    assert len(ENTITY_CLASSES) == 20


@pytest.mark.parametrize("text,ok", [("man_2", True), ("Joan_1", True), ("a", True), ("", False), ("has space", False), ("n't", False)])
def test_identifiers(text, ok):
    assert is_identifier(text) is ok


def test_diagnostic_rendering():
    d = Diagnostic("OrphanNode", "node x has no incident edge", ("x",), line=3, column=5, source="k.facts")
    assert str(d) == "k.facts:3:5: error[OrphanNode] node x has no incident edge"
    assert str(Diagnostic("MissingSameAs", "none")) == "error[MissingSameAs] none"
    assert d.located(9).line == 3
