from __future__ import annotations

import json

import pytest

from wsgraph.matcher import COMPLETE, CompatibilityPolicy, CompatMode, Exhaustiveness, Mapping, SearchBudget
from wsgraph.resolver import (
    CandidateAnswer,
    Choice,
    Reason,
    SolveConfig,
    Verdict,
    aggregate,
    derive_candidate,
    solve,
)

from conftest import LIFT_WEAK_MAPPING, ambiguous_bundle, corpus_bundle, two_partner_bundle, with_choices

SYNONYMS = SolveConfig(CompatibilityPolicy(CompatMode.CLASS_OR_SYNONYM))


def cand(node: str, choice: Choice = Choice.A1, index: int = 0) -> CandidateAnswer:
    return CandidateAnswer(index, choice, node, ("n1", "n2"))


class TestDeriveCandidate:
    def test_lift_weak(self, lift_weak):
        m = Mapping.from_pairs(LIFT_WEAK_MAPPING)
        c = derive_candidate(lift_weak.problem, lift_weak.knowledge, m, 4)
        assert c == CandidateAnswer(4, Choice.A1, "man_2", ("person2_7", "person1_1"))

    def test_second_choice(self, lift_weak):
        b = with_choices(lift_weak, "he_9", "son_7", "man_2")
        c = derive_candidate(b.problem, b.knowledge, Mapping.from_pairs(LIFT_WEAK_MAPPING))
        assert (c.choice, c.node) == (Choice.A2, "man_2")

    def test_neither_choice_on_a_partner(self, lift_weak):
        b = with_choices(lift_weak, "he_9", "son_7", "his_6")
        assert derive_candidate(b.problem, b.knowledge, Mapping.from_pairs(LIFT_WEAK_MAPPING)) is None

    def test_pronoun_unmapped(self, lift_weak):
        m = Mapping.from_pairs(p for p in LIFT_WEAK_MAPPING if p[0] != "he_9")
        assert derive_candidate(lift_weak.problem, lift_weak.knowledge, m) is None

    def test_other_node_on_a_partner_blocks(self):
        b = two_partner_bundle()
        m = Mapping.from_pairs([("g_1", "h_1"), ("a_2", "x_2"), ("b_3", "y_3"), ("c_4", "z_4"), ("he_5", "p_5")])
        assert derive_candidate(b.problem, b.knowledge, m) is None

    def test_both_choices_on_partners_yields_nothing(self):
        b = two_partner_bundle("a_2", "c_4")
        m = Mapping.from_pairs([("g_1", "h_1"), ("a_2", "x_2"), ("b_3", "y_3"), ("c_4", "z_4"), ("he_5", "p_5")])
        assert derive_candidate(b.problem, b.knowledge, m) is None


class TestAggregate:
    def test_unanimous(self):
        v = aggregate([cand("a", index=0), cand("a", index=1)], mapping_count=3)
        assert (v.answer, v.reason, v.outcome) == ("a", Reason.UNANIMOUS, "answer")

    def test_conflict(self):
        v = aggregate([cand("a"), cand("b", Choice.A2, 1)], mapping_count=2)
        assert (v.answer, v.reason) == (None, Reason.CONFLICTING_CANDIDATES)
        assert len(v.candidates) == 2

    def test_no_candidates(self):
        assert aggregate([], mapping_count=2).reason is Reason.NO_CANDIDATES

    def test_no_mappings(self):
        assert aggregate([], mapping_count=0).reason is Reason.NO_MAPPINGS

    def test_truncated_search_is_no_answer(self):
        v = aggregate([cand("a")], Exhaustiveness(False, "max_mappings"), mapping_count=1)
        assert (v.answer, v.reason) == (None, Reason.TRUNCATED_SEARCH)

    def test_truncated_search_may_be_trusted(self):
        cfg = SolveConfig(treat_truncated_as_no_answer=False)
        assert aggregate([cand("a")], Exhaustiveness(False, "time_limit"), cfg, 1).answer == "a"

    def test_verdict_must_be_backed(self):
        with pytest.raises(ValueError):
            Verdict("a", Reason.UNANIMOUS, (cand("b"),))


class TestSolve:
    def test_lift_weak(self, lift_weak):
        verdict, report = solve(lift_weak)
        assert verdict.answer == "man_2"
        assert [set(m.pairs) for m in report.mappings] == [LIFT_WEAK_MAPPING]
        assert report.core_sizes == {"sentence": {"nodes": 10, "edges": 9}, "knowledge": {"nodes": 8, "edges": 7}}

    def test_frail_needs_synonyms(self, lift_frail):
        assert solve(lift_frail)[0].reason is Reason.NO_MAPPINGS
        assert solve(lift_frail, SYNONYMS)[0].answer == "man_2"

    def test_similar_needs_widest_mode(self):
        bundle, _ = corpus_bundle("lift_weak_hoist_similar")
        assert solve(bundle, SYNONYMS)[0].answer is None
        wide = SolveConfig(CompatibilityPolicy(CompatMode.CLASS_OR_SYNONYM_OR_SIMILAR))
        assert solve(bundle, wide)[0].answer == "man_2"

    def test_conflicting(self):
        verdict, report = solve(ambiguous_bundle())
        assert verdict.reason is Reason.CONFLICTING_CANDIDATES
        assert {c.node for c in verdict.candidates} == {"a_2", "b_3"}
        assert report.mapping_count == 2

    def test_no_candidates(self):
        verdict, _ = solve(two_partner_bundle())
        assert verdict.reason is Reason.NO_CANDIDATES

    def test_truncated(self):
        cfg = SolveConfig(budget=SearchBudget(max_mappings=1))
        verdict, report = solve(ambiguous_bundle(), cfg)
        assert verdict.reason is Reason.TRUNCATED_SEARCH
        assert report.to_dict()["truncated_by"] == "max_mappings"


class TestReport:
    def test_stable_omits_timing(self, lift_weak):
        _, report = solve(lift_weak)
        assert "timing" in report.to_dict()
        assert "timing" not in report.to_dict(stable=True)

    def test_json_is_deterministic(self, lift_weak):
        first = solve(lift_weak)[1].to_json(stable=True)
        assert solve(lift_weak)[1].to_json(stable=True) == first
        doc = json.loads(first)
        assert doc["answer_node"] == "man_2"
        assert doc["outcome"] == "answer"
        assert doc["candidates"][0]["witness"] == ["person2_7", "person1_1"]

    def test_text(self, lift_frail):
        text = solve(lift_frail)[1].to_text()
        assert "no answer (no_mappings)" in text
        assert "UnsharedClass" in text


def test_complete_constant():
    assert COMPLETE.complete and str(COMPLETE) == "complete"
    assert str(Exhaustiveness(False, "node_cap")) == "truncated(node_cap)"
