"""Pronoun resolution by matching sentence graphs against knowledge graphs."""

from __future__ import annotations

from .facts import (
    BundleMeta,
    Fact,
    FactSyntaxError,
    ProblemBundle,
    load_bundle_dir,
    load_bundle_files,
    load_problem_bundle,
    parse_fact_file,
    serialize_fact_file,
)
from .graph import (
    Diagnostic,
    KnowledgeGraph,
    LabeledGraph,
    SentenceGraph,
    ValidationError,
    WSCProblem,
    validate_knowledge_graph,
    validate_sentence_graph,
)
from .matcher import (
    CompatibilityPolicy,
    CompatMode,
    Mapping,
    SearchBudget,
    enumerate_isomorphisms,
    extract_knowledge_core,
    extract_sentence_core,
)
from .resolver import AnswerReport, Choice, Reason, SolveConfig, Verdict, solve

__all__ = [
    "AnswerReport",
    "BundleMeta",
    "Choice",
    "CompatMode",
    "CompatibilityPolicy",
    "Diagnostic",
    "Fact",
    "FactSyntaxError",
    "KnowledgeGraph",
    "LabeledGraph",
    "Mapping",
    "ProblemBundle",
    "Reason",
    "SearchBudget",
    "SentenceGraph",
    "SolveConfig",
    "ValidationError",
    "Verdict",
    "WSCProblem",
    "enumerate_isomorphisms",
    "extract_knowledge_core",
    "extract_sentence_core",
    "load_bundle_dir",
    "load_bundle_files",
    "load_problem_bundle",
    "parse_fact_file",
    "serialize_fact_file",
    "solve",
    "validate_knowledge_graph",
    "validate_sentence_graph",
]
