"""Reader and writer for ``.facts`` files.

Grammar (one or more facts per line)::

    fact    := predicate "(" string ("," string)* ")" "."
    string  := '"' [A-Za-z0-9_]+ '"'
    comment := "%" ... end of line

The format is a subset of ASP fact syntax, so bundle files can be fed to a
stock grounder for cross-checking.  Comment lines of the form
``%@ key: value`` carry free-text metadata (e.g. the English IF-sentence of
a piece of knowledge) and never affect reasoning.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .graph import (
    IS_SAME_AS,
    Diagnostic,
    KnowledgeGraph,
    LabeledGraph,
    SentenceGraph,
    UnknownNodeError,
    ValidationError,
    WSCProblem,
    is_identifier,
    problem_diagnostics,
    validate_knowledge_graph,
    validate_sentence_graph,
)

PREDICATE_ARITY = {
    "has_s": 3,
    "has_k": 3,
    "pronoun": 1,
    "ans_ch1": 1,
    "ans_ch2": 1,
    "synonyms": 2,
    "similar": 2,
    # meta.facts only
    "expected": 1,
    "policy": 1,
}

PROBLEM_FILE = "problem.facts"
KNOWLEDGE_FILE = "knowledge.facts"
AUX_FILE = "aux.facts"
META_FILE = "meta.facts"

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<comment>%.*)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<string>"[^"]*")
  | (?P<open>"[^"]*$)
  | (?P<punct>[(),.])
    """,
    re.VERBOSE,
)
_METADATA = re.compile(r"%@\s*([A-Za-z0-9_]+)\s*:\s*(.*?)\s*$")


class SelfSameAsError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Fact:
    predicate: str
    args: tuple[str, ...]
    line: int | None = field(default=None, compare=False)

    def __str__(self) -> str:
        inner = ",".join(f'"{a}"' for a in self.args)
        return f"{self.predicate}({inner})."


@dataclass(frozen=True)
class ProblemBundle:
    problem: WSCProblem
    knowledge: KnowledgeGraph
    synonyms: frozenset[tuple[str, str]] = frozenset()
    similar: frozenset[tuple[str, str]] = frozenset()
    source_paths: tuple[str, ...] = field(default=(), compare=False)
    metadata: dict[str, str] = field(default_factory=dict, compare=False, hash=False)
    warnings: tuple[Diagnostic, ...] = field(default=(), compare=False)

    @property
    def label(self) -> str:
        return self.problem.label


@dataclass(frozen=True)
class BundleMeta:
    expected: str | None = None
    policy: str | None = None


class FactSyntaxError(ValidationError):
    pass


def _decode(text: str | bytes) -> str:
    if isinstance(text, bytes):
        try:
            return text.decode("utf-8")
        except UnicodeDecodeError as exc:
            line = text[: exc.start].count(b"\n") + 1
            raise FactSyntaxError([Diagnostic("EncodingError", f"invalid UTF-8: {exc.reason}", line=line)]) from None
    return text


def _tokenize(line: str, lineno: int) -> tuple[list[tuple[str, str, int]], Diagnostic | None]:
    tokens = []
    pos = 0
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if m is None:
            return tokens, Diagnostic("SyntaxError", f"unexpected character {line[pos]!r}", line=lineno, column=pos + 1)
        kind = m.lastgroup
        if kind == "open":
            return tokens, Diagnostic("SyntaxError", "unterminated string", line=lineno, column=pos + 1)
        if kind == "comment":
            break
        if kind != "ws":
            tokens.append((kind, m.group(), pos + 1))
        pos = m.end()
    return tokens, None


def _parse_line(line: str, lineno: int) -> tuple[list[Fact], list[Diagnostic]]:
    tokens, err = _tokenize(line, lineno)
    if err is not None:
        return [], [err]
    facts: list[Fact] = []
    diags: list[Diagnostic] = []
    i = 0

    def fail(message: str, col: int) -> tuple[list[Fact], list[Diagnostic]]:
        return facts, diags + [Diagnostic("SyntaxError", message, line=lineno, column=col)]

    end_col = len(line) + 1
    while i < len(tokens):
        kind, text, col = tokens[i]
        if kind != "name":
            return fail(f"expected a predicate name, found {text!r}", col)
        pred, pred_col = text, col
        i += 1
        if i >= len(tokens) or tokens[i][1] != "(":
            return fail("expected '('", tokens[i][2] if i < len(tokens) else end_col)
        i += 1
        args: list[tuple[str, int]] = []
        while True:
            if i >= len(tokens) or tokens[i][0] != "string":
                return fail("expected a quoted argument", tokens[i][2] if i < len(tokens) else end_col)
            args.append((tokens[i][1][1:-1], tokens[i][2]))
            i += 1
            if i < len(tokens) and tokens[i][1] == ",":
                i += 1
                continue
            if i < len(tokens) and tokens[i][1] == ")":
                i += 1
                break
            return fail("expected ',' or ')'", tokens[i][2] if i < len(tokens) else end_col)
        if i >= len(tokens) or tokens[i][1] != ".":
            return fail("expected '.' after fact", tokens[i][2] if i < len(tokens) else end_col)
        i += 1

        ok = True
        if pred not in PREDICATE_ARITY:
            diags.append(Diagnostic("UnknownPredicate", f"unknown predicate {pred}", line=lineno, column=pred_col))
            ok = False
        elif len(args) != PREDICATE_ARITY[pred]:
            diags.append(Diagnostic(
                "ArityMismatch",
                f"{pred} takes {PREDICATE_ARITY[pred]} argument(s), got {len(args)}",
                line=lineno,
                column=pred_col,
            ))
            ok = False
        for value, col in args:
            if not is_identifier(value):
                diags.append(Diagnostic("BadIdentifier", f"argument {value!r} is not a valid identifier", line=lineno, column=col))
                ok = False
        if ok:
            facts.append(Fact(pred, tuple(v for v, _ in args), lineno))
    return facts, diags


def parse_fact_file(text: str | bytes, source: str | None = None) -> list[Fact]:
    """Parse fact text, returning facts in file order.

    Every line is parsed even after an error so all diagnostics surface at
    once; :class:`FactSyntaxError` is raised at the end if any were found.
    """
    text = _decode(text)
    facts: list[Fact] = []
    diags: list[Diagnostic] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        line_facts, line_diags = _parse_line(line, lineno)
        facts.extend(line_facts)
        diags.extend(line_diags)
    if diags:
        raise FactSyntaxError([d.located(None, None, source) for d in diags])
    return facts


def read_metadata(text: str | bytes) -> dict[str, str]:
    """Collect ``%@ key: value`` comment lines; later keys win."""
    meta = {}
    for line in _decode(text).splitlines():
        m = _METADATA.match(line.strip())
        if m:
            meta[m.group(1)] = m.group(2)
    return meta


def serialize_fact_file(facts: Iterable[Fact]) -> bytes:
    lines = sorted({(f.predicate, tuple(f.args)) for f in facts})
    return "".join(str(Fact(p, a)) + "\n" for p, a in lines).encode("utf-8")


def graph_to_facts(g: SentenceGraph | KnowledgeGraph | LabeledGraph, predicate: str) -> list[Fact]:
    graph = g if isinstance(g, LabeledGraph) else g.graph
    return [Fact(predicate, edge) for edge in sorted(graph.edges)]


def bundle_to_facts(bundle: ProblemBundle) -> list[Fact]:
    p = bundle.problem
    facts = graph_to_facts(p.sentence, "has_s") + graph_to_facts(bundle.knowledge, "has_k")
    facts += [Fact("pronoun", (p.pronoun,)), Fact("ans_ch1", (p.answer_choice_1,)), Fact("ans_ch2", (p.answer_choice_2,))]
    facts += [Fact("synonyms", pair) for pair in sorted(bundle.synonyms)]
    facts += [Fact("similar", pair) for pair in sorted(bundle.similar)]
    return facts


def _locate(diags: list[Diagnostic], facts: list[Fact], source_of: dict[int, str]) -> list[Diagnostic]:
    """Attach the line of the first fact mentioning a diagnostic's nodes."""
    out = []
    for d in diags:
        if d.line is None and d.nodes:
            for f in facts:
                if f.line is not None and any(n in f.args for n in d.nodes):
                    d = d.located(f.line, None, source_of.get(id(f)))
                    break
        out.append(d)
    return out


def load_problem_bundle(
    problem_facts: Iterable[Fact],
    knowledge_facts: Iterable[Fact] = (),
    aux_facts: Iterable[Fact] = (),
    *,
    label: str = "",
    source_paths: Iterable[str] = (),
    metadata: dict[str, str] | None = None,
) -> ProblemBundle:
    """Build and cross-check a problem bundle from parsed facts.

    The three groups are pooled, so a single file holding every predicate
    works as well as separate files.
    """
    source_paths = tuple(source_paths)
    groups = [list(problem_facts), list(knowledge_facts), list(aux_facts)]
    source_of: dict[int, str] = {}
    for group, path in zip(groups, source_paths):
        for f in group:
            source_of[id(f)] = path
    facts = [f for group in groups for f in group]

    by_pred: dict[str, list[Fact]] = {p: [] for p in PREDICATE_ARITY}
    for f in facts:
        by_pred.setdefault(f.predicate, []).append(f)

    diags: list[Diagnostic] = []
    sentence = knowledge = None
    try:
        sentence = validate_sentence_graph(LabeledGraph.from_edges(f.args for f in by_pred["has_s"]))
    except ValidationError as exc:
        diags += exc.diagnostics
    if not by_pred["has_k"]:
        diags.append(Diagnostic("MissingKnowledge", "no has_k facts found"))
    else:
        try:
            knowledge = validate_knowledge_graph(LabeledGraph.from_edges(f.args for f in by_pred["has_k"]))
        except ValidationError as exc:
            diags += exc.diagnostics

    def single(pred: str, missing: str, duplicate: str) -> str | None:
        values = sorted({f.args[0] for f in by_pred[pred]})
        if not values:
            diags.append(Diagnostic(missing, f"no {pred} fact found"))
            return None
        if len(values) > 1:
            diags.append(Diagnostic(duplicate, f"{len(values)} {pred} facts: {', '.join(values)}", tuple(values)))
            return None
        return values[0]

    pronoun = single("pronoun", "MissingPronoun", "DuplicatePronoun")
    a1 = single("ans_ch1", "MissingAnswerChoice", "DuplicateAnswerChoice")
    a2 = single("ans_ch2", "MissingAnswerChoice", "DuplicateAnswerChoice")

    warnings: list[Diagnostic] = []
    if sentence is not None and None not in (pronoun, a1, a2):
        pd = problem_diagnostics(sentence, pronoun, a1, a2)
        diags += [d for d in pd if d.is_error]
        warnings += [d for d in pd if not d.is_error]

    aux: dict[str, set[tuple[str, str]]] = {"synonyms": set(), "similar": set()}
    for pred in aux:
        for f in by_pred[pred]:
            x, y = f.args
            bad = []
            if sentence is not None and x not in sentence.instance_nodes:
                bad.append(f"{x} is not a sentence instance node")
            if knowledge is not None and y not in knowledge.instance_nodes:
                bad.append(f"{y} is not a knowledge instance node")
            if bad:
                diags.append(Diagnostic("BadAuxPair", f"{pred}({x},{y}): {'; '.join(bad)}", (x, y)))
            aux[pred].add((x, y))

    if diags:
        raise ValidationError(_locate(diags, facts, source_of))

    assert sentence is not None and knowledge is not None
    problem = WSCProblem(sentence, pronoun, a1, a2, label)
    warnings += list(knowledge.warnings)
    return ProblemBundle(
        problem,
        knowledge,
        frozenset(aux["synonyms"]),
        frozenset(aux["similar"]),
        source_paths,
        dict(metadata or {}),
        tuple(_locate(warnings, facts, source_of)),
    )


def add_same_as_pair(g: SentenceGraph | KnowledgeGraph, x: str, y: str) -> KnowledgeGraph:
    """Turn the graph of an IF-sentence into a knowledge graph by linking x and y."""
    for node in (x, y):
        if node not in g.graph.nodes:
            raise UnknownNodeError(node)
    if x == y:
        raise SelfSameAsError(f"cannot make {x} the same as itself")
    edges = set(g.graph.edges) | {(x, IS_SAME_AS, y), (y, IS_SAME_AS, x)}
    return validate_knowledge_graph(LabeledGraph(g.graph.nodes, frozenset(edges)))


def read_facts(path: str | Path) -> list[Fact]:
    path = Path(path)
    return parse_fact_file(path.read_bytes(), source=str(path))


def parse_meta(facts: Iterable[Fact]) -> BundleMeta:
    expected = policy = None
    for f in facts:
        if f.predicate == "expected":
            expected = f.args[0]
        elif f.predicate == "policy":
            policy = f.args[0]
    return BundleMeta(expected, policy)


def load_bundle_dir(path: str | Path) -> tuple[ProblemBundle, BundleMeta]:
    """Load ``<dir>/{problem,knowledge,aux?,meta?}.facts``."""
    path = Path(path)
    knowledge_files = sorted(p.name for p in path.glob("knowledge*.facts"))
    if len(knowledge_files) > 1:
        raise ValidationError([Diagnostic(
            "MultipleKnowledge",
            f"bundle has {len(knowledge_files)} knowledge files ({', '.join(knowledge_files)}); only one piece of knowledge is supported",
            source=str(path),
        )])
    for required in (PROBLEM_FILE, KNOWLEDGE_FILE):
        if not (path / required).is_file():
            raise ValidationError([Diagnostic("MissingFile", f"{required} not found", source=str(path))])

    paths = [path / PROBLEM_FILE, path / KNOWLEDGE_FILE]
    if (path / AUX_FILE).is_file():
        paths.append(path / AUX_FILE)
    groups = [read_facts(p) for p in paths]
    metadata: dict[str, str] = {}
    for p in paths:
        metadata.update(read_metadata(p.read_bytes()))
    meta = BundleMeta()
    if (path / META_FILE).is_file():
        meta = parse_meta(read_facts(path / META_FILE))
        metadata.update(read_metadata((path / META_FILE).read_bytes()))
    while len(groups) < 3:
        groups.append([])
    bundle = load_problem_bundle(
        *groups,
        label=path.name,
        source_paths=[str(p) for p in paths],
        metadata=metadata,
    )
    return bundle, meta


def load_bundle_files(problem: str | Path, knowledge: str | Path | None = None, aux: str | Path | None = None, label: str | None = None) -> ProblemBundle:
    paths = [Path(p) for p in (problem, knowledge, aux) if p is not None]
    groups = [read_facts(p) for p in paths]
    metadata: dict[str, str] = {}
    for p in paths:
        metadata.update(read_metadata(p.read_bytes()))
    # Order of groups matters only for diagnostic attribution.
    while len(groups) < 3:
        groups.append([])
    return load_problem_bundle(
        *groups,
        label=label if label is not None else Path(problem).stem,
        source_paths=[str(p) for p in paths],
        metadata=metadata,
    )
