"""Per-topic generation of causal questions and causal statements.

Questions and statements are produced in separate passes and persisted to
separate line-delimited files; a per-depth quota hook lets the active
exploration policy spend less on deep topics.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from . import grammar, oracle
from .errors import MalformedRecord
from .topics import TopicGraph, TopicNode, parse_numbered_list

QUESTION_PREFIX_RE = re.compile(r"^(what causes|what leads to)\b", re.IGNORECASE)
STATEMENT_CUE_RE = re.compile(
    r"\b(causes?|leads? to|increases?|reduces?|influences?|affects?|prevents?|"
    r"supports?|improves?|impedes?|stresses|results? in)\b",
    re.IGNORECASE,
)

QUESTIONS_FILENAME = "causal_questions.jsonl"
STATEMENTS_FILENAME = "causal_statements.jsonl"


@dataclass
class CausalRecord:
    topic: str
    path: list[str]
    question: str = ""
    statements: list[str] = field(default_factory=list)
    injected: bool = False


@dataclass
class GenerationTally:
    topics_queried: int = 0
    nonconforming_lines: int = 0
    empty_topics: int = 0


QuotaFn = Callable[[int], int]


def uniform_quota(per_topic: int) -> QuotaFn:
    return lambda depth: per_topic


def depth_aware_quota(per_topic: int, full_depth: int = 2, reduced: int = 1) -> QuotaFn:
    """Full quota for shallow topics, a reduced one below full_depth."""
    return lambda depth: per_topic if depth <= full_depth else reduced


def _selected_topics(graph: TopicGraph, topic_ids: Optional[list[int]]) -> list[TopicNode]:
    if topic_ids is None:
        return list(graph.nodes)
    return [graph.node(i) for i in topic_ids]


def generate_questions(
    graph: TopicGraph,
    per_topic: int,
    config: oracle.OracleConfig,
    domain_phrase: str = "",
    quota: Optional[QuotaFn] = None,
    budget: Optional[oracle.Budget] = None,
    topic_ids: Optional[list[int]] = None,
    tally: Optional[GenerationTally] = None,
) -> list[CausalRecord]:
    """One oracle call per topic; one record per conforming question line."""
    if per_topic < 1:
        raise ValueError("per_topic must be >= 1")
    quota = quota or uniform_quota(per_topic)
    tally = tally if tally is not None else GenerationTally()
    template = oracle.default_template(grammar.CAUSAL_QUESTIONS, domain_phrase)
    nodes = _selected_topics(graph, topic_ids)
    prompts = [oracle.render_prompt(template, n.label, n=max(1, quota(n.depth))) for n in nodes]
    responses = oracle.map_generate(config, prompts, budget=budget)
    records: list[CausalRecord] = []
    for node, response in zip(nodes, responses):
        tally.topics_queried += 1
        lines = parse_numbered_list(response)
        conforming = [ln for ln in lines if QUESTION_PREFIX_RE.match(ln.strip())]
        tally.nonconforming_lines += len(lines) - len(conforming)
        if not conforming:
            tally.empty_topics += 1
            records.append(CausalRecord(topic=node.label, path=node.path))
            continue
        for q in conforming[: quota(node.depth)]:
            records.append(CausalRecord(topic=node.label, path=node.path, question=q))
    return records


def generate_statements(
    graph: TopicGraph,
    per_topic: int,
    config: oracle.OracleConfig,
    domain_phrase: str = "",
    quota: Optional[QuotaFn] = None,
    budget: Optional[oracle.Budget] = None,
    topic_ids: Optional[list[int]] = None,
    questions: Optional[list[CausalRecord]] = None,
    tally: Optional[GenerationTally] = None,
) -> list[CausalRecord]:
    """One oracle call per topic, one record per topic carrying its statements.

    Lines without a causal cue are kept (they may still parse downstream) but
    tallied.  When the question pass ran first, each record is paired with the
    topic's first question for display.
    """
    if per_topic < 1:
        raise ValueError("per_topic must be >= 1")
    quota = quota or uniform_quota(per_topic)
    tally = tally if tally is not None else GenerationTally()
    template = oracle.default_template(grammar.CAUSAL_STATEMENTS, domain_phrase)
    first_question: dict[str, str] = {}
    for rec in questions or []:
        if rec.question and rec.topic not in first_question:
            first_question[rec.topic] = rec.question
    nodes = _selected_topics(graph, topic_ids)
    prompts = [oracle.render_prompt(template, n.label, n=max(1, quota(n.depth))) for n in nodes]
    responses = oracle.map_generate(config, prompts, budget=budget)
    records: list[CausalRecord] = []
    for node, response in zip(nodes, responses):
        tally.topics_queried += 1
        lines = parse_numbered_list(response)[: quota(node.depth)]
        if not lines:
            tally.empty_topics += 1
            continue
        tally.nonconforming_lines += sum(1 for ln in lines if not STATEMENT_CUE_RE.search(ln))
        records.append(
            CausalRecord(
                topic=node.label,
                path=node.path,
                question=first_question.get(node.label, ""),
                statements=lines,
            )
        )
    return records


def persist_corpus(records: list[CausalRecord], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(
                json.dumps(
                    {
                        "topic": rec.topic,
                        "path": rec.path,
                        "question": rec.question,
                        "statements": rec.statements,
                        "injected": rec.injected,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def load_corpus(path: str | Path) -> list[CausalRecord]:
    path = Path(path)
    records: list[CausalRecord] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                data = json.loads(raw)
                records.append(
                    CausalRecord(
                        topic=data["topic"],
                        path=list(data["path"]),
                        question=data.get("question", ""),
                        statements=list(data.get("statements", [])),
                        injected=bool(data.get("injected", False)),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedRecord(str(path), lineno, str(exc)) from exc
    return records
