"""Seeded synthetic text generation used as the offline oracle backend.

The grammar produces numbered subtopic lists, causal questions, and causal
statements as a pure function of (seed, kind, topic, n).  Statement heads and
tails mix topic-local phrases with a fixed cross-topic hub vocabulary so the
downstream relational graphs develop high-degree hubs even in fully offline
runs.
"""

from __future__ import annotations

import hashlib
import random

TOPIC_EXPANSION = "topic_expansion"
CAUSAL_QUESTIONS = "causal_questions"
CAUSAL_STATEMENTS = "causal_statements"

KINDS = (TOPIC_EXPANSION, CAUSAL_QUESTIONS, CAUSAL_STATEMENTS)

# Shared across every topic; sampling these with fixed probability is what
# gives the synthetic relational graphs their heavy-tailed degree structure.
HUB_CONCEPTS = [
    "systemic stress",
    "resource scarcity",
    "market confidence",
    "information asymmetry",
    "regulatory pressure",
    "capital flows",
    "public trust",
    "supply disruptions",
    "technology adoption",
    "risk appetite",
    "institutional capacity",
    "coordination failures",
]

HUB_PROBABILITY = 0.3

LOCAL_QUALIFIERS = [
    "capacity",
    "throughput",
    "stability",
    "efficiency",
    "uptake",
    "output",
    "quality",
    "participation",
    "investment",
    "awareness",
    "volatility",
    "turnover",
]

SUBTOPIC_ASPECTS = [
    "dynamics",
    "regulation",
    "incentives",
    "measurement",
    "institutions",
    "innovation",
    "risk management",
    "information flows",
    "governance",
    "resilience",
    "coordination",
    "adaptation",
    "financing",
    "infrastructure",
    "labor effects",
    "technology adoption",
]


def _rng(seed: int, kind: str, topic: str, n: int) -> random.Random:
    key = f"{seed}|{kind}|{topic}|{n}".encode("utf-8")
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return random.Random(int.from_bytes(digest, "big"))


def _phrase(rng: random.Random, topic: str) -> str:
    if rng.random() < HUB_PROBABILITY:
        return rng.choice(HUB_CONCEPTS)
    return f"{topic.strip().lower()} {rng.choice(LOCAL_QUALIFIERS)}"


def _sentence_case(text: str) -> str:
    return text[0].upper() + text[1:] if text else text


def synthetic_grammar(seed: int, kind: str, topic: str, n: int) -> list[str]:
    """Return exactly ``n`` numbered lines of the requested kind.

    Deterministic in (seed, kind, topic, n); safe for concurrent use.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if kind not in KINDS:
        raise ValueError(f"unknown grammar kind {kind!r}")
    rng = _rng(seed, kind, topic, n)
    lines: list[str] = []
    if kind == TOPIC_EXPANSION:
        aspects = rng.sample(SUBTOPIC_ASPECTS, k=min(n, len(SUBTOPIC_ASPECTS)))
        while len(aspects) < n:
            aspects.append(f"focus area {len(aspects) + 1}")
        for i, aspect in enumerate(aspects, start=1):
            lines.append(f"{i}. {topic.strip()} {aspect}")
    elif kind == CAUSAL_QUESTIONS:
        for i in range(1, n + 1):
            opener = "What causes" if rng.random() < 0.5 else "What leads to"
            lines.append(f"{i}. {opener} {_phrase(rng, topic)}?")
    else:
        for i in range(1, n + 1):
            head = _phrase(rng, topic)
            tail = _phrase(rng, topic)
            while tail == head:
                tail = _phrase(rng, topic)
            cue = "causes" if rng.random() < 0.5 else "leads to"
            lines.append(f"{i}. {_sentence_case(head)} {cue} {tail}.")
    return lines
