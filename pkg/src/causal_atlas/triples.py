"""Cue-based extraction of typed causal triples from sentences.

A deterministic cue grammar segments each sentence at verbal cue phrases and
cleans the flanking spans: heads lose determiners, leading participial
modifiers, and trailing adverbial clauses; tails lose rationale clauses
("due to", "because", "by"), collapse comma-attached result continuations
("..., resulting in Z") onto the final effect, and rewrite infinitive results
("its price to rise" -> "price of gold rises") with possessives resolved
against the head.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

from .corpus import CausalRecord
from .errors import MalformedRecord


class RelationType(str, Enum):
    CAUSES = "causes"
    LEADS_TO = "leads_to"
    INCREASES = "increases"
    REDUCES = "reduces"
    INFLUENCES = "influences"
    AFFECTS = "affects"
    PREVENTS = "prevents"
    SUPPORTS = "supports"
    IMPROVES = "improves"
    IMPEDES = "impedes"
    STRESSES = "stresses"
    IS_A = "is_a"
    PART_OF = "part_of"


_CUES: dict[str, RelationType] = {
    "causes": RelationType.CAUSES,
    "can cause": RelationType.CAUSES,
    "may cause": RelationType.CAUSES,
    "leads to": RelationType.LEADS_TO,
    "lead to": RelationType.LEADS_TO,
    "results in": RelationType.LEADS_TO,
    "result in": RelationType.LEADS_TO,
    "increases": RelationType.INCREASES,
    "reduces": RelationType.REDUCES,
    "influences": RelationType.INFLUENCES,
    "affects": RelationType.AFFECTS,
    "prevents": RelationType.PREVENTS,
    "supports": RelationType.SUPPORTS,
    "improves": RelationType.IMPROVES,
    "impedes": RelationType.IMPEDES,
    "stresses": RelationType.STRESSES,
    "is a type of": RelationType.IS_A,
    "is a kind of": RelationType.IS_A,
    "is part of": RelationType.PART_OF,
}


def cue_lexicon() -> dict[str, RelationType]:
    """Surface cue phrase -> relation type; covers every relation."""
    return dict(_CUES)


_CUE_RE = re.compile(
    r"\b(" + "|".join(re.escape(c) for c in sorted(_CUES, key=len, reverse=True)) + r")\b",
    re.IGNORECASE,
)

_DETERMINERS = {"a", "an", "the", "this", "that", "these", "those"}
_LEADING_MODIFIERS = _DETERMINERS | {
    "increased",
    "increasing",
    "decreased",
    "decreasing",
    "reduced",
    "rising",
    "falling",
    "growing",
    "declining",
    "elevated",
    "heightened",
}
_HEAD_ADVERBIAL_RE = re.compile(r"\s+(?:during|amid|throughout)\s+", re.IGNORECASE)
_CHAIN_RE = re.compile(
    r"^(.*?),\s*(?:resulting in|leading to|thereby causing|which (?:leads to|causes|results in))\s+(.+)$",
    re.IGNORECASE,
)
_COMPARATIVE_MODIFIERS = {
    "greater",
    "higher",
    "lower",
    "more",
    "less",
    "increased",
    "reduced",
    "rising",
    "falling",
}
_RATIONALE_RE = re.compile(r"\s*,?\s+(?:due to|because(?: of)?|owing to|by)\s+", re.IGNORECASE)
_INFINITIVE_RE = re.compile(
    r"^(.*\S)\s+to\s+(rise|fall|increase|decrease|grow|shrink|decline|improve|worsen|drop|expand|contract)$",
    re.IGNORECASE,
)
_POSSESSIVE_RE = re.compile(r"^(?:its|their)\s+(\w+)(.*)$", re.IGNORECASE)
_NEGATORS = {"not", "never", "no", "hardly", "rarely"}
_INTERROGATIVES = {"what", "which", "who", "why", "how", "when", "where"}
_TERMINAL_PUNCT_RE = re.compile(r"[\s.,;:!?]+$")
_SPLIT_INTERIOR_RE = re.compile(r",\s+and\s+|;\s*(?:and\s+)?", re.IGNORECASE)


def normalize_phrase(text: str) -> str:
    """Lowercase, collapse whitespace, strip enclosing quotes and terminal
    punctuation.  Idempotent."""
    out = " ".join(text.split()).strip("\"'“”‘’ ")
    out = _TERMINAL_PUNCT_RE.sub("", out)
    return out.lower()


@dataclass(frozen=True)
class SourceRef:
    file: str
    record: int
    line: int


@dataclass
class Triple:
    head: str
    relation: RelationType
    tail: str
    domain: str
    source: SourceRef = SourceRef("", -1, -1)
    surface: str = ""
    injected: bool = False


@dataclass
class ExtractionStats:
    sentences: int = 0
    triples: int = 0
    no_cue: int = 0
    negated: int = 0
    question_like: int = 0
    empty_span: int = 0


def _strip_leading_modifiers(tokens: list[str]) -> list[str]:
    while len(tokens) > 1 and tokens[0].lower() in _LEADING_MODIFIERS:
        tokens = tokens[1:]
    return tokens


def _clean_head(span: str) -> str:
    text = span.strip()
    tokens = _strip_leading_modifiers(text.split())
    text = " ".join(tokens)
    cut = _HEAD_ADVERBIAL_RE.search(text)
    if cut and text[: cut.start()].strip():
        text = text[: cut.start()]
    return normalize_phrase(text)


def _strip_conjunct_comparatives(phrase: str) -> str:
    conjuncts = re.split(r"\s+and\s+", phrase)
    cleaned = []
    for part in conjuncts:
        tokens = part.split()
        while len(tokens) > 1 and tokens[0].lower() in _COMPARATIVE_MODIFIERS:
            tokens = tokens[1:]
        cleaned.append(" ".join(tokens))
    return " and ".join(cleaned)


def _antecedent(head: str) -> str:
    tokens = head.split()
    for i, tok in enumerate(tokens[:-1]):
        if tok.lower() in ("of", "for"):
            cand = tokens[i + 1 :]
            while cand and cand[0].lower() in _DETERMINERS:
                cand = cand[1:]
            if cand:
                return cand[0]
    return tokens[-1] if tokens else ""


def _clean_tail(span: str, head: str) -> str:
    text = _TERMINAL_PUNCT_RE.sub("", span.strip())
    chain = _CHAIN_RE.match(text)
    if chain:
        text = _strip_conjunct_comparatives(chain.group(2).strip())
    cut = _RATIONALE_RE.search(text)
    if cut and text[: cut.start()].strip():
        text = text[: cut.start()]
    infinitive = _INFINITIVE_RE.match(text)
    if infinitive:
        text = f"{infinitive.group(1)} {infinitive.group(2).lower()}s"
    possessive = _POSSESSIVE_RE.match(text)
    if possessive and head:
        owner = _antecedent(head)
        if owner:
            text = f"{possessive.group(1)} of {owner}{possessive.group(2)}"
    return normalize_phrase(text)


def _is_negated(prefix: str) -> bool:
    tokens = prefix.lower().split()[-2:]
    return any(t in _NEGATORS or t.endswith("n't") for t in tokens)


def extract_triples(
    sentence: str,
    domain: str,
    source: SourceRef = SourceRef("", -1, -1),
    stats: Optional[ExtractionStats] = None,
    injected: bool = False,
) -> list[Triple]:
    """Extract at most one triple per cue occurrence, left to right.

    Sentences with no cue return an empty list; negated cues are suppressed;
    interrogative heads (question bodies) yield no triple.
    """
    stats = stats if stats is not None else ExtractionStats()
    stats.sentences += 1
    matches = list(_CUE_RE.finditer(sentence))
    if not matches:
        stats.no_cue += 1
        return []

    spans: list[str] = []
    last = 0
    for m in matches:
        spans.append(sentence[last : m.start()])
        last = m.end()
    spans.append(sentence[last:])

    triples: list[Triple] = []
    for i, m in enumerate(matches):
        if _is_negated(spans[i]):
            stats.negated += 1
            continue
        head_raw = spans[i]
        tail_raw = spans[i + 1]
        if i > 0:
            # An interior span serves as the previous cue's tail and this
            # cue's head; keep the part after a clause boundary when present.
            parts = _SPLIT_INTERIOR_RE.split(head_raw)
            head_raw = parts[-1]
        if i + 1 < len(matches):
            parts = _SPLIT_INTERIOR_RE.split(tail_raw)
            tail_raw = parts[0]
        head_probe = head_raw.strip().rstrip(",;").lower()
        if not head_probe or head_probe.split()[-1] in _INTERROGATIVES:
            stats.question_like += 1
            continue
        head = _clean_head(head_raw)
        tail = _clean_tail(tail_raw, head)
        if not head or not tail:
            stats.empty_span += 1
            continue
        triples.append(
            Triple(
                head=head,
                relation=_CUES[m.group(1).lower()],
                tail=tail,
                domain=domain,
                source=source,
                surface=sentence,
                injected=injected,
            )
        )
        stats.triples += 1
    return triples


def extract_corpus(
    records: list[CausalRecord],
    domain: str,
    source_file: str = "causal_statements.jsonl",
    stats: Optional[ExtractionStats] = None,
) -> list[Triple]:
    """Run extraction over question bodies and every statement line.

    Duplicates are preserved (edge multiplicity downstream); output order is
    fixed by (record index, line index).
    """
    stats = stats if stats is not None else ExtractionStats()
    out: list[Triple] = []
    for rec_idx, rec in enumerate(records):
        if rec.question:
            out.extend(
                extract_triples(
                    rec.question,
                    domain,
                    SourceRef(source_file, rec_idx, -1),
                    stats,
                    injected=rec.injected,
                )
            )
        for line_idx, sentence in enumerate(rec.statements):
            out.extend(
                extract_triples(
                    sentence,
                    domain,
                    SourceRef(source_file, rec_idx, line_idx),
                    stats,
                    injected=rec.injected,
                )
            )
    return out


def persist_triples(triples: list[Triple], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for t in triples:
            fh.write(
                json.dumps(
                    {
                        "head": t.head,
                        "relation": t.relation.value,
                        "tail": t.tail,
                        "domain": t.domain,
                        "source": [t.source.file, t.source.record, t.source.line],
                        "surface": t.surface,
                        "injected": t.injected,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def load_triples(path: str | Path) -> list[Triple]:
    path = Path(path)
    out: list[Triple] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                data = json.loads(raw)
                src = data.get("source", ["", -1, -1])
                out.append(
                    Triple(
                        head=data["head"],
                        relation=RelationType(data["relation"]),
                        tail=data["tail"],
                        domain=data["domain"],
                        source=SourceRef(src[0], int(src[1]), int(src[2])),
                        surface=data.get("surface", ""),
                        injected=bool(data.get("injected", False)),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedRecord(str(path), lineno, str(exc)) from exc
    return out
