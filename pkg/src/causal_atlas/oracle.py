"""Text-generation oracle: prompt templates plus remote and synthetic backends.

The remote backend speaks a minimal chat-completion wire shape
(model, messages, max_tokens) against a configurable endpoint.  The synthetic
backend is a pure function of (seed, prompt) built on the bundled grammar, so
every pipeline stage can run with no network access.
"""

from __future__ import annotations

import os
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from . import grammar
from .errors import BudgetExceeded, EmptyTopic, TransportError, UnboundPlaceholder

ENDPOINT_ENV_VAR = "CAUSAL_ATLAS_ENDPOINT"
API_KEY_ENV_VAR = "CAUSAL_ATLAS_API_KEY"

_PLACEHOLDER_RE = re.compile(r"\{([A-Za-z_]+)\}")

_DEFAULT_BODIES = {
    grammar.TOPIC_EXPANSION: (
        "You are an expert in {domain}.\n"
        'Given the topic "{TOPIC}", list {N} important subtopics\n'
        "that help explain its causes, consequences, or mechanisms.\n"
        "Return ONLY a numbered list of subtopics, one per line,\n"
        "with no explanations."
    ),
    grammar.CAUSAL_QUESTIONS: (
        "You are an expert in {domain}.\n"
        'Topic: "{TOPIC}".\n'
        "Write {N} causal questions a student might ask about this topic.\n"
        'Each question should start with "What causes" or "What leads to".\n'
        "Return only the questions, one per line."
    ),
    grammar.CAUSAL_STATEMENTS: (
        "You are an expert in {domain}.\n"
        'Topic: "{TOPIC}".\n'
        'Write {N} short statements of the form "X causes Y" or\n'
        '"X leads to Y" that describe causal relationships in this topic.\n'
        "Each statement should focus on a single mechanism.\n"
        "Return only the statements, one per line."
    ),
}


@dataclass(frozen=True)
class PromptTemplate:
    """A prompt body with {domain}, {TOPIC}, and {N} placeholders."""

    kind: str
    domain_phrase: str
    body: str = ""

    def resolved_body(self) -> str:
        return self.body or _DEFAULT_BODIES[self.kind]


def render_prompt(template: PromptTemplate, topic: str, domain_phrase: str = "", n: int = 10) -> str:
    """Render a template, binding the topic, domain phrase, and item count."""
    if not topic or not topic.strip():
        raise EmptyTopic("topic is blank")
    bindings = {
        "domain": domain_phrase or template.domain_phrase,
        "TOPIC": topic,
        "N": str(n),
    }
    body = template.resolved_body()

    def _sub(match: re.Match) -> str:
        name = match.group(1)
        if name not in bindings:
            raise UnboundPlaceholder(f"placeholder {{{name}}} is not bound")
        return bindings[name]

    return _PLACEHOLDER_RE.sub(_sub, body)


@dataclass
class OracleConfig:
    backend: str = "synthetic"  # "remote" | "synthetic"
    endpoint_url: str = ""
    model_name: str = "synthetic-grammar"
    seed: int = 0
    max_tokens: int = 512
    timeout: float = 30.0
    retries: int = 2
    parallelism: int = 1
    # Opaque decoding parameters passed through to the remote endpoint.
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.backend not in ("remote", "synthetic"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.backend == "remote" and not self.resolved_endpoint():
            raise ValueError("remote backend requires an endpoint URL")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")
        if self.retries < 0:
            raise ValueError("retries must be non-negative")

    def resolved_endpoint(self) -> str:
        return self.endpoint_url or os.environ.get(ENDPOINT_ENV_VAR, "")


class Budget:
    """Counts oracle calls.  Decremented exactly once per generate() call,
    regardless of transport retries; never goes negative."""

    def __init__(self, initial: int) -> None:
        if initial < 0:
            raise ValueError("budget must be non-negative")
        self.initial = initial
        self.remaining = initial
        self._lock = threading.Lock()

    @property
    def calls_made(self) -> int:
        return self.initial - self.remaining

    def spend(self) -> None:
        with self._lock:
            if self.remaining <= 0:
                raise BudgetExceeded("oracle call budget is exhausted")
            self.remaining -= 1

    def exhausted(self) -> bool:
        return self.remaining <= 0

    def __repr__(self) -> str:
        return f"Budget(remaining={self.remaining}, initial={self.initial})"


def _infer_request(prompt: str) -> tuple[str, str, int]:
    """Recover (kind, topic, n) from a rendered prompt for the grammar backend."""
    quoted = re.search(r'"([^"]*)"', prompt)
    topic = quoted.group(1) if quoted else prompt.strip()[:60]
    # Topics may themselves contain digits; read the item count outside quotes.
    unquoted = re.sub(r'"[^"]*"', " ", prompt)
    count = re.search(r"\b(\d+)\b", unquoted)
    n = int(count.group(1)) if count else 10
    lowered = prompt.lower()
    if "subtopic" in lowered:
        kind = grammar.TOPIC_EXPANSION
    elif "question" in lowered:
        kind = grammar.CAUSAL_QUESTIONS
    else:
        kind = grammar.CAUSAL_STATEMENTS
    return kind, topic, max(1, n)


def _default_post(url: str, payload: dict, timeout: float) -> str:
    import httpx

    headers = {}
    api_key = os.environ.get(API_KEY_ENV_VAR, "")
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    response = httpx.post(url, json=payload, timeout=timeout, headers=headers)
    response.raise_for_status()
    data = response.json()
    return data["choices"][0]["message"]["content"]


def generate(
    config: OracleConfig,
    prompt: str,
    budget: Optional[Budget] = None,
    post: Optional[Callable[[str, dict, float], str]] = None,
    sleep: Callable[[float], None] = time.sleep,
) -> str:
    """Return a raw completion for the prompt.

    The budget, when supplied, is spent once up front; transport retries do
    not consume additional calls.
    """
    config.validate()
    if budget is not None:
        budget.spend()
    if config.backend == "synthetic":
        kind, topic, n = _infer_request(prompt)
        return "\n".join(grammar.synthetic_grammar(config.seed, kind, topic, n))

    payload = {
        "model": config.model_name,
        "messages": [{"role": "user", "content": prompt}],
        "max_tokens": config.max_tokens,
    }
    payload.update(config.extra)
    poster = post or _default_post
    url = config.resolved_endpoint()
    last_error: Optional[Exception] = None
    for attempt in range(config.retries + 1):
        try:
            return poster(url, payload, config.timeout)
        except Exception as exc:  # transport or protocol failure
            last_error = exc
            if attempt < config.retries:
                sleep(min(0.25 * 2**attempt, 4.0))
    raise TransportError(f"remote oracle failed after {config.retries + 1} attempts: {last_error}")


def map_generate(
    config: OracleConfig,
    prompts: Sequence[str],
    budget: Optional[Budget] = None,
    post: Optional[Callable[[str, dict, float], str]] = None,
) -> list[str]:
    """Generate completions for many prompts, preserving input order.

    Requests run concurrently up to config.parallelism; each is independent
    and the synthetic backend is pure, so ordering of completion does not
    affect results.
    """
    if config.parallelism <= 1 or len(prompts) <= 1:
        return [generate(config, p, budget=budget, post=post) for p in prompts]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
        futures = [pool.submit(generate, config, p, budget, post) for p in prompts]
        return [f.result() for f in futures]


def default_template(kind: str, domain_phrase: str) -> PromptTemplate:
    return PromptTemplate(kind=kind, domain_phrase=domain_phrase)
