"""Shared exception types for the causal-atlas pipeline."""


class CausalAtlasError(Exception):
    """Base class for all package errors."""


class EmptyTopic(CausalAtlasError):
    """A prompt was requested for a blank topic."""


class UnboundPlaceholder(CausalAtlasError):
    """A template body references a placeholder that was not provided."""


class TransportError(CausalAtlasError):
    """A remote oracle call failed after exhausting retries."""


class BudgetExceeded(CausalAtlasError):
    """An oracle call was attempted with a spent call budget."""


class MalformedRecord(CausalAtlasError):
    """A persisted line-delimited record could not be parsed."""

    def __init__(self, path: str, line: int, reason: str = "") -> None:
        self.path = path
        self.line = line
        self.reason = reason
        msg = f"{path}:{line}: malformed record"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)


class DimensionMismatch(CausalAtlasError):
    """Embedding matrix shape does not match the graph."""


class EncoderFailure(CausalAtlasError):
    """The text encoder failed for a specific node."""

    def __init__(self, node_id: int, phrase: str, reason: str) -> None:
        self.node_id = node_id
        self.phrase = phrase
        super().__init__(f"encoder failed for node {node_id} ({phrase!r}): {reason}")


class TooFewNodes(CausalAtlasError):
    """Projection requires more nodes than n_neighbors."""


class Disconnected(CausalAtlasError):
    """Spectral analysis requires a connected component."""


class EmptyIntersection(CausalAtlasError):
    """Two runs share no nodes, so stability metrics are undefined."""


class DegenerateLabels(CausalAtlasError):
    """A benchmark split contains a single class."""


class IncompleteSlice(CausalAtlasError):
    """A slice directory has artifacts but no manifest (interrupted write)."""


class HashMismatch(CausalAtlasError):
    """A slice artifact does not match the hash recorded in the manifest."""

    def __init__(self, artifact: str) -> None:
        self.artifact = artifact
        super().__init__(f"artifact {artifact} does not match its manifest hash")


class UnknownFormatVersion(CausalAtlasError):
    """The slice manifest declares a format this build cannot read."""
