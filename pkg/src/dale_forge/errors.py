"""Exception hierarchy shared by all dale-forge modules."""


class DaleForgeError(Exception):
    """Base class for all errors raised by this package."""


class IoError(DaleForgeError):
    """A file could not be read or written."""


class ParseError(DaleForgeError):
    """A record or config file could not be parsed.

    Carries ``line`` (1-based) when the failure is tied to a specific line.
    """

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class DuplicateId(DaleForgeError):
    """Two documents in one corpus share an id."""


class InvalidConfig(DaleForgeError):
    """A configuration value violates its documented constraint.

    ``key`` names the offending field.
    """

    def __init__(self, key: str, message: str = ""):
        super().__init__(f"{key}: {message}" if message else key)
        self.key = key


class MissingStat(DaleForgeError):
    """A segment probability needed for PMI scoring is absent."""


class DegenerateProbability(DaleForgeError):
    """A probability used in PMI scoring is zero or negative."""


class EmptyDistribution(DaleForgeError):
    """Percentile cutoff requested over an empty frequency distribution."""


class EmptyText(DaleForgeError):
    """Embedding requested for text that is empty after trimming."""


class KeyNotFound(DaleForgeError):
    """File-backed embedding lookup missed."""


class TransportError(DaleForgeError):
    """A remote request failed at the network level."""


class ProtocolError(DaleForgeError):
    """A remote endpoint answered with a malformed or error response."""


class DimMismatch(DaleForgeError):
    """Two vectors with different dimensions were combined."""


class ZeroVector(DaleForgeError):
    """Cosine similarity requested against an all-zero vector."""


class OutOfBounds(DaleForgeError):
    """A token span lies outside its document."""


class MissingLabel(DaleForgeError):
    """An operation that needs label text got a record without one."""


class UnknownTask(DaleForgeError):
    """Label text requested for a task this toolkit does not know."""


class BackendError(DaleForgeError):
    """The generation backend failed (transport or protocol)."""


class MalformedOutput(DaleForgeError):
    """A generation backend returned an empty output for a non-empty window."""


class UnknownSource(DaleForgeError):
    """An augmentation set references a document id absent from the gold corpus."""


class NonConvergenceWarning(UserWarning):
    """PageRank hit max_iter before the tolerance; last iterate was returned."""
