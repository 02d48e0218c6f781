"""Exception hierarchy and warnings shared across the toolkit."""


class InsightGraphError(Exception):
    """Base class for all toolkit errors."""


class DataError(InsightGraphError):
    """Bad table data: schema violations, unparseable CSV, ragged rows."""


class ExpressionError(InsightGraphError):
    """Expression syntax or type error.

    ``offset`` is the character offset into the source text where the
    problem was detected, or -1 when no position applies (bind errors).
    """

    def __init__(self, message: str, offset: int = -1):
        super().__init__(message if offset < 0 else f"{message} (at offset {offset})")
        self.offset = offset


class PipelineError(InsightGraphError):
    """Transform pipeline cannot be bound or executed."""


class WildcardPresentError(PipelineError):
    """A spec containing wildcards was asked to execute.

    Wildcards mark an objective template, not an executable query.
    """


class ModelError(InsightGraphError):
    """Relationship model misuse: bad shapes, untrained access, degenerate data."""


class GraphError(InsightGraphError):
    """Knowledge-graph constraint violation: duplicates, cycles, dangling names."""


class SpecError(InsightGraphError):
    """Spec file or serialized graph cannot be parsed or resolved."""


class DuplicateEdgeWarning(UserWarning):
    """Re-adding an existing edge; the operation is an idempotent no-op."""
