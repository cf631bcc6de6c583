"""Exception types shared across the engine."""


class SpatialScoreError(Exception):
    """Base class for all engine errors."""


class UnrecognizedTemplate(SpatialScoreError):
    """Prompt matched none of the documented template families."""


class SchemaViolation(SpatialScoreError):
    """A structured document failed validation.

    ``path`` points at the offending field, e.g. ``inclusions[0].count``.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class DanglingRelationId(SchemaViolation):
    """A relation references an entity id absent from the constraint set."""

    def __init__(self, path: str, entity_id: str):
        super().__init__(path, f"relation references unknown entity id {entity_id!r}")
        self.entity_id = entity_id


class BackendUnavailable(SpatialScoreError):
    """The perception backend could not be reached or refused the request."""


class MalformedResponse(SpatialScoreError):
    """A backend reply violated the wire schema; ``path`` locates the field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class UnparseableScore(SpatialScoreError):
    """A chain-of-thought reply lacked a usable score field."""


class MissingDepth(SpatialScoreError):
    """A depth relation was evaluated without depth input."""


class UnsupportedRelation(SpatialScoreError):
    """The geometric path cannot decide this relation; use the CoT path."""


class InfeasiblePlant(SpatialScoreError):
    """Requested constraints cannot be planted inside the unit square."""


class EmptyManifest(SpatialScoreError):
    """A benchmark manifest contained no items."""
