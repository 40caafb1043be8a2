"""Domain error hierarchy; every error carries a stable machine-readable code."""

from __future__ import annotations


class TkdError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def __init__(self, message: str, **context: object):
        super().__init__(message)
        self.message = message
        self.context = context


class InvalidTemplateError(TkdError):
    code = "invalid-template"

    def __init__(self, message: str, diagnostics=None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])


class PathOutOfRangeError(TkdError):
    code = "path-out-of-range"


class PathNotLeafError(TkdError):
    code = "path-not-leaf"


class HeaderReadonlyError(TkdError):
    code = "header-readonly"


class HeaderRecordError(TkdError):
    code = "header-record"


class NotArbitrarySplitError(TkdError):
    code = "not-arbitrary-split"


class NoArbitrarySplitOnPathError(TkdError):
    code = "no-arbitrary-split-on-path"


class UnknownUnitError(TkdError):
    code = "unknown-unit"


class UnitDimensionError(TkdError):
    code = "unit-dimension-mismatch"


class OutsideTableError(TkdError):
    code = "outside-table"


class ChunkTooSmallError(TkdError):
    code = "chunk-too-small"


class RecordTallerThanChunkError(TkdError):
    code = "record-taller-than-chunk"


class RangeOutOfBoundsError(TkdError):
    code = "range-out-of-bounds"


class UnknownGraphError(TkdError):
    code = "unknown-graph"


class UnknownObjectClassError(TkdError):
    code = "unknown-object-class"


class UnresolvedPlaceholderError(TkdError):
    code = "unresolved-placeholder"


class DuplicatePropertyError(TkdError):
    code = "duplicate-property"


class UnknownElementTypeError(TkdError):
    code = "unknown-element-type"


class NoDataSplitError(TkdError):
    code = "no-data-split"


class VersionMismatchError(TkdError):
    code = "version-mismatch"


class ParseError(TkdError):
    """Syntax error with a 1-based position inside the offending token."""

    code = "syntax-error"

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.bare_message = message


class StaleRevisionError(TkdError):
    code = "stale-revision"


class UnknownDocumentError(TkdError):
    code = "unknown-document"
