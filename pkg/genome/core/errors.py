"""Exception hierarchy shared by every stage of the genome pipeline.

Each error carries a short machine-readable ``code`` next to the human
message, the same ``{error, message}`` pair the JSON error body uses.
"""

from typing import Any, List, Optional


class GenomeError(Exception):
    code = "genome_error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def to_dict(self) -> dict:
        return {"error": self.code, "message": self.message}


# ---------------------------------------------------------------------------
# Extraction / corpus
# ---------------------------------------------------------------------------


class TokenizeError(GenomeError):
    """Recoverable lexer failure; the tokenizer records it as a diagnostic."""

    code = "tokenize_error"
    KINDS = {
        "UnterminatedString": "unterminated_string",
        "UnterminatedComment": "unterminated_comment",
    }

    def __init__(self, kind: str, line: int, file_path: Optional[str] = None):
        where = f"{file_path}:{line}" if file_path else f"line {line}"
        super().__init__(f"{kind} at {where}")
        self.code = self.KINDS.get(kind, TokenizeError.code)
        self.kind = kind
        self.line = line
        self.file_path = file_path


class UnbalancedBraces(GenomeError):
    code = "unbalanced_braces"

    def __init__(self, file_path: str, line: int):
        super().__init__(f"unbalanced braces in {file_path} near line {line}")
        self.file_path = file_path
        self.line = line


class UnsupportedProfile(GenomeError):
    code = "unsupported_profile"


class MalformedLine(GenomeError):
    code = "malformed_line"

    def __init__(self, line_no: int, reason: str, file_path: Optional[str] = None):
        where = f"{file_path}:{line_no}" if file_path else f"line {line_no}"
        super().__init__(f"malformed record at {where}: {reason}")
        self.line_no = line_no
        self.file_path = file_path


class MissingField(GenomeError):
    code = "missing_field"

    def __init__(self, name: str, line_no: Optional[int] = None, file_path: Optional[str] = None):
        where = ""
        if line_no is not None:
            where = f" at {file_path}:{line_no}" if file_path else f" at line {line_no}"
        super().__init__(f"missing field {name!r}{where}")
        self.name = name
        self.line_no = line_no
        self.file_path = file_path


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


class DomainError(GenomeError):
    code = "domain_error"


class InsufficientPoints(GenomeError):
    code = "insufficient_points"

    def __init__(self, n_points: int, k: int):
        super().__init__(f"LOF needs more than k={k} points, got {n_points}")
        self.n_points = n_points
        self.k = k


class DegenerateNormalization(GenomeError):
    code = "degenerate_normalization"


# ---------------------------------------------------------------------------
# Gene index
# ---------------------------------------------------------------------------


class IndexVersionMismatch(GenomeError):
    code = "index_version_mismatch"

    def __init__(self, found: Any, expected: Any):
        super().__init__(f"index format_version {found!r} does not match {expected!r}")
        self.found = found
        self.expected = expected


class CorruptIndex(GenomeError):
    code = "corrupt_index"

    def __init__(self, file: str, reason: str):
        super().__init__(f"corrupt index file {file}: {reason}")
        self.file = file
        self.reason = reason


class IndexLocked(GenomeError):
    code = "index_locked"


class NMismatch(GenomeError):
    code = "n_mismatch"

    def __init__(self, config_n: int, index_n: int):
        super().__init__(f"clone config uses N={config_n} but the index was built with N={index_n}")
        self.config_n = config_n
        self.index_n = index_n


class WindowModeMismatch(GenomeError):
    code = "window_mode_mismatch"

    def __init__(self, config_abstract: bool, index_abstract: bool):
        mode = {True: "abstract", False: "raw"}
        super().__init__(
            f"clone config uses {mode[config_abstract]} windows but the index holds {mode[index_abstract]} windows"
        )
        self.config_abstract = config_abstract
        self.index_abstract = index_abstract


# ---------------------------------------------------------------------------
# Dependencies
# ---------------------------------------------------------------------------


class UnknownFormat(GenomeError):
    code = "unknown_format"


class MalformedRange(GenomeError):
    code = "malformed_range"

    def __init__(self, text: str, position: int, reason: str = "invalid version range"):
        super().__init__(f"{reason}: {text!r} at position {position}")
        self.text = text
        self.position = position


class DuplicateDependency(MalformedRange):
    code = "duplicate_dependency"

    def __init__(self, name: str):
        super().__init__(name, 0, reason="duplicate dependency name")
        self.name = name


class UnresolvableDependency(GenomeError):
    code = "unresolvable_dependency"

    def __init__(self, name: str, range_text: str, available: List[str], partial_graph: Any = None):
        shown = ", ".join(available) if available else "none"
        super().__init__(f"no version of {name} satisfies {range_text} (available: {shown})")
        self.name = name
        self.range_text = range_text
        self.available = available
        self.partial_graph = partial_graph


class NodeNotFound(GenomeError):
    code = "node_not_found"


# ---------------------------------------------------------------------------
# Advisories / orchestration
# ---------------------------------------------------------------------------


class DuplicateId(GenomeError):
    code = "duplicate_id"

    def __init__(self, advisory_id: str):
        super().__init__(f"duplicate advisory id {advisory_id!r}")
        self.advisory_id = advisory_id


class InvalidSeverity(GenomeError):
    code = "invalid_severity"

    def __init__(self, advisory_id: str, severity: Any):
        super().__init__(f"advisory {advisory_id!r} has severity {severity!r} outside [0, 10]")
        self.advisory_id = advisory_id
        self.severity = severity


class InvalidConfig(GenomeError):
    code = "invalid_config"


class StageError(GenomeError):
    code = "stage_error"

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
