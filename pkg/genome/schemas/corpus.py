from __future__ import annotations

import enum
from collections import defaultdict
from typing import Dict, FrozenSet, Iterator, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from genome.schemas.common import Diagnostic

SHORT_CIRCUIT_BRANCHES = frozenset({"&&", "||", "?"})


class TokenKind(str, enum.Enum):
    KEYWORD = "Keyword"
    IDENTIFIER = "Identifier"
    OPERATOR = "Operator"
    NUMBER = "NumberLiteral"
    STRING = "StringLiteral"
    PUNCTUATION = "Punctuation"
    COMMENT = "Comment"


class FunctionDetection(str, enum.Enum):
    BRACE_HEURISTIC = "BraceHeuristic"
    PRE_EXTRACTED = "PreExtracted"


class Token(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: TokenKind
    lexeme: str = Field(min_length=1)
    line: int = Field(ge=1)

    def to_row(self) -> list:
        return [self.kind.value, self.lexeme, self.line]


# Tokenizer output: tokens plus recovery diagnostics (unterminated strings/comments)
class LexResult(BaseModel):
    tokens: List[Token] = []
    diagnostics: List[Diagnostic] = []


class LanguageProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    keywords: FrozenSet[str] = frozenset()
    branch_keywords: FrozenSet[str] = frozenset()
    string_delimiters: FrozenSet[str] = frozenset()
    line_comment: Optional[str] = None
    block_comment: Optional[Tuple[str, str]] = None
    directive_marker: Optional[str] = None
    extensions: FrozenSet[str] = frozenset()
    function_detection: FunctionDetection = FunctionDetection.BRACE_HEURISTIC

    @model_validator(mode="after")
    def check_branch_keywords(self) -> "LanguageProfile":
        stray = self.branch_keywords - self.keywords - SHORT_CIRCUIT_BRANCHES
        if stray:
            raise ValueError(f"branch keywords not in profile keywords: {sorted(stray)}")
        return self


class FunctionRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    function_id: str = Field(pattern=r"^[0-9a-f]{16}$")
    repo_id: str
    file_path: str
    name: str
    start_line: int = Field(ge=1)
    end_line: int = Field(ge=1)
    tokens: List[Token] = Field(min_length=1)
    # 1-based; end_column is exclusive and None means "to the end of end_line"
    start_column: int = Field(default=1, ge=1)
    end_column: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def check_span(self) -> "FunctionRecord":
        if self.end_line < self.start_line:
            raise ValueError("end_line must not precede start_line")
        if self.end_line == self.start_line and self.end_column is not None and self.end_column <= self.start_column:
            raise ValueError("end_column must follow start_column on a single-line span")
        return self

    @property
    def line_count(self) -> int:
        return self.end_line - self.start_line + 1

    @property
    def start_pos(self) -> Tuple[int, int]:
        return self.start_line, self.start_column

    @property
    def end_pos(self) -> Tuple[int, float]:
        return self.end_line, float("inf") if self.end_column is None else self.end_column

    def overlaps(self, other: "FunctionRecord") -> bool:
        """Same file and intersecting (line, column) spans."""
        return (
            self.repo_id == other.repo_id
            and self.file_path == other.file_path
            and self.start_pos < other.end_pos
            and other.start_pos < self.end_pos
        )

    def source_slice(self, source: str) -> str:
        """The record's own text cut out of the file it was extracted from."""
        lines = source.split("\n")[self.start_line - 1:self.end_line]
        if not lines:
            return ""
        if self.end_column is not None:
            lines[-1] = lines[-1][:self.end_column - 1]
        lines[0] = lines[0][self.start_column - 1:]
        return "\n".join(lines)

    def code_tokens(self) -> List[Token]:
        """Tokens that take part in metrics and fingerprints (comments dropped)."""
        return [t for t in self.tokens if t.kind is not TokenKind.COMMENT]


class NestingTree(BaseModel):
    start: int
    end: int
    children: List["NestingTree"] = []
    subtree_hash: str
    node_count: int = Field(ge=1)

    def iter_nodes(self, depth: int = 0) -> Iterator[Tuple["NestingTree", int]]:
        """Pre-order walk yielding (node, depth)."""
        stack = [(self, depth)]
        while stack:
            node, d = stack.pop()
            yield node, d
            for child in reversed(node.children):
                stack.append((child, d + 1))


class Corpus(BaseModel):
    functions: List[FunctionRecord] = []

    def __len__(self) -> int:
        return len(self.functions)

    def by_id(self) -> Dict[str, FunctionRecord]:
        return {f.function_id: f for f in self.functions}

    def by_repo(self) -> Dict[str, List[FunctionRecord]]:
        groups: Dict[str, List[FunctionRecord]] = defaultdict(list)
        for record in self.functions:
            groups[record.repo_id].append(record)
        return dict(sorted(groups.items()))

    def repo_ids(self) -> List[str]:
        return sorted({f.repo_id for f in self.functions})


NestingTree.model_rebuild()
