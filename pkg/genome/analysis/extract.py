"""Source files → tokens → FunctionRecords → nesting trees.

Everything here is pure: the same source and profile give bit-identical
records on every platform, so files can be processed in any order or in
parallel workers.
"""

import logging
import re
from typing import Dict, List, Optional, Sequence, Tuple

from genome.core.errors import TokenizeError, UnbalancedBraces, UnsupportedProfile
from genome.schemas.common import Diagnostic
from genome.schemas.corpus import (
    FunctionDetection,
    FunctionRecord,
    LanguageProfile,
    LexResult,
    NestingTree,
    Token,
    TokenKind,
)
from genome.utils.hashing import function_id_for, hash_hex

logger = logging.getLogger(__name__)

# Longest first so startswith() gives maximal munch
OPERATORS: Tuple[str, ...] = tuple(sorted(
    {
        ">>>=", "<<=", ">>=", ">>>", "...", "->", "=>", "::", "++", "--",
        "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=",
        "/=", "%=", "&=", "|=", "^=", "+", "-", "*", "/", "%", "<", ">",
        "=", "!", "&", "|", "^", "~", "?", ":",
    },
    key=lambda op: (-len(op), op),
))
OPENERS = {"(": ")", "[": "]", "{": "}"}
CLOSERS = {v: k for k, v in OPENERS.items()}

_WHITESPACE = re.compile(r"[ \t\r\f\v]+")
_IDENTIFIER = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_NUMBER = re.compile(
    r"0[xX][0-9a-fA-F_]+[uUlL]*"
    r"|\d[\d_]*(?:\.\d[\d_]*)?(?:[eE][+-]?\d+)?[uUlLfFdD]*"
    r"|\.\d[\d_]*(?:[eE][+-]?\d+)?[fFdD]?"
)

# Tokens allowed between a parameter list and the body brace:
# const, throws X, noexcept, override, -> T, C++ member initializers
_SIGNATURE_TAIL = frozenset({",", ".", "::", ":", "->", "<", ">", "*", "&"})
_NOT_A_DEFINITION = frozenset({"new", ".", "->"})


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------


def _next_line(source: str, pos: int) -> int:
    nl = source.find("\n", pos)
    return len(source) if nl < 0 else nl


def tokenize(source: str, profile: LanguageProfile, file_path: Optional[str] = None) -> LexResult:
    """
    Split source into tokens with a single forward scan.

    Unterminated strings and block comments do not abort the scan: a
    diagnostic is recorded and scanning resumes at the next line.
    """
    tokens, _, diagnostics = _lex(source, profile, file_path)
    return LexResult(tokens=tokens, diagnostics=diagnostics)


def _lex(
    source: str,
    profile: LanguageProfile,
    file_path: Optional[str] = None,
) -> Tuple[List[Token], List[Tuple[int, int]], List[Diagnostic]]:
    """Tokens with their [start, end) source offsets, plus recovery diagnostics."""
    tokens: List[Token] = []
    offsets: List[Tuple[int, int]] = []
    diagnostics: List[Diagnostic] = []
    keywords = profile.keywords
    delimiters = profile.string_delimiters
    line_comment = profile.line_comment
    block_open, block_close = profile.block_comment or (None, None)

    def emit(kind: TokenKind, start: int, end: int) -> None:
        tokens.append(Token(kind=kind, lexeme=source[start:end], line=line))
        offsets.append((start, end))

    def recover(kind: str) -> int:
        err = TokenizeError(kind, line, file_path)
        logger.warning("%s, resuming at next line", err.message)
        diagnostics.append(Diagnostic(code=err.code, message=err.message, file_path=file_path, line=line))
        return _next_line(source, pos)

    pos = 0
    line = 1
    n = len(source)
    while pos < n:
        ch = source[pos]
        if ch == "\n":
            line += 1
            pos += 1
            continue

        ws = _WHITESPACE.match(source, pos)
        if ws:
            pos = ws.end()
            continue

        if block_open and source.startswith(block_open, pos):
            end = source.find(block_close, pos + len(block_open))
            if end < 0:
                pos = recover("UnterminatedComment")
                continue
            end += len(block_close)
            emit(TokenKind.COMMENT, pos, end)
            line += source.count("\n", pos, end)
            pos = end
            continue

        if line_comment and source.startswith(line_comment, pos):
            end = _next_line(source, pos)
            # trailing whitespace stays out of the lexeme
            stop = end
            while stop > pos and source[stop - 1] in " \t\r\f\v":
                stop -= 1
            emit(TokenKind.COMMENT, pos, stop)
            pos = end
            continue

        if ch in delimiters:
            end = _scan_string(source, pos, ch)
            if end < 0:
                pos = recover("UnterminatedString")
                continue
            emit(TokenKind.STRING, pos, end)
            line += source.count("\n", pos, end)
            pos = end
            continue

        ident = _IDENTIFIER.match(source, pos)
        if ident:
            kind = TokenKind.KEYWORD if ident.group() in keywords else TokenKind.IDENTIFIER
            emit(kind, pos, ident.end())
            pos = ident.end()
            continue

        number = _NUMBER.match(source, pos)
        if number:
            emit(TokenKind.NUMBER, pos, number.end())
            pos = number.end()
            continue

        op = next((o for o in OPERATORS if source.startswith(o, pos)), None)
        if op is not None:
            emit(TokenKind.OPERATOR, pos, pos + len(op))
            pos += len(op)
            continue

        # Brackets, separators and any symbol the profile does not know
        emit(TokenKind.PUNCTUATION, pos, pos + 1)
        pos += 1

    return tokens, offsets, diagnostics


def _scan_string(source: str, pos: int, delimiter: str) -> int:
    """Index just past the closing delimiter, or -1 if the line ends first."""
    i = pos + 1
    n = len(source)
    while i < n:
        c = source[i]
        if c == "\\":
            # escaped char, including an escaped newline continuation
            i += 2
            continue
        if c == "\n":
            return -1
        if c == delimiter:
            return i + 1
        i += 1
    return -1


def normalize_token(token: Token) -> str:
    """Identifier/literal abstraction shared by fingerprints, trees and token similarity."""
    if token.kind is TokenKind.IDENTIFIER:
        return "ID"
    if token.kind is TokenKind.NUMBER:
        return "NUM"
    if token.kind is TokenKind.STRING:
        return "STR"
    return token.lexeme


def normalized_stream(tokens: Sequence[Token]) -> List[str]:
    return [normalize_token(t) for t in tokens if t.kind is not TokenKind.COMMENT]


# ---------------------------------------------------------------------------
# Function extraction
# ---------------------------------------------------------------------------


def _match_brackets(code: Sequence[Token], file_path: str) -> Dict[int, int]:
    """Map every opening bracket index to its closing index; raise on imbalance."""
    match: Dict[int, int] = {}
    stack: List[int] = []
    for i, tok in enumerate(code):
        if tok.kind is not TokenKind.PUNCTUATION:
            continue
        if tok.lexeme in OPENERS:
            stack.append(i)
        elif tok.lexeme in CLOSERS:
            if not stack or code[stack[-1]].lexeme != CLOSERS[tok.lexeme]:
                raise UnbalancedBraces(file_path, tok.line)
            match[stack.pop()] = i
    if stack:
        raise UnbalancedBraces(file_path, code[stack[-1]].line)
    return match


def _directive_flags(code: Sequence[Token], marker: Optional[str]) -> List[bool]:
    """True for every token on a line that starts with the directive marker."""
    flags = [False] * len(code)
    if not marker:
        return flags
    directive_line = None
    prev_line = None
    for i, tok in enumerate(code):
        if tok.line != prev_line:
            directive_line = tok.line if tok.lexeme == marker else None
            prev_line = tok.line
        flags[i] = directive_line is not None
    return flags


def extract_functions(
    source: str,
    profile: LanguageProfile,
    repo_id: str,
    file_path: str,
    diagnostics: Optional[List[Diagnostic]] = None,
) -> List[FunctionRecord]:
    """
    Find top-level and class-level functions with the brace heuristic.

    A function is an identifier followed by a parenthesized parameter list,
    an optional signature tail, and a brace-balanced body. Bodies are never
    searched, so local functions stay inside their enclosing record.
    Records carry column-precise spans, so several may share a line.
    Tokenizer diagnostics are appended to ``diagnostics`` when given.
    Raises UnbalancedBraces when the file's brackets do not nest.
    """
    if profile.function_detection is not FunctionDetection.BRACE_HEURISTIC:
        raise UnsupportedProfile(
            f"profile {profile.name!r} carries pre-extracted functions; load them as corpus JSONL"
        )

    all_tokens, offsets, lex_diagnostics = _lex(source, profile, file_path)
    if diagnostics is not None:
        diagnostics.extend(lex_diagnostics)
    positions = [i for i, t in enumerate(all_tokens) if t.kind is not TokenKind.COMMENT]
    code = [all_tokens[i] for i in positions]
    if not code:
        return []

    match = _match_brackets(code, file_path)
    directive = _directive_flags(code, profile.directive_marker)
    spans: List[Tuple[int, int, int]] = []  # (sig_start, name_index, body_close)

    def scan(lo: int, hi: int) -> None:
        boundary = lo
        j = lo
        while j < hi:
            tok = code[j]
            if directive[j]:
                j += 1
                boundary = j
                continue
            lexeme = tok.lexeme
            if tok.kind is TokenKind.PUNCTUATION and lexeme == ";":
                j += 1
                boundary = j
                continue
            if tok.kind is TokenKind.PUNCTUATION and lexeme == "{":
                # class / namespace / extern / struct body: functions inside are class-level
                close = match[j]
                scan(j + 1, close)
                j = close + 1
                boundary = j
                continue
            if (
                tok.kind is TokenKind.IDENTIFIER
                and j + 1 < hi
                and code[j + 1].lexeme == "("
                and not (j > boundary and code[j - 1].lexeme in _NOT_A_DEFINITION)
            ):
                close_paren = match[j + 1]
                k, name_index = _skip_signature_tail(close_paren + 1, hi, j)
                if k < hi and code[k].lexeme == "{":
                    body_close = match[k]
                    spans.append((boundary, name_index, body_close))
                    j = body_close + 1
                    boundary = j
                    continue
                j = close_paren + 1
                continue
            if tok.kind is TokenKind.PUNCTUATION and lexeme in ("(", "["):
                j = match[j] + 1
                continue
            j += 1

    def _skip_signature_tail(k: int, hi: int, name_index: int) -> Tuple[int, int]:
        # `@Ann("x") void f() {`: the last call-shaped identifier before any
        # initializer-list colon names the function
        seen_colon = False
        while k < hi:
            tok = code[k]
            if tok.lexeme == ":":
                seen_colon = True
            if tok.lexeme == "(":
                k = match[k] + 1
            elif tok.kind in (TokenKind.KEYWORD, TokenKind.IDENTIFIER) or tok.lexeme in _SIGNATURE_TAIL:
                if (
                    tok.kind is TokenKind.IDENTIFIER
                    and not seen_colon
                    and k + 1 < hi
                    and code[k + 1].lexeme == "("
                ):
                    name_index = k
                k += 1
            else:
                break
        return k, name_index

    scan(0, len(code))

    records: List[FunctionRecord] = []
    for sig_start, name_index, body_close in spans:
        first = positions[sig_start]
        last = positions[body_close]
        begin, end = offsets[first][0], offsets[last][1]
        start_column = begin - _line_start(source, begin) + 1
        end_column = end - _line_start(source, end - 1) + 1
        start_line = code[sig_start].line
        records.append(FunctionRecord(
            function_id=function_id_for(repo_id, file_path, start_line, source[begin:end], start_column),
            repo_id=repo_id,
            file_path=file_path,
            name=code[name_index].lexeme,
            start_line=start_line,
            end_line=code[body_close].line,
            tokens=all_tokens[first:last + 1],
            start_column=start_column,
            end_column=end_column,
        ))
    records.sort(key=lambda r: (r.start_pos, r.end_line))
    return records


def _line_start(source: str, pos: int) -> int:
    return source.rfind("\n", 0, pos) + 1


# ---------------------------------------------------------------------------
# Nesting trees
# ---------------------------------------------------------------------------


class _NodeBuilder:
    __slots__ = ("start", "parts", "children")

    def __init__(self, start: int):
        self.start = start
        self.parts: List[str] = []
        self.children: List[NestingTree] = []

    def finish(self, end: int) -> NestingTree:
        subtree_hash = hash_hex("{" + " ".join(self.parts) + "}")
        return NestingTree(
            start=self.start,
            end=end,
            children=self.children,
            subtree_hash=subtree_hash,
            node_count=1 + sum(c.node_count for c in self.children),
        )


def body_span(code: Sequence[Token]) -> Tuple[int, int]:
    """(open, close) indexes of the trailing brace-delimited body, else the whole range."""
    last = len(code) - 1
    if last >= 0 and code[last].lexeme == "}":
        depth = 0
        for i in range(last, -1, -1):
            tok = code[i]
            if tok.kind is not TokenKind.PUNCTUATION:
                continue
            if tok.lexeme == "}":
                depth += 1
            elif tok.lexeme == "{":
                depth -= 1
                if depth == 0:
                    return i, last
    return 0, max(last, 0)


def build_nesting_tree(record: FunctionRecord) -> NestingTree:
    """
    Brace-nesting tree of the function body.

    Spans index the record's comment-free token list. The root is the body's
    own brace pair (or the whole record when it has no body braces); every
    nested brace pair becomes a child. Hashes cover the normalized tokens of
    each node with child hashes spliced in, so identifier renaming leaves
    them unchanged.
    """
    code = record.code_tokens()
    if not code:
        return _NodeBuilder(0).finish(0)
    root_start, root_end = body_span(code)

    root = _NodeBuilder(root_start)
    stack = [root]
    inner_lo = root_start + 1 if code[root_start].lexeme == "{" else root_start
    inner_hi = root_end if code[root_end].lexeme == "}" and root_start != root_end else root_end + 1
    for i in range(inner_lo, inner_hi):
        tok = code[i]
        if tok.kind is TokenKind.PUNCTUATION and tok.lexeme == "{":
            stack.append(_NodeBuilder(i))
        elif tok.kind is TokenKind.PUNCTUATION and tok.lexeme == "}" and len(stack) > 1:
            node = stack.pop().finish(i)
            stack[-1].children.append(node)
            stack[-1].parts.append(f"<{node.subtree_hash}>")
        else:
            stack[-1].parts.append(normalize_token(tok))

    # unmatched openers (only possible for pre-extracted input) fold back into their parent
    while len(stack) > 1:
        node = stack.pop().finish(root_end)
        stack[-1].children.append(node)
        stack[-1].parts.append(f"<{node.subtree_hash}>")
    return root.finish(root_end)


# ---------------------------------------------------------------------------
# Fingerprints
# ---------------------------------------------------------------------------


def fingerprint(record: FunctionRecord) -> str:
    """FNV-1a of the normalized token stream: renaming-proof, operator-sensitive."""
    return hash_hex(" ".join(normalized_stream(record.tokens)))
