"""Total lexers for Python and Java source text.

Every input lexes: characters that match no rule become single-character
tokens, so a token stream always exists and each token's span slices back
to its text. Whitespace and comments are dropped; string literals are kept
as single tokens.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

PYTHON = "python"
JAVA = "java"

PYTHON_KEYWORDS = frozenset(
    """False None True and as assert async await break class continue def del
    elif else except finally for from global if import in is lambda nonlocal
    not or pass raise return try while with yield""".split()
)

JAVA_KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while true false null""".split()
)

_PY_OPERATORS = [
    "**=", "//=", ">>=", "<<=", "...",
    "**", "//", ">>", "<<", "<=", ">=", "==", "!=", "->", ":=",
    "+=", "-=", "*=", "/=", "%=", "@=", "&=", "|=", "^=",
]
_JAVA_OPERATORS = [
    ">>>=",
    ">>>", "<<=", ">>=", "...",
    "++", "--", "&&", "||", "<=", ">=", "==", "!=",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "->", "::", "<<", ">>",
]
_SINGLE_CHARS = set("+-*/%@&|^~!<>()[]{}=,.:;?$`\\")

_PY_ID = re.compile(r"[^\W\d]\w*", re.UNICODE)
_JAVA_ID = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_PY_NUMBER = re.compile(
    r"0[xX][0-9a-fA-F_]+|0[oO][0-7_]+|0[bB][01_]+"
    r"|(?:\d[\d_]*\.[\d_]*|\.\d[\d_]*|\d[\d_]*)(?:[eE][+-]?\d[\d_]*)?[jJ]?"
)
_JAVA_NUMBER = re.compile(
    r"0[xX][0-9a-fA-F_]+[lL]?|0[bB][01_]+[lL]?"
    r"|(?:\d[\d_]*\.[\d_]*|\.\d[\d_]*|\d[\d_]*)(?:[eE][+-]?\d+)?[fFdDlL]?"
)
_PY_STRING_OPEN = re.compile(r"(?:[rRbBuUfF]{1,3})?('''|\"\"\"|'|\")")
_WS = re.compile(r"[ \t\r\f\v]+")


@dataclass(frozen=True)
class LexToken:
    text: str
    kind: str  # identifier | keyword | number | string | operator | unknown
    line: int  # 1-based line of the token start
    col: int  # 0-based column of the token start
    offset: int  # absolute character offset of the token start

    @property
    def end_offset(self) -> int:
        return self.offset + len(self.text)


def lex(text: str, language: str | None = None) -> list[LexToken]:
    """Lex ``text`` into an ordered token list.

    ``language`` selects the rule set: "python", "java", or None for a
    language-neutral mode (identifiers, numbers, and single-character
    punctuation; no comment or string handling).
    """
    if language == PYTHON:
        return _lex_python(text)
    if language == JAVA:
        return _lex_java(text)
    return _lex_generic(text)


def identifier_tokens(text: str, language: str | None) -> list[str]:
    """Identifier token texts of ``text``, in source order."""
    return [t.text for t in lex(text, language) if t.kind == "identifier"]


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 0
        self.tokens: list[LexToken] = []

    def emit(self, end: int, kind: str) -> None:
        raw = self.text[self.pos : end]
        self.tokens.append(LexToken(raw, kind, self.line, self.col, self.pos))
        self.advance(end)

    def advance(self, end: int) -> None:
        consumed = self.text[self.pos : end]
        newlines = consumed.count("\n")
        if newlines:
            self.line += newlines
            self.col = len(consumed) - consumed.rfind("\n") - 1
        else:
            self.col += len(consumed)
        self.pos = end


def _scan_to(text: str, start: int, closer: str, stop_at_newline: bool) -> int:
    """Index just past ``closer``, honoring backslash escapes; EOF if unterminated."""
    i = start
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\\":
            i += 2
            continue
        if stop_at_newline and c == "\n":
            return i
        if text.startswith(closer, i):
            return i + len(closer)
        i += 1
    return n


def _lex_python(text: str) -> list[LexToken]:
    s = _Scanner(text)
    n = len(text)
    while s.pos < n:
        c = text[s.pos]
        m = _WS.match(text, s.pos)
        if m:
            s.advance(m.end())
            continue
        if c == "\n":
            s.advance(s.pos + 1)
            continue
        if text.startswith("\\\n", s.pos):
            s.advance(s.pos + 2)
            continue
        if c == "#":
            nl = text.find("\n", s.pos)
            s.advance(n if nl < 0 else nl)
            continue
        m = _PY_STRING_OPEN.match(text, s.pos)
        if m:
            quote = m.group(1)
            end = _scan_to(text, m.end(), quote, stop_at_newline=len(quote) == 1)
            s.emit(end, "string")
            continue
        m = _PY_NUMBER.match(text, s.pos)
        if m:
            s.emit(m.end(), "number")
            continue
        m = _PY_ID.match(text, s.pos)
        if m:
            kind = "keyword" if m.group() in PYTHON_KEYWORDS else "identifier"
            s.emit(m.end(), kind)
            continue
        op = _match_operator(text, s.pos, _PY_OPERATORS)
        if op:
            s.emit(s.pos + len(op), "operator")
            continue
        if c in _SINGLE_CHARS:
            s.emit(s.pos + 1, "operator")
            continue
        s.emit(s.pos + 1, "unknown")
    return s.tokens


def _lex_java(text: str) -> list[LexToken]:
    s = _Scanner(text)
    n = len(text)
    while s.pos < n:
        c = text[s.pos]
        m = _WS.match(text, s.pos)
        if m:
            s.advance(m.end())
            continue
        if c == "\n":
            s.advance(s.pos + 1)
            continue
        if text.startswith("//", s.pos):
            nl = text.find("\n", s.pos)
            s.advance(n if nl < 0 else nl)
            continue
        if text.startswith("/*", s.pos):
            close = text.find("*/", s.pos + 2)
            s.advance(n if close < 0 else close + 2)
            continue
        if text.startswith('"""', s.pos):  # text block
            end = _scan_to(text, s.pos + 3, '"""', stop_at_newline=False)
            s.emit(end, "string")
            continue
        if c == '"':
            end = _scan_to(text, s.pos + 1, '"', stop_at_newline=True)
            s.emit(end, "string")
            continue
        if c == "'":
            end = _scan_to(text, s.pos + 1, "'", stop_at_newline=True)
            s.emit(end, "string")
            continue
        m = _JAVA_NUMBER.match(text, s.pos)
        if m:
            s.emit(m.end(), "number")
            continue
        m = _JAVA_ID.match(text, s.pos)
        if m:
            kind = "keyword" if m.group() in JAVA_KEYWORDS else "identifier"
            s.emit(m.end(), kind)
            continue
        op = _match_operator(text, s.pos, _JAVA_OPERATORS)
        if op:
            s.emit(s.pos + len(op), "operator")
            continue
        if c in _SINGLE_CHARS:
            s.emit(s.pos + 1, "operator")
            continue
        s.emit(s.pos + 1, "unknown")
    return s.tokens


def _lex_generic(text: str) -> list[LexToken]:
    s = _Scanner(text)
    n = len(text)
    while s.pos < n:
        m = _WS.match(text, s.pos)
        if m:
            s.advance(m.end())
            continue
        if text[s.pos] == "\n":
            s.advance(s.pos + 1)
            continue
        m = _PY_ID.match(text, s.pos)
        if m:
            s.emit(m.end(), "identifier")
            continue
        m = _PY_NUMBER.match(text, s.pos)
        if m:
            s.emit(m.end(), "number")
            continue
        s.emit(s.pos + 1, "operator")
    return s.tokens


def _match_operator(text: str, pos: int, table: list[str]) -> str | None:
    for op in table:
        if text.startswith(op, pos):
            return op
    return None
