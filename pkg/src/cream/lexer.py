"""Maximal-munch tokenizer for a small C-like language.

Spans are byte offsets into the UTF-8 encoding of the source.  Whitespace
and comments are skipped but recoverable from the gaps between spans, so
``render(tokenize(s)) == s`` for every source that lexes.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field

KEYWORDS = frozenset(
    {"int", "float", "return", "if", "else", "while", "for", "void", "char", "break", "continue"}
)
OPERATORS = ("==", "!=", "<=", ">=", "&&", "||", "=", "<", ">", "+", "-", "*", "/", "%", "!")
PUNCTUATION = ("(", ")", "{", "}", "[", "]", ";", ",")

ID_PLACEHOLDER = "<ID>"
_ABSTRACT_RE = re.compile(r"VAR_[0-9]+\Z")


class LexError(ValueError):
    def __init__(self, offset: int, message: str = "unexpected character"):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class Kind(enum.Enum):
    KEYWORD = "Keyword"
    IDENTIFIER = "Identifier"
    INT_LITERAL = "IntLiteral"
    STR_LITERAL = "StrLiteral"
    OPERATOR = "Operator"
    PUNCT = "Punct"


@dataclass(frozen=True)
class Token:
    text: str
    kind: Kind
    span: tuple[int, int]


@dataclass(frozen=True)
class TokenList:
    tokens: tuple[Token, ...]
    source: bytes = field(repr=False)

    @property
    def source_len(self) -> int:
        return len(self.source)

    def __len__(self):
        return len(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]

    def __iter__(self):
        return iter(self.tokens)

    @property
    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]

    def gaps(self) -> list[bytes]:
        """The skipped bytes before each token, plus the trailing gap."""
        out, pos = [], 0
        for tok in self.tokens:
            out.append(self.source[pos : tok.span[0]])
            pos = tok.span[1]
        out.append(self.source[pos:])
        return out


# order inside the alternation matters only for skip vs token; operators are
# listed longest first so the regex engine takes the maximal munch
_SKIP = re.compile(rb"\s+|//[^\n]*|/\*.*?\*/", re.S)
_TOKEN = re.compile(
    rb"(?P<word>[A-Za-z_][A-Za-z0-9_]*)"
    rb'|(?P<str>"(?:[^"\\\n]|\\.)*")'
    rb"|(?P<int>[0-9]+)"
    rb"|(?P<op>" + b"|".join(re.escape(o.encode()) for o in OPERATORS) + rb")"
    rb"|(?P<punct>[()\[\]{};,])"
)


def tokenize(source: str) -> TokenList:
    data = source.encode("utf-8")
    tokens = []
    pos, n = 0, len(data)
    while pos < n:
        m = _SKIP.match(data, pos)
        if m and m.end() > pos:
            pos = m.end()
            continue
        if data.startswith(b"/*", pos):
            raise LexError(pos, "unterminated block comment")
        m = _TOKEN.match(data, pos)
        if m is None:
            if data[pos : pos + 1] == b'"':
                raise LexError(pos, "unterminated string literal")
            raise LexError(pos)
        text = m.group().decode("utf-8")
        group = m.lastgroup
        if group == "word":
            kind = Kind.KEYWORD if text in KEYWORDS else Kind.IDENTIFIER
        elif group == "str":
            kind = Kind.STR_LITERAL
        elif group == "int":
            kind = Kind.INT_LITERAL
        elif group == "op":
            kind = Kind.OPERATOR
        else:
            kind = Kind.PUNCT
        tokens.append(Token(text, kind, (pos, m.end())))
        pos = m.end()
    return TokenList(tuple(tokens), data)


def is_reserved(text: str) -> bool:
    """Placeholders produced by the artifact itself are never user identifiers."""
    return text == ID_PLACEHOLDER or _ABSTRACT_RE.match(text) is not None


def classify_identifiers(toks: TokenList) -> frozenset[int]:
    """Indices of user identifiers: Identifier tokens that are not call heads."""
    out = set()
    items = toks.tokens
    for i, tok in enumerate(items):
        if tok.kind is not Kind.IDENTIFIER or is_reserved(tok.text):
            continue
        if i + 1 < len(items) and items[i + 1].text == "(":
            continue
        out.add(i)
    return frozenset(out)


def render(toks: TokenList, texts=None) -> str:
    """Rebuild source text, optionally substituting per-token ``texts``."""
    if texts is None:
        texts = toks.texts
    gaps = toks.gaps()
    parts = []
    for gap, text in zip(gaps, texts):
        parts.append(gap)
        parts.append(text.encode("utf-8"))
    parts.append(gaps[-1])
    return b"".join(parts).decode("utf-8")


def replace_texts(toks: TokenList, replacements: dict[int, str]) -> TokenList:
    """Return a new TokenList with token texts swapped at the given indices.

    Gaps are preserved; spans are recomputed.  Kinds are kept, so callers
    must only substitute like for like.
    """
    texts = toks.texts
    for i, text in replacements.items():
        texts[i] = text
    gaps = toks.gaps()
    parts, new_tokens, pos = [], [], 0
    for gap, tok, text in zip(gaps, toks.tokens, texts):
        parts.append(gap)
        pos += len(gap)
        raw = text.encode("utf-8")
        parts.append(raw)
        new_tokens.append(Token(text, tok.kind, (pos, pos + len(raw))))
        pos += len(raw)
    parts.append(gaps[-1])
    return TokenList(tuple(new_tokens), b"".join(parts))
