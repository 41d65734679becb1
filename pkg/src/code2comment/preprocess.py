"""Lexing, token classification and identifier ordering for Java snippets."""

from __future__ import annotations

import enum
import logging
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

logger = logging.getLogger(__name__)

CONTROL_WORDS = ("for", "if")

OPERATORS = sorted(
    """>>>= <<= >>= >>> ... -> :: ++ -- && || == != <= >= += -= *= /= %= &= |= ^=
    << >> { } ( ) [ ] ; , . @ = > < ! ~ ? : + - * / & | ^ %""".split(),
    key=len, reverse=True,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*|/\*.*?(?:\*/|\Z))
  | (?P<number>0[xX][0-9a-fA-F_]+[lL]?
              |(?:\d[\d_]*\.?[\d_]*|\.\d[\d_]*)(?:[eE][+-]?\d+)?[fFdDlL]?)
  | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<quote>["'])
  | (?P<op>"""
    + "|".join(re.escape(op) for op in OPERATORS)
    + r""")
  | (?P<other>.)
    """,
    re.VERBOSE | re.DOTALL,
)
_ORDERED_RE = re.compile(r"^(END)?(FOR|IF)([1-9][0-9]*)$")


class TokenKind(enum.Enum):
    SYMBOL = "Symbol"
    KEYWORD = "Keyword"
    CONTROL = "ControlIdentifier"
    VARIABLE = "Variable"
    LITERAL = "Literal"


@dataclass(frozen=True)
class Token:
    text: str
    kind: TokenKind


@dataclass(frozen=True)
class SymbolDictionary:
    symbols: frozenset[str]
    keywords: frozenset[str]
    version: str = "0"

    def __post_init__(self):
        overlap = self.symbols & self.keywords
        if overlap:
            raise ValueError(f"entries listed as both symbol and keyword: {sorted(overlap)}")

    @classmethod
    def parse(cls, text: str) -> "SymbolDictionary":
        sections: dict[str, set[str]] = {"symbols": set(), "keywords": set()}
        version = "0"
        current = None
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]") and line[1:-1] in sections:
                current = line[1:-1]
            elif current is None and line.startswith("version"):
                version = line.partition("=")[2].strip()
            elif current is None:
                raise ValueError(f"dictionary entry outside a section: {line!r}")
            else:
                sections[current].add(line)
        return cls(frozenset(sections["symbols"]), frozenset(sections["keywords"]), version)


@lru_cache(maxsize=None)
def default_dictionary() -> SymbolDictionary:
    text = resources.files("code2comment").joinpath("resources/symbols.txt").read_text()
    return SymbolDictionary.parse(text)


def lex(code: str) -> list[str]:
    """Split Java source into token texts, dropping whitespace and comments.

    Operators use longest match; string and char literals stay whole.  An
    unterminated literal is closed at the end of its line.
    """
    out: list[str] = []
    pos, n = 0, len(code)
    while pos < n:
        m = _TOKEN_RE.match(code, pos)
        kind = m.lastgroup
        if kind == "quote":
            end = _literal_end(code, pos)
            out.append(code[pos:end].rstrip("\r\n"))
            pos = end
            continue
        if kind not in ("ws", "comment"):
            out.append(m.group(0))
        pos = m.end()
    return out


def _literal_end(code: str, start: int) -> int:
    quote = code[start]
    j = start + 1
    while j < len(code):
        ch = code[j]
        if ch == "\\":
            j += 2
            continue
        if ch == quote:
            return j + 1
        if ch == "\n":
            break
        j += 1
    logger.warning("unterminated %s literal at offset %d closed at line end",
                   "string" if quote == '"' else "char", start)
    return min(j, len(code))


def classify_token(text: str, dictionary: SymbolDictionary | None = None) -> TokenKind:
    d = dictionary or default_dictionary()
    if text in CONTROL_WORDS or _ORDERED_RE.match(text):
        return TokenKind.CONTROL
    if text in d.symbols:
        return TokenKind.SYMBOL
    if text in d.keywords:
        return TokenKind.KEYWORD
    if text[0] in "\"'" or text[0].isdigit() or (text[0] == "." and len(text) > 1):
        return TokenKind.LITERAL
    return TokenKind.VARIABLE


def tokenize(code: str, dictionary: SymbolDictionary | None = None) -> list[Token]:
    return [Token(t, classify_token(t, dictionary)) for t in lex(code)]


class _Malformed(Exception):
    pass


def _match_close(texts: list[str], i: int, open_: str, close: str) -> int:
    depth = 0
    for k in range(i, len(texts)):
        if texts[k] == open_:
            depth += 1
        elif texts[k] == close:
            depth -= 1
            if depth == 0:
                return k
    raise _Malformed(f"no closing {close!r} for {open_!r} at token {i}")


def _statement_end(texts: list[str], i: int, spans: dict[int, int]) -> int:
    """Index of the last token of the statement starting at ``i``.

    Records the block end of every for/if met on the way into ``spans``.
    """
    if i >= len(texts):
        raise _Malformed("statement expected at end of input")
    tok = texts[i]
    if tok == "{":
        _block_walk(texts, i + 1, spans)
        return _match_close(texts, i, "{", "}")
    if tok in ("for", "if", "while", "synchronized", "switch"):
        if i + 1 >= len(texts) or texts[i + 1] != "(":
            raise _Malformed(f"{tok!r} without a condition at token {i}")
        close = _match_close(texts, i + 1, "(", ")")
        _block_walk(texts, i + 2, spans, stop=close)
        body_end = _statement_end(texts, close + 1, spans)
        if tok in CONTROL_WORDS:
            spans[i] = body_end
        if tok == "if" and body_end + 1 < len(texts) and texts[body_end + 1] == "else":
            return _statement_end(texts, body_end + 2, spans)
        return body_end
    if tok == "do":
        body_end = _statement_end(texts, i + 1, spans)
        return _plain_end(texts, body_end + 1, spans)
    if tok in ("try", "else", "finally", "static"):
        return _statement_end(texts, i + 1, spans)
    return _plain_end(texts, i, spans)


def _plain_end(texts: list[str], i: int, spans: dict[int, int]) -> int:
    depth = 0
    k = i
    while k < len(texts):
        t = texts[k]
        if t in ("(", "["):
            depth += 1
        elif t in (")", "]"):
            depth -= 1
        elif t == "{":
            if k == i or texts[k - 1] in ("=", "]", ",", "{", "(", "return"):
                # array initializer
                k = _match_close(texts, k, "{", "}") + 1
                continue
            # lambda, anonymous class or declaration body
            _block_walk(texts, k + 1, spans)
            k = _match_close(texts, k, "{", "}")
            if depth == 0 and k + 1 < len(texts) and texts[k + 1] in ("catch", "finally"):
                k += 1
                continue
            if depth == 0 and (k + 1 >= len(texts) or texts[k + 1] not in (";", ")", ",", ".")):
                return k
        elif t == "}":
            raise _Malformed(f"statement closed by '}}' at token {k}")
        elif t == ";" and depth == 0:
            return k
        elif t in CONTROL_WORDS and depth == 0 and k > i:
            return k - 1
        k += 1
    raise _Malformed("statement runs past end of input")


def _block_walk(texts: list[str], i: int, spans: dict[int, int], stop: int | None = None) -> None:
    """Visit every statement inside a block (or a parenthesised header)."""
    if stop is not None:
        # for/if inside a header only appear within lambdas; scan for braces
        k = i
        while k < stop:
            if texts[k] == "{":
                _block_walk(texts, k + 1, spans)
                k = _match_close(texts, k, "{", "}")
            k += 1
        return
    k = i
    while k < len(texts) and texts[k] != "}":
        k = _statement_end(texts, k, spans) + 1


def _control_spans(texts: list[str]) -> dict[int, int]:
    spans: dict[int, int] = {}
    k = 0
    while k < len(texts):
        if texts[k] == "}":
            k += 1
            continue
        k = _statement_end(texts, k, spans) + 1
    return spans


def order_identifiers(tokens: list[Token]) -> list[Token]:
    """Rewrite ``for``/``if`` to depth-numbered labels with closing END markers.

    The number is one plus the count of enclosing constructs of the same
    kind.  An END marker follows the last token of each construct's body,
    innermost first.  Malformed input is returned unchanged.
    """
    texts = [t.text for t in tokens]
    if not any(t in CONTROL_WORDS for t in texts):
        return list(tokens)
    try:
        spans = _control_spans(texts)
    except _Malformed as exc:
        logger.warning("identifier ordering skipped: %s", exc)
        return list(tokens)
    missing = [i for i, t in enumerate(texts) if t in CONTROL_WORDS and i not in spans]
    if missing:
        logger.warning("identifier ordering skipped: unparsed control word at token %d", missing[0])
        return list(tokens)

    labels: dict[int, str] = {}
    closers: dict[int, list[tuple[int, str]]] = {}
    for start, end in spans.items():
        word = texts[start]
        depth = 1 + sum(
            1 for s, e in spans.items()
            if texts[s] == word and s < start <= e
        )
        labels[start] = f"{word.upper()}{depth}"
        closers.setdefault(end, []).append((start, f"END{word.upper()}{depth}"))

    out: list[Token] = []
    for i, tok in enumerate(tokens):
        if i in labels:
            out.append(Token(labels[i], TokenKind.CONTROL))
        else:
            out.append(tok)
        for _, marker in sorted(closers.get(i, ()), reverse=True):
            out.append(Token(marker, TokenKind.CONTROL))
    return out


def strip_ordering(tokens: list[Token]) -> list[Token]:
    """Undo :func:`order_identifiers`: restore ``for``/``if`` and drop END markers."""
    out = []
    for tok in tokens:
        m = _ORDERED_RE.match(tok.text)
        if not m:
            out.append(tok)
        elif m.group(1) is None:
            out.append(Token(m.group(2).lower(), TokenKind.CONTROL))
    return out


def token_indices(tokens: list[Token] | list[str], vocab) -> list[int]:
    """Rows of the token-weight matrix; they coincide with source-vocabulary ids."""
    return vocab.encode([t.text if isinstance(t, Token) else t for t in tokens])


def comment_tokens(comment: str) -> list[str]:
    """Lowercased word/punctuation tokens of a natural-language comment."""
    return re.findall(r"[a-z0-9_]+|[^\sa-z0-9_]", comment.lower())


def preprocess_code(code: str, ident: bool = True, dictionary: SymbolDictionary | None = None) -> list[Token]:
    tokens = tokenize(code, dictionary)
    return order_identifiers(tokens) if ident else tokens
