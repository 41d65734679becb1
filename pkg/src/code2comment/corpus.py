"""Mine (code snippet, comment segment) pairs out of Java source files.

A brace-balance heuristic stands in for a real Java AST: a method is any
``<modifiers> <type> name(args) [throws ...] { ... }`` block that is not
nested inside another method.  Comments are found with a small scanner that
understands string and character literals, so braces and comment markers
inside literals are ignored.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)

NOT_METHOD_NAMES = frozenset(
    "if for while switch catch synchronized return new throw else do try "
    "finally assert super this".split()
)

_HEADER_RE = re.compile(
    r"(?P<prefix>[\w$@<>\[\],.?\s]*?)"
    r"(?P<name>[A-Za-z_$][\w$]*)\s*"
    r"\((?P<args>[^()]*(?:\([^()]*\)[^()]*)*)\)\s*"
    r"(?:throws\s+[\w$.,\s]+?)?\s*$"
)
_WORD_RE = re.compile(r"[A-Za-z0-9_]+")
_IDENT_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_CAMEL_RE = re.compile(
    r"[A-Z]+[0-9]*(?=[A-Z][a-z])|[A-Z]?[a-z]+[0-9]*|[A-Z]+[0-9]*|[0-9]+|[^A-Za-z0-9_]+"
)
_JAVA_KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while true false null var""".split()
)


@dataclass(frozen=True)
class RawFile:
    path: str
    contents: str


@dataclass(frozen=True)
class Snippet:
    """A method-like block with its comments cut out.

    ``spans`` are the half-open character ranges of the file that make up
    ``text``; they never intersect a comment span.
    """

    text: str
    start_line: int
    end_line: int
    spans: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class Comment:
    text: str
    start_line: int
    end_line: int
    spans: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class PairRecord:
    id: str
    code: str
    comment: str
    shared_terms: int = 0


@dataclass
class CleaningReport:
    input_pairs: int = 0
    removed_non_ascii: int = 0
    removed_low_overlap: int = 0
    kept: int = 0


@dataclass
class _Scan:
    # comment spans as (start, end, kind) with kind in {"line", "block"}
    comments: list[tuple[int, int, str]] = field(default_factory=list)
    # spans of string/char literals
    literals: list[tuple[int, int]] = field(default_factory=list)
    unterminated_block: bool = False


def load_file(path: str | Path, root: str | Path | None = None) -> RawFile:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        raise ValueError(f"{path}: empty source file")
    name = path.relative_to(root).as_posix() if root is not None else path.as_posix()
    return RawFile(name, text)


def _scan(text: str) -> _Scan:
    out = _Scan()
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "/" and i + 1 < n and text[i + 1] == "/":
            j = text.find("\n", i)
            j = n if j < 0 else j
            out.comments.append((i, j, "line"))
            i = j
        elif c == "/" and i + 1 < n and text[i + 1] == "*":
            j = text.find("*/", i + 2)
            if j < 0:
                out.unterminated_block = True
                out.comments.append((i, n, "block"))
                i = n
            else:
                out.comments.append((i, j + 2, "block"))
                i = j + 2
        elif c in "\"'":
            j = i + 1
            while j < n and text[j] != c and text[j] != "\n":
                j += 2 if text[j] == "\\" else 1
            j = min(j, n)
            end = j + 1 if j < n and text[j] == c else j
            out.literals.append((i, end))
            i = end
        else:
            i += 1
    return out


def _line_of(text: str, offset: int) -> int:
    return text.count("\n", 0, offset) + 1


def _mask(text: str, spans) -> str:
    chars = list(text)
    for start, end, *_ in spans:
        for k in range(start, end):
            if chars[k] != "\n":
                chars[k] = " "
    return "".join(chars)


def _subtract(start: int, end: int, holes: list[tuple[int, int]]) -> list[tuple[int, int]]:
    pieces, cur = [], start
    for h0, h1 in holes:
        if h1 <= cur or h0 >= end:
            continue
        if h0 > cur:
            pieces.append((cur, h0))
        cur = max(cur, h1)
    if cur < end:
        pieces.append((cur, end))
    return pieces


def _snippet_text(text: str, pieces: list[tuple[int, int]]) -> str:
    joined = "".join(text[a:b] for a, b in pieces)
    lines = [line.rstrip() for line in joined.splitlines()]
    lines = [line for line in lines if line.strip()]
    if not lines:
        return ""
    indent = min(len(line) - len(line.lstrip()) for line in lines[1:]) if len(lines) > 1 else 0
    body = [lines[0].strip()] + [line[indent:] if line[:indent].isspace() else line.strip()
                                 for line in lines[1:]]
    return "\n".join(body)


def extract_snippets(file: RawFile) -> list[Snippet]:
    """Return the outermost method blocks of ``file`` in source order."""
    text = file.contents
    scan = _scan(text)
    comment_spans = [(a, b) for a, b, _ in scan.comments]
    masked = _mask(text, scan.comments + [(a, b) for a, b in scan.literals])

    snippets: list[Snippet] = []
    boundary = 0
    i, n = 0, len(masked)
    while i < n:
        c = masked[i]
        if c in ";}":
            boundary = i + 1
        elif c == "{":
            header = masked[boundary:i]
            m = _HEADER_RE.search(header)
            if m and _is_method_header(m):
                close = _match_brace(masked, i)
                if close is None:
                    logger.warning(
                        "%s: unbalanced braces after line %d; keeping %d earlier snippet(s)",
                        file.path, _line_of(text, i), len(snippets))
                    return snippets
                start = boundary + m.start("prefix")
                start += len(masked[start:i]) - len(masked[start:i].lstrip())
                pieces = _subtract(start, close + 1, comment_spans)
                snippets.append(Snippet(
                    _snippet_text(text, pieces),
                    _line_of(text, start),
                    _line_of(text, close),
                    tuple(pieces),
                ))
                i = close + 1
                boundary = i
                continue
            boundary = i + 1
        i += 1
    return snippets


def _is_method_header(m: re.Match) -> bool:
    name = m.group("name")
    prefix = m.group("prefix").split()
    if name in NOT_METHOD_NAMES or not prefix:
        return False
    if prefix[-1] in ("new", "=", "return") or "=" in m.group("prefix"):
        return False
    return True


def _match_brace(masked: str, open_at: int) -> int | None:
    depth = 0
    for k in range(open_at, len(masked)):
        if masked[k] == "{":
            depth += 1
        elif masked[k] == "}":
            depth -= 1
            if depth == 0:
                return k
    return None


def _clean_comment_text(raw: str, kind: str) -> str:
    if kind == "line":
        body = raw[2:]
        return body.lstrip("/")
    body = raw[2:]
    if body.endswith("*/"):
        body = body[:-2]
    body = body.lstrip("*")
    lines = [re.sub(r"^\s*\*+", "", line) for line in body.splitlines()]
    return "\n".join(lines)


def extract_comments(file: RawFile) -> list[Comment]:
    """Return comment segments; consecutive ``//`` lines are merged into one."""
    text = file.contents
    scan = _scan(text)
    if scan.unterminated_block:
        logger.warning("%s: unterminated block comment, truncated at end of file", file.path)

    out: list[Comment] = []
    run: list[tuple[int, int, int]] = []  # (start, end, line) of pending // comments

    def flush():
        if not run:
            return
        body = " ".join(_clean_comment_text(text[a:b], "line") for a, b, _ in run)
        out.append(Comment(" ".join(body.split()), run[0][2], run[-1][2],
                           tuple((a, b) for a, b, _ in run)))
        run.clear()

    for start, end, kind in scan.comments:
        line = _line_of(text, start)
        if kind == "line":
            if run and line != run[-1][2] + 1:
                flush()
            run.append((start, end, line))
            continue
        flush()
        body = " ".join(_clean_comment_text(text[start:end], "block").split())
        out.append(Comment(body, line, _line_of(text, max(start, end - 1)), ((start, end),)))
    flush()
    return [c for c in out if c.text]


def split_terms(token_text: str) -> list[str]:
    """Split an identifier on underscores and camel-case humps, lowercased.

    >>> split_terms("StringBuilder")
    ['string', 'builder']
    """
    terms = []
    for part in token_text.split("_"):
        for m in _CAMEL_RE.finditer(part):
            terms.append(m.group(0).lower())
    return terms


def snippet_terms(code: str) -> set[str]:
    terms: set[str] = set()
    for ident in _IDENT_RE.findall(code):
        if ident in _JAVA_KEYWORDS:
            continue
        terms.update(split_terms(ident))
    return terms


def comment_words(comment: str) -> set[str]:
    return {w.lower() for w in _WORD_RE.findall(comment)}


def match_pairs(snippets: list[Snippet], comments: list[Comment], file_id: str = "") -> list[PairRecord]:
    """Pair comments with snippets one-to-one, greedily by shared-term count.

    Ties go to the comment that ends closest before the snippet starts.
    """
    snip_terms = [snippet_terms(s.text) for s in snippets]
    candidates = []
    for ci, c in enumerate(comments):
        words = comment_words(c.text)
        for si, s in enumerate(snippets):
            shared = len(words & snip_terms[si])
            if shared == 0:
                continue
            dist = s.start_line - c.end_line
            candidates.append(((-shared, 0 if dist > 0 else 1, abs(dist), si, ci), shared))
    candidates.sort()

    used_s: set[int] = set()
    used_c: set[int] = set()
    chosen = []
    for (_, _, _, si, ci), shared in candidates:
        if si in used_s or ci in used_c:
            continue
        used_s.add(si)
        used_c.add(ci)
        chosen.append((si, ci, shared))

    chosen.sort()
    pairs = []
    for si, ci, shared in chosen:
        s = snippets[si]
        pairs.append(PairRecord(f"{file_id}:{s.start_line}-{s.end_line}",
                                s.text, comments[ci].text, shared))
    return pairs


def _is_ascii(s: str) -> bool:
    return all(ord(ch) < 128 for ch in s)


def clean_pairs(pairs: list[PairRecord], min_shared: int = 3) -> tuple[list[PairRecord], CleaningReport]:
    report = CleaningReport(input_pairs=len(pairs))
    kept = []
    for p in pairs:
        if not (_is_ascii(p.code) and _is_ascii(p.comment)):
            report.removed_non_ascii += 1
        elif p.shared_terms < min_shared:
            report.removed_low_overlap += 1
        else:
            kept.append(p)
    report.kept = len(kept)
    return kept, report


def mine_file(file: RawFile) -> list[PairRecord]:
    return match_pairs(extract_snippets(file), extract_comments(file), file.path)


def prepare_corpus(src_dir: str | Path, min_shared: int = 3) -> tuple[list[PairRecord], CleaningReport]:
    """Run extraction, matching and cleaning over every ``.java`` file under ``src_dir``."""
    root = Path(src_dir)
    paths = sorted(root.rglob("*.java"), key=lambda p: p.relative_to(root).as_posix())
    pairs: list[PairRecord] = []
    for path in paths:
        try:
            raw = load_file(path, root)
        except (UnicodeDecodeError, ValueError) as exc:
            logger.warning("skipping %s: %s", path, exc)
            continue
        pairs.extend(mine_file(raw))
    return clean_pairs(pairs, min_shared)
