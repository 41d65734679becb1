"""JSON-lines records, the hash split, and turning records into training examples."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .preprocess import (
    Token, classify_token, comment_tokens, order_identifiers, strip_ordering, tokenize,
)
from .vocab import Bucket, Example, Vocabulary, build_vocab, make_example

logger = logging.getLogger(__name__)

SPLITS = ("train", "valid", "test")


class DataError(Exception):
    """Input data is missing or malformed."""


@dataclass(frozen=True)
class TokenRecord:
    id: str
    src_tokens: tuple[str, ...]
    tgt_tokens: tuple[str, ...]


def read_jsonl(path: str | Path) -> list[dict]:
    records = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    records.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise DataError(f"{path}:{lineno}: {exc.msg}") from None
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    return records


def write_jsonl(path: str | Path, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def split_of(pair_id: str) -> str:
    """80/10/10 train/valid/test assignment from a stable hash of the id."""
    bucket = int.from_bytes(hashlib.sha256(pair_id.encode()).digest()[:8], "big") % 10
    return "train" if bucket < 8 else ("valid" if bucket == 8 else "test")


def select_split(records: Sequence[dict], split: str) -> list[dict]:
    if split == "all":
        return list(records)
    if split not in SPLITS:
        raise ValueError(f"unknown split {split!r}")
    return [r for r in records if split_of(str(r["id"])) == split]


def source_tokens(tokens: Sequence[str], ident: bool) -> list[str]:
    """Bring a token list to the requested ordering state, whatever it started in."""
    toks = strip_ordering([Token(t, classify_token(t)) for t in tokens])
    if ident:
        toks = order_identifiers(toks)
    return [t.text for t in toks]


def to_token_record(rec: dict, ident: bool) -> TokenRecord:
    try:
        if "src_tokens" in rec:
            src = source_tokens(rec["src_tokens"], ident)
            tgt = list(rec["tgt_tokens"])
        else:
            toks = tokenize(rec["code"])
            if ident:
                toks = order_identifiers(toks)
            src = [t.text for t in toks]
            tgt = comment_tokens(rec["comment"])
        return TokenRecord(str(rec["id"]), tuple(src), tuple(tgt))
    except (KeyError, TypeError) as exc:
        raise DataError(f"record {rec.get('id', '?')!r} is missing field {exc}") from None


def build_examples(records: Sequence[TokenRecord], src_vocab: Vocabulary, tgt_vocab: Vocabulary,
                   buckets: Sequence[Bucket], truncate: bool = False) -> list[Example]:
    out = []
    skipped = 0
    for r in records:
        ex = make_example(r.id, r.src_tokens, r.tgt_tokens, src_vocab, tgt_vocab, buckets, truncate)
        if ex is None:
            skipped += 1
        else:
            out.append(ex)
    if skipped:
        logger.warning("%d pair(s) fit no bucket and were skipped", skipped)
    return out


def build_vocabs(records: Sequence[TokenRecord], cap: int) -> tuple[Vocabulary, Vocabulary]:
    return (build_vocab([r.src_tokens for r in records], cap),
            build_vocab([r.tgt_tokens for r in records], cap))
