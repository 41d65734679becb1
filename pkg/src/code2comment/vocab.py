"""Vocabularies, length buckets and padded training examples."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

PAD, GO, EOS, UNK = 0, 1, 2, 3
SPECIALS = ("<PAD>", "<GO>", "<EOS>", "<UNK>")

DEFAULT_BUCKETS = ((40, 15), (55, 20), (70, 40), (220, 60))


class ConfigError(ValueError):
    """Raised for invalid user-supplied configuration."""


class Vocabulary:
    def __init__(self, tokens: Sequence[str]):
        self.id_to_token: list[str] = list(SPECIALS) + list(tokens)
        self.token_to_id: dict[str, int] = {t: i for i, t in enumerate(self.id_to_token)}
        if len(self.token_to_id) != len(self.id_to_token):
            raise ValueError("duplicate vocabulary entries")

    def __len__(self) -> int:
        return len(self.id_to_token)

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.id_to_token == other.id_to_token

    def encode(self, tokens: Iterable[str]) -> list[int]:
        return [self.token_to_id.get(t, UNK) for t in tokens]

    def decode(self, ids: Iterable[int], strip: bool = True) -> list[str]:
        out = []
        for i in ids:
            i = int(i)
            if strip and i in (PAD, GO):
                continue
            if strip and i == EOS:
                break
            out.append(self.id_to_token[i])
        return out

    @property
    def words(self) -> list[str]:
        return self.id_to_token[len(SPECIALS):]

    def save(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.id_to_token) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if tuple(lines[: len(SPECIALS)]) != SPECIALS:
            raise ValueError(f"{path}: missing special-token header")
        return cls(lines[len(SPECIALS):])


def build_vocab(corpus: Iterable[Sequence[str]], cap: int = 50_000) -> Vocabulary:
    """Keep the ``cap - 4`` most frequent tokens; ties go to the earliest seen."""
    if cap < 5:
        raise ConfigError(f"vocabulary cap must be at least 5, got {cap}")
    counts: Counter[str] = Counter()
    first_seen: dict[str, int] = {}
    for seq in corpus:
        for tok in seq:
            if tok not in first_seen:
                first_seen[tok] = len(first_seen)
            counts[tok] += 1
    if not first_seen:
        raise ConfigError("cannot build a vocabulary from an empty corpus")
    for special in SPECIALS:
        counts.pop(special, None)
    ranked = sorted(counts, key=lambda t: (-counts[t], first_seen[t]))
    return Vocabulary(ranked[: cap - len(SPECIALS)])


@dataclass(frozen=True, order=True)
class Bucket:
    src_cap: int
    tgt_cap: int

    def __post_init__(self):
        if self.src_cap <= 0 or self.tgt_cap <= 0:
            raise ConfigError(f"bucket caps must be positive: {self}")


def make_buckets(pairs: Iterable[tuple[int, int]]) -> list[Bucket]:
    buckets = [Bucket(int(s), int(t)) for s, t in pairs]
    for a, b in zip(buckets, buckets[1:]):
        if not (a.src_cap < b.src_cap and a.tgt_cap < b.tgt_cap):
            raise ConfigError(f"buckets must be strictly increasing, got {a} then {b}")
    if not buckets:
        raise ConfigError("at least one bucket is required")
    return buckets


def assign_bucket(src_len: int, tgt_len: int, buckets: Sequence[Bucket]) -> Bucket | None:
    for b in buckets:
        if src_len <= b.src_cap and tgt_len <= b.tgt_cap:
            return b
    return None


@dataclass(frozen=True)
class Example:
    """One padded pair.  ``tgt_ids`` is GO + comment + EOS, right-padded."""

    id: str
    src_ids: tuple[int, ...]
    token_idx: tuple[int, ...]
    tgt_ids: tuple[int, ...]
    bucket: Bucket

    @property
    def src_len(self) -> int:
        return sum(1 for i in self.src_ids if i != PAD)


def make_example(pair_id: str, src_tokens: Sequence[str], tgt_tokens: Sequence[str],
                 src_vocab: Vocabulary, tgt_vocab: Vocabulary,
                 buckets: Sequence[Bucket], truncate: bool = False) -> Example | None:
    """Encode and pad one pair into its minimal bucket.

    Pairs that fit no bucket give ``None``, or are cut to the last bucket
    when ``truncate`` is set.
    """
    src = src_vocab.encode(src_tokens)
    tgt = [GO] + tgt_vocab.encode(tgt_tokens) + [EOS]
    if not src:
        return None
    bucket = assign_bucket(len(src), len(tgt), buckets)
    if bucket is None:
        if not truncate:
            return None
        bucket = buckets[-1]
        src = src[: bucket.src_cap]
        tgt = tgt[: bucket.tgt_cap - 1] + [EOS]
    pad_src = tuple(src) + (PAD,) * (bucket.src_cap - len(src))
    pad_tgt = tuple(tgt) + (PAD,) * (bucket.tgt_cap - len(tgt))
    # the token-weight rows share the source id space
    return Example(pair_id, pad_src, pad_src, pad_tgt, bucket)


def strip_padding(ids: Sequence[int]) -> list[int]:
    return [i for i in ids if i != PAD]
