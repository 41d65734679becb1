"""Corpus BLEU and exact-match METEOR."""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

EXACT_CHUNK_LIMIT = 50

logger = logging.getLogger(__name__)


@dataclass
class BleuReport:
    bleu: list[float]  # cumulative BLEU-1..max_n
    precisions: list[float]  # modified n-gram precision per order
    brevity_penalty: float
    matches: list[int] = field(default_factory=list)
    totals: list[int] = field(default_factory=list)
    cand_len: int = 0
    ref_len: int = 0


@dataclass
class MeteorReport:
    precision: float
    recall: float
    fMean: float
    penalty: float
    final_score: float
    matches: int = 0
    chunks: int = 0
    cand_len: int = 0
    ref_len: int = 0

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "fMean": self.fMean,
                "penalty": self.penalty, "score": self.final_score}


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidates: Sequence[Sequence[str]], references: Sequence[Sequence[str]],
         max_n: int = 4) -> BleuReport:
    """Corpus-level BLEU with clipped counts summed before division, no smoothing."""
    if len(candidates) != len(references) or not candidates:
        raise ValueError("need equally many candidates and references, at least one")
    matches = [0] * max_n
    totals = [0] * max_n
    c_len = r_len = 0
    for cand, ref in zip(candidates, references):
        c_len += len(cand)
        r_len += len(ref)
        for n in range(1, max_n + 1):
            c_grams = _ngrams(cand, n)
            r_grams = _ngrams(ref, n)
            matches[n - 1] += sum(min(c, r_grams[g]) for g, c in c_grams.items())
            totals[n - 1] += max(len(cand) - n + 1, 0)

    precisions = [m / t if t else 0.0 for m, t in zip(matches, totals)]
    if c_len == 0:
        bp = 0.0
    else:
        bp = min(1.0, math.exp(1.0 - r_len / c_len))
    scores = []
    log_sum = 0.0
    for n, p in enumerate(precisions, 1):
        if p == 0.0 or math.isinf(log_sum):
            log_sum = -math.inf
            scores.append(0.0)
            continue
        log_sum += math.log(p)
        scores.append(bp * math.exp(log_sum / n))
    return BleuReport(scores, precisions, bp, matches, totals, c_len, r_len)


def _count_chunks(alignment: Sequence[tuple[int, int]]) -> int:
    chunks = 0
    prev = None
    for i, j in sorted(alignment):
        if prev is None or i != prev[0] + 1 or j != prev[1] + 1:
            chunks += 1
        prev = (i, j)
    return chunks


def _greedy_alignment(cand: Sequence[str], ref: Sequence[str]) -> list[tuple[int, int]]:
    """Left-to-right alignment that prefers continuing the current chunk."""
    free: dict[str, list[int]] = {}
    for j, w in enumerate(ref):
        free.setdefault(w, []).append(j)
    out = []
    prev_j = None
    for i, w in enumerate(cand):
        slots = free.get(w)
        if not slots:
            prev_j = None
            continue
        j = prev_j + 1 if prev_j is not None and prev_j + 1 in slots else slots[0]
        slots.remove(j)
        out.append((i, j))
        prev_j = j
    return out


class _SearchBudgetExceeded(Exception):
    pass


def _min_chunk_alignment(cand: Sequence[str], ref: Sequence[str],
                         budget: int = 200_000) -> list[tuple[int, int]]:
    """Maximum-size exact-match alignment with the fewest chunks.

    Depth-first search over candidate positions, memoised on the part of
    the state that can still matter.  Raises ``_SearchBudgetExceeded`` after
    ``budget`` distinct states.
    """
    ref_pos: dict[str, list[int]] = {}
    for j, w in enumerate(ref):
        ref_pos.setdefault(w, []).append(j)
    pos_mask = {w: sum(1 << j for j in js) for w, js in ref_pos.items()}
    need = {w: min(c, len(ref_pos.get(w, ()))) for w, c in Counter(cand).items()}
    n = len(cand)
    left_after = [0] * n  # occurrences of cand[i] after position i
    relevant = [0] * (n + 1)  # ref positions of words still to come
    seen: Counter = Counter()
    for i in range(n - 1, -1, -1):
        w = cand[i]
        left_after[i] = seen[w]
        seen[w] += 1
        relevant[i] = relevant[i + 1] | pos_mask.get(w, 0)
    memo: dict = {}

    def solve(i: int, prev_j: int, used: int) -> tuple[int, tuple]:
        if i == n:
            return 0, ()
        w = cand[i]
        if prev_j >= 0 and not (pos_mask.get(w, 0) >> (prev_j + 1) & 1):
            prev_j = -2
        key = (i, prev_j, used & relevant[i])
        hit = memo.get(key)
        if hit is not None:
            return hit
        if len(memo) >= budget:
            raise _SearchBudgetExceeded
        done = bin(used & pos_mask.get(w, 0)).count("1")
        best = None
        if done < need[w]:
            for j in ref_pos[w]:
                if used >> j & 1:
                    continue
                links, rest = solve(i + 1, j, used | 1 << j)
                if prev_j >= 0 and j == prev_j + 1:
                    links += 1
                if best is None or links > best[0]:
                    best = (links, ((i, j),) + rest)
        if done + left_after[i] >= need[w]:
            links, rest = solve(i + 1, -2, used)
            if best is None or links > best[0]:
                best = (links, rest)
        memo[key] = best
        return best

    return list(solve(0, -2, 0)[1])


def align(cand: Sequence[str], ref: Sequence[str],
          exact_limit: int = EXACT_CHUNK_LIMIT) -> list[tuple[int, int]]:
    """Exact-match unigram alignment, fewest chunks among maximal ones.

    Sequences longer than ``exact_limit``, or whose search outgrows its
    state budget, use a greedy left-to-right alignment instead.
    """
    if max(len(cand), len(ref)) <= exact_limit:
        try:
            return _min_chunk_alignment(cand, ref)
        except _SearchBudgetExceeded:
            logger.debug("chunk search budget exceeded; using greedy alignment")
    return _greedy_alignment(cand, ref)


def _meteor_from_counts(matches: int, chunks: int, c_len: int, r_len: int) -> MeteorReport:
    if matches == 0:
        return MeteorReport(0.0, 0.0, 0.0, 0.0, 0.0, 0, 0, c_len, r_len)
    p = matches / c_len
    r = matches / r_len
    f_mean = 10 * p * r / (r + 9 * p)
    penalty = 0.5 * (chunks / matches) ** 3
    return MeteorReport(p, r, f_mean, penalty, f_mean * (1 - penalty),
                        matches, chunks, c_len, r_len)


def meteor(candidate: Sequence[str], reference: Sequence[str],
           exact_limit: int = EXACT_CHUNK_LIMIT) -> MeteorReport:
    alignment = align(candidate, reference, exact_limit)
    return _meteor_from_counts(len(alignment), _count_chunks(alignment),
                               len(candidate), len(reference))


def corpus_meteor(pairs: Sequence[tuple[Sequence[str], Sequence[str]]],
                  exact_limit: int = EXACT_CHUNK_LIMIT) -> MeteorReport:
    """Micro-averaged METEOR: counts are summed over pairs before the formulas apply."""
    if not pairs:
        raise ValueError("need at least one (candidate, reference) pair")
    matches = chunks = c_len = r_len = 0
    for cand, ref in pairs:
        rep = meteor(cand, ref, exact_limit)
        matches += rep.matches
        chunks += rep.chunks
        c_len += len(cand)
        r_len += len(ref)
    return _meteor_from_counts(matches, chunks, c_len, r_len)
