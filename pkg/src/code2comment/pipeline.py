"""End-to-end helpers shared by the command line and the tests."""

from __future__ import annotations

import csv
import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, checkpoint
from .data import (
    DataError, TokenRecord, build_examples, build_vocabs, select_split, source_tokens,
    to_token_record,
)
from .metrics import bleu, corpus_meteor, meteor
from .model import ModelParams
from .preprocess import default_dictionary
from .train import (
    ABLATION_ROWS, LrState, TrainingConfig, TrainState, apply_ablation, beam_search,
    greedy_decode, train_loop,
)
from .vocab import Vocabulary, assign_bucket, make_buckets

logger = logging.getLogger(__name__)


@dataclass
class Model:
    params: ModelParams
    src_vocab: Vocabulary
    tgt_vocab: Vocabulary
    config: TrainingConfig
    metadata: dict

    @property
    def ident(self) -> bool:
        return self.config.ident


def checkpoint_metadata(state: TrainState, config: TrainingConfig, src_vocab: Vocabulary,
                        tgt_vocab: Vocabulary) -> dict:
    return {
        "tool_version": __version__,
        "dictionary_version": default_dictionary().version,
        "config": config.to_dict(),
        "src_vocab": src_vocab.words,
        "tgt_vocab": tgt_vocab.words,
        "iteration": state.iteration,
        "lr_state": dataclasses.asdict(state.lr),
        "rng_state": state.rng.bit_generator.state,
    }


def save_model(path: str | Path, state: TrainState, config: TrainingConfig,
               src_vocab: Vocabulary, tgt_vocab: Vocabulary) -> None:
    checkpoint.save(path, state.params, checkpoint_metadata(state, config, src_vocab, tgt_vocab))


def load_model(path: str | Path) -> Model:
    try:
        params, meta = checkpoint.load(path)
    except FileNotFoundError:
        raise DataError(f"checkpoint not found: {path}") from None
    except checkpoint.CheckpointError as exc:
        raise DataError(f"{path}: {exc}") from None
    if meta.get("dictionary_version") != default_dictionary().version:
        logger.warning("%s was built with symbol dictionary version %s (current %s)",
                       path, meta.get("dictionary_version"), default_dictionary().version)
    config = TrainingConfig.from_dict(meta["config"])
    return Model(params, Vocabulary(meta["src_vocab"]), Vocabulary(meta["tgt_vocab"]),
                 config, meta)


def resume_state(model: Model) -> TrainState:
    meta = model.metadata
    rng = np.random.default_rng()
    rng.bit_generator.state = meta["rng_state"]
    return TrainState(model.params, LrState(**meta["lr_state"]), meta["iteration"], rng)


def fit(records: Sequence[dict], config: TrainingConfig, out: str | Path | None = None,
        log_path: str | Path | None = None, resume: Model | None = None,
        split: str = "train") -> tuple[Model, TrainState]:
    """Train on ``records`` (pairs or token records) and optionally write a checkpoint."""
    chosen = select_split(records, split)
    if resume is not None:
        config = dataclasses.replace(resume.config, max_iters=config.max_iters)
    token_records = [to_token_record(r, config.ident) for r in chosen]
    if resume is not None:
        src_vocab, tgt_vocab = resume.src_vocab, resume.tgt_vocab
    else:
        if not token_records:
            raise DataError(f"no records in the {split!r} split")
        src_vocab, tgt_vocab = build_vocabs(token_records, config.vocab_cap)
    examples = build_examples(token_records, src_vocab, tgt_vocab, config.bucket_list)
    if not examples:
        raise DataError("no training pair fits any bucket")

    def on_checkpoint(st: TrainState) -> None:
        if out is not None:
            save_model(out, st, config, src_vocab, tgt_vocab)

    state = train_loop(config, examples, len(src_vocab), len(tgt_vocab),
                       state=resume_state(resume) if resume else None,
                       log_path=log_path, on_checkpoint=on_checkpoint)
    if out is not None:
        save_model(out, state, config, src_vocab, tgt_vocab)
    model = Model(state.params, src_vocab, tgt_vocab, config,
                  checkpoint_metadata(state, config, src_vocab, tgt_vocab))
    return model, state


def translate_tokens(model: Model, src_tokens: Sequence[str], beam: int | None = None) -> list[str]:
    """Decode a comment for already-lexed source tokens."""
    toks = source_tokens(src_tokens, model.ident)
    ids = model.src_vocab.encode(toks)
    buckets = make_buckets(model.config.buckets)
    if not ids:
        return []
    bucket = assign_bucket(len(ids), 2, buckets) or buckets[-1]
    ids = ids[: bucket.src_cap]
    width = model.config.beam if beam is None else beam
    max_len = bucket.tgt_cap - 1
    if width == 1:
        out = greedy_decode(model.params, ids, ids, max_len)
    else:
        out = beam_search(model.params, ids, ids, width, max_len)
    return model.tgt_vocab.decode(out)


def translate_code(model: Model, code: str, beam: int | None = None) -> str:
    rec = to_token_record({"id": "-", "code": code, "comment": ""}, model.ident)
    return " ".join(translate_tokens(model, rec.src_tokens, beam))


@dataclass
class EvalResult:
    bleu: list[float]
    brevity_penalty: float
    meteor: dict
    rows: list[dict]

    def report(self) -> dict:
        return {"bleu": self.bleu, "brevity_penalty": self.brevity_penalty, "meteor": self.meteor}


def evaluate(model: Model, records: Sequence[dict], beam: int | None = None) -> EvalResult:
    token_records: list[TokenRecord] = [to_token_record(r, model.ident) for r in records]
    if not token_records:
        raise DataError("nothing to evaluate")
    cands, refs, rows = [], [], []
    for rec in token_records:
        cand = translate_tokens(model, rec.src_tokens, beam)
        ref = list(rec.tgt_tokens)
        cands.append(cand)
        refs.append(ref)
        rows.append({
            "id": rec.id,
            "candidate": " ".join(cand),
            "reference": " ".join(ref),
            "bleu4": bleu([cand], [ref]).bleu[3],
            "meteor": meteor(cand, ref).final_score,
        })
    b = bleu(cands, refs)
    m = corpus_meteor(list(zip(cands, refs)))
    return EvalResult(b.bleu, b.brevity_penalty, m.to_dict(), rows)


def write_pair_scores(path: str | Path, rows: Sequence[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["id", "candidate", "reference", "bleu4", "meteor"])
        writer.writeheader()
        writer.writerows(rows)


ABLATION_HEADER = ["row", "BLEU-1", "BLEU-2", "BLEU-3", "BLEU-4", "METEOR",
                   "Ident", "Token", "Global Attention", "initial_loss", "status"]
_ATTENTION_LABEL = {"baseline": "w/o", "add": "+", "mul": "x"}


def run_ablation(records: Sequence[dict], config: TrainingConfig,
                 rows: Sequence[int] = (1, 2, 3, 4), eval_split: str = "test") -> list[dict]:
    """Train and score each ablation row with the same seed and budget."""
    held_out = select_split(records, eval_split)
    if not held_out:
        raise DataError(f"no held-out pairs in the {eval_split!r} split")
    table = []
    for row in rows:
        flags = ABLATION_ROWS[row]
        entry = {
            "row": row, "Ident": "w/" if flags["ident"] else "w/o",
            "Token": "w/" if flags["token"] else "w/o",
            "Global Attention": _ATTENTION_LABEL[flags["mode"].value],
        }
        try:
            model, state = fit(records, apply_ablation(config, row))
            result = evaluate(model, held_out)
        except Exception as exc:  # one failing row must not hide the others
            logger.error("ablation row %d failed: %s", row, exc)
            entry.update({k: "" for k in ABLATION_HEADER if k not in entry})
            entry["status"] = f"failed: {exc}"
            table.append(entry)
            continue
        for n in range(4):
            entry[f"BLEU-{n + 1}"] = f"{100 * result.bleu[n]:.2f}"
        entry["METEOR"] = f"{result.meteor['score']:.4f}"
        entry["initial_loss"] = repr(state.history[0][2]) if state.history else ""
        entry["status"] = "ok"
        table.append(entry)
    return table


def write_ablation_csv(path: str | Path, table: Sequence[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=ABLATION_HEADER, lineterminator="\n")
        writer.writeheader()
        writer.writerows(table)
