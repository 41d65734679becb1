"""Command line entry point: prepare, preprocess, train, infer, eval, ablate."""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import sys
from pathlib import Path

from . import __version__, checkpoint
from .corpus import prepare_corpus
from .data import DataError, read_jsonl, select_split, to_token_record, write_jsonl
from .pipeline import (
    evaluate, fit, load_model, run_ablation, translate_code, write_ablation_csv,
    write_pair_scores,
)
from .preprocess import token_indices
from .train import ABLATION_ROWS, TrainingConfig, apply_ablation, parse_config
from .vocab import ConfigError, build_vocab

logger = logging.getLogger("code2comment")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out: str | Path, command: str, config: dict, seed, inputs, outputs) -> None:
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "inputs": {str(p): _digest(p) for p in inputs if Path(p).is_file()},
        "outputs": [str(p) for p in outputs],
        "version": __version__,
        "checkpoint_format": checkpoint.FORMAT_VERSION,
    }
    Path(f"{out}.manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _load_config(args) -> TrainingConfig:
    config = TrainingConfig()
    if getattr(args, "config", None):
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise DataError(f"cannot read config {args.config}: {exc.strerror}") from None
        config = parse_config(text)
    if getattr(args, "seed", None) is not None:
        config = dataclasses.replace(config, seed=args.seed)
    if getattr(args, "iters", None) is not None:
        config = dataclasses.replace(config, max_iters=args.iters)
    if getattr(args, "ablation", None) is not None:
        config = apply_ablation(config, args.ablation)
    return config


def cmd_prepare(args) -> int:
    src = Path(args.src)
    if not src.is_dir():
        raise DataError(f"source directory not found: {src}")
    pairs, report = prepare_corpus(src, args.min_shared)
    write_jsonl(args.out, ({"id": p.id, "code": p.code, "comment": p.comment,
                           "shared_terms": p.shared_terms} for p in pairs))
    print(f"{report.kept} pairs kept of {report.input_pairs} "
          f"(non-ascii {report.removed_non_ascii}, low overlap {report.removed_low_overlap})",
          file=sys.stderr)
    inputs = sorted(src.rglob("*.java"))
    write_manifest(args.out, "prepare", {"min_shared": args.min_shared}, None, inputs, [args.out])
    return EXIT_OK


def cmd_preprocess(args) -> int:
    records = read_jsonl(args.inp)
    token_records = [to_token_record(r, not args.no_ident) for r in records]
    if not token_records:
        raise DataError(f"{args.inp}: no records")
    src_vocab = build_vocab([r.src_tokens for r in token_records], args.vocab_cap)
    tgt_vocab = build_vocab([r.tgt_tokens for r in token_records], args.vocab_cap)
    write_jsonl(args.out, ({
        "id": r.id,
        "src_tokens": list(r.src_tokens),
        "token_idx": token_indices(list(r.src_tokens), src_vocab),
        "tgt_tokens": list(r.tgt_tokens),
    } for r in token_records))
    src_vocab.save(f"{args.out}.src.vocab")
    tgt_vocab.save(f"{args.out}.tgt.vocab")
    write_manifest(args.out, "preprocess", {"ident": not args.no_ident, "vocab_cap": args.vocab_cap},
                   None, [args.inp],
                   [args.out, f"{args.out}.src.vocab", f"{args.out}.tgt.vocab"])
    return EXIT_OK


def cmd_train(args) -> int:
    config = _load_config(args)
    records = read_jsonl(args.data)
    resume = load_model(args.resume) if args.resume else None
    log_path = args.log or f"{args.out}.log.csv"
    _, state = fit(records, config, out=args.out, log_path=log_path, resume=resume,
                   split=args.split)
    last = state.history[-1] if state.history else None
    if last:
        print(f"iteration {last[0]} loss {last[2]:.4f} lr {last[3]:.5f}", file=sys.stderr)
    write_manifest(args.out, "train", config.to_dict(), config.seed, [args.data],
                   [args.out, log_path])
    return EXIT_OK


def cmd_infer(args) -> int:
    model = load_model(args.model)
    try:
        code = Path(args.inp).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {args.inp}: {exc.strerror}") from None
    print(translate_code(model, code, args.beam))
    return EXIT_OK


def cmd_eval(args) -> int:
    model = load_model(args.model)
    records = select_split(read_jsonl(args.data), args.split)
    result = evaluate(model, records, args.beam)
    Path(args.out).write_text(json.dumps(result.report(), indent=2) + "\n")
    if args.pairs_csv:
        write_pair_scores(args.pairs_csv, result.rows)
    bleu_s = " ".join(f"BLEU-{n + 1} {b:.4f} ({100 * b:.2f})" for n, b in enumerate(result.bleu))
    print(f"{bleu_s}  METEOR {result.meteor['score']:.4f}")
    outputs = [args.out] + ([args.pairs_csv] if args.pairs_csv else [])
    write_manifest(args.out, "eval", {"beam": args.beam, "split": args.split}, None,
                   [args.model, args.data], outputs)
    return EXIT_OK


def cmd_ablate(args) -> int:
    config = _load_config(args)
    rows = sorted({int(r) for r in args.rows.split(",")})
    bad = [r for r in rows if r not in ABLATION_ROWS]
    if bad:
        raise UsageError(f"ablation rows must be within 1-4, got {bad}")
    records = read_jsonl(args.data)
    table = run_ablation(records, config, rows)
    write_ablation_csv(args.out, table)
    write_manifest(args.out, "ablate", config.to_dict(), config.seed, [args.data], [args.out])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="code2comment", description=__doc__)
    parser.add_argument("--version", action="version",
                        version=f"code2comment {__version__} (checkpoint format "
                                f"{checkpoint.FORMAT_VERSION})")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("prepare", help="mine code/comment pairs from .java files")
    p.add_argument("--src", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-shared", type=int, default=3)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("preprocess", help="lex and order identifiers; writes <out>.{src,tgt}.vocab")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-ident", action="store_true", help="skip identifier ordering")
    p.add_argument("--vocab-cap", type=int, default=50_000)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="train a model; log goes to <out>.log.csv by default")
    p.add_argument("--data", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--ablation", type=int, choices=sorted(ABLATION_ROWS))
    p.add_argument("--seed", type=int)
    p.add_argument("--iters", type=int, help="override max_iters")
    p.add_argument("--log")
    p.add_argument("--resume", help="checkpoint to continue from")
    p.add_argument("--split", default="train", choices=["train", "valid", "test", "all"])
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="print a comment for a code file")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--beam", type=int, default=5)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("eval", help="BLEU and METEOR of a model on a data file")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--pairs-csv")
    p.add_argument("--beam", type=int)
    p.add_argument("--split", default="all", choices=["train", "valid", "test", "all"])
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="train and score the four code-attention variants")
    p.add_argument("--data", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--rows", default="1,2,3,4")
    p.add_argument("--seed", type=int)
    p.add_argument("--iters", type=int, help="override max_iters")
    p.set_defaults(func=cmd_ablate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
        return args.func(args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (UsageError, ConfigError) as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
