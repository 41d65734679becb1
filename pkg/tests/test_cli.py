import csv
import json
from pathlib import Path

import pytest

from toycorpus import toy_pairs
from code2comment import __version__
from code2comment.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from code2comment.data import write_jsonl
from code2comment.pipeline import ABLATION_HEADER

ROOT = Path(__file__).resolve().parents[1]
DEMO = ROOT / "demo"
GOLDEN = ROOT / "tests" / "golden" / "demo_pairs.jsonl"

TINY_CONFIG = """\
embed = 8
hidden = 8
layers = 1
batch = 4
max_iters = 3
buckets = 40x15, 55x20
beam = 2
"""


@pytest.fixture()
def toy_data(tmp_path):
    path = tmp_path / "toy.jsonl"
    write_jsonl(path, toy_pairs())
    cfg = tmp_path / "tiny.cfg"
    cfg.write_text(TINY_CONFIG)
    return path, cfg


def test_version(capsys):
    assert main(["--version"]) == EXIT_OK
    assert __version__ in capsys.readouterr().out


def test_no_command_is_usage_error():
    assert main([]) == EXIT_USAGE


def test_prepare_matches_golden_file(tmp_path):
    out = tmp_path / "pairs.jsonl"
    assert main(["prepare", "--src", str(DEMO), "--out", str(out)]) == EXIT_OK
    assert out.read_bytes() == GOLDEN.read_bytes()
    manifest = json.loads(Path(f"{out}.manifest.json").read_text())
    assert manifest["command"] == "prepare" and len(manifest["inputs"]) == 20


def test_unknown_flag_writes_nothing(tmp_path):
    out = tmp_path / "pairs.jsonl"
    assert main(["prepare", "--src", str(DEMO), "--out", str(out), "--bogus"]) == EXIT_USAGE
    assert list(tmp_path.iterdir()) == []


def test_missing_inputs_are_data_errors(tmp_path):
    code = tmp_path / "code.txt"
    code.write_text("int f() { return 1; }")
    assert main(["infer", "--model", str(tmp_path / "none.ckpt"), "--in", str(code)]) == EXIT_DATA
    assert main(["prepare", "--src", str(tmp_path / "nope"), "--out", str(tmp_path / "o")]) == EXIT_DATA
    assert main(["train", "--data", str(tmp_path / "none.jsonl"), "--out", str(tmp_path / "m")]) == EXIT_DATA


def test_bad_checkpoint_is_data_error(tmp_path):
    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(b"not a checkpoint")
    code = tmp_path / "code.txt"
    code.write_text("x")
    assert main(["infer", "--model", str(bad), "--in", str(code)]) == EXIT_DATA


def test_bad_config_is_usage_error(tmp_path, toy_data):
    data, _ = toy_data
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("learning_speed = 3\n")
    assert main(["train", "--data", str(data), "--config", str(cfg),
                 "--out", str(tmp_path / "m.ckpt")]) == EXIT_USAGE


def test_preprocess_writes_vocabularies(tmp_path):
    out = tmp_path / "tok.jsonl"
    assert main(["preprocess", "--in", str(GOLDEN), "--out", str(out)]) == EXIT_OK
    first = json.loads(out.read_text().splitlines()[0])
    assert set(first) == {"id", "src_tokens", "token_idx", "tgt_tokens"}
    assert len(first["token_idx"]) == len(first["src_tokens"])
    assert Path(f"{out}.src.vocab").read_text().startswith("<PAD>\n<GO>\n<EOS>\n<UNK>\n")
    assert Path(f"{out}.tgt.vocab").exists()


def test_train_infer_eval_round(tmp_path, toy_data, capsys):
    data, cfg = toy_data
    model = tmp_path / "m.ckpt"
    args = ["train", "--data", str(data), "--config", str(cfg), "--out", str(model), "--seed", "1"]
    assert main(args) == EXIT_OK
    log = (tmp_path / "m.ckpt.log.csv").read_text().splitlines()
    assert log[0] == "iter,bucket,loss,lr" and len(log) == 4
    first_bytes = model.read_bytes()
    assert main(args) == EXIT_OK
    assert model.read_bytes() == first_bytes

    code = tmp_path / "code.txt"
    code.write_text("public void clearUsers() { users.clear(); }")
    capsys.readouterr()
    assert main(["infer", "--model", str(model), "--in", str(code), "--beam", "2"]) == EXIT_OK
    assert capsys.readouterr().out.endswith("\n")

    report = tmp_path / "report.json"
    pairs_csv = tmp_path / "pairs.csv"
    assert main(["eval", "--model", str(model), "--data", str(data), "--out", str(report),
                 "--pairs-csv", str(pairs_csv), "--beam", "1"]) == EXIT_OK
    rep = json.loads(report.read_text())
    assert len(rep["bleu"]) == 4
    assert set(rep["meteor"]) == {"precision", "recall", "fMean", "penalty", "score"}
    with open(pairs_csv) as fh:
        assert len(list(csv.DictReader(fh))) == 100

    resumed = tmp_path / "r.ckpt"
    assert main(["train", "--data", str(data), "--resume", str(model), "--iters", "5",
                 "--out", str(resumed)]) == EXIT_OK


def test_ablate_table_shape_and_determinism(tmp_path, toy_data):
    data, cfg = toy_data
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        assert main(["ablate", "--data", str(data), "--config", str(cfg), "--out", str(out),
                     "--iters", "2"]) == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    rows = list(csv.DictReader(outs[0].decode().splitlines()))
    assert list(rows[0]) == ABLATION_HEADER
    assert [r["row"] for r in rows] == ["1", "2", "3", "4"]
    assert all(r["status"] == "ok" for r in rows)
    assert [r["Global Attention"] for r in rows] == ["w/o", "w/o", "+", "x"]


def test_ablate_rows_two_and_four_share_initial_loss(tmp_path, toy_data):
    # row 4 starts from all-ones token weights, so its first loss equals a baseline model's
    data, cfg = toy_data
    out = tmp_path / "ab.csv"
    assert main(["ablate", "--data", str(data), "--config", str(cfg), "--out", str(out),
                 "--rows", "2,4", "--iters", "1"]) == EXIT_OK
    rows = list(csv.DictReader(out.read_text().splitlines()))
    assert abs(float(rows[0]["initial_loss"]) - float(rows[1]["initial_loss"])) < 1e-6


def test_ablate_rejects_unknown_row(tmp_path, toy_data):
    data, cfg = toy_data
    assert main(["ablate", "--data", str(data), "--out", str(tmp_path / "x.csv"),
                 "--rows", "1,7"]) == EXIT_USAGE
