import json

import numpy as np
import pytest

from abmatch.cli import main
from abmatch.data import load_dataset


def run_cli(*argv):
    return main(list(argv))


def test_gen_synth_writes_dataset(tmp_path, capsys):
    out = tmp_path / "ds.jsonl"
    code = run_cli("gen-synth", "--n", "4", "--d", "3", "--count", "20",
                   "--seed", "1", "--noise", "0.1", "--out", str(out))
    assert code == 0
    ds = load_dataset(out)
    assert len(ds) == 20 and ds.instances[0].n == 4
    manifest = json.loads((tmp_path / "ds.jsonl.manifest.json").read_text())
    assert manifest["command"] == "gen-synth"
    assert manifest["seed"] == 1
    assert len(manifest["dataset_hash"]) == 64


def test_gen_synth_deterministic(tmp_path):
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    for out in (a, b):
        assert run_cli("gen-synth", "--n", "4", "--d", "3", "--count", "10",
                       "--seed", "9", "--noise", "0.2", "--out", str(out)) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_synth_missing_out_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        run_cli("gen-synth", "--n", "4", "--d", "3", "--count", "5", "--seed", "1")
    assert exc.value.code == 2


def test_train_and_eval_roundtrip(tmp_path, capsys):
    data = tmp_path / "ds.jsonl"
    run_cli("gen-synth", "--n", "5", "--d", "4", "--count", "40", "--seed", "2",
            "--noise", "0", "--out", str(data))
    model = tmp_path / "m.json"
    assert run_cli("train", "--data", str(data), "--model", "abm",
                   "--epochs", "8", "--seed", "0", "--out", str(model)) == 0
    capsys.readouterr()
    assert run_cli("eval", "--model", str(model), "--data", str(data)) == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("hamming_rate=")
    rate = float(line.split()[0].split("=")[1])
    assert rate <= 0.05


def test_train_ssvm_model_kind(tmp_path):
    data = tmp_path / "ds.jsonl"
    run_cli("gen-synth", "--n", "4", "--d", "3", "--count", "20", "--seed", "3",
            "--noise", "0", "--out", str(data))
    model = tmp_path / "m.json"
    assert run_cli("train", "--data", str(data), "--model", "ssvm",
                   "--epochs", "5", "--seed", "0", "--out", str(model)) == 0
    doc = json.loads(model.read_text())
    assert doc["model_kind"] == "ssvm"


def test_train_epochs_zero_usage_error(tmp_path):
    data = tmp_path / "ds.jsonl"
    run_cli("gen-synth", "--n", "4", "--d", "3", "--count", "5", "--seed", "4",
            "--noise", "0", "--out", str(data))
    with pytest.raises(SystemExit) as exc:
        run_cli("train", "--data", str(data), "--epochs", "0",
                "--out", str(data.parent / "m.json"))
    assert exc.value.code == 2


def test_train_unreadable_data_is_runtime_error(tmp_path):
    assert run_cli("train", "--data", str(tmp_path / "nope.jsonl"),
                   "--out", str(tmp_path / "m.json")) == 1


def test_active_sim_csv_shape_and_determinism(tmp_path):
    data = tmp_path / "ds.jsonl"
    run_cli("gen-synth", "--n", "4", "--d", "3", "--count", "40", "--seed", "5",
            "--noise", "0.3", "--out", str(data))
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    for out in (a, b):
        code = run_cli("active-sim", "--data", str(data), "--strategy", "random",
                       "--rounds", "3", "--splits", "2", "--seed", "7",
                       "--initial-epochs", "2", "--round-epochs", "1",
                       "--out", str(out))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().strip().split("\n")
    assert lines[0] == "strategy,split_seed,round,n_labeled,hamming_rate,mean_support_size"
    assert len(lines) == 1 + 2 * 4  # header + splits * (rounds+1)
    seeds = {line.split(",")[1] for line in lines[1:]}
    assert len(seeds) == 2


def test_ingest_mot_command(tmp_path, capsys):
    gt = tmp_path / "gt.txt"
    rows = []
    for frame, count in ((1, 3), (2, 2), (3, 3)):
        for k in range(count):
            rows.append(f"{frame},{k + 1},{10 * k},{5 * k},12,30,1,-1,-1")
    gt.write_text("\n".join(rows) + "\n")
    out = tmp_path / "mot.jsonl"
    assert run_cli("ingest-mot", "--gt", str(gt), "--out", str(out)) == 0
    ds = load_dataset(out)
    assert len(ds) == 2
    assert all(x.n == 6 for x in ds)


def test_eval_dimension_mismatch_is_runtime_error(tmp_path):
    data = tmp_path / "ds.jsonl"
    run_cli("gen-synth", "--n", "4", "--d", "3", "--count", "10", "--seed", "6",
            "--noise", "0", "--out", str(data))
    other = tmp_path / "other.jsonl"
    run_cli("gen-synth", "--n", "4", "--d", "5", "--count", "10", "--seed", "6",
            "--noise", "0", "--out", str(other))
    model = tmp_path / "m.json"
    run_cli("train", "--data", str(data), "--epochs", "2", "--out", str(model))
    assert run_cli("eval", "--model", str(model), "--data", str(other)) == 1
