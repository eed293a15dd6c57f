from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from mdlsynth.cli import main, strip_meta
from mdlsynth.core import (
    Circuit,
    circuit_unitary,
    cx,
    format_unitary,
    h,
    read_circuit,
    t,
    write_circuit,
)
from mdlsynth.nn import load_model


def run(argv):
    return main(argv)


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    assert "synth" in capsys.readouterr().out


def test_missing_required_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["synth", "--target", "x.circ"])  # no --model
    assert exc.value.code == 2


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_missing_file_is_operational_error(tmp_path):
    rc = main([
        "synth", "--target", str(tmp_path / "nope.circ"),
        "--model", str(tmp_path / "nope.mdlm"), "--trials", "1",
    ])
    assert rc == 1


def test_optimize_subcommand(tmp_path):
    circ = tmp_path / "c.circ"
    out = tmp_path / "o.circ"
    write_circuit(Circuit(1, (h(0), h(0), t(0))), circ)
    assert main(["optimize", "--in", str(circ), "--out", str(out)]) == 0
    assert read_circuit(out).gates == (t(0),)


def test_gen_train_synth_pipeline(tmp_path):
    data = tmp_path / "train.mdld"
    model_path = tmp_path / "model.mdlm"
    metrics = tmp_path / "metrics.csv"
    assert main([
        "gen", "--qubits", "1", "--count", "600", "--t-min", "0", "--t-max", "3",
        "--gate-min", "1", "--gate-max", "8", "--seed", "5", "--out", str(data),
    ]) == 0

    assert main([
        "train", "--data", str(data), "--epochs", "2", "--steps-per-epoch", "60",
        "--hidden", "32,16", "--batch", "64", "--grad-accumulation", "1",
        "--warmup", "30", "--t-max-schedule", "90", "--peak-lr", "2e-3",
        "--replay-buffer", "400", "--stream-per-step", "8",
        "--validation-size", "100", "--seed", "5",
        "--out", str(model_path), "--metrics-csv", str(metrics),
    ]) == 0
    model = load_model(model_path)
    assert model.n_qubits == 1
    with open(metrics) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 and "val_mae" in rows[0]

    target = tmp_path / "target.circ"
    write_circuit(Circuit(1, (h(0), t(0), h(0))), target)
    report = tmp_path / "report.json"
    out_circ = tmp_path / "found.circ"
    assert main([
        "synth", "--target", str(target), "--model", str(model_path),
        "--beam", "6", "--trials", "12", "--threshold", "0.99",
        "--max-steps", "6", "--seed", "3",
        "--out", str(out_circ), "--report", str(report),
    ]) == 0
    payload = json.loads(report.read_text())
    assert set(payload) >= {"success", "gates", "fidelity", "per_trial", "meta"}
    assert payload["success"] is True
    assert payload["fidelity"] >= 0.99
    found = read_circuit(out_circ)
    np.testing.assert_allclose(
        np.abs(np.trace(
            circuit_unitary(found).conj().T
            @ circuit_unitary(Circuit(1, (h(0), t(0), h(0))))
        )),
        2.0,
        atol=1e-6,
    )


def test_synth_not_found_still_exits_zero(tmp_path):
    # an identity model on an adversarial budget: trials=1, max_steps=1
    data = tmp_path / "d.mdld"
    model_path = tmp_path / "m.mdlm"
    main(["gen", "--qubits", "1", "--count", "80", "--t-max", "2",
          "--gate-min", "1", "--gate-max", "6", "--out", str(data)])
    main(["train", "--data", str(data), "--epochs", "1", "--steps-per-epoch", "5",
          "--hidden", "8", "--batch", "16", "--grad-accumulation", "1",
          "--warmup", "0", "--t-max-schedule", "5", "--replay-buffer", "64",
          "--stream-per-step", "4", "--validation-size", "0",
          "--out", str(model_path)])
    target = tmp_path / "target.circ"
    write_circuit(Circuit(1, (h(0), t(0), h(0), t(0), h(0))), target)
    report = tmp_path / "r.json"
    rc = main([
        "synth", "--target", str(target), "--model", str(model_path),
        "--trials", "1", "--max-steps", "1", "--threshold", "0.9999",
        "--report", str(report),
    ])
    assert rc == 0
    assert json.loads(report.read_text())["success"] is False


def test_oracle_subcommand(tmp_path, capsys):
    target = tmp_path / "t.circ"
    write_circuit(Circuit(1, (h(0), t(0))), target)
    out = tmp_path / "witness.circ"
    assert main(["oracle", "--target", str(target), "--max-depth", "3",
                 "--out", str(out)]) == 0
    assert "minimum gate count: 2" in capsys.readouterr().out
    assert len(read_circuit(out)) == 2


def test_metrics_trace(tmp_path):
    circ = tmp_path / "c.circ"
    write_circuit(Circuit(2, (h(0), cx(0, 1))), circ)
    out = tmp_path / "trace.csv"
    assert main(["metrics-trace", "--circuit", str(circ), "--out", str(out)]) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    assert [r["step"] for r in rows] == ["0", "1", "2"]
    assert float(rows[2]["f_avg"]) == pytest.approx(1.0)
    assert float(rows[2]["d_hs"]) == pytest.approx(0.0, abs=1e-9)
    assert float(rows[0]["d_worst"]) > 0


def test_mat_target_roundtrip_via_synth(tmp_path):
    # .mat targets load through the same path as .circ
    data = tmp_path / "d.mdld"
    model_path = tmp_path / "m.mdlm"
    main(["gen", "--qubits", "1", "--count", "100", "--t-max", "1",
          "--gate-min", "1", "--gate-max", "4", "--out", str(data)])
    main(["train", "--data", str(data), "--epochs", "1", "--steps-per-epoch", "10",
          "--hidden", "8", "--batch", "16", "--grad-accumulation", "1",
          "--warmup", "0", "--t-max-schedule", "10", "--replay-buffer", "64",
          "--stream-per-step", "4", "--validation-size", "0",
          "--out", str(model_path)])
    target = tmp_path / "t.mat"
    target.write_text(format_unitary(circuit_unitary(Circuit(1, (h(0),)))))
    report = tmp_path / "r.json"
    assert main(["synth", "--target", str(target), "--model", str(model_path),
                 "--trials", "4", "--beam", "4", "--max-steps", "3",
                 "--report", str(report)]) == 0
    assert json.loads(report.read_text())["success"] is True


def test_strip_meta():
    payload = {"meta": {"t": 1}, "a": [{"meta": 2, "b": 3}], "c": 4}
    assert strip_meta(payload) == {"a": [{"b": 3}], "c": 4}
