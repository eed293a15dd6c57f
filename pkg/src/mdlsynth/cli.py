"""Unified command-line entry point.

Subcommands: ``gen`` (dataset generation), ``train`` (fit the gate-count
regressor), ``synth`` (beam-search synthesis), ``oracle`` (exact
brute-force synthesis), ``optimize`` (peephole pass over a circuit file),
``metrics-trace`` (distance measures along a circuit's synthesis path),
``bench`` (structured / random / budget-sweep harnesses), and
``quickstart`` (end-to-end pipeline at desk scale).

Exit codes: 0 on success (including synthesis-not-found, which is reported
in the JSON), 1 on operational errors, 2 on usage errors. All randomness
derives from ``--seed`` through named substreams, so reports are
reproducible; volatile values (timestamps, wall times) are isolated in each
report's single ``meta`` field. ``MDLSYNTH_OUTDIR`` and
``MDLSYNTH_WORKERS`` override the output directory and worker count.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import _kernels
from ._rng import substream
from .core import (
    Circuit,
    circuit_unitary,
    format_circuit,
    load_target,
    read_circuit,
    residual,
    write_circuit,
)
from .datagen import (
    PHASE_EPS,
    SamplerConfig,
    dataset_stream,
    generate_examples,
    read_dataset,
    stream_examples,
    write_dataset,
)
from .errors import MdlSynthError
from .metrics import hs_distance, identity_fidelity, worst_case_distance
from .nn import MlpModel, TrainConfig, forward, load_model, save_model, train
from .oracle import enumerate_states, exact_mdl
from .bench import (
    budget_sweep,
    emit_bucket_heatmap_svg,
    emit_success_curve_svg,
    random_suite,
    run_random_suite,
    run_structured_suite,
    structured_names,
    write_sweep_csv,
)
from .peephole import optimize as peephole_optimize
from .peephole import t_count
from .search import SearchConfig, synthesize

log = logging.getLogger("mdlsynth")


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def strip_meta(obj):
    """Drop every ``meta`` field; what remains must be deterministic under
    a fixed seed."""
    if isinstance(obj, dict):
        return {k: strip_meta(v) for k, v in obj.items() if k != "meta"}
    if isinstance(obj, list):
        return [strip_meta(v) for v in obj]
    return obj


def _write_report(payload: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _pop_wall_times(rows: list[dict]) -> dict[str, float]:
    """Move per-target wall times out of the deterministic report body."""
    times = {}
    for row in rows:
        times[row["target"]] = row.pop("wall_time")
    return times


# --- subcommands -------------------------------------------------------------


def _sampler_from_args(args: argparse.Namespace) -> SamplerConfig:
    return SamplerConfig(
        n=args.qubits,
        t_count_range=(args.t_min, args.t_max),
        gate_count_range=(args.gate_min, args.gate_max),
        seed=args.seed,
    )


def _cmd_gen(args: argparse.Namespace) -> int:
    cfg = _sampler_from_args(args)
    rng = substream(args.seed, "datagen")
    examples = generate_examples(cfg, args.count, rng)
    write_dataset(examples, args.out, n=args.qubits)
    labels = [ex.label for ex in examples]
    log.info(
        "wrote %d examples to %s (labels: min %d, median %d, max %d)",
        len(examples), args.out, min(labels), int(np.median(labels)), max(labels),
    )
    return 0


def _train_config_from_args(args: argparse.Namespace) -> TrainConfig:
    return TrainConfig(
        epochs=args.epochs,
        steps_per_epoch=args.steps_per_epoch,
        hidden=tuple(int(x) for x in args.hidden.split(",")),
        batch=args.batch,
        grad_accumulation=args.grad_accumulation,
        warmup_steps=args.warmup,
        cosine_t_max=args.t_max_schedule,
        peak_lr=args.peak_lr,
        replay_buffer=args.replay_buffer,
        stream_per_step=args.stream_per_step,
        validation_size=args.validation_size,
        seed=args.seed,
    )


def train_model_from_dataset(
    examples: list, cfg: TrainConfig, n_qubits: int
) -> tuple[MlpModel, list[dict]]:
    """Training entry used by the CLI and quickstart: the last
    ``validation_size`` examples are held out, the rest feed the replay
    buffer as an endless reshuffled stream."""
    if cfg.validation_size and len(examples) > 2 * cfg.validation_size:
        val = examples[-cfg.validation_size :]
        train_set = examples[: -cfg.validation_size]
    else:
        val = None
        train_set = examples
    stream = dataset_stream(train_set, substream(cfg.seed, "training-shuffle", "stream"))
    return train(stream, cfg, n_qubits, validation=val)


def _write_metrics_csv(rows: list[dict], path: Path) -> None:
    fields = ["epoch", "train_mse", "val_mse", "val_mae", "val_r2", "lr"]
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({f: row.get(f, "") for f in fields})


def _cmd_train(args: argparse.Namespace) -> int:
    cfg = _train_config_from_args(args)
    if args.data:
        examples = read_dataset(args.data)
        if not examples:
            raise MdlSynthError(f"{args.data} holds no examples")
        from .datagen import qubits_for_feature_length

        n = qubits_for_feature_length(examples[0].features.size)
        model, rows = train_model_from_dataset(examples, cfg, n)
    else:
        if args.qubits is None:
            raise MdlSynthError("--stream mode needs --qubits")
        sampler = _sampler_from_args(args)
        stream = stream_examples(sampler, substream(args.seed, "datagen"))
        val = generate_examples(
            sampler, cfg.validation_size, substream(args.seed, "validation")
        )
        model, rows = train(stream, cfg, args.qubits, validation=val)
    save_model(model, args.out)
    if args.metrics_csv:
        _write_metrics_csv(rows, Path(args.metrics_csv))
    last = rows[-1] if rows else {}
    log.info(
        "saved model to %s (%d params, final val_mae=%s)",
        args.out, model.parameter_count, last.get("val_mae", "n/a"),
    )
    return 0


def _search_config_from_args(args: argparse.Namespace) -> SearchConfig:
    return SearchConfig(
        beam_width=args.beam,
        max_steps=args.max_steps,
        temperature=args.tau,
        threshold=args.threshold,
        trials=args.trials,
        seed=args.seed,
        permutation_trials=not args.no_permutations,
        inverse_trials=not args.no_inverses,
        workers=args.workers,
    )


def _trial_row(rec) -> dict:
    return {
        "index": rec.index,
        "permutation": list(rec.permutation),
        "inverse": rec.inverse,
        "success": rec.success,
        "gates": rec.gates,
        "steps": rec.steps,
        "fidelity": rec.fidelity,
    }


def _cmd_synth(args: argparse.Namespace) -> int:
    target = load_target(args.target)
    model = load_model(args.model)
    cfg = _search_config_from_args(args)
    result = synthesize(target, model, cfg)
    payload = {
        "meta": {
            "timestamp": _timestamp(),
            "wall_time_seconds": result.wall_time,
        },
        "success": result.success,
        "gates": len(result.circuit) if result.success else None,
        "t_count": t_count(result.circuit) if result.success else None,
        "fidelity": result.fidelity if result.success else None,
        "threshold": cfg.threshold,
        "beam_width": cfg.beam_width,
        "temperature": cfg.temperature,
        "trials_used": result.trials_used,
        "steps_used": result.steps_used,
        "circuit": format_circuit(result.circuit) if result.success else None,
        "per_trial": [_trial_row(r) for r in result.records],
    }
    if args.report:
        _write_report(payload, Path(args.report))
    if result.success:
        if args.out:
            write_circuit(result.circuit, args.out)
        log.info(
            "solved: %d gates (T-count %d) at fidelity %.6f after %d trials",
            len(result.circuit), t_count(result.circuit),
            result.fidelity, result.trials_used,
        )
    else:
        log.info("no circuit found within %d trials", result.trials_used)
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    target = load_target(args.target)
    hit = exact_mdl(target, args.max_depth, args.threshold)
    if hit is None:
        print(f"not found: minimum gate count exceeds {args.max_depth} "
              f"at threshold {args.threshold}")
        return 0
    print(f"minimum gate count: {hit.depth}")
    sys.stdout.write(format_circuit(hit.circuit))
    if args.out:
        write_circuit(hit.circuit, args.out)
    return 0


def _cmd_optimize(args: argparse.Namespace) -> int:
    circuit = read_circuit(args.infile)
    optimized = peephole_optimize(circuit)
    text = format_circuit(optimized)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    log.info("%d gates -> %d gates", len(circuit), len(optimized))
    return 0


def _predicted_mdl(model: MlpModel, res: np.ndarray) -> float:
    pad = 2 ** (model.n_qubits - (res.shape[0].bit_length() - 1))
    features = _kernels.padded_features(res, pad, PHASE_EPS)
    return float(forward(model, features[None, :])[0])


def _cmd_metrics_trace(args: argparse.Namespace) -> int:
    circuit = read_circuit(args.circuit)
    model = load_model(args.model) if args.model else None
    target = circuit_unitary(circuit)
    eye = np.eye(target.shape[0])
    rows = []
    for step in range(len(circuit) + 1):
        res = residual(circuit_unitary(circuit.prefix(step)), target)
        dim = res.shape[0]
        rows.append(
            {
                "step": step,
                "d_hs": hs_distance(res, eye),
                "d_worst": worst_case_distance(res, eye),
                "f_avg": identity_fidelity(res),
                "predicted_mdl": _predicted_mdl(model, res) if model else "",
            }
        )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["step", "d_hs", "d_worst", "f_avg", "predicted_mdl"]
        )
        writer.writeheader()
        writer.writerows(rows)
    log.info("wrote %d trace rows to %s", len(rows), out)
    return 0


def _cmd_bench_structured(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    names = args.names.split(",") if args.names else [
        n for n in structured_names(model.n_qubits)
        if int(n.rsplit("-", 1)[1]) <= model.n_qubits
    ]
    cfg = _search_config_from_args(args)
    t0 = time.perf_counter()
    report = run_structured_suite(
        names, model, cfg, stop_at_reference=not args.full_budget
    )
    times = _pop_wall_times(report["per_target"])
    report["meta"] = {
        "timestamp": _timestamp(),
        "total_seconds": time.perf_counter() - t0,
        "per_target_seconds": times,
    }
    _write_report(report, Path(args.out))
    for row in report["per_target"]:
        log.info(
            "%s: %s (%s gates, reference %s)",
            row["target"],
            "solved" if row["success"] else "unsolved",
            row["gates"],
            row["reference_gates"],
        )
    return 0


def _random_suite_from_args(args: argparse.Namespace):
    return random_suite(
        n=args.qubits,
        t_counts=list(range(args.t_min, args.t_max + 1)),
        per_bucket=args.per_bucket,
        gate_count_range=(args.gate_min, args.gate_max),
        seed=args.seed,
    )


def _cmd_bench_random(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    targets = _random_suite_from_args(args)
    cfg = _search_config_from_args(args)
    t0 = time.perf_counter()
    report = run_random_suite(targets, model, cfg)
    times = _pop_wall_times(report["per_target"])
    report.pop("per_trial_success")
    report["meta"] = {
        "timestamp": _timestamp(),
        "total_seconds": time.perf_counter() - t0,
        "per_target_seconds": times,
    }
    _write_report(report, Path(args.out))
    if args.emit_svg:
        emit_bucket_heatmap_svg(report, Path(args.out).with_suffix(".svg"))
    log.info(
        "solved %d/%d targets (%.1f%%)",
        report["successes"], report["targets"], 100 * report["success_rate"],
    )
    return 0


def _cmd_bench_sweep(args: argparse.Namespace) -> int:
    budgets = sorted(int(b) for b in args.budgets.split(","))
    model = load_model(args.model)
    targets = _random_suite_from_args(args)
    cfg = replace(_search_config_from_args(args), trials=budgets[-1])
    report = run_random_suite(targets, model, cfg)
    rows = budget_sweep(report["per_trial_success"], budgets)
    write_sweep_csv(rows, args.out)
    if args.emit_svg:
        emit_success_curve_svg(rows, Path(args.out).with_suffix(".svg"))
    for row in rows:
        log.info(
            "budget %4d: %.3f success [%.3f, %.3f] (99%% CI)",
            row["budget"], row["success_rate"], row["ci99_low"], row["ci99_high"],
        )
    return 0


# --- quickstart ---------------------------------------------------------------

# desk-scale profiles keyed by qubit count; chosen to finish in minutes on a
# small CPU while still producing a model that actually guides the search
_QUICKSTART_PROFILES = {
    1: dict(
        dataset=3000, hidden=(64, 32), epochs=4, steps_per_epoch=150,
        batch=128, grad_accumulation=2, warmup=100, t_max_schedule=500,
        peak_lr=1e-3, replay_buffer=1500, validation_size=512,
        sampler_t=(0, 3), sampler_gates=(1, 8),
        suite_t=(0, 2), per_bucket=4, trials=16, max_steps=8, threshold=0.9,
    ),
    2: dict(
        dataset=12000, hidden=(256, 128, 64), epochs=6, steps_per_epoch=250,
        batch=256, grad_accumulation=2, warmup=300, t_max_schedule=1200,
        peak_lr=1e-3, replay_buffer=6000, validation_size=1024,
        sampler_t=(0, 6), sampler_gates=(3, 20),
        suite_t=(0, 4), per_bucket=5, trials=30, max_steps=18, threshold=0.9,
    ),
    3: dict(
        dataset=16000, hidden=(384, 192, 96), epochs=6, steps_per_epoch=300,
        batch=256, grad_accumulation=2, warmup=300, t_max_schedule=1500,
        peak_lr=1e-3, replay_buffer=6000, validation_size=1024,
        sampler_t=(0, 6), sampler_gates=(3, 24),
        suite_t=(0, 4), per_bucket=4, trials=40, max_steps=20, threshold=0.9,
    ),
}


def run_quickstart(
    qubits: int,
    seed: int,
    outdir: Path,
    trials: int | None = None,
    workers: int = 1,
) -> dict:
    """Generate data, train a small model, run the random and structured
    suites plus a nested budget sweep, and write every artifact under
    ``outdir``. Returns the master report (also written as
    ``quickstart_report.json``)."""
    if qubits not in _QUICKSTART_PROFILES:
        raise MdlSynthError(f"quickstart profiles cover n in {sorted(_QUICKSTART_PROFILES)}")
    profile = _QUICKSTART_PROFILES[qubits]
    outdir.mkdir(parents=True, exist_ok=True)
    stage_seconds: dict[str, float] = {}
    t_start = time.perf_counter()

    # data
    t0 = time.perf_counter()
    sampler = SamplerConfig(
        n=qubits,
        t_count_range=profile["sampler_t"],
        gate_count_range=profile["sampler_gates"],
        seed=seed,
    )
    examples = generate_examples(
        sampler, profile["dataset"] + profile["validation_size"],
        substream(seed, "datagen"),
    )
    write_dataset(examples, outdir / "train.mdld", n=qubits)
    stage_seconds["gen"] = time.perf_counter() - t0

    # training
    t0 = time.perf_counter()
    tcfg = TrainConfig(
        epochs=profile["epochs"],
        steps_per_epoch=profile["steps_per_epoch"],
        hidden=profile["hidden"],
        batch=profile["batch"],
        grad_accumulation=profile["grad_accumulation"],
        warmup_steps=profile["warmup"],
        cosine_t_max=profile["t_max_schedule"],
        peak_lr=profile["peak_lr"],
        replay_buffer=profile["replay_buffer"],
        validation_size=profile["validation_size"],
        seed=seed,
    )
    model, metrics_rows = train_model_from_dataset(examples, tcfg, qubits)
    save_model(model, outdir / "model.mdlm")
    _write_metrics_csv(metrics_rows, outdir / "train_metrics.csv")
    stage_seconds["train"] = time.perf_counter() - t0

    n_trials = trials if trials is not None else profile["trials"]
    scfg = SearchConfig(
        beam_width=10,
        max_steps=profile["max_steps"],
        temperature=1.0,
        threshold=profile["threshold"],
        trials=n_trials,
        seed=seed,
        workers=workers,
    )

    # random suite + nested sweep
    t0 = time.perf_counter()
    suite = random_suite(
        n=qubits,
        t_counts=list(range(profile["suite_t"][0], profile["suite_t"][1] + 1)),
        per_bucket=profile["per_bucket"],
        gate_count_range=profile["sampler_gates"],
        seed=seed + 1,
    )
    random_report = run_random_suite(suite, model, scfg)
    per_trial = random_report.pop("per_trial_success")
    budgets = sorted({1, max(2, n_trials // 8), max(3, n_trials // 3), n_trials})
    sweep_rows = budget_sweep(per_trial, budgets)
    write_sweep_csv(sweep_rows, outdir / "sweep.csv")
    random_times = _pop_wall_times(random_report["per_target"])
    random_report["meta"] = {"per_target_seconds": random_times}
    _write_report(random_report, outdir / "random_report.json")
    stage_seconds["random-suite"] = time.perf_counter() - t0

    # structured suite (n >= 2); for one qubit, solve the full depth-4 space
    t0 = time.perf_counter()
    if qubits >= 2:
        names = [n for n in structured_names(qubits) if n.endswith(f"-{qubits}")]
        structured_report = run_structured_suite(names, model, scfg)
        structured_times = _pop_wall_times(structured_report["per_target"])
        structured_report["meta"] = {"per_target_seconds": structured_times}
    else:
        structured_report = _exhaustive_1q_report(model, scfg)
    _write_report(structured_report, outdir / "structured_report.json")
    stage_seconds["structured-suite"] = time.perf_counter() - t0

    report = {
        "meta": {
            "timestamp": _timestamp(),
            "total_seconds": time.perf_counter() - t_start,
            "stage_seconds": stage_seconds,
        },
        "config": {
            "qubits": qubits,
            "seed": seed,
            "trials": n_trials,
            "profile": {
                k: list(v) if isinstance(v, tuple) else v for k, v in profile.items()
            },
        },
        "training": {
            "examples": len(examples),
            "parameters": model.parameter_count,
            "final_metrics": metrics_rows[-1] if metrics_rows else {},
        },
        "random": strip_meta(
            {k: v for k, v in random_report.items() if k != "per_target"}
        ),
        "structured": strip_meta(structured_report),
        "sweep": sweep_rows,
    }
    _write_report(report, outdir / "quickstart_report.json")
    return report


def _exhaustive_1q_report(model: MlpModel, cfg: SearchConfig) -> dict:
    """Solve every distinct single-qubit unitary of depth <= 4."""
    rows = []
    for hit in enumerate_states(1, 4):
        target = circuit_unitary(hit.circuit)
        res = synthesize(
            target, model, replace(cfg, stop_when_gates_leq=hit.depth)
        )
        rows.append(
            {
                "target": f"depth{hit.depth}-{format_circuit(hit.circuit).strip()}",
                "exact_depth": hit.depth,
                "success": res.success,
                "gates": len(res.circuit) if res.success else None,
                "optimal": res.success and len(res.circuit) == hit.depth,
            }
        )
    return {
        "suite": "exhaustive-1q-depth4",
        "targets": len(rows),
        "solved": sum(1 for r in rows if r["success"]),
        "solved_optimally": sum(1 for r in rows if r["optimal"]),
        "per_target": rows,
    }


def _cmd_quickstart(args: argparse.Namespace) -> int:
    report = run_quickstart(
        qubits=args.qubits,
        seed=args.seed,
        outdir=Path(args.outdir),
        trials=args.trials,
        workers=args.workers,
    )
    rnd = report["random"]
    log.info(
        "quickstart done in %.1fs: random suite %d/%d solved",
        report["meta"]["total_seconds"], rnd["successes"], rnd["targets"],
    )
    return 0


# --- parser -------------------------------------------------------------------


def _add_sampler_flags(p: argparse.ArgumentParser, qubits_required: bool = True) -> None:
    p.add_argument("--qubits", type=int, required=qubits_required,
                   help="register size (1-5)")
    p.add_argument("--t-min", type=int, default=0)
    p.add_argument("--t-max", type=int, default=20)
    p.add_argument("--gate-min", type=int, default=3)
    p.add_argument("--gate-max", type=int, default=60)


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--beam", type=int, default=10, help="beam width")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--tau", type=float, default=1.0, help="selection temperature")
    p.add_argument("--threshold", type=float, default=0.99,
                   help="average-fidelity success threshold")
    p.add_argument("--max-steps", type=int, default=60)
    p.add_argument("--no-permutations", action="store_true",
                   help="disable qubit-permutation trial variants")
    p.add_argument("--no-inverses", action="store_true",
                   help="disable adjoint-target trial variants")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdlsynth",
        description="Clifford+T unitary synthesis with a learned "
                    "gate-count heuristic",
    )
    parser.add_argument("--log-level", default="info",
                        choices=["debug", "info", "warning", "error"])
    parser.add_argument(
        "--workers", type=int,
        default=int(os.environ.get("MDLSYNTH_WORKERS", "1")),
        help="parallel workers for search trials",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a training dataset")
    _add_sampler_flags(p)
    p.add_argument("--count", type=int, required=True, help="examples to emit")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("train", help="train the gate-count regressor")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="dataset file from 'gen'")
    src.add_argument("--stream", action="store_true",
                     help="generate examples on the fly")
    _add_sampler_flags(p, qubits_required=False)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--steps-per-epoch", type=int, default=2000)
    p.add_argument("--hidden", default="1024,512,128")
    p.add_argument("--batch", type=int, default=256)
    p.add_argument("--grad-accumulation", type=int, default=5)
    p.add_argument("--warmup", type=int, default=2000)
    p.add_argument("--t-max-schedule", type=int, default=20000)
    p.add_argument("--peak-lr", type=float, default=5e-4)
    p.add_argument("--replay-buffer", type=int, default=6000)
    p.add_argument("--stream-per-step", type=int, default=64)
    p.add_argument("--validation-size", type=int, default=4096)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--metrics-csv")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("synth", help="synthesize a target unitary")
    p.add_argument("--target", required=True, help=".circ or .mat file")
    p.add_argument("--model", required=True)
    _add_search_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the found circuit here")
    p.add_argument("--report", help="write the JSON report here")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("oracle", help="exact minimum gate count by "
                                      "exhaustive search")
    p.add_argument("--target", required=True)
    p.add_argument("--max-depth", type=int, required=True)
    p.add_argument("--threshold", type=float, default=0.99)
    p.add_argument("--out", help="write the witness circuit here")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("optimize", help="peephole-optimize a circuit file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("metrics-trace",
                       help="distance measures along a circuit's prefix path")
    p.add_argument("--circuit", required=True)
    p.add_argument("--model", help="optional model for predicted gate counts")
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(func=_cmd_metrics_trace)

    bench = sub.add_parser("bench", help="reproduction harnesses")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)

    p = bench_sub.add_parser("structured", help="named structured targets")
    p.add_argument("--model", required=True)
    p.add_argument("--names", help="comma-separated subset of targets")
    p.add_argument("--full-budget", action="store_true",
                   help="never stop early at the reference gate count")
    _add_search_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bench_structured)

    p = bench_sub.add_parser("random", help="random-target success rates")
    p.add_argument("--model", required=True)
    _add_sampler_flags(p)
    p.add_argument("--per-bucket", type=int, default=20)
    _add_search_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--emit-svg", action="store_true")
    p.set_defaults(func=_cmd_bench_random)

    p = bench_sub.add_parser("sweep", help="success rate vs trial budget")
    p.add_argument("--model", required=True)
    p.add_argument("--budgets", default="1,5,25,100",
                   help="ascending comma-separated trial budgets")
    _add_sampler_flags(p)
    p.add_argument("--per-bucket", type=int, default=20)
    _add_search_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--emit-svg", action="store_true")
    p.set_defaults(func=_cmd_bench_sweep)

    p = sub.add_parser("quickstart", help="end-to-end desk-scale pipeline")
    p.add_argument("--qubits", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, help="override the profile's budget")
    p.add_argument(
        "--outdir",
        default=os.environ.get("MDLSYNTH_OUTDIR", "quickstart-out"),
    )
    p.set_defaults(func=_cmd_quickstart)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level.upper()),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except MdlSynthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
