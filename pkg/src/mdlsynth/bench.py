"""Reproduction harnesses: structured-circuit suite, random-target success
curves, and the trial-budget sweep.

Structured targets are built from canonical constructions: GHZ (H then a CX
fan-out), linear cluster states (H on every qubit, CZ between neighbors,
with CZ expanded as H-CX-H over the alphabet), phase gadgets (CX ladder, T,
reversed ladder), and the five-qubit perfect-code encoder. The encoder
circuit is synthesized at call time by a small stabilizer-frame reduction:
track how H/S/CX conjugate Pauli operators, find a circuit W mapping the
code's stabilizer generators and logical operators to the trivial frame
(Z_0, X_0, Z_1..Z_4), and return W's adjoint. The result is verified
against the stabilizer conditions by the test suite.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path
from statistics import NormalDist

import numpy as np

from ._rng import derive_seed, substream
from .core import Circuit, Gate, circuit_unitary, cx, h, s, t
from .datagen import SamplerConfig, sample_circuit
from .nn import MlpModel
from .peephole import optimize, t_count
from .search import SearchConfig, SynthesisResult, adjoint_circuit, synthesize

# Known minimum gate counts for the structured families (the perfect-code
# entry is the best count observed at full trial budgets, not a proven
# minimum).
REFERENCE_GATES = {
    "ghz-2": 2,
    "ghz-3": 3,
    "ghz-4": 4,
    "ghz-5": 5,
    "cluster-2": 3,
    "cluster-3": 5,
    "cluster-4": 7,
    "cluster-5": 9,
    "phase-gadget-2": 3,
    "phase-gadget-3": 5,
    "phase-gadget-4": 7,
    "phase-gadget-5": 9,
    "perfect-code-5": 14,
}


@dataclass(frozen=True)
class StructuredTarget:
    name: str
    n: int
    circuit: Circuit
    reference_gates: int | None = None


def ghz_circuit(n: int) -> Circuit:
    """H on qubit 0, then CX(0, i) fan-out: n gates."""
    gates = [h(0)] + [cx(0, q) for q in range(1, n)]
    return Circuit(n, tuple(gates))


def cluster_circuit(n: int) -> Circuit:
    """Linear cluster state: H everywhere, CZ between neighbors, CZ(a, b)
    expanded as (H b, CX a b, H b)."""
    gates = [h(q) for q in range(n)]
    for q in range(n - 1):
        gates += [h(q + 1), cx(q, q + 1), h(q + 1)]
    return Circuit(n, tuple(gates))


def phase_gadget_circuit(n: int) -> Circuit:
    """CX ladder onto the last qubit, T there, then the reversed ladder."""
    down = [cx(q, q + 1) for q in range(n - 1)]
    return Circuit(n, tuple(down + [t(n - 1)] + down[::-1]))


# --- five-qubit perfect code ------------------------------------------------

# cyclic XZZXI stabilizer generators; leftmost letter is qubit 0
PERFECT_CODE_STABILIZERS = ("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ")
PERFECT_CODE_LOGICAL_Z = "ZZZZZ"
PERFECT_CODE_LOGICAL_X = "XXXXX"


@dataclass
class _Pauli:
    """i^phase * prod_q X_q^{x bit} Z_q^{z bit} on n qubits, with x/z as
    bitmasks (bit q = 1 << q) and phase mod 4."""

    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    @classmethod
    def from_string(cls, label: str) -> "_Pauli":
        p = cls(len(label))
        for q, ch in enumerate(label):
            bit = 1 << q
            if ch == "X":
                p.x |= bit
            elif ch == "Z":
                p.z |= bit
            elif ch == "Y":  # Y = i X Z
                p.x |= bit
                p.z |= bit
                p.phase = (p.phase + 1) % 4
            elif ch != "I":
                raise ValueError(f"bad Pauli letter {ch!r}")
        return p

    def bits(self, q: int) -> tuple[int, int]:
        bit = 1 << q
        return (1 if self.x & bit else 0, 1 if self.z & bit else 0)

    def conjugate_by(self, gate: Gate) -> None:
        """Replace P by M(g) P M(g)^dagger."""
        if gate.kind == "H":
            bit = 1 << gate.qubits[0]
            xq, zq = bool(self.x & bit), bool(self.z & bit)
            if xq != zq:
                self.x ^= bit
                self.z ^= bit
            elif xq and zq:
                self.phase = (self.phase + 2) % 4
        elif gate.kind == "S":
            bit = 1 << gate.qubits[0]
            if self.x & bit:
                self.z ^= bit
                self.phase = (self.phase + 1) % 4
        elif gate.kind == "T":
            raise ValueError("T is not Clifford; cannot conjugate a Pauli")
        else:  # CX: X_c -> X_c X_t, Z_t -> Z_c Z_t, no phase in this convention
            cbit = 1 << gate.qubits[0]
            tbit = 1 << gate.qubits[1]
            if self.x & cbit:
                self.x ^= tbit
            if self.z & tbit:
                self.z ^= cbit

    def is_z_on(self, q: int) -> bool:
        return self.phase == 0 and self.x == 0 and self.z == (1 << q)

    def is_x_on(self, q: int) -> bool:
        return self.phase == 0 and self.z == 0 and self.x == (1 << q)


class _FrameReducer:
    """Builds a Clifford circuit W conjugating a list of target Paulis to
    the trivial frame; the encoder is then W's adjoint."""

    def __init__(self, rows: list[_Pauli]):
        self.rows = rows
        self.n = rows[0].n
        self.gates: list[Gate] = []

    def emit(self, gate: Gate) -> None:
        self.gates.append(gate)
        for row in self.rows:
            row.conjugate_by(gate)

    def emit_pauli_x(self, q: int) -> None:
        for g in (h(q), s(q), s(q), h(q)):
            self.emit(g)

    def emit_pauli_z(self, q: int) -> None:
        for g in (s(q), s(q)):
            self.emit(g)

    def _to_z_component(self, row: _Pauli, qubits: range) -> None:
        for q in qubits:
            xq, zq = row.bits(q)
            if xq and zq:
                self.emit(s(q))
            if row.bits(q)[0]:
                self.emit(h(q))

    def reduce_row_to_z(self, row: _Pauli, pivot: int, qubits: range) -> None:
        """Collapse ``row``'s components on ``qubits`` to a single Z_pivot
        (sign not yet fixed; components on earlier pivots untouched)."""
        self._to_z_component(row, qubits)
        support = [q for q in qubits if row.bits(q)[1]]
        if not support:
            raise AssertionError("row became trivial; generators not independent")
        if pivot not in support:
            self.emit(cx(pivot, support[0]))
            support.append(pivot)
        for q in support:
            if q != pivot:
                self.emit(cx(q, pivot))

    def finish_z_row(self, row: _Pauli, pivot: int) -> None:
        if row.phase:
            self.emit_pauli_x(pivot)
        if not row.is_z_on(pivot):
            raise AssertionError(f"row reduction to Z_{pivot} failed: {row}")

    def reduce_row_to_x(self, row: _Pauli, pivot: int) -> None:
        """Turn ``row`` (anticommuting with Z_pivot) into X_pivot with gates
        that fix Z_pivot."""
        if row.bits(pivot)[1]:
            self.emit(s(pivot))
        for q in range(self.n):
            if q == pivot:
                continue
            xq, zq = row.bits(q)
            if xq and zq:
                self.emit(s(q))
            elif zq:
                self.emit(h(q))
            if row.bits(q)[0]:
                self.emit(cx(pivot, q))
        if row.phase:
            self.emit_pauli_z(pivot)
        if not row.is_x_on(pivot):
            raise AssertionError(f"row reduction to X_{pivot} failed: {row}")

    def clear_fixed_z(self, row: _Pauli, pivot: int) -> None:
        """Remove Z components on already-fixed pivots (control-side CX
        leaves the fixed Z rows alone)."""
        for q in range(pivot):
            if row.bits(q)[1]:
                self.emit(cx(q, pivot))


def encoder_from_frame(
    stabilizers: tuple[str, ...], logical_z: str, logical_x: str
) -> Circuit:
    """Encoding circuit E with E Z_0 E† = logical Z, E X_0 E† = logical X,
    and E Z_i E† = stabilizer i for i = 1..n-1 (logical input on qubit 0,
    ancillas in |0>)."""
    rows = [_Pauli.from_string(logical_z), _Pauli.from_string(logical_x)]
    rows += [_Pauli.from_string(sgen) for sgen in stabilizers]
    n = rows[0].n
    if len(rows) != n + 1:
        raise ValueError("need n-1 stabilizers plus the logical pair")
    red = _FrameReducer(rows)
    red.reduce_row_to_z(rows[0], 0, range(n))
    red.finish_z_row(rows[0], 0)
    red.reduce_row_to_x(rows[1], 0)
    for i, row in enumerate(rows[2:], start=1):
        red.reduce_row_to_z(row, i, range(i, n))
        red.clear_fixed_z(row, i)
        red.finish_z_row(row, i)
    w = Circuit(n, tuple(red.gates))
    return optimize(adjoint_circuit(w))


def perfect_code_circuit() -> Circuit:
    """Encoder for the [[5,1,3]] code (logical input on qubit 0)."""
    return encoder_from_frame(
        PERFECT_CODE_STABILIZERS, PERFECT_CODE_LOGICAL_Z, PERFECT_CODE_LOGICAL_X
    )


def structured_names(max_qubits: int = 5) -> list[str]:
    names = []
    for n in range(2, max_qubits + 1):
        names += [f"ghz-{n}", f"cluster-{n}", f"phase-gadget-{n}"]
    if max_qubits >= 5:
        names.append("perfect-code-5")
    return names


def build_structured(name: str) -> StructuredTarget:
    """Reference circuit for a named structured target."""
    if name == "perfect-code-5":
        circuit = perfect_code_circuit()
        return StructuredTarget(name, 5, circuit, REFERENCE_GATES.get(name))
    try:
        family, n_str = name.rsplit("-", 1)
        n = int(n_str)
    except ValueError:
        raise ValueError(f"unknown structured target {name!r}") from None
    builders = {
        "ghz": ghz_circuit,
        "cluster": cluster_circuit,
        "phase-gadget": phase_gadget_circuit,
    }
    if family not in builders or not 2 <= n <= 5:
        raise ValueError(f"unknown structured target {name!r}")
    return StructuredTarget(name, n, builders[family](n), REFERENCE_GATES.get(name))


# --- suites and reports -----------------------------------------------------


@dataclass(frozen=True)
class SuiteTarget:
    name: str
    n: int
    t_count: int
    circuit: Circuit  # a known (not necessarily minimal) implementation


def random_suite(
    n: int,
    t_counts: list[int],
    per_bucket: int,
    gate_count_range: tuple[int, int] = (3, 60),
    seed: int = 0,
) -> list[SuiteTarget]:
    """Rejection-sampled targets, ``per_bucket`` per T-count, on disjoint
    derived seed streams."""
    targets = []
    for k in t_counts:
        cfg = SamplerConfig(
            n=n, t_count_range=(k, k), gate_count_range=gate_count_range, seed=seed
        )
        for i in range(per_bucket):
            rng = substream(seed, "trial-scheduling", "bucket", k, i)
            circuit = sample_circuit(cfg, rng)
            targets.append(SuiteTarget(f"k{k}-{i:03d}", n, k, circuit))
    return targets


def _result_row(name: str, k: int, res: SynthesisResult) -> dict:
    return {
        "target": name,
        "t_count_bucket": k,
        "success": res.success,
        "gates": len(res.circuit) if res.success else None,
        "solution_t_count": t_count(res.circuit) if res.success else None,
        "fidelity": res.fidelity if res.success else None,
        "trials_used": res.trials_used,
        "steps_used": res.steps_used,
        "wall_time": res.wall_time,
    }


def run_random_suite(
    targets: list[SuiteTarget], model: MlpModel, cfg: SearchConfig
) -> dict:
    """Synthesize every suite target; returns per-target rows, per-bucket
    aggregates, and the raw per-trial success records for budget sweeps."""
    rows = []
    per_trial: list[list[bool]] = []
    buckets: dict[int, list[bool]] = {}
    for idx, target in enumerate(targets):
        tcfg = _per_target_cfg(cfg, idx)
        res = synthesize(circuit_unitary(target.circuit), model, tcfg)
        rows.append(_result_row(target.name, target.t_count, res))
        per_trial.append([r.success for r in res.records])
        buckets.setdefault(target.t_count, []).append(res.success)
    aggregates = [
        {
            "t_count_bucket": k,
            "targets": len(v),
            "successes": sum(v),
            "success_rate": sum(v) / len(v),
        }
        for k, v in sorted(buckets.items())
    ]
    total = len(rows)
    solved = sum(1 for r in rows if r["success"])
    return {
        "threshold": cfg.threshold,
        "trials": cfg.trials,
        "beam_width": cfg.beam_width,
        "targets": total,
        "successes": solved,
        "success_rate": solved / total if total else 0.0,
        "per_target": rows,
        "per_bucket": aggregates,
        "per_trial_success": per_trial,
    }


def _per_target_cfg(cfg: SearchConfig, index: int) -> SearchConfig:
    """Each target gets its own derived seed so buckets stay decorrelated."""
    return replace(cfg, seed=derive_seed(cfg.seed, "target", index))


def run_structured_suite(
    names: list[str],
    model: MlpModel,
    cfg: SearchConfig,
    stop_at_reference: bool = True,
) -> dict:
    """Synthesize the named structured targets. When ``stop_at_reference``
    is set, a target's trial loop stops early once a solution matches its
    best known count (the remaining budget cannot improve on it)."""
    rows = []
    for idx, name in enumerate(names):
        target = build_structured(name)
        optimized_builder = len(optimize(target.circuit))
        best_known = min(optimized_builder, target.reference_gates or optimized_builder)
        tcfg = _per_target_cfg(cfg, idx)
        if stop_at_reference:
            tcfg = replace(tcfg, stop_when_gates_leq=best_known)
        res = synthesize(circuit_unitary(target.circuit), model, tcfg)
        row = _result_row(name, t_count(target.circuit), res)
        row.update(
            reference_gates=target.reference_gates,
            optimized_builder_gates=optimized_builder,
            builder_gates=len(target.circuit),
        )
        rows.append(row)
    return {
        "threshold": cfg.threshold,
        "trials": cfg.trials,
        "per_target": rows,
    }


def wilson_interval(successes: int, total: int, confidence: float = 0.99) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if total == 0:
        return (0.0, 1.0)
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    phat = successes / total
    denom = 1.0 + z**2 / total
    center = (phat + z**2 / (2 * total)) / denom
    half = (z / denom) * np.sqrt(phat * (1 - phat) / total + z**2 / (4 * total**2))
    return (max(0.0, center - half), min(1.0, center + half))


def budget_sweep(per_trial_success: list[list[bool]], budgets: list[int]) -> list[dict]:
    """Success rate at each trial budget, from nested per-trial records of a
    single full-budget run (budget b succeeds iff any of the first b trials
    did, so rates are monotone by construction)."""
    if sorted(budgets) != list(budgets):
        raise ValueError("budgets must be ascending")
    rows = []
    total = len(per_trial_success)
    for budget in budgets:
        successes = sum(1 for flags in per_trial_success if any(flags[:budget]))
        lo, hi = wilson_interval(successes, total)
        rows.append(
            {
                "budget": budget,
                "targets": total,
                "successes": successes,
                "success_rate": successes / total if total else 0.0,
                "ci99_low": lo,
                "ci99_high": hi,
            }
        )
    return rows


def write_sweep_csv(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def emit_success_curve_svg(rows: list[dict], path: str | Path) -> None:
    """Static success-rate-vs-budget curve with its confidence band."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    budgets = [r["budget"] for r in rows]
    rates = [r["success_rate"] for r in rows]
    lows = [r["ci99_low"] for r in rows]
    highs = [r["ci99_high"] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(budgets, rates, marker="o")
    ax.fill_between(budgets, lows, highs, alpha=0.25)
    ax.set_xscale("log")
    ax.set_xlabel("trial budget")
    ax.set_ylabel("success rate")
    ax.set_ylim(0, 1.02)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def emit_bucket_heatmap_svg(report: dict, path: str | Path) -> None:
    """Static per-bucket success heatmap (one row; mirrors the suite's
    T-count axis)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    buckets = report["per_bucket"]
    ks = [b["t_count_bucket"] for b in buckets]
    rates = np.array([[b["success_rate"] for b in buckets]])
    fig, ax = plt.subplots(figsize=(max(4, 0.6 * len(ks)), 1.8))
    im = ax.imshow(rates, vmin=0.0, vmax=1.0, cmap="viridis", aspect="auto")
    ax.set_yticks([])
    ax.set_xticks(range(len(ks)), [str(k) for k in ks])
    ax.set_xlabel("T-count bucket")
    for i, b in enumerate(buckets):
        ax.text(i, 0, f"{b['successes']}/{b['targets']}", ha="center", va="center")
    fig.colorbar(im, ax=ax, label="success rate")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
