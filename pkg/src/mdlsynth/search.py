"""Stochastic beam-search synthesis driven by the learned gate-count
predictor.

One trial keeps a beam of at most B candidate prefixes. Each step harvests
converged beam members (average-fidelity test against the identity
residual), returns immediately if any solution exists at the current depth
(which biases toward shortest circuits), otherwise expands every candidate
by every gate, scores all expansions with one batched model call (score =
minus the predicted remaining gate count of the phase-normalized residual),
and selects the next beam by Gumbel-top-B: score/tau plus i.i.d. standard
Gumbel noise, equivalent to sampling B candidates without replacement from
the softmax over score/tau.

Multiple independent trials cycle round-robin through symmetry variants of
the target: qubit permutations (P U P^dagger, solutions relabeled back) and
adjoint targets (solutions reversed with each gate replaced by its adjoint
expansion over the alphabet). The best solution across trials wins by gate
count, then fidelity, then trial index.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._rng import substream
from .core import (
    Circuit,
    Gate,
    action_set,
    apply_gate_adjoint,
    circuit_unitary,
    cx,
    h,
    num_qubits_of,
    s,
    t,
)
from .datagen import PHASE_EPS
from .errors import ModelFormatError
from .metrics import avg_fidelity, identity_fidelity
from .nn import MlpModel, forward
from .peephole import optimize

_DEDUP_DIGITS = 9


@dataclass(frozen=True)
class SearchConfig:
    beam_width: int = 10
    max_steps: int = 60
    temperature: float = 1.0
    threshold: float = 0.99
    trials: int = 200
    seed: int = 0
    permutation_trials: bool = True
    inverse_trials: bool = True
    # stop scheduling trials once a solution with at most this many gates
    # exists; None runs the full budget
    stop_when_gates_leq: int | None = None
    workers: int = 1

    def __post_init__(self) -> None:
        if self.beam_width < 1 or self.max_steps < 1 or self.trials < 1:
            raise ValueError("beam_width, max_steps, and trials must be >= 1")
        if self.temperature <= 0.0:
            raise ValueError("temperature must be positive")
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError("threshold must be in (0, 1]")


@dataclass
class BeamCandidate:
    """A search state: residual unitary, the prefix circuit that produced
    it, and its selection score (minus the predicted remaining gates)."""

    residual: np.ndarray
    circuit: Circuit
    score: float = 0.0


@dataclass(frozen=True)
class TrialRecord:
    index: int
    permutation: tuple[int, ...]
    inverse: bool
    success: bool
    steps: int
    gates: int | None = None
    fidelity: float | None = None
    circuit: Circuit | None = None


@dataclass
class SynthesisResult:
    circuit: Circuit | None
    fidelity: float
    trials_used: int
    steps_used: int
    wall_time: float
    records: list[TrialRecord] = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.circuit is not None


def _pad_factor(model: MlpModel, n: int) -> int:
    if model.n_qubits < n:
        raise ModelFormatError(
            f"model trained for {model.n_qubits} qubits cannot score an "
            f"{n}-qubit target"
        )
    return 2 ** (model.n_qubits - n)


def expand(
    beam: list[BeamCandidate], actions: list[Gate], model: MlpModel
) -> list[BeamCandidate]:
    """All (candidate x action) expansions, deduplicated by phase-normalized
    residual, scored with a single batched model call."""
    if not beam:
        return []
    n = beam[0].circuit.n
    pad = _pad_factor(model, n)
    out: list[BeamCandidate] = []
    features = []
    seen: set[bytes] = set()
    for cand in beam:
        for gate in actions:
            res = apply_gate_adjoint(cand.residual, gate)
            key = _kernels.rounded_key(res, _DEDUP_DIGITS, PHASE_EPS)
            if key in seen:
                continue
            seen.add(key)
            features.append(_kernels.padded_features(res, pad, PHASE_EPS))
            out.append(BeamCandidate(res, cand.circuit.append(gate)))
    predictions = forward(model, np.stack(features))
    for cand, pred in zip(out, predictions):
        cand.score = -float(pred)
    return out


def gumbel_top_b(
    candidates: list[BeamCandidate],
    beam_width: int,
    temperature: float,
    rng: np.random.Generator,
) -> list[BeamCandidate]:
    """Select B candidates maximizing score/tau + Gumbel(0,1); with B = 1
    this samples from softmax(score/tau)."""
    if len(candidates) <= beam_width:
        return list(candidates)
    scores = np.array([c.score for c in candidates])
    keys = scores / temperature + rng.gumbel(size=len(candidates))
    order = np.argsort(-keys, kind="stable")
    return [candidates[i] for i in order[:beam_width]]


@dataclass(frozen=True)
class TrialOutcome:
    circuit: Circuit | None
    fidelity: float
    steps: int


def run_trial(
    target: np.ndarray,
    model: MlpModel,
    cfg: SearchConfig,
    rng: np.random.Generator,
) -> TrialOutcome:
    """One stochastic beam-search run against ``target``. Solutions are
    harvested at each depth before expansion (converged members are not
    expanded) and the first depth with any solution wins; the final beam is
    also checked so a length-max_steps solution is not dropped."""
    n = num_qubits_of(target)
    _pad_factor(model, n)
    actions = action_set(n)
    beam = [BeamCandidate(target, Circuit(n))]
    for step in range(cfg.max_steps + 1):
        solutions = [
            c for c in beam if identity_fidelity(c.residual) >= cfg.threshold
        ]
        if solutions:
            best = min(
                solutions,
                key=lambda c: (-identity_fidelity(c.residual), c.circuit.sort_key()),
            )
            _verify_candidate(best, target)
            return TrialOutcome(
                best.circuit,
                avg_fidelity(circuit_unitary(best.circuit), target),
                step,
            )
        if step == cfg.max_steps:
            break
        candidates = expand(beam, actions, model)
        if not candidates:
            break
        beam = gumbel_top_b(candidates, cfg.beam_width, cfg.temperature, rng)
    return TrialOutcome(None, 0.0, cfg.max_steps)


def _verify_candidate(cand: BeamCandidate, target: np.ndarray) -> None:
    expected = circuit_unitary(cand.circuit).conj().T @ target
    if np.abs(expected - cand.residual).max() > 1e-9:
        raise AssertionError("beam candidate residual does not match its circuit")


def permutation_matrix(perm: tuple[int, ...]) -> np.ndarray:
    """Basis permutation sending qubit q to position perm[q]."""
    n = len(perm)
    _check_permutation(perm)
    size = 2**n
    mat = np.zeros((size, size))
    for i in range(size):
        j = 0
        for q in range(n):
            if (i >> (n - 1 - q)) & 1:
                j |= 1 << (n - 1 - perm[q])
        mat[j, i] = 1.0
    return mat


def _check_permutation(perm: tuple[int, ...]) -> None:
    if sorted(perm) != list(range(len(perm))):
        raise ValueError(f"{perm} is not a permutation of 0..{len(perm) - 1}")


def permute_target(target: np.ndarray, perm: tuple[int, ...]) -> np.ndarray:
    """Equivalent target under qubit relabeling: P U P^dagger."""
    if len(perm) != num_qubits_of(target):
        raise ValueError("permutation length does not match target qubits")
    mat = permutation_matrix(perm)
    return mat @ target @ mat.T


def unpermute_circuit(circuit: Circuit, perm: tuple[int, ...]) -> Circuit:
    """Relabel a circuit found for the permuted target back to the original
    qubit labels (each index q becomes perm^{-1}(q))."""
    _check_permutation(perm)
    inverse = [0] * len(perm)
    for q, p in enumerate(perm):
        inverse[p] = q
    gates = tuple(
        Gate(g.kind, tuple(inverse[q] for q in g.qubits)) for g in circuit.gates
    )
    return Circuit(circuit.n, gates)


_ADJOINT_EXPANSION = {
    "H": lambda q: [h(q[0])],
    "CX": lambda q: [cx(q[0], q[1])],
    "S": lambda q: [s(q[0])] * 3,
    "T": lambda q: [s(q[0])] * 3 + [t(q[0])],
}


def adjoint_circuit(circuit: Circuit) -> Circuit:
    """Circuit implementing the adjoint: gates reversed, each replaced by
    its adjoint expansion over the alphabet (S^dagger = S^3, T^dagger =
    S^3 T)."""
    gates: list[Gate] = []
    for g in reversed(circuit.gates):
        gates.extend(_ADJOINT_EXPANSION[g.kind](g.qubits))
    return Circuit(circuit.n, tuple(gates))


def trial_variants(n: int, cfg: SearchConfig) -> list[tuple[tuple[int, ...], bool]]:
    """Symmetry variants cycled round-robin across trials: identity first,
    all qubit permutations when enabled, each doubled with an adjoint
    variant when enabled."""
    if cfg.permutation_trials:
        perms = [tuple(p) for p in itertools.permutations(range(n))]
    else:
        perms = [tuple(range(n))]
    variants = [(p, False) for p in perms]
    if cfg.inverse_trials:
        variants += [(p, True) for p in perms]
    return variants


def _run_one_trial(
    target: np.ndarray,
    model: MlpModel,
    cfg: SearchConfig,
    index: int,
    variant: tuple[tuple[int, ...], bool],
) -> TrialRecord:
    perm, inverse = variant
    trial_target = target
    if any(p != q for q, p in enumerate(perm)):
        trial_target = permute_target(target, perm)
    if inverse:
        trial_target = trial_target.conj().T
    outcome = run_trial(trial_target, model, cfg, substream(cfg.seed, "gumbel", index))
    if outcome.circuit is None:
        return TrialRecord(index, perm, inverse, False, outcome.steps)
    circ = outcome.circuit
    if inverse:
        circ = adjoint_circuit(circ)
    circ = unpermute_circuit(circ, perm)
    fidelity = avg_fidelity(circuit_unitary(circ), target)
    return TrialRecord(
        index, perm, inverse, True, outcome.steps, len(circ), fidelity, circ
    )


_POOL_STATE: dict = {}


def _pool_init(target: np.ndarray, model: MlpModel, cfg: SearchConfig) -> None:
    _POOL_STATE["args"] = (target, model, cfg)


def _pool_chunk(
    chunk: list[tuple[int, tuple[tuple[int, ...], bool]]]
) -> list[TrialRecord]:
    target, model, cfg = _POOL_STATE["args"]
    return [_run_one_trial(target, model, cfg, i, v) for i, v in chunk]


def synthesize(
    target: np.ndarray, model: MlpModel, cfg: SearchConfig
) -> SynthesisResult:
    """Run ``cfg.trials`` independent trials (each with its own derived RNG
    stream, so results do not depend on scheduling), keep the best solution
    by (gate count, fidelity, trial index), and peephole-optimize it."""
    start = time.perf_counter()
    n = num_qubits_of(target)
    _pad_factor(model, n)
    variants = trial_variants(n, cfg)
    jobs = [(i, variants[i % len(variants)]) for i in range(cfg.trials)]

    records: list[TrialRecord] = []
    if cfg.workers > 1:
        chunk_size = max(1, min(16, cfg.trials // (cfg.workers * 4) or 1))
        chunks = [jobs[i : i + chunk_size] for i in range(0, len(jobs), chunk_size)]
        with ProcessPoolExecutor(
            max_workers=cfg.workers,
            initializer=_pool_init,
            initargs=(target, model, cfg),
        ) as pool:
            for got in pool.map(_pool_chunk, chunks):
                records.extend(got)
                if _should_stop(records, cfg):
                    break
    else:
        for i, variant in jobs:
            records.append(_run_one_trial(target, model, cfg, i, variant))
            if _should_stop(records, cfg):
                break

    # truncate at the first stopping trial so the outcome does not depend
    # on worker scheduling
    if cfg.stop_when_gates_leq is not None:
        for pos, rec in enumerate(records):
            if rec.success and rec.gates <= cfg.stop_when_gates_leq:
                records = records[: pos + 1]
                break

    successes = [r for r in records if r.success]
    if not successes:
        steps = max((r.steps for r in records), default=0)
        return SynthesisResult(
            None, 0.0, len(records), steps, time.perf_counter() - start, records
        )
    best = min(successes, key=lambda r: (r.gates, -r.fidelity, r.index))
    circuit = optimize(best.circuit)
    fidelity = avg_fidelity(circuit_unitary(circuit), target)
    if fidelity < cfg.threshold:
        raise AssertionError(
            "optimized winner fell below the fidelity threshold; "
            "peephole optimization must preserve semantics"
        )
    return SynthesisResult(
        circuit,
        fidelity,
        len(records),
        best.steps,
        time.perf_counter() - start,
        records,
    )


def _should_stop(records: list[TrialRecord], cfg: SearchConfig) -> bool:
    if cfg.stop_when_gates_leq is None:
        return False
    return any(
        r.success and r.gates <= cfg.stop_when_gates_leq for r in records
    )
