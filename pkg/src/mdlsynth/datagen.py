"""Training data generation: rejection-sampled circuits, curriculum cuts,
phase normalization, and dataset serialization.

A training example pairs a phase-normalized residual unitary, flattened to
a real feature vector (all real parts row-major, then all imaginary parts),
with the remaining-gate-count label of the circuit suffix that implements
it. Labels come from peephole-optimized suffixes, so they are valid
descriptions and upper-bound the true minimum gate count.

Dataset file format (little-endian): magic ``MDLD``, version u16, qubit
count u8, example count u64, then per example a float32 feature vector of
length 2*4**n and a u16 label, with a trailing CRC32 over everything before
it.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from . import _kernels
from ._rng import substream
from .core import Circuit, Gate, circuit_unitary, cx, h, residual, s, t
from .errors import DatasetFormatError, PhaseReferenceError, RejectionBudgetError
from .peephole import optimize, t_count

PHASE_EPS = 1e-7

_MAGIC = b"MDLD"
_VERSION = 1


@dataclass(frozen=True)
class SamplerConfig:
    """Knobs for the rejection sampler."""

    n: int
    t_count_range: tuple[int, int] = (0, 20)
    gate_count_range: tuple[int, int] = (3, 60)
    seed: int = 0
    max_attempts: int = 10_000

    def __post_init__(self) -> None:
        if not 1 <= self.n <= 5:
            raise ValueError(f"qubit count must be in [1, 5], got {self.n}")
        for name, (lo, hi) in (
            ("t_count_range", self.t_count_range),
            ("gate_count_range", self.gate_count_range),
        ):
            if lo < 0 or hi < lo:
                raise ValueError(f"{name} must be a non-empty range, got ({lo}, {hi})")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be positive")


@dataclass(frozen=True)
class TrainingExample:
    """Feature vector (float64 in memory, float32 on disk) plus gate-count
    label."""

    features: np.ndarray
    label: int


def feature_length(n: int) -> int:
    return 2 * 4**n


def qubits_for_feature_length(length: int) -> int:
    for n in range(1, 6):
        if feature_length(n) == length:
            return n
    raise ValueError(f"feature length {length} does not match any n in [1, 5]")


def phase_normalize(r: np.ndarray, threshold: float = PHASE_EPS) -> np.ndarray:
    """Multiply by e^{-i theta} so the first row-major entry with modulus
    above ``threshold`` becomes real and non-negative. Idempotent and
    invariant under global phase. Any unitary has max |entry| >= 2**(-n/2),
    so the defensive error cannot fire on valid input."""
    try:
        return _kernels.phase_normalize(np.ascontiguousarray(r, np.complex128), threshold)
    except ValueError as exc:
        raise PhaseReferenceError(str(exc)) from exc


def flatten_unitary(u: np.ndarray) -> np.ndarray:
    """Feature layout: all real parts row-major, then all imaginary parts."""
    return np.concatenate([u.real.ravel(), u.imag.ravel()])


def features_to_matrix(features: np.ndarray) -> np.ndarray:
    """Inverse of flatten_unitary."""
    half = features.size // 2
    dim = round(np.sqrt(half))
    if 2 * dim * dim != features.size:
        raise ValueError(f"feature length {features.size} is not 2*d^2")
    re = np.asarray(features[:half], dtype=np.float64).reshape(dim, dim)
    im = np.asarray(features[half:], dtype=np.float64).reshape(dim, dim)
    return re + 1j * im


def _random_clifford_gate(n: int, rng: np.random.Generator) -> Gate:
    kinds = ("H", "S", "CX") if n >= 2 else ("H", "S")
    kind = kinds[rng.integers(len(kinds))]
    if kind == "CX":
        control = int(rng.integers(n))
        target = int(rng.integers(n - 1))
        if target >= control:
            target += 1
        return cx(control, target)
    q = int(rng.integers(n))
    return h(q) if kind == "H" else s(q)


def sample_circuit(cfg: SamplerConfig, rng: np.random.Generator | None = None) -> Circuit:
    """Draw one accepted, peephole-optimized circuit.

    A target T-count k is drawn uniformly once per call; proposals are then
    resampled until one survives, which keeps the marginal over k exactly
    uniform. Each proposal: random Clifford gates (kinds and qubits
    uniform), exactly k T gates inserted at uniform positions, a uniform
    shuffle, then the optimizer. Rejected if optimization changed the
    T-count or left the gate-count range.
    """
    if rng is None:
        rng = substream(cfg.seed, "datagen")
    t_lo, t_hi = cfg.t_count_range
    g_lo, g_hi = cfg.gate_count_range
    k = int(rng.integers(t_lo, t_hi + 1))
    total_lo = max(g_lo, k, 1)
    if total_lo > g_hi:
        raise RejectionBudgetError(
            f"infeasible draw: T-count {k} cannot fit in gate-count range "
            f"[{g_lo}, {g_hi}]"
        )
    for _ in range(cfg.max_attempts):
        total = int(rng.integers(total_lo, g_hi + 1))
        gates = [_random_clifford_gate(cfg.n, rng) for _ in range(total - k)]
        for _ in range(k):
            pos = int(rng.integers(len(gates) + 1))
            gates.insert(pos, t(int(rng.integers(cfg.n))))
        order = rng.permutation(len(gates))
        proposal = Circuit(cfg.n, tuple(gates[i] for i in order))
        optimized = optimize(proposal)
        if t_count(optimized) == k and g_lo <= len(optimized) <= g_hi:
            return optimized
    raise RejectionBudgetError(
        f"no acceptable circuit after {cfg.max_attempts} attempts "
        f"(T-count {k}, gate-count range [{g_lo}, {g_hi}], n={cfg.n})"
    )


def curriculum_cuts(circuit: Circuit) -> list[int]:
    """Cut positions for one optimized circuit: always 0 (the full
    residual); after the floor(k'/2)-th T gate when k' >= 5; additionally
    after the floor(3k'/4)-th T gate when k' >= 10."""
    cuts = {0}
    t_positions = [i for i, g in enumerate(circuit.gates) if g.kind == "T"]
    kp = len(t_positions)
    if kp >= 5:
        cuts.add(t_positions[kp // 2 - 1] + 1)
    if kp >= 10:
        cuts.add(t_positions[(3 * kp) // 4 - 1] + 1)
    return sorted(cuts)


def make_examples(circuit: Circuit, resuffix_optimize: bool = True) -> list[TrainingExample]:
    """Training examples for one (already optimized) circuit: one per
    curriculum cut. The label is the optimized suffix length (or the raw
    suffix length when ``resuffix_optimize`` is off)."""
    target = circuit_unitary(circuit)
    examples = []
    for cut in curriculum_cuts(circuit):
        prefix_u = circuit_unitary(circuit.prefix(cut))
        res = residual(prefix_u, target)
        suffix = circuit.suffix(cut)
        label = len(optimize(suffix)) if resuffix_optimize else len(suffix)
        features = flatten_unitary(phase_normalize(res))
        examples.append(TrainingExample(features, label))
    return examples


def stream_examples(
    cfg: SamplerConfig,
    rng: np.random.Generator | None = None,
    resuffix_optimize: bool = True,
) -> Iterator[TrainingExample]:
    """Infinite example stream; the trainer owns the replay buffer."""
    if rng is None:
        rng = substream(cfg.seed, "datagen")
    while True:
        circuit = sample_circuit(cfg, rng)
        yield from make_examples(circuit, resuffix_optimize)


def dataset_stream(
    examples: list[TrainingExample], rng: np.random.Generator
) -> Iterator[TrainingExample]:
    """Infinite reshuffled stream over a fixed dataset."""
    if not examples:
        raise ValueError("cannot stream from an empty dataset")
    order = np.arange(len(examples))
    while True:
        rng.shuffle(order)
        for i in order:
            yield examples[i]


def generate_examples(
    cfg: SamplerConfig,
    count: int,
    rng: np.random.Generator | None = None,
    resuffix_optimize: bool = True,
) -> list[TrainingExample]:
    stream = stream_examples(cfg, rng, resuffix_optimize)
    return [next(stream) for _ in range(count)]


def write_dataset(
    examples: Iterable[TrainingExample], path: str | Path, n: int | None = None
) -> None:
    """Serialize examples; ``n`` is only needed for an empty dataset."""
    examples = list(examples)
    if examples:
        inferred = qubits_for_feature_length(examples[0].features.size)
        if n is None:
            n = inferred
        elif n != inferred:
            raise ValueError(f"qubit count {n} does not match features ({inferred})")
    elif n is None:
        raise ValueError("empty dataset needs an explicit qubit count")
    flen = feature_length(n)
    record = np.dtype([("features", "<f4", (flen,)), ("label", "<u2")])
    table = np.zeros(len(examples), dtype=record)
    for i, ex in enumerate(examples):
        if ex.features.size != flen:
            raise ValueError("mixed feature lengths in dataset")
        if not 0 <= ex.label <= 0xFFFF:
            raise ValueError(f"label {ex.label} out of range for u16")
        table["features"][i] = ex.features
        table["label"][i] = ex.label
    header = (
        _MAGIC
        + _VERSION.to_bytes(2, "little")
        + n.to_bytes(1, "little")
        + len(examples).to_bytes(8, "little")
    )
    body = header + table.tobytes()
    crc = zlib.crc32(body)
    Path(path).write_bytes(body + crc.to_bytes(4, "little"))


def read_dataset(path: str | Path) -> list[TrainingExample]:
    raw = Path(path).read_bytes()
    if len(raw) < 19:
        raise DatasetFormatError(f"{path}: truncated header")
    if raw[:4] != _MAGIC:
        raise DatasetFormatError(f"{path}: bad magic {raw[:4]!r}")
    version = int.from_bytes(raw[4:6], "little")
    if version != _VERSION:
        raise DatasetFormatError(f"{path}: unsupported version {version}")
    n = raw[6]
    if not 1 <= n <= 5:
        raise DatasetFormatError(f"{path}: qubit count {n} out of range")
    count = int.from_bytes(raw[7:15], "little")
    flen = feature_length(n)
    expected = 15 + count * (4 * flen + 2) + 4
    if len(raw) != expected:
        raise DatasetFormatError(
            f"{path}: size {len(raw)} does not match header "
            f"(qubit count {n}, {count} examples -> {expected} bytes)"
        )
    stored_crc = int.from_bytes(raw[-4:], "little")
    if zlib.crc32(raw[:-4]) != stored_crc:
        raise DatasetFormatError(f"{path}: CRC mismatch")
    record = np.dtype([("features", "<f4", (flen,)), ("label", "<u2")])
    table = np.frombuffer(raw[15:-4], dtype=record)
    return [
        TrainingExample(row["features"].astype(np.float64), int(row["label"]))
        for row in table
    ]
