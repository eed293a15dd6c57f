"""Gate alphabet, circuit representation, and dense unitary algebra.

The gate set is Clifford+T: H, S, T on single qubits and CX on ordered
(control, target) pairs. Circuits act on n <= 5 qubits; unitaries are dense
``complex128`` matrices of shape (2**n, 2**n).

Conventions used throughout the package:

- qubit 0 is the most significant tensor factor (leftmost in Kronecker
  products), so basis index ``i`` assigns qubit ``q`` the bit
  ``(i >> (n - 1 - q)) & 1``;
- a circuit ``(g_1, ..., g_m)`` implements ``M(g_m) @ ... @ M(g_1)``: gates
  are listed in application order, so the matrix product is reversed;
- every gate has unit description length, so a circuit's description length
  is its gate count.

Circuit text format (the interchange format for all CLI commands)::

    QUBITS 2
    H 0
    CX 0 1
    # comments start with '#'
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from . import _kernels
from .errors import CircuitFormatError

MAX_QUBITS = 5

GATE_KINDS = ("H", "S", "T", "CX")

_KIND_CODE = {
    "H": _kernels.GATE_H,
    "S": _kernels.GATE_S,
    "T": _kernels.GATE_T,
    "CX": _kernels.GATE_CX,
}


@dataclass(frozen=True, order=True)
class Gate:
    """A symbolic gate: kind in {H, S, T, CX} plus its qubit indices.

    Single-qubit kinds carry one index; CX carries an ordered (control,
    target) pair with control != target. The ``order=True`` total order
    (kind string, then qubits) is the deterministic tie-break used by the
    search.
    """

    kind: str
    qubits: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        arity = 2 if self.kind == "CX" else 1
        if len(self.qubits) != arity:
            raise ValueError(f"{self.kind} takes {arity} qubit(s), got {self.qubits}")
        if self.kind == "CX" and self.qubits[0] == self.qubits[1]:
            raise ValueError("CX control and target must differ")
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"negative qubit index in {self.qubits}")

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.qubits)

    def validate(self, n: int) -> None:
        if any(q >= n for q in self.qubits):
            raise ValueError(f"gate {self} uses a qubit index >= {n}")

    def __str__(self) -> str:
        return " ".join([self.kind, *map(str, self.qubits)])


def h(q: int) -> Gate:
    return Gate("H", (q,))


def s(q: int) -> Gate:
    return Gate("S", (q,))


def t(q: int) -> Gate:
    return Gate("T", (q,))


def cx(control: int, target: int) -> Gate:
    return Gate("CX", (control, target))


@dataclass(frozen=True)
class Circuit:
    """An ordered gate sequence on ``n`` qubits."""

    n: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_QUBITS:
            raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}], got {self.n}")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            g.validate(self.n)

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self) -> Iterator[Gate]:
        return iter(self.gates)

    def append(self, gate: Gate) -> "Circuit":
        return Circuit(self.n, self.gates + (gate,))

    def prefix(self, length: int) -> "Circuit":
        return Circuit(self.n, self.gates[:length])

    def suffix(self, start: int) -> "Circuit":
        return Circuit(self.n, self.gates[start:])

    def sort_key(self) -> tuple:
        """Lexicographic key over gates; used for deterministic tie-breaks."""
        return tuple((g.kind, g.qubits) for g in self.gates)

    def __str__(self) -> str:
        return format_circuit(self)


def identity(n: int) -> np.ndarray:
    return np.eye(2**n, dtype=np.complex128)


def action_set(n: int) -> list[Gate]:
    """All gates on n qubits: H, S, T per qubit plus CX per ordered pair
    (3n + n(n-1) actions). This is the action alphabet of every search."""
    actions = [h(q) for q in range(n)]
    actions += [s(q) for q in range(n)]
    actions += [t(q) for q in range(n)]
    actions += [cx(a, b) for a in range(n) for b in range(n) if a != b]
    return actions


def apply_gate(u: np.ndarray, gate: Gate) -> np.ndarray:
    """Return M(gate) @ u."""
    q1 = gate.qubits[1] if len(gate.qubits) == 2 else 0
    return _kernels.apply_gate_left(u, _KIND_CODE[gate.kind], gate.qubits[0], q1)


def apply_gate_adjoint(u: np.ndarray, gate: Gate) -> np.ndarray:
    """Return M(gate)^dagger @ u."""
    q1 = gate.qubits[1] if len(gate.qubits) == 2 else 0
    return _kernels.apply_gate_adjoint_left(u, _KIND_CODE[gate.kind], gate.qubits[0], q1)


def gate_matrix(gate: Gate, n: int) -> np.ndarray:
    """Full 2**n-dimensional operator for a single gate.

    Single-qubit gates are Kronecker-embedded at their target position with
    identity elsewhere; CX acts as |0><0|_c ⊗ I + |1><1|_c ⊗ X_t.
    """
    gate.validate(n)
    return apply_gate(identity(n), gate)


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Product of the gate matrices in reversed sequence order."""
    u = identity(circuit.n)
    for g in circuit.gates:
        u = apply_gate(u, g)
    return u


def residual(prefix_unitary: np.ndarray, target: np.ndarray) -> np.ndarray:
    """The transformation still to synthesize after committing to a prefix:
    prefix^dagger @ target."""
    if prefix_unitary.shape != target.shape:
        raise ValueError(
            f"dimension mismatch: {prefix_unitary.shape} vs {target.shape}"
        )
    return prefix_unitary.conj().T @ target


def kron_pad(u: np.ndarray, total: int) -> np.ndarray:
    """Embed a unitary into a ``total``-qubit register as u ⊗ I, acting
    trivially on the trailing qubits."""
    dim = u.shape[0]
    m = dim.bit_length() - 1
    if dim != 2**m:
        raise ValueError(f"matrix dimension {dim} is not a power of two")
    if m > total:
        raise ValueError(f"cannot pad a {m}-qubit unitary to {total} qubits")
    if m == total:
        return u
    return np.kron(u, np.eye(2 ** (total - m)))


def num_qubits_of(u: np.ndarray) -> int:
    dim = u.shape[0]
    n = dim.bit_length() - 1
    if u.shape != (dim, dim) or dim != 2**n:
        raise ValueError(f"not a square power-of-two matrix: shape {u.shape}")
    return n


def unitarity_error(u: np.ndarray) -> float:
    """Max-norm deviation of u^dagger u from the identity."""
    d = u.conj().T @ u - np.eye(u.shape[0])
    return float(np.abs(d).max())


def format_circuit(circuit: Circuit) -> str:
    lines = [f"QUBITS {circuit.n}"]
    lines.extend(str(g) for g in circuit.gates)
    return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> Circuit:
    """Parse the circuit text format; raises CircuitFormatError on bad input."""
    n = None
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if n is None:
            if fields[0] != "QUBITS" or len(fields) != 2:
                raise CircuitFormatError(
                    f"line {lineno}: expected 'QUBITS <n>' header, got {raw!r}"
                )
            try:
                n = int(fields[1])
            except ValueError as exc:
                raise CircuitFormatError(f"line {lineno}: bad qubit count") from exc
            continue
        kind = fields[0]
        if kind not in GATE_KINDS:
            raise CircuitFormatError(f"line {lineno}: unknown gate {kind!r}")
        arity = 2 if kind == "CX" else 1
        if len(fields) != 1 + arity:
            raise CircuitFormatError(
                f"line {lineno}: {kind} takes {arity} qubit index(es)"
            )
        try:
            qubits = tuple(int(f) for f in fields[1:])
        except ValueError as exc:
            raise CircuitFormatError(f"line {lineno}: bad qubit index") from exc
        try:
            gates.append(Gate(kind, qubits))
        except ValueError as exc:
            raise CircuitFormatError(f"line {lineno}: {exc}") from exc
    if n is None:
        raise CircuitFormatError("missing 'QUBITS <n>' header")
    try:
        return Circuit(n, tuple(gates))
    except ValueError as exc:
        raise CircuitFormatError(str(exc)) from exc


def read_circuit(path: str | Path) -> Circuit:
    return parse_circuit(Path(path).read_text())


def write_circuit(circuit: Circuit, path: str | Path) -> None:
    Path(path).write_text(format_circuit(circuit))


def format_unitary(u: np.ndarray) -> str:
    """Text form of a unitary: header ``UNITARY <n>``, then one ``re im``
    line per entry, row-major."""
    n = num_qubits_of(u)
    lines = [f"UNITARY {n}"]
    lines.extend(f"{z.real!r} {z.imag!r}" for z in u.ravel())
    return "\n".join(lines) + "\n"


def parse_unitary(text: str, tol: float = 1e-6) -> np.ndarray:
    entries = []
    n = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if n is None:
            if fields[0] != "UNITARY" or len(fields) != 2:
                raise CircuitFormatError(
                    f"line {lineno}: expected 'UNITARY <n>' header, got {raw!r}"
                )
            n = int(fields[1])
            continue
        if len(fields) != 2:
            raise CircuitFormatError(f"line {lineno}: expected 're im' pair")
        try:
            entries.append(complex(float(fields[0]), float(fields[1])))
        except ValueError as exc:
            raise CircuitFormatError(f"line {lineno}: bad number") from exc
    if n is None:
        raise CircuitFormatError("missing 'UNITARY <n>' header")
    if not 1 <= n <= MAX_QUBITS:
        raise CircuitFormatError(f"qubit count {n} out of range [1, {MAX_QUBITS}]")
    dim = 2**n
    if len(entries) != dim * dim:
        raise CircuitFormatError(
            f"expected {dim * dim} entries for {n} qubits, got {len(entries)}"
        )
    u = np.array(entries, dtype=np.complex128).reshape(dim, dim)
    if unitarity_error(u) > tol:
        raise CircuitFormatError("matrix is not unitary within tolerance")
    return u


def read_unitary(path: str | Path) -> np.ndarray:
    return parse_unitary(Path(path).read_text())


def write_unitary(u: np.ndarray, path: str | Path) -> None:
    Path(path).write_text(format_unitary(u))


def load_target(path: str | Path) -> np.ndarray:
    """Load a synthesis target from either format: ``.circ`` circuit text
    (the target is the circuit's unitary) or ``.mat`` unitary text."""
    p = Path(path)
    if p.suffix == ".mat":
        return read_unitary(p)
    return circuit_unitary(read_circuit(p))
