"""Local rewrite-rule optimizer for Clifford+T circuits.

Two deterministic passes run to a joint fixed point:

1. Diagonal-run canonicalization. S and T are diagonal, so along each qubit
   they commute with each other, with gates of disjoint support, and with a
   CX control. Every maximal run of diagonal gates on one qubit is
   accumulated as a T-exponent (S counts 2, T counts 1) and re-emitted
   modulo 8 (T**8 = I exactly) in canonical form S^a T^b at the position of
   the run's first gate. A gate touching the qubit non-compatibly (H on it,
   or CX targeting it) closes the run.

2. Involution cancellation. H.H and CX.CX (same control/target) cancel when
   the two occurrences can be made adjacent by commuting through gates of
   disjoint support (and, for CX, through diagonal gates on its control).

Both passes preserve the implemented unitary exactly, never increase the
gate count, and are idempotent, so the optimized length is a valid
description length for the circuit's unitary: it upper-bounds the true
minimum gate count. That property is what makes optimized suffix lengths
usable as regression labels.

Rules are registered as data and verified numerically at import time
(unitary preservation up to global phase, non-increasing length).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Circuit, Gate, circuit_unitary, cx, h, s, t
from .metrics import avg_fidelity

_DIAGONAL = ("S", "T")
_RULE_TOL = 1e-10

# T-exponents contributed by each diagonal gate kind
_EXPONENT = {"S": 2, "T": 1}


def canonical_phase_gates(exponent: int, q: int) -> list[Gate]:
    """Shortest S/T sequence realizing T**exponent on qubit q (mod 8)."""
    e = exponent % 8
    return [s(q)] * (e // 2) + [t(q)] * (e % 2)


@dataclass(frozen=True)
class RewriteRule:
    """A verified pattern -> replacement pair on shared qubit support."""

    name: str
    pattern: tuple[Gate, ...]
    replacement: tuple[Gate, ...]

    def verify(self) -> None:
        """Check unitary preservation up to global phase and length
        monotonicity; raises AssertionError on a bad rule."""
        if len(self.replacement) > len(self.pattern):
            raise AssertionError(f"rule {self.name} increases length")
        n = 1 + max((q for g in self.pattern for q in g.qubits), default=0)
        up = circuit_unitary(Circuit(n, self.pattern))
        ur = circuit_unitary(Circuit(n, self.replacement))
        if avg_fidelity(up, ur) < 1.0 - _RULE_TOL:
            raise AssertionError(f"rule {self.name} does not preserve the unitary")
        # phase-align and re-check elementwise
        tr = np.trace(ur.conj().T @ up)
        phase = tr / abs(tr)
        if np.abs(up - phase * ur).max() > _RULE_TOL:
            raise AssertionError(f"rule {self.name} fails elementwise check")


def _build_rules() -> tuple[RewriteRule, ...]:
    rules = [
        RewriteRule("H-involution", (h(0), h(0)), ()),
        RewriteRule("CX-involution", (cx(0, 1), cx(0, 1)), ()),
    ]
    for e in range(2, 9):
        rules.append(
            RewriteRule(
                f"phase-T^{e}",
                tuple([t(0)] * e),
                tuple(canonical_phase_gates(e, 0)),
            )
        )
    for rule in rules:
        rule.verify()
    return tuple(rules)


REWRITE_RULES: tuple[RewriteRule, ...] = _build_rules()

# kinds with a (g, g) -> () rule; drives the cancellation pass
_INVOLUTION_KINDS = frozenset(
    r.pattern[0].kind
    for r in REWRITE_RULES
    if len(r.pattern) == 2 and not r.replacement and r.pattern[0] == r.pattern[1]
)


def _commutes(a: Gate, b: Gate) -> bool:
    """Syntactic commutation: disjoint support; diagonal gates on the same
    qubit; or a diagonal gate sitting on a CX control."""
    if a.support.isdisjoint(b.support):
        return True
    if a.kind in _DIAGONAL and b.kind in _DIAGONAL and a.qubits == b.qubits:
        return True
    if a.kind in _DIAGONAL and b.kind == "CX" and a.qubits[0] == b.qubits[0]:
        return True
    if b.kind in _DIAGONAL and a.kind == "CX" and b.qubits[0] == a.qubits[0]:
        return True
    return False


def _canonicalize_runs(gates: list[Gate]) -> tuple[list[Gate], bool]:
    out: list[object] = []
    open_runs: dict[int, tuple[int, int]] = {}  # qubit -> (anchor slot, exponent)

    def close(q: int) -> None:
        slot, exp = open_runs.pop(q)
        out[slot] = canonical_phase_gates(exp, q)

    for g in gates:
        if g.kind in _DIAGONAL:
            q = g.qubits[0]
            if q in open_runs:
                slot, exp = open_runs[q]
                open_runs[q] = (slot, exp + _EXPONENT[g.kind])
            else:
                out.append(None)
                open_runs[q] = (len(out) - 1, _EXPONENT[g.kind])
        elif g.kind == "H":
            if g.qubits[0] in open_runs:
                close(g.qubits[0])
            out.append(g)
        else:  # CX: a run on the control commutes through; on the target it closes
            if g.qubits[1] in open_runs:
                close(g.qubits[1])
            out.append(g)
    for q in list(open_runs):
        close(q)

    flat: list[Gate] = []
    for entry in out:
        if isinstance(entry, Gate):
            flat.append(entry)
        else:
            flat.extend(entry)  # type: ignore[arg-type]
    return flat, flat != gates


def _cancel_involutions(gates: list[Gate]) -> tuple[list[Gate], bool]:
    changed = False
    i = 0
    while i < len(gates):
        g = gates[i]
        if g.kind not in _INVOLUTION_KINDS:
            i += 1
            continue
        j = i + 1
        matched = False
        while j < len(gates):
            if gates[j] == g:
                del gates[j]
                del gates[i]
                changed = True
                matched = True
                break
            if not _commutes(g, gates[j]):
                break
            j += 1
        if not matched:
            i += 1
    return gates, changed


def optimize(circuit: Circuit) -> Circuit:
    """Canonicalize and shorten a circuit; the result implements the same
    unitary, is never longer, and is a fixed point of this function."""
    gates = list(circuit.gates)
    while True:
        gates, run_changed = _canonicalize_runs(gates)
        gates, cancel_changed = _cancel_involutions(gates)
        if not (run_changed or cancel_changed):
            return Circuit(circuit.n, tuple(gates))


def t_count(circuit: Circuit) -> int:
    """Number of T gates."""
    return sum(1 for g in circuit.gates if g.kind == "T")
