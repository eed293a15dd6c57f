"""Exact brute-force synthesis for small instances.

Breadth-first search over the action graph from the identity, deduplicated
by a phase-invariant canonical key (phase-normalized entries rounded to six
decimal digits, hashed). Because the search is exhaustive per depth level,
the first depth at which any state reaches a target certifies the minimum
gate count, and a miss certifies the minimum exceeds ``max_depth`` at the
given fidelity threshold.

The hit test against many targets is vectorized: a state V matches target U
iff |Tr(U^dagger V)|^2 clears the average-fidelity cutoff, which is one
inner product between flattened matrices.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import Circuit, Gate, action_set, apply_gate, identity, num_qubits_of
from .datagen import PHASE_EPS, TrainingExample, features_to_matrix
from .errors import OracleBudgetError

CANONICAL_DIGITS = 6
DEFAULT_MAX_STATES = 2_000_000


def canonical_key(u: np.ndarray, digits: int = CANONICAL_DIGITS) -> bytes:
    """Digest equal for U and e^{i phi} U, and for unitaries matching to
    ~10^-digits elementwise after phase normalization."""
    raw = _kernels.rounded_key(u, digits, PHASE_EPS)
    return hashlib.blake2b(raw, digest_size=16).digest()


@dataclass(frozen=True)
class OracleHit:
    depth: int
    circuit: Circuit


def exact_mdl(
    target: np.ndarray,
    max_depth: int,
    threshold: float = 0.99,
    max_states: int = DEFAULT_MAX_STATES,
) -> OracleHit | None:
    """Minimum gate count and a witness circuit, or None, which certifies
    the minimum exceeds ``max_depth`` at this threshold."""
    return exact_mdl_many([target], max_depth, threshold, max_states)[0]


def exact_mdl_many(
    targets: list[np.ndarray],
    max_depth: int,
    threshold: float = 0.99,
    max_states: int = DEFAULT_MAX_STATES,
) -> list[OracleHit | None]:
    """One exhaustive BFS answering many targets at once."""
    if not targets:
        return []
    n = num_qubits_of(targets[0])
    dim = 2**n
    for u in targets:
        if u.shape != (dim, dim):
            raise ValueError("all oracle targets must share one qubit count")
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")

    # F_avg(V, U) >= threshold  <=>  |Tr(U^dagger V)|^2 >= cutoff
    cutoff = threshold * dim * (dim + 1) - dim
    target_vecs = np.stack([u.conj().ravel() for u in targets])

    actions = action_set(n)
    results: list[OracleHit | None] = [None] * len(targets)
    remaining = set(range(len(targets)))

    # global bookkeeping for witness reconstruction
    parents: list[int] = [-1]
    applied: list[Gate | None] = [None]

    def witness(state_idx: int) -> Circuit:
        gates: list[Gate] = []
        while state_idx > 0:
            gates.append(applied[state_idx])
            state_idx = parents[state_idx]
        return Circuit(n, tuple(reversed(gates)))

    def record_hits(matrices: list[np.ndarray], indices: list[int], depth: int) -> None:
        if not remaining or not matrices:
            return
        vecs = np.stack([m.ravel() for m in matrices])
        overlap = np.abs(target_vecs @ vecs.T) ** 2
        for k in sorted(remaining):
            hits = np.flatnonzero(overlap[k] >= cutoff)
            if hits.size:
                results[k] = OracleHit(depth, witness(indices[hits[0]]))
                remaining.discard(k)

    frontier = [identity(n)]
    frontier_idx = [0]
    visited = {canonical_key(frontier[0])}
    record_hits(frontier, frontier_idx, 0)

    for depth in range(1, max_depth + 1):
        if not remaining:
            break
        next_frontier: list[np.ndarray] = []
        next_idx: list[int] = []
        for state, state_idx in zip(frontier, frontier_idx):
            for gate in actions:
                new = apply_gate(state, gate)
                key = canonical_key(new)
                if key in visited:
                    continue
                visited.add(key)
                parents.append(state_idx)
                applied.append(gate)
                next_frontier.append(new)
                next_idx.append(len(parents) - 1)
                if len(parents) > max_states:
                    raise OracleBudgetError(
                        f"state budget {max_states} exceeded at depth {depth} "
                        f"(frontier size {len(next_frontier)})"
                    )
        record_hits(next_frontier, next_idx, depth)
        frontier = next_frontier
        frontier_idx = next_idx

    return results


def enumerate_states(
    n: int, max_depth: int, max_states: int = DEFAULT_MAX_STATES
) -> list[OracleHit]:
    """Every phase-distinct unitary reachable within ``max_depth`` gates,
    each with a minimal witness circuit (the identity included at depth 0)."""
    actions = action_set(n)
    hits = [OracleHit(0, Circuit(n))]
    frontier = [(identity(n), Circuit(n))]
    visited = {canonical_key(frontier[0][0])}
    for depth in range(1, max_depth + 1):
        next_frontier: list[tuple[np.ndarray, Circuit]] = []
        for state, circ in frontier:
            for gate in actions:
                new = apply_gate(state, gate)
                key = canonical_key(new)
                if key in visited:
                    continue
                visited.add(key)
                if len(visited) > max_states:
                    raise OracleBudgetError(
                        f"state budget {max_states} exceeded at depth {depth}"
                    )
                extended = circ.append(gate)
                hits.append(OracleHit(depth, extended))
                next_frontier.append((new, extended))
        frontier = next_frontier
    return hits


def verify_label_bound(
    examples: list[TrainingExample],
    max_depth: int,
    threshold: float = 0.99,
    max_states: int = DEFAULT_MAX_STATES,
) -> dict:
    """Check that every oracle-verifiable label upper-bounds the exact
    minimum gate count of its reconstructed residual. Returns a report with
    the label-minus-exact gap histogram; ``violations`` must stay empty."""
    residuals = [features_to_matrix(ex.features) for ex in examples]
    hits = exact_mdl_many(residuals, max_depth, threshold, max_states)
    gaps: dict[int, int] = {}
    violations = []
    checked = 0
    for ex, hit in zip(examples, hits):
        if hit is None:
            continue
        checked += 1
        gap = ex.label - hit.depth
        gaps[gap] = gaps.get(gap, 0) + 1
        if gap < 0:
            violations.append({"label": ex.label, "exact": hit.depth})
    total_gap = sum(g * c for g, c in gaps.items())
    return {
        "examples": len(examples),
        "checked": checked,
        "unresolved": len(examples) - checked,
        "gap_histogram": dict(sorted(gaps.items())),
        "mean_gap": (total_gap / checked) if checked else 0.0,
        "violations": violations,
    }
