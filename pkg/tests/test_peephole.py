from __future__ import annotations

import numpy as np
import pytest

from mdlsynth.core import Circuit, circuit_unitary, cx, h, s, t
from mdlsynth.metrics import avg_fidelity
from mdlsynth.peephole import (
    REWRITE_RULES,
    RewriteRule,
    canonical_phase_gates,
    optimize,
    t_count,
)

from conftest import random_circuit


def test_rules_registry_verified():
    assert REWRITE_RULES
    for rule in REWRITE_RULES:
        rule.verify()
        assert len(rule.replacement) <= len(rule.pattern)


def test_bad_rule_rejected():
    with pytest.raises(AssertionError):
        RewriteRule("wrong", (s(0), s(0), t(0), t(0)), ()).verify()
    with pytest.raises(AssertionError):
        RewriteRule("longer", (h(0),), (h(0), h(0), h(0))).verify()


def test_hh_cancels():
    assert optimize(Circuit(1, (h(0), h(0)))).gates == ()


def test_t8_cancels():
    assert optimize(Circuit(1, (t(0),) * 8)).gates == ()


def test_tt_merges_through_disjoint_gate():
    c = Circuit(2, (t(0), h(1), t(0)))
    assert optimize(c).gates == (s(0), h(1))


def test_cx_cancels_through_control_diagonal():
    c = Circuit(2, (cx(0, 1), t(0), cx(0, 1)))
    assert optimize(c).gates == (t(0),)


def test_cx_blocked_by_target_gate():
    c = Circuit(2, (cx(0, 1), t(1), cx(0, 1)))
    assert len(optimize(c)) == 3


def test_sstt_reduces_to_sss():
    # S.S.T.T accumulates T-exponent 6 = S^3 (not the identity)
    c = Circuit(1, (s(0), s(0), t(0), t(0)))
    out = optimize(c)
    assert out.gates == (s(0), s(0), s(0))
    assert avg_fidelity(circuit_unitary(c), circuit_unitary(out)) >= 1 - 1e-12


def test_canonical_phase_gates():
    assert canonical_phase_gates(0, 0) == []
    assert canonical_phase_gates(3, 0) == [s(0), t(0)]
    assert canonical_phase_gates(8, 0) == []
    assert canonical_phase_gates(7, 2) == [s(2), s(2), s(2), t(2)]


def test_t_count():
    assert t_count(Circuit(2)) == 0
    assert t_count(Circuit(2, (t(0), s(0), t(1)))) == 2


@pytest.mark.parametrize("seed", range(5))
def test_random_circuits_preserved(seed):
    rng = np.random.default_rng(seed)
    for _ in range(60):
        n = int(rng.integers(1, 4))
        c = random_circuit(n, int(rng.integers(0, 31)), rng)
        out = optimize(c)
        assert len(out) <= len(c)
        assert (
            avg_fidelity(circuit_unitary(c), circuit_unitary(out)) >= 1 - 1e-9
        )
        again = optimize(out)
        assert again.gates == out.gates
