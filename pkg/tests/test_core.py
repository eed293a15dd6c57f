from __future__ import annotations

import numpy as np
import pytest

from mdlsynth.core import (
    Circuit,
    Gate,
    action_set,
    circuit_unitary,
    cx,
    format_circuit,
    gate_matrix,
    h,
    identity,
    kron_pad,
    load_target,
    parse_circuit,
    parse_unitary,
    format_unitary,
    residual,
    s,
    t,
    unitarity_error,
    write_circuit,
)
from mdlsynth.errors import CircuitFormatError
from mdlsynth.search import adjoint_circuit

from conftest import random_circuit, random_unitary

X = np.array([[0, 1], [1, 0]], dtype=complex)


def test_gate_base_matrices():
    np.testing.assert_allclose(
        gate_matrix(h(0), 1), np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    )
    np.testing.assert_allclose(gate_matrix(s(0), 1), np.diag([1, 1j]))
    np.testing.assert_allclose(
        gate_matrix(t(0), 1), np.diag([1, np.exp(1j * np.pi / 4)])
    )


def test_t_squared_is_s():
    tt = gate_matrix(t(0), 1) @ gate_matrix(t(0), 1)
    np.testing.assert_allclose(tt, gate_matrix(s(0), 1), atol=1e-15)


def test_cx_is_involution():
    m = gate_matrix(cx(0, 1), 2)
    np.testing.assert_allclose(m @ m, np.eye(4), atol=1e-15)


def test_cx_action_on_basis():
    # qubit 0 is the most significant bit: CX(0,1)|10> = |11>
    m = gate_matrix(cx(0, 1), 2)
    np.testing.assert_allclose(m @ np.eye(4)[:, 2], np.eye(4)[:, 3])
    np.testing.assert_allclose(m @ np.eye(4)[:, 0], np.eye(4)[:, 0])


def test_single_qubit_embedding():
    np.testing.assert_allclose(
        gate_matrix(t(1), 2), np.kron(np.eye(2), gate_matrix(t(0), 1))
    )
    np.testing.assert_allclose(
        gate_matrix(t(0), 2), np.kron(gate_matrix(t(0), 1), np.eye(2))
    )


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("CX", (1, 1))
    with pytest.raises(ValueError):
        Gate("H", (0, 1))
    with pytest.raises(ValueError):
        Gate("Q", (0,))
    with pytest.raises(ValueError):
        gate_matrix(h(3), 2)


def test_empty_circuit_unitary():
    np.testing.assert_allclose(circuit_unitary(Circuit(2)), np.eye(4))


def test_circuit_order_convention():
    # U((g1, g2)) = M(g2) @ M(g1), checked on a non-commuting pair
    c = Circuit(1, (h(0), t(0)))
    expected = gate_matrix(t(0), 1) @ gate_matrix(h(0), 1)
    np.testing.assert_allclose(circuit_unitary(c), expected, atol=1e-15)
    swapped = gate_matrix(h(0), 1) @ gate_matrix(t(0), 1)
    assert not np.allclose(circuit_unitary(c), swapped)


def test_ghz_preparation_unitary():
    c = Circuit(2, (h(0), cx(0, 1)))
    expected = gate_matrix(cx(0, 1), 2) @ np.kron(gate_matrix(h(0), 1), np.eye(2))
    np.testing.assert_allclose(circuit_unitary(c), expected, atol=1e-15)


def test_unitarity_preserved(rng):
    for _ in range(25):
        c = random_circuit(int(rng.integers(1, 5)), int(rng.integers(0, 40)), rng)
        assert unitarity_error(circuit_unitary(c)) <= 1e-10


def test_circuit_adjoint_roundtrip_identity(rng):
    for _ in range(10):
        c = random_circuit(2, int(rng.integers(1, 15)), rng)
        u = circuit_unitary(c)
        u_adj = circuit_unitary(adjoint_circuit(c))
        np.testing.assert_allclose(u_adj @ u, np.eye(4), atol=1e-9)


def test_residual_trivial_cases(rng):
    u = random_unitary(2, rng)
    np.testing.assert_allclose(residual(u, u), np.eye(4), atol=1e-12)
    np.testing.assert_allclose(residual(np.eye(4), u), u)
    with pytest.raises(ValueError):
        residual(np.eye(2), np.eye(4))


def test_residual_telescoping(rng):
    # residual(U(C_{1:t}), U(C)) equals the suffix circuit's unitary, all cuts
    c = random_circuit(2, 12, rng)
    target = circuit_unitary(c)
    for cut in range(len(c) + 1):
        res = residual(circuit_unitary(c.prefix(cut)), target)
        np.testing.assert_allclose(
            res, circuit_unitary(c.suffix(cut)), atol=1e-10
        )
        np.testing.assert_allclose(
            circuit_unitary(c.prefix(cut)) @ res, target, atol=1e-10
        )


def test_kron_pad():
    np.testing.assert_allclose(kron_pad(np.eye(2), 2), np.eye(4))
    np.testing.assert_allclose(kron_pad(X, 2), np.kron(X, np.eye(2)))
    np.testing.assert_allclose(kron_pad(X, 1), X)
    with pytest.raises(ValueError):
        kron_pad(np.eye(4), 1)


def test_kron_pad_homomorphism(rng):
    u = random_unitary(2, rng)
    v = random_unitary(2, rng)
    np.testing.assert_allclose(
        kron_pad(u @ v, 4), kron_pad(u, 4) @ kron_pad(v, 4), atol=1e-12
    )


def test_circuit_text_roundtrip(rng):
    c = random_circuit(3, 20, rng)
    assert parse_circuit(format_circuit(c)) == c


def test_circuit_text_comments_and_errors():
    c = parse_circuit("# leading comment\nQUBITS 2\nH 0 # trailing\n\nCX 0 1\n")
    assert c == Circuit(2, (h(0), cx(0, 1)))
    for bad in (
        "H 0\n",  # missing header
        "QUBITS 2\nH\n",  # missing index
        "QUBITS 2\nCX 1 1\n",  # control == target
        "QUBITS 2\nH 2\n",  # index out of range
        "QUBITS 2\nRZ 0\n",  # unknown gate
        "QUBITS x\n",
    ):
        with pytest.raises(CircuitFormatError):
            parse_circuit(bad)


def test_unitary_text_roundtrip(rng, tmp_path):
    u = random_unitary(2, rng)
    np.testing.assert_allclose(parse_unitary(format_unitary(u)), u, atol=1e-15)
    path = tmp_path / "target.mat"
    path.write_text(format_unitary(u))
    np.testing.assert_allclose(load_target(path), u, atol=1e-15)


def test_unitary_text_rejects_nonunitary():
    bad = np.eye(2) * 2.0
    with pytest.raises(CircuitFormatError):
        parse_unitary(format_unitary(bad.astype(complex)))


def test_load_target_from_circuit_file(tmp_path, rng):
    c = random_circuit(2, 6, rng)
    path = tmp_path / "c.circ"
    write_circuit(c, path)
    np.testing.assert_allclose(load_target(path), circuit_unitary(c), atol=1e-12)


def test_action_set_sizes():
    assert len(action_set(1)) == 3
    assert len(action_set(2)) == 8
    assert len(action_set(5)) == 35
