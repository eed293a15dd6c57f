"""Backend parity: the compiled kernels and the numpy fallback must agree
with each other and with a naive dense-matrix oracle."""

from __future__ import annotations

import numpy as np
import pytest

from mdlsynth._kernels import _ref
from mdlsynth.core import action_set, gate_matrix
from mdlsynth.datagen import PHASE_EPS

from conftest import random_unitary

try:
    from mdlsynth._kernels import _fast

    BACKENDS = [_ref, _fast]
except ImportError:
    BACKENDS = [_ref]

_CODES = {"H": 0, "S": 1, "T": 2, "CX": 3}


def _coded(gate):
    q1 = gate.qubits[1] if len(gate.qubits) == 2 else 0
    return _CODES[gate.kind], gate.qubits[0], q1


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_apply_matches_dense_matmul(impl, n, rng):
    u = random_unitary(n, rng)
    for gate in action_set(n):
        mat = gate_matrix(gate, n)
        code, q0, q1 = _coded(gate)
        np.testing.assert_allclose(
            impl.apply_gate_left(u, code, q0, q1), mat @ u, atol=1e-12
        )
        np.testing.assert_allclose(
            impl.apply_gate_adjoint_left(u, code, q0, q1),
            mat.conj().T @ u,
            atol=1e-12,
        )


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_phase_normalize_reference_entry(impl, rng):
    u = random_unitary(2, rng)
    for phi in (0.0, 0.7, np.pi, -2.1):
        w = impl.phase_normalize(np.exp(1j * phi) * u, PHASE_EPS)
        flat = w.ravel()
        k = np.flatnonzero(np.abs(flat) > PHASE_EPS)[0]
        assert flat[k].imag == pytest.approx(0.0, abs=1e-12)
        assert flat[k].real >= 0.0


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_phase_normalize_rejects_zero_matrix(impl):
    with pytest.raises(ValueError):
        impl.phase_normalize(np.zeros((2, 2), dtype=complex), PHASE_EPS)


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
@pytest.mark.parametrize("n,pad", [(1, 1), (1, 4), (2, 1), (2, 8), (3, 4)])
def test_padded_features_layout(impl, n, pad, rng):
    u = random_unitary(n, rng)
    feats = impl.padded_features(u, pad, PHASE_EPS)
    norm = _ref.phase_normalize(u, PHASE_EPS)
    padded = np.kron(norm, np.eye(pad)) if pad > 1 else norm
    expected = np.concatenate([padded.real.ravel(), padded.imag.ravel()])
    np.testing.assert_allclose(feats, expected, atol=1e-12)


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_rounded_key_phase_invariant(impl, rng):
    for _ in range(20):
        u = random_unitary(2, rng)
        phi = rng.uniform(0, 2 * np.pi)
        assert impl.rounded_key(u, 6, PHASE_EPS) == impl.rounded_key(
            np.exp(1j * phi) * u, 6, PHASE_EPS
        )


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")
def test_backends_agree(rng):
    for n in (1, 2, 3, 5):
        u = random_unitary(n, rng)
        for gate in action_set(n):
            code, q0, q1 = _coded(gate)
            np.testing.assert_allclose(
                _ref.apply_gate_left(u, code, q0, q1),
                _fast.apply_gate_left(u, code, q0, q1),
                atol=1e-14,
            )
        np.testing.assert_allclose(
            _ref.phase_normalize(u, PHASE_EPS),
            _fast.phase_normalize(u, PHASE_EPS),
            atol=1e-14,
        )
        np.testing.assert_allclose(
            _ref.padded_features(u, 2, PHASE_EPS),
            _fast.padded_features(u, 2, PHASE_EPS),
            atol=1e-14,
        )
        assert _ref.rounded_key(u, 6, PHASE_EPS) == _fast.rounded_key(u, 6, PHASE_EPS)
