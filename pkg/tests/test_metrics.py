from __future__ import annotations

import numpy as np
import pytest

from mdlsynth.core import gate_matrix, kron_pad, t
from mdlsynth.metrics import (
    avg_fidelity,
    hs_distance,
    identity_fidelity,
    is_converged,
    worst_case_distance,
)

from conftest import random_unitary

X = np.array([[0, 1], [1, 0]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def test_hs_distance_examples():
    assert hs_distance(X, X) == 0.0
    assert hs_distance(I2, X) == pytest.approx(2.0)
    # not phase invariant: the reason the fidelity criterion exists
    assert hs_distance(I2, np.exp(1j * np.pi) * I2) == pytest.approx(2 * np.sqrt(2))


def test_worst_case_examples(rng):
    u = random_unitary(2, rng)
    assert worst_case_distance(u, u) == pytest.approx(0.0, abs=1e-12)
    assert worst_case_distance(I2, X) == pytest.approx(2.0)
    psi = np.array([1, -1]) / np.sqrt(2)
    assert np.linalg.norm((I2 - X) @ psi) == pytest.approx(2.0)


def test_spectral_below_frobenius(rng):
    for _ in range(100):
        u = random_unitary(2, rng)
        v = random_unitary(2, rng)
        assert worst_case_distance(u, v) <= hs_distance(u, v) + 1e-12


def test_avg_fidelity_examples(rng):
    u = random_unitary(3, rng)
    assert avg_fidelity(u, u) == pytest.approx(1.0, abs=1e-12)
    assert avg_fidelity(I2, X) == pytest.approx(1 / 3, abs=1e-12)
    # closed form: (|1 + e^{i pi/4}|^2 + 2) / 6 = (4 + sqrt(2)) / 6
    expected = (4 + np.sqrt(2)) / 6
    assert avg_fidelity(I2, gate_matrix(t(0), 1)) == pytest.approx(expected, abs=1e-12)


def test_avg_fidelity_phase_invariance(rng):
    for _ in range(50):
        u = random_unitary(2, rng)
        v = random_unitary(2, rng)
        phi = rng.uniform(0, 2 * np.pi)
        assert avg_fidelity(np.exp(1j * phi) * u, v) == pytest.approx(
            avg_fidelity(u, v), abs=1e-12
        )


def test_avg_fidelity_symmetry_and_range(rng):
    for _ in range(50):
        u = random_unitary(2, rng)
        v = random_unitary(2, rng)
        f = avg_fidelity(u, v)
        assert f == pytest.approx(avg_fidelity(v, u), abs=1e-12)
        assert -1e-12 <= f <= 1 + 1e-12


def test_metrics_triangle_inequality(rng):
    for _ in range(50):
        a, b, c = (random_unitary(2, rng) for _ in range(3))
        assert hs_distance(a, c) <= hs_distance(a, b) + hs_distance(b, c) + 1e-9
        assert worst_case_distance(a, c) <= (
            worst_case_distance(a, b) + worst_case_distance(b, c) + 1e-9
        )


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        avg_fidelity(I2, np.eye(4))
    with pytest.raises(ValueError):
        hs_distance(I2, np.eye(4))


def test_is_converged():
    assert is_converged(np.eye(2), 0.99)
    for phi in (0.3, np.pi, -1.0):
        assert is_converged(np.exp(1j * phi) * np.eye(4), 0.99)
    # T (x) I_4: F_avg against I_8 from the closed-form trace
    r = kron_pad(gate_matrix(t(0), 1), 3)
    overlap = abs(np.trace(r)) ** 2
    expected = (overlap + 8) / (8 * 9)
    assert identity_fidelity(r) == pytest.approx(expected, abs=1e-12)
    assert is_converged(r, 0.99) == (expected >= 0.99)
    assert not is_converged(r, 0.999)
    with pytest.raises(ValueError):
        is_converged(np.eye(2), 0.0)
