from __future__ import annotations

import numpy as np
import pytest

from mdlsynth.core import Circuit, action_set


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random unitary via QR with phase correction."""
    dim = 2**n
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_circuit(n: int, length: int, rng: np.random.Generator) -> Circuit:
    actions = action_set(n)
    gates = tuple(actions[rng.integers(len(actions))] for _ in range(length))
    return Circuit(n, gates)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
