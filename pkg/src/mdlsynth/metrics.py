"""Distance and fidelity measures between unitaries.

The search terminates on the phase-invariant average gate fidelity

    F_avg(U, V) = (|Tr(U^dagger V)|^2 + D) / (D (D + 1)),   D = 2**n,

which equals the expected state overlap under Haar-random pure inputs.
The Hilbert-Schmidt and worst-case (spectral) distances are provided for
diagnostics; neither is phase-invariant, which is exactly why they are not
used as the success criterion.
"""

from __future__ import annotations

import numpy as np

from .core import num_qubits_of


def _check_dims(u: np.ndarray, v: np.ndarray) -> None:
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")


def hs_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Frobenius norm of the difference."""
    _check_dims(u, v)
    return float(np.linalg.norm(u - v))


def worst_case_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Largest singular value of (u - v): the worst-case error over unit
    input states."""
    _check_dims(u, v)
    return float(np.linalg.svd(u - v, compute_uv=False)[0])


def avg_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """Average gate fidelity; 1 iff u = v up to global phase."""
    _check_dims(u, v)
    dim = u.shape[0]
    overlap = np.abs(np.trace(u.conj().T @ v)) ** 2
    return float((overlap + dim) / (dim * (dim + 1)))


def identity_fidelity(r: np.ndarray) -> float:
    """F_avg(r, I) without forming the identity: |Tr(r)|^2 from the diagonal."""
    dim = r.shape[0]
    overlap = abs(r.diagonal().sum()) ** 2
    return float((overlap + dim) / (dim * (dim + 1)))


def is_converged(r: np.ndarray, threshold: float) -> bool:
    """True iff the residual is within ``threshold`` of the identity under
    average gate fidelity."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    num_qubits_of(r)
    return identity_fidelity(r) >= threshold
