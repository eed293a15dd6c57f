"""Pure-numpy reference implementation of the hot kernels.

The compiled extension (``_fast``) mirrors these semantics exactly; this
module is the fallback selected at import time when the extension is not
built or ``MDLSYNTH_PURE=1`` is set.

Conventions shared by both backends:

- matrices are C-contiguous ``complex128`` of shape (D, D), D = 2**n;
- qubit 0 is the most significant tensor factor, so the basis-index bit of
  qubit ``q`` is ``(i >> (n - 1 - q)) & 1``;
- gate codes: 0 = H, 1 = S, 2 = T, 3 = CX (q0 = control, q1 = target).
"""

from __future__ import annotations

import numpy as np

GATE_H = 0
GATE_S = 1
GATE_T = 2
GATE_CX = 3

_SQRT1_2 = 1.0 / np.sqrt(2.0)
_T_PHASE = np.exp(0.25j * np.pi)

# index arrays keyed by (dim, mask); tiny (D <= 32) and reused constantly
_PAIR_CACHE: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
_PERM_CACHE: dict[tuple[int, int, int], np.ndarray] = {}


def _bit_mask(dim: int, q: int) -> int:
    n = dim.bit_length() - 1
    return 1 << (n - 1 - q)


def _pair_indices(dim: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    mask = _bit_mask(dim, q)
    key = (dim, mask)
    cached = _PAIR_CACHE.get(key)
    if cached is None:
        idx = np.arange(dim)
        i0 = idx[(idx & mask) == 0]
        cached = (i0, i0 | mask)
        _PAIR_CACHE[key] = cached
    return cached


def _cx_perm(dim: int, control: int, target: int) -> np.ndarray:
    key = (dim, control, target)
    perm = _PERM_CACHE.get(key)
    if perm is None:
        cmask = _bit_mask(dim, control)
        tmask = _bit_mask(dim, target)
        perm = np.arange(dim)
        sel = (perm & cmask) != 0
        perm[sel] ^= tmask
        _PERM_CACHE[key] = perm
    return perm


def apply_gate_left(u: np.ndarray, code: int, q0: int, q1: int) -> np.ndarray:
    """Return M(g) @ u without forming the full gate matrix."""
    dim = u.shape[0]
    if code == GATE_H:
        i0, i1 = _pair_indices(dim, q0)
        out = np.empty_like(u)
        out[i0] = (u[i0] + u[i1]) * _SQRT1_2
        out[i1] = (u[i0] - u[i1]) * _SQRT1_2
        return out
    if code == GATE_S:
        _, i1 = _pair_indices(dim, q0)
        out = u.copy()
        out[i1] *= 1j
        return out
    if code == GATE_T:
        _, i1 = _pair_indices(dim, q0)
        out = u.copy()
        out[i1] *= _T_PHASE
        return out
    if code == GATE_CX:
        return u[_cx_perm(dim, q0, q1)].copy()
    raise ValueError(f"unknown gate code {code}")


def apply_gate_adjoint_left(u: np.ndarray, code: int, q0: int, q1: int) -> np.ndarray:
    """Return M(g)^dagger @ u; H and CX are involutions, S/T conjugate phases."""
    dim = u.shape[0]
    if code == GATE_S:
        _, i1 = _pair_indices(dim, q0)
        out = u.copy()
        out[i1] *= -1j
        return out
    if code == GATE_T:
        _, i1 = _pair_indices(dim, q0)
        out = u.copy()
        out[i1] *= _T_PHASE.conjugate()
        return out
    return apply_gate_left(u, code, q0, q1)


def _reference_phase(u: np.ndarray, eps: float) -> complex:
    flat = u.ravel()
    hits = np.flatnonzero(np.abs(flat) > eps)
    if hits.size == 0:
        raise ValueError("no matrix entry above the phase-reference threshold")
    z = flat[hits[0]]
    return z.conjugate() / abs(z)


def phase_normalize(u: np.ndarray, eps: float) -> np.ndarray:
    """Rotate away the global phase so the first row-major entry with modulus
    above ``eps`` becomes real and non-negative."""
    return u * _reference_phase(u, eps)


def padded_features(u: np.ndarray, pad: int, eps: float) -> np.ndarray:
    """Phase-normalize ``u``, embed it as ``u ⊗ I_pad``, and flatten to the
    model feature layout: all real parts row-major, then all imaginary parts."""
    w = phase_normalize(u, eps)
    if pad > 1:
        w = np.kron(w, np.eye(pad))
    return np.concatenate([w.real.ravel(), w.imag.ravel()])


def rounded_key(u: np.ndarray, digits: int, eps: float) -> bytes:
    """Phase-invariant dedup key: normalized entries rounded to ``digits``
    decimals (half-to-even), with negative zero folded into positive zero."""
    w = phase_normalize(u, eps)
    scale = 10.0**digits
    re = np.rint(w.real * scale) + 0.0
    im = np.rint(w.imag * scale) + 0.0
    return re.tobytes() + im.tobytes()
