# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for gate application, phase normalization, feature
building, and dedup keys. Semantics match ``_ref`` exactly; see that module
for the shared conventions (qubit 0 = most significant bit, gate codes)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport hypot, rint, sqrt

cnp.import_array()

GATE_H = 0
GATE_S = 1
GATE_T = 2
GATE_CX = 3

cdef double SQRT1_2 = 1.0 / sqrt(2.0)
cdef double complex T_PHASE = np.exp(0.25j * np.pi)
cdef double complex T_PHASE_C = np.conj(np.exp(0.25j * np.pi))


cdef inline int _bit_mask(int dim, int q):
    cdef int n = 0
    cdef int d = dim
    while d > 1:
        d >>= 1
        n += 1
    return 1 << (n - 1 - q)


cdef cnp.ndarray _as_matrix(object u):
    return np.ascontiguousarray(u, dtype=np.complex128)


cdef cnp.ndarray _apply(object u, int code, int q0, int q1, bint adjoint):
    cdef cnp.ndarray ua = _as_matrix(u)
    cdef double complex[:, ::1] um = ua
    cdef int dim = um.shape[0]
    cdef cnp.ndarray out_arr = np.empty((dim, dim), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef int i, j, i1, mask, cmask, tmask, src
    cdef double complex a, b, ph

    if code == GATE_H:
        mask = _bit_mask(dim, q0)
        for i in range(dim):
            if i & mask:
                continue
            i1 = i | mask
            for j in range(dim):
                a = um[i, j]
                b = um[i1, j]
                out[i, j] = (a + b) * SQRT1_2
                out[i1, j] = (a - b) * SQRT1_2
        return out_arr

    if code == GATE_S or code == GATE_T:
        if code == GATE_S:
            ph = -1j if adjoint else 1j
        else:
            ph = T_PHASE_C if adjoint else T_PHASE
        mask = _bit_mask(dim, q0)
        for i in range(dim):
            if i & mask:
                for j in range(dim):
                    out[i, j] = um[i, j] * ph
            else:
                for j in range(dim):
                    out[i, j] = um[i, j]
        return out_arr

    if code == GATE_CX:
        cmask = _bit_mask(dim, q0)
        tmask = _bit_mask(dim, q1)
        for i in range(dim):
            src = (i ^ tmask) if (i & cmask) else i
            for j in range(dim):
                out[i, j] = um[src, j]
        return out_arr

    raise ValueError(f"unknown gate code {code}")


def apply_gate_left(u, int code, int q0, int q1):
    """Return M(g) @ u without forming the full gate matrix."""
    return _apply(u, code, q0, q1, False)


def apply_gate_adjoint_left(u, int code, int q0, int q1):
    """Return M(g)^dagger @ u; H and CX are involutions, S/T conjugate phases."""
    return _apply(u, code, q0, q1, True)


cdef double complex _reference_phase(double complex[:, ::1] um, double eps) except *:
    cdef int dim = um.shape[0]
    cdef int i, j
    cdef double complex z
    cdef double m
    for i in range(dim):
        for j in range(dim):
            z = um[i, j]
            m = hypot(z.real, z.imag)
            if m > eps:
                return z.conjugate() / m
    raise ValueError("no matrix entry above the phase-reference threshold")


def phase_normalize(u, double eps):
    """Rotate away the global phase so the first row-major entry with modulus
    above ``eps`` becomes real and non-negative."""
    cdef cnp.ndarray ua = _as_matrix(u)
    cdef double complex[:, ::1] um = ua
    cdef double complex ph = _reference_phase(um, eps)
    cdef int dim = um.shape[0]
    cdef cnp.ndarray out_arr = np.empty((dim, dim), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef int i, j
    for i in range(dim):
        for j in range(dim):
            out[i, j] = um[i, j] * ph
    return out_arr


def padded_features(u, int pad, double eps):
    """Phase-normalize ``u``, embed it as ``u ⊗ I_pad``, and flatten to the
    model feature layout: all real parts row-major, then all imaginary parts."""
    cdef cnp.ndarray ua = _as_matrix(u)
    cdef double complex[:, ::1] um = ua
    cdef double complex ph = _reference_phase(um, eps)
    cdef int dim = um.shape[0]
    cdef int dp = dim * pad
    cdef int half = dp * dp
    cdef cnp.ndarray out_arr = np.zeros(2 * half, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef int i, j, a, row, col
    cdef double complex v
    for i in range(dim):
        for j in range(dim):
            v = um[i, j] * ph
            for a in range(pad):
                row = i * pad + a
                col = j * pad + a
                out[row * dp + col] = v.real
                out[half + row * dp + col] = v.imag
    return out_arr


def rounded_key(u, int digits, double eps):
    """Phase-invariant dedup key: normalized entries rounded to ``digits``
    decimals (half-to-even), with negative zero folded into positive zero."""
    cdef cnp.ndarray ua = _as_matrix(u)
    cdef double complex[:, ::1] um = ua
    cdef double complex ph = _reference_phase(um, eps)
    cdef int dim = um.shape[0]
    cdef int half = dim * dim
    cdef cnp.ndarray buf_arr = np.empty(2 * half, dtype=np.float64)
    cdef double[::1] buf = buf_arr
    cdef double scale = 10.0**digits
    cdef int i, j, k
    cdef double complex v
    k = 0
    for i in range(dim):
        for j in range(dim):
            v = um[i, j] * ph
            buf[k] = rint(v.real * scale) + 0.0
            buf[half + k] = rint(v.imag * scale) + 0.0
            k += 1
    return buf_arr.tobytes()
