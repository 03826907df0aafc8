"""numba-compiled gate kernels.

Every kernel walks the ``2**(n - k - c)`` amplitude groups left after fixing
the operand bits, gathers the ``2**k`` target amplitudes of each group into
complex128 accumulators, multiplies and scatters back. Groups are independent,
so the outer loop is a ``prange``; ``SVSIM_NUMBA_PARALLEL=1`` turns on
threading, otherwise kernels compile serial with the GIL released so chunk
workers can run them side by side.
"""
import os

import numpy as np
from numba import njit, prange

NAME = "numba"
PARALLEL = os.environ.get("SVSIM_NUMBA_PARALLEL", "0").lower() in ("1", "true", "yes")
_BLOCK = 1024

_jit = njit(cache=True, nogil=True, parallel=PARALLEL)


@njit(cache=True, inline="always")
def _insert_zeros(g, ops):
    # ops sorted ascending
    i = g
    for b in ops:
        i = ((i >> b) << (b + 1)) | (i & ((1 << b) - 1))
    return i


@_jit
def _k_1q(state, m, target, ops, ctrl_mask):
    tbit = 1 << target
    ngroups = state.size >> ops.size
    m00, m01, m10, m11 = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    for g in prange(ngroups):
        i0 = _insert_zeros(g, ops) | ctrl_mask
        i1 = i0 | tbit
        a0 = np.complex128(state[i0])
        a1 = np.complex128(state[i1])
        state[i0] = m00 * a0 + m01 * a1
        state[i1] = m10 * a0 + m11 * a1


@_jit
def _k_diag1(state, d0, d1, target, ops, ctrl_mask):
    tbit = 1 << target
    ngroups = state.size >> ops.size
    for g in prange(ngroups):
        i0 = _insert_zeros(g, ops) | ctrl_mask
        i1 = i0 | tbit
        if d0 != 1:
            state[i0] = d0 * np.complex128(state[i0])
        state[i1] = d1 * np.complex128(state[i1])


@_jit
def _k_x1(state, target, ops, ctrl_mask):
    tbit = 1 << target
    ngroups = state.size >> ops.size
    for g in prange(ngroups):
        i0 = _insert_zeros(g, ops) | ctrl_mask
        i1 = i0 | tbit
        tmp = state[i0]
        state[i0] = state[i1]
        state[i1] = tmp


@_jit
def _k_2q(state, m, t0, t1, ops):
    b0, b1 = 1 << t0, 1 << t1
    ngroups = state.size >> 2
    for g in prange(ngroups):
        i0 = _insert_zeros(g, ops)
        i1 = i0 | b0
        i2 = i0 | b1
        i3 = i1 | b1
        a0 = np.complex128(state[i0])
        a1 = np.complex128(state[i1])
        a2 = np.complex128(state[i2])
        a3 = np.complex128(state[i3])
        state[i0] = m[0, 0] * a0 + m[0, 1] * a1 + m[0, 2] * a2 + m[0, 3] * a3
        state[i1] = m[1, 0] * a0 + m[1, 1] * a1 + m[1, 2] * a2 + m[1, 3] * a3
        state[i2] = m[2, 0] * a0 + m[2, 1] * a1 + m[2, 2] * a2 + m[2, 3] * a3
        state[i3] = m[3, 0] * a0 + m[3, 1] * a1 + m[3, 2] * a2 + m[3, 3] * a3


@_jit
def _k_3q(state, m, offs, ops):
    ngroups = state.size >> 3
    nblocks = (ngroups + _BLOCK - 1) // _BLOCK
    for blk in prange(nblocks):
        buf = np.empty(8, dtype=np.complex128)
        stop = min(ngroups, (blk + 1) * _BLOCK)
        for g in range(blk * _BLOCK, stop):
            base = _insert_zeros(g, ops)
            for s in range(8):
                buf[s] = state[base | offs[s]]
            for r in range(8):
                acc = 0j
                for s in range(8):
                    acc += m[r, s] * buf[s]
                state[base | offs[r]] = acc


@_jit
def _k_generic(state, m, offs, ops, ctrl_mask):
    dim = offs.size
    ngroups = state.size >> ops.size
    nblocks = (ngroups + _BLOCK - 1) // _BLOCK
    for blk in prange(nblocks):
        buf = np.empty(dim, dtype=np.complex128)
        stop = min(ngroups, (blk + 1) * _BLOCK)
        for g in range(blk * _BLOCK, stop):
            base = _insert_zeros(g, ops) | ctrl_mask
            for s in range(dim):
                buf[s] = state[base | offs[s]]
            for r in range(dim):
                acc = 0j
                for s in range(dim):
                    acc += m[r, s] * buf[s]
                state[base | offs[r]] = acc


@_jit
def _k_exchange(lo, hi, bit):
    # lo[i | bit] <-> hi[i] for every i with the bit clear
    b = 1 << bit
    npairs = lo.size >> 1
    for g in prange(npairs):
        i = ((g >> bit) << (bit + 1)) | (g & (b - 1))
        tmp = lo[i | b]
        lo[i | b] = hi[i]
        hi[i] = tmp


def _ops(qubits):
    return np.array(sorted(qubits), dtype=np.int64)


def _offsets(targets):
    k = len(targets)
    offs = np.zeros(1 << k, dtype=np.int64)
    for s in range(1 << k):
        for j in range(k):
            if (s >> j) & 1:
                offs[s] |= 1 << targets[j]
    return offs


def _mask(controls):
    mask = 0
    for c in controls:
        mask |= 1 << c
    return mask


def apply_1q(state, mat, target, controls=()):
    m = np.ascontiguousarray(mat, dtype=np.complex128)
    ops = _ops((target,) + tuple(controls))
    mask = _mask(controls)
    if m[0, 1] == 0 and m[1, 0] == 0:
        _k_diag1(state, m[0, 0], m[1, 1], target, ops, mask)
    elif m[0, 0] == 0 and m[1, 1] == 0 and m[0, 1] == 1 and m[1, 0] == 1:
        _k_x1(state, target, ops, mask)
    else:
        _k_1q(state, m, target, ops, mask)
    return state


def apply_2q(state, mat, targets):
    m = np.ascontiguousarray(mat, dtype=np.complex128)
    _k_2q(state, m, targets[0], targets[1], _ops(targets))
    return state


def apply_3q(state, mat, targets):
    m = np.ascontiguousarray(mat, dtype=np.complex128)
    _k_3q(state, m, _offsets(targets), _ops(targets))
    return state


def apply_generic(state, mat, targets, controls=()):
    m = np.ascontiguousarray(mat, dtype=np.complex128)
    ops = _ops(tuple(targets) + tuple(controls))
    _k_generic(state, m, _offsets(targets), ops, _mask(controls))
    return state


def exchange(lo_chunk, hi_chunk, bit):
    _k_exchange(lo_chunk, hi_chunk, bit)
