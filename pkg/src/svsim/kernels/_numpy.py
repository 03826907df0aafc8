"""Pure-numpy gate kernels (reference path, also used when numba is disabled)."""
import numpy as np

NAME = "numpy"


def apply_matrix(state, mat, targets, controls=()):
    """In-place ``state <- (mat on targets | controls all 1) state``.

    ``targets[j]`` is bit ``j`` of the matrix row/column index. Works via a
    tensor view of the amplitude array; qubit ``q`` is axis ``n - 1 - q``.
    """
    n = state.size.bit_length() - 1
    k = len(targets)
    psi = state.reshape((2,) * n)
    idx = [slice(None)] * n
    for c in controls:
        idx[n - 1 - c] = 1
    view = psi[tuple(idx)]
    remaining = [a for a in range(n) if isinstance(idx[a], slice)]
    t_axes = [remaining.index(n - 1 - targets[k - 1 - i]) for i in range(k)]
    mt = np.asarray(mat, dtype=np.complex128).reshape((2,) * (2 * k))
    res = np.tensordot(mt, view, axes=(list(range(k, 2 * k)), t_axes))
    view[...] = np.moveaxis(res, list(range(k)), t_axes)
    return state


def apply_1q(state, mat, target, controls=()):
    return apply_matrix(state, mat, (target,), controls)


def apply_2q(state, mat, targets):
    return apply_matrix(state, mat, targets)


def apply_3q(state, mat, targets):
    return apply_matrix(state, mat, targets)


def apply_generic(state, mat, targets, controls=()):
    return apply_matrix(state, mat, targets, controls)


def exchange(lo_chunk, hi_chunk, bit):
    """Swap ``lo_chunk`` amplitudes with ``bit`` set against ``hi_chunk`` ones with it clear."""
    a = lo_chunk.reshape(-1, 2, 1 << bit)
    b = hi_chunk.reshape(-1, 2, 1 << bit)
    tmp = a[:, 1, :].copy()
    a[:, 1, :] = b[:, 0, :]
    b[:, 0, :] = tmp
