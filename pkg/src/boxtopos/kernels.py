"""Hot inner loops over bitmasks and small integer matrices.

Each kernel exists twice: a numba-compiled loop and a vectorised numpy
version. The public names dispatch to one or the other according to
``boxtopos._accel.USE_NUMBA``; both variants stay importable so tests and the
benchmark can compare them directly.

Bitmasks are ``int64``: bit ``i`` stands for element ``i`` of some canonical
ordering, so at most 62 elements fit.
"""

from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit

MAX_MASK_BITS = 62


# -- upper sets by branching -------------------------------------------------

def upper_set_masks_numpy(strict_up: np.ndarray, order: np.ndarray) -> np.ndarray:
    """All upper sets, as sorted masks.

    ``strict_up[e]`` is the mask of elements strictly above ``e``; ``order``
    lists every element after all of its strict upper bounds. Element ``e`` may
    join a partial upper set exactly when everything above it is already in.
    """
    masks = np.zeros(1, dtype=np.int64)
    for e in order:
        need = strict_up[e]
        ok = masks[(masks & need) == need]
        masks = np.concatenate((masks, ok | (np.int64(1) << np.int64(e))))
    masks.sort()
    return masks


@njit
def upper_set_masks_numba(strict_up, order):
    size = 1
    masks = np.zeros(1, dtype=np.int64)
    for t in range(order.shape[0]):
        e = order[t]
        need = strict_up[e]
        bit = np.int64(1) << np.int64(e)
        count = 0
        for i in range(size):
            if masks[i] & need == need:
                count += 1
        out = np.empty(size + count, dtype=np.int64)
        pos = size
        for i in range(size):
            m = masks[i]
            out[i] = m
            if m & need == need:
                out[pos] = m | bit
                pos += 1
        masks = out
        size += count
    masks.sort()
    return masks


# -- upper sets by brute-force subset filter --------------------------------

_CHUNK = 1 << 20


def closed_masks_numpy(up: np.ndarray, n: int) -> np.ndarray:
    """Masks of all subsets ``s`` of ``range(n)`` with ``up[i] ⊆ s`` for each ``i ∈ s``."""
    found = []
    total = 1 << n
    for start in range(0, total, _CHUNK):
        s = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        bad = np.zeros(s.shape, dtype=bool)
        for i in range(n):
            member = ((s >> i) & 1).astype(bool)
            bad |= member & ((s & up[i]) != up[i])
        found.append(s[~bad])
    return np.concatenate(found)


@njit
def closed_masks_numba(up, n):
    total = np.int64(1) << np.int64(n)
    keep = np.zeros(total, dtype=np.bool_)
    count = 0
    for s in range(total):
        good = True
        for i in range(n):
            if (s >> i) & 1 and (s & up[i]) != up[i]:
                good = False
                break
        if good:
            keep[s] = True
            count += 1
    out = np.empty(count, dtype=np.int64)
    pos = 0
    for s in range(total):
        if keep[s]:
            out[pos] = s
            pos += 1
    return out


# -- fraction-free Gauss-Jordan over many column selections -----------------

def basis_solve_numpy(a: np.ndarray, b: np.ndarray, combos: np.ndarray):
    """Solve ``a[:, B] x = b`` for every column selection ``B`` in ``combos``.

    Returns ``(det, num)`` with ``x_B = num / det`` exactly; ``det == 0`` marks
    a singular selection. Integer elimination without fractions (Bareiss,
    Gauss-Jordan form) keeps every intermediate a minor of the input, so the
    caller only has to bound those minors to rule out overflow.
    """
    count, m = combos.shape
    mat = np.empty((count, m, m + 1), dtype=np.int64)
    mat[:, :, :m] = np.transpose(a[:, combos], (1, 0, 2))
    mat[:, :, m] = b[None, :]
    prev = np.ones(count, dtype=np.int64)
    alive = np.ones(count, dtype=bool)
    idx = np.arange(count)
    for k in range(m):
        nz = mat[:, k:, k] != 0
        has = nz.any(axis=1)
        alive &= has
        piv_row = k + np.argmax(nz, axis=1)
        swap = alive & (piv_row != k)
        if swap.any():
            rows = idx[swap]
            tmp = mat[rows, piv_row[swap]].copy()
            mat[rows, piv_row[swap]] = mat[rows, k]
            mat[rows, k] = tmp
        piv = mat[:, k, k]
        colk = mat[:, :, k].copy()
        rowk = mat[:, k, :].copy()
        denom = np.where(alive, prev, 1)
        new = (piv[:, None, None] * mat - colk[:, :, None] * rowk[:, None, :]) // denom[:, None, None]
        new[:, k, :] = rowk
        new[:, :, k] = 0
        new[:, k, k] = piv
        mat = np.where(alive[:, None, None], new, mat)
        prev = np.where(alive, piv, prev)
    det = np.where(alive, prev, 0)
    return det, np.where(alive[:, None], mat[:, :, m], 0)


@njit
def basis_solve_numba(a, b, combos):
    count, m = combos.shape
    det = np.zeros(count, dtype=np.int64)
    num = np.zeros((count, m), dtype=np.int64)
    mat = np.empty((m, m + 1), dtype=np.int64)
    for t in range(count):
        for i in range(m):
            for j in range(m):
                mat[i, j] = a[i, combos[t, j]]
            mat[i, m] = b[i]
        prev = np.int64(1)
        singular = False
        for k in range(m):
            p = -1
            for r in range(k, m):
                if mat[r, k] != 0:
                    p = r
                    break
            if p < 0:
                singular = True
                break
            if p != k:
                for j in range(m + 1):
                    tmp = mat[k, j]
                    mat[k, j] = mat[p, j]
                    mat[p, j] = tmp
            piv = mat[k, k]
            for i in range(m):
                if i == k:
                    continue
                f = mat[i, k]
                for j in range(m + 1):
                    if j != k:
                        mat[i, j] = (piv * mat[i, j] - f * mat[k, j]) // prev
                mat[i, k] = 0
            prev = piv
        if singular:
            continue
        det[t] = prev
        for i in range(m):
            num[t, i] = mat[i, m]
    return det, num


if USE_NUMBA:
    upper_set_masks = upper_set_masks_numba
    closed_masks = closed_masks_numba
    basis_solve = basis_solve_numba
else:
    upper_set_masks = upper_set_masks_numpy
    closed_masks = closed_masks_numpy
    basis_solve = basis_solve_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
