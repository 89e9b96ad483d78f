# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled scoring kernel for resolution-spoofing sweeps.

Must stay semantically identical to fpeval._kernels.fallback.score_grid;
the test suite checks the two against each other.
"""

from libc.math cimport log2
from libc.stdlib cimport calloc, free, malloc, qsort

import numpy as np

DEF MAX_CELLS = 33554432  # 2**25 count slots (256 MiB); guards absurd grids


cdef int _cmp_int64(const void* a, const void* b) noexcept nogil:
    cdef long long x = (<const long long*> a)[0]
    cdef long long y = (<const long long*> b)[0]
    if x < y:
        return -1
    if x > y:
        return 1
    return 0


def score_grid(long long[::1] ws, long long[::1] hs, long long[:, ::1] candidates):
    cdef Py_ssize_t n = ws.shape[0]
    cdef Py_ssize_t ncand = candidates.shape[0]
    if n == 0:
        raise ValueError("score_grid needs at least one record")
    if hs.shape[0] != n:
        raise ValueError("ws and hs must have the same length")
    if candidates.shape[1] != 4:
        raise ValueError("candidates must have shape (ncand, 4)")

    cdef Py_ssize_t i, ci, t
    cdef long long cap_w, cap_h, qw, qh, ncw, nch, cells, max_cells = 0
    for i in range(n):
        if ws[i] < 1 or hs[i] < 1:
            raise ValueError("screen dimensions must be >= 1")
    for ci in range(ncand):
        cap_w = candidates[ci, 0]
        cap_h = candidates[ci, 1]
        qw = candidates[ci, 2]
        qh = candidates[ci, 3]
        if qw < 1 or qh < 1 or cap_w < qw or cap_h < qh:
            raise ValueError("candidate quanta must be >= 1 and <= the caps")
        cells = ((cap_w + qw - 1) // qw) * ((cap_h + qh - 1) // qh)
        if cells > max_cells:
            max_cells = cells
    if max_cells > MAX_CELLS:
        raise ValueError(
            "candidate grid too fine for the compiled kernel; "
            "set FPEVAL_KERNEL=python to use the numpy fallback"
        )

    out_arr = np.empty((ncand, 5), dtype=np.float64)
    cdef double[:, ::1] out = out_arr

    cdef long long* counts = <long long*> calloc(max_cells, sizeof(long long))
    cdef long long* touched = <long long*> malloc(n * sizeof(long long))
    if counts == NULL or touched == NULL:
        free(counts)
        free(touched)
        raise MemoryError()

    cdef long long w, h, mw, mh, wp, hp, uw, uh, code, count, loss_sum, le1, le10
    cdef Py_ssize_t ntouched
    cdef double ratio_sum, entropy, p
    try:
        for ci in range(ncand):
            cap_w = candidates[ci, 0]
            cap_h = candidates[ci, 1]
            qw = candidates[ci, 2]
            qh = candidates[ci, 3]
            ncw = (cap_w + qw - 1) // qw
            nch = (cap_h + qh - 1) // qh

            loss_sum = 0
            ratio_sum = 0.0
            ntouched = 0
            for i in range(n):
                w = ws[i]
                h = hs[i]
                mw = w // qw
                if mw < 1:
                    mw = 1
                mh = h // qh
                if mh < 1:
                    mh = 1
                wp = mw * qw
                if wp > cap_w:
                    wp = cap_w
                hp = mh * qh
                if hp > cap_h:
                    hp = cap_h

                uw = wp if wp < w else w
                uh = hp if hp < h else h
                loss_sum += w * h - uw * uh
                ratio_sum += (<double> (w * h - uw * uh)) / (<double> (w * h))

                code = ((mw if mw < ncw else ncw) - 1) * nch + ((mh if mh < nch else nch) - 1)
                if counts[code] == 0:
                    touched[ntouched] = code
                    ntouched += 1
                counts[code] += 1

            # ascending-code order mirrors the fallback's np.unique grouping
            qsort(touched, ntouched, sizeof(long long), _cmp_int64)

            entropy = 0.0
            le1 = 0
            le10 = 0
            for t in range(ntouched):
                count = counts[touched[t]]
                p = (<double> count) / (<double> n)
                entropy -= p * log2(p)
                if count <= 1:
                    le1 += count
                if count <= 10:
                    le10 += count
                counts[touched[t]] = 0

            out[ci, 0] = entropy + 0.0
            out[ci, 1] = (<double> le1) / (<double> n)
            out[ci, 2] = (<double> le10) / (<double> n)
            out[ci, 3] = (<double> loss_sum) / (<double> n)
            out[ci, 4] = ratio_sum / (<double> n)
    finally:
        free(counts)
        free(touched)
    return out_arr
