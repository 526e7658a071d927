# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: half-integer Matern evaluation and the
minimum-distance greedy selection loop.

Must stay decision-identical to ``geoadapt._core._fallback``: squared
distances against delta**2, argmax ties to the lowest index.
"""

from libc.math cimport exp

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


def matern_half_integer(u, double phi, int case):
    """Matern correlation at kappa = case/2 for case in {1, 3, 5}."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] uu = np.ascontiguousarray(
        np.asarray(u, dtype=np.float64).ravel()
    )
    cdef Py_ssize_t n = uu.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] uv = uu
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    cdef double t
    if case == 1:
        for i in range(n):
            ov[i] = exp(-uv[i] / phi)
    elif case == 3:
        for i in range(n):
            t = uv[i] / phi
            ov[i] = (1.0 + t) * exp(-t)
    elif case == 5:
        for i in range(n):
            t = uv[i] / phi
            ov[i] = (1.0 + t + t * t / 3.0) * exp(-t)
    else:
        raise ValueError(f"unsupported half-integer case: {case}")
    return out.reshape(np.shape(u))


def select_min_dist_batch(pv, cand_xy, active, design_xy, int b, double delta):
    """Greedy max-variance selection under a minimum-distance constraint.

    Same contract as the fallback: picks up to ``b`` active candidates by
    decreasing ``pv``, accepting only those strictly farther than ``delta``
    from all design points and earlier picks; rejected candidates leave the
    active set too.  ``active`` is updated in place.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pv_arr = np.ascontiguousarray(pv, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] cxy = np.ascontiguousarray(cand_xy, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] act = np.ascontiguousarray(active).view(np.uint8)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dxy = np.ascontiguousarray(
        np.asarray(design_xy, dtype=np.float64).reshape(-1, 2)
    )
    cdef Py_ssize_t n = pv_arr.shape[0]
    cdef Py_ssize_t nd = dxy.shape[0]
    cdef double delta2 = delta * delta

    # taken points: design points followed by accepted picks
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tx = np.empty(nd + b, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ty = np.empty(nd + b, dtype=np.float64)
    cdef Py_ssize_t ntaken = nd
    cdef Py_ssize_t i, j, best
    for i in range(nd):
        tx[i] = dxy[i, 0]
        ty[i] = dxy[i, 1]

    cdef cnp.ndarray[cnp.int64_t, ndim=1] chosen = np.empty(b, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] rejected = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t nchosen = 0, nrejected = 0
    cdef double bestv, v, xi, yi, dx, dy
    cdef bint ok

    while nchosen < b:
        best = -1
        bestv = 0.0
        for i in range(n):
            if act[i]:
                v = pv_arr[i]
                if best < 0 or v > bestv:
                    best = i
                    bestv = v
        if best < 0:
            break
        act[best] = 0
        xi = cxy[best, 0]
        yi = cxy[best, 1]
        ok = True
        for j in range(ntaken):
            dx = xi - tx[j]
            dy = yi - ty[j]
            if dx * dx + dy * dy <= delta2:
                ok = False
                break
        if ok:
            chosen[nchosen] = best
            nchosen += 1
            tx[ntaken] = xi
            ty[ntaken] = yi
            ntaken += 1
        else:
            rejected[nrejected] = best
            nrejected += 1
    return chosen[:nchosen].copy(), rejected[:nrejected].copy()
