# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled tuple-enumeration kernels.

Mirrors ``_kernel_py.py``; see that module for the contract.  The loops run
without the GIL so the Python-level thread pool gets real parallelism.
"""
import numpy as np
from libc.math cimport ceil, sqrt, fabs
from libc.stdlib cimport malloc, free
from libc.stdint cimport int64_t

NAME = "cython"

cdef double TIE_EPS = 1e-9


cdef inline double tn(int code, double a, double b) noexcept nogil:
    cdef double s
    if code == 0:
        return a * b
    elif code == 1:
        return a if a < b else b
    s = a + b - 1.0
    return s if s > 0.0 else 0.0


cdef inline bint canonical(Py_ssize_t* idx, const int64_t[:, ::1] perms, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t g, i, a, b
    for g in range(perms.shape[0]):
        for i in range(m):
            a = idx[perms[g, i]]
            b = idx[i]
            if a < b:
                return False
            if a > b:
                break
    return True


def psi_affine(const double[::1] uvals, Py_ssize_t m, int mode, const int64_t[:, ::1] perms, int code,
               const double[::1] alphas, const double[:, :, :, ::1] contrib, const double[:, ::1] offsets,
               const double[::1] lo, const double[::1] hi, const double[::1] step, const int64_t[::1] res,
               const int64_t[::1] strides, double tau_box, double tau_supp,
               Py_ssize_t start, Py_ssize_t stop, double[::1] out):
    cdef Py_ssize_t S = uvals.shape[0]
    cdef Py_ssize_t n = offsets.shape[0]
    cdef Py_ssize_t d = offsets.shape[1]
    cdef Py_ssize_t* idx = <Py_ssize_t*> malloc(m * sizeof(Py_ssize_t))
    cdef double* pv = <double*> malloc(m * sizeof(double))
    cdef Py_ssize_t j, jj, i, r, y, limit, k
    cdef double v, val, c, t
    cdef int err_map = -1
    cdef double err_c = 0.0
    if idx == NULL or pv == NULL:
        free(idx)
        free(pv)
        raise MemoryError()
    with nogil:
        j = 0
        idx[0] = start
        while True:
            limit = stop if j == 0 else S
            if idx[j] >= limit:
                if j == 0:
                    break
                j -= 1
                idx[j] += 1
                continue
            if j == 0:
                v = uvals[idx[0]]
            else:
                v = tn(code, pv[j - 1], uvals[idx[j]])
            if v <= tau_supp:
                idx[j] += 1
                continue
            pv[j] = v
            if j < m - 1:
                j += 1
                idx[j] = idx[j - 1] if mode == 1 else 0
                continue
            if mode == 2 and not canonical(idx, perms, m):
                idx[j] += 1
                continue
            for i in range(n):
                val = tn(code, alphas[i], v)
                if val <= tau_supp:
                    continue
                y = 0
                for r in range(d):
                    c = offsets[i, r]
                    for jj in range(m):
                        c = c + contrib[i, jj, idx[jj], r]
                    if c < lo[r] - tau_box or c > hi[r] + tau_box or c != c:
                        err_map = i
                        break
                    t = (c - lo[r]) / step[r]
                    k = <Py_ssize_t> ceil(t - 0.5 - TIE_EPS)
                    if k < 0:
                        k = 0
                    elif k > res[r] - 1:
                        k = res[r] - 1
                    y += k * strides[r]
                if err_map >= 0:
                    break
                if val > out[y]:
                    out[y] = val
            if err_map >= 0:
                break
            idx[j] += 1
    result = None
    if err_map >= 0:
        pos = tuple(idx[jj] for jj in range(m))
        coords = []
        for r in range(d):
            c = offsets[err_map, r]
            for jj in range(m):
                c = c + contrib[err_map, jj, idx[jj], r]
            coords.append(c)
        result = (err_map, pos, tuple(coords))
    free(idx)
    free(pv)
    return result


def psi_table(const double[::1] uvals, const int64_t[::1] sup, Py_ssize_t m, int mode,
              const int64_t[:, ::1] perms, int code, const double[::1] alphas,
              const int64_t[:, ::1] table, Py_ssize_t N, double tau_supp,
              Py_ssize_t start, Py_ssize_t stop, double[::1] out):
    cdef Py_ssize_t S = uvals.shape[0]
    cdef Py_ssize_t n = table.shape[0]
    cdef Py_ssize_t* idx = <Py_ssize_t*> malloc(m * sizeof(Py_ssize_t))
    cdef double* pv = <double*> malloc(m * sizeof(double))
    cdef Py_ssize_t j, jj, i, y, limit, flat
    cdef double v, val
    if idx == NULL or pv == NULL:
        free(idx)
        free(pv)
        raise MemoryError()
    with nogil:
        j = 0
        idx[0] = start
        while True:
            limit = stop if j == 0 else S
            if idx[j] >= limit:
                if j == 0:
                    break
                j -= 1
                idx[j] += 1
                continue
            if j == 0:
                v = uvals[idx[0]]
            else:
                v = tn(code, pv[j - 1], uvals[idx[j]])
            if v <= tau_supp:
                idx[j] += 1
                continue
            pv[j] = v
            if j < m - 1:
                j += 1
                idx[j] = idx[j - 1] if mode == 1 else 0
                continue
            if mode == 2 and not canonical(idx, perms, m):
                idx[j] += 1
                continue
            flat = 0
            for jj in range(m):
                flat = flat * N + sup[idx[jj]]
            for i in range(n):
                val = tn(code, alphas[i], v)
                if val <= tau_supp:
                    continue
                y = table[i, flat]
                if val > out[y]:
                    out[y] = val
            idx[j] += 1
    free(idx)
    free(pv)
    return None


def hypo_directed(const double[:, ::1] xc, const double[::1] uv, const double[:, ::1] yc,
                  const double[::1] vv, const double[::1] own, int metric):
    cdef Py_ssize_t nx = xc.shape[0], ny = yc.shape[0], d = xc.shape[1]
    cdef Py_ssize_t a, b, r
    cdef double worst = 0.0, best, lift, dist, diff, cand
    with nogil:
        for a in range(nx):
            best = own[a]
            if best <= worst:
                continue
            for b in range(ny):
                lift = uv[a] - vv[b]
                if lift < 0.0:
                    lift = 0.0
                if lift >= best:
                    continue
                dist = 0.0
                if metric == 0:
                    for r in range(d):
                        diff = fabs(xc[a, r] - yc[b, r])
                        if diff > dist:
                            dist = diff
                else:
                    for r in range(d):
                        diff = xc[a, r] - yc[b, r]
                        dist += diff * diff
                    dist = sqrt(dist)
                cand = dist if dist > lift else lift
                if cand < best:
                    best = cand
                    if best <= worst:
                        break
            if best > worst:
                worst = best
    return worst
