# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels for quaternion rotation scoring and sparse updates.

Mirrors ``_kernels_py`` exactly; fused loops avoid the temporaries the
numpy version allocates for every Hamilton product.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

from .errors import DegenerateQuaternionError

cnp.import_array()

BACKEND = "cython"


cdef inline Py_ssize_t _normalize(double[:, :, ::1] w, double[:, :, ::1] wn,
                                  double[:, ::1] n, double eps) noexcept nogil:
    cdef Py_ssize_t B = w.shape[1], K = w.shape[2], b, j
    cdef double s
    for b in range(B):
        for j in range(K):
            s = sqrt(w[0, b, j] * w[0, b, j] + w[1, b, j] * w[1, b, j]
                     + w[2, b, j] * w[2, b, j] + w[3, b, j] * w[3, b, j])
            if s <= eps:
                return b * K + j
            n[b, j] = s
            wn[0, b, j] = w[0, b, j] / s
            wn[1, b, j] = w[1, b, j] / s
            wn[2, b, j] = w[2, b, j] / s
            wn[3, b, j] = w[3, b, j] / s
    return -1


cdef _prepare(w, bint normalize, double eps):
    cdef Py_ssize_t bad
    cdef double[:, :, ::1] wv = w
    if not normalize:
        return w, None
    wn = np.empty_like(w)
    n = np.empty(w.shape[1:])
    cdef double[:, :, ::1] wnv = wn
    cdef double[:, ::1] nv = n
    with nogil:
        bad = _normalize(wv, wnv, nv, eps)
    if bad >= 0:
        raise DegenerateQuaternionError([divmod(bad, w.shape[2])], eps)
    return wn, n


def rotate_score(h, w, t, bint normalize, double eps):
    wn, _ = _prepare(w, normalize, eps)
    cdef double[:, :, ::1] H = h, W = wn, T = t
    cdef Py_ssize_t B = H.shape[1], K = H.shape[2], b, j
    cdef double a1, b1, c1, d1, p, q, u, v, s
    out = np.empty(B)
    cdef double[::1] o = out
    with nogil:
        for b in range(B):
            s = 0.0
            for j in range(K):
                a1 = H[0, b, j]; b1 = H[1, b, j]; c1 = H[2, b, j]; d1 = H[3, b, j]
                p = W[0, b, j]; q = W[1, b, j]; u = W[2, b, j]; v = W[3, b, j]
                s += ((a1 * p - b1 * q - c1 * u - d1 * v) * T[0, b, j]
                      + (a1 * q + b1 * p + c1 * v - d1 * u) * T[1, b, j]
                      + (a1 * u - b1 * v + c1 * p + d1 * q) * T[2, b, j]
                      + (a1 * v + b1 * u - c1 * q + d1 * p) * T[3, b, j])
            o[b] = s
    return out


def rotate_grad(h, w, t, coef, bint normalize, double eps):
    wn, n = _prepare(w, normalize, eps)
    cdef double[:, :, ::1] H = h, W = wn, T = t
    cdef double[::1] C = np.ascontiguousarray(coef, dtype=np.float64)
    cdef double[:, ::1] N
    if normalize:
        N = n
    cdef Py_ssize_t B = H.shape[1], K = H.shape[2], b, j
    gh = np.empty_like(h)
    gw = np.empty_like(h)
    gt = np.empty_like(h)
    cdef double[:, :, ::1] GH = gh, GW = gw, GT = gt
    cdef double a1, b1, c1, d1, a2, b2, c2, d2, p, q, u, v, cb, g0, g1, g2, g3, dot, inv
    with nogil:
        for b in range(B):
            cb = C[b]
            for j in range(K):
                a1 = H[0, b, j]; b1 = H[1, b, j]; c1 = H[2, b, j]; d1 = H[3, b, j]
                a2 = T[0, b, j]; b2 = T[1, b, j]; c2 = T[2, b, j]; d2 = T[3, b, j]
                p = W[0, b, j]; q = W[1, b, j]; u = W[2, b, j]; v = W[3, b, j]
                # tail: h (x) w
                GT[0, b, j] = cb * (a1 * p - b1 * q - c1 * u - d1 * v)
                GT[1, b, j] = cb * (a1 * q + b1 * p + c1 * v - d1 * u)
                GT[2, b, j] = cb * (a1 * u - b1 * v + c1 * p + d1 * q)
                GT[3, b, j] = cb * (a1 * v + b1 * u - c1 * q + d1 * p)
                # head: t (x) conj(w)
                GH[0, b, j] = cb * (a2 * p + b2 * q + c2 * u + d2 * v)
                GH[1, b, j] = cb * (-a2 * q + b2 * p - c2 * v + d2 * u)
                GH[2, b, j] = cb * (-a2 * u + b2 * v + c2 * p - d2 * q)
                GH[3, b, j] = cb * (-a2 * v - b2 * u + c2 * q + d2 * p)
                # relation: conj(h) (x) t
                g0 = cb * (a1 * a2 + b1 * b2 + c1 * c2 + d1 * d2)
                g1 = cb * (a1 * b2 - b1 * a2 - c1 * d2 + d1 * c2)
                g2 = cb * (a1 * c2 + b1 * d2 - c1 * a2 - d1 * b2)
                g3 = cb * (a1 * d2 - b1 * c2 + c1 * b2 - d1 * a2)
                if normalize:
                    dot = p * g0 + q * g1 + u * g2 + v * g3
                    inv = 1.0 / N[b, j]
                    g0 = (g0 - p * dot) * inv
                    g1 = (g1 - q * dot) * inv
                    g2 = (g2 - u * dot) * inv
                    g3 = (g3 - v * dot) * inv
                GW[0, b, j] = g0; GW[1, b, j] = g1; GW[2, b, j] = g2; GW[3, b, j] = g3
    return gh, gw, gt


def scatter_add(dst, idx, src):
    cdef double[:, :, ::1] D = dst
    cdef double[:, :, ::1] S = np.ascontiguousarray(src, dtype=np.float64)
    cdef cnp.int64_t[::1] I = np.ascontiguousarray(idx, dtype=np.int64)
    cdef Py_ssize_t C = S.shape[0], B = S.shape[1], K = S.shape[2], c, b, j, row
    if D.shape[0] != C or D.shape[2] != K or I.shape[0] != B:
        raise ValueError("scatter_add shape mismatch")
    for b in range(B):
        if I[b] < 0 or I[b] >= D.shape[1]:
            raise IndexError(f"row {I[b]} out of range")
    with nogil:
        for c in range(C):
            for b in range(B):
                row = I[b]
                for j in range(K):
                    D[c, row, j] += S[c, b, j]
