# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of _kernels_py: same signatures, same operation order.

Built with FP contraction disabled so results match the numpy backend
bitwise; tests/test_kernels.py asserts the exact agreement."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

GHOST = 3

cdef int _G = 3
cdef double _C13 = 13.0 / 12.0
cdef double _D0 = 0.1
cdef double _D1 = 0.6
cdef double _D2 = 0.3


cdef inline void _load(const double[:, ::1] lines, bint left, Py_ssize_t r,
                       Py_ssize_t f, double* a, double* b, double* c,
                       double* d, double* e) noexcept nogil:
    cdef Py_ssize_t base
    if left:
        base = _G + f - 1
        a[0] = lines[r, base - 2]
        b[0] = lines[r, base - 1]
        c[0] = lines[r, base]
        d[0] = lines[r, base + 1]
        e[0] = lines[r, base + 2]
    else:
        base = _G + f
        a[0] = lines[r, base + 2]
        b[0] = lines[r, base + 1]
        c[0] = lines[r, base]
        d[0] = lines[r, base - 1]
        e[0] = lines[r, base - 2]


def weno5_faces(const double[:, ::1] lines, str bias, double eps):
    cdef Py_ssize_t L = lines.shape[0]
    cdef Py_ssize_t n = lines.shape[1] - 2 * _G
    cdef Py_ssize_t nf = n + 1
    cdef bint left = bias == "left"
    if not left and bias != "right":
        raise ValueError(f"bias must be 'left' or 'right', got {bias!r}")
    out_arr = np.empty((L, nf))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, f
    cdef double a, b, c, d, e, da, db, dd, de
    cdef double t, b0, b1, b2, a0, a1, a2, s, q0, q1, q2
    with nogil:
        for r in range(L):
            for f in range(nf):
                _load(lines, left, r, f, &a, &b, &c, &d, &e)
                da = a - c
                db = b - c
                dd = d - c
                de = e - c
                t = da - 2.0 * db
                b0 = _C13 * (t * t)
                t = da - 4.0 * db
                b0 = b0 + 0.25 * (t * t)
                t = db + dd
                b1 = _C13 * (t * t)
                t = db - dd
                b1 = b1 + 0.25 * (t * t)
                t = de - 2.0 * dd
                b2 = _C13 * (t * t)
                t = de - 4.0 * dd
                b2 = b2 + 0.25 * (t * t)
                t = eps + b0
                a0 = _D0 / (t * t)
                t = eps + b1
                a1 = _D1 / (t * t)
                t = eps + b2
                a2 = _D2 / (t * t)
                s = a0 + a1 + a2
                q0 = (2.0 * da - 7.0 * db) / 6.0
                q1 = (2.0 * dd - db) / 6.0
                q2 = (5.0 * dd - de) / 6.0
                out[r, f] = c + (a0 * q0 + a1 * q1 + a2 * q2) / s
    return out_arr


def weno5_weights(const double[:, ::1] lines, str bias, double eps):
    cdef Py_ssize_t L = lines.shape[0]
    cdef Py_ssize_t n = lines.shape[1] - 2 * _G
    cdef Py_ssize_t nf = n + 1
    cdef bint left = bias == "left"
    if not left and bias != "right":
        raise ValueError(f"bias must be 'left' or 'right', got {bias!r}")
    out_arr = np.empty((3, L, nf))
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t r, f
    cdef double a, b, c, d, e, da, db, dd, de
    cdef double t, b0, b1, b2, a0, a1, a2, s
    with nogil:
        for r in range(L):
            for f in range(nf):
                _load(lines, left, r, f, &a, &b, &c, &d, &e)
                da = a - c
                db = b - c
                dd = d - c
                de = e - c
                t = da - 2.0 * db
                b0 = _C13 * (t * t)
                t = da - 4.0 * db
                b0 = b0 + 0.25 * (t * t)
                t = db + dd
                b1 = _C13 * (t * t)
                t = db - dd
                b1 = b1 + 0.25 * (t * t)
                t = de - 2.0 * dd
                b2 = _C13 * (t * t)
                t = de - 4.0 * dd
                b2 = b2 + 0.25 * (t * t)
                t = eps + b0
                a0 = _D0 / (t * t)
                t = eps + b1
                a1 = _D1 / (t * t)
                t = eps + b2
                a2 = _D2 / (t * t)
                s = a0 + a1 + a2
                out[0, r, f] = a0 / s
                out[1, r, f] = a1 / s
                out[2, r, f] = a2 / s
    return out_arr


def weno5_faces_fixed(const double[:, ::1] lines, const double[:, :, ::1] weights,
                      str bias):
    cdef Py_ssize_t L = lines.shape[0]
    cdef Py_ssize_t n = lines.shape[1] - 2 * _G
    cdef Py_ssize_t nf = n + 1
    cdef bint left = bias == "left"
    if not left and bias != "right":
        raise ValueError(f"bias must be 'left' or 'right', got {bias!r}")
    out_arr = np.empty((L, nf))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, f
    cdef double a, b, c, d, e, da, db, dd, de, q0, q1, q2
    with nogil:
        for r in range(L):
            for f in range(nf):
                _load(lines, left, r, f, &a, &b, &c, &d, &e)
                da = a - c
                db = b - c
                dd = d - c
                de = e - c
                q0 = (2.0 * da - 7.0 * db) / 6.0
                q1 = (2.0 * dd - db) / 6.0
                q2 = (5.0 * dd - de) / 6.0
                out[r, f] = c + (weights[0, r, f] * q0 + weights[1, r, f] * q1
                                 + weights[2, r, f] * q2)
    return out_arr


def interp4_ext(const double[:, ::1] lines):
    cdef Py_ssize_t L = lines.shape[0]
    cdef Py_ssize_t n = lines.shape[1] - 2 * _G
    cdef Py_ssize_t w = n + 3
    out_arr = np.empty((L, w))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, j
    cdef double a, b, c, d
    with nogil:
        for r in range(L):
            for j in range(w):
                a = lines[r, _G - 3 + j]
                b = lines[r, _G - 2 + j]
                c = lines[r, _G - 1 + j]
                d = lines[r, _G + j]
                out[r, j] = (9.0 * (b + c) - (a + d)) / 16.0
    return out_arr


def grad4_ext(const double[:, ::1] lines, double dx):
    cdef Py_ssize_t L = lines.shape[0]
    cdef Py_ssize_t n = lines.shape[1] - 2 * _G
    cdef Py_ssize_t w = n + 3
    out_arr = np.empty((L, w))
    cdef double[:, ::1] out = out_arr
    cdef double denom = 24.0 * dx
    cdef Py_ssize_t r, j
    cdef double a, b, c, d
    with nogil:
        for r in range(L):
            for j in range(w):
                a = lines[r, _G - 3 + j]
                b = lines[r, _G - 2 + j]
                c = lines[r, _G - 1 + j]
                d = lines[r, _G + j]
                out[r, j] = ((a - d) + 27.0 * (c - b)) / denom
    return out_arr


def div4_ext(const double[:, ::1] faces, double dx):
    cdef Py_ssize_t L = faces.shape[0]
    cdef Py_ssize_t n = faces.shape[1] - 3
    out_arr = np.empty((L, n))
    cdef double[:, ::1] out = out_arr
    cdef double denom = 24.0 * dx
    cdef Py_ssize_t r, cidx
    cdef double f0, f1, f2, f3
    with nogil:
        for r in range(L):
            for cidx in range(n):
                f0 = faces[r, cidx]
                f1 = faces[r, cidx + 1]
                f2 = faces[r, cidx + 2]
                f3 = faces[r, cidx + 3]
                out[r, cidx] = ((f0 - f3) + 27.0 * (f2 - f1)) / denom
    return out_arr


def flux_div4(const double[:, ::1] p_faces, const double[:, ::1] c_faces,
              const double[:, ::1] lines, double dx):
    cdef Py_ssize_t L = lines.shape[0]
    cdef Py_ssize_t n = lines.shape[1] - 2 * _G
    cdef Py_ssize_t w = n + 3
    out_arr = np.empty((L, n))
    cdef double[:, ::1] out = out_arr
    scratch_arr = np.empty(w)
    cdef double[::1] flux = scratch_arr
    cdef double denom = 24.0 * dx
    cdef Py_ssize_t r, j, cidx
    cdef double a, b, c, d
    for r in range(L):
        with nogil:
            for j in range(w):
                a = lines[r, _G - 3 + j]
                b = lines[r, _G - 2 + j]
                c = lines[r, _G - 1 + j]
                d = lines[r, _G + j]
                flux[j] = p_faces[r, j] - c_faces[r, j] * (((a - d)
                          + 27.0 * (c - b)) / denom)
            for cidx in range(n):
                out[r, cidx] = ((flux[cidx] - flux[cidx + 3])
                                + 27.0 * (flux[cidx + 2] - flux[cidx + 1])) / denom
    return out_arr
