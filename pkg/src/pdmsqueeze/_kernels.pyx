# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Mirrors ``_kernels_py`` operation for operation."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, log, sqrt

cnp.import_array()

cdef double _BIG = 1e100
cdef double _SMALL = 1e-100


cdef inline double _max4(double a, double b, double c, double d) nogil:
    cdef double m = a
    if b > m:
        m = b
    if c > m:
        m = c
    if d > m:
        m = d
    return m


def ladder_recurrence_scaled(double z_re, double z_im, double gamma, sqrt_e):
    cdef const double[::1] se = np.ascontiguousarray(sqrt_e, dtype=np.float64)
    cdef Py_ssize_t n_max = se.shape[0] - 1
    mr = np.zeros(n_max + 1)
    mi = np.zeros(n_max + 1)
    ls = np.zeros(n_max + 1)
    cdef double[::1] mant_re = mr
    cdef double[::1] mant_im = mi
    cdef double[::1] logscale = ls
    cdef double p_re = 0.0, p_im = 0.0, c_re = 1.0, c_im = 0.0, shift = 0.0
    cdef double g, d, x_re, x_im, s
    cdef Py_ssize_t n
    mant_re[0] = 1.0
    with nogil:
        for n in range(n_max):
            g = gamma * se[n]
            d = se[n + 1]
            x_re = ((z_re * c_re - z_im * c_im) - g * p_re) / d
            x_im = ((z_re * c_im + z_im * c_re) - g * p_im) / d
            mant_re[n + 1] = x_re
            mant_im[n + 1] = x_im
            logscale[n + 1] = shift
            s = _max4(fabs(x_re), fabs(x_im), fabs(c_re), fabs(c_im))
            if s > _BIG or (0.0 < s and s < _SMALL):
                x_re = x_re / s
                x_im = x_im / s
                c_re = c_re / s
                c_im = c_im / s
                shift = shift + log(s)
            p_re = c_re
            p_im = c_im
            c_re = x_re
            c_im = x_im
    return mr, mi, ls


def hermite_scaled(Py_ssize_t n_max, double x_re, double x_im):
    mr = np.zeros(n_max + 1)
    mi = np.zeros(n_max + 1)
    ls = np.zeros(n_max + 1)
    cdef double[::1] mant_re = mr
    cdef double[::1] mant_im = mi
    cdef double[::1] logscale = ls
    cdef double p_re = 0.0, p_im = 0.0, c_re = 1.0, c_im = 0.0, shift = 0.0
    cdef double k, h_re, h_im, s
    cdef Py_ssize_t n
    mant_re[0] = 1.0
    with nogil:
        for n in range(n_max):
            k = 2.0 * <double>n
            h_re = 2.0 * (x_re * c_re - x_im * c_im) - k * p_re
            h_im = 2.0 * (x_re * c_im + x_im * c_re) - k * p_im
            mant_re[n + 1] = h_re
            mant_im[n + 1] = h_im
            logscale[n + 1] = shift
            s = _max4(fabs(h_re), fabs(h_im), fabs(c_re), fabs(c_im))
            if s > _BIG or (0.0 < s and s < _SMALL):
                h_re = h_re / s
                h_im = h_im / s
                c_re = c_re / s
                c_im = c_im / s
                shift = shift + log(s)
            p_re = c_re
            p_im = c_im
            c_re = h_re
            c_im = h_im
    return mr, mi, ls


def hyp2f1_neumaier(Py_ssize_t n, double b_re, double b_im, double c, double zarg):
    cdef double t_re = 1.0, t_im = 0.0, s_re = 1.0, s_im = 0.0, big = 1.0
    cdef double comp_re = 0.0, comp_im = 0.0
    cdef double f, u_re, w_re, w_im, y
    cdef Py_ssize_t k
    with nogil:
        for k in range(n):
            f = <double>(k - n) * zarg / ((c + <double>k) * (<double>k + 1.0))
            u_re = b_re + <double>k
            w_re = (t_re * u_re - t_im * b_im) * f
            w_im = (t_re * b_im + t_im * u_re) * f
            t_re = w_re
            t_im = w_im
            if fabs(t_re) > big:
                big = fabs(t_re)
            if fabs(t_im) > big:
                big = fabs(t_im)
            y = s_re + t_re
            if fabs(s_re) >= fabs(t_re):
                comp_re = comp_re + ((s_re - y) + t_re)
            else:
                comp_re = comp_re + ((t_re - y) + s_re)
            s_re = y
            y = s_im + t_im
            if fabs(s_im) >= fabs(t_im):
                comp_im = comp_im + ((s_im - y) + t_im)
            else:
                comp_im = comp_im + ((t_im - y) + s_im)
            s_im = y
    return s_re + comp_re, s_im + comp_im, big


def gegenbauer_table(Py_ssize_t n_max, double lam, s):
    cdef const double[::1] sv = np.ascontiguousarray(s, dtype=np.float64)
    cdef Py_ssize_t m = sv.shape[0]
    res = np.empty((n_max + 1, m))
    cdef double[:, ::1] out = res
    cdef Py_ssize_t n, j
    cdef double c1, c2
    with nogil:
        for j in range(m):
            out[0, j] = 1.0
        if n_max >= 1:
            c1 = 2.0 * lam
            for j in range(m):
                out[1, j] = c1 * sv[j]
        for n in range(2, n_max + 1):
            c1 = 2.0 * (<double>n + lam - 1.0)
            c2 = <double>n + 2.0 * lam - 2.0
            for j in range(m):
                out[n, j] = ((c1 * sv[j]) * out[n - 1, j] - c2 * out[n - 2, j]) / <double>n
    return res


def orthonormal_gegenbauer_table(Py_ssize_t n_max, double lam, s, w0):
    cdef const double[::1] sv = np.ascontiguousarray(s, dtype=np.float64)
    cdef Py_ssize_t m = sv.shape[0]
    cdef const double[::1] wv = np.ascontiguousarray(np.broadcast_to(w0, (m,)), dtype=np.float64)
    res = np.empty((n_max + 1, m))
    cdef double[:, ::1] out = res
    cdef Py_ssize_t n, j
    cdef double r1, r, r_prev, a_n, b_n, dn
    with nogil:
        for j in range(m):
            out[0, j] = wv[j]
        r_prev = 1.0
        if n_max >= 1:
            r1 = sqrt((1.0 + lam) / (2.0 * lam * lam))
            a_n = 2.0 * lam * r1
            for j in range(m):
                out[1, j] = (a_n * sv[j]) * out[0, j]
            r_prev = sqrt((1.0 + lam) / (2.0 * lam * lam))
        for n in range(2, n_max + 1):
            dn = <double>n
            r = sqrt(dn * (dn + lam) / ((dn + 2.0 * lam - 1.0) * (dn + lam - 1.0)))
            a_n = 2.0 * (dn + lam - 1.0) * r / dn
            b_n = (dn + 2.0 * lam - 2.0) * r * r_prev / dn
            for j in range(m):
                out[n, j] = (a_n * sv[j]) * out[n - 1, j] - b_n * out[n - 2, j]
            r_prev = r
    return res
