"""Pure-Python/numpy versions of the hot kernels.

Every function here has a twin in ``_kernels.pyx`` with the same signature and
the same floating-point operation order, so both backends return bit-identical
results on IEEE-754 hardware (the extension is compiled without FMA
contraction). Complex arithmetic is spelled out on real/imaginary parts for
that reason.
"""

import math

import numpy as np

_BIG = 1e100
_SMALL = 1e-100


def ladder_recurrence_scaled(z_re, z_im, gamma, sqrt_e):
    """Scaled three-term recurrence for ``C_n = Z_n / sqrt(rho_n)``.

    Runs ``C_{n+1} = (z C_n - gamma sqrt(e_n) C_{n-1}) / sqrt(e_{n+1})`` with
    ``C_0 = 1``. Values are stored as ``mant[n] * exp(logscale[n])``.
    """
    sqrt_e = np.asarray(sqrt_e, dtype=np.float64)
    n_max = sqrt_e.shape[0] - 1
    mant_re = np.zeros(n_max + 1)
    mant_im = np.zeros(n_max + 1)
    logscale = np.zeros(n_max + 1)
    p_re = 0.0
    p_im = 0.0
    c_re = 1.0
    c_im = 0.0
    shift = 0.0
    mant_re[0] = 1.0
    for n in range(n_max):
        g = gamma * sqrt_e[n]
        d = sqrt_e[n + 1]
        x_re = ((z_re * c_re - z_im * c_im) - g * p_re) / d
        x_im = ((z_re * c_im + z_im * c_re) - g * p_im) / d
        mant_re[n + 1] = x_re
        mant_im[n + 1] = x_im
        logscale[n + 1] = shift
        s = max(abs(x_re), abs(x_im), abs(c_re), abs(c_im))
        if s > _BIG or (0.0 < s < _SMALL):
            x_re = x_re / s
            x_im = x_im / s
            c_re = c_re / s
            c_im = c_im / s
            shift = shift + math.log(s)
        p_re = c_re
        p_im = c_im
        c_re = x_re
        c_im = x_im
    return mant_re, mant_im, logscale


def hermite_scaled(n_max, x_re, x_im):
    """Physicists' Hermite values ``H_0..H_{n_max}`` at complex ``x`` in scaled form."""
    mant_re = np.zeros(n_max + 1)
    mant_im = np.zeros(n_max + 1)
    logscale = np.zeros(n_max + 1)
    p_re = 0.0
    p_im = 0.0
    c_re = 1.0
    c_im = 0.0
    shift = 0.0
    mant_re[0] = 1.0
    for n in range(n_max):
        k = 2.0 * n
        h_re = 2.0 * (x_re * c_re - x_im * c_im) - k * p_re
        h_im = 2.0 * (x_re * c_im + x_im * c_re) - k * p_im
        mant_re[n + 1] = h_re
        mant_im[n + 1] = h_im
        logscale[n + 1] = shift
        s = max(abs(h_re), abs(h_im), abs(c_re), abs(c_im))
        if s > _BIG or (0.0 < s < _SMALL):
            h_re = h_re / s
            h_im = h_im / s
            c_re = c_re / s
            c_im = c_im / s
            shift = shift + math.log(s)
        p_re = c_re
        p_im = c_im
        c_re = h_re
        c_im = h_im
    return mant_re, mant_im, logscale


def hyp2f1_neumaier(n, b_re, b_im, c, zarg):
    """Terminating 2F1(-n, b; c; zarg) with Neumaier-compensated summation.

    Also returns the largest term modulus (as ``max(|re|, |im|)``), which
    bounds the cancellation error.
    """
    big = 1.0
    t_re = 1.0
    t_im = 0.0
    s_re = 1.0
    s_im = 0.0
    comp_re = 0.0
    comp_im = 0.0
    for k in range(n):
        f = (k - n) * zarg / ((c + k) * (k + 1.0))
        u_re = b_re + k
        # t *= (b + k) * f
        w_re = (t_re * u_re - t_im * b_im) * f
        w_im = (t_re * b_im + t_im * u_re) * f
        t_re = w_re
        t_im = w_im
        big = max(big, abs(t_re), abs(t_im))
        y = s_re + t_re
        if abs(s_re) >= abs(t_re):
            comp_re = comp_re + ((s_re - y) + t_re)
        else:
            comp_re = comp_re + ((t_re - y) + s_re)
        s_re = y
        y = s_im + t_im
        if abs(s_im) >= abs(t_im):
            comp_im = comp_im + ((s_im - y) + t_im)
        else:
            comp_im = comp_im + ((t_im - y) + s_im)
        s_im = y
    return s_re + comp_re, s_im + comp_im, big


def gegenbauer_table(n_max, lam, s):
    """``C_n^lam(s)`` for ``n = 0..n_max`` on a 1-D grid; shape ``(n_max+1, len(s))``."""
    s = np.asarray(s, dtype=np.float64)
    out = np.empty((n_max + 1, s.shape[0]))
    out[0] = 1.0
    if n_max >= 1:
        out[1] = (2.0 * lam) * s
    for n in range(2, n_max + 1):
        out[n] = ((2.0 * (n + lam - 1.0)) * s * out[n - 1]
                  - (n + 2.0 * lam - 2.0) * out[n - 2]) / n
    return out


def orthonormal_gegenbauer_table(n_max, lam, s, w0):
    """Weighted orthonormal Gegenbauer functions on a grid.

    Row ``n`` holds ``w0 * C_n^lam(s) / sqrt(h_n)`` where ``h_n`` is the
    squared norm of ``C_n^lam`` under the weight ``(1-s^2)^(lam-1/2)``.
    ``w0`` must already contain ``cos^lam(q) / sqrt(h_0)``; the recurrence
    then keeps every row O(1).
    """
    s = np.asarray(s, dtype=np.float64)
    out = np.empty((n_max + 1, s.shape[0]))
    out[0] = w0
    if n_max >= 1:
        # h_1/h_0 = 2 lam^2 / (1 + lam)
        r1 = math.sqrt((1.0 + lam) / (2.0 * lam * lam))
        out[1] = (2.0 * lam * r1) * s * out[0]
    r_prev = math.sqrt((1.0 + lam) / (2.0 * lam * lam)) if n_max >= 1 else 1.0
    for n in range(2, n_max + 1):
        # r_n = sqrt(h_{n-1}/h_n)
        r = math.sqrt(n * (n + lam) / ((n + 2.0 * lam - 1.0) * (n + lam - 1.0)))
        a_n = 2.0 * (n + lam - 1.0) * r / n
        b_n = (n + 2.0 * lam - 2.0) * r * r_prev / n
        out[n] = a_n * s * out[n - 1] - b_n * out[n - 2]
        r_prev = r
    return out
