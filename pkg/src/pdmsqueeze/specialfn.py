"""Special functions used throughout the package.

Log-gamma and Gamma ratios, Gegenbauer and Hermite polynomials, and the
terminating Gauss hypergeometric sum. Quantities that grow quickly are
carried as :class:`LogSigned` or as (mantissa, log-scale) pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._backend import kernels

_EPS = 2.0 ** -52
_HYP_RTOL = 1e-13


@dataclass(frozen=True)
class LogSigned:
    """A real number stored as ``sign * exp(log_magnitude)``.

    ``sign == 0`` represents exact zero; ``log_magnitude`` is then ignored.
    """

    log_magnitude: float
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign}")

    @classmethod
    def from_float(cls, value: float) -> "LogSigned":
        if value == 0.0:
            return cls(-math.inf, 0)
        return cls(math.log(abs(value)), 1 if value > 0 else -1)

    def __mul__(self, other: "LogSigned") -> "LogSigned":
        sign = self.sign * other.sign
        if sign == 0:
            return LogSigned(-math.inf, 0)
        return LogSigned(self.log_magnitude + other.log_magnitude, sign)

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)


def log_gamma(x: float) -> float:
    """Natural log of the Gamma function for ``x > 0``."""
    if not x > 0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def gamma_ratio_log(n: int, c: float) -> float:
    """``ln[Gamma(n+1+c) / Gamma(1+c)]`` as the telescoped sum ``sum_{j=1..n} ln(j+c)``."""
    if not c > 0:
        raise ValueError(f"gamma_ratio_log requires c > 0, got {c}")
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    return math.fsum(math.log(j + c) for j in range(1, n + 1))


def gamma_ratio_log_table(n_max: int, c: float) -> np.ndarray:
    """All of ``gamma_ratio_log(n, c)`` for ``n = 0..n_max``."""
    terms = [math.log(j + c) for j in range(1, n_max + 1)]
    out = np.zeros(n_max + 1)
    for n in range(1, n_max + 1):
        out[n] = math.fsum(terms[:n])
    return out


def gegenbauer(n: int, lam: float, s: float) -> float:
    """Gegenbauer polynomial ``C_n^lam(s)`` by the three-term recurrence."""
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    prev, cur = 0.0, 1.0
    if n == 0:
        return cur
    prev, cur = cur, 2.0 * lam * s
    for k in range(2, n + 1):
        prev, cur = cur, (2.0 * (k + lam - 1.0) * s * cur - (k + 2.0 * lam - 2.0) * prev) / k
    return cur


def gegenbauer_derivative(n: int, lam: float, s: float) -> float:
    """``d/ds C_n^lam(s) = 2 lam C_{n-1}^{lam+1}(s)``."""
    if n == 0:
        return 0.0
    return 2.0 * lam * gegenbauer(n - 1, lam + 1.0, s)


def gegenbauer_table(n_max: int, lam: float, s) -> np.ndarray:
    """``C_n^lam`` for ``n = 0..n_max`` on a grid, shape ``(n_max + 1, len(s))``."""
    s = np.atleast_1d(np.asarray(s, dtype=np.float64))
    return kernels.gegenbauer_table(int(n_max), float(lam), s)


def hermite(n: int, x: float) -> float:
    """Physicists' Hermite polynomial ``H_n(x)`` (leading coefficient ``2**n``)."""
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    prev, cur = 0.0, 1.0
    for k in range(n):
        prev, cur = cur, 2.0 * x * cur - 2.0 * k * prev
    return cur


def hermite_scaled(n_max: int, x: complex) -> tuple[np.ndarray, np.ndarray]:
    """``H_0..H_{n_max}`` at complex ``x`` as ``(mantissa, logscale)``.

    ``H_n(x) == mantissa[n] * exp(logscale[n])``; no overflow for large ``n``.
    """
    x = complex(x)
    mr, mi, ls = kernels.hermite_scaled(int(n_max), x.real, x.imag)
    return mr + 1j * mi, ls


def hyp2f1_terminating(n: int, beta: complex, c: float, zarg: float,
                       exact: bool | None = None) -> complex:
    """Terminating Gauss hypergeometric sum ``2F1(-n, beta; c; zarg)``.

    Parameters
    ----------
    n : int
        Degree; the first parameter is ``-n`` so the series has ``n + 1`` terms.
    beta : complex
        Second numerator parameter.
    c : float
        Denominator parameter. ``c + k`` must stay away from nonpositive
        integers for ``k < n``.
    zarg : float
        Argument.
    exact : bool, optional
        Sum in exact rational arithmetic instead of compensated floating point.
        ``None`` (default) sums in floating point first and redoes the sum
        exactly when the largest term exceeds the result by enough that term
        rounding (``~ n eps max|t_k|``) could cost more than ``1e-13``
        relative. This always happens for large ``n`` at ``zarg = 2``.

    Returns
    -------
    complex
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    for k in range(n):
        ck = c + k
        if ck <= 0 and float(ck).is_integer():
            raise ValueError(f"c + {k} = {ck} is a nonpositive integer")
    beta = complex(beta)
    if exact:
        return _hyp2f1_exact(n, beta, c, zarg)
    re, im, big = kernels.hyp2f1_neumaier(int(n), beta.real, beta.imag, float(c), float(zarg))
    value = complex(re, im)
    if exact is None and (n + 1) * _EPS * big > _HYP_RTOL * abs(value):
        return _hyp2f1_exact(n, beta, c, zarg)
    return value


def _hyp2f1_exact(n, beta, c, zarg):
    b_re = Fraction(beta.real)
    b_im = Fraction(beta.imag)
    c = Fraction(c)
    zarg = Fraction(zarg)
    t_re, t_im = Fraction(1), Fraction(0)
    s_re, s_im = Fraction(1), Fraction(0)
    for k in range(n):
        f = (k - n) * zarg / ((c + k) * (k + 1))
        u_re = b_re + k
        t_re, t_im = (t_re * u_re - t_im * b_im) * f, (t_re * b_im + t_im * u_re) * f
        s_re += t_re
        s_im += t_im
    return complex(float(s_re), float(s_im))
