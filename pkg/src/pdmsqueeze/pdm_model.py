"""Position-dependent-mass harmonic oscillator with ``m(x) = m0 / (1 + alpha x^2)^2``.

Parameters, derived constants, energy spectrum, the ladder weights
``rho_n = prod_k e_k`` and the Gegenbauer eigenfunctions.

The eigenfunctions live in two representations. ``psi_n(q)`` uses the compact
variable ``q = arctan(x sqrt(alpha))`` and is unit-normalized in ``dq``.
``phi_n(x)`` is the physical wavefunction, unit-normalized in ``dx``; it carries
an extra ``alpha**(1/4)`` relative to the bare Gegenbauer normalization
constant because ``dx = dq / (sqrt(alpha) cos^2 q)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specialfn
from ._backend import kernels
from .specialfn import LogSigned

N_CAP = 512


@dataclass(frozen=True)
class ModelParams:
    """Physical inputs. Defaults are the dimensionless units ``hbar = m0 = omega = 1``."""

    m0: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0
    alpha: float = 0.0

    def __post_init__(self):
        for name in ("m0", "omega", "hbar"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v}")
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")


@dataclass(frozen=True)
class DerivedConstants:
    """Constants derived from :class:`ModelParams`.

    ``kappa`` and ``lam`` are ``None`` in the undeformed branch
    (``deformed is False``), where the Gegenbauer eigenfunctions do not exist.
    """

    a: float
    b: float
    c_shift: float
    deformed: bool
    kappa: float | None = None
    lam: float | None = None
    params: ModelParams | None = None

    @classmethod
    def from_ladder(cls, a: float, b: float) -> "DerivedConstants":
        """Bare ``(a, b)`` pair for ladder-only work (no eigenfunctions)."""
        if a < 0 or b <= 0:
            raise ValueError(f"need a >= 0 and b > 0, got a={a}, b={b}")
        return cls(a=float(a), b=float(b), c_shift=0.0, deformed=a > 0)

    @property
    def b_over_a(self) -> float:
        if self.a == 0:
            return math.inf
        return self.b / self.a


def mass_at(params: ModelParams, x):
    """Mass profile ``m0 / (1 + alpha x^2)^2``."""
    return params.m0 / (1.0 + params.alpha * np.square(x)) ** 2


def _root_factor(params: ModelParams) -> float:
    return math.sqrt(1.0 + (params.alpha * params.hbar) ** 2
                     / (4.0 * params.m0 ** 2 * params.omega ** 2))


def derive_constants(params: ModelParams) -> DerivedConstants:
    """Compute ``kappa``, ``lam``, ``a``, ``b`` and the shift ``c``."""
    m0, w, hb, al = params.m0, params.omega, params.hbar, params.alpha
    a = al * hb ** 2 / (2.0 * m0)
    b = hb * w * _root_factor(params) + al * hb ** 2 / m0
    c_shift = hb * al / (2.0 * m0 * w)
    if al == 0:
        return DerivedConstants(a=0.0, b=hb * w, c_shift=0.0, deformed=False, params=params)
    kappa = m0 * w / (al * hb)
    lam = 0.5 + 0.5 * math.sqrt(1.0 + 4.0 * kappa ** 2)
    return DerivedConstants(a=a, b=b, c_shift=c_shift, deformed=True,
                            kappa=kappa, lam=lam, params=params)


def energy(params: ModelParams, n: int) -> float:
    """Energy level from the closed-form spectrum.

    ``E_n = hbar omega (n + 1/2) sqrt(1 + alpha^2 hbar^2 / (4 m0^2 omega^2))
    + (alpha hbar^2 / 2 m0)(n^2 + 2n + 1/2)``.

    This is the spectrum that defines ``e_n`` and the state weights. It differs
    from :func:`eigenvalue` by ``a * n``.
    """
    hb, al, m0 = params.hbar, params.alpha, params.m0
    return (hb * params.omega * (n + 0.5) * _root_factor(params)
            + al * hb ** 2 / (2.0 * m0) * (n * n + 2 * n + 0.5))


def energy_table(params: ModelParams, n_max: int) -> np.ndarray:
    n = np.arange(n_max + 1, dtype=np.float64)
    hb, al, m0 = params.hbar, params.alpha, params.m0
    return (hb * params.omega * (n + 0.5) * _root_factor(params)
            + al * hb ** 2 / (2.0 * m0) * (n * n + 2 * n + 0.5))


def eigenvalue(params: ModelParams, n: int) -> float:
    """Exact eigenvalue of the PDM Hamiltonian from ``eps_n = lam + n(n + 2 lam)``.

    ``E = (alpha hbar^2 / 2 m0) eps_n``; equals ``hbar omega (n + 1/2)`` at ``alpha = 0``.
    """
    if params.alpha == 0:
        return params.hbar * params.omega * (n + 0.5)
    lam = derive_constants(params).lam
    return params.alpha * params.hbar ** 2 / (2.0 * params.m0) * (lam + n * (n + 2.0 * lam))


def dimensionless_energy(consts: DerivedConstants, n: int) -> float:
    """``e_n = n (a n + b) = E_n - E_0``."""
    return n * (consts.a * n + consts.b)


def dimensionless_energy_table(consts: DerivedConstants, n_max: int) -> np.ndarray:
    n = np.arange(n_max + 1, dtype=np.float64)
    return n * (consts.a * n + consts.b)


def rho_log(consts: DerivedConstants, n: int) -> LogSigned:
    """``ln rho_n`` with ``rho_n = n! a^n Gamma(n+1+b/a)/Gamma(1+b/a)``.

    Undeformed branch (``a == 0``): ``rho_n = b^n n!``.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if n == 0:
        return LogSigned(0.0, 1)
    if consts.a == 0:
        return LogSigned(n * math.log(consts.b) + specialfn.log_gamma(n + 1), 1)
    return LogSigned(n * math.log(consts.a) + specialfn.log_gamma(n + 1)
                     + specialfn.gamma_ratio_log(n, consts.b / consts.a), 1)


def rho_log_table(consts: DerivedConstants, n_max: int) -> np.ndarray:
    """``ln rho_n`` for ``n = 0..n_max`` (closed Gamma form)."""
    n = np.arange(n_max + 1)
    lgf = np.array([math.lgamma(k + 1) for k in n])
    if consts.a == 0:
        return n * math.log(consts.b) + lgf
    return (n * math.log(consts.a) + lgf
            + specialfn.gamma_ratio_log_table(n_max, consts.b / consts.a))


# -- eigenfunctions -----------------------------------------------------------

def _require_deformed(consts: DerivedConstants):
    if not consts.deformed or consts.lam is None or consts.params is None:
        raise ValueError("eigenfunctions need alpha > 0 (Gegenbauer branch only)")


def log_norm_constant(lam: float, n: int) -> float:
    """``ln N`` with ``N^2 = n! (n + lam) Gamma(lam)^2 / (pi 2^(1-2 lam) Gamma(n + 2 lam))``."""
    return 0.5 * (math.lgamma(n + 1) + math.log(n + lam) + 2.0 * math.lgamma(lam)
                  - math.log(math.pi) - (1.0 - 2.0 * lam) * math.log(2.0)
                  - math.lgamma(n + 2.0 * lam))


def eigenfunction_q(consts: DerivedConstants, n: int, q: float) -> float:
    """``psi_n(q) = N cos^lam(q) C_n^lam(sin q)``, unit norm in ``dq``."""
    _require_deformed(consts)
    if abs(q) >= math.pi / 2:
        raise ValueError(f"q must lie in (-pi/2, pi/2), got {q}")
    lam = consts.lam
    cq = math.cos(q)
    poly = specialfn.gegenbauer(n, lam, math.sin(q))
    if poly == 0.0:
        return 0.0
    return math.copysign(math.exp(log_norm_constant(lam, n) + lam * math.log(cq)
                                  + math.log(abs(poly))), poly)


def eigenfunction_x(consts: DerivedConstants, n: int, x: float) -> float:
    """Physical eigenfunction ``phi_n(x)``, unit norm in ``dx``.

    ``phi_n(x) = alpha^(1/4) N (1 + alpha x^2)^(-(lam+1)/2) C_n^lam(x sqrt(alpha) / sqrt(1 + alpha x^2))``
    """
    _require_deformed(consts)
    alpha, lam = consts.params.alpha, consts.lam
    w = 1.0 + alpha * x * x
    poly = specialfn.gegenbauer(n, lam, x * math.sqrt(alpha) / math.sqrt(w))
    if poly == 0.0:
        return 0.0
    log_mag = (0.25 * math.log(alpha) + log_norm_constant(lam, n)
               - 0.5 * (lam + 1.0) * math.log(w) + math.log(abs(poly)))
    return math.copysign(math.exp(log_mag), poly)


def eigenfunction_x_derivative(consts: DerivedConstants, n: int, x: float) -> float:
    """Analytic ``d phi_n / dx`` by the chain rule through ``s = x sqrt(alpha) / sqrt(1 + alpha x^2)``."""
    _require_deformed(consts)
    alpha, lam = consts.params.alpha, consts.lam
    w = 1.0 + alpha * x * x
    sa = math.sqrt(alpha)
    s = x * sa / math.sqrt(w)
    ds_dx = sa * w ** -1.5
    pref = math.exp(0.25 * math.log(alpha) + log_norm_constant(lam, n))
    env = w ** (-0.5 * (lam + 1.0))
    denv_dx = -(lam + 1.0) * alpha * x * w ** (-0.5 * (lam + 1.0) - 1.0)
    poly = specialfn.gegenbauer(n, lam, s)
    dpoly = specialfn.gegenbauer_derivative(n, lam, s)
    return pref * (denv_dx * poly + env * dpoly * ds_dx)


def psi_table(consts: DerivedConstants, n_max: int, q) -> np.ndarray:
    """``psi_n(q)`` for ``n = 0..n_max`` on a grid, shape ``(n_max+1, len(q))``.

    Uses the orthonormal recurrence with the ``cos^lam`` envelope folded into
    the seed row, so no row overflows even for large ``lam``.
    """
    _require_deformed(consts)
    q = np.atleast_1d(np.asarray(q, dtype=np.float64))
    lam = consts.lam
    with np.errstate(divide="ignore"):
        w0 = np.exp(log_norm_constant(lam, 0) + lam * np.log(np.cos(q)))
    return kernels.orthonormal_gegenbauer_table(int(n_max), float(lam), np.sin(q), w0)


def dpsi_dq_table(consts: DerivedConstants, psi: np.ndarray, q) -> np.ndarray:
    """``d psi_n / dq`` from a :func:`psi_table` block.

    Uses ``(1 - s^2) C_n' = -n s C_n + (n + 2 lam - 1) C_{n-1}``, which gives
    ``cos(q) psi_n' = -(n + lam) s psi_n + (n + 2 lam - 1) sqrt(h_{n-1}/h_n) psi_{n-1}``.
    """
    lam = consts.lam
    q = np.atleast_1d(np.asarray(q, dtype=np.float64))
    s = np.sin(q)
    cq = np.cos(q)
    n = np.arange(psi.shape[0], dtype=np.float64)[:, None]
    out = -(n + lam) * s * psi
    if psi.shape[0] > 1:
        nn = n[1:]
        ratio = np.sqrt(nn * (nn + lam) / ((nn + 2.0 * lam - 1.0) * (nn + lam - 1.0)))
        out[1:] += (nn + 2.0 * lam - 1.0) * ratio * psi[:-1]
    return out / cq


def phi_table(consts: DerivedConstants, n_max: int, x) -> np.ndarray:
    """Physical eigenfunctions ``phi_n(x)`` on an x grid (rows are ``n``)."""
    _require_deformed(consts)
    alpha = consts.params.alpha
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    q = np.arctan(x * math.sqrt(alpha))
    return alpha ** 0.25 * np.cos(q) * psi_table(consts, n_max, q)
