"""Squeezed coherent states ``(a + gamma a^dagger)|psi> = z|psi>`` in the PDM eigenbasis.

Three constructions:

* ``coeffs_recurrence``: the defining three-term recurrence
  ``Z_{n+1} = z Z_n - gamma e_n Z_{n-1}``. This is the reference.
* ``coeffs_closed_form``: the terminating-2F1 closed form, evaluated as
  written. Used for comparison only; it does not reproduce the recurrence.
* ``coeffs_hermite_limit``: the Hermite form valid when ``a == 0``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import pdm_model, specialfn
from ._backend import kernels
from .pdm_model import DerivedConstants

TAIL_TOL = 1e-10
ADAPTIVE_START = 64
ADAPTIVE_CAP = pdm_model.N_CAP


class TruncationWarning(UserWarning):
    """Fock truncation left more than ``TAIL_TOL`` weight in the last two levels."""


class Method(str, enum.Enum):
    RECURRENCE = "recurrence"
    CLOSED_FORM = "closed_form"
    HERMITE_LIMIT = "hermite_limit"


@dataclass(frozen=True)
class StateSpec:
    z: complex
    gamma: float
    n_max: int | None = None  # None means adaptive
    method: Method = Method.RECURRENCE

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "method", Method(self.method))
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.n_max is not None and not (1 <= self.n_max <= ADAPTIVE_CAP):
            raise ValueError(f"n_max must be in [1, {ADAPTIVE_CAP}], got {self.n_max}")

    @property
    def adaptive(self) -> bool:
        return self.n_max is None

    def validate_for(self, consts: DerivedConstants):
        if self.method is Method.HERMITE_LIMIT and consts.a != 0:
            raise ValueError("hermite_limit requires a == 0 (alpha = 0)")
        if self.method is Method.CLOSED_FORM and not (self.gamma > 0 and consts.a > 0):
            raise ValueError("closed_form requires gamma > 0 and a > 0")
        if self.method is Method.HERMITE_LIMIT and not self.gamma > 0:
            raise ValueError("hermite_limit requires gamma > 0")


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    """Normalized Fock amplitudes of one state.

    Attributes
    ----------
    amplitudes : ndarray of complex
        ``C~_n`` for ``n = 0..n_max``; ``sum |C~_n|^2 == 1``.
    norm_factor_log : float
        ``ln N(z, gamma)`` with ``N = sum |Z_n|^2 / rho_n``.
    tail_weight : float
        ``|C~_{n_max}|^2 + |C~_{n_max-1}|^2``.
    """

    amplitudes: np.ndarray
    norm_factor_log: float
    tail_weight: float
    consts: DerivedConstants
    spec: StateSpec | None = None
    time: float = 0.0
    # unnormalized log-scaled coefficients C_n = Z_n / sqrt(rho_n), for diagnostics
    raw_mantissa: np.ndarray | None = field(default=None, repr=False)
    raw_logscale: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_max(self) -> int:
        return self.amplitudes.shape[0] - 1

    @property
    def converged(self) -> bool:
        return self.tail_weight < TAIL_TOL

    @classmethod
    def from_amplitudes(cls, amplitudes, consts: DerivedConstants) -> "CoefficientVector":
        """Wrap (and normalize) an arbitrary amplitude vector, e.g. a Fock state."""
        c = np.asarray(amplitudes, dtype=np.complex128).copy()
        norm2 = float(np.sum(np.abs(c) ** 2))
        if not norm2 > 0:
            raise ValueError("amplitude vector is zero")
        c /= math.sqrt(norm2)
        return cls(amplitudes=c, norm_factor_log=math.log(norm2),
                   tail_weight=_tail(c), consts=consts)


def fock_state(consts: DerivedConstants, n: int, n_max: int | None = None) -> CoefficientVector:
    n_max = max(n, 1) if n_max is None else n_max
    c = np.zeros(n_max + 1, dtype=np.complex128)
    c[n] = 1.0
    return CoefficientVector.from_amplitudes(c, consts)


def _tail(c: np.ndarray) -> float:
    w = np.abs(c[-2:]) ** 2
    return float(np.sum(w))


def _normalize_scaled(mant: np.ndarray, logscale: np.ndarray):
    """Normalize ``mant * exp(logscale)``; returns ``(amplitudes, ln N)``."""
    mag = np.abs(mant)
    nz = mag > 0
    if not nz.any():
        raise ValueError("all coefficients vanish")
    logw = np.full(mant.shape, -np.inf)
    logw[nz] = 2.0 * (np.log(mag[nz]) + logscale[nz])
    top = float(np.max(logw))
    log_norm = top + math.log(math.fsum(np.exp(logw[nz] - top)))
    amps = np.zeros(mant.shape, dtype=np.complex128)
    amps[nz] = mant[nz] * np.exp(logscale[nz] - 0.5 * log_norm)
    return amps, log_norm


def _recurrence_raw(consts: DerivedConstants, z: complex, gamma: float, n_max: int):
    e = pdm_model.dimensionless_energy_table(consts, n_max)
    mr, mi, ls = kernels.ladder_recurrence_scaled(z.real, z.imag, float(gamma), np.sqrt(e))
    return mr + 1j * mi, ls


def z_coefficients(consts: DerivedConstants, z: complex, gamma: float, n_max: int) -> np.ndarray:
    """Unnormalized ``Z_n`` as plain complex numbers (may overflow for large ``n``)."""
    mant, ls = _recurrence_raw(consts, complex(z), gamma, n_max)
    rho = pdm_model.rho_log_table(consts, n_max)
    return mant * np.exp(ls + 0.5 * rho)


def _finish(amps, log_norm, consts, spec, mant=None, ls=None) -> CoefficientVector:
    cv = CoefficientVector(amplitudes=amps, norm_factor_log=log_norm,
                           tail_weight=_tail(amps), consts=consts, spec=spec,
                           raw_mantissa=mant, raw_logscale=ls)
    if not cv.converged:
        warnings.warn(f"tail weight {cv.tail_weight:.3e} >= {TAIL_TOL:g} at n_max={cv.n_max}",
                      TruncationWarning, stacklevel=3)
    return cv


def coeffs_recurrence(consts: DerivedConstants, z: complex, gamma: float,
                      n_max: int) -> CoefficientVector:
    """Build the state from the defining recurrence.

    Runs the recurrence directly on ``C_n = Z_n / sqrt(rho_n)``,
    ``C_{n+1} = (z C_n - gamma sqrt(e_n) C_{n-1}) / sqrt(e_{n+1})``,
    with log-scaled mantissas, then normalizes. ``gamma = 0`` gives the
    coherent state ``z^n / sqrt(rho_n)``.
    """
    z = complex(z)
    spec = StateSpec(z=z, gamma=gamma, n_max=n_max, method=Method.RECURRENCE)
    mant, ls = _recurrence_raw(consts, z, gamma, n_max)
    amps, log_norm = _normalize_scaled(mant, ls)
    return _finish(amps, log_norm, consts, spec, mant, ls)


def closed_form_beta(consts: DerivedConstants, z: complex, gamma: float) -> complex:
    """Second 2F1 parameter ``-1/2 + b/(2a) - z / (2 sqrt(a gamma))``."""
    return -0.5 + consts.b / (2.0 * consts.a) - complex(z) / (2.0 * math.sqrt(consts.a * gamma))


def closed_form_raw(consts: DerivedConstants, z: complex, gamma: float, n_max: int,
                    exact: bool | None = None):
    """Unnormalized closed-form ``C_n`` as ``(mantissa, logscale)``.

    ``C_n = (gamma a)^(n/2) / sqrt(n!) * sqrt(Gamma(n+1+b/a)/Gamma(1+b/a))
    * 2F1(-n, beta; 1 + b/a; 2)``.
    """
    if not (consts.a > 0 and gamma > 0):
        raise ValueError("closed form is singular unless a > 0 and gamma > 0")
    beta = closed_form_beta(consts, z, gamma)
    c = 1.0 + consts.b / consts.a
    n = np.arange(n_max + 1)
    lgf = np.array([math.lgamma(k + 1) for k in n])
    ls = (0.5 * n * math.log(gamma * consts.a) - 0.5 * lgf
          + 0.5 * specialfn.gamma_ratio_log_table(n_max, consts.b / consts.a))
    mant = np.array([specialfn.hyp2f1_terminating(int(k), beta, c, 2.0, exact=exact) for k in n],
                    dtype=np.complex128)
    return mant, ls


def coeffs_closed_form(consts: DerivedConstants, z: complex, gamma: float, n_max: int,
                       exact: bool | None = None) -> CoefficientVector:
    """Evaluate the hypergeometric closed form verbatim and normalize it."""
    if not gamma > 0:
        raise ValueError("closed form requires gamma > 0")
    if not consts.a > 0:
        raise ValueError("closed form requires a > 0")
    z = complex(z)
    spec = StateSpec(z=z, gamma=gamma, n_max=n_max, method=Method.CLOSED_FORM)
    mant, ls = closed_form_raw(consts, z, gamma, n_max, exact=exact)
    amps, log_norm = _normalize_scaled(mant, ls)
    return _finish(amps, log_norm, consts, spec, mant, ls)


def coeffs_hermite_limit(consts: DerivedConstants, z: complex, gamma: float,
                         n_max: int) -> CoefficientVector:
    """Undeformed (``a == 0``) state from Hermite polynomials.

    With ``rho_n = b^n n!`` the recurrence is solved by
    ``Z_n = (gamma b / 2)^(n/2) H_n(z / sqrt(2 gamma b))``, hence
    ``C_n = (gamma/2)^(n/2) H_n(z / sqrt(2 gamma b)) / sqrt(n!)``.
    """
    if consts.a != 0:
        raise ValueError("hermite_limit requires a == 0")
    if not gamma > 0:
        raise ValueError("hermite_limit requires gamma > 0")
    z = complex(z)
    spec = StateSpec(z=z, gamma=gamma, n_max=n_max, method=Method.HERMITE_LIMIT)
    h_mant, h_ls = specialfn.hermite_scaled(n_max, z / math.sqrt(2.0 * gamma * consts.b))
    n = np.arange(n_max + 1)
    lgf = np.array([math.lgamma(k + 1) for k in n])
    ls = h_ls + 0.5 * n * math.log(gamma / 2.0) - 0.5 * lgf
    amps, log_norm = _normalize_scaled(h_mant, ls)
    return _finish(amps, log_norm, consts, spec, h_mant, ls)


_BUILDERS = {
    Method.RECURRENCE: coeffs_recurrence,
    Method.CLOSED_FORM: coeffs_closed_form,
    Method.HERMITE_LIMIT: coeffs_hermite_limit,
}


def build_state(consts: DerivedConstants, spec: StateSpec) -> CoefficientVector:
    """Construct a state per ``spec``; adaptive ``n_max`` doubles from 64 up to 512.

    An adaptive build that reaches the cap unconverged is returned with
    ``converged == False`` (and a :class:`TruncationWarning`).
    """
    spec.validate_for(consts)
    builder = _BUILDERS[spec.method]
    if not spec.adaptive:
        cv = builder(consts, spec.z, spec.gamma, spec.n_max)
        return replace(cv, spec=spec)
    n_max = ADAPTIVE_START
    while True:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            cv = builder(consts, spec.z, spec.gamma, n_max)
        if cv.converged or n_max >= ADAPTIVE_CAP:
            break
        n_max = min(2 * n_max, ADAPTIVE_CAP)
    if not cv.converged:
        warnings.warn(f"adaptive truncation hit cap {ADAPTIVE_CAP} with tail weight "
                      f"{cv.tail_weight:.3e}", TruncationWarning, stacklevel=2)
    return replace(cv, spec=spec)


def evolve(state: CoefficientVector, t: float) -> CoefficientVector:
    """Apply ``exp(-i E_n t / hbar)`` to each amplitude."""
    params = state.consts.params
    if params is None:
        raise ValueError("time evolution needs ModelParams on the constants")
    if t == 0:
        return state
    e = pdm_model.energy_table(params, state.n_max)
    phase = np.exp(-1j * e * (t / params.hbar))
    return replace(state, amplitudes=state.amplitudes * phase, time=state.time + t)


def _same_constants(c1: DerivedConstants, c2: DerivedConstants) -> bool:
    return c1.a == c2.a and c1.b == c2.b and c1.params == c2.params


def overlap(s1: CoefficientVector, s2: CoefficientVector) -> complex:
    """``<s1|s2> = sum conj(C1_n) C2_n``, truncated to the shorter vector."""
    if not _same_constants(s1.consts, s2.consts):
        raise ValueError("states were built on different model constants")
    m = min(s1.n_max, s2.n_max) + 1
    return complex(np.sum(np.conj(s1.amplitudes[:m]) * s2.amplitudes[:m]))


@dataclass(frozen=True)
class ComparisonReport:
    """Per-level relative deviation of the closed form from the recurrence."""

    z: complex
    gamma: float
    a: float
    b: float
    n_max: int
    deviations: np.ndarray
    recurrence: np.ndarray
    closed_form: np.ndarray
    threshold: float = 1e-8

    @property
    def max_deviation(self) -> float:
        finite = self.deviations[np.isfinite(self.deviations)]
        return float(finite.max()) if finite.size else 0.0

    @property
    def first_exceeding(self) -> int | None:
        idx = np.flatnonzero(~(self.deviations <= self.threshold))
        return int(idx[0]) if idx.size else None

    def to_dict(self) -> dict:
        return {
            "z_re": self.z.real, "z_im": self.z.imag, "gamma": self.gamma,
            "a": self.a, "b": self.b, "n_max": self.n_max,
            "max_deviation": self.max_deviation,
            "first_index_exceeding": self.first_exceeding,
            "deviations": [float(d) for d in self.deviations],
        }


def compare_constructions(consts: DerivedConstants, z: complex, gamma: float,
                          n_max: int) -> ComparisonReport:
    """Compare normalized recurrence and closed-form amplitudes level by level.

    Deviation is ``|C_closed - C_rec| / |C_rec|``; where the recurrence amplitude
    is exactly zero, the absolute difference is reported instead.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        rec = coeffs_recurrence(consts, z, gamma, n_max).amplitudes
        cf = coeffs_closed_form(consts, z, gamma, n_max).amplitudes
    diff = np.abs(cf - rec)
    mag = np.abs(rec)
    dev = np.where(mag > 0, diff / np.where(mag > 0, mag, 1.0), diff)
    return ComparisonReport(z=complex(z), gamma=float(gamma), a=consts.a, b=consts.b,
                            n_max=n_max, deviations=dev, recurrence=rec, closed_form=cf)
