"""Photon statistics, quadratures, uncertainty products and position densities.

Ladder matrix elements use the undeformed convention
``<n+1|a^dagger|n> = sqrt(n+1)``; the quadrature prefactors use ``m = m0``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from . import pdm_model
from .pdm_model import ModelParams
from .squeezed_state import CoefficientVector, evolve

NEG_TOL = 1e-12
QUAD_NODES = 2048
QUAD_CHECK_NODES = 4096
QUAD_TOL = 1e-8


class QuadratureError(RuntimeError):
    """Gauss-Legendre result changed by more than ``QUAD_TOL`` when the node count doubled."""


@dataclass(frozen=True)
class ObservableReport:
    mean_x: float
    mean_p: float
    mean_x2: float
    mean_p2: float
    var_x: float
    var_p: float
    uncertainty_product: float
    uncertainty_product_factored: float
    A: float
    B: float
    mean_n: float
    mean_n2: float
    mandel_q: float

    def to_dict(self) -> dict:
        return asdict(self)


def ladder_moments(state: CoefficientVector):
    """Return ``(<a>, <a^2>, <a^dagger a>, <a a^dagger>)``."""
    c = state.amplitudes
    n = np.arange(c.shape[0], dtype=np.float64)
    p = np.abs(c) ** 2
    mean_a = complex(np.sum(np.conj(c[:-1]) * c[1:] * np.sqrt(n[1:])))
    mean_a2 = complex(np.sum(np.conj(c[:-2]) * c[2:] * np.sqrt(n[1:-1] * n[2:])))
    mean_ada = float(np.sum(n * p))
    mean_aad = float(np.sum((n + 1.0) * p))
    return mean_a, mean_a2, mean_ada, mean_aad


def _x_scale(params: ModelParams) -> float:
    return math.sqrt(params.hbar / (2.0 * params.m0 * params.omega))


def _p_scale(params: ModelParams) -> float:
    return math.sqrt(params.hbar * params.m0 * params.omega / 2.0)


def _x2_scale(params: ModelParams) -> float:
    return params.hbar / (2.0 * params.m0 * params.omega)


def _p2_scale(params: ModelParams) -> float:
    return params.hbar * params.m0 * params.omega / 2.0


def quadrature_means(state: CoefficientVector, params: ModelParams):
    """``<x> = 2 sqrt(hbar / 2 m omega) Re<a>``, ``<p> = 2 sqrt(hbar m omega / 2) Im<a>``."""
    mean_a = ladder_moments(state)[0]
    return 2.0 * _x_scale(params) * mean_a.real, 2.0 * _p_scale(params) * mean_a.imag


def occupation_sums(state: CoefficientVector):
    """``A = sum (2n+1)|C_n|^2`` and ``B = 2 sum Re(C_n^* C_{n+2}) sqrt((n+1)(n+2))``."""
    _, mean_a2, mean_ada, mean_aad = ladder_moments(state)
    return mean_ada + mean_aad, 2.0 * mean_a2.real


def quadrature_second_moments(state: CoefficientVector, params: ModelParams):
    _, mean_a2, mean_ada, mean_aad = ladder_moments(state)
    mean_ad2 = mean_a2.conjugate()
    x2 = _x2_scale(params) * (mean_a2 + mean_ad2 + mean_ada + mean_aad)
    p2 = -_p2_scale(params) * (mean_a2 + mean_ad2 - mean_ada - mean_aad)
    return float(x2.real), float(p2.real)


def _checked_sqrt(v: float, what: str) -> float:
    if v < -NEG_TOL:
        raise ValueError(f"{what} is negative ({v:.3e}); amplitudes are corrupted")
    return math.sqrt(max(v, 0.0))


def uncertainty_direct(state: CoefficientVector, params: ModelParams) -> float:
    """``Delta x * Delta p`` from the A/B expansion of the second moments."""
    A, B = occupation_sums(state)
    x0, p0 = quadrature_means(state, params)
    var_x = _x2_scale(params) * (A + B) - x0 * x0
    var_p = _p2_scale(params) * (A - B) - p0 * p0
    return _checked_sqrt(var_x, "var_x") * _checked_sqrt(var_p, "var_p")


def uncertainty_factored(state: CoefficientVector, params: ModelParams) -> float:
    """Factored form ``sqrt(hbar^2/4 (A^2-B^2) - hbar/(2 m omega)(A+B) p0^2
    - hbar m omega / 2 (A-B) x0^2 + x0^2 p0^2)``."""
    A, B = occupation_sums(state)
    x0, p0 = quadrature_means(state, params)
    hb = params.hbar
    mw = params.m0 * params.omega
    radicand = (hb * hb / 4.0 * (A * A - B * B)
                - hb / (2.0 * mw) * (A + B) * p0 * p0
                - hb * mw / 2.0 * (A - B) * x0 * x0
                + x0 * x0 * p0 * p0)
    return _checked_sqrt(radicand, "uncertainty radicand")


def photon_distribution(state: CoefficientVector) -> np.ndarray:
    """``P_n = |C~_n|^2``."""
    return np.abs(state.amplitudes) ** 2


def number_moments(state: CoefficientVector):
    p = photon_distribution(state)
    n = np.arange(p.shape[0], dtype=np.float64)
    return float(np.sum(n * p)), float(np.sum(n * n * p))


def mandel_q(state: CoefficientVector) -> float:
    """``Q = Var(n) / <n> - 1``; negative means sub-Poissonian."""
    mean_n, mean_n2 = number_moments(state)
    if not mean_n > 0:
        raise ValueError("Mandel Q undefined for <n> = 0 (vacuum)")
    return (mean_n2 - mean_n * mean_n) / mean_n - 1.0


def observable_report(state: CoefficientVector, params: ModelParams) -> ObservableReport:
    x0, p0 = quadrature_means(state, params)
    x2, p2 = quadrature_second_moments(state, params)
    A, B = occupation_sums(state)
    mean_n, mean_n2 = number_moments(state)
    try:
        q = mandel_q(state)
    except ValueError:
        q = math.nan
    return ObservableReport(
        mean_x=x0, mean_p=p0, mean_x2=x2, mean_p2=p2,
        var_x=x2 - x0 * x0, var_p=p2 - p0 * p0,
        uncertainty_product=uncertainty_direct(state, params),
        uncertainty_product_factored=uncertainty_factored(state, params),
        A=A, B=B, mean_n=mean_n, mean_n2=mean_n2, mandel_q=q,
    )


# -- position space -----------------------------------------------------------

@lru_cache(maxsize=8)
def q_nodes(n_nodes: int = QUAD_NODES):
    """Gauss-Legendre nodes and weights on ``(-pi/2, pi/2)``."""
    x, w = roots_legendre(n_nodes)
    h = math.pi / 2
    x = h * x
    w = h * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _wave_q(state: CoefficientVector, q: np.ndarray, t: float = 0.0):
    """``Psi(q) = sum C~_n e^{-i E_n t / hbar} psi_n(q)`` and the psi table."""
    amps = evolve(state, t).amplitudes if t else state.amplitudes
    psi = pdm_model.psi_table(state.consts, state.n_max, q)
    return amps @ psi, psi, amps


def _checked_quad(fn):
    """Evaluate ``fn(nodes, weights)`` at 2048 and 4096 nodes; return the 2048 result."""
    v1 = np.asarray(fn(*q_nodes(QUAD_NODES)))
    v2 = np.asarray(fn(*q_nodes(QUAD_CHECK_NODES)))
    err = np.max(np.abs(v1 - v2) / np.maximum(1.0, np.abs(v2)))
    if not err <= QUAD_TOL:
        raise QuadratureError(f"quadrature not converged (node-doubling change {err:.3e})")
    return v1


def position_density(state: CoefficientVector, params: ModelParams, t: float, x_grid) -> np.ndarray:
    """``|sum_n C~_n e^{-i E_n t/hbar} phi_n(x)|^2`` on ``x_grid``."""
    consts = state.consts
    amps = evolve(state, t).amplitudes if t else state.amplitudes
    phi = pdm_model.phi_table(consts, state.n_max, np.asarray(x_grid, dtype=np.float64))
    return np.abs(amps @ phi) ** 2


def density_integral(state: CoefficientVector, params: ModelParams, t: float = 0.0) -> float:
    """``int density dx`` evaluated in ``q`` with Jacobian ``dx = dq / (sqrt(alpha) cos^2 q)``.

    Since ``phi_n(x) = alpha^(1/4) cos(q) psi_n(q)`` the integrand reduces to
    ``|Psi(q)|^2``.
    """
    def integrand(q, w):
        wave = _wave_q(state, q, t)[0]
        return np.sum(w * np.abs(wave) ** 2)
    return float(_checked_quad(integrand))


@dataclass(frozen=True)
class NAlphaResult:
    value: float
    mean_shifted_x2: float  # <(x + c)^2>
    mean_pi2: float  # <Pi_alpha^2>
    mean_x2: float  # <x^2>
    omega0: float


def n_alpha_quadrature(state: CoefficientVector, params: ModelParams,
                       omega0: float | None = None) -> NAlphaResult:
    """Expectation of ``a_alpha^dagger a_alpha`` by position-space quadrature.

    ``<n_alpha> = m0 w0/(2 hbar) <(x+c)^2> + <Pi^2>/(2 hbar m0 w0) - (1 + alpha <x^2>)/2``
    with ``Pi = (1 + alpha x^2) p`` and ``c = hbar alpha / (2 m0 w0)``.
    Expectations are taken with the ``dq``-normalized wavefunction
    ``Psi(q) = sum C~_n psi_n(q)``, in which ``Pi = -i hbar sqrt(alpha) d/dq`` and
    ``<Pi^2> = hbar^2 alpha int |dPsi/dq|^2 dq``.

    ``omega0`` defaults to ``omega`` (no relation to ``omega`` is assumed).
    """
    consts = state.consts
    alpha = params.alpha
    if not alpha > 0:
        raise ValueError("n_alpha_quadrature needs alpha > 0")
    w0 = params.omega if omega0 is None else float(omega0)
    hb, m0 = params.hbar, params.m0
    c = hb * alpha / (2.0 * m0 * w0)
    sa = math.sqrt(alpha)

    def integrand(q, w):
        wave, psi, amps = _wave_q(state, q)
        dwave = amps @ pdm_model.dpsi_dq_table(consts, psi, q)
        x = np.tan(q) / sa
        dens = np.abs(wave) ** 2
        return np.array([
            np.sum(w * dens * (x + c) ** 2),
            hb * hb * alpha * np.sum(w * np.abs(dwave) ** 2),
            np.sum(w * dens * x * x),
        ])

    sx2, pi2, x2 = _checked_quad(integrand)
    value = (m0 * w0 / (2.0 * hb) * sx2 + pi2 / (2.0 * hb * m0 * w0)
             - 0.5 * (1.0 + alpha * x2))
    return NAlphaResult(value=float(value), mean_shifted_x2=float(sx2), mean_pi2=float(pi2),
                        mean_x2=float(x2), omega0=w0)
