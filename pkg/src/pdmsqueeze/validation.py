"""Hard invariants and informational reports behind ``pdm-squeeze validate``.

Each ``check_*`` function returns a :class:`CheckResult`. Hard checks decide
the exit status; informational ones are printed and archived but never fail.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import observables as ob
from . import pdm_model as pm
from . import squeezed_state as ss
from .pdm_model import DerivedConstants, ModelParams
from .squeezed_state import StateSpec


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    hard: bool = True
    data: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        if not self.hard:
            return "INFO"
        return "PASS" if self.passed else "FAIL"

    def line(self) -> str:
        return f"{self.status:4s}  {self.name}: {self.detail}"

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "hard": self.hard,
                "detail": self.detail, "data": self.data}


class StateFactory:
    """Builds every state used by the checks; optionally corrupts amplitudes.

    The corruption hook exists so the fault path of ``validate`` can be tested.
    """

    def __init__(self, corrupt: bool = False):
        self.corrupt = corrupt

    def __call__(self, consts: DerivedConstants, spec: StateSpec) -> ss.CoefficientVector:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ss.TruncationWarning)
            state = ss.build_state(consts, spec)
        if self.corrupt:
            amps = state.amplitudes.copy()
            amps[0] *= 1.01
            state = replace(state, amplitudes=amps)
        return state


GRID_Z = (0.0, 0.5, -1.0, 0.7 + 0.7j, 1.5j)
GRID_GAMMA = (0.0, 0.1, 0.3, 0.5, 0.7)
GRID_ALPHA = (0.0, 0.05, 0.3)


def uncertainty_grid(build: StateFactory):
    """The 5 x 5 x 3 grid of (z, gamma, alpha) states."""
    out = []
    for alpha in GRID_ALPHA:
        p = ModelParams(alpha=alpha)
        c = pm.derive_constants(p)
        for z in GRID_Z:
            for g in GRID_GAMMA:
                out.append((p, build(c, StateSpec(z=z, gamma=g))))
    return out


# -- criteria -----------------------------------------------------------------

def check_spectrum_limit(alpha=1e-8, n_max=20, tol=1e-6) -> CheckResult:
    p = ModelParams(alpha=alpha)
    dev = [abs(pm.energy(p, n) - (n + 0.5)) for n in range(n_max + 1)]
    worst = max(dev)
    return CheckResult("spectrum_limit", worst < tol,
                       f"max_n<={n_max} |E_n - (n+1/2)| = {worst:.3e} at alpha={alpha:g} (tol {tol:g})",
                       data={"max_deviation": worst})


def check_rho_consistency(n_max=200, tol=1e-12) -> CheckResult:
    worst = 0.0
    for a, b in ((0.05, 1.101), (0.5, 2.0), (0.0, 1.0)):
        c = DerivedConstants.from_ladder(a, b)
        table = pm.rho_log_table(c, n_max)
        running = 0.0
        for n in range(1, n_max + 1):
            running = math.fsum([running, math.log(n * (a * n + b))])
            worst = max(worst, abs(table[n] - running))
    return CheckResult("rho_consistency", worst <= tol,
                       f"max |ln rho_n (Gamma) - ln prod e_k| = {worst:.3e} for n<={n_max} (tol {tol:g})",
                       data={"max_deviation": worst})


def gram_matrix(alpha: float, n_max: int = 20, nodes: int = ob.QUAD_NODES) -> np.ndarray:
    """``int phi_m phi_n dx`` by Gauss-Legendre in ``q = arctan(sqrt(alpha) x)``."""
    c = pm.derive_constants(ModelParams(alpha=alpha))
    q, w = ob.q_nodes(nodes)
    x = np.tan(q) / math.sqrt(alpha)
    jac = 1.0 / (math.sqrt(alpha) * np.cos(q) ** 2)
    phi = pm.phi_table(c, n_max, x)
    return (phi * (w * jac)) @ phi.T


def check_orthonormality(alphas=(0.05, 0.3), n_max=20, tol=1e-6) -> CheckResult:
    worst = max(float(np.max(np.abs(gram_matrix(a, n_max) - np.eye(n_max + 1)))) for a in alphas)
    return CheckResult("orthonormality", worst < tol,
                       f"{n_max + 1}x{n_max + 1} Gram max |G - I| = {worst:.3e} at alpha in {list(alphas)} (tol {tol:g})",
                       data={"max_deviation": worst})


def schrodinger_residual(params: ModelParams, n: int, energy_value: float,
                         half_width: float = 60.0, points: int = 24001) -> float:
    """Relative L2 residual of ``H psi_n - E psi_n`` on an x grid.

    ``H = -hbar^2/(2 m0) sqrt(w) d/dx w d/dx sqrt(w) + m0 omega^2 x^2 / 2`` with
    ``w = 1 + alpha x^2``, applied to ``psi_n = sqrt(w) phi_n``. The inner
    derivative is analytic, the outer one a 4th-order finite difference.
    """
    c = pm.derive_constants(params)
    alpha, hb, m0, om = params.alpha, params.hbar, params.m0, params.omega
    x = np.linspace(-half_width, half_width, points)
    h = x[1] - x[0]
    wx = 1.0 + alpha * x * x
    q = np.arctan(math.sqrt(alpha) * x)
    psi_q = pm.psi_table(c, n, q)
    dpsi_q = pm.dpsi_dq_table(c, psi_q, q)[n]
    psi_q = psi_q[n]
    cq = np.cos(q)
    a4 = alpha ** 0.25
    phi = a4 * cq * psi_q
    dphi = a4 * (-np.sin(q) * psi_q + cq * dpsi_q) * math.sqrt(alpha) * cq * cq
    sw = np.sqrt(wx)
    psi = sw * phi
    dpsi = alpha * x / sw * phi + sw * dphi
    g = wx * dpsi
    dg = np.zeros_like(g)
    dg[2:-2] = (-g[4:] + 8 * g[3:-1] - 8 * g[1:-3] + g[:-4]) / (12 * h)
    hpsi = -hb ** 2 / (2 * m0) * wx * dg + 0.5 * m0 * om ** 2 * x * x * psi
    inner = slice(2, -2)
    res = (hpsi - energy_value * psi)[inner]
    return math.sqrt(np.sum(res ** 2) / np.sum((energy_value * psi[inner]) ** 2))


def check_schrodinger(alpha=0.1, n_max=10, tol=1e-4) -> CheckResult:
    p = ModelParams(alpha=alpha)
    worst = max(schrodinger_residual(p, n, pm.eigenvalue(p, n)) for n in range(n_max + 1))
    return CheckResult("schrodinger_residual", worst < tol,
                       f"max_n<={n_max} relative residual {worst:.3e} at alpha={alpha:g} (tol {tol:g})",
                       data={"max_residual": worst})


def check_schrodinger_closed_form_spectrum(alpha=0.1, n_max=10) -> CheckResult:
    """Same residual with the closed-form spectrum; it carries an extra ``a n``."""
    p = ModelParams(alpha=alpha)
    worst = max(schrodinger_residual(p, n, pm.energy(p, n)) for n in range(n_max + 1))
    return CheckResult("schrodinger_residual_closed_form_spectrum", True,
                       f"max_n<={n_max} relative residual {worst:.3e} with E_n from energy()",
                       hard=False, data={"max_residual": worst})


def check_hermite_equivalence(n_max=128, tol=1e-11) -> CheckResult:
    c = DerivedConstants.from_ladder(0.0, 1.0)
    worst = 0.0
    for z in (0.0, 0.5, -0.5, 1.5, -1.5):
        for g in (0.1, 0.3, 0.7):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ss.TruncationWarning)
                rec = ss.coeffs_recurrence(c, z, g, n_max).amplitudes
                her = ss.coeffs_hermite_limit(c, z, g, n_max).amplitudes
            worst = max(worst, float(np.max(np.abs(rec - her))))
    return CheckResult("hermite_equivalence", worst <= tol,
                       f"max |C_rec - C_hermite| = {worst:.3e} over 15 (z, gamma) points (tol {tol:g})",
                       data={"max_deviation": worst})


def check_normalization(states, times=(0.3, 2.7), tol=1e-12) -> CheckResult:
    worst_norm = 0.0
    worst_evo = 0.0
    for p, s in states:
        pn = ob.photon_distribution(s)
        worst_norm = max(worst_norm, abs(math.fsum(pn) - 1.0))
        for t in times:
            worst_evo = max(worst_evo, float(np.max(np.abs(ob.photon_distribution(ss.evolve(s, t)) - pn))))
    ok = worst_norm <= tol and worst_evo <= tol
    return CheckResult("normalization", ok,
                       f"{len(states)} states: max |sum P_n - 1| = {worst_norm:.3e}, "
                       f"max |dP_n| under evolve = {worst_evo:.3e} (tol {tol:g})",
                       data={"max_norm_error": worst_norm, "max_evolve_change": worst_evo})


def check_uncertainty(states, build: StateFactory) -> CheckResult:
    worst_gap = 0.0
    lowest = math.inf
    errors = []
    for p, s in states:
        try:
            d = ob.uncertainty_direct(s, p)
            f = ob.uncertainty_factored(s, p)
        except ValueError as exc:
            errors.append(str(exc))
            continue
        worst_gap = max(worst_gap, abs(d - f) / p.hbar)
        lowest = min(lowest, d / p.hbar)
    p0 = ModelParams()
    vac = build(pm.derive_constants(p0), StateSpec(z=0.0, gamma=0.0))
    vac_dev = abs(ob.uncertainty_direct(vac, p0) - 0.5)
    ok = not errors and worst_gap <= 1e-10 and lowest >= 0.5 - 1e-9 and vac_dev <= 1e-12
    detail = (f"{len(states)} states: max |direct - factored|/hbar = {worst_gap:.3e}, "
              f"min dxdp/hbar = {lowest:.12f}, vacuum |dxdp - 1/2| = {vac_dev:.3e}")
    if errors:
        detail += f"; {len(errors)} states raised ({errors[0]})"
    return CheckResult("uncertainty_identities", ok, detail,
                       data={"max_gap": worst_gap, "min_product": lowest, "vacuum_deviation": vac_dev})


def check_coherent_mandel(build: StateFactory, tol=1e-9) -> CheckResult:
    c = pm.derive_constants(ModelParams())
    qs = [ob.mandel_q(build(c, StateSpec(z=z, gamma=0.0))) for z in (0.5, 1.0, 2.0)]
    worst = max(abs(q) for q in qs)
    return CheckResult("coherent_mandel_q", worst < tol,
                       f"max |Q| = {worst:.3e} for |z| in (0.5, 1, 2) (tol {tol:g})",
                       data={"q": qs})


COMPARISON_GRID = [(z, g) for z in (0.5, 0.8, 1.2) for g in (0.1, 0.2, 0.4)]


def comparison_reports(alpha=0.1, n_max=30) -> list[ss.ComparisonReport]:
    c = pm.derive_constants(ModelParams(alpha=alpha))
    return [ss.compare_constructions(c, z, g, n_max) for z, g in COMPARISON_GRID]


def check_comparison(reports) -> CheckResult:
    worst = max(r.max_deviation for r in reports)
    return CheckResult("closed_form_comparison", True,
                       f"{len(reports)} combinations, max deviation {worst:.3e}",
                       hard=False, data={"reports": [r.to_dict() for r in reports]})


def _observable_vector(s, p):
    x0, p0 = ob.quadrature_means(s, p)
    return np.array([x0, p0, ob.uncertainty_direct(s, p), ob.number_moments(s)[0]])


TRUNCATION_FIXTURES = [(0.1, 0.8, 0.2), (0.1, 1.2 - 0.5j, 0.4), (0.05, 2.0, 0.0),
                       (0.0, 1.0, 0.5), (0.3, 0.5j, 0.6)]


def check_truncation(build: StateFactory, tol=1e-9) -> CheckResult:
    worst = 0.0
    for alpha, z, g in TRUNCATION_FIXTURES:
        p = ModelParams(alpha=alpha)
        c = pm.derive_constants(p)
        s = build(c, StateSpec(z=z, gamma=g))
        n2 = min(2 * s.n_max, ss.ADAPTIVE_CAP)
        s2 = build(c, StateSpec(z=z, gamma=g, n_max=n2))
        worst = max(worst, float(np.max(np.abs(_observable_vector(s, p) - _observable_vector(s2, p)))))
    return CheckResult("truncation_stability", worst < tol,
                       f"max change of (<x>, <p>, dxdp, <n>) on doubling n_max = {worst:.3e} (tol {tol:g})",
                       data={"max_change": worst})


def check_density(build: StateFactory, spec: StateSpec, params: ModelParams, tol=1e-6) -> CheckResult:
    if not params.alpha > 0:
        return CheckResult("density_normalization", True, "skipped (alpha = 0)", hard=False)
    s = build(pm.derive_constants(params), spec)
    vals = [ob.density_integral(s, params, t) for t in (0.0, 1.0, 5.0)]
    worst = max(abs(v - 1.0) for v in vals)
    return CheckResult("density_normalization", worst < tol,
                       f"max_t |int density dx - 1| = {worst:.3e} for t in (0, 1, 5) (tol {tol:g})",
                       data={"integrals": vals})


def check_determinism(runner: Callable[[list[str]], bytes], fixtures) -> CheckResult:
    bad = [" ".join(args) for args in fixtures if runner(args) != runner(args)]
    return CheckResult("determinism", not bad,
                       f"{len(fixtures)} command fixtures, {len(bad)} differed" + (f": {bad}" if bad else ""),
                       data={"fixtures": [" ".join(a) for a in fixtures]})


def run_all(params: ModelParams, spec: StateSpec, runner=None, fixtures=(),
            corrupt: bool = False) -> list[CheckResult]:
    """All checks in order. ``runner``/``fixtures`` feed the determinism check."""
    build = StateFactory(corrupt)
    grid = uncertainty_grid(build)
    fixture_state = [(params, build(pm.derive_constants(params), spec))]
    results = [
        check_spectrum_limit(),
        check_rho_consistency(),
        check_orthonormality(),
        check_schrodinger(),
        check_schrodinger_closed_form_spectrum(),
        check_hermite_equivalence(),
        check_normalization(grid + fixture_state),
        check_uncertainty(grid + fixture_state, build),
        check_coherent_mandel(build),
        check_comparison(comparison_reports()),
        check_truncation(build),
        check_density(build, spec, params),
    ]
    if runner is not None:
        results.append(check_determinism(runner, list(fixtures)))
    return results
