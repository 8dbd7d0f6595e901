import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import mp_state
from pdmsqueeze import pdm_model as pm
from pdmsqueeze import squeezed_state as ss
from pdmsqueeze.pdm_model import DerivedConstants, ModelParams
from pdmsqueeze.squeezed_state import Method, StateSpec

# short vectors in some tests are deliberately unconverged
pytestmark = pytest.mark.filterwarnings("ignore::pdmsqueeze.squeezed_state.TruncationWarning")

P01 = ModelParams(alpha=0.1)
C01 = pm.derive_constants(P01)
P0 = ModelParams()
C0 = pm.derive_constants(P0)

# direct multiprecision summation (tests/oracles.py), frozen
OVERLAP_08_11 = 0.9619158862001983
OVERLAP_08_08P03I = complex(0.947377146581813, 0.1644769773749673)


class TestStateSpec:
    def test_negative_gamma(self):
        with pytest.raises(ValueError):
            StateSpec(z=1.0, gamma=-0.1)

    def test_method_requirements(self):
        with pytest.raises(ValueError):
            StateSpec(z=1.0, gamma=0.2, method="hermite_limit").validate_for(C01)
        with pytest.raises(ValueError):
            StateSpec(z=1.0, gamma=0.0, method="closed_form").validate_for(C01)
        with pytest.raises(ValueError):
            StateSpec(z=1.0, gamma=0.2, method="closed_form").validate_for(C0)

    def test_bad_nmax(self):
        with pytest.raises(ValueError):
            StateSpec(z=1.0, gamma=0.1, n_max=0)
        with pytest.raises(ValueError):
            StateSpec(z=1.0, gamma=0.1, n_max=10_000)


class TestRecurrence:
    def test_coherent_branch(self):
        z = 0.9 - 0.4j
        s = ss.coeffs_recurrence(C01, z, 0.0, 40)
        rho = pm.rho_log_table(C01, 40)
        ref = np.array([z ** n for n in range(41)]) * np.exp(-0.5 * rho)
        ref /= np.linalg.norm(ref)
        assert np.allclose(s.amplitudes, ref, rtol=1e-13, atol=1e-16)

    def test_second_step(self):
        z, g = 0.7 + 0.2j, 0.3
        zn = ss.z_coefficients(C01, z, g, 5)
        assert zn[0] == pytest.approx(1.0)
        assert zn[1] == pytest.approx(z, rel=1e-14)
        assert zn[2] == pytest.approx(z * z - g * (C01.a + C01.b), rel=1e-14)

    def test_hermite_identity_n2(self):
        zn = ss.z_coefficients(C0, 1.2, 0.3, 3)
        assert zn[2].real == pytest.approx(1.14, rel=1e-14)
        assert zn[2].real == pytest.approx(0.15 * (4 * 2.4 - 2), rel=1e-14)

    @pytest.mark.parametrize("z,g", [(0.8, 0.2), (1.5 - 0.5j, 0.6), (0.0, 0.4), (2.0j, 0.05)])
    def test_eigenvalue_residual(self, z, g):
        n_max = 60
        zn = ss.z_coefficients(C01, z, g, n_max)
        e = pm.dimensionless_energy_table(C01, n_max)
        for n in range(1, n_max):
            terms = (zn[n + 1], g * e[n] * zn[n - 1], -z * zn[n])
            res = abs(sum(terms))
            assert res <= 1e-12 * max(abs(t) for t in terms)

    @pytest.mark.parametrize("z,g", [(0.8, 0.2), (1.1 + 0.6j, 0.5), (-2.0, 0.9)])
    def test_against_multiprecision(self, z, g):
        s = ss.coeffs_recurrence(C01, z, g, 80)
        ref = np.array(mp_state(C01.a, C01.b, z, g, 80))
        assert np.max(np.abs(s.amplitudes - ref)) < 1e-13

    def test_large_nmax_no_overflow(self):
        s = ss.coeffs_recurrence(C0, 3.0 + 2.0j, 0.95, 512)
        assert np.all(np.isfinite(s.amplitudes))
        assert math.isfinite(s.norm_factor_log)
        assert np.sum(np.abs(s.amplitudes) ** 2) == pytest.approx(1.0, abs=1e-12)

    def test_norm_factor(self):
        s = ss.coeffs_recurrence(C01, 0.8, 0.2, 30)
        zn = ss.z_coefficients(C01, 0.8, 0.2, 30)
        rho = np.exp(pm.rho_log_table(C01, 30))
        assert s.norm_factor_log == pytest.approx(math.log(np.sum(np.abs(zn) ** 2 / rho)), rel=1e-13)

    def test_unconverged_warns(self):
        with pytest.warns(ss.TruncationWarning):
            s = ss.coeffs_recurrence(C0, 1.0, 0.9, 8)
        assert not s.converged


class TestHermiteLimit:
    @pytest.mark.parametrize("z", [0.0, 0.5, -0.5, 1.5, -1.5])
    @pytest.mark.parametrize("g", [0.1, 0.3, 0.7])
    def test_equivalence_grid(self, z, g):
        rec = ss.coeffs_recurrence(C0, z, g, 128)
        her = ss.coeffs_hermite_limit(C0, z, g, 128)
        assert np.max(np.abs(rec.amplitudes - her.amplitudes)) <= 1e-11

    def test_general_b(self):
        c = DerivedConstants.from_ladder(0.0, 2.3)
        rec = ss.coeffs_recurrence(c, 1.1 - 0.4j, 0.35, 100)
        her = ss.coeffs_hermite_limit(c, 1.1 - 0.4j, 0.35, 100)
        assert np.max(np.abs(rec.amplitudes - her.amplitudes)) <= 1e-11

    def test_small_gamma_coherent(self):
        z = 0.9
        her = ss.coeffs_hermite_limit(C0, z, 1e-9, 40).amplitudes
        ref = np.array([z ** n / math.sqrt(math.factorial(n)) for n in range(41)])
        ref /= np.linalg.norm(ref)
        assert np.allclose(her.real, ref, atol=1e-7)

    def test_odd_vanish_at_zero(self):
        her = ss.coeffs_hermite_limit(C0, 0.0, 0.3, 40).amplitudes
        assert np.all(her[1::2] == 0)

    def test_requires_undeformed(self):
        with pytest.raises(ValueError):
            ss.coeffs_hermite_limit(C01, 0.5, 0.3, 10)
        with pytest.raises(ValueError):
            ss.coeffs_hermite_limit(C0, 0.5, 0.0, 10)


class TestClosedForm:
    def test_n0_unnormalized(self):
        mant, ls = ss.closed_form_raw(C01, 0.8, 0.2, 3)
        assert mant[0] * math.exp(ls[0]) == 1.0

    def test_n1_unnormalized(self):
        z, g = 0.8, 0.2
        a, b = C01.a, C01.b
        beta = -0.5 + b / (2 * a) - z / (2 * math.sqrt(a * g))
        cpar = 1 + b / a
        expected = math.sqrt(g * a) * math.sqrt(cpar) * (1 - 2 * beta / cpar)
        mant, ls = ss.closed_form_raw(C01, z, g, 3)
        assert (mant[1] * math.exp(ls[1])).real == pytest.approx(expected, rel=1e-13)

    def test_singular(self):
        with pytest.raises(ValueError):
            ss.coeffs_closed_form(C0, 0.8, 0.2, 10)
        with pytest.raises(ValueError):
            ss.coeffs_closed_form(C01, 0.8, 0.0, 10)

    def test_normalized(self):
        s = ss.coeffs_closed_form(C01, 0.8, 0.2, 30)
        assert np.sum(np.abs(s.amplitudes) ** 2) == pytest.approx(1.0, abs=1e-12)


class TestComparison:
    def test_identical_vectors_zero_deviation(self, monkeypatch):
        monkeypatch.setattr(ss, "coeffs_closed_form", lambda c, z, g, n: ss.coeffs_recurrence(c, z, g, n))
        rep = ss.compare_constructions(C01, 0.8, 0.2, 20)
        assert rep.max_deviation == 0.0 and rep.first_exceeding is None

    def test_n1_hand_algebra(self):
        z, g = 0.8, 0.2
        a, b = C01.a, C01.b
        r1 = z / math.sqrt(a + b)
        cpar = 1 + b / a
        beta = -0.5 + b / (2 * a) - z / (2 * math.sqrt(a * g))
        c1 = math.sqrt(g * a) * math.sqrt(cpar) * (1 - 2 * beta / cpar)
        rt = r1 / math.sqrt(1 + r1 ** 2)
        ct = c1 / math.sqrt(1 + c1 ** 2)
        rep = ss.compare_constructions(C01, z, g, 1)
        assert rep.deviations[1] == pytest.approx(abs(ct / rt - 1), rel=1e-12)

    def test_fixture_report(self):
        rep = ss.compare_constructions(C01, 0.8, 0.2, 30)
        assert rep.deviations.shape == (31,)
        assert rep.first_exceeding == 0  # the closed form disagrees already in normalization
        d = rep.to_dict()
        assert d["max_deviation"] == rep.max_deviation


class TestAdaptive:
    def test_converges(self):
        s = ss.build_state(C01, StateSpec(z=0.8, gamma=0.2))
        assert s.converged and s.n_max == 64

    def test_doubles(self):
        s = ss.build_state(C0, StateSpec(z=1.5, gamma=0.8))
        assert s.converged and s.n_max > 64

    def test_cap(self):
        with pytest.warns(ss.TruncationWarning):
            s = ss.build_state(C0, StateSpec(z=1.0, gamma=1.2))
        assert s.n_max == 512 and not s.converged

    def test_fixed(self):
        s = ss.build_state(C01, StateSpec(z=0.8, gamma=0.2, n_max=20, method=Method.CLOSED_FORM))
        assert s.n_max == 20 and s.spec.method is Method.CLOSED_FORM


class TestEvolve:
    def test_t0_identity(self):
        s = ss.coeffs_recurrence(C01, 0.8, 0.2, 30)
        assert np.array_equal(ss.evolve(s, 0.0).amplitudes, s.amplitudes)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(-50, 50))
    def test_moduli_preserved(self, t):
        s = ss.coeffs_recurrence(C01, 0.8 + 0.1j, 0.2, 30)
        assert np.allclose(np.abs(ss.evolve(s, t).amplitudes), np.abs(s.amplitudes), rtol=1e-14)

    def test_harmonic_revival(self):
        s = ss.coeffs_recurrence(C0, 0.8, 0.3, 60)
        t = 2 * math.pi
        ev = ss.evolve(s, t).amplitudes
        assert np.allclose(ev, s.amplitudes * np.exp(-0.5j * t), atol=1e-13)

    def test_requires_params(self):
        s = ss.coeffs_recurrence(DerivedConstants.from_ladder(0.1, 1.0), 0.5, 0.1, 10)
        with pytest.raises(ValueError):
            ss.evolve(s, 1.0)


class TestOverlap:
    def test_self(self):
        s = ss.coeffs_recurrence(C01, 0.8 - 0.3j, 0.4, 60)
        assert ss.overlap(s, s) == pytest.approx(1.0, abs=1e-12)

    def test_coherent_positive(self):
        s1 = ss.coeffs_recurrence(C01, 0.5, 0.0, 40)
        s2 = ss.coeffs_recurrence(C01, 1.3, 0.0, 40)
        ov = ss.overlap(s1, s2)
        assert ov.imag == 0 and 0 < ov.real < 1

    def test_fixtures(self):
        s1 = ss.coeffs_recurrence(C01, 0.8, 0.2, 60)
        s2 = ss.coeffs_recurrence(C01, 1.1, 0.2, 60)
        s3 = ss.coeffs_recurrence(C01, 0.8 + 0.3j, 0.2, 60)
        assert ss.overlap(s1, s2) == pytest.approx(OVERLAP_08_11, abs=1e-13)
        assert ss.overlap(s1, s3) == pytest.approx(OVERLAP_08_08P03I, abs=1e-13)

    def test_truncates_to_common(self):
        s1 = ss.coeffs_recurrence(C01, 0.8, 0.2, 40)
        s2 = ss.coeffs_recurrence(C01, 0.8, 0.2, 64)
        assert ss.overlap(s1, s2) == pytest.approx(1.0, abs=1e-12)

    def test_different_constants(self):
        s1 = ss.coeffs_recurrence(C01, 0.8, 0.2, 20)
        s2 = ss.coeffs_recurrence(C0, 0.8, 0.2, 20)
        with pytest.raises(ValueError):
            ss.overlap(s1, s2)

    @settings(max_examples=20, deadline=None)
    @given(st.floats(0, 20))
    def test_phase_invariance(self, t):
        s1 = ss.coeffs_recurrence(C01, 0.8, 0.2, 40)
        s2 = ss.coeffs_recurrence(C01, -0.3 + 0.9j, 0.5, 40)
        before = abs(ss.overlap(s1, s2))
        after = abs(ss.overlap(ss.evolve(s1, t), ss.evolve(s2, t)))
        assert after == pytest.approx(before, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.complex_numbers(max_magnitude=3.0), st.floats(0.0, 0.9),
       st.sampled_from([0.0, 0.05, 0.1, 0.5]))
def test_normalization_property(z, g, alpha):
    c = pm.derive_constants(ModelParams(alpha=alpha))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ss.TruncationWarning)
        s = ss.coeffs_recurrence(c, z, g, 96)
    assert abs(np.sum(np.abs(s.amplitudes) ** 2) - 1) <= 1e-12
