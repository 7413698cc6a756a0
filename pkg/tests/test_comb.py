"""Comb metrology: mapping, tooth detection, model fitting."""

import math

import numpy as np
import pytest

from afcsim import comb as combmod
from afcsim.constants import C_LIGHT, TWO_PI
from afcsim.errors import AfcsimError, PeakDetectionError
from afcsim.comb import AfcProfile, comb_model, detect_peaks, fit_comb_model, measure_metrics, vc_to_afc
from conftest import two_photon_system

GAMMA = TWO_PI * 24e6
SEP = TWO_PI * 4e6
FWHM = TWO_PI * 0.9e6


def synthetic_profile(amplitude=1.0, gamma=GAMMA, sep=SEP, fwhm=FWHM, center=0.0,
                      n_points=12001):
    half = 3.2 * gamma
    delta = np.linspace(-half, half, n_points)
    j_max = int(half / sep) + 2
    rho = comb_model(delta, amplitude, gamma, sep, fwhm, center, j_max)
    return AfcProfile(delta=delta, rho33=rho, omega_map=TWO_PI * 637e12)


class TestVcToAfc:
    def test_linear_map(self, fig4_comb):
        omega_map = TWO_PI * 637e12
        prof = vc_to_afc(fig4_comb, omega_map)
        v = fig4_comb.grid.values
        i0 = np.argmin(np.abs(v))
        assert v[i0] == 0.0
        assert prof.delta[i0] == 0.0
        assert np.allclose(prof.delta, omega_map * v / C_LIGHT, rtol=1e-15)

    def test_round_trip_identity(self, fig4_comb):
        prof = vc_to_afc(fig4_comb, TWO_PI * 637e12)
        back = prof.to_velocity()
        assert np.allclose(back, fig4_comb.grid.values, rtol=1e-12, atol=1e-15)

    def test_spacing_maps_to_delta_sep(self):
        # a 1.8456 m/s tooth spacing maps onto xi * 2 pi / t_int
        system = two_photon_system()
        v1 = C_LIGHT / (0.17e-6 * 955.5e12)
        mapped = system.omega34 * v1 / C_LIGHT
        assert mapped == pytest.approx(system.xi * TWO_PI / 0.17e-6, rel=1e-12)

    def test_rejects_bad_map(self, fig4_comb):
        with pytest.raises(ValueError):
            vc_to_afc(fig4_comb, 0.0)


class TestDetectPeaks:
    def test_generate_then_measure_round_trip(self):
        prof = synthetic_profile()
        met = measure_metrics(prof)
        assert met.delta_sep == pytest.approx(SEP, rel=0.01)
        assert met.peak_fwhm == pytest.approx(FWHM, rel=0.01)
        assert met.gamma == pytest.approx(GAMMA, rel=0.01)

    def test_scale_invariance(self):
        prof = synthetic_profile()
        scaled = AfcProfile(delta=prof.delta, rho33=37.5 * prof.rho33,
                            omega_map=prof.omega_map)
        a = detect_peaks(prof)
        b = detect_peaks(scaled)
        assert np.array_equal(a.raw_indices, b.raw_indices)
        assert np.allclose(a.fwhms, b.fwhms, rtol=1e-12)
        assert np.allclose(b.heights, 37.5 * a.heights, rtol=1e-12)

    def test_flat_profile_rejected(self):
        prof = AfcProfile(delta=np.linspace(-1e8, 1e8, 500),
                          rho33=np.zeros(500), omega_map=1e15)
        with pytest.raises(PeakDetectionError):
            detect_peaks(prof)

    def test_spacing_ratio_is_exact_map(self, fig4_comb):
        # measured spacing in detuning over measured spacing in velocity
        # equals omega_map / c exactly (same samples, linear map)
        omega_map = TWO_PI * 637e12
        prof = vc_to_afc(fig4_comb, omega_map)
        peaks_d = detect_peaks(prof)
        prof_v = AfcProfile(delta=fig4_comb.grid.values, rho33=fig4_comb.rho33,
                            omega_map=C_LIGHT)
        peaks_v = detect_peaks(prof_v)
        sep_d = np.mean(np.diff(peaks_d.centers))
        sep_v = np.mean(np.diff(peaks_v.centers))
        assert sep_d / sep_v == pytest.approx(omega_map / C_LIGHT, rel=1e-12)

    def test_counting_convention(self):
        prof = synthetic_profile()
        peaks = detect_peaks(prof)
        # counted teeth clear the envelope-based height cut; the raw list
        # can only be larger
        assert peaks.n_counted <= peaks.centers.size
        cut = math.exp(-math.pi) * peaks.envelope_fit["amplitude"]
        assert peaks.n_counted == np.count_nonzero(peaks.heights >= cut)


class TestFitCombModel:
    def test_exact_recovery_on_noiseless_input(self):
        prof = synthetic_profile(amplitude=0.83, center=0.4e6)
        fit = fit_comb_model(prof)
        assert fit["residual"] < 1e-10
        assert fit["gamma"] == pytest.approx(GAMMA, rel=1e-6)
        assert fit["delta_sep"] == pytest.approx(SEP, rel=1e-6)
        assert fit["peak_fwhm"] == pytest.approx(FWHM, rel=1e-6)
        assert fit["amplitude"] == pytest.approx(0.83, rel=1e-6)

    def test_cross_method_consistency(self, fig4_comb):
        prof = vc_to_afc(fig4_comb, TWO_PI * 637e12)
        met = measure_metrics(prof)
        fit = fit_comb_model(prof)
        assert fit["delta_sep"] == pytest.approx(met.delta_sep, rel=0.02)
        assert fit["residual"] < 0.1

    def test_single_tooth_unidentifiable(self):
        delta = np.linspace(-3e6, 3e6, 2001)
        rho = np.exp(-4 * math.log(2) * delta**2 / (0.9e6) ** 2)
        prof = AfcProfile(delta=delta, rho33=rho, omega_map=1e15)
        with pytest.raises(AfcsimError):
            fit_comb_model(prof)


class TestMeasuredReference:
    def test_reference_comb_metrics(self, fig4_comb):
        prof = vc_to_afc(fig4_comb, TWO_PI * 637e12)
        met = measure_metrics(prof)
        assert met.delta_sep == pytest.approx(TWO_PI * 3.95e6, rel=0.02)
        assert met.peak_fwhm == pytest.approx(TWO_PI * 0.891e6, rel=0.15)
        assert met.gamma == pytest.approx(TWO_PI * 25.46e6, rel=0.10)
        assert met.finesse == pytest.approx(4.43, rel=0.15)
        assert abs(met.n_peaks - 25) <= 2
