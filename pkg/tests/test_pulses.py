"""Pulse trains, dark-state diagnostics, and train spectra."""

import math

import numpy as np
import pytest

from afcsim.constants import TWO_PI
from afcsim.errors import GridError
from afcsim.pulses import (
    PulseTrain,
    check_adiabaticity,
    dark_state,
    harmonic_match,
    mixing_angle,
    ofc_spectrum,
    omega_d,
    omega_p,
)
from afcsim.model import AtomicSystem, v_two_photon
from conftest import fig4_train, two_photon_system


class TestTrainShapes:
    def test_dump_peak_at_zero(self):
        train = fig4_train()
        # neighbor-pulse tails vanish at this sigma/t_int ratio
        assert omega_d(0.0, train) == pytest.approx(train.omega_d0, rel=1e-12)

    def test_pump_peak_at_tau(self):
        train = fig4_train()
        assert omega_p(train.tau, train) == pytest.approx(train.omega_p0, rel=1e-6)

    def test_envelope_ratio_default_width(self):
        train = fig4_train()
        ratio = omega_p(0.0, train) / omega_d(0.0, train)
        assert ratio == pytest.approx(math.exp(-4.0 * math.log(2.0)), rel=1e-9)
        assert ratio == pytest.approx(0.0625, rel=1e-9)

    def test_nonnegative_and_bounded(self):
        train = fig4_train()
        t = np.linspace(-1e-6, train.tau + 1e-6, 40_001)
        for field, peak in ((omega_p(t, train), train.omega_p0),
                            (omega_d(t, train), train.omega_d0)):
            assert np.all(field >= 0.0)
            assert np.max(field) <= peak * (1.0 + 1e-9)

    def test_pulse_centers_coincide(self):
        # the envelope tilt shifts each sub-pulse maximum by about
        # sigma^2/sigma_e^2 of the delay, far below sigma itself
        train = fig4_train()
        for l in (0, 7, 15):
            t = l * train.t_int + np.linspace(-3, 3, 1201) * train.sigma
            ip = np.argmax(omega_p(t, train))
            idd = np.argmax(omega_d(t, train))
            assert abs(t[ip] - l * train.t_int) <= 0.05 * train.sigma
            assert abs(t[idd] - l * train.t_int) <= 0.05 * train.sigma

    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            PulseTrain(omega_p0=1.0, omega_d0=1.0, n_pulses=1, t_int=1e-7, sigma=1e-9)
        with pytest.raises(ValueError):
            PulseTrain(omega_p0=1.0, omega_d0=1.0, n_pulses=4, t_int=1e-7, sigma=3e-8)

    def test_tau_definition(self):
        train = fig4_train()
        assert train.tau == pytest.approx(15 * 0.17e-6, rel=1e-15)


class TestDarkState:
    def test_balanced_point(self):
        # envelope symmetry makes the fields equal at tau/2
        train = fig4_train()
        t = train.tau / 2.0
        assert mixing_angle(t, train) == pytest.approx(math.pi / 4.0, rel=1e-9)
        c1, c3 = dark_state(t, train)
        assert c1 == pytest.approx(math.cos(math.pi / 4), rel=1e-9)
        assert c3 == pytest.approx(-math.sin(math.pi / 4), rel=1e-9)

    def test_angle_starts_small(self):
        train = fig4_train()
        assert mixing_angle(0.0, train) == pytest.approx(math.atan(0.0625), rel=1e-9)

    def test_monotone_over_pulse_centers(self):
        train = fig4_train()
        centers = np.arange(train.n_pulses) * train.t_int
        angles = mixing_angle(centers, train)
        assert np.all(np.diff(angles) > 0.0)
        assert angles[0] < 0.1
        assert angles[-1] > math.pi / 2 - 0.1

    def test_undefined_angle_rejected(self):
        train = fig4_train()
        with pytest.raises(ValueError):
            mixing_angle(1.0, train)  # 1 s after the train: both fields underflow


class TestAdiabaticity:
    def test_reference_train(self):
        out = check_adiabaticity(fig4_train())
        assert out["omega_tau"] == pytest.approx(3421.5, rel=1e-3)
        assert out["ok"]

    def test_boundary_is_strict(self):
        bound = 10 * math.pi / math.sqrt(2.0)
        t_int = 1e-7
        n = 2
        omega = bound / (n - 1) / t_int / math.sqrt(2.0)
        train = PulseTrain(omega_p0=omega, omega_d0=omega, n_pulses=n,
                           t_int=t_int, sigma=1e-9)
        out = check_adiabaticity(train)
        assert out["omega_tau"] == pytest.approx(bound, rel=1e-12)
        assert out["ok"] is False

    def test_weak_fields_fail(self):
        train = PulseTrain(omega_p0=1e3, omega_d0=1e3, n_pulses=4, t_int=1e-7, sigma=1e-9)
        assert check_adiabaticity(train)["ok"] is False


class TestOfcSpectrum:
    def test_dc_is_global_maximum(self):
        train = fig4_train()
        spec = ofc_spectrum(train, "dump")
        mags = np.abs(spec.amplitudes)
        i0 = np.argmin(np.abs(spec.frequencies))
        ns = np.arange(train.n_pulses)
        heights = np.exp(-(ns**2) * train.t_int**2 / (2 * train.envelope_width**2))
        expected = train.sigma * train.omega_d0 * heights.sum()
        assert mags[i0] == pytest.approx(expected, rel=1e-9)
        assert mags[i0] == pytest.approx(mags.max(), rel=1e-12)

    @pytest.mark.parametrize("n_pulses", [4, 16, 40])
    def test_teeth_positions(self, n_pulses):
        t_int = 0.17e-6
        train = PulseTrain(omega_p0=TWO_PI * 151e6, omega_d0=TWO_PI * 151e6,
                           n_pulses=n_pulses, t_int=t_int, sigma=6.2e-9)
        spec = ofc_spectrum(train, "dump")
        mags = np.abs(spec.amplitudes)
        spacing = TWO_PI / t_int
        bin_width = spec.frequencies[1] - spec.frequencies[0]
        for k in range(-3, 4):
            window = np.abs(spec.frequencies - k * spacing) < spacing / 2
            peak_at = spec.frequencies[window][np.argmax(mags[window])]
            assert abs(peak_at - k * spacing) <= bin_width

    def test_matches_fourier_oracle(self):
        # Riemann-sum Fourier transform of the exact time-domain train,
        # compared at the comb teeth; the model assigns each pulse its
        # envelope-center height, so agreement is at the (sigma/sigma_e)^2 level.
        train = fig4_train()
        t = np.linspace(-8 * train.sigma, train.tau + 8 * train.sigma, 1 << 17)
        dt = t[1] - t[0]
        field = omega_d(t, train)
        spec = ofc_spectrum(train, "dump")
        spacing = TWO_PI / train.t_int
        for k in range(-2, 3):
            w = k * spacing
            numeric = abs(np.sum(field * np.exp(-1j * w * t)) * dt)
            i = np.argmin(np.abs(spec.frequencies - w))
            model = math.sqrt(TWO_PI) * abs(spec.amplitudes[i])
            assert numeric == pytest.approx(model, rel=0.01)

    def test_parseval(self):
        train = fig4_train()
        t = np.linspace(-8 * train.sigma, train.tau + 8 * train.sigma, 1 << 17)
        field = omega_d(t, train)
        time_side = np.trapezoid(field**2, t)
        spacing = TWO_PI / train.t_int
        half = 6.0 / train.sigma
        n = int(np.ceil(2 * half / (spacing / 512))) + 1
        spec = ofc_spectrum(train, "dump", omega_grid=np.linspace(-half, half, n))
        freq_side = np.trapezoid(np.abs(spec.amplitudes) ** 2, spec.frequencies)
        assert freq_side == pytest.approx(time_side, rel=0.01)

    def test_pump_dump_same_magnitude(self):
        train = fig4_train()
        sp = ofc_spectrum(train, "pump")
        sd = ofc_spectrum(train, "dump")
        spacing = TWO_PI / train.t_int
        for k in range(-2, 3):
            i = np.argmin(np.abs(sp.frequencies - k * spacing))
            assert abs(sp.amplitudes[i]) == pytest.approx(abs(sd.amplitudes[i]), rel=1e-9)

    def test_envelope_bandwidth(self):
        train = fig4_train()
        assert ofc_spectrum(train, "dump").envelope_bandwidth == pytest.approx(
            1.0 / train.sigma, rel=1e-15)

    def test_coarse_grid_rejected(self):
        train = fig4_train()
        with pytest.raises(GridError):
            ofc_spectrum(train, "dump", omega_grid=np.linspace(-1e9, 1e9, 20))


class TestHarmonicMatch:
    def test_rest_atom_fundamental(self):
        system = two_photon_system()
        out = harmonic_match(0.0, 0, 0, fig4_train(), system, 1e8, 1e8)
        assert out["resonant"]

    def test_tooth_velocity_shifted_pair(self):
        system = two_photon_system()
        train = fig4_train()
        v1 = v_two_photon(1, TWO_PI / train.t_int, system.omega13)
        for n, m in ((0, 1), (3, 4), (-2, -1)):
            out = harmonic_match(v1, n, m, train, system, 1e8, 1e8)
            assert out["resonant"], (n, m)
        assert not harmonic_match(v1, 0, 2, train, system, 1e8, 1e8)["resonant"]

    def test_near_degenerate_limit(self):
        # almost-degenerate ground states: only m = n pairs stay resonant,
        # for any velocity
        w32 = TWO_PI * 637e12
        system = AtomicSystem(omega12=w32 * (1 + 1e-12), omega32=w32,
                              gamma21=1e7, gamma23=1e7)
        train = fig4_train()
        for v in (0.0, 137.0, -55.0):
            assert harmonic_match(v, 2, 2, train, system, 1e8, 1e8)["resonant"]
            assert not harmonic_match(v, 0, 1, train, system, 1e8, 1e8)["resonant"]
