"""Closed-form layer: gas statistics, kinematics, comb predictions."""

import math

import numpy as np
import pytest

from afcsim.constants import C_LIGHT, TWO_PI
from afcsim.model import (
    AtomicSystem,
    GasParameters,
    VelocityGrid,
    afc_metrics_analytic,
    design_conditions,
    doppler_detunings,
    maxwell_boltzmann,
    v_two_photon,
)
from conftest import ba_system, two_photon_system


class TestMaxwellBoltzmann:
    def test_peak_value(self):
        gas = GasParameters(density=1.0, eta_override=350.0)
        assert maxwell_boltzmann(0.0, gas) == pytest.approx(1.0 / (math.sqrt(TWO_PI) * 350.0),
                                                            rel=1e-12)
        assert maxwell_boltzmann(0.0, gas) == pytest.approx(1.1398e-3, rel=1e-4)

    def test_even_symmetry(self):
        gas = GasParameters(density=2.3e19, eta_override=221.0)
        v = np.linspace(0.0, 5 * 221.0, 57)
        assert np.array_equal(maxwell_boltzmann(v, gas), maxwell_boltzmann(-v, gas))

    def test_quadrature_recovers_density(self):
        gas = GasParameters(density=3.7e18, eta_override=350.0)
        v = np.linspace(-6 * 350.0, 6 * 350.0, 100_000)
        total = np.trapezoid(maxwell_boltzmann(v, gas), v)
        assert total == pytest.approx(gas.density, rel=1e-8)

    def test_grid_weight_sum_property(self):
        # coarser grids spanning >= 6 eta still integrate to the density
        gas = GasParameters(density=1.0, temperature=1073.15, atomic_mass=2.2805e-25)
        eta = gas.eta
        v = np.linspace(-6.5 * eta, 6.5 * eta, 10_000)
        assert np.trapezoid(maxwell_boltzmann(v, gas), v) == pytest.approx(1.0, rel=1e-6)

    def test_eta_from_temperature(self):
        gas = GasParameters(density=1.0, temperature=1073.15,
                            atomic_mass=137.327 * 1.66053906660e-27)
        assert gas.eta == pytest.approx(254.90, rel=1e-3)


class TestDopplerDetunings:
    def test_atom_at_rest(self):
        dp, dd = doppler_detunings(0.0, 1.23e8, -4.5e7, TWO_PI * 1.6e15, TWO_PI * 6.4e14)
        assert (dp, dd) == (1.23e8, -4.5e7)

    def test_shift_magnitude(self):
        # 300 m/s on a 1592.5 THz carrier shifts by ~1.593 GHz
        omega_p0 = TWO_PI * 1592.5e12
        dp, _ = doppler_detunings(300.0, 0.0, 0.0, omega_p0, omega_p0)
        expected = omega_p0 * 300.0 / C_LIGHT
        assert dp == pytest.approx(expected, rel=1e-14)
        assert dp == pytest.approx(TWO_PI * 1.5937e9, rel=1e-4)

    def test_linearity(self):
        omega_p0, omega_d0 = TWO_PI * 1.6e15, TWO_PI * 6.4e14
        dp1, dd1 = doppler_detunings(17.0, 2e8, 2e8, omega_p0, omega_d0)
        dp2, dd2 = doppler_detunings(34.0, 2e8, 2e8, omega_p0, omega_d0)
        assert dp2 - 2e8 == pytest.approx(2 * (dp1 - 2e8), rel=1e-12)
        assert dd2 - 2e8 == pytest.approx(2 * (dd1 - 2e8), rel=1e-12)

    def test_rejects_bad_carrier(self):
        with pytest.raises(ValueError):
            doppler_detunings(0.0, 0.0, 0.0, -1.0, 1.0)


class TestVTwoPhoton:
    W13 = TWO_PI * 955.5e12

    def test_order_zero(self):
        assert v_two_photon(0, TWO_PI / 0.17e-6, self.W13) == 0.0

    def test_fast_train_tooth(self):
        # c / (T_int * f13) with T_int = 0.17 us
        v = v_two_photon(1, TWO_PI / 0.17e-6, self.W13)
        assert v == pytest.approx(C_LIGHT / (0.17e-6 * 955.5e12), rel=1e-12)
        assert v == pytest.approx(1.8456149, rel=1e-6)

    def test_slow_train_tooth(self):
        v = v_two_photon(1, TWO_PI / 0.7e-6, self.W13)
        assert v == pytest.approx(0.4482208, rel=1e-6)

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError):
            v_two_photon(1, 1e7, 0.0)

    def test_tooth_maps_to_spacing(self):
        # omega34 * v_n / c equals n * delta_sep exactly
        system = two_photon_system()
        t_int = 0.17e-6
        sep = system.xi * TWO_PI / t_int
        for n in (1, 2, 7):
            v = v_two_photon(n, TWO_PI / t_int, system.omega13)
            assert system.omega34 * v / C_LIGHT == pytest.approx(n * sep, rel=1e-12)


class TestAnalyticMetrics:
    def test_reference_comb_values(self):
        system = two_photon_system()
        m = afc_metrics_analytic(TWO_PI * 151e6, 6.2e-9, 0.17e-6, TWO_PI * 360e6, system)
        assert m.gamma == pytest.approx(TWO_PI * 24.19e6, rel=0.01)
        assert m.delta_sep == pytest.approx(TWO_PI * 3.91e6, rel=0.01)
        assert m.peak_fwhm == pytest.approx(TWO_PI * 0.684e6, rel=0.01)
        assert m.finesse == pytest.approx(5.72, rel=0.01)
        assert abs(m.n_peaks - 30.9) < 0.1
        assert m.width_valid and m.width_valid_alt

    def test_ba_values(self):
        system = ba_system()
        m = afc_metrics_analytic(TWO_PI * 51.72e6, 689e-9 / 64, 689e-9,
                                 TWO_PI * 129.35e6, system)
        assert m.delta_sep == pytest.approx(TWO_PI * 0.28e6, rel=0.01)
        assert m.retrieval_time == pytest.approx(3.6e-6, rel=0.01)
        assert system.r == pytest.approx(2.7, rel=0.01)
        # xi prints as 0.19 at the reported precision; exact value 0.19221
        assert system.xi == pytest.approx(65.35 / 340.0, rel=1e-12)
        assert round(system.xi, 2) == 0.19

    def test_consistency_identities(self):
        system = two_photon_system()
        m = afc_metrics_analytic(TWO_PI * 151e6, 6.2e-9, 0.17e-6, TWO_PI * 360e6, system)
        assert m.finesse * m.peak_fwhm == pytest.approx(m.delta_sep, rel=1e-12)
        assert m.retrieval_time * m.delta_sep == pytest.approx(TWO_PI, rel=1e-12)

    def test_validity_warning(self):
        system = two_photon_system()
        with pytest.warns(UserWarning):
            m = afc_metrics_analytic(TWO_PI * 151e6, 6.2e-9, 0.17e-6, TWO_PI * 50e6, system)
        assert m.width_valid is False

    def test_rejects_nonpositive(self):
        system = two_photon_system()
        with pytest.raises(ValueError):
            afc_metrics_analytic(0.0, 6.2e-9, 0.17e-6, 1e9, system)


class TestDesignConditions:
    def test_ba_borderline_finesse(self):
        system = ba_system()
        cond = design_conditions(TWO_PI * 51.72e6, 689e-9 / 64, TWO_PI * 129.35e6, system)
        assert cond["finesse_lhs"] == pytest.approx(1.399, rel=1e-3)
        assert cond["finesse_ok"] is True

    def test_ba_ratio(self):
        system = ba_system()
        cond = design_conditions(TWO_PI * 51.72e6, 689e-9 / 64, TWO_PI * 129.35e6, system)
        assert cond["ratio_ok"] is True
        assert cond["r"] == pytest.approx(2.7, rel=1e-12)
        assert cond["xi"] == pytest.approx(0.19221, rel=1e-4)

    def test_equal_frequencies_boundary(self):
        # omega34 = omega13 gives no retrieval-time gain
        system = AtomicSystem(omega12=TWO_PI * 1.2e15, omega32=TWO_PI * 0.4e15,
                              omega42=TWO_PI * 1.2e15, gamma21=1e7, gamma23=1e7)
        assert system.omega34 == pytest.approx(system.omega13, rel=1e-12)
        cond = design_conditions(1e9, 5e-9, 1e9, system)
        assert cond["ratio_ok"] is False


class TestTypes:
    def test_atomic_system_validation(self):
        with pytest.raises(ValueError):
            AtomicSystem(omega12=1.0, omega32=2.0, gamma21=0.0, gamma23=0.0)
        with pytest.raises(ValueError):
            AtomicSystem(omega12=2.0, omega32=1.0, gamma21=-1.0, gamma23=0.0)

    def test_derived_frequencies(self):
        system = two_photon_system()
        assert system.omega13 == pytest.approx(TWO_PI * 955.5e12, rel=1e-12)
        assert system.omega34 == pytest.approx(TWO_PI * 637e12, rel=1e-12)
        assert system.xi == pytest.approx(2.0 / 3.0, rel=1e-12)
        assert system.r == pytest.approx(2.5, rel=1e-12)

    def test_no_storage_state(self):
        system = AtomicSystem(omega12=2.0, omega32=1.0, gamma21=0.0, gamma23=0.0)
        with pytest.raises(ValueError):
            _ = system.omega34

    def test_gas_requires_eta_or_pair(self):
        with pytest.raises(ValueError):
            GasParameters(density=1.0)

    def test_velocity_grid(self):
        g = VelocityGrid(-2.0, 2.0, 5)
        assert np.allclose(g.values, [-2, -1, 0, 1, 2])
        with pytest.raises(ValueError):
            VelocityGrid(2.0, -2.0, 5)
        with pytest.raises(ValueError):
            VelocityGrid(-2.0, 2.0, 2)

    def test_dipole_from_decay(self):
        system = ba_system()
        mu = system.dipole23_value()
        # Weisskopf-Wigner inversion reproduces the decay rate
        from afcsim.constants import EPSILON_0, HBAR

        gamma = mu**2 * system.omega32**3 / (3 * math.pi * EPSILON_0 * HBAR * C_LIGHT**3)
        assert gamma == pytest.approx(system.gamma23, rel=1e-12)
