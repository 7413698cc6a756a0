"""Shared fixtures: reference systems and cached heavy simulation runs."""

import math
from pathlib import Path

import numpy as np
import pytest

from afcsim import bloch, memory
from afcsim.constants import C_LIGHT, TWO_PI
from afcsim.model import AtomicSystem, GasParameters, VelocityGrid
from afcsim.pulses import PulseTrain

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

ATOMIC_MASS_U = 1.66053906660e-27


def two_photon_system(gamma21=1e7, gamma23=1e7):
    """Reference Lambda system with a storage state degenerate with |2>."""
    return AtomicSystem(
        omega12=TWO_PI * 1592.5e12,
        omega32=TWO_PI * 637e12,
        omega42=TWO_PI * 1274e12,
        gamma21=gamma21,
        gamma23=gamma23,
    )


def ba_system():
    return AtomicSystem(
        omega12=TWO_PI * 540e12,
        omega32=TWO_PI * 200e12,
        omega42=TWO_PI * 265.35e12,
        gamma21=1.19e8,
        gamma23=0.25e6,
    )


def ba_gas():
    return GasParameters(density=2.5e20, temperature=1073.15,
                         atomic_mass=137.327 * ATOMIC_MASS_U)


def ba_train(n_pulses=40, t_int=689e-9):
    omega0 = TWO_PI * 51.72e6
    return PulseTrain(omega_p0=omega0, omega_d0=omega0, n_pulses=n_pulses,
                      t_int=t_int, sigma=t_int / 64.0)


def fig4_train():
    omega0 = TWO_PI * 151e6
    return PulseTrain(omega_p0=omega0, omega_d0=omega0, n_pulses=16,
                      t_int=0.17e-6, sigma=6.2e-9)


FIG4_DELTA0 = TWO_PI * 360e6
BA_DELTA0 = TWO_PI * 129.35e6


def ba_section_grid(system, train, halfwidth_rad, points_per_width=12.0):
    vmax = halfwidth_rad * C_LIGHT / system.omega34
    width = bloch.predicted_tooth_width_velocity(train, BA_DELTA0, system)
    n = int(math.ceil(2.0 * vmax / (width / points_per_width))) + 1
    if n % 2 == 0:
        n += 1
    return VelocityGrid(-vmax, vmax, n)


@pytest.fixture(scope="session")
def fig4_comb():
    system = two_photon_system()
    gas = GasParameters(density=1.0, eta_override=350.0)
    return bloch.velocity_comb(system, fig4_train(), FIG4_DELTA0, gas)


@pytest.fixture(scope="session")
def fig2_combs():
    """Velocity combs for the three-detuning contrast study."""
    system = AtomicSystem(omega12=TWO_PI * 1592.5e12, omega32=TWO_PI * 637e12,
                          gamma21=1e7, gamma23=1e7)
    gas = GasParameters(density=1.0, eta_override=350.0)
    train = PulseTrain(omega_p0=TWO_PI * 80e6, omega_d0=TWO_PI * 80e6,
                       n_pulses=18, t_int=0.7e-6, sigma=5e-9)
    grid = VelocityGrid(-4.0, 4.0, 2001)
    out = {}
    for delta0 in (0.0, TWO_PI * 63.7e6, TWO_PI * 127.4e6):
        out[delta0] = bloch.velocity_comb(system, train, delta0, gas, grid=grid,
                                          check_resolution=False)
    return out


@pytest.fixture(scope="session")
def ba_pipeline():
    """Full-quality Ba comb section plus storage run with all variants."""
    system = ba_system()
    gas = ba_gas()
    train = ba_train()
    grid = ba_section_grid(system, train, TWO_PI * 2.65e6)
    vc = bloch.velocity_comb(system, train, BA_DELTA0, gas, grid=grid)
    cfg = memory.StorageConfig(delta_s0=-TWO_PI * 380.38e6, omega_c=TWO_PI * 15.2e6,
                               tau_p=0.3e-6, length=0.02, z_points=200)
    res = memory.propagate(vc, cfg, system, gas,
                           retrieval_time=train.t_int / system.xi)
    return {"system": system, "gas": gas, "train": train, "grid": grid,
            "vc": vc, "cfg": cfg, "res": res}


@pytest.fixture(scope="session")
def fig7_rows(tmp_path_factory):
    """Reduced efficiency sweep over (n_pulses, delta0), run through the CLI layer."""
    from afcsim import cli, config as cfgmod

    cfg = cfgmod.load(str(CONFIG_DIR / "fig7_sweep.cfg"))
    out = tmp_path_factory.mktemp("fig7")
    return cli.run_sweep(cfg, str(out))


@pytest.fixture(scope="session")
def parseval_pair():
    """Matched PAP and smooth-envelope transfer profiles with decay off."""
    system = two_photon_system(gamma21=0.0, gamma23=0.0)
    gas = GasParameters(density=1.0, eta_override=350.0)
    train = fig4_train()
    pap = bloch.velocity_comb(system, train, FIG4_DELTA0, gas, points_per_width=10.0)
    grid = VelocityGrid(-15.0, 15.0, 361)
    sti = bloch.velocity_comb(system, train, FIG4_DELTA0, gas, grid=grid, stirap=True)
    return pap, sti


@pytest.fixture(scope="session")
def oz_result():
    from afcsim import stirapoz

    system = two_photon_system()
    gas = GasParameters(density=1.0, eta_override=350.0)
    train = PulseTrain(omega_p0=TWO_PI * 151e6, omega_d0=TWO_PI * 151e6,
                       n_pulses=4, t_int=0.1e-6, sigma=4e-9)
    return stirapoz.oz_map(system, train, gas, gamma_zero=True, n_ratio=13, n_v=171)


@pytest.fixture(scope="session")
def quick_store_setup():
    """Small but physical Ba-like storage scenario for fast memory tests."""
    system = ba_system()
    gas = ba_gas()
    train = ba_train(n_pulses=8)
    grid = ba_section_grid(system, train, TWO_PI * 1.8e6, points_per_width=8.0)
    vc = bloch.velocity_comb(system, train, BA_DELTA0, gas, grid=grid)
    return {"system": system, "gas": gas, "train": train, "vc": vc}
