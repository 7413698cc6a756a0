"""Gas/atom data types, Doppler kinematics, and closed-form comb predictions.

Conventions: every frequency, detuning, Rabi frequency, and width is
angular (rad/s); velocities are m/s with v > 0 for atoms moving toward
the fields.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import C_LIGHT, EPSILON_0, HBAR, K_BOLTZMANN, TWO_PI


@dataclass(frozen=True)
class AtomicSystem:
    """Lambda system |1>,|3> ground, |2> excited, plus optional storage state |4>.

    omega12/omega32 are the |1>-|2> and |3>-|2> transition frequencies,
    omega42 the |4>-|2> frequency (0 when no storage state is modeled).
    gamma21/gamma23 are population decay rates out of |2>.
    """

    omega12: float
    omega32: float
    gamma21: float
    gamma23: float
    omega42: float = 0.0
    gamma_coherence: float | None = None
    dipole23: float | None = None

    def __post_init__(self):
        if not (self.omega12 > self.omega32 > 0.0):
            raise ValueError("require omega12 > omega32 > 0 (nondegenerate ground states)")
        if self.gamma21 < 0.0 or self.gamma23 < 0.0:
            raise ValueError("decay rates must be >= 0")
        if self.omega42 and not (self.omega42 > self.omega32):
            raise ValueError("omega42 must exceed omega32 when a storage state is used")

    @property
    def omega13(self) -> float:
        """Ground-state splitting |1>-|3> (rad/s), always > 0."""
        return self.omega12 - self.omega32

    @property
    def omega34(self) -> float:
        """Storage transition |3>-|4> frequency; requires omega42 > 0."""
        if not self.omega42:
            raise ValueError("no storage state configured (omega42 = 0)")
        return self.omega42 - self.omega32

    @property
    def xi(self) -> float:
        """Frequency ratio omega34/omega13 governing comb spacing and retrieval."""
        return self.omega34 / self.omega13

    @property
    def r(self) -> float:
        """Transition-frequency ratio omega12/omega32 (> 1)."""
        return self.omega12 / self.omega32

    @property
    def coherence_decay(self) -> float:
        """Optical coherence decay rate; defaults to gamma21/2."""
        if self.gamma_coherence is not None:
            return self.gamma_coherence
        return 0.5 * self.gamma21

    def dipole23_value(self) -> float:
        """|3>-|2> dipole moment (C*m).

        When not given explicitly it is derived from the spontaneous decay
        rate through gamma23 = mu^2 omega32^3 / (3 pi eps0 hbar c^3).
        """
        if self.dipole23 is not None:
            return self.dipole23
        if self.gamma23 <= 0.0:
            raise ValueError("cannot derive dipole23 from gamma23 = 0; set dipole23")
        mu_sq = 3.0 * math.pi * EPSILON_0 * HBAR * C_LIGHT**3 * self.gamma23 / self.omega32**3
        return math.sqrt(mu_sq)


@dataclass(frozen=True)
class GasParameters:
    """Thermal vapor description.

    eta_override lets a run pin the velocity standard deviation directly
    (figure captions often quote eta instead of a temperature/mass pair).
    """

    density: float
    temperature: float | None = None
    atomic_mass: float | None = None
    eta_override: float | None = None

    def __post_init__(self):
        if self.density <= 0.0:
            raise ValueError("density must be > 0")
        if self.eta_override is None and (self.temperature is None or self.atomic_mass is None):
            raise ValueError("need temperature and atomic_mass, or eta_override")
        if self.eta_override is not None and self.eta_override <= 0.0:
            raise ValueError("eta_override must be > 0")

    @property
    def eta(self) -> float:
        """Velocity standard deviation sqrt(kB T / m), m/s."""
        if self.eta_override is not None:
            return self.eta_override
        return math.sqrt(K_BOLTZMANN * self.temperature / self.atomic_mass)


@dataclass(frozen=True)
class VelocityGrid:
    """Uniform velocity grid for the preparation stage."""

    v_min: float
    v_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 3:
            raise ValueError("n_points must be >= 3")
        if not self.v_max > self.v_min:
            raise ValueError("v_max must exceed v_min")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.v_min, self.v_max, self.n_points)

    @property
    def spacing(self) -> float:
        return (self.v_max - self.v_min) / (self.n_points - 1)


@dataclass(frozen=True)
class AfcMetrics:
    """Comb figures of merit, analytic or measured.

    gamma: envelope bandwidth; delta_sep: tooth separation; n_peaks:
    tooth count; peak_fwhm: single-tooth FWHM; finesse = delta_sep /
    peak_fwhm; retrieval_time: first-echo time (s).
    """

    gamma: float
    delta_sep: float
    n_peaks: float
    peak_fwhm: float
    finesse: float
    retrieval_time: float
    method: str = "analytic"
    width_valid: bool | None = None
    width_valid_alt: bool | None = None


def maxwell_boltzmann(v, gas: GasParameters):
    """Atomic density per unit velocity class, atoms*s/m^4."""
    eta = gas.eta
    v = np.asarray(v, dtype=float)
    out = gas.density / (math.sqrt(TWO_PI) * eta) * np.exp(-(v * v) / (2.0 * eta * eta))
    return out if out.ndim else float(out)


def doppler_detunings(v, delta_p0: float, delta_d0: float, omega_p0: float, omega_d0: float):
    """Doppler-shifted pump and dump detunings for velocity class v.

    The shift uses the carrier frequencies omega_p0/omega_d0 (not the bare
    transition frequencies), so the two-photon difference stays exact for
    a common nominal detuning.
    """
    if omega_p0 <= 0.0 or omega_d0 <= 0.0:
        raise ValueError("carrier frequencies must be > 0")
    v = np.asarray(v, dtype=float)
    dp = delta_p0 + omega_p0 * v / C_LIGHT
    dd = delta_d0 + omega_d0 * v / C_LIGHT
    if dp.ndim:
        return dp, dd
    return float(dp), float(dd)


def v_two_photon(order: int, delta_omega: float, omega13: float) -> float:
    """Velocity of the comb tooth with harmonic-index difference `order`.

    delta_omega is the pulse-train tooth spacing 2*pi/T_int.  Degenerate
    ground states (omega13 = 0) carry no velocity comb and are rejected.
    """
    if omega13 <= 0.0:
        raise ValueError("omega13 must be > 0: degenerate ground states have no velocity comb")
    return order * delta_omega * C_LIGHT / omega13


def afc_metrics_analytic(
    omega0: float,
    sigma: float,
    t_int: float,
    delta0: float,
    system: AtomicSystem,
) -> AfcMetrics:
    """Closed-form comb predictions from pulse-train and atom parameters.

    The peak-width formula assumes a nominal detuning beyond
    omega0*sqrt(omega32/omega13); below that the returned width is the
    formula value but `width_valid` is False and a warning is issued.
    `width_valid_alt` reports the same check against the alternative
    omega12-based ratio, which appears in some write-ups.
    """
    if min(omega0, sigma, t_int, delta0) <= 0.0:
        raise ValueError("omega0, sigma, t_int, delta0 must all be > 0")
    xi = system.xi
    gamma = math.sqrt(2.0) * xi / sigma
    delta_sep = xi * TWO_PI / t_int
    n_peaks = 2.0 * t_int / (math.sqrt(math.pi) * sigma)
    peak_fwhm = math.sqrt(math.pi) * omega0**2 * sigma * xi / (4.0 * delta0 * t_int)
    finesse = 8.0 * math.sqrt(math.pi) * delta0 / (omega0**2 * sigma)
    retrieval_time = t_int / xi

    valid = abs(delta0) > omega0 * math.sqrt(system.omega32 / system.omega13)
    valid_alt = abs(delta0) > omega0 * math.sqrt(system.omega32 / system.omega12)
    if not valid:
        warnings.warn(
            "nominal detuning below the peak-width validity threshold; "
            "the analytic FWHM is unreliable here",
            stacklevel=2,
        )
    return AfcMetrics(
        gamma=gamma,
        delta_sep=delta_sep,
        n_peaks=n_peaks,
        peak_fwhm=peak_fwhm,
        finesse=finesse,
        retrieval_time=retrieval_time,
        method="analytic",
        width_valid=valid,
        width_valid_alt=valid_alt,
    )


def design_conditions(omega0: float, sigma: float, delta0: float, system: AtomicSystem) -> dict:
    """Quantum-memory design checks.

    finesse_ok: omega0^2 sigma / delta0 <= (4/5) sqrt(pi), the high-finesse
    operating condition.  ratio_ok: omega34 < omega13, required for a
    retrieval time longer than the bare pulse spacing.
    """
    lhs = omega0**2 * sigma / delta0 if delta0 else math.inf
    bound = 0.8 * math.sqrt(math.pi)
    out = {
        "finesse_lhs": lhs,
        "finesse_bound": bound,
        "finesse_ok": lhs <= bound,
        "ratio_ok": None,
        "xi": None,
        "r": system.r,
    }
    if system.omega42:
        out["ratio_ok"] = system.omega34 < system.omega13
        out["xi"] = system.xi
    return out
