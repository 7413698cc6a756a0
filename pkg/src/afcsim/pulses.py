"""Pump/dump pulse trains, dark-state diagnostics, and train spectra.

The dump train is a sum of N narrow Gaussians at t = l*T_int under an
envelope centered at t = 0; the pump train shares the pulse centers but
its envelope peaks at the delay tau = (N-1)*T_int, which realizes the
counterintuitive ordering piecewise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import ADIABATICITY_BOUND, C_LIGHT, TWO_PI
from .errors import GridError
from .model import AtomicSystem

DEFAULT_HARMONIC_TOL = TWO_PI * 1e3  # rad/s, far below any tooth width of interest


def envelope_width_default(tau: float) -> float:
    """Envelope width giving FWHM equal to the pump-dump delay tau."""
    return tau / (2.0 * math.sqrt(2.0 * math.log(2.0)))


@dataclass(frozen=True)
class PulseTrain:
    """Parameters of the paired pump/dump trains.

    sigma is the width of the individual pulses, sigma_e the width of the
    two envelopes (defaults to tau/(2 sqrt(2 ln 2))).
    """

    omega_p0: float
    omega_d0: float
    n_pulses: int
    t_int: float
    sigma: float
    sigma_e: float | None = None

    def __post_init__(self):
        if self.n_pulses < 2:
            raise ValueError("need at least 2 pulses")
        if min(self.omega_p0, self.omega_d0, self.t_int, self.sigma) <= 0.0:
            raise ValueError("train parameters must be > 0")
        if not self.sigma < self.t_int / 4.0:
            raise ValueError("pulses must be resolvable: sigma < t_int/4")
        if self.sigma_e is not None and self.sigma_e <= 0.0:
            raise ValueError("sigma_e must be > 0")

    @property
    def tau(self) -> float:
        """Pump-dump envelope delay (N-1)*T_int."""
        return (self.n_pulses - 1) * self.t_int

    @property
    def envelope_width(self) -> float:
        return self.sigma_e if self.sigma_e is not None else envelope_width_default(self.tau)


def _pulse_comb(t: np.ndarray, train: PulseTrain) -> np.ndarray:
    """Sum of the N narrow Gaussians, evaluated without truncation."""
    total = np.zeros_like(t)
    for l in range(train.n_pulses):
        total += np.exp(-((t - l * train.t_int) ** 2) / (2.0 * train.sigma**2))
    return total


def omega_p(t, train: PulseTrain):
    """Pump Rabi frequency at time t (rad/s)."""
    t = np.asarray(t, dtype=float)
    se = train.envelope_width
    out = train.omega_p0 * np.exp(-((t - train.tau) ** 2) / (2.0 * se**2)) * _pulse_comb(t, train)
    return out if out.ndim else float(out)


def omega_d(t, train: PulseTrain):
    """Dump Rabi frequency at time t (rad/s)."""
    t = np.asarray(t, dtype=float)
    se = train.envelope_width
    out = train.omega_d0 * np.exp(-(t * t) / (2.0 * se**2)) * _pulse_comb(t, train)
    return out if out.ndim else float(out)


def stirap_omega_p(t, train: PulseTrain):
    """Pump envelope alone: the smooth pulse the train piecewise realizes."""
    t = np.asarray(t, dtype=float)
    se = train.envelope_width
    out = train.omega_p0 * np.exp(-((t - train.tau) ** 2) / (2.0 * se**2))
    return out if out.ndim else float(out)


def stirap_omega_d(t, train: PulseTrain):
    """Dump envelope alone."""
    t = np.asarray(t, dtype=float)
    se = train.envelope_width
    out = train.omega_d0 * np.exp(-(t * t) / (2.0 * se**2))
    return out if out.ndim else float(out)


def mixing_angle(t, train: PulseTrain):
    """theta(t) = arctan(Omega_p/Omega_d); undefined where both vanish."""
    op = np.asarray(omega_p(t, train), dtype=float)
    od = np.asarray(omega_d(t, train), dtype=float)
    if np.any((op == 0.0) & (od == 0.0)):
        raise ValueError("mixing angle undefined where both fields vanish; sample pulse centers")
    out = np.arctan2(op, od)
    return out if out.ndim else float(out)


def dark_state(t, train: PulseTrain):
    """Amplitudes (c1, c3) of the field-dressed dark state cos(theta)|1> - sin(theta)|3>."""
    th = mixing_angle(t, train)
    return np.cos(th), -np.sin(th)


def check_adiabaticity(train: PulseTrain) -> dict:
    """Global adiabaticity figure Omega*tau and its pass/fail against 10*pi/sqrt(2)."""
    omega = math.hypot(train.omega_p0, train.omega_d0)
    product = omega * train.tau
    return {"omega_tau": product, "ok": product > ADIABATICITY_BOUND}


@dataclass(frozen=True)
class OfcSpectrum:
    """Frequency comb of one pulse train: teeth every 2*pi/T_int under a 1/sigma envelope."""

    frequencies: np.ndarray
    amplitudes: np.ndarray
    envelope_bandwidth: float
    which: str = "dump"
    tooth_spacing: float = 0.0

    def __post_init__(self):
        if self.frequencies.shape != self.amplitudes.shape:
            raise ValueError("frequency and amplitude arrays must match")


def ofc_spectrum(train: PulseTrain, which: str = "dump", omega_grid=None) -> OfcSpectrum:
    """Analytic train spectrum on omega_grid.

    The grid must resolve the tooth spacing 2*pi/T_int with at least 16
    bins.  When omega_grid is None a default grid spanning +-4/sigma at
    32 bins per tooth is used.
    """
    if which not in ("pump", "dump"):
        raise ValueError("which must be 'pump' or 'dump'")
    spacing = TWO_PI / train.t_int
    if omega_grid is None:
        half = 4.0 / train.sigma
        n = int(np.ceil(2.0 * half / (spacing / 32.0))) + 1
        omega_grid = np.linspace(-half, half, n)
    omega_grid = np.asarray(omega_grid, dtype=float)
    step = np.max(np.diff(omega_grid))
    if step > spacing / 16.0:
        raise GridError(
            f"omega grid too coarse: step {step:.3e} rad/s exceeds "
            f"{spacing / 16.0:.3e} (tooth spacing / 16)"
        )

    se = train.envelope_width
    ns = np.arange(train.n_pulses)
    if which == "dump":
        heights = np.exp(-(ns**2) * train.t_int**2 / (2.0 * se**2))
        amp0 = train.omega_d0
    else:
        heights = np.exp(-((ns - (train.n_pulses - 1)) ** 2) * train.t_int**2 / (2.0 * se**2))
        amp0 = train.omega_p0
    phases = np.exp(1j * np.outer(omega_grid, ns) * train.t_int)
    amps = train.sigma * amp0 * np.exp(-(omega_grid**2) * train.sigma**2 / 2.0) * (phases @ heights)
    return OfcSpectrum(
        frequencies=omega_grid,
        amplitudes=amps,
        envelope_bandwidth=1.0 / train.sigma,
        which=which,
        tooth_spacing=spacing,
    )


def harmonic_match(
    v: float,
    n: int,
    m: int,
    train: PulseTrain,
    system: AtomicSystem,
    delta_p0: float,
    delta_d0: float,
    tol: float = DEFAULT_HARMONIC_TOL,
) -> dict:
    """Detunings of the n-th pump and m-th dump comb teeth for class v.

    The pair is two-photon resonant when the shifted tooth detunings
    coincide within tol; for equal nominal detunings the resonant
    velocities reduce to v_two_photon with order m - n.
    """
    dw = TWO_PI / train.t_int
    omega_p0_carrier = system.omega12 + delta_p0
    omega_d0_carrier = system.omega32 + delta_d0
    omega_p_n = omega_p0_carrier * (1.0 + v / C_LIGHT) + n * dw
    omega_d_m = omega_d0_carrier * (1.0 + v / C_LIGHT) + m * dw
    dp = omega_p_n - system.omega12
    dd = omega_d_m - system.omega32
    return {"delta_p_n": dp, "delta_d_m": dd, "resonant": abs(dp - dd) < tol}
