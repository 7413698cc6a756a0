"""Density-matrix integration of the preparation stage, per velocity class.

The rotating-frame Hamiltonian is
    H/hbar = -Dp(v)|2><2| - (Dp(v)-Dd(v))|3><3|
             + (Omega_p/2)(|1><2| + h.c.) + (Omega_d/2)(|3><2| + h.c.)
with spontaneous decay |2>->|1> at gamma21 and |2>->|3> at gamma23.
Atoms start in |1>.

Between the narrow pulses of a train the fields are zero to double
precision, so the integrator only runs RK4 inside windows around the
pulse centers and applies the exact field-free propagator (phase
rotation plus decay) across the gaps.  This is an optimization of the
fixed-step policy, not an approximation: the neglected Gaussian tails
carry a pulse area below 1e-9 rad for resolvable trains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import pulses as pl
from .constants import C_LIGHT, PHASE_RESOLUTION, STEPS_PER_WIDTH, TWO_PI
from ._kernels import rk4_window, rk4_window_traj
from .errors import GridError, NumericalError
from .model import AtomicSystem, GasParameters, VelocityGrid, maxwell_boltzmann, v_two_photon

WINDOW_HALF_WIDTH_SIGMAS = 6.5
ENVELOPE_PAD_SIGMAS = 5.0


@dataclass(frozen=True)
class Dm3Trajectory:
    """Recorded density-matrix evolution of a single velocity class."""

    times: np.ndarray
    rho: np.ndarray          # (k, 3, 3) complex
    step: float

    @property
    def rho33(self) -> np.ndarray:
        return self.rho[:, 2, 2].real

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.einsum("kii->ki", self.rho))

    def final(self) -> np.ndarray:
        return self.rho[-1]


@dataclass(frozen=True)
class VelocityComb:
    """End-of-sequence |3> population across velocity classes."""

    grid: VelocityGrid
    rho33: np.ndarray        # per-atom probability, dimensionless
    weighted: np.ndarray     # rho33 * f(v), atoms*s/m^4
    params: dict


def _assemble_rho(pop: np.ndarray, coh: np.ndarray) -> np.ndarray:
    """Build Hermitian 3x3 matrices from (k,3) population/coherence rows."""
    k = pop.shape[0]
    rho = np.empty((k, 3, 3), dtype=np.complex128)
    rho[:, 0, 0] = pop[:, 0]
    rho[:, 1, 1] = pop[:, 1]
    rho[:, 2, 2] = pop[:, 2]
    rho[:, 0, 1] = coh[:, 0]
    rho[:, 1, 0] = np.conj(coh[:, 0])
    rho[:, 0, 2] = coh[:, 1]
    rho[:, 2, 0] = np.conj(coh[:, 1])
    rho[:, 1, 2] = coh[:, 2]
    rho[:, 2, 1] = np.conj(coh[:, 2])
    return rho


def _gap_propagate(pop, coh, dt, dp, dd, g21, g23):
    """Exact field-free evolution over dt for all classes (in place)."""
    g2 = g21 + g23
    if g2 > 0.0:
        decay = np.exp(-g2 * dt)
        transfer = pop[:, 1] * (1.0 - decay)
        pop[:, 0] += (g21 / g2) * transfer
        pop[:, 2] += (g23 / g2) * transfer
        pop[:, 1] *= decay
    coh[:, 0] *= np.exp((-1j * dp - 0.5 * g2) * dt)
    coh[:, 1] *= np.exp(-1j * (dp - dd) * dt)
    coh[:, 2] *= np.exp((1j * dd - 0.5 * g2) * dt)


def _train_windows(train: pl.PulseTrain) -> list[tuple[float, float]]:
    """Merged integration windows around the pulse centers."""
    half = WINDOW_HALF_WIDTH_SIGMAS * train.sigma
    raw = [(l * train.t_int - half, l * train.t_int + half) for l in range(train.n_pulses)]
    merged = [raw[0]]
    for lo, hi in raw[1:]:
        if lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], hi)
        else:
            merged.append((lo, hi))
    return merged


def _step_size(omega_max: float, width: float, hint: float | None, scale: float) -> float:
    if hint is not None:
        return hint
    h = min(width / STEPS_PER_WIDTH, 1.0 / (PHASE_RESOLUTION * omega_max + 1e-300))
    return h * scale


def _omega_max(dp, dd, train_peak: float) -> float:
    return max(np.max(np.abs(dp)), np.max(np.abs(dd)), train_peak)


def _run_windows(pop, coh, windows, field_fn, h, dp, dd, g21, g23, t_final):
    """RK4 inside each window, exact propagation across gaps and the tail."""
    t_now = windows[0][0]
    for lo, hi in windows:
        if lo > t_now:
            _gap_propagate(pop, coh, lo - t_now, dp, dd, g21, g23)
        n_steps = max(1, int(math.ceil((hi - lo) / h)))
        hw = (hi - lo) / n_steps
        t_half = lo + 0.5 * hw * np.arange(2 * n_steps + 1)
        op, od = field_fn(t_half)
        rk4_window(pop, coh, op, od, hw, n_steps, dp, dd, g21, g23)
        t_now = hi
    if t_final > t_now:
        _gap_propagate(pop, coh, t_final - t_now, dp, dd, g21, g23)


def predicted_tooth_width_velocity(
    train: pl.PulseTrain, delta0: float, system: AtomicSystem
) -> float:
    """Predicted comb tooth FWHM in velocity units (m/s).

    Above the detuning threshold this is the piecewise-narrowed
    single-pulse width; below it the two-photon window width is used so
    grid policies stay finite at small detunings.
    """
    omega0 = max(train.omega_p0, train.omega_d0)
    w13 = system.omega13
    factor = math.sqrt(math.pi) * train.sigma / train.t_int
    if abs(delta0) > omega0 * math.sqrt(system.omega32 / w13):
        w_v = omega0**2 * C_LIGHT / (4.0 * w13 * delta0)
    else:
        disc = w13 * (delta0**2 * w13 + omega0**2 * system.omega12)
        w_v = C_LIGHT * math.sqrt(disc) / (2.0 * system.omega12 * w13)
    return factor * w_v


def default_velocity_grid(
    system: AtomicSystem,
    train: pl.PulseTrain,
    delta0: float,
    gas: GasParameters,
    points_per_width: float = 12.0,
    max_points: int = 20001,
    span_override: float | None = None,
) -> VelocityGrid:
    """Symmetric velocity grid resolving the predicted teeth.

    Span: +-max(3 * overlap bandwidth, 20 tooth spacings), clipped to
    +-4 eta; resolution: points_per_width samples per predicted tooth
    FWHM (>= 8 required downstream).
    """
    w13 = system.omega13
    tooth = v_two_photon(1, TWO_PI / train.t_int, w13)
    gamma_v = math.sqrt(2.0) * C_LIGHT / (train.sigma * w13)
    span = span_override
    if span is None:
        span = min(max(3.0 * gamma_v, 20.0 * tooth), 4.0 * gas.eta)
    width_v = predicted_tooth_width_velocity(train, delta0, system)
    step = width_v / points_per_width
    n = int(math.ceil(2.0 * span / step)) + 1
    if n % 2 == 0:
        n += 1
    n = min(n, max_points)
    return VelocityGrid(v_min=-span, v_max=span, n_points=n)


def evolve(
    system: AtomicSystem,
    omega_p,
    omega_d,
    v: float,
    delta_p0: float,
    delta_d0: float,
    t_span: tuple[float, float],
    t_step_hint: float | None = None,
    record_every: int = 1,
) -> Dm3Trajectory:
    """Integrate one velocity class under arbitrary field callables.

    Returns the recorded trajectory (every record_every-th accepted
    step).  The step is t_step_hint when given, otherwise the fixed-step
    policy based on the largest detuning/Rabi scale present.
    """
    t0, t1 = t_span
    if not t1 > t0:
        raise ValueError("t_span must be increasing")
    probe = np.linspace(t0, t1, 4097)
    peak = max(float(np.max(np.abs(omega_p(probe)))), float(np.max(np.abs(omega_d(probe)))))
    omega_p0_carrier = system.omega12 + delta_p0
    omega_d0_carrier = system.omega32 + delta_d0
    dp = delta_p0 + omega_p0_carrier * v / C_LIGHT
    dd = delta_d0 + omega_d0_carrier * v / C_LIGHT
    omega_max = max(abs(dp), abs(dd), peak)
    if t_step_hint is not None:
        h = t_step_hint
    else:
        h = min(1.0 / (PHASE_RESOLUTION * omega_max + 1e-300), (t1 - t0) / 1000.0)
    n_steps = max(1, int(math.ceil((t1 - t0) / h)))
    h = (t1 - t0) / n_steps
    t_half = t0 + 0.5 * h * np.arange(2 * n_steps + 1)
    op = np.asarray(omega_p(t_half), dtype=float)
    od = np.asarray(omega_d(t_half), dtype=float)
    pop0 = np.array([1.0, 0.0, 0.0])
    coh0 = np.zeros(3, dtype=np.complex128)
    pop, coh = rk4_window_traj(pop0, coh0, op, od, h, n_steps, dp, dd,
                               system.gamma21, system.gamma23)
    if not (np.all(np.isfinite(pop)) and np.all(np.isfinite(coh.view(np.float64)))):
        raise NumericalError(f"integration diverged for v={v} (step {h:.3e} s)")
    times = t0 + h * np.arange(n_steps + 1)
    sel = slice(None, None, record_every)
    return Dm3Trajectory(times=times[sel], rho=_assemble_rho(pop[sel], coh[sel]), step=h)


def velocity_comb(
    system: AtomicSystem,
    train: pl.PulseTrain,
    delta0: float,
    gas: GasParameters,
    grid: VelocityGrid | None = None,
    stirap: bool = False,
    step_scale: float = 1.0,
    t_final: float | None = None,
    points_per_width: float = 12.0,
    span_override: float | None = None,
    check_resolution: bool = True,
) -> VelocityComb:
    """Final |3> population over a velocity grid after the pulse sequence.

    stirap=True replaces the trains by their smooth envelopes (the
    passage the trains realize piecewise).  The readout time defaults to
    tau + 4 sigma_e, after both envelopes have decayed.
    """
    if grid is None:
        grid = default_velocity_grid(
            system, train, delta0, gas,
            points_per_width=points_per_width, span_override=span_override,
        )
    elif check_resolution and not stirap:
        width_v = predicted_tooth_width_velocity(train, delta0, system)
        if grid.spacing > width_v / 8.0 * (1.0 + 1e-12):
            raise GridError(
                f"velocity grid spacing {grid.spacing:.3e} m/s does not resolve the "
                f"predicted tooth width; need <= {width_v / 8.0:.3e} m/s"
            )
    v = grid.values
    omega_p0_carrier = system.omega12 + delta0
    omega_d0_carrier = system.omega32 + delta0
    dp = delta0 + omega_p0_carrier * v / C_LIGHT
    dd = delta0 + omega_d0_carrier * v / C_LIGHT

    se = train.envelope_width
    if t_final is None:
        t_final = train.tau + 4.0 * se
    if stirap:
        windows = [(-ENVELOPE_PAD_SIGMAS * se, train.tau + ENVELOPE_PAD_SIGMAS * se)]
        field_fn = lambda t: (pl.stirap_omega_p(t, train), pl.stirap_omega_d(t, train))
        width = se
    else:
        windows = _train_windows(train)
        field_fn = lambda t: (pl.omega_p(t, train), pl.omega_d(t, train))
        width = train.sigma
    t_final = max(t_final, windows[-1][1])

    omega_max = _omega_max(dp, dd, train.omega_p0 + train.omega_d0)
    h = _step_size(omega_max, width, None, step_scale)

    n = v.size
    pop = np.zeros((n, 3), dtype=np.float64)
    pop[:, 0] = 1.0
    coh = np.zeros((n, 3), dtype=np.complex128)
    _run_windows(pop, coh, windows, field_fn, h, dp, dd,
                 system.gamma21, system.gamma23, t_final)

    rho33 = pop[:, 2].copy()
    bad = ~np.isfinite(rho33)
    if np.any(bad):
        raise NumericalError(
            f"integration diverged for velocity classes {v[bad][:5]} (step {h:.3e} s)"
        )
    weighted = rho33 * maxwell_boltzmann(v, gas)
    params = {
        "mode": "stirap" if stirap else "pap",
        "delta0_rad_s": delta0,
        "n_pulses": train.n_pulses,
        "t_int_s": train.t_int,
        "sigma_s": train.sigma,
        "sigma_e_s": se,
        "omega_p0_rad_s": train.omega_p0,
        "omega_d0_rad_s": train.omega_d0,
        "t_final_s": t_final,
        "step_s": h,
        "step_scale": step_scale,
        "omega12_rad_s": system.omega12,
        "omega32_rad_s": system.omega32,
        "omega42_rad_s": system.omega42,
        "gamma21_s": system.gamma21,
        "gamma23_s": system.gamma23,
        "eta_m_s": gas.eta,
        "density_m3": gas.density,
        "v_min": grid.v_min,
        "v_max": grid.v_max,
        "n_points": grid.n_points,
    }
    return VelocityComb(grid=grid, rho33=rho33, weighted=weighted, params=params)
