"""Optimal-zone boundaries for single-envelope passage and width relations.

The smooth-pulse (non-piecewise) passage transfers population inside a
velocity band bounded by the curves Vs+- and, above a detuning
threshold, excluding the band interior to Vp+-.  The tooth width of the
piecewise comb follows from the smooth-pulse width by the duty-cycle
factor sqrt(pi) sigma / T_int.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import C_LIGHT
from .model import AtomicSystem, GasParameters, VelocityGrid
from .pulses import PulseTrain
from .bloch import velocity_comb


@dataclass(frozen=True)
class OzCurves:
    """Transfer-zone boundary velocities for one (delta0, omega0) pair.

    vp_plus/vp_minus are None below the threshold |delta0|/omega0 =
    sqrt(omega32/omega13), where the inner boundaries turn complex.
    """

    vs_plus: float
    vs_minus: float
    vp_plus: float | None
    vp_minus: float | None
    threshold: float

    def __post_init__(self):
        if self.vs_plus < self.vs_minus:
            raise ValueError("vs_plus must be >= vs_minus")


def oz_curves(delta0: float, omega0: float, system: AtomicSystem) -> OzCurves:
    """Boundary velocities of the transfer zone."""
    if omega0 <= 0.0:
        raise ValueError("omega0 must be > 0")
    w12, w32, w13 = system.omega12, system.omega32, system.omega13
    disc_s = w13 * (delta0**2 * w13 + omega0**2 * w12)
    root_s = math.sqrt(disc_s)
    vs_p = C_LIGHT / (2.0 * w12 * w13) * (root_s - w13 * delta0)
    vs_m = C_LIGHT / (2.0 * w12 * w13) * (-root_s - w13 * delta0)
    disc_p = w13 * (delta0**2 * w13 - omega0**2 * w32)
    if disc_p >= 0.0:
        root_p = math.sqrt(disc_p)
        vp_p = C_LIGHT / (2.0 * w32 * w13) * (root_p - w13 * delta0)
        vp_m = C_LIGHT / (2.0 * w32 * w13) * (-root_p - w13 * delta0)
    else:
        vp_p = vp_m = None
    return OzCurves(
        vs_plus=vs_p,
        vs_minus=vs_m,
        vp_plus=vp_p,
        vp_minus=vp_m,
        threshold=math.sqrt(w32 / w13),
    )


def stirap_widths(delta0: float, omega0: float, system: AtomicSystem) -> dict:
    """Velocity FWHM of the smooth-pulse transfer and its detuning counterpart.

    Below the threshold the width is half the Vs band; above it the
    expanded closed form omega0^2 c / (4 omega13 delta0) applies, whose
    detuning-domain version is omega0^2 xi / (4 delta0).
    """
    if omega0 <= 0.0 or delta0 <= 0.0:
        raise ValueError("omega0 and delta0 must be > 0")
    w12, w32, w13 = system.omega12, system.omega32, system.omega13
    threshold = math.sqrt(w32 / w13)
    if abs(delta0) / omega0 > threshold:
        regime = "above"
        width_v = omega0**2 * C_LIGHT / (4.0 * w13 * delta0)
    else:
        regime = "below"
        disc_s = w13 * (delta0**2 * w13 + omega0**2 * w12)
        width_v = C_LIGHT * math.sqrt(disc_s) / (2.0 * w12 * w13)
    out = {"width_velocity": width_v, "regime": regime, "threshold": threshold}
    if system.omega42:
        out["peak_fwhm"] = width_v * system.omega34 / C_LIGHT
    return out


def pap_width_from_stirap(peak_fwhm_stirap: float, sigma: float, t_int: float) -> float:
    """Comb tooth width from the smooth-pulse width and the train duty cycle."""
    if min(peak_fwhm_stirap, sigma, t_int) <= 0.0:
        raise ValueError("inputs must be > 0")
    return math.sqrt(math.pi) * sigma / t_int * peak_fwhm_stirap


def allowed_region_mask(v: np.ndarray, curves: OzCurves) -> np.ndarray:
    """Boolean mask of velocities inside the transfer zone."""
    inside = (v >= curves.vs_minus) & (v <= curves.vs_plus)
    if curves.vp_plus is not None:
        lo = min(curves.vp_minus, curves.vp_plus)
        hi = max(curves.vp_minus, curves.vp_plus)
        inside &= ~((v > lo) & (v < hi))
    return inside


def oz_map(
    system: AtomicSystem,
    train: PulseTrain,
    gas: GasParameters,
    ratio_grid=None,
    v_grid: VelocityGrid | None = None,
    gamma_zero: bool = False,
    n_ratio: int = 61,
    n_v: int = 61,
) -> dict:
    """Final |3> population under smooth-pulse passage over (delta0/omega0, v).

    Pulses are the train envelopes; the default velocity span is 1.5x
    the zero-detuning Vs band.  gamma_zero=True switches spontaneous
    emission off, matching the regime the boundary curves are derived in.
    """
    omega0 = max(train.omega_p0, train.omega_d0)
    if ratio_grid is None:
        ratio_grid = np.linspace(0.0, 3.0, n_ratio)
    ratio_grid = np.asarray(ratio_grid, dtype=float)
    if v_grid is None:
        base = oz_curves(0.0, omega0, system)
        half = 0.75 * (base.vs_plus - base.vs_minus)
        v_grid = VelocityGrid(v_min=-half, v_max=half, n_points=n_v)
    sys_run = system
    if gamma_zero:
        sys_run = AtomicSystem(
            omega12=system.omega12, omega32=system.omega32, omega42=system.omega42,
            gamma21=0.0, gamma23=0.0,
            gamma_coherence=system.gamma_coherence, dipole23=system.dipole23,
        )
    rho33 = np.empty((ratio_grid.size, v_grid.n_points))
    for i, ratio in enumerate(ratio_grid):
        comb = velocity_comb(sys_run, train, ratio * omega0 if ratio > 0 else 0.0,
                             gas, grid=v_grid, stirap=True)
        rho33[i] = comb.rho33
    # containment statistic: transferred cells lying outside the boundaries
    outside = 0
    transferred = 0
    for i, ratio in enumerate(ratio_grid):
        curves = oz_curves(ratio * omega0, omega0, system)
        mask = allowed_region_mask(v_grid.values, curves)
        hot = rho33[i] > 0.5
        transferred += int(np.count_nonzero(hot))
        outside += int(np.count_nonzero(hot & ~mask))
    fraction_outside = outside / transferred if transferred else 0.0
    return {
        "ratio": ratio_grid,
        "v": v_grid.values,
        "rho33": rho33,
        "fraction_outside": fraction_outside,
        "omega0": omega0,
    }
