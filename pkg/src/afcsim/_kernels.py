"""Compiled RK4 cores for the three-level density-matrix integration.

State layout per velocity class: populations r11, r22, r33 (float64)
and upper-triangle coherences r12, r13, r23 (complex128); Hermiticity
holds by construction and the trace is conserved by the exact
right-hand side up to round-off.

The batch kernel advances every class through one field window with a
shared fixed step; classes are independent, so the parallel loop is
deterministic regardless of thread count.
"""

import numba
import numpy as np
from numba import njit, prange


@njit(cache=True, inline="always")
def _rhs(r11, r22, r33, r12, r13, r23, a, b, dp, dd, g21, g23):
    # a = Omega_p/2, b = Omega_d/2; dp/dd are Doppler-shifted detunings.
    g2 = g21 + g23
    im12 = r12.imag
    im23 = r23.imag
    f11 = -2.0 * a * im12 + g21 * r22
    f22 = 2.0 * a * im12 - 2.0 * b * im23 - g2 * r22
    f33 = 2.0 * b * im23 + g23 * r22
    f12 = -1j * a * (r22 - r11) + 1j * b * r13 - (1j * dp + 0.5 * g2) * r12
    f13 = -1j * a * r23 + 1j * b * r12 - 1j * (dp - dd) * r13
    f23 = -1j * a * r13 - 1j * b * (r33 - r22) + (1j * dd - 0.5 * g2) * r23
    return f11, f22, f33, f12, f13, f23


@njit(cache=True, parallel=True)
def rk4_window(state_pop, state_coh, op_half, od_half, h, n_steps, dp, dd, g21, g23):
    """Advance all classes through one window of n_steps RK4 steps.

    op_half/od_half hold the field samples on the half-step grid
    (2*n_steps + 1 points); state arrays are updated in place.
    """
    for i in prange(state_pop.shape[0]):
        r11 = state_pop[i, 0]
        r22 = state_pop[i, 1]
        r33 = state_pop[i, 2]
        r12 = state_coh[i, 0]
        r13 = state_coh[i, 1]
        r23 = state_coh[i, 2]
        dpi = dp[i]
        ddi = dd[i]
        for s in range(n_steps):
            a0 = 0.5 * op_half[2 * s]
            b0 = 0.5 * od_half[2 * s]
            a1 = 0.5 * op_half[2 * s + 1]
            b1 = 0.5 * od_half[2 * s + 1]
            a2 = 0.5 * op_half[2 * s + 2]
            b2 = 0.5 * od_half[2 * s + 2]

            k1 = _rhs(r11, r22, r33, r12, r13, r23, a0, b0, dpi, ddi, g21, g23)
            k2 = _rhs(
                r11 + 0.5 * h * k1[0], r22 + 0.5 * h * k1[1], r33 + 0.5 * h * k1[2],
                r12 + 0.5 * h * k1[3], r13 + 0.5 * h * k1[4], r23 + 0.5 * h * k1[5],
                a1, b1, dpi, ddi, g21, g23,
            )
            k3 = _rhs(
                r11 + 0.5 * h * k2[0], r22 + 0.5 * h * k2[1], r33 + 0.5 * h * k2[2],
                r12 + 0.5 * h * k2[3], r13 + 0.5 * h * k2[4], r23 + 0.5 * h * k2[5],
                a1, b1, dpi, ddi, g21, g23,
            )
            k4 = _rhs(
                r11 + h * k3[0], r22 + h * k3[1], r33 + h * k3[2],
                r12 + h * k3[3], r13 + h * k3[4], r23 + h * k3[5],
                a2, b2, dpi, ddi, g21, g23,
            )
            c = h / 6.0
            r11 += c * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0])
            r22 += c * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1])
            r33 += c * (k1[2] + 2.0 * (k2[2] + k3[2]) + k4[2])
            r12 += c * (k1[3] + 2.0 * (k2[3] + k3[3]) + k4[3])
            r13 += c * (k1[4] + 2.0 * (k2[4] + k3[4]) + k4[4])
            r23 += c * (k1[5] + 2.0 * (k2[5] + k3[5]) + k4[5])
        state_pop[i, 0] = r11
        state_pop[i, 1] = r22
        state_pop[i, 2] = r33
        state_coh[i, 0] = r12
        state_coh[i, 1] = r13
        state_coh[i, 2] = r23


@njit(cache=True)
def rk4_window_traj(pop0, coh0, op_half, od_half, h, n_steps, dp, dd, g21, g23):
    """Single-class variant recording the state after every step.

    Returns (pop_traj, coh_traj) with shape (n_steps + 1, 3) each,
    including the initial state.
    """
    pop = np.empty((n_steps + 1, 3), dtype=np.float64)
    coh = np.empty((n_steps + 1, 3), dtype=np.complex128)
    r11, r22, r33 = pop0[0], pop0[1], pop0[2]
    r12, r13, r23 = coh0[0], coh0[1], coh0[2]
    pop[0, 0], pop[0, 1], pop[0, 2] = r11, r22, r33
    coh[0, 0], coh[0, 1], coh[0, 2] = r12, r13, r23
    for s in range(n_steps):
        a0 = 0.5 * op_half[2 * s]
        b0 = 0.5 * od_half[2 * s]
        a1 = 0.5 * op_half[2 * s + 1]
        b1 = 0.5 * od_half[2 * s + 1]
        a2 = 0.5 * op_half[2 * s + 2]
        b2 = 0.5 * od_half[2 * s + 2]
        k1 = _rhs(r11, r22, r33, r12, r13, r23, a0, b0, dp, dd, g21, g23)
        k2 = _rhs(
            r11 + 0.5 * h * k1[0], r22 + 0.5 * h * k1[1], r33 + 0.5 * h * k1[2],
            r12 + 0.5 * h * k1[3], r13 + 0.5 * h * k1[4], r23 + 0.5 * h * k1[5],
            a1, b1, dp, dd, g21, g23,
        )
        k3 = _rhs(
            r11 + 0.5 * h * k2[0], r22 + 0.5 * h * k2[1], r33 + 0.5 * h * k2[2],
            r12 + 0.5 * h * k2[3], r13 + 0.5 * h * k2[4], r23 + 0.5 * h * k2[5],
            a1, b1, dp, dd, g21, g23,
        )
        k4 = _rhs(
            r11 + h * k3[0], r22 + h * k3[1], r33 + h * k3[2],
            r12 + h * k3[3], r13 + h * k3[4], r23 + h * k3[5],
            a2, b2, dp, dd, g21, g23,
        )
        c = h / 6.0
        r11 += c * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0])
        r22 += c * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1])
        r33 += c * (k1[2] + 2.0 * (k2[2] + k3[2]) + k4[2])
        r12 += c * (k1[3] + 2.0 * (k2[3] + k3[3]) + k4[3])
        r13 += c * (k1[4] + 2.0 * (k2[4] + k3[4]) + k4[4])
        r23 += c * (k1[5] + 2.0 * (k2[5] + k3[5]) + k4[5])
        pop[s + 1, 0], pop[s + 1, 1], pop[s + 1, 2] = r11, r22, r33
        coh[s + 1, 0], coh[s + 1, 1], coh[s + 1, 2] = r12, r13, r23
    return pop, coh


def set_threads(n: int | None):
    """Clamp and apply the solver thread count (None keeps the default)."""
    if n is None:
        return
    n = max(1, min(int(n), numba.config.NUMBA_DEFAULT_NUM_THREADS))
    numba.set_num_threads(n)
