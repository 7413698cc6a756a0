"""Physical constants (CODATA 2018) and numerical policy constants.

All frequencies inside the package are angular (rad/s).  Configuration
files take ordinary frequencies in Hz; the conversion happens once, at
parse time.
"""

import math

C_LIGHT = 299792458.0            # speed of light in vacuum, m/s
HBAR = 1.054571817e-34           # reduced Planck constant, J*s
K_BOLTZMANN = 1.380649e-23       # Boltzmann constant, J/K
EPSILON_0 = 8.8541878128e-12     # vacuum permittivity, F/m

TWO_PI = 2.0 * math.pi

# Global adiabatic-passage criterion for optimally delayed Gaussian pulses:
# the pulse area Omega*tau must exceed this bound (dimensionless).
ADIABATICITY_BOUND = 10.0 * math.pi / math.sqrt(2.0)

# Fixed-step integrator policy: step = min(width/STEPS_PER_WIDTH,
# 1/(PHASE_RESOLUTION * max characteristic angular frequency)).
STEPS_PER_WIDTH = 10.0
PHASE_RESOLUTION = 20.0
