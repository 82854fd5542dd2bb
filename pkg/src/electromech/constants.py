"""Physical constants (CODATA 2018).

Both values are exact in the 2019 SI, so the 2018 and 2022 CODATA
adjustments agree on them. Golden values in the test-suite depend on
these numbers; do not swap in a library lookup.
"""

import math

#: Planck constant, J s (exact).
PLANCK = 6.62607015e-34
#: Reduced Planck constant, J s.
HBAR = PLANCK / (2.0 * math.pi)  # 1.054571817...e-34
#: Boltzmann constant, J/K (exact).
K_BOLTZMANN = 1.380649e-23

TWO_PI = 2.0 * math.pi
