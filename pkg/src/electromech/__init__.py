"""Mean-field bistability, output squeezing and optomechanical entanglement
of a microwave resonator coupled to a membrane and, through a dispersively
detuned qubit, to a second resonator.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .model import DerivedParams, QubitState, SystemParams, derive, thermal_occupation  # noqa: F401
