"""jumplmi: certified linear rates for variance-reduced stochastic gradient
methods, obtained by modeling each method as a jump system and checking
Lyapunov LMI feasibility."""

__version__ = "0.1.0"

from ._backend import BACKEND, HAS_NUMBA
