"""Minimum-energy and robust drive synthesis for linear time-invariant systems."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DesignError,
    DomainError,
    IllConditionedError,
    InconsistencyError,
    InfeasibleError,
    LinstaError,
    NumericalError,
)
from .ltidyn import LtiSystem, Trajectory, gramian, min_energy_drive, simulate  # noqa: E402
from .oscillator import RobustnessSpec, Target, e1_min, excitation_spectrum, u1_closed_form  # noqa: E402
from .signal import PolyExpSignal, energy, fourier_derivative, moment  # noqa: E402
from .superosc import DesignProblem, FourierConstraint, PointConstraint, design_robust_transport, solve_design  # noqa: E402
