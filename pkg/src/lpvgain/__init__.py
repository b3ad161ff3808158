"""Bracketing the induced L2 gain of gridded LPV systems.

Lower bounds come from optimizing periodic piecewise-linear scheduling
trajectories; the norm of each resulting periodic LTV system is computed
exactly by Riccati lifting and bisection; near-worst-case inputs are
synthesized from unit-modulus eigenvectors of the Hamiltonian monodromy.
"""

from .errors import LpvGainError
from .lbopt import LowerBoundResult, OptOptions, algorithm_one, algorithm_two, nu
from .lpv import (
    LpvModel,
    ScheduleSpec,
    Trajectory,
    evaluate_along,
    freeze,
    frozen_lower_bound,
    model_from_entries,
    trajectory,
)
from .ltinorm import ContinuousLti, DiscreteLti, hinf_continuous, hinf_discrete
from .pltv import (
    NormBracket, PeriodicSystem, escape_certificate, lifted_plant,
    norm_bisect, norm_test,
)
from .wcinput import reconstruct_monodromy, synthesize, unit_eigenpair

__version__ = "0.1.0"

__all__ = [
    "LpvGainError", "LowerBoundResult", "OptOptions", "algorithm_one",
    "algorithm_two", "nu", "LpvModel", "ScheduleSpec", "Trajectory",
    "evaluate_along", "freeze", "frozen_lower_bound", "model_from_entries",
    "trajectory", "ContinuousLti", "DiscreteLti", "hinf_continuous",
    "hinf_discrete", "NormBracket", "PeriodicSystem", "escape_certificate",
    "lifted_plant",
    "norm_bisect", "norm_test", "reconstruct_monodromy", "synthesize",
    "unit_eigenpair",
]
