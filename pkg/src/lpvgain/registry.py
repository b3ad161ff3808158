"""Built-in example models with their published analysis setups.

Notes on constants:

* ``harald``: the source prints the closed-loop time constant as
  tau(rho) = sqrt(13.6 - 16.8 rho), which is negative on the declared range
  rho in [2, 7].  The variant tau(rho) = sqrt(133.6 - 16.8 rho) (positive on
  the whole range) reproduces the published frozen-grid bound 1.1066 on the
  100-point grid, so that is what the registry stores.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lpv import LpvModel, ScheduleSpec, model_from_entries

_TAU = "sqrt(133.6-16.8*r1)"
_K = "sqrt(4.8*r1-8.6)"
# PI gains for xi = 0.7, omega = 0.25: Kp = (0.35 tau - 1)/K, Ki = 0.0625 tau/K
_KP = f"(0.35*{_TAU}-1)/{_K}"
_KI = f"0.0625*{_TAU}/{_K}"


@dataclass(frozen=True)
class ExampleSetup:
    """A model together with its published analysis configuration."""

    model: LpvModel
    schedule: ScheduleSpec
    grid_counts: tuple
    gamma_ub: float  # published LMI upper bound
    gamma_lb: float  # published optimized lower bound
    gamma_lb_frozen: float  # published frozen-grid bound
    c0: tuple | None = None  # curated search start (None: heuristic default)


def _harald_model() -> LpvModel:
    # Kp K = 0.35 tau - 1, Ki K = 0.0625 tau: the A entries simplify
    A = [
        ["-0.35", f"1/{_TAU}"],
        [f"-0.0625*{_TAU}", "0"],
    ]
    B = [[f"({_KP})/{_TAU}"], [_KI]]
    C = [[f"-{_K}", "0"]]
    D = [["1"]]
    return model_from_entries(
        1, A, B, C, D, [[2.0, 7.0]], [[-1.0, 1.0]], name="harald"
    )


def harald() -> ExampleSetup:
    """First-order LPV plant with a gain-scheduled PI controller."""
    spec = ScheduleSpec((np.array([1.0, 0.0, -1.0, 0.0, 1.0, 0.0]),), 12.0, 20.0)
    return ExampleSetup(
        model=_harald_model(), schedule=spec, grid_counts=(100,),
        gamma_ub=2.964, gamma_lb=2.84, gamma_lb_frozen=1.1066,
    )


def scaled_lti(mu_bar: float = 1.0) -> ExampleSetup:
    """Difference of an input-scaled and an output-scaled copy of 1/(s+1)."""
    A = [["-1", "0"], ["0", "-1"]]
    B = [["1"], ["r1"]]
    C = [["r1", "-1"]]
    D = [["0"]]
    model = model_from_entries(
        1, A, B, C, D, [[-1.0, 1.0]], [[-mu_bar, mu_bar]], name="scaled-lti"
    )
    # published period boxes per rate bound
    hbox = {0.1: (0.5, 50.0), 0.4: (0.5, 50.0), 0.7: (0.5, 20.0)}.get(
        round(mu_bar, 3), (0.5, 6.0)
    )
    published = {
        0.1: (0.0979, 0.1087), 0.4: (0.3309, 0.3342), 0.7: (0.4783, 0.4805),
        1.0: (0.5645, 0.5766), 1.3: (0.6364, 0.6435), 1.6: (0.6874, 0.6924),
        2.0: (0.7347, 0.7403),
    }
    glb, gub = published.get(round(mu_bar, 3), (float("nan"), float("nan")))
    spec = ScheduleSpec(
        (mu_bar * np.array([1.0, 0.0, -1.0, 0.0, 1.0, 0.0]),), hbox[0], hbox[1]
    )
    return ExampleSetup(
        model=model, schedule=spec, grid_counts=(100,),
        gamma_ub=gub, gamma_lb=glb, gamma_lb_frozen=0.0,
    )


def rotated() -> ExampleSetup:
    """Stable 2-state system under a parameter-dependent rotation of A."""
    A0 = np.array([[-0.5, -0.4], [3.0, -0.5]])
    B0 = np.array([[0.5], [0.5]])
    C0 = np.array([[1.0, -1.0]])
    D0 = np.array([[0.1]])

    def rot(rho):
        c, s = np.cos(rho[0]), np.sin(rho[0])
        return np.array([[c, s], [-s, c]])

    model = LpvModel(
        m=1, n=2, p=1, q=1,
        A=lambda rho: rot(rho).T @ A0 @ rot(rho),
        B=lambda rho: B0, C=lambda rho: C0, D=lambda rho: D0,
        range_lo=[np.pi / 4], range_hi=[np.pi / 2],
        rate_lo=[-0.1], rate_hi=[0.1],
        name="rotated",
    )
    spec = ScheduleSpec((0.1 * np.array([1.0, 0.0, -1.0, 0.0, 1.0, 0.0]),), 1.0, 5.0)
    return ExampleSetup(
        model=model, schedule=spec, grid_counts=(50,),
        gamma_ub=3.3, gamma_lb=3.15, gamma_lb_frozen=2.696,
    )


def twopar() -> ExampleSetup:
    """Two copies of the harald closed loop, input/output scaled by rho2.

    The direct feedthroughs of the two copies cancel in the difference
    output, so the combined D is zero.
    """
    A = [
        ["-0.35", f"1/{_TAU}", "0", "0"],
        [f"-0.0625*{_TAU}", "0", "0", "0"],
        ["0", "0", "-0.35", f"1/{_TAU}"],
        ["0", "0", f"-0.0625*{_TAU}", "0"],
    ]
    B = [
        [f"({_KP})/{_TAU}"], [_KI],
        [f"r2*({_KP})/{_TAU}"], [f"r2*{_KI}"],
    ]
    C = [[f"-r2*{_K}", "0", f"{_K}", "0"]]
    D = [["0"]]
    model = model_from_entries(
        2, A, B, C, D,
        [[2.0, 7.0], [-1.0, 1.0]], [[-1.0, 1.0], [-1.0, 1.0]],
        name="twopar",
    )
    spec = ScheduleSpec(
        (
            np.array([1.0, 0.0, -1.0, 0.0, 1.0, 0.0]),
            np.array([0.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0]),
        ),
        12.0, 20.0,
    )
    # Curated start: rho1 sweeps the full range twice per period while rho2
    # holds -1 through the first sweep and +1 through the second, which is
    # where the scaled/unscaled copies interfere most destructively.
    c0 = (
        4.5, 2.5, 2.81, 5.0, 3.04, 2.5, 0.0,
        -1.0, 5.925, 2.0, 5.925, 2.0, 0.0, 0.0, 0.0,
    )
    return ExampleSetup(
        model=model, schedule=spec, grid_counts=(30, 10),
        gamma_ub=5.38, gamma_lb=5.047, gamma_lb_frozen=0.0,
        c0=c0,
    )


_BUILTINS = {
    "harald": harald,
    "scaled-lti": scaled_lti,
    "rotated": rotated,
    "twopar": twopar,
}


def get(name: str, **kwargs) -> ExampleSetup:
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise KeyError(
            f"unknown example {name!r}; choose from {sorted(_BUILTINS)}"
        ) from None
    return factory(**kwargs)


def names():
    return sorted(_BUILTINS)
