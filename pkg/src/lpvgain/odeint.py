"""Adaptive matrix ODE integration on a finite interval.

Dormand-Prince 5(4) embedded pair with step rejection, cubic Hermite dense
output on accepted steps, and finite-escape detection on the state max-norm.
Backward spans (t1 < t0) are handled by internal time reversal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import FiniteEscape, OutOfSpan, StepUnderflow

# Dormand-Prince coefficients
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4

DEFAULT_RTOL = 1e-8
DEFAULT_ATOL = 1e-10
DEFAULT_ESCAPE = 1e8


@dataclass(frozen=True)
class OdeField:
    """Right-hand side of a matrix-valued ODE dX/dt = f(t, X)."""

    f: Callable[[float, np.ndarray], np.ndarray]
    shape: tuple[int, int]


@dataclass
class DenseSolution:
    """Accepted nodes with states and derivatives for Hermite interpolation.

    times are strictly monotone in the direction of integration.
    """

    times: np.ndarray  # (N,)
    states: np.ndarray  # (N, rows, cols)
    derivs: np.ndarray  # (N, rows, cols)
    shape: tuple[int, int]
    # internal lookup caches
    _fwd: bool = field(init=False, repr=False)

    def __post_init__(self):
        self._fwd = bool(self.times[-1] >= self.times[0])

    @property
    def t0(self) -> float:
        return float(self.times[0])

    @property
    def t1(self) -> float:
        return float(self.times[-1])

    def sample(self, t: float) -> np.ndarray:
        """Cubic-Hermite interpolated state at t; exact at node times."""
        ts = self.times if self._fwd else -self.times
        tq = t if self._fwd else -t
        if tq < ts[0] - 1e-12 * (1 + abs(ts[0])) or tq > ts[-1] + 1e-12 * (1 + abs(ts[-1])):
            raise OutOfSpan(f"t = {t:.6g} outside [{self.t0:.6g}, {self.t1:.6g}]")
        k = int(np.searchsorted(ts, tq, side="right")) - 1
        k = min(max(k, 0), len(ts) - 2)
        ta, tb = self.times[k], self.times[k + 1]
        hstep = tb - ta
        if hstep == 0.0:
            return self.states[k].copy()
        s = (t - ta) / hstep
        ya, yb = self.states[k], self.states[k + 1]
        fa, fb = self.derivs[k], self.derivs[k + 1]
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return h00 * ya + h10 * hstep * fa + h01 * yb + h11 * hstep * fb


def integrate(
    field: OdeField,
    initial: np.ndarray,
    span: tuple[float, float],
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    escape_threshold: float = DEFAULT_ESCAPE,
) -> DenseSolution:
    """Integrate the field over span = (t0, t1), forward or backward.

    Raises FiniteEscape(t) when the state max-norm exceeds escape_threshold
    and StepUnderflow when the step drops below 1e-13 * |t1 - t0|.
    """
    t0, t1 = float(span[0]), float(span[1])
    if t0 == t1:
        raise ValueError("degenerate span")
    if rtol <= 0 or atol <= 0 or escape_threshold <= 0:
        raise ValueError("tolerances and escape threshold must be positive")

    backward = t1 < t0
    if backward:
        # time reversal: u(s) = X(-s), du/ds = -f(-s, u), s from -t0 to -t1
        inner = OdeField(lambda s, X: -field.f(-s, X), field.shape)
        try:
            sol = integrate(inner, initial, (-t0, -t1), rtol, atol, escape_threshold)
        except FiniteEscape as ex:
            raise FiniteEscape(-ex.t_escape) from None
        return DenseSolution(-sol.times, sol.states, -sol.derivs, sol.shape)

    y = np.array(initial, dtype=float)
    if y.shape != field.shape:
        raise ValueError(f"initial state shape {y.shape} != field shape {field.shape}")
    total = t1 - t0
    hmin = 1e-13 * total
    t = t0
    f0 = field.f(t, y)

    # initial step heuristic
    scale = atol + rtol * np.max(np.abs(y)) if y.size else atol
    d0 = np.max(np.abs(y)) / scale if y.size else 0.0
    d1 = np.max(np.abs(f0)) / scale if y.size else 0.0
    h = 0.01 * d0 / d1 if d1 > 1e-15 and d0 > 1e-15 else 1e-3 * total
    h = min(max(h, 10 * hmin), total)

    times = [t]
    states = [y.copy()]
    derivs = [f0.copy()]
    K = [None] * 7

    while t < t1:
        h = min(h, t1 - t)
        if h < hmin:
            raise StepUnderflow(f"step {h:.3g} below floor {hmin:.3g} at t = {t:.6g}")
        K[0] = f0
        failed_this_step = False
        for i in range(1, 7):
            yi = y + h * sum(_A[i][j] * K[j] for j in range(i))
            K[i] = field.f(t + _C[i] * h, yi)
        y5 = y + h * sum(_B5[j] * K[j] for j in range(6))  # b5[6] = 0
        err_vec = h * sum(_E[j] * K[j] for j in range(7) if _E[j] != 0.0)
        tol = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        with np.errstate(invalid="ignore"):
            err = float(np.sqrt(np.mean((err_vec / tol) ** 2))) if y.size else 0.0
        if not np.isfinite(err):
            err = 2.0  # force rejection on overflow inside a trial step
            failed_this_step = True
        if err <= 1.0:
            t_new = t + h
            f_new = K[6] if not failed_this_step else field.f(t_new, y5)  # FSAL
            if not np.all(np.isfinite(y5)) or np.max(np.abs(y5)) > escape_threshold:
                raise FiniteEscape(t_new)
            t, y, f0 = t_new, y5, f_new
            times.append(t)
            states.append(y.copy())
            derivs.append(f0.copy())
            fac = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** (-0.2))
            h *= fac
        else:
            h *= max(0.2, 0.9 * err ** (-0.2))

    return DenseSolution(
        np.array(times), np.array(states), np.array(derivs), field.shape
    )
