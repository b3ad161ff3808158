"""Gridded LPV models and piecewise-linear periodic scheduling trajectories.

A trajectory for parameter i is fixed by a user-chosen rate pattern
r^i = (r_1, ..., r_R) and a decision vector holding an offset rho0^i and
nonnegative segment lengths c_1, ..., c_R.  Closure (sum c_j r_j = 0), range
bounds at the breakpoints, a common period across parameters and the period
box [h_min, h_max] are all linear constraints on the decision vector, so the
feasible set is a polytope.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import expr as exprmod
from .errors import ExprDomainError, InfeasibleDecision
from .ltinorm import ContinuousLti, hinf_continuous
from .pltv import PeriodicSystem

CLOSURE_TOL = 1e-9
FEAS_TOL = 1e-9


MatrixFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class LpvModel:
    """Parameter-dependent state-space matrices with range/rate bounds."""

    m: int
    n: int
    p: int
    q: int
    A: MatrixFn
    B: MatrixFn
    C: MatrixFn
    D: MatrixFn
    range_lo: np.ndarray
    range_hi: np.ndarray
    rate_lo: np.ndarray
    rate_hi: np.ndarray
    name: str = ""

    def __post_init__(self):
        for v in ("range_lo", "range_hi", "rate_lo", "rate_hi"):
            object.__setattr__(self, v, np.asarray(getattr(self, v), float))
        if not np.all(self.range_lo < self.range_hi):
            raise ValueError("parameter ranges must have positive width")
        if not (np.all(self.rate_lo <= 0.0) and np.all(self.rate_hi >= 0.0)):
            raise ValueError("rate bounds must straddle zero (flat segments)")


def _entry_fn(entries, m: int, rows: int, cols: int) -> MatrixFn:
    """Compile a matrix of expression strings / numbers into a callable."""
    trees = []
    for i in range(rows):
        row = []
        for j in range(cols):
            v = entries[i][j]
            if isinstance(v, str):
                row.append(exprmod.parse(v, m))
            else:
                row.append(exprmod.Num(float(v)))
        trees.append(row)

    def fn(rho: np.ndarray) -> np.ndarray:
        out = np.empty((rows, cols))
        for i in range(rows):
            for j in range(cols):
                try:
                    out[i, j] = exprmod.evaluate(trees[i][j], rho)
                except ExprDomainError as ex:
                    raise ExprDomainError(
                        f"entry ({i}, {j}) at rho = {np.asarray(rho)}: {ex}", ex.subexpr
                    ) from None
        return out

    return fn


def model_from_entries(
    m, A, B, C, D, range_bounds, rate_bounds, name=""
) -> LpvModel:
    """Build a model whose entries are expression strings or numbers."""
    A0, B0, C0, D0 = (np.asarray(M, dtype=object) for M in (A, B, C, D))
    n, p, q = A0.shape[0], B0.shape[1], C0.shape[0]
    rb = np.asarray(range_bounds, float).reshape(m, 2)
    mb = np.asarray(rate_bounds, float).reshape(m, 2)
    return LpvModel(
        m=m, n=n, p=p, q=q,
        A=_entry_fn(A0, m, n, n),
        B=_entry_fn(B0, m, n, p),
        C=_entry_fn(C0, m, q, n),
        D=_entry_fn(D0, m, q, p),
        range_lo=rb[:, 0], range_hi=rb[:, 1],
        rate_lo=mb[:, 0], rate_hi=mb[:, 1],
        name=name,
    )


@dataclass(frozen=True)
class ScheduleSpec:
    """Rate patterns (one per parameter) and the shared period box."""

    patterns: tuple  # tuple of per-parameter rate arrays
    h_min: float
    h_max: float

    def __post_init__(self):
        object.__setattr__(
            self, "patterns", tuple(np.asarray(p, float) for p in self.patterns)
        )
        if not 0 < self.h_min <= self.h_max:
            raise ValueError("need 0 < h_min <= h_max")

    @property
    def m(self) -> int:
        return len(self.patterns)

    @property
    def sizes(self) -> tuple:
        return tuple(len(p) for p in self.patterns)

    @property
    def dim(self) -> int:
        """Length of the flattened decision vector: sum of (R_i + 1)."""
        return sum(len(p) + 1 for p in self.patterns)

    def validate_against(self, model: LpvModel):
        if self.m != model.m:
            raise ValueError("pattern count != parameter count")
        for i, pat in enumerate(self.patterns):
            if np.any(pat < model.rate_lo[i] - 1e-12) or np.any(
                pat > model.rate_hi[i] + 1e-12
            ):
                raise ValueError(f"pattern {i + 1} exceeds the rate bounds")
            s = pat[pat != 0.0]
            if s.size and (np.all(s > 0) or np.all(s < 0)):
                raise ValueError(
                    f"pattern {i + 1} cannot close: rates are one-signed"
                )

    def split(self, c: np.ndarray):
        """Split a flattened decision vector into (rho0_i, lengths_i) pairs."""
        c = np.asarray(c, float)
        if c.shape != (self.dim,):
            raise ValueError(f"decision vector must have length {self.dim}")
        out = []
        k = 0
        for pat in self.patterns:
            R = len(pat)
            out.append((c[k], c[k + 1 : k + 1 + R]))
            k += R + 1
        return out


@dataclass(frozen=True)
class Trajectory:
    """Piecewise-linear h-periodic scheduling trajectory rho(t)."""

    spec: ScheduleSpec
    c: np.ndarray
    h: float
    # per parameter: breakpoint times (R+1,) and values (R+1,)
    breaks: tuple = field(repr=False, default=())
    values: tuple = field(repr=False, default=())

    def rho(self, t: float) -> np.ndarray:
        tm = float(t) % self.h
        out = np.empty(self.spec.m)
        for i in range(self.spec.m):
            Ts, vals = self.breaks[i], self.values[i]
            j = min(max(int(np.searchsorted(Ts, tm, side="right")) - 1, 0), len(Ts) - 2)
            out[i] = vals[j] + (tm - Ts[j]) * self.spec.patterns[i][j]
        return out

    def rho_dot(self, t: float) -> np.ndarray:
        tm = float(t) % self.h
        out = np.empty(self.spec.m)
        for i in range(self.spec.m):
            Ts = self.breaks[i]
            j = min(max(int(np.searchsorted(Ts, tm, side="right")) - 1, 0), len(Ts) - 2)
            out[i] = self.spec.patterns[i][j]
        return out


def constraint_set(spec: ScheduleSpec, model: LpvModel):
    """Linear constraints on the flattened decision vector c.

    Returns (A_in, b_in, A_eq, b_eq) with A_in c <= b_in and A_eq c = b_eq:
    breakpoint range bounds, segment nonnegativity, the period box on
    parameter 1, per-parameter closure and period-tying equalities.
    """
    N = spec.dim
    A_in, b_in, A_eq, b_eq = [], [], [], []
    offs = []
    k = 0
    for pat in spec.patterns:
        offs.append(k)
        k += len(pat) + 1

    for i, pat in enumerate(spec.patterns):
        R = len(pat)
        o = offs[i]
        # breakpoint values rho0 + sum_{j'<=j} c_j' r_j' within range, j = 0..R
        for j in range(R + 1):
            row = np.zeros(N)
            row[o] = 1.0
            row[o + 1 : o + 1 + j] = pat[:j]
            A_in.append(row.copy())
            b_in.append(model.range_hi[i])
            A_in.append(-row)
            b_in.append(-model.range_lo[i])
        # nonnegative lengths
        for j in range(R):
            row = np.zeros(N)
            row[o + 1 + j] = -1.0
            A_in.append(row)
            b_in.append(0.0)
        # closure
        row = np.zeros(N)
        row[o + 1 : o + 1 + R] = pat
        A_eq.append(row)
        b_eq.append(0.0)
        # common period with parameter 1
        if i > 0:
            row = np.zeros(N)
            row[offs[0] + 1 : offs[0] + 1 + len(spec.patterns[0])] = 1.0
            row[o + 1 : o + 1 + R] = -1.0
            A_eq.append(row)
            b_eq.append(0.0)

    # period box on parameter 1's total length
    row = np.zeros(N)
    row[offs[0] + 1 : offs[0] + 1 + len(spec.patterns[0])] = 1.0
    A_in.append(row.copy())
    b_in.append(spec.h_max)
    A_in.append(-row)
    b_in.append(-spec.h_min)

    return (np.array(A_in), np.array(b_in), np.array(A_eq), np.array(b_eq))


def check_feasible(spec: ScheduleSpec, model: LpvModel, c: np.ndarray, tol=FEAS_TOL):
    """List of violated-constraint descriptions (empty when feasible)."""
    violations = []
    parts = spec.split(c)
    h = None
    for i, (rho0, lens) in enumerate(parts):
        pat = spec.patterns[i]
        if np.any(lens < -tol):
            violations.append(f"negative segment length for parameter {i + 1}")
        close = float(np.dot(lens, pat))
        if abs(close) > CLOSURE_TOL * (1.0 + np.sum(np.abs(lens))):
            violations.append(f"closure violated for parameter {i + 1} ({close:.3g})")
        hi = float(np.sum(lens))
        if h is None:
            h = hi
        elif abs(hi - h) > 1e-9 * (1.0 + h):
            violations.append(f"period mismatch: parameter {i + 1} has {hi:.6g} != {h:.6g}")
        vals = rho0 + np.concatenate([[0.0], np.cumsum(lens * pat)])
        if np.any(vals < model.range_lo[i] - tol) or np.any(
            vals > model.range_hi[i] + tol
        ):
            violations.append(f"range bound violated at a breakpoint of parameter {i + 1}")
    if h is not None and not (spec.h_min - tol <= h <= spec.h_max + tol):
        violations.append(f"period {h:.6g} outside [{spec.h_min}, {spec.h_max}]")
    return violations


def trajectory(spec: ScheduleSpec, model: LpvModel, c: np.ndarray) -> Trajectory:
    """Validate c and build the trajectory callable (period = sum of lengths)."""
    c = np.asarray(c, float)
    violations = check_feasible(spec, model, c)
    if violations:
        raise InfeasibleDecision(violations)
    parts = spec.split(c)
    breaks, values = [], []
    h = float(np.sum(parts[0][1]))
    for i, (rho0, lens) in enumerate(parts):
        lens = np.clip(lens, 0.0, None)
        Ts = np.concatenate([[0.0], np.cumsum(lens)])
        Ts[-1] = h  # guard rounding so the last breakpoint is exactly h
        vals = rho0 + np.concatenate([[0.0], np.cumsum(lens * spec.patterns[i])])
        vals[-1] = vals[0]  # exact closure
        breaks.append(Ts)
        values.append(vals)
    return Trajectory(spec, c, h, tuple(breaks), tuple(values))


def constant_trajectory(spec: ScheduleSpec, model: LpvModel, rho0, h: float) -> Trajectory:
    """All-flat trajectory at the point rho0 (patterns ignored, rates zero)."""
    m = model.m
    flat = ScheduleSpec(tuple(np.zeros(1) for _ in range(m)), h, h)
    c = np.empty(2 * m)
    c[0::2] = np.asarray(rho0, float)
    c[1::2] = h
    return trajectory(flat, model, c)


def freeze(model: LpvModel, rho) -> ContinuousLti:
    """Evaluate all matrix entries at a constant parameter point."""
    rho = np.atleast_1d(np.asarray(rho, float))
    if np.any(rho < model.range_lo - 1e-12) or np.any(rho > model.range_hi + 1e-12):
        raise ValueError(f"rho {rho} outside the declared range")
    return ContinuousLti.make(model.A(rho), model.B(rho), model.C(rho), model.D(rho))


def default_grid(model: LpvModel, counts) -> np.ndarray:
    """Uniform tensor grid over the parameter box, shape (npoints, m)."""
    counts = np.atleast_1d(np.asarray(counts, int))
    if counts.size == 1 and model.m > 1:
        counts = np.repeat(counts, model.m)
    axes = [
        np.linspace(model.range_lo[i], model.range_hi[i], counts[i])
        for i in range(model.m)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([ax.ravel() for ax in mesh], axis=-1)


def frozen_lower_bound(model: LpvModel, grid, tol: float = 1e-6):
    """Max H-infinity norm over frozen grid points: (gamma_lb_frozen, argmax)."""
    grid = np.atleast_2d(np.asarray(grid, float))
    best, arg = 0.0, grid[0]
    for rho in grid:
        v = hinf_continuous(freeze(model, rho), tol)
        if v > best:
            best, arg = v, rho
    return best, arg


def evaluate_along(model: LpvModel, traj: Trajectory) -> PeriodicSystem:
    """Periodic system from composing the model entries with rho(t)."""
    return PeriodicSystem(
        A=lambda t: model.A(traj.rho(t)),
        B=lambda t: model.B(traj.rho(t)),
        C=lambda t: model.C(traj.rho(t)),
        D=lambda t: model.D(traj.rho(t)),
        h=traj.h, n=model.n, p=model.p, q=model.q,
    )
