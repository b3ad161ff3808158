"""Lower-bound maximization over the trajectory polytope.

The surrogate objective nu(c, gamma_bar) is the H-infinity norm of the
lifted discrete plant at level gamma_bar; nu < 1 iff the trajectory's PLTV
norm is below gamma_bar, so maximizing nu pushes toward worse trajectories
with a single Riccati pass per evaluation.  The search is a generalized
pattern search: coordinate directions projected onto the null space of the
equality constraints, extreme-barrier rejection of infeasible polls.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import lpv, pltv
from .errors import (
    FeedthroughTooLarge,
    InfeasibleDecision,
    InfeasibleStart,
    InvalidUpperBound,
    RiccatiEscape,
)
from .ltinorm import hinf_discrete, spectral_radius

ESCAPE_SENTINEL = 1e6  # finite stand-in for "gamma_bar below the norm"


@dataclass(frozen=True)
class OptOptions:
    mesh_init: float = 0.25  # fraction of the box diameter
    contraction: float = 0.5
    expansion: float = 2.0
    max_evals: int = 600
    stall_tol: float = 1e-5
    mesh_min_frac: float = 1e-6
    parallel: bool = False
    threads: int = 1
    restarts: int = 0  # extra mesh-reset rounds from the incumbent
    ode_rtol: float = 1e-7
    ode_atol: float = 1e-9
    norm_eps_rel: float = 1e-4

    def __post_init__(self):
        if not 0.0 < self.contraction < 1.0:
            raise ValueError("contraction must lie in (0, 1)")
        if self.expansion <= 1.0:
            raise ValueError("expansion must exceed 1")


@dataclass
class LowerBoundResult:
    gamma_lb: float
    bracket: pltv.NormBracket
    c_star: np.ndarray
    h_star: float
    trace: list = field(default_factory=list)  # (eval_count, best nu)
    termination: str = ""
    nu_evals: int = 0


def nu(
    model: lpv.LpvModel,
    spec: lpv.ScheduleSpec,
    c: np.ndarray,
    gamma_bar: float,
    rtol: float = 1e-7,
    atol: float = 1e-9,
) -> float:
    """Surrogate objective; ESCAPE_SENTINEL on Riccati escape or instability."""
    traj = lpv.trajectory(spec, model, c)
    sys = lpv.evaluate_along(model, traj)
    try:
        plant = pltv.lifted_plant(sys, gamma_bar, rtol, atol)
    except (RiccatiEscape, FeedthroughTooLarge):
        return ESCAPE_SENTINEL
    if plant.A.size and spectral_radius(plant.A) >= 1.0 - 1e-12:
        return ESCAPE_SENTINEL
    return hinf_discrete(plant.as_lti(), tol=1e-5)


def _poll_directions(A_eq: np.ndarray, dim: int) -> np.ndarray:
    """Positive spanning set: +-coordinate directions projected onto the
    equality null space (zero projections dropped, duplicates merged)."""
    if A_eq.size:
        N = sla.null_space(A_eq)
        P = N @ N.T
    else:
        P = np.eye(dim)
    dirs = []
    for i in range(dim):
        d = P[:, i]
        nrm = np.linalg.norm(d)
        if nrm < 1e-12:
            continue
        d = d / nrm
        if any(np.linalg.norm(d - e) < 1e-10 or np.linalg.norm(d + e) < 1e-10 for e in dirs):
            continue
        dirs.append(d)
    out = []
    for d in dirs:
        out.append(d)
        out.append(-d)
    return np.array(out)


def _sparse_directions(A_eq: np.ndarray, dim: int) -> np.ndarray:
    """Sparse null-space fallback directions.

    The projected coordinate directions are dense, so at a vertex of the
    feasible polytope (several inequality constraints active at once) every
    dense poll can be infeasible and the search stalls.  Sparse moves -- a
    single free coordinate, or a transfer between two coordinates whose
    equality columns match -- keep most coordinates untouched and remain
    feasible along active faces.
    """
    dirs = []
    if A_eq.size:
        cols = A_eq.T  # row i = column i of A_eq
        for i in range(dim):
            cand = None
            if np.linalg.norm(cols[i]) < 1e-12:
                cand = np.zeros(dim)
                cand[i] = 1.0
            if cand is not None and not any(
                np.linalg.norm(cand - e) < 1e-10 or np.linalg.norm(cand + e) < 1e-10
                for e in dirs
            ):
                dirs.append(cand)
        for i in range(dim):
            for j in range(i + 1, dim):
                cand = None
                if np.linalg.norm(cols[i] - cols[j]) < 1e-12:
                    cand = np.zeros(dim)
                    cand[i], cand[j] = 1.0, -1.0
                elif np.linalg.norm(cols[i] + cols[j]) < 1e-12:
                    cand = np.zeros(dim)
                    cand[i], cand[j] = 1.0, 1.0
                if cand is None:
                    continue
                cand = cand / np.linalg.norm(cand)
                if any(
                    np.linalg.norm(cand - e) < 1e-10 or np.linalg.norm(cand + e) < 1e-10
                    for e in dirs
                ):
                    continue
                dirs.append(cand)
    out = []
    for d in dirs:
        out.append(d)
        out.append(-d)
    return np.array(out)


def pattern_search(
    objective,
    constraints,
    c0: np.ndarray,
    opts: OptOptions = OptOptions(),
):
    """Maximize objective(c) over {A_in c <= b_in, A_eq c = b_eq} from c0.

    Returns (c_best, value_best, trace).  Poll points are evaluated in a
    fixed order and reduced deterministically (complete polling).
    """
    A_in, b_in, A_eq, b_eq = constraints
    c0 = np.asarray(c0, float)
    feas_tol = 1e-9

    def feasible(c):
        if A_in.size and np.any(A_in @ c - b_in > feas_tol * (1 + np.abs(b_in))):
            return False
        if A_eq.size and np.any(np.abs(A_eq @ c - b_eq) > 1e-8 * (1 + np.abs(b_eq))):
            return False
        return True

    if not feasible(c0):
        raise InfeasibleStart("initial decision vector violates the constraints")

    dirs = _poll_directions(A_eq, c0.size)
    sparse_dirs = _sparse_directions(A_eq, c0.size)
    # box diameter estimate from the inequality rows that bound single coords
    diam = _box_diameter(A_in, b_in)
    delta = opts.mesh_init * diam
    delta_min = opts.mesh_min_frac * diam
    delta_max = diam

    best_c = c0.copy()
    best_v = objective(best_c)
    evals = 1
    trace = [(evals, best_v)]
    recent_gain = np.inf

    while evals < opts.max_evals and delta > delta_min:
        cands = [best_c + delta * d for d in dirs]
        cands = [c for c in cands if feasible(c)]
        if not cands and sparse_dirs.size:
            # vertex stall: every dense poll violates an active inequality
            cands = [best_c + delta * d for d in sparse_dirs]
            cands = [c for c in cands if feasible(c)]
        cands = cands[: max(0, opts.max_evals - evals)]
        if opts.parallel and opts.threads > 1 and len(cands) > 1:
            # ordered reduction keeps the result independent of scheduling
            with ThreadPoolExecutor(max_workers=opts.threads) as pool:
                vals = list(pool.map(objective, cands))
        else:
            vals = [objective(c) for c in cands]
        evals += len(cands)
        if vals and max(vals) > best_v:
            k = int(np.argmax(vals))
            recent_gain = max(vals) - best_v
            best_c, best_v = cands[k], vals[k]
            delta = min(delta * opts.expansion, delta_max)
        else:
            delta *= opts.contraction
            recent_gain = 0.0
        trace.append((evals, best_v))
        if best_v >= ESCAPE_SENTINEL:
            break  # certificate found; caller decides what it means
        if delta < delta_min and recent_gain < opts.stall_tol:
            break
    return best_c, best_v, trace


def search_with_restarts(objective, constraints, c0, opts: OptOptions = OptOptions()):
    """Pattern search plus opts.restarts mesh-reset rounds from the incumbent.

    Resetting the mesh to its initial size lets a stalled search poll far
    from a local optimum again; rounds stop early once a reset brings no
    improvement beyond stall_tol.
    """
    c, v, trace = pattern_search(objective, constraints, c0, opts)
    offset = trace[-1][0]
    for _ in range(opts.restarts):
        if v >= ESCAPE_SENTINEL:
            break
        c2, v2, tr = pattern_search(objective, constraints, c, opts)
        trace.extend((k + offset, m) for k, m in tr)
        offset += tr[-1][0]
        if v2 <= v + opts.stall_tol:
            c, v = (c2, v2) if v2 > v else (c, v)
            break
        c, v = c2, v2
    return c, v, trace


def _box_diameter(A_in, b_in) -> float:
    """Range spanned by single-coordinate inequality rows (offset/length/period)."""
    if not A_in.size:
        return 1.0
    lo = {}
    hi = {}
    for row, b in zip(A_in, b_in):
        nz = np.nonzero(row)[0]
        if len(nz) != 1:
            continue
        j, a = nz[0], row[nz[0]]
        if a > 0:
            hi[j] = min(hi.get(j, np.inf), b / a)
        else:
            lo[j] = max(lo.get(j, -np.inf), b / a)
    widths = [
        hi[j] - lo[j] for j in set(lo) & set(hi)
        if np.isfinite(hi[j] - lo[j]) and hi[j] > lo[j]
    ]
    return float(np.sqrt(np.sum(np.square(widths)))) if widths else 1.0


def default_start(spec: lpv.ScheduleSpec, model: lpv.LpvModel) -> np.ndarray:
    """Feasible default: equal segment lengths fixed up for closure and
    rescaled to the middle of the period box; offsets center the breakpoint
    values inside the range."""
    h_target = 0.5 * (spec.h_min + spec.h_max)
    c = np.zeros(spec.dim)
    k = 0
    for i, pat in enumerate(spec.patterns):
        R = len(pat)
        lens = np.full(R, h_target / R)
        nz = pat != 0.0
        if np.any(nz):
            # least-norm closure correction restricted to rate-active segments
            s = float(np.dot(lens, pat))
            lens[nz] -= s * pat[nz] / float(np.dot(pat[nz], pat[nz]))
            lens = np.clip(lens, 0.0, None)
            # if clipping broke closure, rescale the heavier-signed side
            pos, neg = pat > 0, pat < 0
            up = float(np.dot(lens[pos], pat[pos]))
            dn = float(-np.dot(lens[neg], pat[neg]))
            if up > dn > 0:
                lens[pos] *= dn / up
            elif dn > up > 0:
                lens[neg] *= up / dn
            elif up != dn:  # one side fully clipped away: fall back to flat
                lens[nz] = 0.0
        if lens.sum() > 0:
            lens *= h_target / lens.sum()
        else:
            lens = np.full(R, h_target / R)
        peaks = np.concatenate([[0.0], np.cumsum(lens * pat)])
        mid = 0.5 * (model.range_lo[i] + model.range_hi[i])
        rho0 = mid - 0.5 * (peaks.max() + peaks.min())
        # if the swing exceeds the range width, shrink the active lengths
        width = model.range_hi[i] - model.range_lo[i]
        swing = peaks.max() - peaks.min()
        if swing > width and swing > 0:
            shrink = 0.95 * width / swing
            lens[nz] *= shrink
            lens[~nz] += (h_target - lens.sum()) / max((~nz).sum(), 1)
            peaks = np.concatenate([[0.0], np.cumsum(lens * pat)])
            rho0 = mid - 0.5 * (peaks.max() + peaks.min())
        rho0 = float(np.clip(rho0, model.range_lo[i], model.range_hi[i]))
        c[k] = rho0
        c[k + 1 : k + 1 + R] = lens
        k += R + 1
    return c


def _bisect_at(model, spec, c, opts: OptOptions, gamma_hint: float | None = None):
    traj = lpv.trajectory(spec, model, c)
    sys = lpv.evaluate_along(model, traj)
    hint = gamma_hint if gamma_hint is not None else 1.0
    return pltv.norm_bisect(
        sys, 0.25 * hint, hint,
        eps=None, rtol=opts.ode_rtol, atol=opts.ode_atol,
    ), traj


def algorithm_one(
    model: lpv.LpvModel,
    spec: lpv.ScheduleSpec,
    c0: np.ndarray | None = None,
    opts: OptOptions = OptOptions(),
    max_outer: int = 20,
) -> LowerBoundResult:
    """Alternate bisection and surrogate maximization until no improvement.

    Each outer round bisects the norm at the incumbent trajectory, then
    maximizes nu at the bisection's upper bound; sentinel hits (escape or
    instability) mean the bound improved, so a fresh bisection restarts the
    round.  Terminates on a round where nu stays below one (case-a).
    """
    spec.validate_against(model)
    constraints = lpv.constraint_set(spec, model)
    c = np.asarray(c0, float) if c0 is not None else default_start(spec, model)
    trace = []
    total_evals = 0
    termination = "outer-iteration-cap"
    bracket, traj = _bisect_at(model, spec, c, opts)

    for _ in range(max_outer):
        gamma_bar = max(bracket.upper, 1e-6)
        obj = lambda cc: nu(model, spec, cc, gamma_bar, opts.ode_rtol, opts.ode_atol)
        c_star, v_star, tr = search_with_restarts(obj, constraints, c, opts)
        total_evals += tr[-1][0]
        trace.extend(tr)
        if v_star >= ESCAPE_SENTINEL:  # case-c
            c = c_star
            bracket, traj = _bisect_at(model, spec, c, opts, 4.0 * gamma_bar)
            continue
        if v_star >= 1.0:  # case-b
            c = c_star
            bracket, traj = _bisect_at(model, spec, c, opts, gamma_bar / max(v_star, 1.0) * 2.0)
            continue
        # case-a: converged at c_star below gamma_bar
        c = c_star
        bracket, traj = _bisect_at(model, spec, c, opts, gamma_bar)
        termination = "case-a"
        break

    return LowerBoundResult(
        gamma_lb=bracket.lower, bracket=bracket, c_star=c, h_star=traj.h,
        trace=trace, termination=termination, nu_evals=total_evals,
    )


def algorithm_two(
    model: lpv.LpvModel,
    spec: lpv.ScheduleSpec,
    gamma_ub: float,
    c0: np.ndarray | None = None,
    opts: OptOptions = OptOptions(),
) -> LowerBoundResult:
    """Single surrogate maximization at a trusted upper bound, then one
    bisection at the optimizer.  Raises InvalidUpperBound when a Riccati
    escape contradicts gamma_ub >= ||G||."""
    if gamma_ub <= 0:
        raise ValueError("gamma_ub must be positive")
    spec.validate_against(model)
    constraints = lpv.constraint_set(spec, model)
    c = np.asarray(c0, float) if c0 is not None else default_start(spec, model)
    obj = lambda cc: nu(model, spec, cc, gamma_ub, opts.ode_rtol, opts.ode_atol)
    c_star, v_star, trace = search_with_restarts(obj, constraints, c, opts)
    if v_star >= ESCAPE_SENTINEL:
        raise InvalidUpperBound(
            gamma_ub, "Riccati escape/instability along a feasible trajectory"
        )
    bracket, traj = _bisect_at(model, spec, c_star, opts, gamma_ub)
    return LowerBoundResult(
        gamma_lb=bracket.lower, bracket=bracket, c_star=c_star, h_star=traj.h,
        trace=trace, termination="converged", nu_evals=trace[-1][0],
    )
