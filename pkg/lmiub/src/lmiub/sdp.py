"""Dissipation-inequality SDP for the gain upper bound.

A parameter-dependent storage matrix P(rho) = sum_k f_k(rho) P_k with a
user-declared scalar basis f_k certifies ||G|| <= gamma when, at every
grid point and every vertex of the rate box,

    [ A'P + PA + sum_i mu_i dP/drho_i + C'C   PB + C'D ]
    [ B'P + D'C                               D'D - g I ]  <= 0

with P(rho) >= eps I and g = gamma^2 minimized.  The rate enters linearly
through dP/drho, so checking the rate-box vertices is exact.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import cvxpy as cp
import numpy as np

from .model import Model

EPS_P = 1e-6


@dataclass(frozen=True)
class Basis:
    """Scalar basis terms, each a product of (possibly negative) powers.

    powers[k] is a length-m integer vector; term k is prod_i rho_i^powers[k][i].
    """

    powers: tuple  # tuple of tuples of ints

    @property
    def size(self) -> int:
        return len(self.powers)

    def value(self, k: int, rho: np.ndarray) -> float:
        return float(np.prod([r ** e for r, e in zip(rho, self.powers[k])]))

    def grad(self, k: int, rho: np.ndarray) -> np.ndarray:
        out = np.zeros(len(rho))
        for i, e in enumerate(self.powers[k]):
            if e == 0:
                continue
            rest = [
                r ** f for j, (r, f) in enumerate(zip(rho, self.powers[k]))
                if j != i
            ]
            out[i] = e * rho[i] ** (e - 1) * float(np.prod(rest))
        return out

    def validate_on(self, grid: np.ndarray):
        if np.any(np.isclose(grid, 0.0)) and any(
            e < 0 for pw in self.powers for e in pw
        ):
            bad = np.any(np.isclose(grid, 0.0), axis=0)
            for pw in self.powers:
                for i, e in enumerate(pw):
                    if e < 0 and bad[i]:
                        raise ValueError(
                            f"inverse power of parameter {i + 1} but the grid "
                            f"touches zero"
                        )


def basis_from_dict(data: dict, m: int) -> Basis:
    terms = data["terms"]
    powers = []
    for t in terms:
        pw = tuple(int(e) for e in t["powers"])
        if len(pw) != m:
            raise ValueError(f"basis term {t} has wrong arity (expected {m})")
        powers.append(pw)
    if not powers:
        raise ValueError("empty basis")
    return Basis(tuple(powers))


def load_basis(path: str, m: int) -> Basis:
    with open(path) as f:
        return basis_from_dict(json.load(f), m)


def default_grid(model: Model, counts) -> np.ndarray:
    counts = np.atleast_1d(np.asarray(counts, int))
    if counts.size == 1 and model.m > 1:
        counts = np.repeat(counts, model.m)
    axes = [
        np.linspace(model.range_lo[i], model.range_hi[i], counts[i])
        for i in range(model.m)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([ax.ravel() for ax in mesh], axis=-1)


def rate_vertices(model: Model) -> np.ndarray:
    corners = itertools.product(*[
        (model.rate_lo[i], model.rate_hi[i]) for i in range(model.m)
    ])
    return np.array(list(corners))


@dataclass(frozen=True)
class UpperBoundResult:
    gamma_ub: float
    solver_status: str
    grid_points: int


def upper_bound(model: Model, basis: Basis, grid: np.ndarray,
                solver: str | None = None, eps: float = EPS_P) -> UpperBoundResult:
    grid = np.atleast_2d(np.asarray(grid, float))
    basis.validate_on(grid)
    n, p, q = model.n, model.p, model.q
    P = [cp.Variable((n, n), symmetric=True) for _ in range(basis.size)]
    g = cp.Variable(nonneg=True)
    verts = rate_vertices(model)

    constraints = []
    for rho in grid:
        fvals = [basis.value(k, rho) for k in range(basis.size)]
        Prho = sum(fvals[k] * P[k] for k in range(basis.size))
        constraints.append(Prho >> eps * np.eye(n))
        A = model.A(rho)
        B = model.B(rho)
        C = model.C(rho)
        D = model.D(rho)
        grads = [basis.grad(k, rho) for k in range(basis.size)]
        for mu in verts:
            dP = sum(float(grads[k] @ mu) * P[k] for k in range(basis.size))
            M11 = A.T @ Prho + Prho @ A + dP + C.T @ C
            M12 = Prho @ B + C.T @ D
            M22 = D.T @ D - g * np.eye(p)
            M = cp.bmat([[M11, M12], [M12.T, M22]])
            constraints.append(M << 0)

    prob = cp.Problem(cp.Minimize(g), constraints)
    solvers = [solver] if solver else ["CLARABEL", "SCS"]
    status = "error"
    for s in solvers:
        try:
            prob.solve(solver=s)
        except cp.SolverError:
            continue
        status = prob.status
        if status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
            break
    if status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise RuntimeError(f"SDP failed: {status}")
    return UpperBoundResult(
        gamma_ub=float(np.sqrt(max(g.value, 0.0))),
        solver_status=str(status),
        grid_points=grid.shape[0],
    )
