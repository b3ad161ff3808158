"""Periodic LTV systems and their induced L2 norm.

The norm of an h-periodic system is bracketed by bisection on gamma.  At
each gamma the system is "lifted" to a discrete LTI plant (A_g, B_g, C_g)
obtained from point solutions of three differential Riccati equations; the
norm is below gamma iff that plant is Schur stable with H-infinity norm
below one.  Finite escape of the Riccati solution certifies gamma is too
small.

Note: the Hamiltonian block H21 is assembled with the inverse,
H21 = gamma B (gamma^2 I - D^T D)^{-1} B^T; the inverse-free variant seen in
some sources breaks both J-symmetry of H and consistency with the Y Riccati
equation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import odeint
from .errors import BracketFailure, FeedthroughTooLarge, FiniteEscape, RiccatiEscape
from .ltinorm import DiscreteLti, hinf_discrete, spectral_radius, sweep_discrete
from .odeint import DenseSolution, OdeField, integrate

RANK_CUT = 1e-10  # relative eigenvalue cut when factoring Z(0), Y(h)
DEFAULT_EPS_REL = 1e-4  # default relative bisection tolerance


@dataclass(frozen=True)
class PeriodicSystem:
    """h-periodic state-space system with matrix-valued callables of t."""

    A: Callable[[float], np.ndarray]
    B: Callable[[float], np.ndarray]
    C: Callable[[float], np.ndarray]
    D: Callable[[float], np.ndarray]
    h: float
    n: int
    p: int
    q: int

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("period must be positive")

    @staticmethod
    def from_constant(A, B, C, D, h: float) -> "PeriodicSystem":
        A = np.atleast_2d(np.asarray(A, float))
        B = np.atleast_2d(np.asarray(B, float))
        C = np.atleast_2d(np.asarray(C, float))
        D = np.atleast_2d(np.asarray(D, float))
        return PeriodicSystem(
            lambda t: A, lambda t: B, lambda t: C, lambda t: D,
            h, A.shape[0], B.shape[1], C.shape[0],
        )

    def monodromy(self, rtol: float = 1e-9, atol: float = 1e-11) -> np.ndarray:
        """State transition matrix of the zero-input dynamics over one period."""
        fld = OdeField(lambda t, X: self.A(t) @ X, (self.n, self.n))
        sol = integrate(fld, np.eye(self.n), (0.0, self.h), rtol, atol)
        return sol.states[-1]

    def check_stability(self) -> float:
        """Spectral radius of the monodromy matrix; warns on marginal cases."""
        r = spectral_radius(self.monodromy())
        if r >= 1.0 - 1e-10:
            warnings.warn(
                f"periodic system not internally stable: monodromy spectral "
                f"radius {r:.8g}", stacklevel=2,
            )
        return r


@dataclass(frozen=True)
class HamiltonianField:
    """Blocks of the 2n-dim Hamiltonian system at level gamma, plus the
    similarity-transformed field Htilde = T^-1 H T with T = [[0, I], [g I, 0]]."""

    gamma: float
    sys: PeriodicSystem
    H: Callable[[float], np.ndarray]
    Htilde: Callable[[float], np.ndarray]
    blocks: Callable[[float], tuple]  # (H11, H12, H21, H22) at t


def _gamma_terms(sys: PeriodicSystem, gamma: float, t: float):
    """Common gamma-dependent terms at time t.

    Returns (A, B, C, D, Ri, Si) with Ri = (g^2 I - D^T D)^-1 and
    Si = (g^2 I - D D^T)^-1.
    """
    A, B, C, D = sys.A(t), sys.B(t), sys.C(t), sys.D(t)
    R = gamma**2 * np.eye(sys.p) - D.T @ D
    S = gamma**2 * np.eye(sys.q) - D @ D.T
    return A, B, C, D, np.linalg.inv(R), np.linalg.inv(S)


def build_hamiltonian(sys: PeriodicSystem, gamma: float, grid_points: int = 64) -> HamiltonianField:
    """Assemble the Hamiltonian field, checking g^2 I - D^T D > 0 on a grid."""
    for t in np.linspace(0.0, sys.h, grid_points):
        D = sys.D(t)
        w = np.linalg.eigvalsh(gamma**2 * np.eye(sys.p) - D.T @ D)
        if w[0] <= 0.0:
            raise FeedthroughTooLarge(gamma, float(t), float(w[0]))

    def blocks(t: float):
        A, B, C, D, Ri, Si = _gamma_terms(sys, gamma, t)
        H11 = -A.T - C.T @ D @ Ri @ B.T
        H12 = -gamma * C.T @ Si @ C
        H21 = gamma * B @ Ri @ B.T
        H22 = A + B @ Ri @ D.T @ C
        return H11, H12, H21, H22

    def H(t: float) -> np.ndarray:
        H11, H12, H21, H22 = blocks(t)
        return np.block([[H11, H12], [H21, H22]])

    n = sys.n
    g = gamma

    def Htilde(t: float) -> np.ndarray:
        # T = [[0, I], [g I, 0]], T^-1 = [[0, I/g], [I, 0]]
        H11, H12, H21, H22 = blocks(t)
        return np.block([[H22, H21 / g], [g * H12, H11]])

    return HamiltonianField(gamma, sys, H, Htilde, blocks)


@dataclass(frozen=True)
class DiscretePlant:
    """Real matrices of the gamma-parameterized lifted plant."""

    gamma: float
    A: np.ndarray  # n x n, equals X(h)
    B: np.ndarray  # n x p_eff, B B^T = Y(h)
    C: np.ndarray  # q_eff x n, C^T C = Z(0)
    Z0: np.ndarray = field(repr=False, default=None)
    Yh: np.ndarray = field(repr=False, default=None)

    def as_lti(self) -> DiscreteLti:
        q_eff, p_eff = self.C.shape[0], self.B.shape[1]
        return DiscreteLti(self.A, self.B, self.C, np.zeros((q_eff, p_eff)))


def _sym(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def _factor_gram(M: np.ndarray, transpose: bool) -> np.ndarray:
    """Factor a PSD matrix: returns F with F F^T = M (transpose=False, for
    B_g) or F^T F = M (transpose=True, for C_g), rank-cut at RANK_CUT."""
    w, V = np.linalg.eigh(_sym(M))
    w = np.clip(w, 0.0, None)
    if w.size == 0 or w[-1] <= 0.0:
        keep = np.zeros(0, dtype=int)
    else:
        keep = np.nonzero(w > RANK_CUT * w[-1])[0]
    F = V[:, keep] * np.sqrt(w[keep])
    return F.T if transpose else F


def lifted_plant(
    sys: PeriodicSystem,
    gamma: float,
    rtol: float = odeint.DEFAULT_RTOL,
    atol: float = odeint.DEFAULT_ATOL,
    escape_threshold: float = odeint.DEFAULT_ESCAPE,
) -> DiscretePlant:
    """Integrate the three Riccati equations and factor the plant matrices.

    Z is integrated backward from Z(h) = 0 and stored densely; X and Y are
    then integrated forward consuming interpolated Z.  Raises RiccatiEscape
    on finite escape (certificate that gamma <= ||G||) and
    FeedthroughTooLarge when gamma <= ||D||.
    """
    n, h = sys.n, sys.h
    build_hamiltonian(sys, gamma)  # runs the feedthrough precondition check

    def z_field(t: float, Z: np.ndarray) -> np.ndarray:
        A, B, C, D, Ri, Si = _gamma_terms(sys, gamma, t)
        H22 = A + B @ Ri @ D.T @ C
        W = gamma * B @ Ri @ B.T
        V = gamma * C.T @ Si @ C
        # sign of the constant term fixed by the monodromy identity
        # Z(0) = -Q11^-1 Q12 (e1 = Z e2 reduction of the Hamiltonian flow)
        return -H22.T @ Z - Z @ H22 - Z @ W @ Z - V

    try:
        z_sol = integrate(
            OdeField(z_field, (n, n)), np.zeros((n, n)), (h, 0.0),
            rtol, atol, escape_threshold,
        )
    except FiniteEscape as ex:
        raise RiccatiEscape(ex.t_escape, which="Z") from None

    def xy_field(t: float, XY: np.ndarray) -> np.ndarray:
        A, B, C, D, Ri, Si = _gamma_terms(sys, gamma, t)
        H22 = A + B @ Ri @ D.T @ C
        W = gamma * B @ Ri @ B.T
        V = gamma * C.T @ Si @ C
        X = XY[:n]
        Y = _sym(XY[n:])
        Z = _sym(z_sol.sample(t))
        dX = (H22 + W @ Z) @ X
        dY = H22 @ Y + Y @ H22.T + Y @ V @ Y + W
        return np.vstack([dX, dY])

    init = np.vstack([np.eye(n), np.zeros((n, n))])
    try:
        xy_sol = integrate(
            OdeField(xy_field, (2 * n, n)), init, (0.0, h),
            rtol, atol, escape_threshold,
        )
    except FiniteEscape as ex:
        raise RiccatiEscape(ex.t_escape, which="Y") from None

    Xh = xy_sol.states[-1][:n]
    Yh = _sym(xy_sol.states[-1][n:])
    Z0 = _sym(z_sol.states[-1])
    Bg = _factor_gram(Yh, transpose=False)
    Cg = _factor_gram(Z0, transpose=True)
    return DiscretePlant(gamma, Xh, Bg, Cg, Z0=Z0, Yh=Yh)


def escape_certificate(
    sys: PeriodicSystem,
    gamma: float,
    max_periods: int = 200,
    rtol: float = odeint.DEFAULT_RTOL,
    atol: float = odeint.DEFAULT_ATOL,
    escape_threshold: float = odeint.DEFAULT_ESCAPE,
) -> np.ndarray:
    """Continue the backward Riccati flow across periods until it escapes
    or converges.

    A single-period integration from Z(h) = 0 only certifies the norm of the
    one-period compression of the operator, so gamma values between that and
    the full induced norm stay bounded over one period.  Continuing the flow
    backward, period after period, extends the horizon: for gamma below the
    induced norm the solution escapes in finitely many periods (raising
    RiccatiEscape with the time-to-go at escape), while for gamma above it
    the iteration converges to the stabilizing periodic solution, which is
    returned as Z(0).
    """
    n, h = sys.n, sys.h
    build_hamiltonian(sys, gamma)  # runs the feedthrough precondition check

    def z_field(t: float, Z: np.ndarray) -> np.ndarray:
        A, B, C, D, Ri, Si = _gamma_terms(sys, gamma, t)
        H22 = A + B @ Ri @ D.T @ C
        W = gamma * B @ Ri @ B.T
        V = gamma * C.T @ Si @ C
        return -H22.T @ Z - Z @ H22 - Z @ W @ Z - V

    Z = np.zeros((n, n))
    for k in range(max_periods):
        try:
            sol = integrate(
                OdeField(z_field, (n, n)), Z, (h, 0.0),
                rtol, atol, escape_threshold,
            )
        except FiniteEscape as ex:
            raise RiccatiEscape(k * h + (h - ex.t_escape), which="Z") from None
        Z_new = _sym(sol.states[-1])
        if np.max(np.abs(Z_new - Z)) <= 1e-9 * (1.0 + np.max(np.abs(Z_new))):
            return Z_new
        Z = Z_new
    raise BracketFailure(
        f"Riccati continuation undecided after {max_periods} periods "
        f"at gamma = {gamma:.6g}"
    )


def norm_test(
    sys: PeriodicSystem,
    gamma: float,
    rtol: float = odeint.DEFAULT_RTOL,
    atol: float = odeint.DEFAULT_ATOL,
) -> bool:
    """True iff ||G|| < gamma (Below); False otherwise (NotBelow).

    Exact test on the lifted plant: Schur stability, sigma_max at z = 1
    below one, and no unit-circle eigenvalue of the symplectic pencil at
    level one; Riccati escape and feedthrough violations count as NotBelow.
    """
    try:
        plant = lifted_plant(sys, gamma, rtol, atol)
    except (RiccatiEscape, FeedthroughTooLarge):
        return False
    if plant.A.size and spectral_radius(plant.A) >= 1.0 - 1e-12:
        return False
    if plant.B.shape[1] == 0 or plant.C.shape[0] == 0:
        return True
    lti = plant.as_lti()
    dc = np.linalg.svd(
        lti.C @ np.linalg.solve(np.eye(sys.n) - lti.A, lti.B), compute_uv=False
    )[0]
    if dc >= 1.0:
        return False
    from .ltinorm import _pencil_has_unit_eig

    return not _pencil_has_unit_eig(lti.A, lti.B, lti.C, lti.D, 1.0)


@dataclass(frozen=True)
class NormBracket:
    lower: float
    upper: float
    eps: float
    iterations: int

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)


def norm_bisect(
    sys: PeriodicSystem,
    gamma_lo: float,
    gamma_hi: float,
    eps: float | None = None,
    rtol: float = odeint.DEFAULT_RTOL,
    atol: float = odeint.DEFAULT_ATOL,
) -> NormBracket:
    """Bisect gamma until the bracket width drops below eps.

    The caller's bracket is verified and auto-expanded (doubling/halving, up
    to 40 steps each way) when invalid.  eps defaults to 1e-4 * gamma_hi.
    """
    if gamma_lo <= 0 or gamma_hi <= gamma_lo:
        raise ValueError("need 0 < gamma_lo < gamma_hi")
    test = lambda g: norm_test(sys, g, rtol, atol)

    hi = gamma_hi
    for _ in range(40):
        if test(hi):
            break
        hi *= 2.0
    else:
        raise BracketFailure(f"no Below found up to gamma = {hi:.6g}")

    lo = min(gamma_lo, hi / 2.0)
    for _ in range(40):
        if not test(lo):
            break
        hi = lo  # tighten: lo already certifies Below
        lo /= 2.0
    else:
        # norm is numerically zero
        return NormBracket(0.0, lo, eps if eps is not None else 1e-4 * hi, 0)

    if eps is None:
        eps = DEFAULT_EPS_REL * hi
    iters = 0
    while hi - lo > eps:
        mid = 0.5 * (lo + hi)
        if test(mid):
            hi = mid
        else:
            lo = mid
        iters += 1
    return NormBracket(lo, hi, eps, iters)
