"""H-infinity norms of LTI systems.

Continuous-time: Boyd-Balakrishnan style bisection with the imaginary-axis
Hamiltonian eigenvalue test.  Discrete-time: bisection with a unit-circle
generalized-eigenvalue test on the associated symplectic pencil.  A dense
frequency sweep seeds the bisection and serves as the independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import UnstableSystem

EIG_UNIT_TOL = 1e-8  # |lambda| - 1 tolerance for "on the unit circle"
EIG_IMAG_TOL = 1e-8  # Re(lambda) tolerance for "on the imaginary axis"
SWEEP_POINTS = 2048


def _as2d(M) -> np.ndarray:
    return np.atleast_2d(np.asarray(M, dtype=float))


@dataclass(frozen=True)
class DiscreteLti:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    @staticmethod
    def make(A, B, C, D) -> "DiscreteLti":
        A, B, C, D = _as2d(A), _as2d(B), _as2d(C), _as2d(D)
        _check_dims(A, B, C, D)
        return DiscreteLti(A, B, C, D)


@dataclass(frozen=True)
class ContinuousLti:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    @staticmethod
    def make(A, B, C, D) -> "ContinuousLti":
        A, B, C, D = _as2d(A), _as2d(B), _as2d(C), _as2d(D)
        _check_dims(A, B, C, D)
        return ContinuousLti(A, B, C, D)


def _check_dims(A, B, C, D):
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("A must be square")
    if B.shape[0] != n or C.shape[1] != n:
        raise ValueError("B/C dimensions inconsistent with A")
    if D.shape != (C.shape[0], B.shape[1]):
        raise ValueError("D dimensions inconsistent with B, C")


def _sweep_response(A, B, C, D, points):
    """Transfer matrix samples at given points z (or s) on the boundary curve."""
    n = A.shape[0]
    lam, V = np.linalg.eig(A)
    if n and np.linalg.cond(V) < 1e8:
        Ct = C.astype(complex) @ V
        Bt = np.linalg.solve(V, B.astype(complex))
        # G(p) = Ct diag(1/(p - lam)) Bt + D, vectorized over p
        denom = points[:, None] - lam[None, :]  # (N, n)
        core = np.einsum("qj,Nj,jp->Nqp", Ct, 1.0 / denom, Bt)
    else:
        # defective A: fall back to per-point solves
        core = np.stack(
            [C @ np.linalg.solve(p * np.eye(n) - A, B.astype(complex)) for p in points]
        )
    return core + D[None, :, :]


def _sweep_max(A, B, C, D, points):
    G = _sweep_response(A, B, C, D, points)
    sig = np.linalg.svd(G, compute_uv=False)[:, 0] if min(D.shape) else np.zeros(len(points))
    k = int(np.argmax(sig))
    return float(sig[k]), k


def sweep_discrete(sys: DiscreteLti, npoints: int = SWEEP_POINTS, refine: bool = True):
    """Dense unit-circle sweep of sigma_max; the oracle for hinf_discrete."""
    theta = np.linspace(0.0, np.pi, npoints)
    z = np.exp(1j * theta)
    best, k = _sweep_max(sys.A, sys.B, sys.C, sys.D, z)
    if refine and npoints > 2:
        lo = theta[max(k - 1, 0)]
        hi = theta[min(k + 1, npoints - 1)]
        for _ in range(3):
            tloc = np.linspace(lo, hi, 65)
            b2, k2 = _sweep_max(sys.A, sys.B, sys.C, sys.D, np.exp(1j * tloc))
            best = max(best, b2)
            lo, hi = tloc[max(k2 - 1, 0)], tloc[min(k2 + 1, 64)]
    return best


def sweep_continuous(sys: ContinuousLti, npoints: int = SWEEP_POINTS, refine: bool = True):
    """Dense imaginary-axis sweep of sigma_max; the oracle for hinf_continuous."""
    lam = np.linalg.eigvals(sys.A)
    wmax = 10.0 * max(1.0, float(np.max(np.abs(lam))))
    w = np.concatenate([[0.0], np.logspace(-4, np.log10(wmax), npoints - 1)])
    best, k = _sweep_max(sys.A, sys.B, sys.C, sys.D, 1j * w)
    if refine:
        lo = w[max(k - 1, 0)]
        hi = w[min(k + 1, npoints - 1)] if k + 1 < npoints else 2 * w[-1]
        for _ in range(3):
            wloc = np.linspace(lo, hi, 65)
            b2, k2 = _sweep_max(sys.A, sys.B, sys.C, sys.D, 1j * wloc)
            best = max(best, b2)
            lo, hi = wloc[max(k2 - 1, 0)], wloc[min(k2 + 1, 64)]
    return best


def _hamiltonian_has_imag_eig(A, B, C, D, gamma):
    """True iff gamma is a singular value of G(jw) for some w (gamma > smax(D))."""
    n = A.shape[0]
    R = gamma**2 * np.eye(B.shape[1]) - D.T @ D
    S = gamma**2 * np.eye(C.shape[0]) - D @ D.T
    Ri = np.linalg.inv(R)
    Si = np.linalg.inv(S)
    Ahat = A + B @ Ri @ D.T @ C
    W = gamma * B @ Ri @ B.T
    V = gamma * C.T @ Si @ C
    H = np.block([[Ahat, W], [-V, -Ahat.T]])
    lam = np.linalg.eigvals(H)
    return bool(np.any(np.abs(lam.real) < EIG_IMAG_TOL * (1.0 + np.abs(lam))))


def _pencil_has_unit_eig(A, B, C, D, gamma):
    """True iff gamma is a singular value of G(e^{j theta}) for some theta.

    Symplectic pencil L - z M with
      L = [[Ahat, W], [0, I]],  M = [[I, 0], [V, Ahat^T]]
    where Ahat = A + B R^-1 D^T C, W = gamma B R^-1 B^T, V = gamma C^T S^-1 C.
    """
    n = A.shape[0]
    R = gamma**2 * np.eye(B.shape[1]) - D.T @ D
    S = gamma**2 * np.eye(C.shape[0]) - D @ D.T
    Ri = np.linalg.inv(R)
    Si = np.linalg.inv(S)
    Ahat = A + B @ Ri @ D.T @ C
    W = gamma * B @ Ri @ B.T
    V = gamma * C.T @ Si @ C
    Zn = np.zeros((n, n))
    In = np.eye(n)
    L = np.block([[Ahat, W], [Zn, In]])
    M = np.block([[In, Zn], [V, Ahat.T]])
    lam = sla.eigvals(L, M)
    lam = lam[np.isfinite(lam)]
    return bool(np.any(np.abs(np.abs(lam) - 1.0) < EIG_UNIT_TOL))


def spectral_radius(A) -> float:
    A = _as2d(A)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def _bisect(has_level, seed, dmax, tol):
    """Bisect the level test upward from the sweep seed."""
    lo = max(seed, dmax)
    hi = max(2.0 * lo, lo + 1.0)
    for _ in range(60):
        if not has_level(hi):
            break
        lo = hi
        hi *= 2.0
    else:
        raise RuntimeError("norm bracket expansion failed")
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if has_level(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def hinf_discrete(sys: DiscreteLti, tol: float = 1e-6) -> float:
    """H-infinity norm of a Schur-stable discrete-time system (relative tol)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if sys.B.shape[1] == 0 or sys.C.shape[0] == 0:
        return 0.0
    if sys.A.size and spectral_radius(sys.A) >= 1.0 - 1e-10:
        raise UnstableSystem(f"spectral radius {spectral_radius(sys.A):.8g} >= 1")
    seed = sweep_discrete(sys)
    dmax = float(np.linalg.svd(sys.D, compute_uv=False)[0]) if min(sys.D.shape) else 0.0
    if seed <= 0.0:
        return 0.0
    test = lambda g: _pencil_has_unit_eig(sys.A, sys.B, sys.C, sys.D, g)
    return _bisect(test, seed * (1.0 - 1e-12), dmax * (1 + 1e-12), tol)


def hinf_continuous(sys: ContinuousLti, tol: float = 1e-6) -> float:
    """H-infinity norm of a Hurwitz-stable continuous-time system (relative tol)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if sys.B.shape[1] == 0 or sys.C.shape[0] == 0:
        return 0.0
    lam = np.linalg.eigvals(sys.A)
    if sys.A.size and np.max(lam.real) >= -1e-12:
        raise UnstableSystem(f"max Re eig(A) = {np.max(lam.real):.8g} >= 0")
    seed = sweep_continuous(sys)
    dmax = float(np.linalg.svd(sys.D, compute_uv=False)[0]) if min(sys.D.shape) else 0.0
    if seed <= 0.0:
        return 0.0
    test = lambda g: _hamiltonian_has_imag_eig(sys.A, sys.B, sys.C, sys.D, g)
    return _bisect(test, seed * (1.0 - 1e-12), dmax * (1 + 1e-12), tol)
