import numpy as np
import pytest

from lpvgain.errors import NoUnitEigenvalue, SingularAgamma
from lpvgain.pltv import DiscretePlant, PeriodicSystem, lifted_plant, norm_bisect
from lpvgain.wcinput import (
    adjoint_residual,
    reconstruct_monodromy,
    symplectic_residual,
    synthesize,
    unit_eigenpair,
)


def _example_system(h=2.0):
    A0 = np.array([[-0.4, 1.0], [-1.2, -0.3]])
    A1 = np.array([[0.25, 0.0], [0.4, -0.15]])
    w0 = 2 * np.pi / h
    return PeriodicSystem(
        A=lambda t: A0 + np.cos(w0 * t) * A1,
        B=lambda t: np.array([[0.2], [1.0]]),
        C=lambda t: np.array([[1.0, 0.1]]),
        D=lambda t: np.array([[0.05]]),
        h=h, n=2, p=1, q=1,
    )


def test_monodromy_is_symplectic():
    sys = _example_system()
    g = norm_bisect(sys, 0.1, 5.0).upper * 1.05
    mp = reconstruct_monodromy(lifted_plant(sys, g))
    assert symplectic_residual(mp) < 1e-8


def test_no_unit_eigenvalue_above_norm():
    sys = _example_system()
    g = norm_bisect(sys, 0.1, 5.0).upper
    mp = reconstruct_monodromy(lifted_plant(sys, 2.0 * g))
    with pytest.raises(NoUnitEigenvalue):
        unit_eigenpair(mp)


def test_unit_eigenvalue_at_the_norm():
    sys = _example_system()
    br = norm_bisect(sys, 0.1, 5.0, eps=1e-6)
    mp = reconstruct_monodromy(lifted_plant(sys, br.lower))
    lam, v = unit_eigenpair(mp, unit_tol=1e-3)
    assert abs(abs(lam) - 1.0) < 1e-3
    assert abs(np.linalg.norm(v) - 1.0) < 1e-12


def test_singular_a_gamma_rejected():
    plant = DiscretePlant(
        gamma=1.0, A=np.array([[1.0, 0.0], [0.0, 1e-15]]),
        B=np.eye(2), C=np.eye(2), Z0=np.eye(2), Yh=np.eye(2),
    )
    with pytest.raises(SingularAgamma):
        reconstruct_monodromy(plant)


def test_synthesized_input_approaches_gamma():
    sys = _example_system()
    br = norm_bisect(sys, 0.1, 5.0, eps=1e-6)
    g = br.lower
    mp = reconstruct_monodromy(lifted_plant(sys, g))
    pair = unit_eigenpair(mp, unit_tol=1e-3)
    sig = synthesize(sys, g, pair, K=40)
    assert sig.w.dtype == float and sig.z.dtype == float
    assert sig.period_identity_residual < 1e-3
    assert sig.achieved_ratio >= 0.9 * g
    # the ratio can never exceed the norm
    assert sig.achieved_ratio <= br.upper * (1 + 1e-3)


def test_truncation_horizon_improves_ratio():
    sys = _example_system()
    g = norm_bisect(sys, 0.1, 5.0, eps=1e-6).lower
    mp = reconstruct_monodromy(lifted_plant(sys, g))
    pair = unit_eigenpair(mp, unit_tol=1e-3)
    r_short = synthesize(sys, g, pair, K=5).achieved_ratio
    r_long = synthesize(sys, g, pair, K=40).achieved_ratio
    assert r_long > r_short


def test_adjoint_identity_random_cases():
    rng = np.random.default_rng(12)
    for trial in range(6):
        n, p, q = 3, 2, 2
        h = 1.0
        A0 = rng.normal(size=(n, n))
        A1 = rng.normal(size=(n, n)) * 0.3
        B0 = rng.normal(size=(n, p))
        C0 = rng.normal(size=(q, n))
        D0 = rng.normal(size=(q, p)) * 0.1
        w0 = 2 * np.pi / h
        sys = PeriodicSystem(
            A=lambda t, A0=A0, A1=A1: A0 + np.sin(w0 * t) * A1,
            B=lambda t, B0=B0: B0, C=lambda t, C0=C0: C0,
            D=lambda t, D0=D0: D0, h=h, n=n, p=p, q=q,
        )
        N = 2001
        dt = h / (N - 1)
        t = np.arange(N) * dt
        w = np.stack([np.sin(3 * t + trial), np.cos(2 * t)], axis=1)
        zhat = np.stack([np.cos(t), np.sin(5 * t)], axis=1)
        r = adjoint_residual(sys, rng.normal(size=n), w,
                             rng.normal(size=n), zhat, dt)
        assert r < 1e-5
