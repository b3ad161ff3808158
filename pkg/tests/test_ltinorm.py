import numpy as np
import pytest

from lpvgain.errors import UnstableSystem
from lpvgain.ltinorm import (
    ContinuousLti,
    DiscreteLti,
    hinf_continuous,
    hinf_discrete,
    sweep_continuous,
    sweep_discrete,
)

# peak of 1/(s^2 + 0.1 s + 1), from a 200001-point sweep near resonance
RESONANT_PEAK = 10.012523486399932


def first_order():
    return ContinuousLti.make([[-1.0]], [[1.0]], [[1.0]], [[0.0]])


def test_first_order_norm_is_one():
    assert abs(hinf_continuous(first_order(), tol=1e-8) - 1.0) < 1e-7


def test_resonant_second_order():
    sys = ContinuousLti.make(
        [[0.0, 1.0], [-1.0, -0.1]], [[0.0], [1.0]], [[1.0, 0.0]], [[0.0]]
    )
    assert abs(hinf_continuous(sys, tol=1e-8) - RESONANT_PEAK) < 1e-5


def test_discrete_first_order():
    # sup_w |1/(e^{jw} - 0.5)| = 1/(1 - 0.5) = 2 at w = pi
    sys = DiscreteLti.make([[0.5]], [[1.0]], [[1.0]], [[0.0]])
    assert abs(hinf_discrete(sys, tol=1e-9) - 2.0) < 1e-7


def test_feedthrough_adds_to_norm():
    sys = ContinuousLti.make([[-1.0]], [[1.0]], [[1.0]], [[2.0]])
    # |2 + 1/(jw+1)| peaks at w = 0
    assert abs(hinf_continuous(sys, tol=1e-8) - 3.0) < 1e-6


def test_empty_input_norm_zero():
    sys = ContinuousLti.make(np.array([[-1.0]]), np.zeros((1, 0)),
                             np.array([[1.0]]), np.zeros((1, 0)))
    assert hinf_continuous(sys) == 0.0


def test_unstable_raises():
    with pytest.raises(UnstableSystem):
        hinf_continuous(ContinuousLti.make([[1.0]], [[1.0]], [[1.0]], [[0.0]]))
    with pytest.raises(UnstableSystem):
        hinf_discrete(DiscreteLti.make([[1.5]], [[1.0]], [[1.0]], [[0.0]]))


def test_output_scaling():
    A = np.array([[0.0, 1.0], [-2.0, -0.4]])
    B = np.array([[0.0], [1.0]])
    C = np.array([[1.0, 0.3]])
    D = np.array([[0.0]])
    g1 = hinf_continuous(ContinuousLti.make(A, B, C, D), tol=1e-9)
    g5 = hinf_continuous(ContinuousLti.make(A, B, 5.0 * C, D), tol=1e-9)
    assert abs(g5 - 5.0 * g1) < 1e-6 * g5


def _random_stable_continuous(rng, n, p, q):
    A = rng.normal(size=(n, n))
    A = A - (np.max(np.real(np.linalg.eigvals(A))) + 0.2 + rng.uniform(0, 1)) * np.eye(n)
    return ContinuousLti.make(A, rng.normal(size=(n, p)),
                              rng.normal(size=(q, n)), rng.normal(size=(q, p)))


def _random_stable_discrete(rng, n, p, q):
    A = rng.normal(size=(n, n))
    A = A * (rng.uniform(0.2, 0.95) / max(np.max(np.abs(np.linalg.eigvals(A))), 1e-9))
    return DiscreteLti.make(A, rng.normal(size=(n, p)),
                            rng.normal(size=(q, n)), rng.normal(size=(q, p)))


def test_bisection_matches_sweep_continuous():
    rng = np.random.default_rng(7)
    for _ in range(15):
        n = rng.integers(1, 6)
        sys = _random_stable_continuous(rng, n, 2, 2)
        g = hinf_continuous(sys, tol=1e-7)
        s = sweep_continuous(sys)
        assert s <= g * (1 + 1e-6)
        assert g - s < 0.02 * g + 1e-6  # sweep can only undershoot slightly


def test_bisection_matches_sweep_discrete():
    rng = np.random.default_rng(11)
    for _ in range(15):
        n = rng.integers(1, 6)
        sys = _random_stable_discrete(rng, n, 2, 2)
        g = hinf_discrete(sys, tol=1e-7)
        s = sweep_discrete(sys)
        assert s <= g * (1 + 1e-6)
        assert g - s < 0.02 * g + 1e-6
