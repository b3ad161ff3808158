"""Exception types shared across the toolbox."""


class LpvGainError(Exception):
    """Base class for all toolbox errors."""


class ExprParseError(LpvGainError):
    """Syntax error while parsing an expression string.

    Carries the byte offset of the offending character.
    """

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class ExprDomainError(LpvGainError):
    """Runtime domain error (negative sqrt argument, division by zero).

    Carries the pretty-printed offending sub-expression.
    """

    def __init__(self, message, subexpr):
        super().__init__(f"{message} in '{subexpr}'")
        self.subexpr = subexpr


class FiniteEscape(LpvGainError):
    """State max-norm crossed the escape threshold during integration."""

    def __init__(self, t_escape):
        super().__init__(f"finite escape detected near t = {t_escape:.6g}")
        self.t_escape = t_escape


class StepUnderflow(LpvGainError):
    """Adaptive step size fell below the representable floor."""


class OutOfSpan(LpvGainError):
    """Dense-output query outside the solved interval."""


class UnstableSystem(LpvGainError):
    """Norm computation requested for a system that is not (Schur/Hurwitz) stable."""


class FeedthroughTooLarge(LpvGainError):
    """gamma^2 I - D(t)^T D(t) lost positive definiteness at some sampled t."""

    def __init__(self, gamma, t, min_eig):
        super().__init__(
            f"gamma={gamma:.6g} too small: min eig(gamma^2 I - D^T D) = "
            f"{min_eig:.3g} at t = {t:.6g}"
        )
        self.gamma = gamma
        self.t = t
        self.min_eig = min_eig


class RiccatiEscape(LpvGainError):
    """Riccati solution escaped in finite time: certificate that gamma is too small."""

    def __init__(self, t_escape, which="Z"):
        super().__init__(f"Riccati solution {which} escaped near t = {t_escape:.6g}")
        self.t_escape = t_escape
        self.which = which


class BracketFailure(LpvGainError):
    """No valid bisection bracket found after expansion."""


class SingularAgamma(LpvGainError):
    """A_gamma too ill conditioned to reconstruct the monodromy matrix."""

    def __init__(self, cond):
        super().__init__(f"A_gamma condition number {cond:.3g} exceeds 1e12")
        self.cond = cond


class NoUnitEigenvalue(LpvGainError):
    """No monodromy eigenvalue close enough to the unit circle."""

    def __init__(self, closest_modulus):
        super().__init__(
            f"no unit-modulus eigenvalue; closest modulus {closest_modulus:.8g}"
        )
        self.closest_modulus = closest_modulus


class InfeasibleDecision(LpvGainError):
    """Decision vector violates the trajectory constraint polytope."""

    def __init__(self, violations):
        super().__init__("infeasible decision vector: " + "; ".join(violations))
        self.violations = violations


class InfeasibleStart(LpvGainError):
    """Pattern search started from an infeasible point."""


class InvalidUpperBound(LpvGainError):
    """Supplied gamma_ub was below the true norm (Riccati escape observed)."""

    def __init__(self, gamma_ub, evidence):
        super().__init__(f"gamma_ub = {gamma_ub:.6g} invalid: {evidence}")
        self.gamma_ub = gamma_ub
        self.evidence = evidence


class ConfigError(LpvGainError):
    """Run configuration failed validation."""
