"""Regularized maximum-eigenvalue potential.

The potential of an aggregate A(x) is

    Phi(x) = max over density matrices M of <A(x), M> + (2/eta) tr(M^{1/2}),

whose unique optimizer is M = (u I - eta A(x))^{-2} with u the normalizer
making tr(M) = 1.  Given u, the closed form

    Phi(x) = (1/eta) tr((u I - eta A(x))^{-1}) + u / eta

is exact, and Phi sandwiches the maximum eigenvalue:
lambda_max(A(x)) <= Phi(x) <= lambda_max(A(x)) + 2 sqrt(n) / eta.

The normalizer is found by 60 bisection steps on the bracket
(eta lam_max + 1e-14 * scale, eta lam_max + sqrt(n)]: the trace residual is
monotone decreasing there, blows up at the left end and is <= 1 at the right
end, so convergence is unconditional and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import InvalidInput, StepTooLarge

BISECTION_STEPS = 60


def solve_normalizer_from_eigenvalues(eigs, eta):
    """Normalizer u with sum_i (u - eta lam_i)^{-2} = 1 for given eigenvalues."""
    eigs = np.asarray(eigs, dtype=float)
    n = eigs.size
    if n == 0:
        raise InvalidInput("cannot normalize over an empty spectrum")
    if not (eta > 0.0) or not np.isfinite(eta):
        raise InvalidInput("eta must be positive and finite")
    if not np.all(np.isfinite(eigs)):
        raise InvalidInput("non-finite eigenvalues")
    top = eta * float(np.max(eigs))
    scale = max(1.0, abs(top))
    lo = top + 1e-14 * scale
    hi = top + np.sqrt(n)

    def trace_residual(u):
        return float(np.sum((u - eta * eigs) ** -2))

    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if trace_residual(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_normalizer(a, eta):
    """Normalizer for the aggregate matrix `a` (symmetric)."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        raise InvalidInput("empty matrix")
    return solve_normalizer_from_eigenvalues(linalg.eigvalsh(a), eta)


@dataclass(frozen=True)
class PotentialContext:
    """Aggregate A(x) together with eta, the normalizer u and the optimizer M.

    Invariants: u > eta * lam_max(A), M = (uI - eta A)^{-2} is positive
    definite with unit trace.  eigenvalues/eigenvectors are those of A.
    """

    eta: float
    a_of_x: np.ndarray
    u: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def inv_gaps(self):
        """(u - eta lam_i)^{-1}, all positive; the eigenvalues of M^{1/2}."""
        return 1.0 / (self.u - self.eta * self.eigenvalues)

    @property
    def density(self):
        """The optimizer M."""
        d = self.inv_gaps
        v = self.eigenvectors
        return linalg.sym((v * d**2) @ v.T)

    @property
    def density_sqrt(self):
        d = self.inv_gaps
        v = self.eigenvectors
        return linalg.sym((v * d) @ v.T)


def density_optimizer(a, eta):
    """Build the potential context (u and M) for an aggregate matrix."""
    a = linalg.sym(np.asarray(a, dtype=float))
    w, v = linalg.eigh(a)
    u = solve_normalizer_from_eigenvalues(w, eta)
    return PotentialContext(eta=float(eta), a_of_x=a, u=u, eigenvalues=w, eigenvectors=v)


def potential_value(ctx):
    """Closed-form potential (1/eta)(sum_i (u - eta lam_i)^{-1} + u)."""
    return float((np.sum(ctx.inv_gaps) + ctx.u) / ctx.eta)


def potential_of(a, eta):
    return potential_value(density_optimizer(a, eta))


def verify_increase_bound(ctx, a_of_y, tol=1e-8):
    """Check the second-order potential increase bound for a step.

    Requires ||M^{1/2} eta A(y)||_op <= 1/2 (StepTooLarge otherwise).
    Returns (lhs, rhs, ok) with
      lhs = Phi(x + y) - Phi(x)
      rhs = tr(M A(y)) + 2 eta tr(M^{1/2} A(y) M^{1/2} A(y) M^{1/2})
      ok  = lhs <= rhs + tol.
    """
    a_of_y = linalg.sym(np.asarray(a_of_y, dtype=float))
    mh = ctx.density_sqrt
    step_norm = linalg.spectral_norm(mh @ (ctx.eta * a_of_y))
    if step_norm > 0.5 + 1e-12:
        raise StepTooLarge(
            f"||M^(1/2) eta A(y)||_op = {step_norm:.6f} exceeds 1/2"
        )
    lhs = potential_of(ctx.a_of_x + a_of_y, ctx.eta) - potential_value(ctx)

    linear = float(np.trace(ctx.density @ a_of_y))
    b = mh @ a_of_y
    quad = float(np.trace(b @ b @ mh))
    rhs = linear + 2.0 * ctx.eta * quad
    return lhs, rhs, lhs <= rhs + tol
