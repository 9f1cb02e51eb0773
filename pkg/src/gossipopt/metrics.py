"""Convergence measures over agent stacks.

The headline metric is the Bregman distance of the stacked objective at the
reference optimum,

    G(x) = f(x) - f(x*) - <grad f(x*), x - x*>,

which is nonnegative, zero at every consensual optimum, and independent of
which optimum anchors it. The function-error metric (worst agent's full
objective gap) and the mean-centered consensus error complement it, and
``certified_upper_bound`` evaluates the run-time certificate that the
Nesterov-accelerated scheme must satisfy at its final iterate.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidParameter
from .linalg import frobenius_inner, frobenius_norm


@dataclass(frozen=True)
class MetricSnapshot:
    bregman: float
    fem: float
    consensus_err: float
    lagrangian_gap: Optional[float] = None
    certified_ub: Optional[float] = None


def bregman(stack, ref, inst):
    """G(x) against the reference optimum; >= 0 up to roundoff."""
    stack = np.asarray(stack, dtype=float)
    total = 0.0
    for i in range(inst.m):
        diff = stack[i] - ref.x_star
        total += (
            inst.local_value(i, stack[i])
            - inst.local_value(i, ref.x_star)
            - float(ref.grad_at_star[i] @ diff)
        )
    return total


def fem(stack, ref, inst):
    """max over agents of F(x_i) - F(x*), the traditional function error."""
    stack = np.asarray(stack, dtype=float)
    return max(inst.total_value(stack[i]) - ref.f_star for i in range(inst.m))


def consensus_error(stack):
    """Frobenius norm of the stack after removing the row mean."""
    stack = np.asarray(stack, dtype=float)
    return frobenius_norm(stack - stack.mean(axis=0, keepdims=True))


def project_dual(y):
    """Project onto the dual-feasible space (column sums zero)."""
    y = np.asarray(y, dtype=float)
    return y - y.mean(axis=0, keepdims=True)


def lagrangian(stack, y, inst, tol=1e-8):
    """Phi(x, y) = f(x) + <y, x> with y required (numerically) dual feasible.

    Rather than returning +inf outside the feasible space, y is projected and
    the projection residual must stay below ``tol`` relative to |y|.
    """
    y = np.asarray(y, dtype=float)
    y_proj = project_dual(y)
    residual = frobenius_norm(y - y_proj)
    if residual > tol * (1.0 + frobenius_norm(y)):
        raise InvalidParameter(
            f"dual variable is not in the feasible space (residual {residual:.3e})"
        )
    return inst.stack_value(stack) + frobenius_inner(y_proj, stack)


def certified_upper_bound(t, gamma, tau, rx, lambda2_b, y_star_norm2):
    """Run-time certificate (1/T^2) * (2*Rx/gamma + 2*|y*|^2/(tau*lambda2(B))).

    Valid for the Nesterov-accelerated scheme whenever the step-size
    feasibility condition held for every k <= T-1; the measured G(u^T) must
    not exceed it.
    """
    if t < 2:
        raise InvalidParameter(f"horizon must be >= 2, got {t}")
    if gamma <= 0 or tau <= 0:
        raise InvalidParameter("gamma and tau must be positive")
    if lambda2_b <= 0:
        raise InvalidParameter("lambda2(B) must be positive")
    return (2.0 * rx / gamma + 2.0 * y_star_norm2 / (tau * lambda2_b)) / (t * t)


def lower_bound_curve(t, lf, r, grad_norm_star, eta, tau_c, pairs=1):
    """Worst-case reference curve for the generated hard instances.

    ``q = t / (1 + ceil(1/(5*sqrt(eta))) * tau_c)`` converts elapsed time into
    an effective iteration count. The returned value is the explicit
    hard-family constant pairs*lf/(32*(q+1)) capped by the generic two-term
    decay shape lf*r^2/(q+2)^2 + r*|grad*|/(q+2); for the instances this
    module generates the explicit branch is the binding one. Reference plot
    only, not a bound for arbitrary instances.
    """
    if t < 0:
        raise InvalidParameter(f"time must be nonnegative, got {t}")
    if not 0.0 < eta <= 1.0:
        raise InvalidParameter(f"eigengap must be in (0, 1], got {eta}")
    rounds = math.ceil(1.0 / (5.0 * math.sqrt(eta)))
    q = t / (1.0 + rounds * tau_c)
    explicit = pairs * lf / (32.0 * (q + 1.0))
    general = lf * r * r / ((q + 2.0) ** 2) + r * grad_norm_star / (q + 2.0)
    return min(explicit, general)


def snapshot(stack, ref, inst, certified_ub=None):
    return MetricSnapshot(
        bregman=bregman(stack, ref, inst),
        fem=fem(stack, ref, inst),
        consensus_err=consensus_error(stack),
        certified_ub=certified_ub,
    )
