"""Chebyshev-accelerated gossip.

Replacing a scaled gossip matrix L with the polynomial P_K(L), where
P_K(x) = 1 - T_K(c1*(1-x)) / T_K(c1) and T_K is the degree-K Chebyshev
polynomial, maximizes the effective eigengap reachable with K rounds of
neighbor communication. ``acc_gossip`` evaluates P_K(L) @ X with exactly K
matrix applications through the three-term recurrence; the plan carries the
contraction certificate delta = 2*c0**K / (1 + c0**(2K)) bounding
|P_K(lambda) - 1| over the nonzero spectrum.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidEigengap, ShapeError


@dataclass(frozen=True)
class ChebyshevPlan:
    """Round count and constants for one accelerated-gossip call."""

    K: int
    c0: float
    c1: float
    c2: float
    delta: float
    eta: float


def plan(eta, k_override=None):
    """Constants for K rounds of Chebyshev gossip at eigengap ``eta``.

    K defaults to ceil(1/sqrt(eta)). The complete-graph limit eta = 1 is
    degenerate (c1 diverges); by convention it collapses to a single exact
    averaging round: K = 1, c0 = 0, delta = 0, c2 = 1.
    """
    if not 0.0 < eta <= 1.0:
        raise InvalidEigengap(f"eigengap must be in (0, 1], got {eta}")
    if eta == 1.0:
        return ChebyshevPlan(K=1, c0=0.0, c1=math.inf, c2=1.0, delta=0.0, eta=eta)
    if k_override is not None:
        if k_override < 1:
            raise InvalidEigengap(f"round count must be >= 1, got {k_override}")
        k = int(k_override)
    else:
        k = math.ceil(1.0 / math.sqrt(eta))
    root = math.sqrt(eta)
    c0 = (1.0 - root) / (1.0 + root)
    c1 = (1.0 + eta) / (1.0 - eta)
    delta = 2.0 * c0**k / (1.0 + c0 ** (2 * k))
    c2 = 1.0 / (1.0 + delta)
    return ChebyshevPlan(K=k, c0=c0, c1=c1, c2=c2, delta=delta, eta=eta)


def acc_gossip(x, gossip, cheb):
    """K rounds of accelerated gossip: returns P_K(L) @ x.

    ``gossip`` must already be rescaled (nonzero spectrum centered on 1).
    Uses exactly K applications of the gossip matrix. Consensual inputs
    (all rows equal) map to zero since P_K(0) = 0.
    """
    x = np.asarray(x, dtype=float)
    lap = gossip.matrix
    if x.ndim != 2 or lap.shape[1] != x.shape[0]:
        raise ShapeError(f"cannot gossip {lap.shape} against stack {x.shape}")
    if cheb.K == 1:
        # P_1(t) = t regardless of c1, and the eta = 1 convention lands here
        return lap @ x
    a_prev, a_cur = 1.0, cheb.c1
    z_prev = x
    z_cur = cheb.c1 * (x - lap @ x)
    for _ in range(1, cheb.K):
        a_next = 2.0 * cheb.c1 * a_cur - a_prev
        z_next = 2.0 * cheb.c1 * (z_cur - lap @ z_cur) - z_prev
        a_prev, a_cur = a_cur, a_next
        z_prev, z_cur = z_cur, z_next
    return x - z_cur / a_cur


def polynomial_value(lam, cheb):
    """Scalar P_K evaluated by the same recurrence the gossip call uses."""
    if cheb.K == 1:
        return float(lam)
    a_prev, a_cur = 1.0, cheb.c1
    z_prev = 1.0
    z_cur = cheb.c1 * (1.0 - lam)
    for _ in range(1, cheb.K):
        a_next = 2.0 * cheb.c1 * a_cur - a_prev
        z_next = 2.0 * cheb.c1 * (1.0 - lam) * z_cur - z_prev
        a_prev, a_cur = a_cur, a_next
        z_prev, z_cur = z_cur, z_next
    return float(1.0 - z_cur / a_cur)


def contraction_certificate(gossip, cheb):
    """max over nonzero eigenvalues of |P_K(lambda) - 1|; at most plan.delta."""
    worst = 0.0
    for lam in gossip.eigen.values[1:]:
        worst = max(worst, abs(polynomial_value(float(lam), cheb) - 1.0))
    return worst
