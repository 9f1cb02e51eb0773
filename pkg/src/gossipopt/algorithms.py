"""Iterative schemes: primal-dual (plain, Nesterov-accelerated, and
Chebyshev-gossip-accelerated) plus the classic baselines (DGD, EXTRA,
gradient tracking).

Every stepper advances one outer iteration of a mutable state and returns a
StepReport with the resources consumed (gradient evaluations, gossip rounds)
and the iterate the convergence metrics should be evaluated on: the running
average for the plain scheme, the u-iterate for the accelerated schemes, and
the x-iterate for baselines.

Iteration convention for the primal-dual family: the state counter k is the
iterate superscript, starting at 1 after initialization; a run with horizon T
performs T-1 steps and ends at u^T, the iterate the certified bound of
``metrics.certified_upper_bound`` refers to.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .consensus import acc_gossip, polynomial_value
from .errors import InvalidParameter, ScheduleExhausted, StepSizeInfeasible
from .linalg import jacobi_eigen

FEASIBILITY_SLACK = 1e-12


@dataclass(frozen=True)
class StepReport:
    grad_evals: int
    comm_rounds: int
    iterate: np.ndarray


def theta_schedule(t):
    """Momentum schedule theta_1 = 1, 1/theta_k = (1 + sqrt(1 + 4/theta_{k-1}^2))/2.

    Returns an array with entry k = theta_k for k = 1..t+1 (index 0 unused);
    the extra entry covers steppers that look one index ahead. Satisfies
    1/(k+1) < theta_k <= 2/(k+1).
    """
    if t < 1:
        raise InvalidParameter(f"horizon must be >= 1, got {t}")
    thetas = np.empty(t + 2)
    thetas[0] = np.nan
    inv = 1.0
    thetas[1] = 1.0
    for k in range(2, t + 2):
        inv = (1.0 + math.sqrt(1.0 + 4.0 * inv * inv)) / 2.0
        thetas[k] = 1.0 / inv
    return thetas


def mixing_matrix(gossip):
    """W = I - L/lambda_max(L), the single-matrix consensus step baselines use."""
    m = gossip.m
    return np.eye(m) - gossip.matrix / gossip.lambda_max


def default_weight_pair(gossip):
    """A = I - L/lambda_max(L), B = L/lambda_max(L)."""
    b = gossip.matrix / gossip.lambda_max
    return np.eye(gossip.m) - b, b


def _spectrum_of(matrix):
    eig = jacobi_eigen((np.asarray(matrix) + np.asarray(matrix).T) / 2.0)
    return float(eig.values[1]), float(eig.values[-1])


def feasibility_margin(gamma, tau, lf, lambda_max_b, thetas=None, horizon=None):
    """min over k of (1 - gamma*Lf) - (gamma*tau/theta_k^2)*lambda_max(B).

    With a schedule, the minimum runs over k = 1..horizon-1; without one the
    constant-parameter condition (theta == 1) is evaluated.
    """
    base = 1.0 - gamma * lf
    if thetas is None:
        return base - gamma * tau * lambda_max_b
    upto = horizon - 1 if horizon is not None else len(thetas) - 1
    worst = math.inf
    for k in range(1, upto + 1):
        worst = min(worst, base - gamma * tau / (thetas[k] ** 2) * lambda_max_b)
    return worst


def _require_feasible(margin):
    if margin < -FEASIBILITY_SLACK:
        raise StepSizeInfeasible(
            "step-size condition (1 - gamma*Lf)*I - (gamma*tau/theta_k^2)*B >= 0 "
            f"violated: worst margin {margin:.3e}"
        )


# ---------------------------------------------------------------------------
# plain primal-dual
# ---------------------------------------------------------------------------


@dataclass
class PlainPrimalDualState:
    a: np.ndarray
    b: np.ndarray
    gamma: float
    tau: float
    lambda2_b: float
    lambda_max_b: float
    x: np.ndarray
    y: np.ndarray
    y_hat: np.ndarray
    k: int = 1
    x_sum: np.ndarray = None  # sum of x^t over t = 2..k

    def average(self):
        """Running average over iterates 2..k (the plain scheme's theorem object)."""
        if self.k < 2:
            return self.x.copy()
        return self.x_sum / (self.k - 1)


def init_plain(inst, a, b, nu, x1=None, gamma=None, tau=None):
    """Tuning gamma = nu/(nu*Lf + 1), tau = 1/(nu*lambda_max(B)); init
    y^1 = 0 and y_hat^1 = tau*B*x^1 (one gossip round, charged by the caller).
    Explicit gamma/tau override the tuning and are feasibility-checked."""
    if nu <= 0:
        raise InvalidParameter(f"nu must be positive, got {nu}")
    lambda2_b, lambda_max_b = _spectrum_of(b)
    gamma = nu / (nu * inst.lf + 1.0) if gamma is None else gamma
    tau = 1.0 / (nu * lambda_max_b) if tau is None else tau
    _require_feasible(feasibility_margin(gamma, tau, inst.lf, lambda_max_b))
    x = np.zeros((inst.m, inst.d)) if x1 is None else np.array(x1, dtype=float)
    y = np.zeros_like(x)
    return PlainPrimalDualState(
        a=np.asarray(a, dtype=float), b=np.asarray(b, dtype=float),
        gamma=gamma, tau=tau,
        lambda2_b=lambda2_b, lambda_max_b=lambda_max_b,
        x=x, y=y, y_hat=tau * (b @ x), x_sum=np.zeros_like(x),
    )


def plain_primal_dual_step(state, inst):
    """x+ = A(x - gamma*(grad f(x) + y_hat)); y+ = y + tau*B*x+;
    y_hat+ = y+ + (y+ - y)."""
    grad = inst.stack_gradient(state.x)
    x_new = state.a @ (state.x - state.gamma * (grad + state.y_hat))
    y_new = state.y + state.tau * (state.b @ x_new)
    state.y_hat = y_new + (y_new - state.y)
    state.x = x_new
    state.y = y_new
    state.k += 1
    state.x_sum = state.x_sum + x_new
    return StepReport(grad_evals=1, comm_rounds=2, iterate=state.average())


# ---------------------------------------------------------------------------
# Nesterov-accelerated primal-dual
# ---------------------------------------------------------------------------


@dataclass
class AcceleratedState:
    a: np.ndarray
    b: np.ndarray
    gamma: float
    tau: float
    lambda2_b: float
    lambda_max_b: float
    horizon: int
    thetas: np.ndarray
    alphas: np.ndarray   # indexed by k, 1..horizon
    sigmas: np.ndarray
    taus_k: np.ndarray
    betas: np.ndarray
    x: np.ndarray
    u: np.ndarray
    y: np.ndarray
    y_hat: np.ndarray
    k: int = 1


def _accel_schedule_arrays(thetas, tau, horizon):
    alphas = np.zeros(horizon + 1)
    sigmas = np.zeros(horizon + 1)
    taus_k = np.zeros(horizon + 1)
    betas = np.zeros(horizon + 1)
    for k in range(1, horizon + 1):
        sigmas[k] = 1.0 / thetas[k + 1]
        alphas[k] = thetas[k + 1] / thetas[k] - thetas[k + 1]
        taus_k[k] = tau / thetas[k]
        betas[k] = (tau / thetas[k + 1]) / (tau / thetas[k])
    return alphas, sigmas, taus_k, betas


def init_accelerated(inst, a, b, nu, horizon, x1=None, gamma=None, tau=None):
    """Tuning gamma = nu/(nu*Lf + T), tau = 1/(nu*T*lambda_max(B)) with the
    momentum schedule; init y^1 = 0, y_hat^1 = tau_1*B*x^1, u^1 = x^1."""
    if nu <= 0:
        raise InvalidParameter(f"nu must be positive, got {nu}")
    if horizon < 2:
        raise InvalidParameter(f"horizon must be >= 2, got {horizon}")
    lambda2_b, lambda_max_b = _spectrum_of(b)
    gamma = nu / (nu * inst.lf + horizon) if gamma is None else gamma
    tau = 1.0 / (nu * horizon * lambda_max_b) if tau is None else tau
    thetas = theta_schedule(horizon)
    _require_feasible(
        feasibility_margin(gamma, tau, inst.lf, lambda_max_b, thetas, horizon)
    )
    alphas, sigmas, taus_k, betas = _accel_schedule_arrays(thetas, tau, horizon)
    x = np.zeros((inst.m, inst.d)) if x1 is None else np.array(x1, dtype=float)
    y = np.zeros_like(x)
    return AcceleratedState(
        a=np.asarray(a, dtype=float), b=np.asarray(b, dtype=float),
        gamma=gamma, tau=tau,
        lambda2_b=lambda2_b, lambda_max_b=lambda_max_b,
        horizon=horizon, thetas=thetas,
        alphas=alphas, sigmas=sigmas, taus_k=taus_k, betas=betas,
        x=x, u=x.copy(), y=y, y_hat=taus_k[1] * (b @ x),
    )


def optra_n_step(state, inst):
    """One Nesterov-accelerated primal-dual iteration."""
    if state.k >= state.horizon:
        raise ScheduleExhausted(f"horizon {state.horizon} reached at k={state.k}")
    k = state.k
    grad = inst.stack_gradient(state.x)
    u_new = state.a @ (state.x - state.gamma * (grad + state.y_hat))
    x_new = u_new + state.alphas[k] * (u_new - state.u)
    x_hat = state.sigmas[k] * x_new + (1.0 - state.sigmas[k]) * u_new
    y_new = state.y + state.taus_k[k] * (state.b @ x_hat)
    state.y_hat = y_new + state.betas[k] * (y_new - state.y)
    state.u = u_new
    state.x = x_new
    state.y = y_new
    state.k += 1
    return StepReport(grad_evals=1, comm_rounds=2, iterate=state.u)


# ---------------------------------------------------------------------------
# Chebyshev-accelerated primal-dual
# ---------------------------------------------------------------------------


@dataclass
class ChebyshevAcceleratedState:
    gossip: object          # scaled GossipMatrix
    cheb: object            # ChebyshevPlan
    gamma: float
    tau: float
    lambda2_b: float        # spectrum of B = P_K(L)
    lambda_max_b: float
    horizon: int
    thetas: np.ndarray
    x: np.ndarray
    u: np.ndarray
    y: np.ndarray
    y_hat: np.ndarray
    k: int = 1


def init_chebyshev(inst, scaled_gossip, cheb, nu, horizon, x1=None,
                   gamma=None, tau=None):
    """Tuning tau = c2/(nu*T), gamma = nu/(nu*Lf + T); init
    y_hat^1 = tau_1 * AccGossip(x^1), u^1 = x^1 (K gossip rounds, charged by
    the caller as initialization cost)."""
    if nu <= 0:
        raise InvalidParameter(f"nu must be positive, got {nu}")
    if horizon < 2:
        raise InvalidParameter(f"horizon must be >= 2, got {horizon}")
    gamma = nu / (nu * inst.lf + horizon) if gamma is None else gamma
    tau = cheb.c2 / (nu * horizon) if tau is None else tau
    thetas = theta_schedule(horizon)
    poly_vals = [polynomial_value(float(lam), cheb) for lam in scaled_gossip.eigen.values[1:]]
    lambda2_b = min(poly_vals)
    lambda_max_b = max(poly_vals)
    _require_feasible(
        feasibility_margin(gamma, tau, inst.lf, lambda_max_b, thetas, horizon)
    )
    x = np.zeros((inst.m, inst.d)) if x1 is None else np.array(x1, dtype=float)
    y = np.zeros_like(x)
    return ChebyshevAcceleratedState(
        gossip=scaled_gossip, cheb=cheb, gamma=gamma, tau=tau,
        lambda2_b=lambda2_b, lambda_max_b=lambda_max_b,
        horizon=horizon, thetas=thetas,
        x=x, u=x.copy(), y=y,
        y_hat=(tau / thetas[1]) * acc_gossip(x, scaled_gossip, cheb),
    )


def optra_step(state, inst):
    """One Chebyshev-accelerated iteration (2K gossip rounds)."""
    if state.k >= state.horizon:
        raise ScheduleExhausted(f"horizon {state.horizon} reached at k={state.k}")
    k = state.k
    th, th_next = state.thetas[k], state.thetas[k + 1]
    grad = inst.stack_gradient(state.x)
    u_half = state.x - state.gamma * (grad + state.y_hat)
    u_new = u_half - state.cheb.c2 * acc_gossip(u_half, state.gossip, state.cheb)
    x_new = u_new + (th_next / th - th_next) * (u_new - state.u)
    x_hat = (1.0 / th_next) * x_new + (1.0 - 1.0 / th_next) * u_new
    y_new = state.y + (state.tau / th) * acc_gossip(x_hat, state.gossip, state.cheb)
    state.y_hat = y_new + (th / th_next) * (y_new - state.y)
    state.u = u_new
    state.x = x_new
    state.y = y_new
    state.k += 1
    return StepReport(grad_evals=1, comm_rounds=2 * state.cheb.K, iterate=state.u)


# ---------------------------------------------------------------------------
# baselines
# ---------------------------------------------------------------------------


@dataclass
class DgdState:
    w: np.ndarray
    gamma: float
    x: np.ndarray
    k: int = 0


def init_dgd(inst, w, gamma, x0=None):
    x = np.zeros((inst.m, inst.d)) if x0 is None else np.array(x0, dtype=float)
    return DgdState(w=np.asarray(w, dtype=float), gamma=gamma, x=x)


def dgd_step(state, inst):
    grad = inst.stack_gradient(state.x)
    state.x = state.w @ state.x - state.gamma * grad
    state.k += 1
    return StepReport(grad_evals=1, comm_rounds=1, iterate=state.x)


@dataclass
class ExtraState:
    w: np.ndarray
    gamma: float
    x: np.ndarray
    y: np.ndarray
    wx: np.ndarray  # cached W @ x, one gossip round per step
    k: int = 0


def init_extra(inst, w, gamma, x0=None):
    w = np.asarray(w, dtype=float)
    x = np.zeros((inst.m, inst.d)) if x0 is None else np.array(x0, dtype=float)
    return ExtraState(w=w, gamma=gamma, x=x, y=np.zeros_like(x), wx=w @ x)


def extra_step(state, inst):
    """x+ = W x - gamma*grad f(x) - y; y+ = y + (I - W) x+."""
    grad = inst.stack_gradient(state.x)
    x_new = state.wx - state.gamma * grad - state.y
    wx_new = state.w @ x_new
    state.y = state.y + x_new - wx_new
    state.x = x_new
    state.wx = wx_new
    state.k += 1
    return StepReport(grad_evals=1, comm_rounds=1, iterate=state.x)


@dataclass
class GradientTrackingState:
    w: np.ndarray
    gamma: float
    x: np.ndarray
    y: np.ndarray
    grad_prev: np.ndarray
    k: int = 0


def init_gradient_tracking(inst, w, gamma, x0=None):
    x = np.zeros((inst.m, inst.d)) if x0 is None else np.array(x0, dtype=float)
    grad = inst.stack_gradient(x)
    return GradientTrackingState(
        w=np.asarray(w, dtype=float), gamma=gamma, x=x, y=grad.copy(), grad_prev=grad
    )


def gradient_tracking_step(state, inst):
    """x+ = W x - gamma*y; y+ = W y + grad f(x+) - grad f(x)."""
    x_new = state.w @ state.x - state.gamma * state.y
    grad_new = inst.stack_gradient(x_new)
    state.y = state.w @ state.y + grad_new - state.grad_prev
    state.x = x_new
    state.grad_prev = grad_new
    state.k += 1
    return StepReport(grad_evals=1, comm_rounds=2, iterate=state.x)


_BASELINE_STEPS = {
    "dgd": dgd_step,
    "extra": extra_step,
    "gradient_tracking": gradient_tracking_step,
}


def baseline_step(kind, state, inst):
    try:
        fn = _BASELINE_STEPS[kind]
    except KeyError:
        raise InvalidParameter(f"unknown baseline {kind!r}") from None
    return fn(state, inst)
