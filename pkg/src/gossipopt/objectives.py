"""Per-agent smooth convex objectives, synthetic data, and reference solves.

Three oracle families cover everything the harness runs:

* least squares, f_i(x) = ||A_i x - b_i||^2, smoothness 2*lmax(A_i^T A_i);
* logistic loss, f_i(x) = sum_j log(1 + exp(-y_j u_j^T x)), smoothness
  (1/4)*lmax(U_i^T U_i);
* quadratics f_i(x) = x^T Q_i x / 2 + c_i^T x, which realize the worst-case
  split instances (and the zero objective as a degenerate case).

The worst-case family splits a chain-coupled quadratic between two agent
groups so that no agent can extend the support of its iterate without
communicating; closed-form optima ship with the instance.
"""

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionTooSmall,
    InvalidParameter,
    LabelError,
    ParseError,
    ReferenceSolveFailed,
    ShapeError,
)
from .linalg import jacobi_eigen
from .rng import Rng

HARD_ZETA_DEFAULT = 1.0 / 32.0
_NEWTON_MAX_ITERS = 500
_NEWTON_GRAD_TOL = 1e-10


def _gram_lmax(a):
    """Largest eigenvalue of A^T A via the smaller of the two Gram matrices."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 0.0
    gram = a @ a.T if a.shape[0] <= a.shape[1] else a.T @ a
    gram = (gram + gram.T) / 2.0
    return float(jacobi_eigen(gram).values[-1])


class LeastSquaresOracle:
    def __init__(self, a, b):
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.smoothness = 2.0 * _gram_lmax(self.a)

    def value(self, x):
        r = self.a @ x - self.b
        return float(r @ r)

    def gradient(self, x):
        return 2.0 * (self.a.T @ (self.a @ x - self.b))


def _sigmoid(t):
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


class LogisticOracle:
    def __init__(self, u, y):
        self.u = np.asarray(u, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.smoothness = 0.25 * _gram_lmax(self.u)

    def _margins(self, x):
        return -self.y * (self.u @ x)

    def value(self, x):
        t = self._margins(x)
        # log(1 + exp(t)) computed stably for both signs of t
        return float(np.sum(np.maximum(t, 0.0) + np.log1p(np.exp(-np.abs(t)))))

    def gradient(self, x):
        sig = _sigmoid(self._margins(x))
        return self.u.T @ (-self.y * sig)

    def hessian(self, x):
        sig = _sigmoid(self._margins(x))
        w = sig * (1.0 - sig)
        return (self.u * w[:, None]).T @ self.u


class QuadraticOracle:
    def __init__(self, q, c):
        self.q = np.asarray(q, dtype=float)
        self.c = np.asarray(c, dtype=float)
        self.smoothness = float(jacobi_eigen((self.q + self.q.T) / 2.0).values[-1]) if self.q.size else 0.0

    def value(self, x):
        return float(0.5 * x @ (self.q @ x) + self.c @ x)

    def gradient(self, x):
        return self.q @ x + self.c


@dataclass(frozen=True)
class ReferenceSolution:
    """Centralized optimum with the optimality data the metrics need."""

    x_star: np.ndarray      # (d,) consensus optimum
    f_star: float           # sum of all agents' costs at x_star
    grad_at_star: np.ndarray  # (m, d), row i = grad f_i(x_star)

    @property
    def y_star(self):
        return -self.grad_at_star

    def stack(self, m):
        return np.tile(self.x_star, (m, 1))


class ObjectiveInstance:
    """m per-agent oracles sharing a d-dimensional variable."""

    def __init__(self, kind, oracles, d, lf=None, reference=None, meta=None):
        self.kind = kind
        self.oracles = list(oracles)
        self.m = len(self.oracles)
        self.d = d
        self.lf = float(lf) if lf is not None else max(o.smoothness for o in self.oracles)
        self.reference = reference
        self.meta = dict(meta or {})

    def local_value(self, i, x):
        return self.oracles[i].value(np.asarray(x, dtype=float))

    def local_gradient(self, i, x):
        return self.oracles[i].gradient(np.asarray(x, dtype=float))

    def stack_value(self, stack):
        self._check_stack(stack)
        return sum(self.local_value(i, stack[i]) for i in range(self.m))

    def stack_gradient(self, stack):
        self._check_stack(stack)
        return np.stack([self.local_gradient(i, stack[i]) for i in range(self.m)])

    def total_value(self, x):
        """Full objective F(x) = sum_i f_i(x) at a single point."""
        x = np.asarray(x, dtype=float)
        return sum(o.value(x) for o in self.oracles)

    def total_gradient(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(self.d)
        for o in self.oracles:
            out += o.gradient(x)
        return out

    def _check_stack(self, stack):
        stack = np.asarray(stack)
        if stack.shape != (self.m, self.d):
            raise ShapeError(f"expected stack shape {(self.m, self.d)}, got {stack.shape}")

    def fingerprint(self):
        """Stable hash of the instance payload, for trace provenance."""
        h = hashlib.sha256()
        h.update(f"{self.kind}:{self.m}:{self.d}".encode())
        for o in self.oracles:
            if isinstance(o, LeastSquaresOracle):
                h.update(o.a.tobytes())
                h.update(o.b.tobytes())
            elif isinstance(o, LogisticOracle):
                h.update(o.u.tobytes())
                h.update(o.y.tobytes())
            else:
                h.update(o.q.tobytes())
                h.update(o.c.tobytes())
        return h.hexdigest()


def generate_least_squares(m, r, d, omega, noise_sd, seed):
    """Synthetic regression rows with AR(1)-correlated columns.

    Z is iid standard normal; column 1 of A is Z_1/sqrt(1 - omega^2) and
    column i is omega*A_{i-1} + Z_i, so rows are Gaussian with identity
    covariance at omega = 0 and increasingly ill-conditioned covariance as
    omega -> 1. Targets are b = A x0 + noise with x0 iid standard normal.
    Rows split evenly across agents in order.
    """
    if not 0.0 <= omega < 1.0:
        raise InvalidParameter(f"omega must be in [0, 1), got {omega}")
    if r < 1 or d < 1 or m < 1:
        raise InvalidParameter("m, r, d must all be >= 1")
    rng = Rng(seed)
    n = m * r
    z = np.array(rng.normals(n * d)).reshape(n, d)
    a = np.empty((n, d))
    a[:, 0] = z[:, 0] / math.sqrt(1.0 - omega * omega)
    for i in range(1, d):
        a[:, i] = omega * a[:, i - 1] + z[:, i]
    x0 = np.array(rng.normals(d))
    noise = noise_sd * np.array(rng.normals(n))
    b = a @ x0 + noise
    oracles = [LeastSquaresOracle(a[i * r:(i + 1) * r], b[i * r:(i + 1) * r]) for i in range(m)]
    lf = max(o.smoothness for o in oracles)
    return ObjectiveInstance(
        kind="least_squares",
        oracles=oracles,
        d=d,
        lf=lf,
        meta={"m": m, "r": r, "omega": omega, "noise_sd": noise_sd, "seed": seed},
    )


def hard_split_matrices(k, d):
    """The two coupling patterns of the worst-case quadratic, truncated to
    their leading k x k principal minor.

    Pattern one has a lone 1 at (0, 0) and [[1,-1],[-1,1]] blocks on index
    pairs (1,2), (3,4), ...; pattern two has the blocks on (0,1), (2,3), ....
    Their sum restricted to the consensus line is the classic chain quadratic
    x_1^2 + sum (x_i - x_{i+1})^2 + x_k^2, which no single agent can make
    progress on alone: each needs the other's block to extend the support.
    """
    if k < 1:
        raise InvalidParameter(f"k must be >= 1, got {k}")
    if k > d:
        raise DimensionTooSmall(f"truncation order {k} exceeds dimension {d}")

    def pattern(start):
        full = np.zeros((d, d))
        if start == 1:
            full[0, 0] = 1.0
        i = start
        while i + 1 < d:
            full[i, i] += 1.0
            full[i + 1, i + 1] += 1.0
            full[i, i + 1] -= 1.0
            full[i + 1, i] -= 1.0
            i += 2
        if i == d - 1:
            full[i, i] += 1.0
        out = np.zeros((d, d))
        out[:k, :k] = full[:k, :k]
        return out

    return pattern(1), pattern(0)


def hard_alternating_vector(k, d):
    """(1, -1, 1, ...) on the first k coordinates, zero elsewhere."""
    a = np.zeros(d)
    signs = np.ones(k)
    signs[1::2] = -1.0
    a[:k] = signs
    return a


def hard_optimum_vector(k, d):
    """(k/(k+1), (k-1)/(k+1), ..., 1/(k+1), 0, ...)."""
    x = np.zeros(d)
    x[:k] = np.arange(k, 0, -1) / (k + 1.0)
    return x


def hard_unrestricted_optimum(k, lf):
    """Optimal cost of one split pair: (lf/8) * (-1 + 1/(k+1))."""
    return lf / 8.0 * (-1.0 + 1.0 / (k + 1.0))


def hard_restricted_optimum(k, j, lf):
    """Optimal cost of the gradient-shifted pair objective when both agents
    are restricted to their first j coordinates.

    Equals -(lf/8) * (k^2 + j) / (k+1)^2 while j <= k; for j >= k the
    objective does not depend on coordinates beyond k, so the value
    saturates at the unrestricted optimum.
    """
    if j < 1:
        raise InvalidParameter(f"j must be >= 1, got {j}")
    j_eff = min(j, k)
    return -(lf / 8.0) * (k * k + j_eff) / ((k + 1.0) ** 2)


def hard_gradient_norm(k, lf, pairs=1):
    """||grad f(x*)|| for the split instance: sqrt(2*pairs*k)*lf/(4(k+1))."""
    return math.sqrt(2.0 * pairs * k) * lf / (4.0 * (k + 1.0))


def _hard_pair_oracles(k, d, lf):
    a1, a2 = hard_split_matrices(k, d)
    e1 = np.zeros(d)
    e1[0] = 1.0
    left = QuadraticOracle(q=lf / 4.0 * a1, c=-lf / 4.0 * e1)
    right = QuadraticOracle(q=lf / 4.0 * a2, c=np.zeros(d))
    return left, right


def _hard_reference(k, d, lf, roles):
    x_star = hard_optimum_vector(k, d)
    a_vec = hard_alternating_vector(k, d)
    grad_left = -lf / (4.0 * (k + 1.0)) * a_vec
    rows = []
    pairs = 0
    for role in roles:
        if role == "left":
            rows.append(grad_left)
            pairs += 1
        elif role == "right":
            rows.append(-grad_left)
        else:
            rows.append(np.zeros(d))
    return ReferenceSolution(
        x_star=x_star,
        f_star=pairs * hard_unrestricted_optimum(k, lf),
        grad_at_star=np.stack(rows),
    ), pairs


def generate_hard_instance(kind, k, d, lf=1.0, m=2, zeta=HARD_ZETA_DEFAULT):
    """Worst-case split quadratic instance with its closed-form reference.

    kind "two_agent": the pair split across two agents. kind "line": m >= 3
    agents on a line; the first ceil(zeta*m) hold the left cost, the last
    ceil(zeta*m) the right cost, and the separator agents in between hold
    zero costs so information must cross the chain.
    """
    if lf <= 0:
        raise InvalidParameter(f"lf must be positive, got {lf}")
    if 2 * k + 1 > d:
        raise DimensionTooSmall(f"need 2k+1 <= d, got k={k}, d={d}")
    left, right = _hard_pair_oracles(k, d, lf)
    if kind == "two_agent":
        roles = ["left", "right"]
        oracles = [left, right]
        meta = {"k": k}
    elif kind == "line":
        if m < 3:
            raise InvalidParameter(f"line instance needs m >= 3, got {m}")
        if not 0.0 < zeta < 0.5:
            raise InvalidParameter(f"zeta must be in (0, 0.5), got {zeta}")
        group = math.ceil(zeta * m)
        if m - 2 * group < 1:
            raise InvalidParameter(
                f"no separator agents left with m={m}, zeta={zeta}; increase m"
            )
        zero = QuadraticOracle(q=np.zeros((d, d)), c=np.zeros(d))
        roles, oracles = [], []
        for i in range(m):
            if i < group:
                roles.append("left")
                oracles.append(left)
            elif i >= m - group:
                roles.append("right")
                oracles.append(right)
            else:
                roles.append("zero")
                oracles.append(zero)
        meta = {"k": k, "zeta": zeta, "group": group}
    else:
        raise InvalidParameter(f"unknown hard-instance kind {kind!r}")
    reference, pairs = _hard_reference(k, d, lf, roles)
    meta["pairs"] = pairs
    return ObjectiveInstance(
        kind=f"hard_{kind}",
        oracles=oracles,
        d=d,
        lf=lf,
        reference=reference,
        meta=meta,
    )


def zero_instance(m, d):
    """All-zero costs; every consensual point is optimal."""
    zero = QuadraticOracle(q=np.zeros((d, d)), c=np.zeros(d))
    reference = ReferenceSolution(
        x_star=np.zeros(d), f_star=0.0, grad_at_star=np.zeros((m, d))
    )
    return ObjectiveInstance(
        kind="zero", oracles=[zero] * m, d=d, lf=0.0, reference=reference
    )


def solve_reference(inst):
    """Centralized optimum of sum_i f_i.

    Least squares solves the pooled normal equations (minimum-norm solution
    when rank deficient); logistic runs damped Newton to gradient norm 1e-10;
    the hard and zero families return their closed forms.
    """
    if inst.reference is not None:
        return inst.reference
    if inst.kind == "least_squares":
        a = np.vstack([o.a for o in inst.oracles])
        b = np.concatenate([o.b for o in inst.oracles])
        x_star, *_ = np.linalg.lstsq(a, b, rcond=None)
    elif inst.kind == "logistic":
        x_star = _logistic_newton(inst)
    else:
        raise ReferenceSolveFailed(f"no reference solver for kind {inst.kind!r}")
    grad = np.stack([inst.local_gradient(i, x_star) for i in range(inst.m)])
    ref = ReferenceSolution(
        x_star=x_star,
        f_star=inst.total_value(x_star),
        grad_at_star=grad,
    )
    inst.reference = ref
    return ref


def _logistic_newton(inst):
    x = np.zeros(inst.d)
    for _ in range(_NEWTON_MAX_ITERS):
        g = inst.total_gradient(x)
        gnorm = float(np.sqrt(g @ g))
        if gnorm <= _NEWTON_GRAD_TOL:
            return x
        h = np.zeros((inst.d, inst.d))
        for o in inst.oracles:
            h += o.hessian(x)
        h += 1e-12 * (1.0 + np.trace(h) / inst.d) * np.eye(inst.d)
        step = np.linalg.solve(h, g)
        # backtrack on the total objective
        f0 = inst.total_value(x)
        t = 1.0
        while t > 1e-12:
            cand = x - t * step
            if inst.total_value(cand) <= f0 - 1e-4 * t * float(g @ step):
                x = cand
                break
            t /= 2.0
        else:
            break
    g = inst.total_gradient(x)
    if float(np.sqrt(g @ g)) <= _NEWTON_GRAD_TOL:
        return x
    raise ReferenceSolveFailed(
        f"Newton stalled at gradient norm {float(np.sqrt(g @ g)):.3e}"
    )


def load_csv_dataset(text, label_column, m):
    """Per-agent logistic payloads from CSV text.

    First row is the header; the named label column must be binary with
    values {0, 1} or {-1, 1} (0 maps to -1). Features are parsed as reals
    and min-max rescaled to [0, 1] per column; columns with no spread keep
    their raw value. Rows are split evenly across m agents in order; when
    the row count is not divisible by m the first (count mod m) agents take
    one extra row.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty dataset")
    header = [h.strip() for h in lines[0].split(",")]
    if label_column not in header:
        raise ParseError(f"label column {label_column!r} not in header {header}")
    label_idx = header.index(label_column)
    rows, labels = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != len(header):
            raise ParseError(
                f"line {lineno}: expected {len(header)} fields, got {len(parts)}"
            )
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric field") from None
        labels.append(values[label_idx])
        rows.append([v for i, v in enumerate(values) if i != label_idx])
    label_set = set(labels)
    if label_set <= {0.0, 1.0}:
        y = np.array([1.0 if v == 1.0 else -1.0 for v in labels])
    elif label_set <= {-1.0, 1.0}:
        y = np.array(labels)
    else:
        raise LabelError(f"labels must be binary 0/1 or -1/1, got {sorted(label_set)}")
    u = np.array(rows)
    lo, hi = u.min(axis=0), u.max(axis=0)
    spread = hi > lo
    u[:, spread] = (u[:, spread] - lo[spread]) / (hi[spread] - lo[spread])
    n = u.shape[0]
    if n < m:
        raise ParseError(f"{n} rows cannot be split across {m} agents")
    base, extra = divmod(n, m)
    oracles, start = [], 0
    for i in range(m):
        count = base + (1 if i < extra else 0)
        oracles.append(LogisticOracle(u[start:start + count], y[start:start + count]))
        start += count
    lf = max(o.smoothness for o in oracles)
    return ObjectiveInstance(
        kind="logistic", oracles=oracles, d=u.shape[1], lf=lf,
        meta={"rows": n, "label_column": label_column},
    )


def load_csv_file(path, label_column, m):
    with open(path) as fh:
        return load_csv_dataset(fh.read(), label_column, m)
