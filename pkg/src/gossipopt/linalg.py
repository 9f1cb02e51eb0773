"""Dense symmetric linear algebra on agent-stacked arrays.

Conventions used throughout the package:

* a *symmetric matrix* is a float64 ndarray of shape (n, n) with exactly
  equal transposed entries (validated by :func:`dense_sym`);
* a *multivector* is a float64 ndarray of shape (m, d); row i is agent i's
  local copy of the d-dimensional decision variable.

The inner product between multivectors is the Frobenius (trace) inner
product and the induced norm is the Frobenius norm.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EigenSolveFailed, InvalidMatrix, ShapeError

_MAX_JACOBI_SWEEPS = 60


def dense_sym(entries):
    """Validate and return a symmetric float64 matrix.

    Raises InvalidMatrix on non-square shape, non-finite entries, or any
    entry pair with ``entries[i, j] != entries[j, i]`` exactly.
    """
    a = np.asarray(entries, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidMatrix(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidMatrix("matrix entries must be finite")
    if not np.array_equal(a, a.T):
        raise InvalidMatrix("matrix is not exactly symmetric")
    return a


def multivector(rows):
    """Validate and return an (m, d) float64 agent stack."""
    x = np.asarray(rows, dtype=float)
    if x.ndim != 2:
        raise ShapeError(f"expected a 2-d agent stack, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidMatrix("multivector entries must be finite")
    return x


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in ascending order; eigenvectors as orthonormal columns."""

    values: np.ndarray
    vectors: np.ndarray


def _off_diagonal_norm(a):
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def jacobi_eigen(matrix, tol=None):
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps stop once the off-diagonal Frobenius mass is at most ``tol``
    (default ``1e-12 * n * max|entry|``). Adequate for the dense matrices this
    package builds (n <= 64 gossip matrices, small Gram matrices).
    """
    a = dense_sym(matrix).copy()
    n = a.shape[0]
    if tol is None:
        tol = 1e-12 * n * max(float(np.max(np.abs(a))), 1.0)
    elif tol <= 0:
        raise InvalidMatrix("tol must be positive")
    v = np.eye(n)
    if n == 1:
        return EigenDecomposition(values=np.diag(a).copy(), vectors=v)

    for _ in range(_MAX_JACOBI_SWEEPS):
        if _off_diagonal_norm(a) <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                # symmetric Schur rotation annihilating a[p, q]
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                sign = 1.0 if theta >= 0.0 else -1.0
                t = sign / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                a[p, q] = a[q, p] = 0.0
                v_p, v_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * v_p - s * v_q
                v[:, q] = s * v_p + c * v_q
    else:
        raise EigenSolveFailed(
            f"Jacobi did not reach off-diagonal mass {tol:g} "
            f"in {_MAX_JACOBI_SWEEPS} sweeps"
        )

    values = np.diag(a).copy()
    order = np.argsort(values, kind="stable")
    return EigenDecomposition(values=values[order], vectors=v[:, order])


def apply(matrix, x):
    """Row i of the result is ``sum_j matrix[i, j] * x[j, :]``."""
    m = np.asarray(matrix, dtype=float)
    x = np.asarray(x, dtype=float)
    if m.ndim != 2 or x.ndim != 2 or m.shape[1] != x.shape[0]:
        raise ShapeError(f"cannot apply {m.shape} to agent stack {x.shape}")
    return m @ x


def frobenius_inner(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ShapeError(f"shape mismatch: {x.shape} vs {y.shape}")
    return float(np.sum(x * y))


def frobenius_norm(x):
    x = np.asarray(x, dtype=float)
    return float(np.sqrt(np.sum(x * x)))


def mean_projector(m):
    """The rank-one averaging matrix with every entry 1/m."""
    return np.full((m, m), 1.0 / m)
