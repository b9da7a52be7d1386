"""Dense linear-algebra primitives: SPD solves and least squares.

All routines work on plain ``numpy`` arrays with explicit shapes; no
implicit broadcasting is relied upon. Rank and positive-definiteness are
judged with a scale-relative tolerance so the results survive per-column
affine rescaling of the inputs.
"""

from __future__ import annotations

import numpy as np

from .errors import NotPositiveDefinite, RankDeficient, ShapeMismatch

# A pivot counts as zero when below PIVOT_RTOL times the largest diagonal
# magnitude of the input matrix.
PIVOT_RTOL = 1e-10


def cholesky_spd(A: np.ndarray) -> np.ndarray:
    """Lower-triangular Cholesky factor of a symmetric PD matrix.

    Parameters
    ----------
    A : ndarray of shape (m, m)
        Symmetric positive definite matrix.

    Returns
    -------
    L : ndarray of shape (m, m)
        Lower triangular with ``L @ L.T == A``.

    Raises
    ------
    NotPositiveDefinite
        If a pivot falls below ``PIVOT_RTOL * max(abs(diag(A)))``.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeMismatch(f"expected square matrix, got shape {A.shape}")
    tol = PIVOT_RTOL * max(np.max(np.abs(np.diag(A))) if A.size else 0.0, 1e-300)
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(
            f"factorization failed (pivot tolerance {tol:.3e})"
        ) from None
    # LAPACK accepts tiny positive pivots that the scale-relative rule
    # treats as zero
    pivots = np.diag(L) ** 2
    if pivots.size and np.min(pivots) <= tol:
        k = int(np.argmin(pivots))
        raise NotPositiveDefinite(
            f"non-positive pivot {pivots[k]:.3e} at index {k} (tol {tol:.3e})"
        )
    return L


def solve_spd(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``A x = b`` for symmetric positive definite ``A``.

    Raises
    ------
    NotPositiveDefinite
        If the factorization hits a non-positive pivot, which signals a
        degenerate (collinear) system.
    """
    b = np.asarray(b, dtype=float)
    A = np.asarray(A, dtype=float)
    if A.shape[0] != b.shape[0]:
        raise ShapeMismatch(f"A is {A.shape}, b has length {b.shape[0]}")
    L = cholesky_spd(A)
    y = np.linalg.solve(L, b)
    return np.linalg.solve(L.T, y)


def ols_fit(X: np.ndarray, y: np.ndarray, intercept: bool = False):
    """Ordinary least squares via the normal equations.

    Parameters
    ----------
    X : ndarray of shape (n, q)
        Design matrix, full column rank. ``q`` may be 0, in which case
        only the intercept (or nothing) is fitted.
    y : ndarray of shape (n,)
    intercept : bool
        Augment the design with a constant column.

    Returns
    -------
    (coef, intercept_value) : (ndarray of shape (q,), float)
        Least-squares coefficients for the columns of ``X`` and the
        fitted constant (0.0 when ``intercept`` is False).

    Raises
    ------
    RankDeficient
        If the (augmented) Gram matrix is singular within tolerance.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, q = X.shape
    if y.shape[0] != n:
        raise ShapeMismatch(f"X has {n} rows, y has length {y.shape[0]}")
    if intercept:
        if q == 0:
            return np.zeros(0), float(np.mean(y))
        D = np.column_stack([np.ones(n), X])
    else:
        if q == 0:
            return np.zeros(0), 0.0
        D = X
    try:
        theta = solve_spd(D.T @ D, D.T @ y)
    except NotPositiveDefinite as exc:
        raise RankDeficient(str(exc)) from exc
    if intercept:
        return theta[1:], float(theta[0])
    return theta, 0.0
