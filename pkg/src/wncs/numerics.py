"""Small dense real-matrix kernels shared by the simulator.

Everything here is a pure function on ``numpy`` arrays. Matrix sizes in this
package are tiny (state dimension 4 for the pendulum), so clarity wins over
asymptotic efficiency.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg


class NumericalError(ArithmeticError):
    """A matrix routine failed to converge or met an ill-posed input."""


class DimensionError(ValueError):
    """Matrix shapes are incompatible with the requested operation."""


DARE_MAX_ITER = 100_000
DARE_STEP_TOL = 1e-12
DARE_RESIDUAL_TOL = 1e-8
PSD_TOL = 1e-10


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a finite 2-D float array."""
    a = np.atleast_2d(np.asarray(m, dtype=float))
    if a.ndim != 2 or 0 in a.shape:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericalError("matrix has non-finite entries")
    return a


def _require_square(a: np.ndarray, name: str = "matrix") -> None:
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")


def is_symmetric_psd(m, tol: float = PSD_TOL) -> bool:
    """True when ``m`` is symmetric within ``tol`` and has no eigenvalue below ``-tol``."""
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        return False
    if np.max(np.abs(a - a.T), initial=0.0) > tol:
        return False
    return bool(np.linalg.eigvalsh(0.5 * (a + a.T)).min() >= -tol)


def spectral_radius(m) -> float:
    """Largest eigenvalue modulus of a square matrix."""
    a = as_matrix(m)
    _require_square(a)
    try:
        eig = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration did not converge: {exc}") from exc
    return float(np.max(np.abs(eig)))


def riccati_map(P: np.ndarray, A: np.ndarray, B: np.ndarray, Zs: np.ndarray, Zu: np.ndarray) -> np.ndarray:
    """One step of the discrete Riccati recursion."""
    AtPB = A.T @ P @ B
    S = B.T @ P @ B + Zu
    return A.T @ P @ A - AtPB @ np.linalg.solve(S, AtPB.T) + Zs


def dare_residual(P, A, B, Zs, Zu) -> float:
    """Frobenius norm of ``P - riccati_map(P)``."""
    P, A, B, Zs, Zu = (as_matrix(x) for x in (P, A, B, Zs, Zu))
    return float(np.linalg.norm(P - riccati_map(P, A, B, Zs, Zu)))


def solve_dare(A, B, Zs, Zu, max_iter: int = DARE_MAX_ITER) -> np.ndarray:
    """Solve the discrete-time algebraic Riccati equation by value iteration.

    Iterates ``P <- A'PA - A'PB (B'PB + Zu)^-1 B'PA + Zs`` from ``P = Zs``
    until the Frobenius step falls under ``1e-12`` (relative to ``||P||`` once
    ``||P|| > 1``).

    Parameters
    ----------
    A : (D, D) array_like
    B : (D, P) array_like
    Zs : (D, D) array_like
        State weight, symmetric PSD.
    Zu : (P, P) array_like
        Action weight, symmetric PD.

    Returns
    -------
    np.ndarray
        The stabilizing solution, symmetrized.

    Raises
    ------
    NumericalError
        If the iteration does not settle within ``max_iter`` steps or the
        fixed-point residual exceeds ``1e-8 * max(1, ||P||)`` (e.g. ``(A, B)`` not
        stabilizable).
    """
    A, B, Zs, Zu = (as_matrix(x) for x in (A, B, Zs, Zu))
    _require_square(A, "A")
    D = A.shape[0]
    if B.shape[0] != D or Zs.shape != (D, D) or Zu.shape != (B.shape[1], B.shape[1]):
        raise DimensionError("inconsistent DARE dimensions")
    try:
        np.linalg.cholesky(0.5 * (Zu + Zu.T))
    except np.linalg.LinAlgError as exc:
        raise NumericalError("Zu must be positive definite") from exc

    P = Zs.copy()
    for _ in range(max_iter):
        with np.errstate(over="ignore", invalid="ignore"):
            P_next = riccati_map(P, A, B, Zs, Zu)
        P_next = 0.5 * (P_next + P_next.T)
        if not np.all(np.isfinite(P_next)):
            break
        step = np.linalg.norm(P_next - P)
        P = P_next
        if step < DARE_STEP_TOL * max(1.0, np.linalg.norm(P)):
            # absolute 1e-8 for ||P|| <= 1, relative beyond (round-off grows with ||P||)
            if dare_residual(P, A, B, Zs, Zu) <= DARE_RESIDUAL_TOL * max(1.0, np.linalg.norm(P)):
                return P
            break
    raise NumericalError("Riccati iteration did not converge; is (A, B) stabilizable?")


def solve_lyapunov_matrix(Ac) -> np.ndarray:
    """Solve the Stein equation ``Ac' Z Ac - Z = -I`` for a Schur-stable ``Ac``.

    Uses the vectorization identity ``(I - Ac' (x) Ac') vec(Z) = vec(I)``,
    which is exact and cheap for the small dimensions used here.
    """
    Ac = as_matrix(Ac)
    _require_square(Ac, "Ac")
    if spectral_radius(Ac) >= 1.0:
        raise NumericalError("closed-loop matrix is not Schur stable; no PD solution")
    D = Ac.shape[0]
    lhs = np.eye(D * D) - np.kron(Ac.T, Ac.T)
    z = np.linalg.solve(lhs, np.eye(D).reshape(-1))
    Z = z.reshape(D, D)
    return 0.5 * (Z + Z.T)


def psd_solve(A, B) -> np.ndarray:
    """Solve ``A X = B`` for symmetric positive definite ``A`` via Cholesky."""
    A = as_matrix(A)
    _require_square(A, "A")
    B_arr = np.asarray(B, dtype=float)
    vector_rhs = B_arr.ndim == 1
    B_mat = B_arr.reshape(-1, 1) if vector_rhs else as_matrix(B_arr)
    if B_mat.shape[0] != A.shape[0]:
        raise DimensionError(f"rhs has {B_mat.shape[0]} rows, expected {A.shape[0]}")
    try:
        factor = scipy.linalg.cho_factor(0.5 * (A + A.T), lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("matrix is not positive definite") from exc
    X = scipy.linalg.cho_solve(factor, B_mat)
    return X.ravel() if vector_rhs else X


def sym_sqrt_factor(W) -> np.ndarray:
    """Return ``L`` with ``L @ L.T == W`` for a symmetric PSD ``W``.

    Eigen-decomposition based so singular (e.g. zero) covariances work.
    """
    W = as_matrix(W)
    vals, vecs = np.linalg.eigh(0.5 * (W + W.T))
    if vals.min() < -PSD_TOL * max(1.0, abs(vals).max()):
        raise NumericalError("covariance is not positive semi-definite")
    return vecs * np.sqrt(np.clip(vals, 0.0, None))
