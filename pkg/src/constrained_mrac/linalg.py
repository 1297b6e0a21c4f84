"""Small dense linear-algebra kernel.

Everything here works on plain numpy arrays of modest size (n <= ~10).
The Lyapunov solver uses the Kronecker (vectorized) form, which costs
O(n^6) but is exact up to a single dense solve.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    MatchingViolated,
    NotHurwitz,
    NotSymmetric,
    SingularSystem,
)

HURWITZ_EPS = 1e-9
SYMMETRY_TOL = 1e-10
LYAPUNOV_RTOL = 1e-9
MATCHING_TOL = 1e-8
RANK_TOL = 1e-10


@dataclass(frozen=True)
class LyapunovPair:
    """Solution P of A_m^T P + P A_m = -Q together with Q."""

    P: np.ndarray
    Q: np.ndarray
    residual_norm: float

    @property
    def n(self):
        return self.P.shape[0]


def as_square(M, name="matrix"):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def as_vector(v, n=None, name="vector"):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be one-dimensional, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise DimensionMismatch(f"{name} has length {v.shape[0]}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def is_hurwitz(A, eps=HURWITZ_EPS):
    """True iff every eigenvalue of A has real part < -eps."""
    A = as_square(A, "A")
    return bool(np.max(np.linalg.eigvals(A).real) < -eps)


def eig_extrema_sym(S, tol=SYMMETRY_TOL):
    """Return (lambda_min, lambda_max) of a symmetric matrix."""
    S = as_square(S, "S")
    asym = float(np.max(np.abs(S - S.T))) if S.size else 0.0
    if asym > tol:
        raise NotSymmetric(asym)
    w = np.linalg.eigvalsh(0.5 * (S + S.T))
    return float(w[0]), float(w[-1])


def solve_lyapunov(A_m, Q=None):
    """Solve A_m^T P + P A_m = -Q for symmetric positive-definite P.

    Q defaults to the identity. Raises NotHurwitz when A_m has an
    eigenvalue with real part >= -HURWITZ_EPS.
    """
    A_m = as_square(A_m, "A_m")
    n = A_m.shape[0]
    Q = np.eye(n) if Q is None else as_square(Q, "Q")
    if Q.shape != A_m.shape:
        raise DimensionMismatch(f"Q has shape {Q.shape}, expected {A_m.shape}")
    if eig_extrema_sym(Q)[0] <= 0.0:
        raise ValueError("Q must be positive definite")

    eigs = np.linalg.eigvals(A_m)
    if np.max(eigs.real) >= -HURWITZ_EPS:
        raise NotHurwitz(np.max(eigs.real))

    eye = np.eye(n)
    # column-major vec: vec(A^T P) = (I kron A^T) vec P, vec(P A) = (A^T kron I) vec P
    L = np.kron(eye, A_m.T) + np.kron(A_m.T, eye)
    if np.linalg.cond(L) > 1e14:
        raise SingularSystem("vectorized Lyapunov operator is numerically singular")
    try:
        vecP = np.linalg.solve(L, -Q.reshape(-1, order="F"))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    P = vecP.reshape((n, n), order="F")
    P = 0.5 * (P + P.T)
    residual = float(np.linalg.norm(A_m.T @ P + P @ A_m + Q, "fro"))
    if eig_extrema_sym(P)[0] <= 0.0:
        raise SingularSystem("Lyapunov solution is not positive definite")
    return LyapunovPair(P=P, Q=Q, residual_norm=residual)


def derive_matching_gains(A, A_m, B, lam, B_m, tol=MATCHING_TOL):
    """Least-squares (K, l) with A_m - A = B lam K^T and B_m = B lam l.

    Raises MatchingViolated when either residual exceeds ``tol``.
    Intended for fixtures and diagnostics; the controller never sees K or l.
    """
    A = as_square(A, "A")
    n = A.shape[0]
    A_m = as_square(A_m, "A_m")
    if A_m.shape != A.shape:
        raise DimensionMismatch("A and A_m differ in shape")
    b = as_vector(B, n, "B") * float(lam)
    B_m = as_vector(B_m, n, "B_m")
    bb = float(b @ b)
    if bb == 0.0:
        raise ValueError("B*lambda must be nonzero")

    D = A_m - A
    K = D.T @ b / bb
    l = float(b @ B_m / bb)
    res_K = float(np.max(np.abs(D - np.outer(b, K))))
    res_l = float(np.max(np.abs(B_m - b * l)))
    if res_K > tol or res_l > tol:
        raise MatchingViolated(res_K, res_l)
    return K, l


def derive_nonlinear_gain(A1, B, lam, tol=MATCHING_TOL):
    """K1 with A1 = -B lam K1^T (least squares, exactness checked)."""
    A1 = as_square(A1, "A1")
    n = A1.shape[0]
    b = as_vector(B, n, "B") * float(lam)
    bb = float(b @ b)
    K1 = -(A1.T @ b) / bb
    res = float(np.max(np.abs(A1 + np.outer(b, K1))))
    if res > tol:
        raise MatchingViolated(res, 0.0)
    return K1


def controllability_matrix(A, b):
    A = as_square(A, "A")
    b = as_vector(b, A.shape[0], "b")
    cols = [b]
    for _ in range(A.shape[0] - 1):
        cols.append(A @ cols[-1])
    return np.column_stack(cols)


def is_controllable(A, b, tol=RANK_TOL):
    """Rank test on [b, Ab, ..., A^{n-1} b] with a relative singular-value cut."""
    s = np.linalg.svd(controllability_matrix(A, b), compute_uv=False)
    if s[0] == 0.0:
        return False
    return bool(np.all(s > tol * s[0]))
