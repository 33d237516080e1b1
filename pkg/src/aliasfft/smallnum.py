"""Small dense complex linear algebra used by the recovery stages.

Everything here operates on tiny matrices (a few rows/columns, hard cap 64);
the kernels defer to numpy.linalg, the value added is the contracts: descending
singular values, pseudoinverse semantics with an explicit conditioning flag,
monic-polynomial roots, and the shifted-column pencil eigensolve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_DIM = 64

_COND_LIMIT = 1e12
_RANK_RTOL = 1e-10


def _as_small_matrix(a, name="matrix") -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must be nonempty")
    if max(a.shape) > MAX_DIM:
        raise ValueError(f"{name} exceeds the {MAX_DIM}x{MAX_DIM} small-matrix cap")
    return a


@dataclass
class SvdResult:
    """Full SVD a = u @ diag(sigma) @ v.conj().T (sigma descending)."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray


@dataclass
class LinearSolution:
    x: np.ndarray
    residual: float
    well_conditioned: bool


@dataclass
class PencilResult:
    values: np.ndarray
    ok: bool


def svd(a) -> SvdResult:
    a = _as_small_matrix(a)
    u, s, vh = np.linalg.svd(a, full_matrices=True)
    return SvdResult(u=u, sigma=s, v=vh.conj().T)


def _lstsq(a: np.ndarray, b: np.ndarray) -> LinearSolution:
    b = np.asarray(b, dtype=np.complex128).reshape(-1)
    if b.size != a.shape[0]:
        raise ValueError("right-hand side length does not match rows")
    x, _, rank, sv = np.linalg.lstsq(a, b, rcond=None)
    residual = float(np.linalg.norm(a @ x - b))
    full = rank == min(a.shape)
    cond_ok = sv.size == 0 or sv[-1] > 0 and sv[0] / sv[-1] < _COND_LIMIT
    return LinearSolution(x=x, residual=residual, well_conditioned=bool(full and cond_ok))


def solve_linear(a, b) -> LinearSolution:
    """Least-norm solution of a square system (pseudoinverse semantics).

    Near-singular systems do not raise; the conditioning flag goes False.
    """
    a = _as_small_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError("solve_linear expects a square matrix")
    return _lstsq(a, b)


def least_squares(a, b) -> LinearSolution:
    """argmin ||a x - b||_2 for a tall (rows >= cols) matrix."""
    a = _as_small_matrix(a)
    if a.shape[0] < a.shape[1]:
        raise ValueError("least_squares expects rows >= cols")
    return _lstsq(a, b)


def poly_roots(coeffs) -> np.ndarray:
    """All roots of the monic polynomial z^a + c[a-1] z^(a-1) + ... + c[0].

    ``coeffs`` holds the a non-leading coefficients, lowest order first.
    Degrees 1 and 2 use the closed forms; 3 and 4 use companion-matrix
    eigenvalues.  Degrees outside 1..4 are rejected.
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128).reshape(-1)
    a = coeffs.size
    if not 1 <= a <= 4:
        raise ValueError(f"degree must be in 1..4, got {a}")
    if a == 1:
        return np.array([-coeffs[0]])
    if a == 2:
        c0, c1 = coeffs
        s = np.sqrt(c1 * c1 - 4.0 * c0 + 0j)
        return np.array([(-c1 - s) / 2.0, (-c1 + s) / 2.0])
    return np.roots(np.concatenate(([1.0 + 0j], coeffs[::-1])))


def pencil_eigenvalues(y1, y2, rank: int) -> PencilResult:
    """Tone multipliers z_j recovered from the shifted-column pencil (y1, y2).

    y1/y2 are the full (a+1)x(a+1) moment pencil with its rightmost/leftmost
    column removed.  The pencil is projected onto its top-``rank`` right
    singular subspace before the eigensolve, so rank-deficient inputs degrade
    gracefully; asking for more than the numerical rank flags ok=False and
    truncates.
    """
    y1 = _as_small_matrix(y1, "y1")
    y2 = _as_small_matrix(y2, "y2")
    if y1.shape != y2.shape:
        raise ValueError("y1 and y2 must share a shape")
    if y1.shape[0] != y1.shape[1] + 1:
        raise ValueError("pencil halves must be (a+1) x a")
    a = y1.shape[1]
    if not 1 <= rank <= a:
        raise ValueError(f"rank must be in 1..{a}")
    full = np.hstack([y1, y2[:, -1:]])
    sv = np.linalg.svd(full, compute_uv=False)
    tol = sv[0] * _RANK_RTOL
    numerical_rank = int(np.sum(sv > tol))
    ok = rank <= numerical_rank
    rank = min(rank, numerical_rank)
    if rank == 0:
        return PencilResult(values=np.zeros(0, dtype=np.complex128), ok=False)
    _, _, vh = np.linalg.svd(full)
    row_basis = vh[:rank, :]
    lead = row_basis[:, :-1]
    lag = row_basis[:, 1:]
    core = lag @ np.linalg.pinv(lead)
    lam = np.linalg.eigvals(core)
    return PencilResult(values=np.conj(lam), ok=ok)
