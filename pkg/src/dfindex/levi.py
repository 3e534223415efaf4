"""Tangent frames, Levi matrices, null spaces, and the Schur frame transform.

Conventions.  The Levi form of rho on ambient (1,0) vectors X, Y is
levi(X, Y) = sum_{i,j} rho_{z_i zbar_j} X_i conj(Y_j).  The frame matrix is
M[i, j] = levi(X_i, X_j); it is Hermitian.  A combination v = sum_j a_j X_j
is Levi-null iff M conj(a) = 0, so null *coefficient* vectors are conjugated
kernel eigenvectors of M.  The Schur transform Psi = [[I, 0], [-C^{-1}B*,
C^{-1}]] block-diagonalizes M as Psi* M Psi = diag(A - B C^{-1} B*, C^{-1}),
and the transformed frame is [X_1 .. X_{n-1}] conj(Psi).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "LeviError",
    "TangentFrame",
    "NullData",
    "SchurResult",
    "jacobi_eigh",
    "tangent_frame",
    "levi_form",
    "levi_matrix",
    "null_basis",
    "schur_frame",
]

NULL_TOL = 1e-7  # eigenvalue < NULL_TOL * max(1, spectral radius) counts as null
SCHUR_COND_LIMIT = 1e8


class LeviError(ValueError):
    """Degenerate geometry: vanishing gradient, singular trailing block, ..."""


# -- small dense Hermitian eigensolver -----------------------------------------

def jacobi_eigh(M, tol=1e-14, max_sweeps=60):
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi.

    Deterministic row-major sweep order.  Returns (eigenvalues ascending,
    eigenvector columns).  Matrices here are tiny (at most 8x8), so
    simplicity and determinism beat asymptotics.
    """
    A = np.array(M, dtype=complex)
    n = A.shape[0]
    if A.shape != (n, n):
        raise LeviError("matrix must be square")
    herm = np.abs(A - A.conj().T).max()
    if herm > 1e-12 * max(1.0, np.abs(A).max()):
        raise LeviError(f"matrix is not Hermitian (defect {herm:.3e})")
    A = 0.5 * (A + A.conj().T)
    V = np.eye(n, dtype=complex)
    norm = max(np.abs(A).max(), 1e-300)

    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = A[p, q]
                off = max(off, abs(b))
                if abs(b) <= tol * norm:
                    continue
                a_pp = A[p, p].real
                a_qq = A[q, q].real
                phase = b / abs(b)
                theta = 0.5 * np.arctan2(2.0 * abs(b), a_qq - a_pp)
                c = np.cos(theta)
                s = np.sin(theta)
                # unitary rotation in the (p, q) plane zeroing A[p, q]
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - (s * np.conj(phase)) * col_q
                A[:, q] = (s * phase) * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - (s * phase) * row_q
                A[q, :] = (s * np.conj(phase)) * row_p + c * row_q
                A[p, q] = 0.0
                A[q, p] = 0.0
                col_p = V[:, p].copy()
                col_q = V[:, q].copy()
                V[:, p] = c * col_p - (s * np.conj(phase)) * col_q
                V[:, q] = (s * phase) * col_p + c * col_q
        if off <= tol * norm:
            break

    vals = np.diag(A).real.copy()
    order = np.argsort(vals, kind="stable")
    return vals[order], V[:, order]


# -- frames and Levi matrices ---------------------------------------------------

@dataclass(frozen=True)
class TangentFrame:
    """Basis of the holomorphic tangent space at a boundary point.

    basis[j] = grad[pivot] * e_{k_j} - grad[k_j] * e_{pivot}, where pivot is
    the index of the largest gradient component and k_j runs over the other
    coordinates; every basis vector is annihilated by the (1,0) differential.
    """

    basis: np.ndarray       # (n-1, n) complex, rows are frame vectors
    pivot: int
    others: tuple           # coordinate index carried by each row


def tangent_frame(w):
    """Pivoted holomorphic tangent frame from Wirtinger data."""
    grad = w.grad
    if np.abs(grad).max() < 1e-300:
        raise LeviError("vanishing complex gradient")
    k = int(np.argmax(np.abs(grad)))
    n = grad.size
    others = tuple(j for j in range(n) if j != k)
    basis = np.zeros((n - 1, n), dtype=complex)
    for row, j in enumerate(others):
        basis[row, j] = grad[k]
        basis[row, k] = -grad[j]
    return TangentFrame(basis=basis, pivot=k, others=others)


def levi_form(w, X, Y):
    """Levi form on ambient (1,0) vectors: sum rho_{i jbar} X_i conj(Y_j)."""
    X = np.asarray(X, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    return complex(X @ w.hess_mixed @ np.conj(Y))


@dataclass(frozen=True)
class NullData:
    """Levi matrix in a tangent frame with its eigendecomposition."""

    M: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    frame: Optional[TangentFrame] = None
    tol: float = NULL_TOL
    null_coeffs: np.ndarray = field(default=None)
    m: int = 0

    @property
    def scale(self):
        return max(1.0, float(np.abs(self.eigenvalues).max(initial=0.0)))


def levi_matrix(w, frame, tol=NULL_TOL):
    """Assemble M[i, j] = levi(X_i, X_j) and attach its eigendata."""
    X = frame.basis
    M = X @ w.hess_mixed @ X.conj().T
    defect = np.abs(M - M.conj().T).max()
    if defect > 1e-13 * max(1.0, np.abs(M).max()):
        raise LeviError(f"Levi matrix not Hermitian (defect {defect:.3e})")
    M = 0.5 * (M + M.conj().T)
    vals, vecs = jacobi_eigh(M)
    nd = NullData(M=M, eigenvalues=vals, eigenvectors=vecs, frame=frame, tol=tol)
    coeffs = null_basis(nd, tol)
    object.__setattr__(nd, "null_coeffs", coeffs)
    object.__setattr__(nd, "m", coeffs.shape[0])
    return nd


def null_basis(nd, tol=NULL_TOL):
    """Frame-coefficient vectors spanning the numerical Levi null space.

    Returns an (m, n-1) array of orthonormal coefficient vectors a such that
    sum_j a_j X_j is annihilated by the Levi form; empty when the matrix is
    positive definite at scale.
    """
    cutoff = tol * nd.scale
    mask = nd.eigenvalues < cutoff
    if not mask.any():
        return np.zeros((0, nd.M.shape[0]), dtype=complex)
    vecs = nd.eigenvectors[:, mask]
    # re-orthonormalize the cluster, then conjugate: M conj(a) = 0
    q, _ = np.linalg.qr(vecs)
    return q.conj().T


@dataclass(frozen=True)
class SchurResult:
    Psi: np.ndarray
    block_null: np.ndarray   # A - B C^{-1} B*
    block_pos: np.ndarray    # C^{-1}
    transformed: np.ndarray  # frame-coefficient columns [e_1 .. ] conj(Psi)
    residual: float


def schur_frame(nd, m, frame_vectors=None, residual_tol=1e-10):
    """Block-diagonalize the Levi matrix around an m-dimensional null block.

    Returns Psi, the diagonal blocks, and the transformed frame (ambient
    vectors when frame_vectors is given, otherwise coefficient columns).
    """
    M = nd.M if isinstance(nd, NullData) else np.asarray(nd, dtype=complex)
    size = M.shape[0]
    if not 0 <= m <= size:
        raise LeviError(f"null block size {m} out of range for {size}x{size}")
    A = M[:m, :m]
    B = M[:m, m:]
    C = M[m:, m:]
    if C.size:
        if np.linalg.cond(C) > SCHUR_COND_LIMIT:
            raise LeviError("trailing block C is singular or ill-conditioned")
        Cinv = np.linalg.inv(C)
    else:
        Cinv = C.copy()
    Psi = np.zeros((size, size), dtype=complex)
    Psi[:m, :m] = np.eye(m)
    if C.size:
        Psi[m:, :m] = -Cinv @ B.conj().T
        Psi[m:, m:] = Cinv
    block_null = A - (B @ Cinv @ B.conj().T if C.size else np.zeros_like(A))

    target = np.zeros_like(M)
    target[:m, :m] = block_null
    target[m:, m:] = Cinv
    residual = float(np.linalg.norm(Psi.conj().T @ M @ Psi - target))
    if residual > residual_tol * max(np.linalg.norm(M), 1e-300):
        raise LeviError(f"Schur identity violated (residual {residual:.3e})")

    base = np.asarray(frame_vectors, dtype=complex) if frame_vectors is not None \
        else np.eye(size, dtype=complex)
    transformed = (base.T @ np.conj(Psi)).T  # row j = sum_i X_i conj(Psi)[i, j]
    return SchurResult(Psi=Psi, block_null=block_null, block_pos=Cinv,
                       transformed=transformed, residual=residual)
