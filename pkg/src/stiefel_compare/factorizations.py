"""QR (Bartlett form) and polar (Wishart root) factorizations.

A standard Gaussian ``n x k`` matrix factors as ``Q R`` with ``Q`` Haar on the
Stiefel manifold and ``R`` upper triangular with chi diagonal, and as ``Q W``
with ``W`` the positive square root of the Wishart matrix ``Gamma^T Gamma``.
"""

import math

import numpy as np

from ._validation import (
    DimensionError,
    RankDeficiencyError,
    check_matrix,
    check_orthonormal_columns,
    check_square,
)
from .sampling import sample_chis

__all__ = [
    "qr_positive_diagonal",
    "sample_bartlett_R",
    "jacobi_eigh",
    "psd_sqrt",
    "polar_factorize",
]


def qr_positive_diagonal(M, validate=True):
    """Thin QR factorization with a strictly positive diagonal in ``R``.

    Householder QR (LAPACK ``geqrf``) followed by flipping the sign of every
    column of ``Q`` / row of ``R`` whose diagonal entry is negative. With this
    convention the factorization of a full-rank matrix is unique.

    Parameters
    ----------
    M : array_like of shape (n, k), n >= k
    validate : bool, default True
        Verify the orthonormality of ``Q`` to 1e-10.

    Returns
    -------
    Q : ndarray of shape (n, k)
    R : ndarray of shape (k, k)

    Raises
    ------
    RankDeficiencyError
        If ``min |R_ii| <= 1e-12 * ||M||_F``.
    """
    M = check_matrix(M)
    n, k = M.shape
    if k > n:
        raise DimensionError(f"QR needs n >= k, got shape {M.shape}")
    if k == 1:
        r = np.linalg.norm(M)
        if r == 0.0:
            raise RankDeficiencyError("matrix is numerically rank deficient")
        return M / r, np.array([[r]])
    Q, R = np.linalg.qr(M)
    d = np.diag(R)
    if np.min(np.abs(d)) <= 1e-12 * np.linalg.norm(M):
        raise RankDeficiencyError("matrix is numerically rank deficient")
    signs = np.where(d < 0, -1.0, 1.0)
    Q = Q * signs
    R = R * signs[:, None]
    if validate:
        check_orthonormal_columns(Q, atol=1e-10)
    return Q, R


def sample_bartlett_R(dims, stream):
    """Draw the triangular Bartlett factor directly.

    Diagonal entry ``i`` (1-based) is chi with ``n - i + 1`` degrees of
    freedom; the strict upper triangle is i.i.d. N(0, 1); everything else is
    zero. The diagonal is drawn first, then the upper triangle row by row.
    """
    n, k = dims.n, dims.k
    R = np.zeros((k, k))
    R[np.diag_indices(k)] = sample_chis(np.arange(n, n - k, -1), stream)
    iu = np.triu_indices(k, 1)
    R[iu] = stream.standard_normal(len(iu[0]))
    return R


def jacobi_eigh(S, tol=1e-12, max_sweeps=100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps over all ``(p, q)`` pairs in row order until the off-diagonal
    Frobenius norm drops below ``tol * ||S||_F``.

    Returns
    -------
    eigenvalues : ndarray of shape (k,), ascending
    eigenvectors : ndarray of shape (k, k), columns
    """
    A = check_square(S, "S").copy()
    k = A.shape[0]
    V = np.eye(k)
    threshold = tol * np.linalg.norm(A)
    for _ in range(max_sweeps):
        if np.linalg.norm(A - np.diag(np.diag(A))) <= threshold:
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the rotation in the (p, q) plane
                ap = A[:, p].copy()
                aq = A[:, q]
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap = A[p, :].copy()
                aq = A[q, :]
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q]
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        raise RuntimeError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    w = np.diag(A).copy()
    order = np.argsort(w)
    return w[order], V[:, order]


def psd_sqrt(S, method="eigh"):
    """Positive semidefinite square root of a symmetric matrix.

    Parameters
    ----------
    S : array_like of shape (k, k)
        Symmetric to 1e-10; eigenvalues down to -1e-8 are clamped to zero.
    method : {"eigh", "jacobi"}
        ``"eigh"`` uses LAPACK, ``"jacobi"`` the cyclic Jacobi solver above.

    Returns
    -------
    ndarray of shape (k, k), symmetric PSD with ``W @ W == S`` up to round-off.
    """
    S = check_square(S, "S")
    if np.max(np.abs(S - S.T)) > 1e-10:
        raise ValueError("S is not symmetric to 1e-10")
    S = 0.5 * (S + S.T)
    if method == "eigh":
        w, V = np.linalg.eigh(S)
    elif method == "jacobi":
        w, V = jacobi_eigh(S)
    else:
        raise ValueError(f"unknown method {method!r}")
    if np.min(w) < -1e-8:
        raise ValueError(f"S is indefinite: smallest eigenvalue {np.min(w):.3e}")
    W = (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T
    return 0.5 * (W + W.T)


def polar_factorize(Gamma, method="svd"):
    """Polar factorization ``Gamma = Q W`` of a full-column-rank matrix.

    Parameters
    ----------
    Gamma : array_like of shape (n, k), n >= k
    method : {"svd", "wishart"}
        ``"svd"``: from ``Gamma = U S V^T`` take ``Q = U V^T`` and
        ``W = V S V^T``; stays orthonormal for ill-conditioned input.
        ``"wishart"``: ``W = psd_sqrt(Gamma^T Gamma)`` and ``Q = Gamma W^{-1}``.

    Returns
    -------
    Q : ndarray of shape (n, k), orthonormal columns
    W : ndarray of shape (k, k), symmetric positive definite
    """
    G = check_matrix(Gamma, "Gamma")
    n, k = G.shape
    if k > n:
        raise DimensionError(f"polar factorization needs n >= k, got shape {G.shape}")
    scale = np.linalg.norm(G)
    if method == "svd":
        U, s, Vt = np.linalg.svd(G, full_matrices=False)
        if s[-1] <= 1e-12 * scale:
            raise RankDeficiencyError("matrix is numerically rank deficient")
        Q = U @ Vt
        W = (Vt.T * s) @ Vt
        W = 0.5 * (W + W.T)
    elif method == "wishart":
        S = G.T @ G
        W = psd_sqrt(0.5 * (S + S.T))
        w, V = np.linalg.eigh(W)
        if w[0] <= 1e-12 * scale:
            raise RankDeficiencyError("matrix is numerically rank deficient")
        Q = G @ ((V / w) @ V.T)
    else:
        raise ValueError(f"unknown method {method!r}")
    return Q, W
