"""Rank decisions, spans and nullspaces shared by every module.

All rank calls go through :func:`numerical_rank`, which uses singular values
with a threshold relative to the largest one.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

RANK_RTOL = 1e-10

# above this many flops a dense SVD is replaced by the Gram/Ritz route
_DENSE_SVD_BUDGET = 5e9
# eigenvalues of the Gram matrix below (cut * sigma_max)^2 are re-examined
_RITZ_CUT = 1e-3


class RankAmbiguityWarning(UserWarning):
    """A singular value sits within a factor 10 of the rank threshold."""


@dataclass(frozen=True)
class RankResult:
    rank: int
    sigma_max: float
    threshold: float
    ambiguous: bool
    method: str
    # singular values closest to the threshold on either side
    gap: tuple[float, float]


def _dense(a):
    if scipy.sparse.issparse(a):
        return a.toarray()
    return np.asarray(a)


def _classify(small: np.ndarray, sigma_max: float, rtol: float):
    threshold = rtol * sigma_max
    above = small[small > threshold]
    below = small[small <= threshold]
    lo = float(below.max()) if below.size else 0.0
    hi = float(above.min()) if above.size else float("inf")
    ambiguous = bool(np.any((small > threshold / 10) & (small < threshold * 10)))
    return int(above.size), threshold, ambiguous, (lo, hi)


def _rank_deflated(a, K: np.ndarray, rtol: float):
    """Rank of a tall ``a`` given orthonormal columns K believed to span part of its kernel.

    The columns of K must be annihilated to within the threshold; the rest of
    the domain is certified injective by a Cholesky factorization of the
    deflated Gram matrix and a Lanczos estimate of its smallest eigenvalue.
    Returns ``None`` whenever the certificate is not conclusive.
    """
    n = a.shape[1]
    gram = _dense(a.conj().T @ a)
    gram = (gram + gram.conj().T) / 2
    lam_max = float(scipy.sparse.linalg.eigsh(gram, k=1, which="LA", return_eigenvectors=False, tol=1e-6)[0])
    if lam_max <= 0.0:
        return None
    sigma_max = float(np.sqrt(lam_max * (1 + 1e-6)))
    small = np.linalg.svd(_dense(a @ K), compute_uv=False) if K.shape[1] else np.zeros(0)
    threshold = rtol * sigma_max
    if np.any(small > threshold / 10):
        return None
    try:
        chol = scipy.linalg.cho_factor(gram + lam_max * (K @ K.conj().T))
    except np.linalg.LinAlgError:
        return None
    inv = scipy.sparse.linalg.LinearOperator((n, n), matvec=lambda x: scipy.linalg.cho_solve(chol, x), dtype=complex)
    mu = float(scipy.sparse.linalg.eigsh(inv, k=1, which="LA", return_eigenvectors=False, tol=1e-6)[0])
    sigma_low = float(np.sqrt(1.0 / mu))
    if sigma_low < _RITZ_CUT * sigma_max:
        return None
    lo = float(small.max()) if small.size else 0.0
    return RankResult(n - K.shape[1], sigma_max, threshold, False, "deflated-cholesky", (lo, sigma_low))


def numerical_rank(a, rtol: float = RANK_RTOL, warn: bool = True, null_hint=None) -> RankResult:
    """Singular-value rank of a dense or sparse matrix.

    Small matrices get a full SVD.  With ``null_hint`` (orthonormal columns
    expected in the kernel) large matrices first try a deflated certificate.  Large ones form the Gram matrix, split off
    the eigenvectors whose singular values are clearly nonzero, and recompute
    the remaining small singular values directly from ``a`` restricted to the
    candidate null subspace, so the reported values carry SVD accuracy rather
    than the squared error of the Gram matrix.
    """
    rows, cols = a.shape
    if rows == 0 or cols == 0:
        return RankResult(0, 0.0, 0.0, False, "empty", (0.0, float("inf")))
    if rows < cols:
        a = a.conj().T
        rows, cols = cols, rows
        null_hint = None
    big = rows * cols * cols > _DENSE_SVD_BUDGET
    if big and null_hint is not None:
        res = _rank_deflated(a, np.asarray(null_hint), rtol)
        if res is not None:
            return res
    if not big:
        s = np.linalg.svd(_dense(a), compute_uv=False)
        sigma_max = float(s[0])
        if sigma_max == 0.0:
            return RankResult(0, 0.0, 0.0, False, "svd", (0.0, float("inf")))
        rank, thr, amb, gap = _classify(s, sigma_max, rtol)
        method = "svd"
    else:
        gram = a.conj().T @ a
        gram = _dense(gram)
        w, v = np.linalg.eigh((gram + gram.conj().T) / 2)
        lam_max = float(w[-1])
        if lam_max <= 0.0:
            return RankResult(0, 0.0, 0.0, False, "gram", (0.0, float("inf")))
        sigma_max = np.sqrt(lam_max)
        cand = w < (_RITZ_CUT * sigma_max) ** 2
        n_large = int(np.count_nonzero(~cand))
        if np.any(cand):
            s = np.linalg.svd(_dense(a @ v[:, cand]), compute_uv=False)
        else:
            s = np.zeros(0)
        n_small, thr, amb, gap = _classify(s, sigma_max, rtol)
        rank = n_large + n_small
        method = "gram-ritz"
    if amb and warn:
        warnings.warn(
            f"rank decision ambiguous: singular values {gap} near threshold {thr:.3e}",
            RankAmbiguityWarning,
            stacklevel=2,
        )
    return RankResult(rank, sigma_max, thr, amb, method, gap)


def nullspace(a, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical nullspace of a dense matrix."""
    a = _dense(a)
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n, dtype=complex)
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    _, s, vh = np.linalg.svd(a, full_matrices=a.shape[0] < n)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(n, dtype=complex)
    rank = int(np.count_nonzero(s > rtol * s[0]))
    return vh[rank:].conj().T


def orthonormal_span(vectors: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) of the column span of ``vectors``.

    The rank comes from singular values; the basis itself from column-pivoted
    QR, so it is reproducible and built from the best-conditioned columns.
    """
    vectors = np.asarray(vectors, dtype=complex)
    if vectors.size == 0:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    s = np.linalg.svd(vectors, compute_uv=False)
    if s[0] == 0.0:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    rank = int(np.count_nonzero(s > rtol * s[0]))
    q, _, _ = scipy.linalg.qr(vectors, mode="economic", pivoting=True)
    return q[:, :rank]


def opnorm(x: np.ndarray) -> float:
    """Operator 2-norm; 0 for empty matrices."""
    x = np.asarray(x)
    if x.size == 0:
        return 0.0
    return float(np.linalg.norm(x, 2))
