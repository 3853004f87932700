"""Hochschild cochain complex C^n(A, N) for n <= 2 (plus degree-3 evaluation).

Sign convention (matches the inductive construction of walk coefficients)::

    (d n)(x)          = x.n - n.x
    (d f)(x, y)       = f(xy) - x.f(y) - f(x).y
    (d phi)(x, y, z)  = x.phi(y, z) - phi(xy, z) + phi(x, yz) - phi(x, y).z

A degree-n cochain is stored as a dense tensor of shape (p, m, ..., m); its
flattened C-order index is the row/column index of the coboundary matrices,
which are assembled as scipy sparse matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse

from hochwalk.bimodule import Bimodule
from hochwalk.linalg import RANK_RTOL, RankResult, numerical_rank

MAX_DEGREE = 2


class CoboundaryObstruction(ArithmeticError):
    """The coboundary equation d theta = phi has no solution within tolerance."""

    def __init__(self, residual: float, h2_dim: int | None, message: str = ""):
        self.residual = residual
        self.h2_dim = h2_dim
        super().__init__(message or f"d theta = phi not solvable: residual {residual:.3e}, dim H^2 = {h2_dim}")


@dataclass(frozen=True, eq=False)
class Cochain:
    degree: int
    module: Bimodule
    tensor: np.ndarray

    def __post_init__(self):
        m, p = self.module.algebra.dim, self.module.dim
        expected = (p,) + (m,) * self.degree
        t = np.asarray(self.tensor, dtype=complex)
        if t.shape != expected:
            raise ValueError(f"degree-{self.degree} cochain needs shape {expected}, got {t.shape}")
        object.__setattr__(self, "tensor", t)

    @classmethod
    def zeros(cls, degree: int, module: Bimodule) -> "Cochain":
        m, p = module.algebra.dim, module.dim
        return cls(degree, module, np.zeros((p,) + (m,) * degree, dtype=complex))

    @classmethod
    def random(cls, degree: int, module: Bimodule, rng: np.random.Generator) -> "Cochain":
        m, p = module.algebra.dim, module.dim
        shape = (p,) + (m,) * degree
        return cls(degree, module, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

    def __call__(self, *args) -> np.ndarray:
        """Evaluate on algebra coefficient vectors (multilinear)."""
        if len(args) != self.degree:
            raise TypeError(f"expected {self.degree} arguments")
        out = self.tensor
        for a in args:
            coeffs = np.asarray(getattr(a, "coeffs", a), dtype=complex)
            out = np.tensordot(out, coeffs, axes=([1], [0]))
        return out

    def __add__(self, other: "Cochain") -> "Cochain":
        self._check(other)
        return Cochain(self.degree, self.module, self.tensor + other.tensor)

    def __sub__(self, other: "Cochain") -> "Cochain":
        self._check(other)
        return Cochain(self.degree, self.module, self.tensor - other.tensor)

    def __mul__(self, scalar) -> "Cochain":
        return Cochain(self.degree, self.module, self.tensor * scalar)

    __rmul__ = __mul__

    def _check(self, other: "Cochain"):
        if other.module is not self.module or other.degree != self.degree:
            raise ValueError("cochains live in different spaces")


def _evaluate(f: Cochain) -> np.ndarray:
    """Coboundary by direct tensor contraction."""
    N = f.module
    c = N.algebra.structure
    L, R = N.left, N.right
    t = f.tensor
    if f.degree == 0:
        return np.einsum("iab,b->ai", L, t) - np.einsum("iab,b->ai", R, t)
    if f.degree == 1:
        return (
            np.einsum("ijs,as->aij", c, t)
            - np.einsum("iab,bj->aij", L, t)
            - np.einsum("jab,bi->aij", R, t)
        )
    if f.degree == 2:
        return (
            np.einsum("iab,bjk->aijk", L, t)
            - np.einsum("ijs,ask->aijk", c, t)
            + np.einsum("jks,ais->aijk", c, t)
            - np.einsum("kab,bij->aijk", R, t)
        )
    raise ValueError(f"coboundary of degree {f.degree} is not supported (max {MAX_DEGREE})")


def coboundary(f: Cochain) -> Cochain:
    if f.degree > MAX_DEGREE or f.degree < 0:
        raise ValueError(f"coboundary of degree {f.degree} is not supported (max {MAX_DEGREE})")
    return Cochain(f.degree + 1, f.module, _evaluate(f))


def _coo(rows, cols, vals, shape):
    rows, cols, vals = (np.concatenate(x) for x in (rows, cols, vals))
    keep = vals != 0
    return scipy.sparse.coo_matrix((vals[keep], (rows[keep], cols[keep])), shape=shape).tocsr()


def _assemble(N: Bimodule, n: int) -> scipy.sparse.csr_matrix:
    m, p = N.algebra.dim, N.dim
    c = N.algebra.structure
    L, R = N.left, N.right
    shape = (p * m ** (n + 1), p * m**n)
    if shape[0] == 0 or shape[1] == 0:
        return scipy.sparse.csr_matrix(shape, dtype=complex)
    rows, cols, vals = [], [], []

    def add(r, cc, v):
        r, cc, v = np.broadcast_arrays(r, cc, v)
        rows.append(r.ravel())
        cols.append(cc.ravel())
        vals.append(v.ravel().astype(complex))

    if n == 0:
        a, i, b = np.ix_(range(p), range(m), range(p))
        add(a * m + i, b, L[i, a, b] - R[i, a, b])
    elif n == 1:
        a, i, j, s = np.ix_(range(p), range(m), range(m), range(m))
        add((a * m + i) * m + j, a * m + s, c[i, j, s])
        a, i, j, b = np.ix_(range(p), range(m), range(m), range(p))
        add((a * m + i) * m + j, b * m + j, -L[i, a, b])
        add((a * m + i) * m + j, b * m + i, -R[j, a, b])
    elif n == 2:
        a, i, j, k, b = np.ix_(range(p), range(m), range(m), range(m), range(p))
        row = ((a * m + i) * m + j) * m + k
        add(row, (b * m + j) * m + k, L[i, a, b])
        add(row, (b * m + i) * m + j, -R[k, a, b])
        # structure constants are sparse for the usual bases: loop over nonzeros
        for (x, y, s) in zip(*np.nonzero(c)):
            av = np.arange(p)[:, None]
            z = np.arange(m)[None, :]
            # -phi(B_x B_y, B_z) at rows (a, x, y, z)
            add(((av * m + x) * m + y) * m + z, (av * m + s) * m + z, -c[x, y, s])
            # +phi(B_z, B_x B_y) at rows (a, z, x, y)
            add(((av * m + z) * m + x) * m + y, (av * m + z) * m + s, c[x, y, s])
    else:
        raise ValueError(f"coboundary of degree {n} is not supported (max {MAX_DEGREE})")
    return _coo(rows, cols, vals, shape)


def coboundary_matrix(N: Bimodule, n: int) -> scipy.sparse.csr_matrix:
    """Sparse matrix of d: C^n(A, N) -> C^{n+1}(A, N); cached on the bimodule."""
    if n < 0 or n > MAX_DEGREE:
        raise ValueError(f"coboundary of degree {n} is not supported (max {MAX_DEGREE})")
    key = ("coboundary", n)
    if key not in N._cache:
        N._cache[key] = _assemble(N, n)
    return N._cache[key]


def _svd(N: Bimodule, n: int):
    """Thin SVD of dense d_n truncated at the rank threshold; cached."""
    key = ("svd", n)
    if key not in N._cache:
        D = coboundary_matrix(N, n).toarray()
        u, s, vh = np.linalg.svd(D, full_matrices=False)
        if s.size and s[0] > 0:
            keep = s > RANK_RTOL * s[0]
        else:
            keep = np.zeros(s.shape, bool)
        N._cache[key] = (u[:, keep], s[keep], vh[keep])
    return N._cache[key]


def _rank(N: Bimodule, n: int) -> RankResult:
    key = ("rank", n)
    if key not in N._cache:
        # im d_{n-1} lies in ker d_n; it seeds the large-matrix certificate
        hint = _svd(N, n - 1)[0] if n > 0 else None
        N._cache[key] = numerical_rank(coboundary_matrix(N, n), rtol=RANK_RTOL, null_hint=hint)
    return N._cache[key]


@dataclass(frozen=True)
class CohomologyRow:
    degree: int
    dim_cochains: int
    rank: int
    dim_kernel: int
    dim_cohomology: int
    ambiguous: bool


def cohomology_row(N: Bimodule, n: int) -> CohomologyRow:
    if n < 0 or n > MAX_DEGREE:
        raise ValueError(f"cohomology in degree {n} is not supported (max {MAX_DEGREE})")
    m, p = N.algebra.dim, N.dim
    dim_c = p * m**n
    r = _rank(N, n)
    prev = _rank(N, n - 1) if n > 0 else None
    ker = dim_c - r.rank
    h = ker - (prev.rank if prev else 0)
    return CohomologyRow(n, dim_c, r.rank, ker, h, r.ambiguous or bool(prev and prev.ambiguous))


def cohomology_dim(alg, N: Bimodule, n: int) -> int:
    """dim H^n(A, N) = dim ker d_n - rank d_{n-1}."""
    if N.algebra is not alg:
        raise ValueError("bimodule is over a different algebra")
    return cohomology_row(N, n).dim_cohomology


def cohomology_table(N: Bimodule, degrees=(0, 1, 2)) -> list[CohomologyRow]:
    return [cohomology_row(N, n) for n in degrees]


def _tuple_norms(tensor: np.ndarray) -> np.ndarray:
    """Norm of the module coordinates at every argument tuple."""
    return np.sqrt(np.sum(np.abs(tensor) ** 2, axis=0))


def is_cocycle(phi: Cochain, tol: float = 1e-9) -> tuple[bool, float]:
    if phi.degree > MAX_DEGREE:
        raise ValueError("cocycle test needs degree <= 2")
    d = _evaluate(phi)
    residual = float(_tuple_norms(d).max(initial=0.0))
    return residual <= tol, residual


def solve_coboundary(phi: Cochain, tol: float = 1e-9) -> Cochain:
    """Minimum-norm theta with d theta = phi.

    Raises :class:`CoboundaryObstruction` when the residual exceeds ``tol``.
    """
    if phi.degree != 2:
        raise ValueError("solve_coboundary expects a 2-cochain")
    N = phi.module
    m, p = N.algebra.dim, N.dim
    if p == 0:
        return Cochain.zeros(1, N)
    u, s, vh = _svd(N, 1)
    rhs = phi.tensor.reshape(-1)
    x = vh.conj().T @ ((u.conj().T @ rhs) / s)
    theta = Cochain(1, N, x.reshape(p, m))
    residual = float(_tuple_norms(_evaluate(theta) - phi.tensor).max(initial=0.0))
    if residual > tol:
        raise CoboundaryObstruction(residual, cohomology_dim(N.algebra, N, 2))
    return theta


def solve_residual(theta: Cochain, phi: Cochain) -> float:
    return float(_tuple_norms(_evaluate(theta) - phi.tensor).max(initial=0.0))
