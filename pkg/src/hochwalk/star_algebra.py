"""Finite-dimensional algebras, concretely as spans of complex matrices.

A :class:`FiniteAlgebra` only knows its structure constants and unit, which is
all the Hochschild machinery needs.  A :class:`StarAlgebra` is a unital
*-closed span of d x d matrices with a basis orthonormal for the trace inner
product ``<a, b> = Tr(a* b)``; coefficients are then plain inner products.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from hochwalk.linalg import RANK_RTOL, nullspace, orthonormal_span


class AlgebraError(ValueError):
    pass


class FiniteAlgebra:
    """Algebra given by structure constants ``B_i B_j = sum_k c[i, j, k] B_k``."""

    def __init__(self, structure: np.ndarray, unit: np.ndarray, name: str = ""):
        structure = np.asarray(structure, dtype=complex)
        m = structure.shape[0]
        if structure.shape != (m, m, m):
            raise AlgebraError(f"structure constants must be (m, m, m), got {structure.shape}")
        self.structure = structure
        self.unit_coeffs = np.asarray(unit, dtype=complex)
        self.name = name
        self.structure.flags.writeable = False
        self.unit_coeffs.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.structure.shape[0]

    @property
    def has_star(self) -> bool:
        return False

    def left_matrices(self) -> np.ndarray:
        """``out[i]`` is the matrix of ``y -> B_i y`` on coefficients."""
        return np.transpose(self.structure, (0, 2, 1))

    def right_matrices(self) -> np.ndarray:
        """``out[i]`` is the matrix of ``y -> y B_i`` on coefficients."""
        return np.transpose(self.structure, (1, 2, 0))

    def product_coeffs(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.einsum("i,j,ijk->k", a, b, self.structure)

    def unit(self) -> "AlgebraElement":
        return AlgebraElement(self, self.unit_coeffs.copy())

    def element(self, coeffs) -> "AlgebraElement":
        return AlgebraElement(self, np.asarray(coeffs, dtype=complex))

    def basis_element(self, i: int) -> "AlgebraElement":
        c = np.zeros(self.dim, dtype=complex)
        c[i] = 1.0
        return AlgebraElement(self, c)

    def associativity_defect(self) -> float:
        c = self.structure
        lhs = np.einsum("ijs,skt->ijkt", c, c)
        rhs = np.einsum("jks,ist->ijkt", c, c)
        return float(np.abs(lhs - rhs).max()) if c.size else 0.0


class StarAlgebra(FiniteAlgebra):
    """Unital *-subalgebra of M_d with a trace-orthonormal basis."""

    def __init__(self, basis: np.ndarray, tol: float = 1e-10, name: str = ""):
        basis = np.asarray(basis, dtype=complex)
        if basis.ndim != 3 or basis.shape[1] != basis.shape[2]:
            raise AlgebraError("basis must be a stack of square matrices")
        m, d, _ = basis.shape
        gram = np.einsum("iab,jab->ij", basis.conj(), basis)
        if np.abs(gram - np.eye(m)).max() > tol:
            raise AlgebraError("basis is not orthonormal for the trace inner product")
        self.basis = basis
        self.basis.flags.writeable = False
        self.tol = tol

        prods = np.einsum("iab,jbc->ijac", basis, basis)
        structure = self._coords_of(prods)
        res = prods - np.einsum("ijk,kab->ijab", structure, basis)
        if res.size and np.abs(res).max() > tol:
            raise AlgebraError(f"span not closed under products (residual {np.abs(res).max():.2e})")

        stars = np.conj(np.transpose(basis, (0, 2, 1)))
        self.star_table = self._coords_of(stars)
        res = stars - np.einsum("ik,kab->iab", self.star_table, basis)
        if np.abs(res).max() > tol:
            raise AlgebraError(f"span not closed under adjoints (residual {np.abs(res).max():.2e})")
        self.star_table.flags.writeable = False

        eye = np.eye(d, dtype=complex)
        unit = self._coords_of(eye)
        if np.abs(eye - np.einsum("k,kab->ab", unit, basis)).max() > tol:
            raise AlgebraError("identity matrix is not in the span")
        super().__init__(structure, unit, name=name)

    @classmethod
    def from_span(cls, matrices, tol: float = 1e-10, name: str = "") -> "StarAlgebra":
        """Orthonormalize an arbitrary spanning set first (keeps it if already orthonormal)."""
        matrices = np.asarray(matrices, dtype=complex)
        m, d, _ = matrices.shape
        gram = np.einsum("iab,jab->ij", matrices.conj(), matrices)
        if gram.shape == (m, m) and np.abs(gram - np.eye(m)).max() <= 1e-12:
            return cls(matrices, tol=tol, name=name)
        q = orthonormal_span(matrices.reshape(m, d * d).T)
        return cls(q.T.reshape(-1, d, d), tol=tol, name=name)

    @property
    def d(self) -> int:
        return self.basis.shape[1]

    @property
    def has_star(self) -> bool:
        return True

    def _coords_of(self, mats: np.ndarray) -> np.ndarray:
        return np.einsum("kab,...ab->...k", self.basis.conj(), mats)

    def coords(self, matrix, check: bool = True) -> np.ndarray:
        """Coefficients of a matrix in the basis; raises if it is not in the span."""
        matrix = np.asarray(matrix, dtype=complex)
        c = self._coords_of(matrix)
        if check:
            res = np.abs(matrix - np.einsum("...k,kab->...ab", c, self.basis)).max()
            scale = max(1.0, float(np.abs(matrix).max()))
            if res > self.tol * scale:
                raise AlgebraError(f"matrix not in the algebra (residual {res:.2e})")
        return c

    def matrix(self, coeffs) -> np.ndarray:
        return np.einsum("...k,kab->...ab", np.asarray(coeffs, dtype=complex), self.basis)

    def element(self, value) -> "AlgebraElement":
        value = np.asarray(value, dtype=complex)
        if value.ndim == 2:
            return AlgebraElement(self, self.coords(value))
        return AlgebraElement(self, value)

    def star_coeffs(self, a: np.ndarray) -> np.ndarray:
        return np.conj(a) @ self.star_table

    def contains(self, matrix, tol: float | None = None) -> float:
        """Membership residual of a d x d matrix."""
        matrix = np.asarray(matrix, dtype=complex)
        c = self._coords_of(matrix)
        return float(np.abs(matrix - self.matrix(c)).max())

    def random_element(self, rng: np.random.Generator) -> "AlgebraElement":
        c = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        return AlgebraElement(self, c)


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    algebra: FiniteAlgebra
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.coeffs.shape != (self.algebra.dim,):
            raise AlgebraError(
                f"coefficient vector has length {self.coeffs.shape}, algebra dim {self.algebra.dim}"
            )

    def _check(self, other: "AlgebraElement"):
        if other.algebra is not self.algebra:
            raise AlgebraError("elements belong to different algebras")

    @property
    def matrix(self) -> np.ndarray:
        if not isinstance(self.algebra, StarAlgebra):
            raise AlgebraError("algebra has no matrix realization")
        return self.algebra.matrix(self.coeffs)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return multiply(self, other)
        return AlgebraElement(self.algebra, self.coeffs * other)

    def __rmul__(self, scalar):
        return AlgebraElement(self.algebra, self.coeffs * scalar)

    def __add__(self, other: "AlgebraElement"):
        self._check(other)
        return AlgebraElement(self.algebra, self.coeffs + other.coeffs)

    def __sub__(self, other: "AlgebraElement"):
        self._check(other)
        return AlgebraElement(self.algebra, self.coeffs - other.coeffs)

    def __neg__(self):
        return AlgebraElement(self.algebra, -self.coeffs)

    def adjoint(self) -> "AlgebraElement":
        return adjoint(self)

    def allclose(self, other: "AlgebraElement", atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.abs(self.coeffs - other.coeffs).max(initial=0.0) <= atol)


def multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    a._check(b)
    return AlgebraElement(a.algebra, a.algebra.product_coeffs(a.coeffs, b.coeffs))


def adjoint(a: AlgebraElement) -> AlgebraElement:
    if not a.algebra.has_star:
        raise AlgebraError("algebra has no star operation")
    return AlgebraElement(a.algebra, a.algebra.star_coeffs(a.coeffs))


def unit(alg: FiniteAlgebra) -> AlgebraElement:
    return alg.unit()


def build_algebra(generators, tol: float = 1e-10, name: str = "") -> StarAlgebra:
    """Smallest unital *-closed span containing the generators."""
    gens = [np.asarray(g, dtype=complex) for g in generators]
    if not gens:
        raise AlgebraError("need at least one generator")
    for g in gens:
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise AlgebraError(f"generator of shape {g.shape} is not square")
    d = gens[0].shape[0]
    if any(g.shape != (d, d) for g in gens):
        raise AlgebraError("generators have different sizes")

    def span(mats):
        q = orthonormal_span(np.stack(mats).reshape(len(mats), d * d).T, rtol=RANK_RTOL)
        return list(q.T.reshape(-1, d, d))

    current = span([np.eye(d, dtype=complex)] + gens + [g.conj().T for g in gens])
    while True:
        if len(current) > d * d:
            raise AlgebraError(f"span dimension {len(current)} exceeds d^2 = {d * d}")
        cand = list(current)
        cand += [b.conj().T for b in current]
        cand += [a @ b for a in current for b in current]
        grown = span(cand)
        if len(grown) > d * d:
            raise AlgebraError(f"span dimension {len(grown)} exceeds d^2 = {d * d}")
        if len(grown) == len(current):
            break
        current = grown
    alg = StarAlgebra.from_span(np.stack(grown), tol=max(tol, 1e-10), name=name)
    if alg.dim != len(grown):
        raise AlgebraError("closure lost dimension during orthonormalization")
    return alg


def _matrix_units(d: int) -> np.ndarray:
    units = np.zeros((d * d, d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            units[i * d + j, i, j] = 1.0
    return units


def full_matrix(d: int) -> StarAlgebra:
    """M_d with the matrix-unit basis E_ij at index i*d + j."""
    return StarAlgebra(_matrix_units(d), name=f"full_matrix({d})")


def diagonal(n: int) -> StarAlgebra:
    units = np.zeros((n, n, n), dtype=complex)
    for i in range(n):
        units[i, i, i] = 1.0
    return StarAlgebra(units, name=f"diagonal({n})")


def direct_sum(blocks) -> StarAlgebra:
    """Block-diagonal M_{b1} + M_{b2} + ... inside M_{sum b}."""
    blocks = [int(b) for b in blocks]
    d = sum(blocks)
    mats = []
    off = 0
    for b in blocks:
        for u in _matrix_units(b):
            big = np.zeros((d, d), dtype=complex)
            big[off : off + b, off : off + b] = u
            mats.append(big)
        off += b
    return StarAlgebra(np.stack(mats), name="direct_sum(" + ",".join(map(str, blocks)) + ")")


def dual_numbers() -> FiniteAlgebra:
    """C[e]/(e^2) with basis (1, e); not *-closed, for cohomology only."""
    c = np.zeros((2, 2, 2), dtype=complex)
    c[0, 0, 0] = 1.0
    c[0, 1, 1] = 1.0
    c[1, 0, 1] = 1.0
    return FiniteAlgebra(c, np.array([1.0, 0.0]), name="dual_numbers")


def center(alg: FiniteAlgebra) -> list[AlgebraElement]:
    """Basis of {z : z B_i = B_i z for all i}."""
    c = alg.structure
    # rows (i, k), columns j: coefficient of B_k in z_j (B_j B_i - B_i B_j)
    comm = np.transpose(c, (1, 2, 0)) - np.transpose(c, (0, 2, 1))
    ns = nullspace(comm.reshape(alg.dim * alg.dim, alg.dim))
    return [AlgebraElement(alg, ns[:, k]) for k in range(ns.shape[1])]
