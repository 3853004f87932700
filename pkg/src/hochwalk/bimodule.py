"""Bimodules, the GNS bimodule of a Lindblad generator, and E_L = B^a(A + M).

Concrete conventions
--------------------
* ``h = C^d`` and ``h (x) k`` is stored block-stacked: a vector of length
  ``d * nk`` is ``nk`` consecutive copies of ``h``.  So ``pi(x) = kron(1_k, x)``
  and ``delta(x)`` is the vertical stack of ``x L_i - L_i x``.
* M sits inside B(h, h (x) k) with a basis orthonormal for ``Tr(xi* eta)``.
* E_L is realized on the coefficient space of ``A (+) M`` (dimension m + p).
  Both summands carry trace-orthonormal coordinates, so the module adjoint of
  an element of E_L is its conjugate transpose.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from hochwalk.linalg import RANK_RTOL, nullspace, opnorm, orthonormal_span
from hochwalk.star_algebra import AlgebraElement, AlgebraError, FiniteAlgebra, StarAlgebra

CORNERS = ("00", "01", "10", "11")
DAGGER_CORNER = {"00": "00", "01": "10", "10": "01", "11": "11"}


class ModuleError(ValueError):
    pass


class Bimodule:
    """Finite-dimensional A-A bimodule given by action matrices on coordinates.

    ``left[i] @ n`` are the coordinates of ``B_i . n`` and ``right[i] @ n`` those
    of ``n . B_i``.
    """

    def __init__(self, algebra: FiniteAlgebra, left, right, name: str = "", el=None, corner=None):
        self.algebra = algebra
        self.left = np.asarray(left, dtype=complex)
        self.right = np.asarray(right, dtype=complex)
        m = algebra.dim
        p = self.left.shape[1] if self.left.ndim == 3 else 0
        if self.left.shape != (m, p, p) or self.right.shape != (m, p, p):
            raise ModuleError(f"action tensors must be ({m}, p, p)")
        self.name = name
        self.el = el
        self.corner = corner
        self._cache: dict = {}

    @property
    def dim(self) -> int:
        return self.left.shape[1]

    @classmethod
    def regular(cls, algebra: FiniteAlgebra) -> "Bimodule":
        return cls(algebra, algebra.left_matrices(), algebra.right_matrices(), name="A")

    def axiom_residuals(self) -> dict[str, float]:
        c = self.algebra.structure
        lft, rgt = self.left, self.right
        eye = np.eye(self.dim)
        if self.dim == 0:
            return dict.fromkeys(("left_assoc", "right_assoc", "unit", "commute"), 0.0)
        # (B_i B_j).n = B_i.(B_j.n)
        la = np.einsum("ijk,kab->ijab", c, lft) - np.einsum("iab,jbc->ijac", lft, lft)
        # n.(B_i B_j) = (n.B_i).B_j
        ra = np.einsum("ijk,kab->ijab", c, rgt) - np.einsum("jab,ibc->ijac", rgt, rgt)
        u = self.algebra.unit_coeffs
        unit = max(
            np.abs(np.einsum("k,kab->ab", u, lft) - eye).max(),
            np.abs(np.einsum("k,kab->ab", u, rgt) - eye).max(),
        )
        comm = np.einsum("iab,jbc->ijac", lft, rgt) - np.einsum("jab,ibc->ijac", rgt, lft)
        return {
            "left_assoc": float(np.abs(la).max()),
            "right_assoc": float(np.abs(ra).max()),
            "unit": float(unit),
            "commute": float(np.abs(comm).max()),
        }


class LindbladGenerator:
    """L(x) = sum_i L_i* x L_i + G* x + x G with G = -iH - 1/2 sum_i L_i* L_i."""

    def __init__(self, H, lindblad_ops, tol: float = 1e-12):
        H = np.asarray(H, dtype=complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValueError("H must be a square matrix")
        d = H.shape[0]
        if np.abs(H - H.conj().T).max(initial=0.0) > tol:
            raise ValueError("H is not Hermitian")
        ops = np.asarray(lindblad_ops, dtype=complex).reshape(-1, d, d) if len(lindblad_ops) else np.zeros((0, d, d), complex)
        for op in lindblad_ops:
            if np.asarray(op).shape != (d, d):
                raise ValueError(f"Lindblad operator of shape {np.asarray(op).shape}, expected {(d, d)}")
        self.H = H
        self.ops = ops
        self.G = -1j * H - 0.5 * np.einsum("iba,ibc->ac", ops.conj(), ops)
        self.tol = tol

    @property
    def d(self) -> int:
        return self.H.shape[0]

    @property
    def nk(self) -> int:
        return self.ops.shape[0]

    def apply(self, x: np.ndarray) -> np.ndarray:
        """L on d x d matrices (stacks allowed)."""
        x = np.asarray(x, dtype=complex)
        lx = np.einsum("iba,...bc,icd->...ad", self.ops.conj(), x, self.ops)
        return lx + self.G.conj().T @ x + x @ self.G

    def superoperator(self, alg: StarAlgebra, tol: float = 1e-10) -> np.ndarray:
        """Matrix of L on algebra coefficients; raises if L does not preserve A."""
        images = self.apply(alg.basis)
        res = max(alg.contains(img) for img in images)
        if res > tol:
            raise AlgebraError(f"generator does not map the algebra into itself (residual {res:.2e})")
        return alg.coords(images, check=False).T

    def delta(self, x: np.ndarray) -> np.ndarray:
        """Stacked (x L_i - L_i x)_i, shape (..., nk*d, d)."""
        x = np.asarray(x, dtype=complex)
        blocks = np.einsum("...ab,ibc->...iac", x, self.ops) - np.einsum("iab,...bc->...iac", self.ops, x)
        return blocks.reshape(*x.shape[:-2], self.nk * self.d, self.d)

    def pi(self, x: np.ndarray) -> np.ndarray:
        return np.kron(np.eye(self.nk), np.asarray(x, dtype=complex))


def lindblad_apply(gen: LindbladGenerator, x: AlgebraElement) -> AlgebraElement:
    alg = x.algebra
    return AlgebraElement(alg, alg.coords(gen.apply(x.matrix)))


def dagger_map(x: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(x, -1, -2))


@dataclass(eq=False)
class GnsData:
    algebra: StarAlgebra
    generator: LindbladGenerator
    M_basis: np.ndarray  # (p, nk*d, d), trace-orthonormal
    delta_tensor: np.ndarray  # (p, m): coords of delta(B_j)
    pi_tensor: np.ndarray  # (m, p, p): pi(B_i) on M coords
    right_tensor: np.ndarray  # (m, p, p): right multiplication by B_i on M coords
    L_matrix: np.ndarray = field(repr=False)  # (m, m): generator on A coords

    @property
    def nk(self) -> int:
        return self.generator.nk

    @property
    def dim(self) -> int:
        return self.M_basis.shape[0]

    def m_coords(self, xi: np.ndarray, check: bool = True) -> np.ndarray:
        xi = np.asarray(xi, dtype=complex)
        c = np.einsum("kab,...ab->...k", self.M_basis.conj(), xi)
        if check and self.dim:
            res = np.abs(xi - np.einsum("...k,kab->...ab", c, self.M_basis)).max()
            if res > 1e-10 * max(1.0, np.abs(xi).max()):
                raise ModuleError(f"matrix not in M (residual {res:.2e})")
        return c

    def m_matrix(self, coeffs) -> np.ndarray:
        return np.einsum("...k,kab->...ab", np.asarray(coeffs, dtype=complex), self.M_basis)

    def delta(self, x: AlgebraElement) -> np.ndarray:
        return self.generator.delta(x.matrix)

    def delta_dagger(self, x: AlgebraElement) -> np.ndarray:
        """delta^dagger(x) = delta(x*)*, a d x (nk d) matrix."""
        return dagger_map(self.generator.delta(x.adjoint().matrix))

    def pi(self, x: AlgebraElement) -> np.ndarray:
        return self.generator.pi(x.matrix)

    def inner(self, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        """A-valued inner product xi* eta."""
        return dagger_map(xi) @ eta

    def module(self) -> Bimodule:
        return Bimodule(self.algebra, self.pi_tensor, self.right_tensor, name="M")

    def invariant_residuals(self) -> dict[str, float]:
        alg, gen = self.algebra, self.generator
        B = alg.basis
        out: dict[str, float] = {}
        if self.dim:
            # M = span delta(A) A
            cand = np.einsum("jab,lbc->jlac", gen.delta(B), B).reshape(-1, *self.M_basis.shape[1:])
            rec = self.m_matrix(self.m_coords(cand, check=False))
            out["span"] = float(np.abs(cand - rec).max())
            pim = np.einsum("iab,kbc->ikac", np.stack([gen.pi(b) for b in B]), self.M_basis)
            out["pi_closure"] = float(np.abs(pim - self.m_matrix(self.m_coords(pim, check=False))).max())
            mr = np.einsum("kab,ibc->kiac", self.M_basis, B)
            out["right_closure"] = float(np.abs(mr - self.m_matrix(self.m_coords(mr, check=False))).max())
        else:
            out.update(span=0.0, pi_closure=0.0, right_closure=0.0)
        dB = gen.delta(B)
        prods = np.einsum("iab,jbc->ijac", B, B)
        lhs = gen.delta(prods)
        pis = np.stack([gen.pi(b) for b in B])
        rhs = np.einsum("iab,jbc->ijac", pis, dB) + np.einsum("iab,jbc->ijac", dB, B)
        out["derivation"] = float(np.abs(lhs - rhs).max(initial=0.0))
        out["gns_identity"] = max(
            gns_defect(self, gen, alg.basis_element(i), alg.basis_element(j))
            for i in range(alg.dim)
            for j in range(alg.dim)
        )
        return out


def build_gns(alg: StarAlgebra, gen: LindbladGenerator, tol: float = 1e-10) -> GnsData:
    if gen.d != alg.d:
        raise ModuleError(f"generator acts on C^{gen.d}, algebra on C^{alg.d}")
    L_matrix = gen.superoperator(alg, tol=tol)
    B = alg.basis
    d, nk, m = alg.d, gen.nk, alg.dim
    cand = np.einsum("jab,lbc->jlac", gen.delta(B), B).reshape(m * m, nk * d * d)
    if cand.size and np.abs(cand).max() > 0:
        q = orthonormal_span(cand.T, rtol=RANK_RTOL)
    else:
        q = np.zeros((nk * d * d, 0), dtype=complex)
    M_basis = q.T.reshape(-1, nk * d, d)
    p = M_basis.shape[0]

    def coords(x):
        return np.einsum("kab,...ab->...k", M_basis.conj(), x)

    delta_tensor = coords(gen.delta(B)).T if p else np.zeros((0, m), complex)
    pis = np.stack([gen.pi(b) for b in B])
    pi_tensor = np.transpose(coords(np.einsum("iab,kbc->ikac", pis, M_basis)), (0, 2, 1))
    right_tensor = np.transpose(coords(np.einsum("kab,ibc->ikac", M_basis, B)), (0, 2, 1))
    gns = GnsData(alg, gen, M_basis, delta_tensor, pi_tensor.reshape(m, p, p), right_tensor.reshape(m, p, p), L_matrix)
    res = gns.invariant_residuals()
    bad = {k: v for k, v in res.items() if v > tol}
    if bad:
        raise ModuleError(f"GNS invariants violated: {bad}")
    return gns


def gns_defect(gns: GnsData, gen: LindbladGenerator, x: AlgebraElement, y: AlgebraElement) -> float:
    """|| L(xy) - x L(y) - L(x) y - delta^dagger(x) delta(y) || in operator norm."""
    X, Y = x.matrix, y.matrix
    lhs = gen.apply(X @ Y) - X @ gen.apply(Y) - gen.apply(X) @ Y
    rhs = dagger_map(gen.delta(dagger_map(X))) @ gen.delta(Y)
    return opnorm(lhs - rhs)


def _block(D0: int, D: int, corner: str, blk: np.ndarray) -> np.ndarray:
    """Place stacked blocks into ambient (.., D, D) matrices."""
    out = np.zeros(blk.shape[:-2] + (D, D), dtype=complex)
    r = slice(0, D0) if corner[0] == "0" else slice(D0, D)
    c = slice(0, D0) if corner[1] == "0" else slice(D0, D)
    out[..., r, c] = blk
    return out


def _orthonormalize(mats: np.ndarray) -> np.ndarray:
    n = mats.shape[0]
    if n == 0:
        return mats
    shape = mats.shape[1:]
    q = orthonormal_span(mats.reshape(n, -1).T)
    return q.T.reshape(-1, *shape)


def _frobenius_coords(E: np.ndarray, X: np.ndarray) -> np.ndarray:
    """out[i, q, r] = <E_q, X[i, r]> in the Frobenius inner product."""
    q = E.shape[0]
    if q == 0:
        return np.zeros((X.shape[0], 0, 0), dtype=complex)
    flat = X.reshape(-1, E.shape[1] * E.shape[2])
    return (flat @ E.reshape(q, -1).conj().T).reshape(X.shape[0], X.shape[1], q).transpose(0, 2, 1)


def _commutant_dim(r_out: np.ndarray, r_in: np.ndarray) -> int:
    """dim of {X : X r_in[l] = r_out[l] X for all l} (X: out x in)."""
    m, a, _ = r_out.shape
    b = r_in.shape[1]
    if a == 0 or b == 0:
        return 0
    # row-major vec: vec(X R) = (I kron R^T) vec X, vec(R X) = (R kron I) vec X
    eqs = [np.kron(np.eye(a), r_in[l].T) - np.kron(r_out[l], np.eye(b)) for l in range(m)]
    return nullspace(np.vstack(eqs)).shape[1]


class ELModule:
    """E_L = B^a(A (+) M) as right-A-linear maps on the coordinates of A (+) M.

    Corner ``"rc"`` is the block mapping summand c into summand r (0 = A,
    1 = M), so ``"10"`` holds M, ``"01"`` holds M* and ``"11"`` holds B^a(M).
    Each corner has a basis orthonormal in the Frobenius inner product of the
    ambient (m+p) x (m+p) matrices.
    """

    def __init__(self, gns: GnsData, tol: float = 1e-10):
        self.gns = gns
        alg = gns.algebra
        self.algebra = alg
        m, p = alg.dim, gns.dim
        self.m, self.p = m, p
        D = m + p
        self.D = D
        LA, RA = alg.left_matrices(), alg.right_matrices()
        P, RM = gns.pi_tensor, gns.right_tensor
        self.left_ambient = _block(m, D, "00", LA) + _block(m, D, "11", P)
        self.right_ambient = _block(m, D, "00", RA) + _block(m, D, "11", RM)

        bases: dict[str, np.ndarray] = {}
        bases["00"] = _orthonormalize(_block(m, D, "00", LA))
        # xi_j as the map b -> xi_j b, column l = coords of xi_j B_l
        k10 = np.transpose(RM, (2, 1, 0))  # [j, :, l] = RM[l][:, j]
        bases["10"] = _orthonormalize(_block(m, D, "10", k10))
        bases["01"] = dagger_map(bases["10"])
        if p:
            ns = nullspace(np.vstack([np.kron(np.eye(p), RM[l].T) - np.kron(RM[l], np.eye(p)) for l in range(m)]))
            bases["11"] = _block(m, D, "11", ns.T.reshape(-1, p, p))
        else:
            bases["11"] = np.zeros((0, D, D), dtype=complex)
        self.bases = bases

        # every right-linear map between summands is accounted for by the corners
        blocks = {"00": (RA, RA), "01": (RA, RM), "10": (RM, RA), "11": (RM, RM)}
        for c, (ro, ri) in blocks.items():
            full = _commutant_dim(ro, ri) if ro.shape[1] and ri.shape[1] else 0
            if full != bases[c].shape[0]:
                raise ModuleError(f"corner {c}: {bases[c].shape[0]} basis maps but {full} right-linear maps")

        self.corners: dict[str, Bimodule] = {}
        for c in CORNERS:
            E = bases[c]
            lft = _frobenius_coords(E, self.left_ambient[:, None] @ E[None])
            rgt = _frobenius_coords(E, E[None] @ self.left_ambient[:, None])
            self.corners[c] = Bimodule(alg, lft, rgt, name=f"E_L[{c}]", el=self, corner=c)
        self._check(tol)

    def _check(self, tol: float):
        for c, E in self.bases.items():
            if E.shape[0] and np.abs(E @ self.right_ambient[:, None] - self.right_ambient[:, None] @ E).max() > tol:
                raise ModuleError(f"corner {c} basis is not right-A-linear")
        res = self.corner11_adjoint_residual()
        if res > tol:
            raise ModuleError(f"corner 11 adjoint is not a module adjoint (residual {res:.2e})")

    def dims(self) -> dict[str, int]:
        return {c: b.shape[0] for c, b in self.bases.items()}

    def corner(self, c: str) -> Bimodule:
        return self.corners[c]

    def embed(self, c: str, coords) -> np.ndarray:
        return np.einsum("...q,qab->...ab", np.asarray(coords, dtype=complex), self.bases[c])

    def project(self, c: str, X) -> np.ndarray:
        return np.einsum("qab,...ab->...q", self.bases[c].conj(), np.asarray(X, dtype=complex))

    def block(self, c: str, X) -> np.ndarray:
        m = self.m
        r = slice(0, m) if c[0] == "0" else slice(m, self.D)
        s = slice(0, m) if c[1] == "0" else slice(m, self.D)
        return np.asarray(X)[..., r, s]

    def pi_tilde(self, x: AlgebraElement) -> np.ndarray:
        return np.einsum("i,iab->ab", x.coeffs, self.left_ambient)

    def act_left(self, x: AlgebraElement, R: np.ndarray) -> np.ndarray:
        return self.pi_tilde(x) @ R

    def act_right(self, R: np.ndarray, x: AlgebraElement) -> np.ndarray:
        return R @ self.pi_tilde(x)

    @staticmethod
    def dagger(R: np.ndarray) -> np.ndarray:
        return dagger_map(R)

    def from_algebra(self, x: AlgebraElement) -> np.ndarray:
        return _block(self.m, self.D, "00", np.einsum("i,iab->ab", x.coeffs, self.algebra.left_matrices()))

    def from_m(self, xi: np.ndarray) -> np.ndarray:
        """Concrete xi in M -> ambient corner-10 element b -> xi b."""
        c = self.gns.m_coords(xi)
        blk = np.einsum("k,lqk->ql", c, self.gns.right_tensor)
        return _block(self.m, self.D, "10", blk)

    def from_m_adjoint(self, xi: np.ndarray) -> np.ndarray:
        return dagger_map(self.from_m(xi))

    def from_operator_on_m(self, T: np.ndarray) -> np.ndarray:
        return _block(self.m, self.D, "11", T)

    def concrete(self, c: str, X: np.ndarray) -> np.ndarray:
        """Ambient corner element -> matrix acting between h and h (x) k.

        00 -> d x d, 10 -> (nk d) x d, 01 -> d x (nk d), 11 -> p x p operator on
        M coordinates (see :meth:`represent_on_hk` for an operator on h (x) k).
        """
        X = np.asarray(X)
        u = self.algebra.unit_coeffs
        if c == "00":
            return self.algebra.matrix(self.block("00", X) @ u)
        if c == "10":
            return self.gns.m_matrix(self.block("10", X) @ u)
        if c == "01":
            return dagger_map(self.gns.m_matrix(self.block("10", dagger_map(X)) @ u))
        return self.block("11", X)

    def represent_on_hk(self, T: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        """Operator X on h (x) k with X xi = T xi on M and X = 0 on the complement.

        Only possible when T acts on M by left multiplication (always the case
        for A = M_d); raises otherwise.
        """
        T = np.asarray(T, dtype=complex)
        nkd = self.gns.nk * self.algebra.d
        if self.p == 0:
            return np.zeros(T.shape[:-2] + (nkd, nkd), dtype=complex)
        xi = np.concatenate(list(self.gns.M_basis), axis=1)  # (nkd, p d)
        images = np.einsum("...kj,kab->...jab", T, self.gns.M_basis)
        Y = np.concatenate([images[..., j, :, :] for j in range(self.p)], axis=-1)
        X = Y @ np.linalg.pinv(xi, rcond=1e-12)
        res = np.abs(X @ xi - Y).max()
        if res > tol * max(1.0, np.abs(Y).max()):
            raise ModuleError(f"B^a(M) element is not a left multiplication on h(x)k (residual {res:.2e})")
        return X

    def m_support_projection(self) -> np.ndarray:
        """Orthogonal projection of h (x) k onto the span of the ranges of M."""
        nkd = self.gns.nk * self.algebra.d
        if self.p == 0:
            return np.zeros((nkd, nkd), dtype=complex)
        q = orthonormal_span(np.concatenate(list(self.gns.M_basis), axis=1))
        return q @ q.conj().T

    def corner11_adjoint_residual(self) -> float:
        """max || <T* xi, eta>_A - <xi, T eta>_A || over corner-11 basis and M basis."""
        if self.p == 0:
            return 0.0
        Ms = self.gns.M_basis
        T = self.block("11", self.bases["11"])
        Th = dagger_map(T)
        lhs = np.einsum("tka,kxy,bxw->tabyw", Th.conj(), Ms.conj(), Ms, optimize=True)
        rhs = np.einsum("axy,tkb,kxw->tabyw", Ms.conj(), T, Ms, optimize=True)
        return float(np.abs(lhs - rhs).max())

    def product_residuals(self, rng: np.random.Generator | None = None) -> dict[str, float]:
        """Corner products land in the expected corner: M M* in 11, M* M in 00, T M in 10."""
        rng = rng or np.random.default_rng(0)
        out = {}
        for a, b in (("10", "01"), ("01", "10"), ("11", "10"), ("01", "11"), ("00", "01"), ("10", "00")):
            target = a[0] + b[1]
            Ea, Eb = self.bases[a], self.bases[b]
            if not (Ea.shape[0] and Eb.shape[0]):
                out[f"{a}*{b}"] = 0.0
                continue
            X = self.embed(a, rng.standard_normal(Ea.shape[0])) @ self.embed(b, rng.standard_normal(Eb.shape[0]))
            out[f"{a}*{b}"] = float(np.abs(X - self.embed(target, self.project(target, X))).max())
        return out


def build_EL(gns: GnsData, tol: float = 1e-10) -> ELModule:
    return ELModule(gns, tol=tol)


def dagger_cochain(psi):
    """psi^dagger(x) = psi(x*)*, moved to the dagger corner of E_L."""
    from hochwalk.hochschild import Cochain

    if psi.degree != 1:
        raise ValueError("dagger is defined here for 1-cochains")
    mod = psi.module
    el = mod.el
    if el is None:
        raise ValueError("cochain is not valued in a corner of E_L")
    alg = el.algebra
    target = DAGGER_CORNER[mod.corner]
    amb = el.embed(mod.corner, psi.tensor.T)  # (m, D, D): psi(B_i)
    # psi(B_i*) = sum_k s_ik psi(B_k)
    at_star = np.einsum("ik,kab->iab", alg.star_table, amb)
    out = el.project(target, dagger_map(at_star)).T
    return Cochain(1, el.corner(target), out)
