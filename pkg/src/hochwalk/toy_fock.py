"""Quantum random walks on the toy Fock space h (x) khat^(x)n.

A slot is ``khat = C Omega (+) k`` with ``dim k = nk``.  Operators on
``h (x) khat`` are stored slot-major: the first ``d`` coordinates are the
vacuum copy of ``h`` and the remaining ``nk * d`` coordinates are ``h (x) k``
in the same stacking used for the GNS module.  A walk on ``n`` slots uses the
index order ``(a_1, ..., a_n, h)``, the most recent slot next to ``h``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from hochwalk.bimodule import LindbladGenerator, dagger_map
from hochwalk.linalg import opnorm
from hochwalk.star_algebra import AlgebraError, StarAlgebra, full_matrix
from hochwalk.walk_coefficients import ThetaFamily, assemble_beta

KINDS = ("00", "01", "10", "11")
DEFAULT_MAX_DIM = 8192  # d * (1 + nk)^n; 2 * 2^12 for a qubit with one channel


class WalkMemoryError(MemoryError):
    pass


@dataclass(frozen=True)
class ToySlot:
    nk: int

    @property
    def dim(self) -> int:
        return 1 + self.nk

    @property
    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v


def _payload_shape(kind: str, d: int, nk: int) -> tuple[int, int]:
    size = {"0": d, "1": nk * d}
    return size[kind[0]], size[kind[1]]


@dataclass(frozen=True, eq=False)
class CompressedN:
    """N^{mu nu}_X: the payload X placed in block (mu, nu) of h (x) khat."""

    kind: str
    X: np.ndarray
    d: int
    nk: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        X = np.asarray(self.X, dtype=complex)
        want = _payload_shape(self.kind, self.d, self.nk)
        if X.shape != want:
            raise ValueError(f"N^{self.kind} payload must be {want}, got {X.shape}")
        object.__setattr__(self, "X", X)

    @property
    def matrix(self) -> np.ndarray:
        d, D = self.d, self.d * (1 + self.nk)
        out = np.zeros((D, D), dtype=complex)
        r = slice(0, d) if self.kind[0] == "0" else slice(d, D)
        c = slice(0, d) if self.kind[1] == "0" else slice(d, D)
        out[r, c] = self.X
        return out

    def adjoint(self) -> "CompressedN":
        return CompressedN(self.kind[::-1], self.X.conj().T, self.d, self.nk)

    def __matmul__(self, other: "CompressedN"):
        """delta_nu^eta N^{mu xi}_{XY}; ``None`` stands for the zero operator."""
        if self.kind[1] != other.kind[0]:
            return None
        return CompressedN(self.kind[0] + other.kind[1], self.X @ other.X, self.d, self.nk)


def n_operator(kind: str, X, d: int, nk: int) -> CompressedN:
    return CompressedN(kind, X, d, nk)


def verify_n_relations(samples: int = 50, d: int = 2, nk: int = 1, rng=None) -> dict[str, float]:
    """Max residuals of the adjoint, product and block-sum relations over random payloads."""
    rng = np.random.default_rng(0) if rng is None else rng
    D = d * (1 + nk)

    def draw(kind):
        shape = _payload_shape(kind, d, nk)
        return n_operator(kind, rng.standard_normal(shape) + 1j * rng.standard_normal(shape), d, nk)

    out = {"adjoint": 0.0, "product": 0.0, "annihilation": 0.0, "block_sum": 0.0}
    for _ in range(samples):
        ops = {k: draw(k) for k in KINDS}
        for k, A in ops.items():
            out["adjoint"] = max(out["adjoint"], np.abs(A.matrix.conj().T - A.adjoint().matrix).max())
            for B in ops.values():
                prod = A.matrix @ B.matrix
                C = A @ B
                if C is None:
                    out["annihilation"] = max(out["annihilation"], np.abs(prod).max())
                else:
                    out["product"] = max(out["product"], np.abs(prod - C.matrix).max())
        S = draw("00").X
        lhs = n_operator("00", S, d, nk).matrix + n_operator("11", np.kron(np.eye(nk), S), d, nk).matrix
        out["block_sum"] = max(out["block_sum"], np.abs(lhs - np.kron(np.eye(1 + nk), S)).max())
        assert lhs.shape == (D, D)
    return {k: float(v) for k, v in out.items()}


@dataclass(eq=False)
class BlockHom:
    """A linear map x -> beta(x) from A into A (x) B(khat), stored on basis elements."""

    algebra: StarAlgebra
    nk: int
    h: float
    images: np.ndarray  # (m, D, D) with D = d (1 + nk)
    kind: str
    unitary: np.ndarray | None = field(default=None, repr=False)

    @property
    def d(self) -> int:
        return self.algebra.d

    @property
    def slot(self) -> ToySlot:
        return ToySlot(self.nk)

    def __call__(self, x) -> np.ndarray:
        coeffs = np.asarray(getattr(x, "coeffs", x), dtype=complex)
        return np.einsum("i,iab->ab", coeffs, self.images)

    def corner(self, kind: str, x) -> np.ndarray:
        d = self.d
        M = self(x)
        r = slice(0, d) if kind[0] == "0" else slice(d, None)
        c = slice(0, d) if kind[1] == "0" else slice(d, None)
        return M[r, c]

    def block_coeffs(self, tol: float = 1e-9) -> np.ndarray:
        """c[i, a, b, k]: algebra coordinates of the (a, b) slot block of beta(B_i)."""
        d, S, m = self.d, 1 + self.nk, self.algebra.dim
        blocks = self.images.reshape(m, S, d, S, d).transpose(0, 1, 3, 2, 4)
        coords = self.algebra.coords(blocks, check=False)
        rec = self.algebra.matrix(coords)
        res = np.abs(rec - blocks).max(initial=0.0)
        if res > tol * max(1.0, np.abs(blocks).max(initial=0.0)):
            raise AlgebraError(f"beta does not take values in A (x) B(khat) (residual {res:.2e})")
        return coords

    def defect(self, x, y) -> float:
        alg = self.algebra
        xc, yc = (np.asarray(getattr(v, "coeffs", v), dtype=complex) for v in (x, y))
        return opnorm(self(alg.product_coeffs(xc, yc)) - self(xc) @ self(yc))


def _pi_full(alg: StarAlgebra, nk: int) -> np.ndarray:
    return np.stack([np.kron(np.eye(nk), b) for b in alg.basis])


def beta_truncated(family: ThetaFamily, h: float, N: int | None = None) -> BlockHom:
    """x -> sum_{mu nu} N^{mu nu}_{beta_mu nu(h)(x)} for the truncated series.

    The leading term of beta_11 is pi(x) on all of h (x) k; higher B^a(M)
    coefficients act on the span of M and vanish on its complement.
    """
    beta = assemble_beta(family, h, N)
    el = family.el
    alg = el.algebra
    gen = family.generator
    nk, d, m = gen.nk, alg.d, alg.dim
    D = d * (1 + nk)
    images = np.zeros((m, D, D), dtype=complex)
    images[:, :d, :d] = el.concrete("00", beta.corners["00"])
    if el.p:
        images[:, d:, :d] = el.concrete("10", beta.corners["10"])
        images[:, :d, d:] = el.concrete("01", beta.corners["01"])
        higher = sum(
            (h ** (n - 1) * family.ambient("11", n) for n in range(2, beta.order + 1)),
            np.zeros((m, el.D, el.D), dtype=complex),
        )
        images[:, d:, d:] = el.represent_on_hk(el.concrete("11", higher))
    images[:, d:, d:] += _pi_full(alg, nk)
    return BlockHom(alg, nk, h, images, kind="truncated")


def unitary_step(gen: LindbladGenerator, h: float) -> np.ndarray:
    """Polar unitary of [[1 + hG, -sqrt(h) L_row^*], [sqrt(h) L_col, 1]]."""
    d, nk = gen.d, gen.nk
    col = gen.ops.reshape(nk * d, d)
    V = np.eye(d * (1 + nk), dtype=complex)
    V[:d, :d] += h * gen.G
    V[d:, :d] = math.sqrt(h) * col
    V[:d, d:] = -math.sqrt(h) * col.conj().T
    s = np.linalg.svd(V, compute_uv=False)
    if s[-1] < 1e-8 * s[0]:
        raise np.linalg.LinAlgError(f"step matrix is numerically singular (h = {h})")
    U, _ = scipy.linalg.polar(V)
    return U


def beta_unitary(gen: LindbladGenerator, h: float, alg: StarAlgebra | None = None) -> BlockHom:
    """beta(h)(x) = U_h^* (x (x) 1) U_h, an exact *-homomorphism on M_d."""
    d = gen.d
    alg = full_matrix(d) if alg is None else alg
    if alg.dim != d * d:
        raise AlgebraError("beta_unitary needs the full matrix algebra")
    if h <= 0:
        raise ValueError("h must be positive")
    U = unitary_step(gen, h)
    lifted = np.stack([np.kron(np.eye(1 + gen.nk), b) for b in alg.basis])
    images = U.conj().T @ lifted @ U
    return BlockHom(alg, gen.nk, h, images, kind="unitary", unitary=U)


@dataclass(eq=False)
class WalkOperator:
    n: int
    h: float
    d: int
    nk: int
    matrix: np.ndarray

    def vacuum_block(self) -> np.ndarray:
        """Compression by Omega in every slot."""
        return self.matrix[: self.d, : self.d]


def walk_dim(d: int, nk: int, n: int) -> int:
    return d * (1 + nk) ** n


def walk(beta: BlockHom, x, n: int, max_dim: int = DEFAULT_MAX_DIM) -> WalkOperator:
    """j_n(x) with j_0 = x and j_k = (j_{k-1} (x) id) o beta."""
    alg = beta.algebra
    d, S = alg.d, 1 + beta.nk
    if n < 0:
        raise ValueError("n must be non-negative")
    dim = walk_dim(d, beta.nk, n)
    if dim > max_dim:
        raise WalkMemoryError(f"walk space dimension {dim} exceeds the cap {max_dim}")
    coeffs = np.asarray(getattr(x, "coeffs", x), dtype=complex)
    X = coeffs.reshape(-1, 1, 1)
    if n:
        c = beta.block_coeffs()
        for _ in range(n):
            K = X.shape[1]
            X = np.einsum("iPQ,iabk->kPaQb", X, c).reshape(alg.dim, K * S, K * S)
    K = X.shape[1]
    J = np.einsum("kPQ,kab->PaQb", X, alg.basis).reshape(K * d, K * d)
    return WalkOperator(n, beta.h, d, beta.nk, J)


def vacuum_expectation(beta: BlockHom, x, n: int) -> np.ndarray:
    """beta_00 applied n times to x, as a d x d matrix."""
    alg = beta.algebra
    d = alg.d
    B00 = alg.coords(beta.images[:, :d, :d], check=False).T  # (m, m)
    v = np.asarray(getattr(x, "coeffs", x), dtype=complex)
    v = np.linalg.matrix_power(B00, n) @ v
    return alg.matrix(v)


def vacuum_expectation_full(beta: BlockHom, x, n: int, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    return walk(beta, x, n, max_dim=max_dim).vacuum_block()


def semigroup(gen: LindbladGenerator, t: float, x=None, alg: StarAlgebra | None = None) -> np.ndarray:
    """e^{tL}: the m x m matrix on algebra coordinates, or e^{tL}(x) as a matrix."""
    alg = full_matrix(gen.d) if alg is None else alg
    P = scipy.linalg.expm(t * gen.superoperator(alg))
    if x is None:
        return P
    coeffs = alg.coords(x) if np.ndim(x) == 2 else np.asarray(getattr(x, "coeffs", x), dtype=complex)
    return alg.matrix(P @ coeffs)


@dataclass
class ConvergenceRow:
    h: float
    n: int
    basis_index: int
    error: float
    ratio: float | None


def convergence_report(
    gen: LindbladGenerator,
    family: ThetaFamily | None,
    t: float,
    h_list,
    order: int | None = None,
    floor: float = 1e-13,
) -> list[ConvergenceRow]:
    """Vacuum-expectation error against e^{tL} for every basis element.

    Uses the truncated series when ``family`` is given, otherwise the unitary
    step.  ``ratio`` is error(previous h) / error(h); it is left empty when
    either error is below ``floor``.
    """
    alg = family.algebra if family is not None else full_matrix(gen.d)
    hs = [float(h) for h in h_list]
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise ValueError("h_list must be strictly decreasing")
    exact = semigroup(gen, t, alg=alg)
    rows: list[ConvergenceRow] = []
    prev: dict[int, float] = {}
    for h in hs:
        n = int(round(t / h))
        if n <= 0 or abs(n * h - t) > 1e-9 * max(1.0, t):
            raise ValueError(f"h = {h} does not divide t = {t}")
        beta = beta_truncated(family, h, order) if family is not None else beta_unitary(gen, h, alg)
        for i in range(alg.dim):
            approx = vacuum_expectation(beta, alg.basis_element(i), n)
            err = opnorm(approx - alg.matrix(exact[:, i]))
            ratio = prev[i] / err if i in prev and prev[i] > floor and err > floor else None
            rows.append(ConvergenceRow(h, n, i, err, ratio))
            prev[i] = err
    return rows


def report_csv(rows: list[ConvergenceRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["h", "n", "basis_index", "error", "ratio"])
    for r in rows:
        w.writerow([repr(r.h), r.n, r.basis_index, f"{r.error:.17g}", "" if r.ratio is None else f"{r.ratio:.17g}"])
    return buf.getvalue()


@dataclass
class ProductState:
    """u (x) v_1 (x) ... (x) v_n; slot vectors need not be normalized."""

    u: np.ndarray
    slots: list[np.ndarray]

    @classmethod
    def exponential(cls, u, f_values, h: float) -> "ProductState":
        """Slot-wise reduction of e(f): v_k = (1, sqrt(h) f_k)."""
        slots = [np.concatenate([[1.0], math.sqrt(h) * np.atleast_1d(np.asarray(f, dtype=complex))]) for f in f_values]
        return cls(np.asarray(u, dtype=complex), slots)

    def vector(self) -> np.ndarray:
        out = np.ones(1, dtype=complex)
        for v in self.slots:
            out = np.kron(out, np.asarray(v, dtype=complex))
        return np.kron(out, np.asarray(self.u, dtype=complex))

    def expectation(self, op: WalkOperator) -> complex:
        if len(self.slots) != op.n:
            raise ValueError(f"state has {len(self.slots)} slots, walk has {op.n}")
        psi = self.vector()
        return complex(np.vdot(psi, op.matrix @ psi))
