"""Order-by-order construction of the coefficients of a formal *-homomorphism.

For beta : A -> E_L[[t]] with h = t^2 the four corners expand as

    beta_00(h) = sum_{n>=0} h^n       theta_00^(n)
    beta_10(h) = sum_{n>=1} h^(n-1/2) theta_10^(n)
    beta_01(h) = sum_{n>=1} h^(n-1/2) theta_01^(n)
    beta_11(h) = sum_{n>=1} h^(n-1)   theta_11^(n)

seeded by the identity, L, delta, delta^dagger and pi.  Each higher level is
obtained by solving a coboundary equation d theta = phi in one corner.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from hochwalk.bimodule import (
    CORNERS,
    DAGGER_CORNER,
    ELModule,
    GnsData,
    LindbladGenerator,
    build_EL,
    build_gns,
    dagger_cochain,
)
from hochwalk.hochschild import Cochain, CoboundaryObstruction, is_cocycle, solve_coboundary, solve_residual
from hochwalk.star_algebra import StarAlgebra

COCYCLE_TOL = 1e-9
SOLVE_TOL = 1e-9


class InductionError(RuntimeError):
    pass


def _cochain_from_ambient(el: ELModule, corner: str, values: np.ndarray) -> Cochain:
    """values[i] = theta(B_i) as ambient matrices."""
    return Cochain(1, el.corner(corner), el.project(corner, values).T)


@dataclass(eq=False)
class ThetaFamily:
    el: ELModule
    generator: LindbladGenerator
    order: int
    theta: dict[tuple[str, int], Cochain]
    provenance: dict[tuple[str, int], dict[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        self._ambient: dict[tuple[str, int], np.ndarray] = {}

    @property
    def algebra(self) -> StarAlgebra:
        return self.el.algebra

    def has(self, corner: str, n: int) -> bool:
        return (corner, n) in self.theta

    def get(self, corner: str, n: int) -> Cochain:
        try:
            return self.theta[(corner, n)]
        except KeyError:
            raise InductionError(f"theta_{corner}^({n}) is not available (order {self.order})") from None

    def ambient(self, corner: str, n: int) -> np.ndarray:
        """theta(B_i) for every basis element as ambient (m, D, D) matrices."""
        key = (corner, n)
        if key not in self._ambient:
            self._ambient[key] = self.el.embed(corner, self.get(corner, n).tensor.T)
        return self._ambient[key]

    def ambient_at(self, corner: str, n: int, coeffs: np.ndarray) -> np.ndarray:
        return np.einsum("i,iab->ab", coeffs, self.ambient(corner, n))

    def concrete(self, corner: str, n: int) -> np.ndarray:
        """theta(B_i) as concrete matrices between h and h (x) k (corner 11 on M coords)."""
        return self.el.concrete(corner, self.ambient(corner, n))


def seed(gns: GnsData, gen: LindbladGenerator, el: ELModule | None = None) -> ThetaFamily:
    el = el or build_EL(gns)
    alg = gns.algebra
    m = alg.dim
    eye = np.eye(m)
    LA = alg.left_matrices()
    t00_0 = el.embed("00", el.project("00", [el.from_algebra(alg.basis_element(i)) for i in range(m)]))
    theta = {
        ("00", 0): _cochain_from_ambient(el, "00", t00_0),
        ("00", 1): _cochain_from_ambient(
            el, "00", np.stack([el.from_algebra(alg.element(gns.L_matrix @ eye[i])) for i in range(m)])
        ),
    }
    if gns.dim:
        d10 = np.stack([el.from_m(gen.delta(b)) for b in alg.basis])
        theta[("10", 1)] = _cochain_from_ambient(el, "10", d10)
        theta[("11", 1)] = _cochain_from_ambient(el, "11", np.stack([el.from_operator_on_m(P) for P in gns.pi_tensor]))
    else:
        theta[("10", 1)] = Cochain.zeros(1, el.corner("10"))
        theta[("11", 1)] = Cochain.zeros(1, el.corner("11"))
    theta[("01", 1)] = dagger_cochain(theta[("10", 1)])
    fam = ThetaFamily(el, gen, 1, theta)
    # embedding of L_a into corner 00 must be exact
    res = np.abs(fam.ambient("00", 0) - np.stack([el.from_algebra(alg.basis_element(i)) for i in range(m)])).max()
    if res > 1e-10:
        raise InductionError(f"seed theta_00^(0) misrepresents the identity (residual {res:.2e})")
    del LA
    return fam


def _product(fam: ThetaFamily, a: tuple[str, int], b: tuple[str, int]) -> np.ndarray:
    """(x, y) -> theta_a(x) theta_b(y) over basis pairs, ambient (m, m, D, D)."""
    return np.einsum("iab,jbc->ijac", fam.ambient(*a), fam.ambient(*b))


def _terms(corner: str, n: int) -> list[tuple[tuple[str, int], tuple[str, int]]]:
    """Products on the right-hand side of d theta_corner^(n) = phi."""
    if corner == "11":
        return [(("10", k), ("01", n - k)) for k in range(1, n)] + [
            (("11", k), ("11", n - k + 1)) for k in range(2, n)
        ]
    if corner == "10":
        return [(("10", k), ("00", n - k)) for k in range(1, n)] + [
            (("11", k), ("10", n - k + 1)) for k in range(2, n + 1)
        ]
    if corner == "01":
        return [(("00", k), ("01", n - k)) for k in range(1, n)] + [
            (("01", k), ("11", n - k + 1)) for k in range(1, n)
        ]
    if corner == "00":
        return [(("00", k), ("00", n - k)) for k in range(1, n)] + [
            (("01", k), ("10", n - k + 1)) for k in range(1, n + 1)
        ]
    raise ValueError(f"unknown corner {corner!r}")


def _full_terms(corner: str, n: int) -> list[tuple[tuple[str, int], tuple[str, int]]]:
    """All products in the graded multiplicativity relation, boundary terms included."""
    if corner == "11":
        return [(("10", k), ("01", n - k)) for k in range(1, n)] + [
            (("11", k), ("11", n - k + 1)) for k in range(1, n + 1)
        ]
    if corner == "10":
        return [(("10", k), ("00", n - k)) for k in range(1, n + 1)] + [
            (("11", k), ("10", n - k + 1)) for k in range(1, n + 1)
        ]
    if corner == "01":
        return [(("00", k), ("01", n - k)) for k in range(0, n)] + [
            (("01", k), ("11", n - k + 1)) for k in range(1, n + 1)
        ]
    return [(("00", k), ("00", n - k)) for k in range(0, n + 1)] + [
        (("01", k), ("10", n - k + 1)) for k in range(1, n + 1)
    ]


def phi_rhs(family: ThetaFamily, corner: str, n: int) -> Cochain:
    """The 2-cochain phi_corner^(n) whose primitive is theta_corner^(n)."""
    el = family.el
    m, D = el.m, el.D
    total = np.zeros((m, m, D, D), dtype=complex)
    for a, b in _terms(corner, n):
        total += _product(family, a, b)
    coords = np.einsum("qab,ijab->qij", el.bases[corner].conj(), total)
    return Cochain(2, el.corner(corner), coords)


def _symmetrize(theta: Cochain) -> Cochain:
    return 0.5 * (theta + dagger_cochain(theta))


def _solve(fam: ThetaFamily, corner: str, n: int, prov: dict) -> Cochain:
    phi = phi_rhs(fam, corner, n)
    ok, cres = is_cocycle(phi, tol=COCYCLE_TOL)
    if not ok:
        raise InductionError(f"phi_{corner}^({n}) is not a cocycle (residual {cres:.3e})")
    try:
        theta = solve_coboundary(phi, tol=SOLVE_TOL)
    except CoboundaryObstruction as exc:
        raise InductionError(
            f"no primitive for phi_{corner}^({n}): residual {exc.residual:.3e}, dim H^2 = {exc.h2_dim}"
        ) from exc
    if corner in ("11", "00"):
        theta = _symmetrize(theta)
    prov[(corner, n)] = {"cocycle_residual": cres, "solve_residual": solve_residual(theta, phi)}
    return theta


def extend(family: ThetaFamily, n: int) -> ThetaFamily:
    """Add level n (corners in the order 11, 10, 01, 00)."""
    if family.order != n - 1:
        raise InductionError(f"family has order {family.order}; cannot build level {n}")
    if n < 2:
        raise InductionError("levels below 2 come from seed()")
    fam = ThetaFamily(family.el, family.generator, n, dict(family.theta), dict(family.provenance))
    fam._ambient.update(family._ambient)
    fam.theta[("11", n)] = _solve(fam, "11", n, fam.provenance)
    fam.theta[("10", n)] = _solve(fam, "10", n, fam.provenance)
    fam.theta[("01", n)] = dagger_cochain(fam.theta[("10", n)])
    phi01 = phi_rhs(fam, "01", n)
    fam.provenance[("01", n)] = {
        "cocycle_residual": is_cocycle(phi01)[1],
        "solve_residual": solve_residual(fam.theta[("01", n)], phi01),
    }
    fam.theta[("00", n)] = _solve(fam, "00", n, fam.provenance)
    return fam


def build_family(gns: GnsData, gen: LindbladGenerator, order: int, el: ELModule | None = None) -> ThetaFamily:
    fam = seed(gns, gen, el)
    for n in range(2, order + 1):
        fam = extend(fam, n)
    return fam


@dataclass
class RelationReport:
    relation: dict[tuple[str, int], float]
    dagger: dict[tuple[str, int], float]
    cocycle: dict[tuple[str, int], float]
    solve: dict[tuple[str, int], float]
    unitality: float

    @property
    def max_relation(self) -> float:
        return max(self.relation.values(), default=0.0)

    @property
    def max_dagger(self) -> float:
        return max(self.dagger.values(), default=0.0)

    @property
    def max_cocycle(self) -> float:
        return max(self.cocycle.values(), default=0.0)

    @property
    def max_solve(self) -> float:
        return max(self.solve.values(), default=0.0)


def verify_relations(family: ThetaFamily) -> RelationReport:
    el = family.el
    alg = family.algebra
    c = alg.structure
    relation, dagger = {}, {}
    for n in range(1, family.order + 1):
        for corner in CORNERS:
            lhs = np.einsum("ijs,sab->ijab", c, family.ambient(corner, n))
            rhs = sum(_product(family, a, b) for a, b in _full_terms(corner, n))
            relation[(corner, n)] = float(np.sqrt((np.abs(lhs - rhs) ** 2).sum(axis=(-2, -1))).max())
            at_star = np.einsum("ik,kab->iab", alg.star_table, family.ambient(corner, n))
            partner = family.ambient(DAGGER_CORNER[corner], n)
            diff = at_star - np.conj(np.swapaxes(partner, -1, -2))
            dagger[(corner, n)] = float(np.sqrt((np.abs(diff) ** 2).sum(axis=(-2, -1))).max())
    cocycle = {k: v["cocycle_residual"] for k, v in family.provenance.items()}
    solve = {k: v["solve_residual"] for k, v in family.provenance.items()}
    unit = alg.unit_coeffs
    unitality = 0.0
    for n in range(2, family.order + 1):
        for corner in CORNERS:
            unitality = max(unitality, float(np.abs(family.ambient_at(corner, n, unit)).max(initial=0.0)))
    if unitality > 1e-10:
        warnings.warn(f"higher coefficients do not vanish on 1 (max {unitality:.2e})", stacklevel=2)
    return RelationReport(relation, dagger, cocycle, solve, unitality)


def _weight(corner: str, n: int, h: float) -> float:
    if corner == "00":
        return h**n
    if corner in ("10", "01"):
        return h ** (n - 0.5)
    return h ** (n - 1)


@dataclass(eq=False)
class BetaBlock:
    """Truncated beta(h) as ambient E_L-valued maps on basis elements."""

    family: ThetaFamily
    h: float
    order: int
    corners: dict[str, np.ndarray]  # corner -> (m, D, D)

    def ambient(self, coeffs=None) -> np.ndarray:
        total = sum(self.corners.values())
        if coeffs is None:
            return total
        return np.einsum("i,iab->ab", np.asarray(coeffs, dtype=complex), total)

    def corner(self, c: str, coeffs) -> np.ndarray:
        return np.einsum("i,iab->ab", np.asarray(coeffs, dtype=complex), self.corners[c])

    def concrete(self, c: str) -> np.ndarray:
        return self.family.el.concrete(c, self.corners[c])


def assemble_beta(family: ThetaFamily, h: float, N: int | None = None) -> BetaBlock:
    N = family.order if N is None else N
    if N > family.order:
        raise InductionError(f"requested order {N} exceeds family order {family.order}")
    if h < 0:
        raise ValueError("h must be non-negative")
    corners = {}
    for c in CORNERS:
        start = 0 if c == "00" else 1
        corners[c] = sum(_weight(c, n, h) * family.ambient(c, n) for n in range(start, N + 1))
    return BetaBlock(family, h, N, corners)


def multiplicativity_defect(beta: BetaBlock, x=None, y=None) -> dict[str, float]:
    """|| beta(xy) - beta(x) beta(y) || per corner (Frobenius of the block).

    Without ``x, y`` the maximum over basis pairs is returned.
    """
    el = beta.family.el
    alg = el.algebra
    total = beta.ambient()
    if x is None:
        lhs = np.einsum("ijs,sab->ijab", alg.structure, total)
        rhs = np.einsum("iab,jbc->ijac", total, total)
    else:
        xc, yc = getattr(x, "coeffs", x), getattr(y, "coeffs", y)
        lhs = beta.ambient(alg.product_coeffs(xc, yc))[None, None]
        rhs = (beta.ambient(xc) @ beta.ambient(yc))[None, None]
    diff = lhs - rhs
    out = {}
    for c in CORNERS:
        blk = el.block(c, diff)
        out[c] = float(np.sqrt((np.abs(blk) ** 2).sum(axis=(-2, -1))).max(initial=0.0)) if blk.size else 0.0
    return out


# --- serialization -------------------------------------------------------

FORMAT = "hochwalk.theta-family/1"


def _enc(a: np.ndarray):
    a = np.asarray(a, dtype=complex)
    return {"shape": list(a.shape), "re": a.real.ravel().tolist(), "im": a.imag.ravel().tolist()}


def _dec(obj) -> np.ndarray:
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj["im"], dtype=float)
    return (re + 1j * im).reshape(obj["shape"])


def algebra_hash(alg: StarAlgebra) -> str:
    return hashlib.sha256(json.dumps(_enc(alg.basis), sort_keys=True).encode()).hexdigest()


def family_to_dict(family: ThetaFamily) -> dict:
    el, gen = family.el, family.generator
    levels = []
    for (corner, n), cochain in sorted(family.theta.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        entry = {"corner": corner, "n": n, "tensor": _enc(cochain.tensor)}
        prov = family.provenance.get((corner, n))
        if prov:
            entry.update({k: float(v) for k, v in sorted(prov.items())})
        levels.append(entry)
    return {
        "format": FORMAT,
        "algebra_hash": algebra_hash(el.algebra),
        "algebra_basis": _enc(el.algebra.basis),
        "generator": {"H": _enc(gen.H), "lindblad": _enc(gen.ops)},
        "gns_basis": _enc(el.gns.M_basis),
        "corner_dims": el.dims(),
        "order": family.order,
        "levels": levels,
    }


def save_family(family: ThetaFamily, path) -> None:
    text = json.dumps(family_to_dict(family), sort_keys=True, indent=1)
    Path(path).write_text(text + "\n", encoding="utf-8")


def family_from_dict(data: dict, el: ELModule | None = None) -> ThetaFamily:
    if data.get("format") != FORMAT:
        raise ValueError(f"unknown coefficient file format {data.get('format')!r}")
    if el is None:
        alg = StarAlgebra(_dec(data["algebra_basis"]))
        gen = LindbladGenerator(_dec(data["generator"]["H"]), list(_dec(data["generator"]["lindblad"])))
        el = build_EL(build_gns(alg, gen))
    else:
        gen = el.gns.generator
    if algebra_hash(el.algebra) != data["algebra_hash"]:
        raise ValueError("coefficient file was written for a different algebra")
    if np.abs(_dec(data["gns_basis"]) - el.gns.M_basis).max(initial=0.0) != 0.0:
        raise ValueError("GNS basis differs from the one the coefficients were written against")
    theta, prov = {}, {}
    for entry in data["levels"]:
        key = (entry["corner"], int(entry["n"]))
        theta[key] = Cochain(1, el.corner(entry["corner"]), _dec(entry["tensor"]))
        if "cocycle_residual" in entry:
            prov[key] = {"cocycle_residual": entry["cocycle_residual"], "solve_residual": entry["solve_residual"]}
    return ThetaFamily(el, gen, int(data["order"]), theta, prov)


def load_family(path, el: ELModule | None = None) -> ThetaFamily:
    return family_from_dict(json.loads(Path(path).read_text(encoding="utf-8")), el)
