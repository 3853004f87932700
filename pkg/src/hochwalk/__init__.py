"""Hochschild cohomology, GNS bimodules and quantum random walks in finite dimensions."""

from hochwalk.star_algebra import (
    AlgebraElement,
    FiniteAlgebra,
    StarAlgebra,
    build_algebra,
    center,
    diagonal,
    direct_sum,
    dual_numbers,
    full_matrix,
)
from hochwalk.bimodule import (
    Bimodule,
    ELModule,
    GnsData,
    LindbladGenerator,
    build_EL,
    build_gns,
    dagger_cochain,
    gns_defect,
    lindblad_apply,
)
from hochwalk.hochschild import (
    Cochain,
    CoboundaryObstruction,
    coboundary,
    coboundary_matrix,
    cohomology_dim,
    cohomology_table,
    is_cocycle,
    solve_coboundary,
)
from hochwalk.walk_coefficients import (
    BetaBlock,
    ThetaFamily,
    assemble_beta,
    build_family,
    extend,
    multiplicativity_defect,
    phi_rhs,
    seed,
    verify_relations,
)
from hochwalk.toy_fock import (
    CompressedN,
    ToySlot,
    beta_truncated,
    beta_unitary,
    convergence_report,
    n_operator,
    semigroup,
    vacuum_expectation,
    verify_n_relations,
    walk,
)

__version__ = "0.1.0"
