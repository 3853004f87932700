"""Command line front-end.

Exit codes: 0 success, 1 invariant failure, 2 config error, 3 cohomological
obstruction.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from hochwalk.bimodule import CORNERS, Bimodule, ModuleError, build_EL, build_gns, gns_defect
from hochwalk.config import ConfigError, ExperimentConfig, load_config
from hochwalk.hochschild import cohomology_row
from hochwalk.star_algebra import AlgebraError, StarAlgebra
from hochwalk.toy_fock import convergence_report, report_csv
from hochwalk.walk_coefficients import InductionError, build_family, save_family, verify_relations

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG, EXIT_OBSTRUCTION = 0, 1, 2, 3

RELATION_TOL = 1e-8
DAGGER_TOL = 1e-10


def _need_generator(cfg: ExperimentConfig):
    if cfg.generator is None or not isinstance(cfg.algebra, StarAlgebra):
        raise ConfigError("this command needs a *-algebra and a generator")


def _el(cfg: ExperimentConfig):
    _need_generator(cfg)
    gns = build_gns(cfg.algebra, cfg.generator, tol=cfg.tol)
    return gns, build_EL(gns, tol=cfg.tol)


def cmd_gns(cfg: ExperimentConfig, out=None, samples: int = 100) -> int:
    out = out or sys.stdout
    gns, el = _el(cfg)
    alg, gen = cfg.algebra, cfg.generator
    rng = np.random.default_rng(cfg.seed)
    residual = max(
        gns_defect(gns, gen, alg.random_element(rng), alg.random_element(rng)) for _ in range(samples)
    )
    print(f"dim A        {alg.dim}", file=out)
    print(f"dim M        {gns.dim}", file=out)
    print(f"dim B^a(M)   {el.dims()['11']}", file=out)
    print(f"gns residual {residual:.3e}", file=out)
    return EXIT_OK if residual <= cfg.tol else EXIT_INVARIANT


def cohomology_rows(cfg: ExperimentConfig, degrees) -> list[tuple[str, object]]:
    if cfg.generator is None or not isinstance(cfg.algebra, StarAlgebra):
        N = Bimodule.regular(cfg.algebra)
        return [("A", cohomology_row(N, n)) for n in degrees]
    _, el = _el(cfg)
    return [(c, cohomology_row(el.corner(c), n)) for c in CORNERS for n in degrees]


def cmd_cohomology(cfg: ExperimentConfig, degree: int | None = None, out=None) -> int:
    out = out or sys.stdout
    degrees = (0, 1, 2) if degree is None else (degree,)
    rows = cohomology_rows(cfg, degrees)
    print("module degree dim_C rank dim_ker dim_H", file=out)
    totals: dict[int, list[int]] = {}
    for name, r in rows:
        print(f"{name} {r.degree} {r.dim_cochains} {r.rank} {r.dim_kernel} {r.dim_cohomology}", file=out)
        t = totals.setdefault(r.degree, [0, 0, 0, 0])
        for i, v in enumerate((r.dim_cochains, r.rank, r.dim_kernel, r.dim_cohomology)):
            t[i] += v
    if len({name for name, _ in rows}) > 1:
        for n, t in totals.items():
            print(f"E_L {n} {t[0]} {t[1]} {t[2]} {t[3]}", file=out)
    if any(r.ambiguous for _, r in rows):
        print("warning: ambiguous rank decision", file=out)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_coeffs(cfg: ExperimentConfig, out_path=None, out=None) -> int:
    out = out or sys.stdout
    gns, el = _el(cfg)
    h2 = {c: cohomology_row(el.corner(c), 2).dim_cohomology for c in CORNERS}
    if any(h2.values()):
        print(f"obstruction: dim H^2(A, E_L) = {sum(h2.values())} {h2}", file=out)
        return EXIT_OBSTRUCTION
    try:
        fam = build_family(gns, cfg.generator, cfg.order, el=el)
    except InductionError as exc:
        print(f"induction failed: {exc}", file=out)
        return EXIT_OBSTRUCTION if "H^2" in str(exc) else EXIT_INVARIANT
    rep = verify_relations(fam)
    path = out_path or cfg.coeffs_path
    if path:
        save_family(fam, path)
        print(f"wrote {path}", file=out)
    print(f"order            {fam.order}", file=out)
    print(f"max cocycle      {rep.max_cocycle:.3e}", file=out)
    print(f"max solve        {rep.max_solve:.3e}", file=out)
    print(f"max relation     {rep.max_relation:.3e}", file=out)
    print(f"max dagger       {rep.max_dagger:.3e}", file=out)
    print(f"unitality        {rep.unitality:.3e}", file=out)
    ok = rep.max_relation <= RELATION_TOL and rep.max_dagger <= DAGGER_TOL
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_walk(cfg: ExperimentConfig, out_path=None, out=None) -> int:
    out = out or sys.stdout
    _need_generator(cfg)
    family = None
    if cfg.beta == "truncated":
        gns, el = _el(cfg)
        family = build_family(gns, cfg.generator, cfg.order, el=el)
    rows = convergence_report(cfg.generator, family, cfg.t, cfg.h_list)
    text = report_csv(rows)
    path = out_path or cfg.report_path
    if path:
        Path(path).write_text(text, encoding="utf-8")
        print(f"wrote {path}", file=out)
    else:
        out.write(text)
    ratios = [r.ratio for r in rows if r.ratio is not None]
    if ratios:
        # keep stdout a clean CSV when the report goes there
        print(f"ratios min {min(ratios):.4f} max {max(ratios):.4f}", file=out if path else sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hochwalk", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=["gns", "cohomology", "coeffs", "walk"])
    p.add_argument("--config", required=True, help="experiment config (JSON)")
    p.add_argument("--order", type=int, help="truncation order N")
    p.add_argument("--degree", type=int, choices=[0, 1, 2], help="cohomology degree")
    p.add_argument("--out", help="output path")
    p.add_argument("--tol", type=float, help="tolerance")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.order is not None:
            cfg.order = args.order
        if args.tol is not None:
            cfg.tol = args.tol
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "gns":
            return cmd_gns(cfg)
        if args.command == "cohomology":
            return cmd_cohomology(cfg, args.degree)
        if args.command == "coeffs":
            return cmd_coeffs(cfg, args.out)
        return cmd_walk(cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ModuleError, AlgebraError, InductionError) as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
