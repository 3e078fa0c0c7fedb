"""Command line: ``coh2 compute``, ``coh2 verify-paper``, ``coh2 lift-check``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Optional, Sequence

import numpy as np

from . import groups as g
from .cochains import (DEFAULT_MAX_AMBIENT_DIM, DEFAULT_MAX_H2_DIM, Cochain, CochainError, CohomologyContext,
                       h2_structure, is_cocycle)
from .extensions import ExtensionError, cyclic_kummer, glnp2_factor_set, lift_decision
from .groups import CapExceeded, GroupError, GroupHom
from .modules import ModuleError
from .negligible import (DEFAULT_MAX_MODULE_SIZE, STRATEGIES, build_negligible_basis, is_negligible,
                         span_contains)
from .pipeline import STAGES, run_stages
from .specfile import SpecError, load_json, parse_extension, parse_group, parse_hom, parse_module

log = logging.getLogger("coh2")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _add_caps(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-group-order", type=int, default=g.DEFAULT_MAX_ORDER,
                   help="largest group the generators may close up to (default %(default)s)")
    p.add_argument("--max-module-size", type=int, default=DEFAULT_MAX_MODULE_SIZE,
                   help="largest |A| for orbit enumeration (default %(default)s)")
    p.add_argument("--max-ambient-dim", type=int, default=DEFAULT_MAX_AMBIENT_DIM,
                   help="largest cochain space |G|^q * rank that is materialized (default %(default)s)")
    p.add_argument("--max-h2-dim", type=int, default=DEFAULT_MAX_H2_DIM,
                   help="largest |G|^2 * rank for the H^2 structure report (default %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coh2", description="Second group cohomology with negligible classes.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="run computations described by a JSON spec file")
    c.add_argument("spec", help="path to the JSON spec")
    c.add_argument("-o", "--output", help="write the report here instead of stdout")
    _add_caps(c)

    v = sub.add_parser("verify-paper", help="run the staged verification for GL_3(Z/p^2)")
    v.add_argument("--p", type=int, default=3, help="prime (default 3; p = 5 needs raised caps)")
    v.add_argument("--stage", default=STAGES, help=f"subset of stages {STAGES} (default: all)")
    v.add_argument("--inject-alpha", action="store_true",
                   help="self-test: add the class itself to the generators; stage g must then fail")
    v.add_argument("--json", action="store_true", help="print the JSON report")
    _add_caps(v)

    lc = sub.add_parser("lift-check", help="decide whether a homomorphism lifts through an extension")
    lc.add_argument("spec", help="JSON with 'extension', optional 'source' group and 'images'")
    _add_caps(lc)
    return parser


# compute ------------------------------------------------------------------------


def _cocycle_from_spec(obj, module, key: str) -> Cochain:
    path = f"cocycles.{key}"
    if not isinstance(obj, dict):
        raise SpecError(f"{path}: expected an object")
    if "values" in obj:
        vals = np.array(obj["values"], dtype=np.int64)
        N, k = module.group.order, module.rank
        if vals.size != N * N * k:
            raise SpecError(f"{path}.values: need {N * N} rows of {k} entries")
        return Cochain(2, module, vals.reshape(N * N, k))
    ext = obj.get("extension")
    G = module.group
    if ext == "gln_p2" or ext == "bn_p2":
        if G.kind != "matrix":
            raise SpecError(f"{path}.extension: {ext} needs a matrix group")
        n = G.matrices.shape[1]
        spec = glnp2_factor_set(n, G.modulus, G, kernel="gl" if ext == "gln_p2" else "b")
    elif ext == "cyclic_kummer":
        if G.kind != "cyclic":
            raise SpecError(f"{path}.extension: cyclic_kummer needs a cyclic group")
        spec = cyclic_kummer(G.order, module.modulus)
        # same indexing of Z/m; move the factor set onto the user's module
        return Cochain(2, module, spec.factor_set.values)
    else:
        raise SpecError(f"{path}.extension: unknown extension {ext!r}")
    if spec.kernel_module.rank != module.rank or not np.array_equal(spec.kernel_module.action, module.action):
        raise SpecError(f"{path}: extension kernel does not match the module")
    return Cochain(2, module, spec.factor_set.values)


def cmd_compute(args) -> int:
    spec = load_json(args.spec)
    if not isinstance(spec, dict):
        raise SpecError("spec: expected a JSON object")
    G = parse_group(spec.get("group"), "group", args.max_group_order)
    if G.order > args.max_group_order:
        raise CapExceeded(f"|G| = {G.order} exceeds --max-group-order {args.max_group_order}")
    module = parse_module(spec.get("module"), G, "module")
    tasks = spec.get("tasks", ["h2", "negligible"])
    if not isinstance(tasks, list) or not all(t in ("h2", "negligible", "membership") for t in tasks):
        raise SpecError("tasks: expected a list drawn from 'h2', 'negligible', 'membership'")
    strategy = spec.get("strategy", "centralizers")
    if strategy not in STRATEGIES:
        raise SpecError(f"strategy: expected one of {STRATEGIES}")
    ctx = CohomologyContext(module, args.max_ambient_dim)
    report: dict = {
        "group": {"name": G.name, "order": G.order, "exponent": G.exponent()},
        "module": {"name": module.name, "modulus": module.modulus, "rank": module.rank},
    }
    cocycles = {}
    for key, obj in (spec.get("cocycles") or {}).items():
        c = _cocycle_from_spec(obj, module, key)
        if not is_cocycle(c):
            raise SpecError(f"cocycles.{key}: not a cocycle")
        cocycles[key] = c
    if "h2" in tasks:
        report["h2"] = {"invariant_factors": h2_structure(ctx, args.max_h2_dim)}
    if "negligible" in tasks or "membership" in tasks:
        basis = build_negligible_basis(ctx, strategy, args.max_group_order, args.max_module_size)
        verdicts = {k: is_negligible(basis, c) for k, c in cocycles.items()}
        neg = basis.report(verdicts)
        if ctx.c2_dim <= args.max_h2_dim:
            z = ctx.cocycle_basis().entries
            neg["all_classes_negligible"] = span_contains(basis.tracker, z)
        report["negligible"] = neg
    text = json.dumps(report, indent=2)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


# verify-paper -------------------------------------------------------------------


def cmd_verify(args) -> int:
    bad = [s for s in args.stage if s not in STAGES]
    if bad:
        raise UsageError(f"--stage: unknown stage(s) {''.join(bad)}; choose from {STAGES}")
    results = run_stages(args.p, args.stage, inject_alpha=args.inject_alpha, max_ambient_dim=args.max_ambient_dim,
                         max_group_order=args.max_group_order, max_module_size=args.max_module_size)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"stage {r.stage}: {status} ({r.seconds:.2f} s) {r.title}")
        if not r.passed:
            print(json.dumps(r.details, indent=2, default=str), file=sys.stderr)
    if args.json:
        print(json.dumps([r.to_dict() for r in results], indent=2, default=str))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


# lift-check ---------------------------------------------------------------------


def cmd_lift_check(args) -> int:
    spec = load_json(args.spec)
    if not isinstance(spec, dict):
        raise SpecError("spec: expected a JSON object")
    if "extension" not in spec:
        raise SpecError("extension: missing")
    ext = parse_extension(spec["extension"], "extension", args.max_group_order)
    H = ext.quotient
    if "source" in spec:
        source = parse_group(spec["source"], "source", args.max_group_order)
        rho = parse_hom(source, H, spec.get("images"), "images")
    elif "images" in spec:
        rho = parse_hom(H, H, spec["images"], "images")
    else:
        rho = GroupHom.identity(H)
    result = lift_decision(rho, ext)
    out = {"extension": ext.provenance, "source_order": rho.source.order, **result.to_dict()}
    print(json.dumps(out, indent=2, default=str))
    return EXIT_OK


COMMANDS = {"compute": cmd_compute, "verify-paper": cmd_verify, "lift-check": cmd_lift_check}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (SpecError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GroupError, ModuleError, CochainError, ExtensionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
