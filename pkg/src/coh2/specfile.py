"""JSON descriptions of groups, modules, extensions and homomorphisms."""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from . import groups as g
from .extensions import ExtensionSpec, cyclic_kummer, from_tables, glnp2_factor_set
from .cochains import Cochain
from .groups import FiniteGroup, GroupHom
from .modules import HModule, borel_lie_module, gl_conjugation_module


class SpecError(ValueError):
    """A malformed spec; the message starts with the JSON path of the problem."""


def load_json(path: str) -> Any:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _get(obj: dict, key: str, path: str, kind=None, default: Any = ...):
    if not isinstance(obj, dict):
        raise SpecError(f"{path}: expected an object")
    if key not in obj:
        if default is ...:
            raise SpecError(f"{path}.{key}: missing")
        return default
    val = obj[key]
    if kind is int and (not isinstance(val, int) or isinstance(val, bool)):
        raise SpecError(f"{path}.{key}: expected an integer, got {val!r}")
    if kind is list and not isinstance(val, list):
        raise SpecError(f"{path}.{key}: expected a list")
    if kind is str and not isinstance(val, str):
        raise SpecError(f"{path}.{key}: expected a string")
    return val


def _positive(obj, key, path, default=...):
    v = _get(obj, key, path, int, default)
    if v is not default and v < 1:
        raise SpecError(f"{path}.{key}: must be positive")
    return v


def parse_group(obj: dict, path: str = "group", max_order: int = g.DEFAULT_MAX_ORDER) -> FiniteGroup:
    kind = _get(obj, "type", path, str)
    if kind == "cyclic":
        return g.cyclic(_positive(obj, "m", path))
    if kind == "abelian":
        inv = _get(obj, "invariants", path, list)
        return g.abelian([int(x) for x in inv])
    if kind == "symmetric":
        return g.symmetric(_positive(obj, "n", path))
    if kind == "dihedral":
        return g.dihedral(_positive(obj, "m", path))
    if kind == "metacyclic":
        return g.metacyclic(*(_get(obj, k, path, int) for k in ("m", "k", "r", "s")))
    if kind in ("unitriangular", "borel", "torus"):
        fn = {"unitriangular": g.unitriangular, "borel": g.borel, "torus": g.torus}[kind]
        return fn(_positive(obj, "n", path), _positive(obj, "p", path))
    if kind == "general_linear":
        return g.general_linear(_positive(obj, "n", path), _positive(obj, "m", path), max_order=max_order)
    if kind == "matrix":
        gens = _get(obj, "generators", path, list)
        return g.generate_matrix_group([np.array(m, dtype=np.int64) for m in gens], _positive(obj, "modulus", path),
                                       max_order=max_order)
    if kind == "permutation":
        return g.generate_permutation_group(_get(obj, "generators", path, list), max_order=max_order)
    if kind == "table":
        return g.from_table(np.array(_get(obj, "table", path, list), dtype=np.int64))
    raise SpecError(f"{path}.type: unknown group type {kind!r}")


def parse_module(obj: dict, G: FiniteGroup, path: str = "module") -> HModule:
    kind = _get(obj, "type", path, str)
    if kind == "trivial":
        return HModule.trivial(G, _positive(obj, "modulus", path), _positive(obj, "rank", path, 1))
    if kind == "gl_conj":
        return gl_conjugation_module(G)
    if kind == "b_conj":
        return borel_lie_module(G)
    if kind == "generator_action":
        mats = _get(obj, "matrices", path, list)
        return HModule.from_generator_action(G, _positive(obj, "modulus", path), mats)
    raise SpecError(f"{path}.type: unknown module type {kind!r}")


def parse_element(G: FiniteGroup, value, path: str) -> int:
    """A group element by index (integer) or by label (matrix / permutation / tuple)."""
    if isinstance(value, int) and not isinstance(value, bool):
        if not 0 <= value < G.order:
            raise SpecError(f"{path}: element index {value} out of range")
        return value
    try:
        if G.kind == "matrix":
            return G.index_of(g.matrix_label(np.mod(np.array(value, dtype=np.int64), G.modulus)))
        return G.index_of(tuple(value))
    except (KeyError, g.GroupError, TypeError) as exc:
        raise SpecError(f"{path}: {value!r} is not an element of the group") from exc


def parse_extension(obj: dict, path: str = "extension", max_order: int = g.DEFAULT_MAX_ORDER) -> ExtensionSpec:
    name = _get(obj, "name", path, str)
    if name in ("gln_p2", "bn_p2"):
        n, p = _positive(obj, "n", path), _positive(obj, "p", path)
        quotient = parse_group(_get(obj, "quotient", path), f"{path}.quotient", max_order)
        return glnp2_factor_set(n, p, quotient, kernel="gl" if name == "gln_p2" else "b")
    if name == "cyclic_kummer":
        return cyclic_kummer(_positive(obj, "m", path), _positive(obj, "n", path))
    if name == "split":
        quotient = parse_group(_get(obj, "quotient", path), f"{path}.quotient", max_order)
        module = parse_module(_get(obj, "module", path), quotient, f"{path}.module")
        return ExtensionSpec(quotient, module, lambda x: x, Cochain.zero(2, module), {"constructor": "split"})
    if name == "from_tables":
        return from_tables(_get(obj, "big_table", path, list), _get(obj, "quotient_map", path, list),
                           _get(obj, "quotient_table", path, list), _positive(obj, "kernel_modulus", path),
                           _get(obj, "kernel_generators", path, list))
    raise SpecError(f"{path}.name: unknown extension {name!r}")


def parse_hom(source: FiniteGroup, target: FiniteGroup, images, path: str = "images") -> GroupHom:
    if not isinstance(images, list) or len(images) != len(source.gen_indices):
        raise SpecError(f"{path}: need one image per generator ({len(source.gen_indices)})")
    idx = [parse_element(target, v, f"{path}[{i}]") for i, v in enumerate(images)]
    try:
        return GroupHom.from_generator_images(source, target, idx)
    except g.GroupError as exc:
        raise SpecError(f"{path}: {exc}") from exc
