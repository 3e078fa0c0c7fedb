"""The subgroup of H^2(H, A) generated by corestricted cup products
``cor_{H'}^H (a cup delta(chi))`` and membership tests against it."""

from __future__ import annotations

import os
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Optional, Sequence

import numpy as np

from .cochains import Cochain, CochainError, CohomologyContext, is_cocycle
from .groups import (CapExceeded, GroupError, GroupHom, Subgroup, all_subgroups, characters_mod)
from .linalg import SpanTracker
from .maps import carry_cocycle, conjugation_action, cor_index_tables, embedding_by_labels, restriction
from .modules import HModule, invariants, orbit_representatives, stabilizer

STRATEGIES = ("all-subgroups", "centralizers")
DEFAULT_MAX_GROUP_ORDER = 256
DEFAULT_MAX_MODULE_SIZE = 100_000


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("COH2_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class Generator:
    """One inserted triple: subgroup members, invariant element, character."""

    subgroup: tuple[int, ...]
    element: tuple[int, ...]
    character: tuple[int, ...]
    exponent: int

    def describe(self, module: HModule) -> dict:
        G = module.group
        labels = module.basis_labels
        elt = {labels[i] if labels else str(i): int(v) for i, v in enumerate(self.element) if v}
        gens = [int(g) for g in sorted(self.subgroup)]
        return {
            "subgroup_order": len(self.subgroup),
            "subgroup": [_label_str(G, g) for g in gens],
            "element": elt,
            "character": {_label_str(G, g): int(self.character[i]) for i, g in enumerate(gens) if self.character[i]},
            "character_modulus": self.exponent,
        }


def _label_str(G, g: int) -> str:
    if G.labels is None:
        return str(g)
    lab = G.labels[g]
    return str(lab)


@dataclass
class NegligibleBasis:
    context: CohomologyContext
    tracker: SpanTracker
    strategy: str
    generators: list[Generator] = field(default_factory=list)
    cocycles: np.ndarray = None  # rows: cocycles of ``generators``
    candidates: int = 0
    coboundary_rank: int = 0

    @property
    def module(self) -> HModule:
        return self.context.module

    @property
    def group(self):
        return self.context.group

    def quotient_size(self) -> int:
        """Order of the span modulo coboundaries."""
        return self.tracker.basis.span_size() // self.context.coboundaries.basis.span_size()

    def roots_of_unity_label(self) -> str:
        e = self.module.exponent * self.group.exponent()
        return f"negligible subgroup over fields with a primitive {e}-th root of unity"

    def report(self, verdicts: Optional[dict] = None) -> dict:
        return {
            "strategy": self.strategy,
            "label": self.roots_of_unity_label(),
            "group_order": self.group.order,
            "module": {"modulus": self.module.modulus, "rank": self.module.rank},
            "candidates": self.candidates,
            "generator_count": len(self.generators),
            "quotient_order": self.quotient_size(),
            "certificate": [g.describe(self.module) for g in self.generators],
            "verdicts": verdicts or {},
        }


def cup_cor_batch(module: HModule, K: Subgroup, elements: np.ndarray, chi, e: int) -> np.ndarray:
    """Flattened cocycles ``cor_K^H(a cup delta(chi))`` for each row ``a`` of ``elements``.

    ``chi`` is given on ``K.group`` (its own indexing) with values mod ``e``.
    """
    H = module.group
    if K.parent is not H:
        raise GroupError("subgroup of a different group")
    n, k = module.modulus, module.rank
    elements = np.mod(np.atleast_2d(np.asarray(elements, dtype=np.int64)), n)
    w = carry_cocycle(K.group, chi, e).ravel()
    reps, tables = cor_index_tables(K, 2)
    W = np.stack([w[tab] for tab in tables])                       # (t, |H|^2)
    moved = np.stack([elements @ module.action[H.inv[t]].T for t in reps])  # (t, B, k)
    moved %= n
    out = np.einsum("tp,tbk->bpk", W, moved, optimize=True)
    return (out % n).reshape(elements.shape[0], H.order**2 * k)


def phi_image(module: HModule, K: Subgroup) -> tuple[np.ndarray, list[Generator]]:
    """Cocycles spanning the image of ``A^K x H^2(K, Z) -> H^2(H, A)`` modulo coboundaries."""
    inv = invariants(module, K).entries
    e = K.group.exponent()
    dim = module.group.order**2 * module.rank
    if e == 1 or inv.shape[0] == 0:
        return np.zeros((0, dim), dtype=np.int64), []
    chis = characters_mod(K, e).entries
    rows, gens = [], []
    for chi in chis:
        rows.append(cup_cor_batch(module, K, inv, chi, e))
        gens += [Generator(K.members, tuple(int(x) for x in a), tuple(int(x) for x in chi), e) for a in inv]
    return (np.concatenate(rows) if rows else np.zeros((0, dim), dtype=np.int64)), gens


def _check_caps(module: HModule, max_group_order: int, max_module_size: int) -> None:
    if module.group.order > max_group_order:
        raise CapExceeded(f"|H| = {module.group.order} exceeds --max-group-order {max_group_order}")
    if module.size > max_module_size:
        raise CapExceeded(f"|A| = {module.size} exceeds --max-module-size {max_module_size}")


def _centralizer_jobs(module: HModule) -> list[tuple[Subgroup, np.ndarray]]:
    reps, _ = orbit_representatives(module)
    by_stab: dict[tuple[int, ...], list[np.ndarray]] = defaultdict(list)
    stabs: dict[tuple[int, ...], Subgroup] = {}
    for a in reps:
        if not a.any():
            continue
        S = stabilizer(module, a)
        by_stab[S.members].append(a)
        stabs[S.members] = S
    return [(stabs[key], np.array(by_stab[key])) for key in sorted(by_stab, key=lambda m: (len(m), m))]


def _jobs(module: HModule, strategy: str, max_group_order: int) -> list[tuple[Subgroup, np.ndarray]]:
    if strategy == "all-subgroups":
        out = []
        for K in all_subgroups(module.group, max_order=max_group_order):
            inv = invariants(module, K).entries
            if inv.shape[0]:
                out.append((K, inv))
        return out
    if strategy == "centralizers":
        return _centralizer_jobs(module)
    raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")


def _job_candidates(module: HModule, K: Subgroup, elems: np.ndarray) -> tuple[np.ndarray, list[Generator]]:
    e = K.group.exponent()
    dim = module.group.order**2 * module.rank
    if e == 1:
        return np.zeros((0, dim), dtype=np.int64), []
    rows, gens = [], []
    for chi in characters_mod(K, e).entries:
        if not chi.any():
            continue
        rows.append(cup_cor_batch(module, K, elems, chi, e))
        gens += [Generator(K.members, tuple(int(x) for x in a), tuple(int(x) for x in chi), e) for a in elems]
    if not rows:
        return np.zeros((0, dim), dtype=np.int64), []
    return np.concatenate(rows), gens


def build_negligible_basis(ctx: CohomologyContext, strategy: str = "centralizers",
                           max_group_order: int = DEFAULT_MAX_GROUP_ORDER,
                           max_module_size: int = DEFAULT_MAX_MODULE_SIZE,
                           extra: Optional[Sequence[Cochain]] = None) -> NegligibleBasis:
    """Span of coboundaries plus every generator of the chosen strategy.

    ``extra`` cocycles are inserted after the generators (used to self-test
    harnesses that must then report membership).
    """
    module = ctx.module
    _check_caps(module, max_group_order, max_module_size)
    tracker = ctx.coboundaries.copy()
    basis = NegligibleBasis(ctx, tracker, strategy, coboundary_rank=tracker.rank)
    jobs = _jobs(module, strategy, max_group_order)
    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            built = list(pool.map(lambda j: _job_candidates(module, *j), jobs))
    else:
        built = [_job_candidates(module, *j) for j in jobs]
    kept_rows = []
    for rows, gens in built:
        if rows.shape[0] == 0:
            continue
        basis.candidates += rows.shape[0]
        grew = tracker.insert_many(rows)
        for i in np.flatnonzero(grew):
            basis.generators.append(gens[i])
            kept_rows.append(rows[i])
    for c in extra or ():
        ctx._check(c)
        if tracker.insert(c.flat):
            basis.generators.append(Generator((), tuple(int(x) for x in c.flat[: module.rank]), (), 0))
            kept_rows.append(c.flat)
    dim = ctx.c2_dim
    basis.cocycles = np.array(kept_rows, dtype=np.int64).reshape(-1, dim)
    for row in basis.cocycles:
        if not is_cocycle(Cochain(2, module, row)):
            raise AssertionError("a stored generator is not a cocycle")
    return basis


def is_negligible(basis: NegligibleBasis, c: Cochain, check: bool = True) -> bool:
    basis.context._check(c)
    if check and not is_cocycle(c):
        raise CochainError("input is not a cocycle")
    return basis.tracker.contains(c.flat)


def span_with_coboundaries(ctx: CohomologyContext, rows: np.ndarray) -> SpanTracker:
    t = ctx.coboundaries.copy()
    if rows.shape[0]:
        t.insert_many(rows)
    return t


def span_contains(tracker: SpanTracker, rows: np.ndarray) -> bool:
    return bool(rows.shape[0] == 0 or tracker.contains_many(rows).all())


def same_span_mod_coboundaries(a: SpanTracker, b: SpanTracker) -> bool:
    return span_contains(a, b.basis.entries) and span_contains(b, a.basis.entries)


def _closure_in(G, elements: Iterable[int]) -> list[int]:
    els = [int(t) for t in elements]
    return sorted(G.generated_by(els)) if els else [0]


@dataclass
class InvariantQuotientReport:
    restricted_order: int        # |(res_N(span) + B^2(N)) / B^2(N)|
    invariant_order: int         # same for the T-averaged images
    t_order: int
    t_stable: bool
    invariant_part_trivial: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def restricted_invariant_quotient(basis: NegligibleBasis, N: Subgroup, T_elems: Sequence[int] = (),
                                  ambient: Optional[HModule] = None) -> InvariantQuotientReport:
    """Restrict the span to ``N`` and project onto the part fixed by ``T``.

    ``T_elems`` are elements of ``ambient.group`` (defaulting to the basis's own
    group and module); their closure ``T`` must have order prime to the modulus.
    """
    H = basis.group
    if N.parent is not H:
        raise GroupError("N must be a subgroup of the basis group")
    module = basis.module
    ambient = ambient or module
    P = ambient.group
    T = _closure_in(P, T_elems)
    n = module.modulus
    if gcd(len(T), n) != 1:
        raise ValueError(f"|T| = {len(T)} is not prime to the modulus {n}; averaging is invalid")
    emb_H = embedding_by_labels(H, P)
    for t in T_elems:
        for S in (H.whole(), N):
            img = set(P.mult[P.mult[P.inv[t], emb_H.image_of[list(S.members)]], t].tolist())
            if img != set(emb_H.image_of[list(S.members)].tolist()):
                raise GroupError("an element of T does not normalize H and N")
    N_mod = module.restrict_to(N)
    ctxN = CohomologyContext(N_mod, basis.context.max_ambient_dim)
    emb_N = GroupHom(N.group, P, emb_H.image_of[list(N.members)], check=False)
    restricted = [restriction(Cochain(2, module, row), N, N_mod) for row in basis.cocycles]
    R = span_with_coboundaries(ctxN, np.array([c.flat for c in restricted]).reshape(-1, ctxN.c2_dim))
    inv_T = pow(len(T), -1, n) if n > 1 else 0
    averaged = []
    stable = True
    for c in restricted:
        images = [conjugation_action(c, t, ambient, emb_N) for t in T]
        total = sum((x.values for x in images[1:]), images[0].values)
        averaged.append((inv_T * total) % n)
        for t in T_elems:
            if not R.contains(conjugation_action(c, int(t), ambient, emb_N).flat):
                stable = False
    Pspan = span_with_coboundaries(ctxN, np.array(averaged, dtype=np.int64).reshape(-1, ctxN.c2_dim))
    bsize = ctxN.coboundaries.basis.span_size()
    invariant_order = Pspan.basis.span_size() // bsize
    return InvariantQuotientReport(
        restricted_order=R.basis.span_size() // bsize,
        invariant_order=invariant_order,
        t_order=len(T),
        t_stable=stable,
        invariant_part_trivial=invariant_order == 1,
    )


def image_contained(module: HModule, K1: Subgroup, K2: Subgroup, ctx: Optional[CohomologyContext] = None) -> bool:
    """Whether ``Im(phi_K1) <= Im(phi_K2)`` inside ``H^2(H, A)``."""
    ctx = ctx or CohomologyContext(module)
    rows1, _ = phi_image(module, K1)
    rows2, _ = phi_image(module, K2)
    return span_contains(span_with_coboundaries(ctx, rows2), rows1)
