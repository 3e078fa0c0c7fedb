"""Functorial maps on cochains: pullback, pushforward, corestriction,
conjugation, cup with a degree-one character class, connecting maps."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import product
from typing import Optional

import numpy as np

from .cochains import Cochain, CochainError, is_cocycle
from .groups import FiniteGroup, GroupError, GroupHom, Subgroup, coset_decomposition
from .modules import HModule, ModuleError, is_invariant


def _tuple_map(N_src: int, N_tgt: int, image_of: np.ndarray, q: int) -> np.ndarray:
    """Row index in the target for every ``q``-tuple of the source."""
    idx = np.zeros(1, dtype=np.int64)
    for _ in range(q):
        idx = (idx[:, None] * N_tgt + image_of[None, :]).ravel()
    return idx


def pullback(c: Cochain, f: GroupHom, module: Optional[HModule] = None) -> Cochain:
    """``f^* c``: the cochain ``(g1, .., gq) -> c(f g1, .., f gq)`` over ``f.source``."""
    if f.target is not c.group:
        raise CochainError("homomorphism target is not the cochain's group")
    if module is None:
        module = c.module.restrict(f)
    elif module.group is not f.source or not np.array_equal(module.action, c.module.action[f.image_of]):
        raise CochainError("module is not the restriction along f")
    idx = _tuple_map(f.source.order, f.target.order, np.asarray(f.image_of, dtype=np.int64), c.degree)
    return Cochain(c.degree, module, c.values[idx])


def restriction(c: Cochain, H: Subgroup, module: Optional[HModule] = None) -> Cochain:
    if H.parent is not c.group:
        raise CochainError("subgroup of a different group")
    return pullback(c, H.inclusion, module)


def inflation(c: Cochain, quotient: GroupHom, module: Optional[HModule] = None) -> Cochain:
    """Pullback along a surjection ``G -> G/K``."""
    if len(quotient.image()) != quotient.target.order:
        raise CochainError("inflation needs a surjective map")
    return pullback(c, quotient, module)


def pushforward(c: Cochain, phi, target: HModule) -> Cochain:
    """``phi_* c`` for a module map ``a -> phi @ a`` into ``target``."""
    phi = np.asarray(phi, dtype=np.int64)
    src = c.module
    if target.group is not src.group:
        raise CochainError("target module lives over a different group")
    if phi.shape != (target.rank, src.rank):
        raise CochainError(f"map must have shape {(target.rank, src.rank)}")
    if ((src.modulus * phi) % target.modulus).any():
        raise CochainError("map is not well defined on the source modulus")
    lhs = np.einsum("ij,gjk->gik", phi, src.action) % target.modulus
    rhs = np.einsum("gij,jk->gik", target.action, phi) % target.modulus
    if not np.array_equal(lhs, rhs):
        raise CochainError("map does not commute with the group action")
    return Cochain(c.degree, target, c.values @ phi.T)


@lru_cache(maxsize=512)
def _cor_data(H: Subgroup) -> tuple[np.ndarray, np.ndarray]:
    """Transversal and ``rho(x) = x rep(x)^-1`` (as subgroup indices) for ``H <= parent``."""
    reps, _, h_part = coset_decomposition(H.parent, H)
    return np.array(reps, dtype=np.int64), H.parent_to_sub[h_part]


def cor_index_tables(H: Subgroup, q: int) -> tuple[np.ndarray, list[np.ndarray]]:
    """For each right representative ``t`` the source tuple feeding ``(cor f)``.

    Returns ``(reps, tables)`` where ``tables[i]`` maps each ``q``-tuple of the
    parent to a row index of a cochain over ``H``.
    """
    P = H.parent
    Np, Nh = P.order, H.order
    reps, rho = _cor_data(H)
    mult = P.mult.astype(np.int64)
    sub_mult = H.group.mult.astype(np.int64)
    sub_inv = H.group.inv.astype(np.int64)
    tables = []
    for t in reps:
        # running prefix products t g1 ... gj over all tuples
        prefix = np.full(1, t, dtype=np.int64)
        prev_rho = np.zeros(1, dtype=np.int64)
        row = np.zeros(1, dtype=np.int64)
        for _ in range(q):
            prefix = mult[prefix[:, None], np.arange(Np)[None, :]].ravel()
            prev_rho = np.repeat(prev_rho, Np)
            row = np.repeat(row, Np)
            cur = rho[prefix]
            row = row * Nh + sub_mult[sub_inv[prev_rho], cur]
            prev_rho = cur
        tables.append(row)
    return reps, tables


def corestriction(c: Cochain, H: Subgroup, module: HModule) -> Cochain:
    """``cor: C^q(H', A) -> C^q(H, A)`` for ``H' = H`` as subgroup of ``module.group``.

    ``c`` must be a cochain over ``H.group`` with the restricted module.
    """
    P = H.parent
    if module.group is not P:
        raise CochainError("module must live over the ambient group")
    if c.group is not H.group:
        raise CochainError("cochain must live over the subgroup")
    if not np.array_equal(c.module.action, module.action[list(H.members)]):
        raise CochainError("cochain module is not the restriction of the ambient module")
    reps, tables = cor_index_tables(H, c.degree)
    out = np.zeros((P.order**c.degree, module.rank), dtype=np.int64)
    for t, tab in zip(reps, tables):
        out += c.values[tab] @ module.action[P.inv[t]].T
    return Cochain(c.degree, module, out)


def conjugation_action(c: Cochain, t: int, ambient: HModule, embedding: Optional[GroupHom] = None) -> Cochain:
    """``(t.c)(g1, ..) = t . c(t^-1 g1 t, ..)`` for ``t`` in the ambient group normalizing ``c.group``.

    ``embedding`` places ``c.group`` inside ``ambient.group``; by default elements are matched by label.
    """
    G = c.group
    P = ambient.group
    if embedding is None:
        embedding = embedding_by_labels(G, P)
    emb = np.asarray(embedding.image_of, dtype=np.int64)
    if not np.array_equal(c.module.action, ambient.action[emb]):
        raise CochainError("cochain module is not the restriction of the ambient module")
    back = -np.ones(P.order, dtype=np.int64)
    back[emb] = np.arange(G.order)
    conj = back[P.mult[P.mult[P.inv[t], emb], t]]
    if (conj < 0).any():
        raise GroupError("element does not normalize the subgroup")
    idx = _tuple_map(G.order, G.order, conj, c.degree)
    return Cochain(c.degree, c.module, c.values[idx] @ ambient.action[t].T)


def embedding_by_labels(sub: FiniteGroup, ambient: FiniteGroup) -> GroupHom:
    if sub is ambient:
        return GroupHom.identity(sub)
    if sub.labels is None or ambient.labels is None:
        raise GroupError("label embedding needs labelled groups")
    try:
        img = [ambient.index_of(l) for l in sub.labels]
    except (KeyError, GroupError) as exc:
        raise GroupError("subgroup labels are not elements of the ambient group") from exc
    return GroupHom(sub, ambient, np.array(img, dtype=np.int64))


def carry_cocycle(G: FiniteGroup, chi, e: int) -> np.ndarray:
    """Integer 2-cocycle ``(chi(g) + chi(h) - chi(gh)) / e`` with ``chi`` lifted to ``[0, e)``.

    It represents ``delta(chi)`` for ``0 -> Z -> Z -> Z/e -> 0``; it takes values in {0, 1}
    and its coboundary vanishes exactly over Z.
    """
    chi = np.mod(np.asarray(chi, dtype=np.int64), e)
    if chi.shape != (G.order,):
        raise CochainError("character must give one value per group element")
    mult = G.mult.astype(np.int64)
    num = chi[:, None] + chi[None, :] - chi[mult]
    if (num % e).any():
        raise CochainError("not a homomorphism to Z/e")
    w = num // e
    # integral cocycle identity w(h,k) - w(gh,k) + w(g,hk) - w(g,h) = 0
    d = w[None, :, :] - w[mult][:, :, :] + w[:, mult] - w[:, :, None]
    if d.any():
        raise AssertionError("carry cocycle failed the cocycle identity")
    return w


def cup_with_character(a, chi, e: int, module: HModule, check: bool = True) -> Cochain:
    """A cocycle representing ``a cup delta(chi)`` in ``H^2(G, A)``.

    ``a`` must be ``G``-invariant and ``chi`` a homomorphism ``G -> Z/e``; the
    integral class ``delta(chi)`` pairs with ``a`` through ``Z x A -> A``.
    """
    G = module.group
    a = np.mod(np.asarray(a, dtype=np.int64), module.modulus)
    if not is_invariant(module, a):
        raise ModuleError("element is not invariant")
    w = carry_cocycle(G, chi, e)
    out = Cochain(2, module, w.reshape(-1, 1) * a[None, :])
    if check and not is_cocycle(out):
        raise AssertionError("cup product output is not a cocycle")
    return out


@dataclass(frozen=True)
class TrivialSES:
    """``0 -> X -> Y -> Z0 -> 0`` of finite abelian groups with trivial action.

    ``X = (Z/x_modulus)^x_rank``, ``Y = Z/y_1 x ... x Z/y_r`` and
    ``Z0 = (Z/z_modulus)^z_rank``; ``iota`` and ``pi`` are integer matrices in
    column convention (``Y``-coordinates of ``iota @ x``, ``Z0``-coordinates of ``pi @ y``).
    """

    x_modulus: int
    x_rank: int
    y_invariants: tuple[int, ...]
    z_modulus: int
    z_rank: int
    iota: tuple
    pi: tuple

    def _y_elements(self) -> np.ndarray:
        return np.array(list(product(*(range(d) for d in self.y_invariants))), dtype=np.int64).reshape(
            -1, len(self.y_invariants))

    def _reduce_y(self, v: np.ndarray) -> np.ndarray:
        return np.mod(v, np.array(self.y_invariants, dtype=np.int64))

    @cached_property
    def tables(self) -> tuple[dict, dict]:
        """``(lift, back)``: a chosen preimage in Y of each Z0 element, and X-coordinates of each kernel element."""
        ys = self._y_elements()
        iota = np.array(self.iota, dtype=np.int64).reshape(len(self.y_invariants), self.x_rank)
        pi = np.array(self.pi, dtype=np.int64).reshape(self.z_rank, len(self.y_invariants))
        xs = np.array(list(product(range(self.x_modulus), repeat=self.x_rank)), dtype=np.int64).reshape(
            -1, self.x_rank)
        # well defined on the stated moduli
        if self._reduce_y(self.x_modulus * iota.T).any() or np.mod(pi * np.array(self.y_invariants), self.z_modulus).any():
            raise ModuleError("maps are not well defined on the given moduli")
        images = self._reduce_y(xs @ iota.T)
        back = {tuple(int(t) for t in y): x for y, x in zip(images, xs)}
        if len(back) != len(xs):
            raise ModuleError("X -> Y is not injective")
        if np.mod(images @ pi.T, self.z_modulus).any():
            raise ModuleError("composite X -> Y -> Z0 is not zero")
        zimg = np.mod(ys @ pi.T, self.z_modulus)
        kernel = {tuple(int(t) for t in y) for y, z in zip(ys, zimg) if not z.any()}
        if kernel != set(back):
            raise ModuleError("sequence is not exact at Y")
        lift: dict = {}
        for y, z in zip(ys, zimg):
            lift.setdefault(tuple(int(t) for t in z), y)
        if len(lift) != self.z_modulus**self.z_rank:
            raise ModuleError("Y -> Z0 is not surjective")
        return lift, back


def connecting_trivial_ses(z: Cochain, ses: TrivialSES, target: Optional[HModule] = None) -> Cochain:
    """``delta: H^1(G, Z0) -> H^2(G, X)``: lift ``z`` to ``Y``, differentiate, read off in ``X``."""
    G = z.group
    if z.degree != 1 or z.module.modulus != ses.z_modulus or z.module.rank != ses.z_rank:
        raise CochainError("z must be a 1-cochain with values in Z0")
    if not (z.module.action == np.eye(ses.z_rank, dtype=np.int64)).all():
        raise CochainError("coefficients must be trivial")
    if target is None:
        target = HModule.trivial(G, ses.x_modulus, ses.x_rank)
    lift, back = ses.tables
    y = np.array([lift[tuple(int(t) for t in row)] for row in z.values], dtype=np.int64)
    mult = G.mult.astype(np.int64)
    dy = ses._reduce_y(y[None, :, :] - y[mult] + y[:, None, :])
    try:
        vals = np.array([back[tuple(int(t) for t in v)] for v in dy.reshape(-1, dy.shape[-1])], dtype=np.int64)
    except KeyError as exc:
        raise CochainError("z is not a cocycle: its coboundary leaves X") from exc
    return Cochain(2, target, vals.reshape(-1, ses.x_rank))


def norm_of_conjugates(c: Cochain, elements, ambient: HModule, embedding: Optional[GroupHom] = None) -> Cochain:
    """``sum_s s.c`` over the given ambient elements."""
    out = Cochain.zero(c.degree, c.module)
    for s in elements:
        out = out + conjugation_action(c, int(s), ambient, embedding)
    return out

