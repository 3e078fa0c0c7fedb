"""Finite groups as dense multiplication tables.

Elements are indices ``0..|G|-1`` with the identity at 0.  Groups built from
permutations or matrices keep the original element as a hashable label so
that subgroups of a common ambient group can be related to each other
(conjugation, restriction of module actions).

Products follow the matrix convention: for permutations ``(p*q)(i) = p(q(i))``.
"""

from __future__ import annotations

from collections import deque
from functools import cached_property
from math import gcd
from typing import Callable, Hashable, Iterable, Optional, Sequence

import numpy as np

from .linalg import ZnMatrix, kernel_basis

DEFAULT_MAX_ORDER = 20_000
DEFAULT_MAX_SUBGROUP_SEARCH = 256


class GroupError(ValueError):
    pass


class CapExceeded(GroupError):
    pass


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


class FiniteGroup:
    """A finite group given by its full multiplication table."""

    def __init__(
        self,
        mult: np.ndarray,
        labels: Optional[Sequence[Hashable]] = None,
        gens: Optional[Sequence[int]] = None,
        name: str = "",
        kind: str = "abstract",
        modulus: Optional[int] = None,
        words: Optional[Sequence[tuple[int, int]]] = None,
    ):
        mult = np.asarray(mult)
        n = mult.shape[0]
        if mult.shape != (n, n):
            raise GroupError("multiplication table must be square")
        if n == 0 or not np.array_equal(mult[0], np.arange(n)) or not np.array_equal(mult[:, 0], np.arange(n)):
            raise GroupError("element 0 must be the identity")
        self.mult = mult.astype(np.int32 if n < 2**31 else np.int64)
        self.mult.setflags(write=False)
        self.order = n
        inv = np.argmax(self.mult == 0, axis=1)
        if not np.all(self.mult[np.arange(n), inv] == 0):
            raise GroupError("table has elements without inverses")
        self.inv = inv
        self.inv.setflags(write=False)
        self.labels = list(labels) if labels is not None else None
        self.kind = kind
        self.modulus = modulus
        self.name = name
        self._label_index = {lab: i for i, lab in enumerate(self.labels)} if self.labels is not None else None
        self.gen_indices = list(gens) if gens is not None else _greedy_generators(self)
        if self.order > 1 and self.generated_by(self.gen_indices) != frozenset(range(n)):
            raise GroupError("the listed generators do not generate the group")
        # words[g] = (x, s): g = x * gen_indices[s]; built lazily when absent
        self._words = list(words) if words is not None else None

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name or 'G'}, order={self.order})"

    def __len__(self) -> int:
        return self.order

    def mul(self, a: int, b: int) -> int:
        return int(self.mult[a, b])

    def index_of(self, label: Hashable) -> int:
        if self._label_index is None:
            raise GroupError("group has no labels")
        try:
            return self._label_index[label]
        except KeyError:
            raise GroupError(f"label {label!r} is not an element of {self!r}") from None

    def has_label(self, label: Hashable) -> bool:
        return self._label_index is not None and label in self._label_index

    def label_matrix(self, g: int) -> np.ndarray:
        if self.kind != "matrix":
            raise GroupError("not a matrix group")
        return np.array(self.labels[g], dtype=np.int64)

    @cached_property
    def matrices(self) -> np.ndarray:
        """All matrix labels as an array of shape (|G|, d, d)."""
        return np.array([self.labels[g] for g in range(self.order)], dtype=np.int64)

    @cached_property
    def element_orders(self) -> np.ndarray:
        n = self.order
        orders = np.zeros(n, dtype=np.int64)
        cur = np.arange(n)
        k = 1
        while (orders == 0).any():
            hit = (cur == 0) & (orders == 0)
            orders[hit] = k
            cur = self.mult[cur, np.arange(n)]
            k += 1
        return orders

    def exponent(self) -> int:
        e = 1
        for o in set(self.element_orders.tolist()):
            e = _lcm(e, int(o))
        return e

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mult, self.mult.T))

    def power(self, g: int, k: int) -> int:
        k %= int(self.element_orders[g])
        out = 0
        for _ in range(k):
            out = int(self.mult[out, g])
        return out

    def generated_by(self, elements: Iterable[int]) -> frozenset[int]:
        elements = [int(x) for x in elements]
        seen = {0}
        frontier = [0]
        while frontier:
            nxt = []
            for x in frontier:
                for s in elements:
                    y = int(self.mult[x, s])
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return frozenset(seen)

    @property
    def words(self) -> list[tuple[int, int]]:
        """Spanning tree over the generators: ``g = words[g][0] * gen[words[g][1]]``."""
        if self._words is None:
            words: list[Optional[tuple[int, int]]] = [None] * self.order
            words[0] = (0, -1)
            queue = deque([0])
            while queue:
                x = queue.popleft()
                for si, s in enumerate(self.gen_indices):
                    y = int(self.mult[x, s])
                    if words[y] is None:
                        words[y] = (x, si)
                        queue.append(y)
            self._words = words  # type: ignore[assignment]
        return self._words  # type: ignore[return-value]

    def bfs_order(self) -> list[int]:
        """Elements ordered so that each one's word prefix comes first."""
        order, seen = [0], {0}
        queue = deque([0])
        while queue:
            x = queue.popleft()
            for s in self.gen_indices:
                y = int(self.mult[x, s])
                if y not in seen:
                    seen.add(y)
                    order.append(y)
                    queue.append(y)
        return order

    def subgroup(self, members: Iterable[int]) -> "Subgroup":
        return Subgroup(self, members)

    def whole(self) -> "Subgroup":
        return Subgroup(self, range(self.order))

    def trivial_subgroup(self) -> "Subgroup":
        return Subgroup(self, [0])


def _greedy_generators(G: FiniteGroup) -> list[int]:
    gens: list[int] = []
    span = frozenset([0])
    # prefer elements of large order; deterministic by index within an order
    orders = G.element_orders if G.order > 1 else np.array([1])
    for g in sorted(range(G.order), key=lambda x: (-int(orders[x]), x)):
        if g not in span:
            gens.append(g)
            span = G.generated_by(gens)
            if len(span) == G.order:
                break
    return gens


class GroupHom:
    """A homomorphism given by the image of every source element."""

    def __init__(self, source: FiniteGroup, target: FiniteGroup, image_of, check: bool = True):
        self.source = source
        self.target = target
        self.image_of = np.asarray(image_of, dtype=np.int64)
        if self.image_of.shape != (source.order,):
            raise GroupError("image_of must list an image for every source element")
        if check:
            self.verify()

    def verify(self) -> None:
        S, T, f = self.source, self.target, self.image_of
        if f[0] != 0:
            raise GroupError("identity must map to identity")
        # exhaustive over pairs (g, s) with s a generator; by induction on word
        # length this is equivalent to the law on all pairs
        for s in S.gen_indices:
            lhs = f[S.mult[:, s]]
            rhs = T.mult[f, f[s]]
            if not np.array_equal(lhs, rhs):
                raise GroupError("map is not a homomorphism")

    @classmethod
    def from_generator_images(cls, source: FiniteGroup, target: FiniteGroup, images: Sequence[int]) -> "GroupHom":
        if len(images) != len(source.gen_indices):
            raise GroupError("need one image per source generator")
        img = np.zeros(source.order, dtype=np.int64)
        words = source.words
        for g in source.bfs_order()[1:]:
            x, si = words[g]
            img[g] = target.mult[img[x], images[si]]
        return cls(source, target, img)

    def __call__(self, g: int) -> int:
        return int(self.image_of[g])

    def compose(self, other: "GroupHom") -> "GroupHom":
        """``self ∘ other`` (apply ``other`` first)."""
        if other.target is not self.source:
            raise GroupError("composition: target/source mismatch")
        return GroupHom(other.source, self.target, self.image_of[other.image_of], check=False)

    def kernel(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.image_of == 0).tolist())

    def image(self) -> frozenset[int]:
        return frozenset(self.image_of.tolist())

    @classmethod
    def identity(cls, G: FiniteGroup) -> "GroupHom":
        return cls(G, G, np.arange(G.order), check=False)

    @classmethod
    def trivial(cls, source: FiniteGroup, target: FiniteGroup) -> "GroupHom":
        return cls(source, target, np.zeros(source.order, dtype=np.int64), check=False)


class Subgroup:
    """A subgroup of ``parent`` given by its member indices."""

    def __init__(self, parent: FiniteGroup, members: Iterable[int], check: bool = True):
        self.parent = parent
        self.members = tuple(sorted(set(int(m) for m in members)))
        if check:
            mset = np.zeros(parent.order, dtype=bool)
            mset[list(self.members)] = True
            if not mset[0]:
                raise GroupError("subgroup must contain the identity")
            idx = np.array(self.members)
            prods = parent.mult[np.ix_(idx, idx)]
            if not mset[prods].all() or not mset[parent.inv[idx]].all():
                raise GroupError("member set is not closed under products and inverses")
            if parent.order % len(self.members):
                raise GroupError("subgroup order does not divide group order")

    @property
    def order(self) -> int:
        return len(self.members)

    @property
    def index(self) -> int:
        return self.parent.order // self.order

    def __contains__(self, g: int) -> bool:
        return g in self.member_set

    @cached_property
    def member_set(self) -> frozenset[int]:
        return frozenset(self.members)

    def __eq__(self, other) -> bool:
        return isinstance(other, Subgroup) and other.parent is self.parent and other.members == self.members

    def __hash__(self):
        return hash((id(self.parent), self.members))

    def __repr__(self) -> str:
        return f"Subgroup(order={self.order} of {self.parent!r})"

    @cached_property
    def group(self) -> FiniteGroup:
        """The subgroup materialized as a group with its own indices."""
        P = self.parent
        elems = list(self.members)  # identity (0) is first
        idx = np.array(elems)
        sub = P.mult[np.ix_(idx, idx)]
        remap = -np.ones(P.order, dtype=np.int64)
        remap[idx] = np.arange(len(elems))
        table = remap[sub]
        labels = [P.labels[g] for g in elems] if P.labels is not None else elems
        return FiniteGroup(table, labels=labels, kind=P.kind if P.labels is not None else "sub", modulus=P.modulus,
                           name=f"sub{len(elems)}<{P.name}>")

    @cached_property
    def inclusion(self) -> GroupHom:
        return GroupHom(self.group, self.parent, np.array(self.members), check=False)

    @cached_property
    def parent_to_sub(self) -> np.ndarray:
        """Index in ``group`` for each parent element (-1 for non-members)."""
        out = -np.ones(self.parent.order, dtype=np.int64)
        out[list(self.members)] = np.arange(self.order)
        return out

    def contains_subgroup(self, other: "Subgroup") -> bool:
        return other.member_set <= self.member_set

    def normalized_by(self, t: int) -> bool:
        P = self.parent
        idx = np.array(self.members)
        conj = P.mult[P.mult[P.inv[t], idx], t]
        return bool(set(conj.tolist()) == self.member_set)


# ---------------------------------------------------------------------------
# construction


def _encode_matrices(mats: np.ndarray, m: int) -> np.ndarray:
    flat = mats.reshape(mats.shape[0], -1)
    weights = np.array([m**k for k in range(flat.shape[1] - 1, -1, -1)], dtype=object)
    if m ** flat.shape[1] < 2**62:
        return flat.astype(np.int64) @ weights.astype(np.int64)
    return np.array([int(sum(int(a) * int(w) for a, w in zip(row, weights))) for row in flat], dtype=object)


def _mat_label(a: np.ndarray) -> tuple:
    return tuple(tuple(int(x) for x in row) for row in a)


def _det_mod(a: np.ndarray, m: int) -> int:
    # Bareiss fraction-free elimination over the integers
    a = [[int(x) for x in row] for row in a]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return (sign * a[n - 1][n - 1]) % m


def generate_matrix_group(
    gens: Sequence, modulus: int, max_order: int = DEFAULT_MAX_ORDER, name: str = ""
) -> FiniteGroup:
    """Closure of invertible square matrices over Z/modulus."""
    mats = [np.mod(np.array(g, dtype=np.int64), modulus) for g in gens]
    if not mats:
        raise GroupError("need at least one generator")
    d = mats[0].shape[0]
    for g in mats:
        if g.shape != (d, d):
            raise GroupError("generators must be square matrices of equal size")
        if gcd(_det_mod(g, modulus), modulus) != 1:
            raise GroupError(f"generator {g.tolist()} is not invertible mod {modulus}")
    ident = np.eye(d, dtype=np.int64)
    labels = [_mat_label(ident)]
    elems = [ident]
    index = {labels[0]: 0}
    gen_idx = []
    words: list[tuple[int, int]] = [(0, -1)]
    # generators are placed by the BFS itself
    queue = deque([0])
    gen_labels = [_mat_label(g) for g in mats]
    while queue:
        x = queue.popleft()
        for si, g in enumerate(mats):
            y = (elems[x] @ g) % modulus
            lab = _mat_label(y)
            if lab not in index:
                if len(elems) >= max_order:
                    raise CapExceeded(f"group order exceeds cap {max_order} (--max-group-order)")
                index[lab] = len(elems)
                elems.append(y)
                labels.append(lab)
                words.append((x, si))
                queue.append(index[lab])
    gen_idx = [index[lab] for lab in gen_labels]
    arr = np.array(elems, dtype=np.int64)
    codes = _encode_matrices(arr, modulus)
    order = np.argsort(codes)
    sorted_codes = codes[order]
    n = len(elems)
    table = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        prods = np.einsum("ij,njk->nik", arr[i], arr) % modulus
        c = _encode_matrices(prods, modulus)
        table[i] = order[np.searchsorted(sorted_codes, c)]
    return FiniteGroup(table, labels=labels, gens=gen_idx, name=name or f"<mat mod {modulus}>",
                       kind="matrix", modulus=modulus, words=words)


def generate_from_closure(
    gens: Sequence[Hashable], mul: Callable[[Hashable, Hashable], Hashable], identity: Hashable,
    max_order: int = DEFAULT_MAX_ORDER, name: str = "", kind: str = "abstract",
) -> FiniteGroup:
    """Closure of hashable generators under an arbitrary product."""
    labels = [identity]
    index = {identity: 0}
    words: list[tuple[int, int]] = [(0, -1)]
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for si, g in enumerate(gens):
            y = mul(labels[x], g)
            if y not in index:
                if len(labels) >= max_order:
                    raise CapExceeded(f"group order exceeds cap {max_order} (--max-group-order)")
                index[y] = len(labels)
                labels.append(y)
                words.append((x, si))
                queue.append(index[y])
    n = len(labels)
    table = np.array([[index[mul(a, b)] for b in labels] for a in labels], dtype=np.int64)
    gen_idx = [index[g] for g in gens]
    return FiniteGroup(table, labels=labels, gens=gen_idx, name=name, kind=kind, words=words)


def generate_permutation_group(gens: Sequence[Sequence[int]], max_order: int = DEFAULT_MAX_ORDER, name: str = "") -> FiniteGroup:
    perms = [tuple(int(x) for x in p) for p in gens]
    if not perms:
        raise GroupError("need at least one generator")
    deg = len(perms[0])
    for p in perms:
        if len(p) != deg or sorted(p) != list(range(deg)):
            raise GroupError(f"{p} is not a permutation of 0..{deg - 1}")
    return generate_from_closure(
        perms, lambda p, q: tuple(p[i] for i in q), tuple(range(deg)), max_order, name or "<perm>", kind="permutation"
    )


def generate_group(gens: Sequence, kind: str = "permutation", modulus: Optional[int] = None,
                   max_order: int = DEFAULT_MAX_ORDER, name: str = "") -> FiniteGroup:
    if kind == "permutation":
        return generate_permutation_group(gens, max_order, name)
    if kind == "matrix":
        if modulus is None:
            raise GroupError("matrix groups need a modulus")
        return generate_matrix_group(gens, modulus, max_order, name)
    raise GroupError(f"unknown group kind {kind!r}")


def from_table(table, name: str = "") -> FiniteGroup:
    table = np.asarray(table, dtype=np.int64)
    n = table.shape[0]
    if table.shape != (n, n) or table.min() < 0 or table.max() >= n:
        raise GroupError("invalid multiplication table")
    G = FiniteGroup(table, name=name)
    if n <= 256:
        assoc = G.mult[G.mult[:, :, None], np.arange(n)[None, None, :]]
        assoc2 = G.mult[np.arange(n)[:, None, None], G.mult[None, :, :]]
        if not np.array_equal(assoc, assoc2):
            raise GroupError("table is not associative")
    return G


# named builders ------------------------------------------------------------


def cyclic(m: int) -> FiniteGroup:
    table = (np.arange(m)[:, None] + np.arange(m)[None, :]) % m
    return FiniteGroup(table, labels=[(k,) for k in range(m)], gens=[1 % m] if m > 1 else [],
                       name=f"Z/{m}", kind="cyclic", modulus=m)


def direct_product(G: FiniteGroup, H: FiniteGroup, name: str = "") -> FiniteGroup:
    n, m = G.order, H.order
    a = np.arange(n * m)
    g, h = a // m, a % m
    table = G.mult[g[:, None], g[None, :]] * m + H.mult[h[:, None], h[None, :]]
    gens = [x * m for x in G.gen_indices] + list(H.gen_indices)
    labels = [(int(x), int(y)) for x, y in zip(g, h)]
    return FiniteGroup(table, labels=labels, gens=gens or None, name=name or f"{G.name}x{H.name}")


def abelian(invariants: Sequence[int]) -> FiniteGroup:
    G = cyclic(invariants[0]) if invariants else cyclic(1)
    for d in invariants[1:]:
        G = direct_product(G, cyclic(d))
    G.name = "x".join(f"Z/{d}" for d in invariants) or "1"
    return G


def metacyclic(m: int, k: int, r: int, s: int, name: str = "") -> FiniteGroup:
    """``<x, y | x^m, y^k = x^s, y x y^-1 = x^r>`` on pairs (a, b) = x^a y^b."""
    if pow(r, k, m) != 1 % m or (r * s - s) % m:
        raise GroupError("inconsistent metacyclic parameters")

    def mul(u, v):
        a, b = u
        c, d = v
        e = (a + c * pow(r, b, m)) % m
        f = b + d
        if f >= k:
            f -= k
            e = (e + s) % m
        return (e, f)

    return generate_from_closure([(1 % m, 0), (0, 1 % k)], mul, (0, 0), name=name or f"Meta({m},{k},{r},{s})")


def semidirect_abelian(orders: Sequence[int], auto: Sequence[Sequence[int]], k: int, name: str = "") -> FiniteGroup:
    """``V ⋊ Z/k`` with V = ⊕ Z/orders[i] and the generator acting by ``auto``."""
    auto = np.array(auto, dtype=np.int64)
    orders = np.array(orders, dtype=np.int64)
    pows = [np.eye(len(orders), dtype=np.int64)]
    for _ in range(k):
        pows.append(auto @ pows[-1])

    def mul(u, v):
        w, j = np.array(u[0]), u[1]
        x, l = np.array(v[0]), v[1]
        z = (w + pows[j] @ x) % orders
        return (tuple(int(t) for t in z), (j + l) % k)

    zero = tuple([0] * len(orders))
    gens = []
    for i in range(len(orders)):
        e = [0] * len(orders)
        e[i] = 1
        gens.append((tuple(e), 0))
    gens.append((zero, 1 % k))
    return generate_from_closure(gens, mul, (zero, 0), name=name or "semidirect")


def symmetric(n: int) -> FiniteGroup:
    if n < 2:
        return generate_permutation_group([tuple(range(max(n, 1)))], name=f"S{n}")
    gens = [tuple([1, 0] + list(range(2, n))), tuple(list(range(1, n)) + [0])]
    return generate_permutation_group(gens, name=f"S{n}")


def alternating(n: int) -> FiniteGroup:
    gens = []
    for i in range(2, n):
        p = list(range(n))
        p[0], p[1], p[i] = 1, i, 0
        gens.append(tuple(p))
    return generate_permutation_group(gens, name=f"A{n}")


def dihedral(m: int) -> FiniteGroup:
    return metacyclic(m, 2, m - 1, 0, name=f"D{m}")


def elementary_matrix(n: int, i: int, j: int, value: int = 1) -> np.ndarray:
    a = np.eye(n, dtype=np.int64)
    a[i, j] = value
    return a


def _primitive_root(p: int) -> int:
    for g in range(1, p):
        if len({pow(g, k, p) for k in range(1, p)}) == p - 1:
            return g
    raise GroupError(f"{p} has no primitive root")


def _diag_gens(n: int, p: int) -> list[np.ndarray]:
    if p == 2:
        return []
    g = _primitive_root(p)
    out = []
    for i in range(n):
        d = np.eye(n, dtype=np.int64)
        d[i, i] = g
        out.append(d)
    return out


def unitriangular(n: int, p: int) -> FiniteGroup:
    gens = [elementary_matrix(n, i, i + 1) for i in range(n - 1)] or [np.eye(n, dtype=np.int64)]
    return generate_matrix_group(gens, p, name=f"U{n}(F{p})")


def borel(n: int, p: int) -> FiniteGroup:
    gens = [elementary_matrix(n, i, i + 1) for i in range(n - 1)] + _diag_gens(n, p)
    return generate_matrix_group(gens or [np.eye(n, dtype=np.int64)], p, name=f"B{n}(F{p})")


def torus(n: int, p: int) -> FiniteGroup:
    gens = _diag_gens(n, p) or [np.eye(n, dtype=np.int64)]
    return generate_matrix_group(gens, p, name=f"T{n}(F{p})")


def general_linear(n: int, m: int, max_order: int = DEFAULT_MAX_ORDER) -> FiniteGroup:
    units = [u for u in range(1, m) if gcd(u, m) == 1] or [1]
    gens = []
    for i in range(n):
        for j in range(n):
            if i != j:
                gens.append(elementary_matrix(n, i, j))
    for u in units:
        if u != 1:
            d = np.eye(n, dtype=np.int64)
            d[0, 0] = u
            gens.append(d)
    if not gens:
        gens = [np.eye(n, dtype=np.int64)]
    return generate_matrix_group(gens, m, max_order=max_order, name=f"GL{n}(Z/{m})")


def U3(p: int) -> FiniteGroup:
    return unitriangular(3, p)


def B3(p: int) -> FiniteGroup:
    return borel(3, p)


def T3(p: int) -> FiniteGroup:
    return torus(3, p)


def subgroup_from_labels(G: FiniteGroup, labels: Iterable) -> Subgroup:
    """Subgroup of ``G`` generated by the elements with the given labels."""
    idx = [G.index_of(_mat_label(np.array(l)) if G.kind == "matrix" else l) for l in labels]
    return Subgroup(G, G.generated_by(idx))


def matrix_label(a) -> tuple:
    return _mat_label(np.asarray(a))


# ---------------------------------------------------------------------------
# subgroups, cosets, characters


def transversal(G: FiniteGroup, H: Subgroup, side: str = "right") -> list[int]:
    """Coset representatives, lowest index per coset; the identity represents ``H``.

    ``side="right"`` gives representatives of the cosets ``H t``; ``"left"`` of ``t H``.
    """
    if H.parent is not G:
        raise GroupError("subgroup of a different group")
    if side not in ("left", "right"):
        raise GroupError("side must be 'left' or 'right'")
    covered = np.zeros(G.order, dtype=bool)
    reps = []
    hidx = np.array(H.members)
    for g in range(G.order):
        if covered[g]:
            continue
        reps.append(g)
        coset = G.mult[hidx, g] if side == "right" else G.mult[g, hidx]
        covered[coset] = True
    return reps


def coset_decomposition(G: FiniteGroup, H: Subgroup) -> tuple[list[int], np.ndarray, np.ndarray]:
    """Right transversal plus, for each g, its representative and ``g t(g)^-1`` in H.

    Returns ``(reps, rep_of, h_part)`` with ``g = h_part[g] * rep_of[g]``.
    """
    reps = transversal(G, H, "right")
    rep_of = np.zeros(G.order, dtype=np.int64)
    hidx = np.array(H.members)
    for t in reps:
        rep_of[G.mult[hidx, t]] = t
    h_part = G.mult[np.arange(G.order), G.inv[rep_of]]
    return reps, rep_of, h_part


def exponent(G) -> int:
    if isinstance(G, Subgroup):
        G = G.group
    return G.exponent()


def characters_mod(G, e: Optional[int] = None) -> ZnMatrix:
    """Rows generating Hom(G, Z/e) as functions on the elements of ``G``."""
    if isinstance(G, Subgroup):
        G = G.group
    if e is None:
        e = G.exponent()
    n = G.order
    g = np.repeat(np.arange(n), n)
    h = np.tile(np.arange(n), n)
    gh = G.mult[g, h].astype(np.int64)
    M = np.zeros((n, n * n), dtype=np.int64)
    cols = np.arange(n * n)
    np.add.at(M, (g, cols), 1)
    np.add.at(M, (h, cols), 1)
    np.add.at(M, (gh, cols), -1)
    return kernel_basis(ZnMatrix(M, e))


def all_subgroups(G: FiniteGroup, max_order: int = DEFAULT_MAX_SUBGROUP_SEARCH) -> list[Subgroup]:
    """Every subgroup exactly once, ordered by (order, members)."""
    if G.order > max_order:
        raise CapExceeded(f"subgroup enumeration needs |G| <= {max_order}, got {G.order}")
    cyclic_sets = {G.generated_by([g]) for g in range(G.order)}
    cyc = sorted(cyclic_sets, key=lambda s: (len(s), sorted(s)))
    found = set(cyclic_sets)
    frontier = list(cyclic_sets)
    while frontier:
        nxt = []
        for A in frontier:
            for C in cyc:
                if C <= A:
                    continue
                J = _closure(G, A | C)
                if J not in found:
                    found.add(J)
                    nxt.append(J)
        frontier = nxt
    subs = sorted(found, key=lambda s: (len(s), sorted(s)))
    return [Subgroup(G, s, check=False) for s in subs]


def _closure(G: FiniteGroup, elements) -> frozenset[int]:
    # finite set closed under products is a subgroup; square until stable
    cur = np.zeros(G.order, dtype=bool)
    cur[list(elements)] = True
    while True:
        idx = np.flatnonzero(cur)
        nxt = np.zeros_like(cur)
        nxt[G.mult[np.ix_(idx, idx)].ravel()] = True
        nxt |= cur
        if nxt.sum() == cur.sum():
            return frozenset(idx.tolist())
        cur = nxt


def conjugation_hom(H: Subgroup, t: int) -> GroupHom:
    """The automorphism ``g -> t^-1 g t`` of ``H`` for ``t`` in the parent normalizing H."""
    P = H.parent
    if not H.normalized_by(t):
        raise GroupError("element does not normalize the subgroup")
    idx = np.array(H.members)
    conj = P.mult[P.mult[P.inv[t], idx], t]
    img = H.parent_to_sub[conj]
    return GroupHom(H.group, H.group, img, check=False)
