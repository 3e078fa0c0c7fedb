"""Finite modules (Z/n)^k with a group action by invertible matrices.

``action[g]`` acts on column vectors: ``g.a = action[g] @ a``.  Arrays of
module elements are stored one element per row, so the batched action is
``values @ action[g].T``.
"""

from __future__ import annotations

from functools import cached_property
from math import gcd
from typing import Optional, Sequence

import numpy as np

from .groups import FiniteGroup, GroupError, GroupHom, Subgroup, coset_decomposition, transversal
from .linalg import ZnMatrix, kernel_basis, matmul_mod


class ModuleError(ValueError):
    pass


class HModule:
    """A finite ``group``-module ``(Z/modulus)^rank``."""

    def __init__(self, group: FiniteGroup, modulus: int, action, basis_labels: Optional[Sequence[str]] = None,
                 name: str = "", check: bool = True):
        act = np.mod(np.asarray(action, dtype=np.int64), modulus)
        if act.ndim != 3 or act.shape[0] != group.order or act.shape[1] != act.shape[2]:
            raise ModuleError("action must be an array of shape (|G|, k, k)")
        act.setflags(write=False)
        self.group = group
        self.modulus = modulus
        self.rank = act.shape[1]
        self.action = act
        self.basis_labels = list(basis_labels) if basis_labels is not None else None
        self.name = name
        if check:
            self.verify()

    def __repr__(self) -> str:
        return f"HModule({self.name or '?'}, (Z/{self.modulus})^{self.rank} over {self.group!r})"

    def verify(self) -> None:
        G, n, k = self.group, self.modulus, self.rank
        if not np.array_equal(self.action[0], np.eye(k, dtype=np.int64) % n):
            raise ModuleError("identity must act trivially")
        # pairs (g, s) with s a generator suffice: the law propagates along words
        for s in G.gen_indices:
            lhs = self.action[G.mult[:, s]]
            rhs = np.einsum("gij,jk->gik", self.action, self.action[s]) % n
            if not np.array_equal(lhs, rhs):
                raise ModuleError("action is not a homomorphism to invertible matrices")

    @property
    def size(self) -> int:
        return self.modulus**self.rank

    @cached_property
    def exponent(self) -> int:
        """Exponent of the underlying abelian group (divides the modulus)."""
        return self.modulus if self.rank else 1

    def act(self, g: int, values: np.ndarray) -> np.ndarray:
        """``g`` applied to a single element or to a batch (rows)."""
        values = np.asarray(values, dtype=np.int64)
        return np.mod(values @ self.action[g].T, self.modulus)

    @classmethod
    def from_generator_action(cls, group: FiniteGroup, modulus: int, gen_matrices, **kw) -> "HModule":
        gen_matrices = [np.mod(np.asarray(m, dtype=np.int64), modulus) for m in gen_matrices]
        if len(gen_matrices) != len(group.gen_indices):
            raise ModuleError(f"need {len(group.gen_indices)} generator matrices, got {len(gen_matrices)}")
        k = gen_matrices[0].shape[0] if gen_matrices else kw.pop("rank", 1)
        act = np.zeros((group.order, k, k), dtype=np.int64)
        act[0] = np.eye(k, dtype=np.int64)
        words = group.words
        for g in group.bfs_order()[1:]:
            x, si = words[g]
            act[g] = (act[x] @ gen_matrices[si]) % modulus
        return cls(group, modulus, act, **kw)

    @classmethod
    def trivial(cls, group: FiniteGroup, modulus: int, rank: int = 1) -> "HModule":
        act = np.broadcast_to(np.eye(rank, dtype=np.int64), (group.order, rank, rank))
        return cls(group, modulus, act, name=f"(Z/{modulus})^{rank} trivial", check=False)

    def restrict(self, f: GroupHom) -> "HModule":
        """Pull the action back along ``f: source -> self.group``."""
        if f.target is not self.group:
            raise ModuleError("homomorphism target is not the module's group")
        return HModule(f.source, self.modulus, self.action[f.image_of], self.basis_labels,
                       name=self.name, check=False)

    def restrict_to(self, H: Subgroup) -> "HModule":
        if H.parent is not self.group:
            raise ModuleError("subgroup of a different group")
        return self.restrict(H.inclusion)

    def elements(self) -> np.ndarray:
        """All module elements, row ``i`` holding the base-n digits of ``i``."""
        n, k = self.modulus, self.rank
        idx = np.arange(n**k)
        return np.stack([(idx // n ** (k - 1 - j)) % n for j in range(k)], axis=1) if k else np.zeros((1, 0), np.int64)

    def encode(self, values: np.ndarray) -> np.ndarray:
        values = np.atleast_2d(values)
        w = self.modulus ** np.arange(self.rank - 1, -1, -1, dtype=np.int64)
        return values @ w

    def is_module_map(self, other: "HModule", phi) -> bool:
        """Whether ``a -> phi @ a`` (column convention) commutes with the actions."""
        if other.group is not self.group:
            return False
        phi = np.asarray(phi, dtype=np.int64)
        n = other.modulus
        lhs = np.einsum("ij,gjk->gik", phi, self.action) % n
        rhs = np.einsum("gij,jk->gik", other.action, phi) % n
        return bool(np.array_equal(lhs, rhs))


def _as_member_array(M: HModule, H: Optional[Subgroup]) -> np.ndarray:
    if H is None:
        return np.arange(M.group.order)
    if H.parent is not M.group:
        raise ModuleError("subgroup is not a subgroup of the module's group")
    return np.array(H.members)


def invariants(M: HModule, H: Optional[Subgroup] = None) -> ZnMatrix:
    """Rows generating ``A^H`` (``H`` defaults to the whole group)."""
    idx = _as_member_array(M, H)
    k, n = M.rank, M.modulus
    if k == 0:
        return ZnMatrix(np.zeros((0, 0), dtype=np.int64), n, cols=0)
    blocks = [(M.action[g] - np.eye(k, dtype=np.int64)).T for g in idx if g != 0]
    if not blocks:
        return ZnMatrix(np.eye(k, dtype=np.int64), n)
    # a @ (act[g] - I)^T = 0 for every g
    return kernel_basis(ZnMatrix(np.concatenate(blocks, axis=1), n))


def is_invariant(M: HModule, a, H: Optional[Subgroup] = None) -> bool:
    idx = _as_member_array(M, H)
    a = np.mod(np.asarray(a, dtype=np.int64), M.modulus)
    imgs = np.mod(np.einsum("gij,j->gi", M.action[idx], a), M.modulus)
    return bool((imgs == a).all())


def norm_map(M: HModule, H: Optional[Subgroup], H_sub: Subgroup, a) -> np.ndarray:
    """``N_{H/H'}(a) = sum of t.a`` over a left transversal of ``H_sub`` in ``H``."""
    if H is None:
        H = M.group.whole()
    if not H.contains_subgroup(H_sub):
        raise ModuleError("H' is not contained in H")
    if not is_invariant(M, a, H_sub):
        raise ModuleError("element is not H'-invariant")
    a = np.mod(np.asarray(a, dtype=np.int64), M.modulus)
    Hg = H.group
    Hp = Subgroup(Hg, H.parent_to_sub[list(H_sub.members)], check=False)
    reps, _, _ = coset_decomposition(Hg, Hp)
    # inverses of right representatives form a left transversal
    total = np.zeros(M.rank, dtype=np.int64)
    for t in reps:
        g = H.members[int(Hg.inv[t])]
        total += M.action[g] @ a
    return total % M.modulus


def element_norm(M: HModule, g: int, a) -> np.ndarray:
    """``(1 + g + ... + g^(o-1)) a`` for ``o`` the order of ``g``."""
    G = M.group
    a = np.asarray(a, dtype=np.int64)
    total = np.zeros(M.rank, dtype=np.int64)
    x = 0
    for _ in range(int(G.element_orders[g])):
        total += M.action[x] @ a
        x = int(G.mult[x, g])
    return total % M.modulus


def stabilizer(M: HModule, a) -> Subgroup:
    a = np.mod(np.asarray(a, dtype=np.int64), M.modulus)
    imgs = np.mod(np.einsum("gij,j->gi", M.action, a), M.modulus)
    members = np.flatnonzero((imgs == a).all(axis=1))
    return Subgroup(M.group, members.tolist(), check=False)


def orbit_representatives(M: HModule) -> tuple[np.ndarray, np.ndarray]:
    """Minimal-code representative of every orbit, with orbit sizes.

    Orbits are found by union-find over the generator actions on all of A.
    """
    G = M.group
    elems = M.elements()
    codes = np.arange(elems.shape[0])
    parent = codes.copy()

    def find(x: np.ndarray) -> np.ndarray:
        while True:
            px = parent[x]
            if np.array_equal(px, x):
                return x
            x = px

    for s in G.gen_indices:
        img = M.encode(np.mod(elems @ M.action[s].T, M.modulus))
        # iterate hooking until every element shares a root with its image
        while True:
            ra, rb = find(codes), find(img)
            diff = ra != rb
            if not diff.any():
                break
            lo = np.minimum(ra[diff], rb[diff])
            hi = np.maximum(ra[diff], rb[diff])
            np.minimum.at(parent, hi, lo)
            parent[:] = find(codes)
    roots = find(codes)
    reps, sizes = np.unique(roots, return_counts=True)
    return elems[reps], sizes


# named modules --------------------------------------------------------------


def gl_conjugation_module(G: FiniteGroup, n: Optional[int] = None, p: Optional[int] = None) -> HModule:
    """``gl_n(F_p)`` = n x n matrices over F_p with ``g.M = g M g^-1``.

    Coordinates are the matrix units ``E_ij`` in row-major order.
    """
    if G.kind != "matrix":
        raise ModuleError("gl_conj needs a matrix group")
    mats = G.matrices
    n = n or mats.shape[1]
    p = p or G.modulus
    if mats.shape[1] != n:
        raise ModuleError("matrix size mismatch")
    inv = mats[G.inv]
    # row-major vec(g M h) = kron(g, h^T) vec(M)
    act = np.einsum("gij,gkl->gikjl", mats, np.transpose(inv, (0, 2, 1))).reshape(G.order, n * n, n * n) % p
    labels = [f"E{i + 1}{j + 1}" for i in range(n) for j in range(n)]
    return HModule(G, p, act, labels, name=f"gl{n}(F{p})")


def upper_triangular_indices(n: int) -> list[int]:
    return [i * n + j for i in range(n) for j in range(n) if i <= j]


def borel_lie_module(G: FiniteGroup, n: Optional[int] = None, p: Optional[int] = None) -> HModule:
    """``b_n(F_p)``: upper triangular matrices under conjugation by an upper triangular group."""
    full = gl_conjugation_module(G, n, p)
    n = int(round(full.rank**0.5))
    keep = upper_triangular_indices(n)
    sub = full.action[:, keep][:, :, keep]
    # the complement must not leak into b_n
    drop = [i for i in range(n * n) if i not in keep]
    if full.action[:, drop][:, :, keep].any():
        raise ModuleError("group does not preserve upper triangular matrices")
    return HModule(G, full.modulus, sub, [full.basis_labels[i] for i in keep], name=f"b{n}(F{full.modulus})")


def matrix_unit(n: int, i: int, j: int) -> np.ndarray:
    """Coordinates of ``E_ij`` (1-based) in the gl_n basis."""
    v = np.zeros(n * n, dtype=np.int64)
    v[(i - 1) * n + (j - 1)] = 1
    return v


def as_matrix(v, n: int) -> np.ndarray:
    return np.asarray(v, dtype=np.int64).reshape(n, n)


def permutation_module(G: FiniteGroup, modulus: int, H: Subgroup) -> HModule:
    """``Z/n[G/H]``: the permutation module on left cosets of ``H``."""
    reps = transversal(G, H, "left")
    hidx = np.array(H.members)
    coset_of = np.zeros(G.order, dtype=np.int64)
    for i, t in enumerate(reps):
        coset_of[G.mult[t, hidx]] = i
    r = len(reps)
    act = np.zeros((G.order, r, r), dtype=np.int64)
    for g in range(G.order):
        for i, t in enumerate(reps):
            act[g, coset_of[G.mult[g, t]], i] = 1
    return HModule(G, modulus, act, name=f"Z/{modulus}[G/H]")


def character_module(G: FiniteGroup, modulus: int, gen_units: Sequence[int]) -> HModule:
    """Rank-one module where generator ``i`` acts by the unit ``gen_units[i]``."""
    for u in gen_units:
        if gcd(int(u), modulus) != 1:
            raise ModuleError(f"{u} is not a unit mod {modulus}")
    return HModule.from_generator_action(G, modulus, [[[u]] for u in gen_units], name=f"Z/{modulus}(chi)")


def direct_sum(A: HModule, B: HModule) -> HModule:
    if A.group is not B.group or A.modulus != B.modulus:
        raise ModuleError("direct sum needs the same group and modulus")
    k, l = A.rank, B.rank
    act = np.zeros((A.group.order, k + l, k + l), dtype=np.int64)
    act[:, :k, :k] = A.action
    act[:, k:, k:] = B.action
    return HModule(A.group, A.modulus, act, name=f"{A.name}+{B.name}", check=False)


def weight_of_torus_element(t: np.ndarray, i: int, j: int, p: int) -> int:
    """``t_i / t_j`` for a diagonal matrix over F_p (1-based indices)."""
    return int(t[i - 1, i - 1] * pow(int(t[j - 1, j - 1]), -1, p)) % p


def apply_module_map(phi, values: np.ndarray, modulus: int) -> np.ndarray:
    """Apply ``a -> phi @ a`` to rows of ``values``."""
    phi = np.asarray(phi, dtype=np.int64)
    return matmul_mod(values.reshape(-1, phi.shape[1]), phi.T, modulus).reshape(values.shape[:-1] + (phi.shape[0],))
