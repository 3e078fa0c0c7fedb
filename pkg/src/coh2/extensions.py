"""Group extensions with abelian kernel: factor sets, lifting decisions and
order-p lifts of unipotent matrices to Z/p^2."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .cochains import Cochain, CohomologyContext, is_cocycle
from .groups import FiniteGroup, GroupHom, cyclic, from_table
from .linalg import ZnMatrix, left_certificate, solve
from .maps import pullback
from .modules import HModule, borel_lie_module, gl_conjugation_module, upper_triangular_indices

DEFAULT_MAX_EXHAUSTIVE = 200_000


class ExtensionError(ValueError):
    pass


@dataclass
class ExtensionSpec:
    quotient: FiniteGroup
    kernel_module: HModule
    section: Callable[[int], object]
    factor_set: Cochain
    provenance: dict = field(default_factory=dict)

    def product(self, x: tuple[np.ndarray, int], y: tuple[np.ndarray, int]) -> tuple[np.ndarray, int]:
        """Multiply pairs ``(a, h)`` in factor-set coordinates."""
        (a, h), (b, k) = x, y
        M = self.kernel_module
        c = (a + M.act(h, b) + self.factor_set(h, k)) % M.modulus
        return c, int(self.quotient.mult[h, k])


# generic construction -------------------------------------------------------


def factor_set_from_groups(G: FiniteGroup, pi: GroupHom, module: HModule, iota: Sequence[int],
                           section: Optional[Sequence[int]] = None) -> ExtensionSpec:
    """Factor set of ``0 -> A -> G -> H -> 1``.

    ``iota[code]`` is the element of ``G`` attached to the module element with
    that code (see ``HModule.encode``); ``section[h]`` optionally fixes the
    set-theoretic section (default: least preimage, so ``s(1) = 1``).
    """
    H = module.group
    if pi.source is not G or pi.target is not H:
        raise ExtensionError("pi must map G onto the module's group")
    n, k = module.modulus, module.rank
    iota = np.asarray(iota, dtype=np.int64)
    elems = module.elements()
    if iota.shape != (elems.shape[0],):
        raise ExtensionError("iota needs one group element per module element")
    if len(set(iota.tolist())) != iota.size:
        raise ExtensionError("iota is not injective")
    kernel = sorted(int(g) for g in np.flatnonzero(pi.image_of == 0))
    if sorted(iota.tolist()) != kernel:
        raise ExtensionError("iota(A) is not the kernel of pi")
    codes = module.encode(elems)
    back = -np.ones(G.order, dtype=np.int64)
    back[iota[codes]] = codes
    unit = np.eye(k, dtype=np.int64) % n if k else np.zeros((0, 0), dtype=np.int64)
    for i in range(k):
        # additivity on generators: iota(x + e_i) = iota(x) iota(e_i)
        shifted = module.encode((elems + unit[i]) % n)
        ei = iota[module.encode(unit[i].reshape(1, -1))[0]]
        if not np.array_equal(iota[shifted], G.mult[iota[codes], ei]):
            raise ExtensionError("iota is not a homomorphism")
    if section is None:
        section = np.full(H.order, -1, dtype=np.int64)
        for g in range(G.order - 1, -1, -1):
            section[pi.image_of[g]] = g
    section = np.asarray(section, dtype=np.int64)
    if (pi.image_of[section] != np.arange(H.order)).any():
        raise ExtensionError("section is not a section of pi")
    # kernel must be abelian
    kidx = np.array(kernel)
    if not np.array_equal(G.mult[np.ix_(kidx, kidx)], G.mult[np.ix_(kidx, kidx)].T):
        raise ExtensionError("kernel is not abelian")
    # conjugation by s(h) must match the module action
    for h in range(H.order):
        s = section[h]
        for i in range(k):
            ei = iota[module.encode(unit[i].reshape(1, -1))[0]]
            conj = G.mult[G.mult[s, ei], G.inv[s]]
            expect = iota[module.encode(module.action[h][:, i].reshape(1, -1))[0]]
            if conj != expect:
                raise ExtensionError("conjugation action does not match the module")
    g = np.repeat(np.arange(H.order), H.order)
    h = np.tile(np.arange(H.order), H.order)
    prod = G.mult[G.mult[section[g], section[h]], G.inv[section[H.mult[g, h]]]]
    codes_f = back[prod]
    if (codes_f < 0).any():
        raise AssertionError("s(g)s(h)s(gh)^-1 left the kernel")
    values = elems[codes_f] if k else np.zeros((g.size, 0), dtype=np.int64)
    f = Cochain(2, module, values)
    if not is_cocycle(f):
        raise AssertionError("factor set is not a cocycle")
    return ExtensionSpec(H, module, lambda x: int(section[x]), f, {"constructor": "from_groups"})


def cyclic_kummer(m: int, n: int) -> ExtensionSpec:
    """``0 -> Z/n -> Z/mn -> Z/m -> 0`` with ``1 -> m``."""
    G, H = cyclic(m * n), cyclic(m)
    pi = GroupHom(G, H, np.arange(m * n) % m)
    module = HModule.trivial(H, n)
    iota = (m * np.arange(n)) % (m * n)
    ext = factor_set_from_groups(G, pi, module, iota)
    ext.provenance = {"constructor": "cyclic_kummer", "m": m, "n": n}
    return ext


def from_tables(big_table, quotient_map: Sequence[int], quotient_table, kernel_modulus: int,
                kernel_gens: Sequence[int]) -> ExtensionSpec:
    """Extension given by multiplication tables.

    ``kernel_gens`` lists elements of the big group forming a basis of the
    kernel ``(Z/kernel_modulus)^r``; the module action is read off by conjugation.
    """
    G = from_table(big_table, name="G")
    H = from_table(quotient_table, name="H")
    pi = GroupHom(G, H, np.asarray(quotient_map, dtype=np.int64))
    n, r = kernel_modulus, len(kernel_gens)
    # iota from coordinates
    elems = np.array(list(itertools.product(range(n), repeat=r)), dtype=np.int64).reshape(-1, r)
    iota = []
    for v in elems:
        x = 0
        for gi, c in zip(kernel_gens, v):
            for _ in range(int(c)):
                x = int(G.mult[x, gi])
        iota.append(x)
    iota = np.array(iota, dtype=np.int64)
    lookup = {int(g): i for i, g in enumerate(iota)}
    if len(lookup) != len(iota):
        raise ExtensionError("kernel generators are not independent")
    section = np.full(H.order, -1, dtype=np.int64)
    for g in range(G.order - 1, -1, -1):
        section[pi.image_of[g]] = g
    act = np.zeros((H.order, r, r), dtype=np.int64)
    for h in range(H.order):
        s = section[h]
        for i, gi in enumerate(kernel_gens):
            conj = int(G.mult[G.mult[s, gi], G.inv[s]])
            if conj not in lookup:
                raise ExtensionError("kernel is not normal")
            act[h, :, i] = elems[lookup[conj]]
    module = HModule(H, n, act, name="kernel")
    # elements() enumerates in the same base-n order as itertools.product
    ext = factor_set_from_groups(G, pi, module, iota, section)
    ext.provenance = {"constructor": "from_tables"}
    return ext


# GL_n(Z/p^2) -> GL_n(F_p) -----------------------------------------------------


def matrix_inverse_mod(m: np.ndarray, p: int) -> np.ndarray:
    n = m.shape[0]
    aug = np.concatenate([np.mod(m, p), np.eye(n, dtype=np.int64)], axis=1)
    for c in range(n):
        piv = next((r for r in range(c, n) if aug[r, c] % p), None)
        if piv is None:
            raise ExtensionError("matrix is not invertible mod p")
        aug[[c, piv]] = aug[[piv, c]]
        aug[c] = (aug[c] * pow(int(aug[c, c]), -1, p)) % p
        for r in range(n):
            if r != c and aug[r, c]:
                aug[r] = (aug[r] - aug[r, c] * aug[c]) % p
    return aug[:, n:]


def glnp2_factor_set(n: int, p: int, H: FiniteGroup, kernel: str = "gl") -> ExtensionSpec:
    """Factor set of ``GL_n(Z/p^2) -> GL_n(F_p)`` restricted to the matrix group ``H``.

    The section lifts residues ``0..p-1`` entrywise and the kernel is
    ``I + pM -> M``.  ``kernel="b"`` uses upper triangular matrices (``H`` must
    be upper triangular).
    """
    if H.kind != "matrix" or H.modulus != p or H.matrices.shape[1] != n:
        raise ExtensionError(f"H must be a group of {n}x{n} matrices over F_{p}")
    if kernel == "gl":
        module = gl_conjugation_module(H, n, p)
        keep = list(range(n * n))
    elif kernel == "b":
        module = borel_lie_module(H, n, p)
        keep = upper_triangular_indices(n)
    else:
        raise ExtensionError("kernel must be 'gl' or 'b'")
    S = np.mod(H.matrices.astype(np.int64), p)  # residues 0..p-1 read in Z/p^2
    N = H.order
    mult = H.mult.astype(np.int64)
    inv_mats = S[H.inv]   # s(x)^-1 mod p = matrix of x^-1
    values = np.empty((N, N, n * n), dtype=np.int64)
    for g in range(N):
        prod = np.einsum("ij,hjk->hik", S[g], S) % (p * p)
        diff = (prod - S[mult[g]]) % (p * p)
        if (diff % p).any():
            raise AssertionError("s(g)s(h) - s(gh) is not divisible by p")
        M = np.einsum("hij,hjk->hik", diff // p, inv_mats[mult[g]]) % p
        values[g] = M.reshape(N, n * n)
    values = values.reshape(N * N, n * n)
    dropped = [i for i in range(n * n) if i not in keep]
    if dropped and values[:, dropped].any():
        raise AssertionError("factor set leaves the upper triangular kernel")
    f = Cochain(2, module, values[:, keep])
    if not is_cocycle(f):
        raise AssertionError("factor set is not a cocycle")
    name = "gln_p2" if kernel == "gl" else "bn_p2"
    return ExtensionSpec(H, module, lambda x: S[x], f, {"constructor": name, "n": n, "p": p})


# lifting ---------------------------------------------------------------------


@dataclass
class LiftResult:
    lifts: bool
    lift: Optional[list[tuple[np.ndarray, int]]] = None   # gamma -> (a, rho(gamma))
    witness: Optional[Cochain] = None                      # pulled-back class when no lift exists

    def to_dict(self) -> dict:
        out = {"verdict": "lifts" if self.lifts else "does not lift"}
        if self.lift is not None:
            out["lift"] = [{"kernel": [int(x) for x in a], "image": int(h)} for a, h in self.lift]
        if self.witness is not None:
            out["pulled_back_cocycle"] = self.witness.values.tolist()
        return out


def _is_lift(rho: GroupHom, ext: ExtensionSpec, pairs) -> bool:
    Gam = rho.source
    for x in range(Gam.order):
        if pairs[x][1] != rho(x):
            return False
        for y in range(Gam.order):
            a, h = ext.product(pairs[x], pairs[y])
            c, k = pairs[int(Gam.mult[x, y])]
            if h != k or not np.array_equal(a, c):
                return False
    return True


def lift_decision(rho: GroupHom, ext: ExtensionSpec) -> LiftResult:
    """Whether ``rho: Gamma -> H`` lifts through the extension, with an explicit lift."""
    if rho.target is not ext.quotient:
        raise ExtensionError("homomorphism target is not the extension quotient")
    f = pullback(ext.factor_set, rho)
    ctx = CohomologyContext(f.module)
    x = ctx.coboundary_preimage(f)
    if x is None:
        return LiftResult(False, witness=f)
    n = ext.kernel_module.modulus
    pairs = [((-x.values[g]) % n, int(rho(g))) for g in range(rho.source.order)]
    if not _is_lift(rho, ext, pairs):
        raise AssertionError("constructed lift is not multiplicative")
    return LiftResult(True, lift=pairs)


def exhaustive_lift_search(rho: GroupHom, ext: ExtensionSpec, cap: int = DEFAULT_MAX_EXHAUSTIVE) -> Optional[list]:
    """Search lifts by choosing kernel coordinates on generators of Gamma."""
    Gam = rho.source
    M = ext.kernel_module
    gens = Gam.gen_indices
    elems = M.elements()
    if len(elems) ** len(gens) > cap:
        raise ExtensionError("exhaustive search exceeds the cap")
    words = Gam.words
    order = Gam.bfs_order()
    for choice in itertools.product(range(len(elems)), repeat=len(gens)):
        gen_pairs = [(elems[c], int(rho(s))) for c, s in zip(choice, gens)]
        pairs: list = [None] * Gam.order
        pairs[0] = (np.zeros(M.rank, dtype=np.int64), 0)
        for g in order[1:]:
            prev, si = words[g]
            pairs[g] = ext.product(pairs[prev], gen_pairs[si])
        if _is_lift(rho, ext, pairs):
            return pairs
    return None


# order-p lifts ---------------------------------------------------------------


def _matpow(m: np.ndarray, e: int, mod: int) -> np.ndarray:
    out = np.eye(m.shape[-1], dtype=np.int64)
    out = np.broadcast_to(out, m.shape).copy()
    base = m.copy()
    while e:
        if e & 1:
            out = np.matmul(out, base) % mod
        base = np.matmul(base, base) % mod
        e >>= 1
    return out


def conjugation_norm_matrix(sigma: np.ndarray, p: int) -> np.ndarray:
    """Matrix of ``a -> sum_i sigma^i a sigma^-i`` on row-major ``n x n`` matrices."""
    n = sigma.shape[0]
    sigma = np.mod(sigma, p)
    inv = matrix_inverse_mod(sigma, p)
    total = np.zeros((n * n, n * n), dtype=np.int64)
    g, gi = np.eye(n, dtype=np.int64), np.eye(n, dtype=np.int64)
    order = 0
    while True:
        total += np.kron(g, gi.T)
        order += 1
        g, gi = (g @ sigma) % p, (inv @ gi) % p
        if np.array_equal(g, np.eye(n, dtype=np.int64)):
            break
    return total % p


def conjugation_norm(sigma: np.ndarray, a: np.ndarray, p: int) -> np.ndarray:
    n = sigma.shape[0]
    return (conjugation_norm_matrix(sigma, p) @ np.asarray(a, dtype=np.int64).reshape(n * n)).reshape(n, n) % p


def _check_order_p(sigma: np.ndarray, p: int) -> np.ndarray:
    sigma = np.mod(np.asarray(sigma, dtype=np.int64), p)
    n = sigma.shape[0]
    if not np.array_equal(_matpow(sigma, p, p), np.eye(n, dtype=np.int64)):
        raise ExtensionError("sigma^p is not the identity mod p")
    return sigma


def _power_defect(sigma: np.ndarray, p: int) -> np.ndarray:
    """``(s^p - I) / p mod p`` for the residue lift ``s`` of ``sigma``."""
    n = sigma.shape[0]
    d = (_matpow(sigma, p, p * p) - np.eye(n, dtype=np.int64)) % (p * p)
    if (d % p).any():
        raise AssertionError("lifted power is not congruent to I mod p")
    return d // p


def order_p_lift_search(sigma, p: int, method: str = "linear",
                        cap: int = DEFAULT_MAX_EXHAUSTIVE) -> Optional[np.ndarray]:
    """A matrix ``tau`` over Z/p^2 with ``tau = sigma mod p`` and ``tau^p = I``, or None.

    ``method="linear"`` solves ``N_sigma(a) = -(s^p - I)/p`` for ``tau = (I + pa)s``;
    ``method="exhaustive"`` tries every ``a`` (guarded by ``cap``).
    """
    sigma = _check_order_p(sigma, p)
    n = sigma.shape[0]
    I = np.eye(n, dtype=np.int64)
    if method == "linear":
        rhs = (-_power_defect(sigma, p)).reshape(n * n) % p
        Nmat = conjugation_norm_matrix(sigma, p)
        a = solve(ZnMatrix(Nmat.T, p), rhs)
        if a is None:
            return None
        tau = ((I + p * a.reshape(n, n)) @ sigma) % (p * p)
        if not np.array_equal(_matpow(tau, p, p * p), I):
            raise AssertionError("linear criterion produced a lift of the wrong order")
        return tau
    if method == "exhaustive":
        total = p ** (n * n)
        if total > cap:
            raise ExtensionError(f"exhaustive search over {total} candidates exceeds cap {cap}")
        for lo in range(0, total, 4096):
            idx = np.arange(lo, min(total, lo + 4096))
            digits = np.stack([(idx // p**j) % p for j in range(n * n)], axis=1).reshape(-1, n, n)
            taus = np.matmul(I + p * digits, sigma) % (p * p)
            ok = (_matpow(taus, p, p * p) == I).all(axis=(1, 2))
            if ok.any():
                return taus[int(np.argmax(ok))]
        return None
    raise ValueError("method must be 'linear' or 'exhaustive'")


@dataclass
class LinearSystem:
    matrix: np.ndarray          # equations x unknowns (column convention)
    rhs: np.ndarray
    modulus: int
    row_names: list[str]
    unknown_names: list[str]

    def solution(self) -> Optional[np.ndarray]:
        return solve(ZnMatrix(self.matrix.T, self.modulus, cols=self.matrix.shape[0]), self.rhs)

    def certificate(self) -> Optional[dict[str, int]]:
        """Equation weights whose combination reads ``0 = nonzero``."""
        y = left_certificate(ZnMatrix(self.matrix.T, self.modulus, cols=self.matrix.shape[0]), self.rhs)
        if y is None:
            return None
        if (y @ self.matrix % self.modulus).any() or not int(y @ self.rhs) % self.modulus:
            raise AssertionError("certificate does not certify inconsistency")
        return {self.row_names[i]: int(v) for i, v in enumerate(y) if v}


def commuting_lift_system(s1, s2, p: int, zero_rhs: bool = False) -> LinearSystem:
    """Conditions on ``a, b`` for ``(I+pa)s1`` and ``(I+pb)s2`` to have order p and commute.

    Unknowns are the entries of ``a`` then ``b``.  The commutator equation is
    ``(s2 - 1).a - (s1 - 1).b = C`` with ``.`` the conjugation action, where
    ``C`` vanishes when the lifts of ``s1`` and ``s2`` already commute.
    """
    s1, s2 = _check_order_p(s1, p), _check_order_p(s2, p)
    n = s1.shape[0]
    nn = n * n
    q = p * p
    rhs1 = (-_power_defect(s1, p)).reshape(nn) % p
    rhs2 = (-_power_defect(s2, p)).reshape(nn) % p
    comm = ((s1 @ s2) % q - (s2 @ s1) % q) % q
    if (comm % p).any():
        raise ExtensionError("s1 and s2 do not commute mod p")
    # s1 s2 (1 + p(..)) expansion: a - s2.a + s1.b - b = -(s1 s2 - s2 s1)/p (s1 s2)^-1
    P_inv = matrix_inverse_mod((s1 @ s2) % p, p)
    rhs3 = (-((comm // p) @ P_inv) % p).reshape(nn) % p
    c1 = np.kron(s1, matrix_inverse_mod(s1, p).T) % p
    c2 = np.kron(s2, matrix_inverse_mod(s2, p).T) % p
    I = np.eye(nn, dtype=np.int64)
    Z = np.zeros((nn, nn), dtype=np.int64)
    M = np.block([
        [conjugation_norm_matrix(s1, p), Z],
        [Z, conjugation_norm_matrix(s2, p)],
        [(I - c2) % p, (c1 - I) % p],
    ]) % p
    rhs = np.concatenate([rhs1, rhs2, rhs3])
    if zero_rhs:
        rhs = np.zeros_like(rhs)
    ij = [f"{i + 1}{j + 1}" for i in range(n) for j in range(n)]
    rows = [f"norm_s1[{x}]" for x in ij] + [f"norm_s2[{x}]" for x in ij] + [f"commutator[{x}]" for x in ij]
    unknowns = [f"a{x}" for x in ij] + [f"b{x}" for x in ij]
    return LinearSystem(M, rhs, p, rows, unknowns)


def claim54_system(p: int = 3, zero_rhs: bool = False) -> LinearSystem:
    """The system for lifting ``N = <s12, s13>`` of ``U_3(F_p)`` to ``GL_3(Z/p^2)`` with order p."""
    s12 = np.eye(3, dtype=np.int64)
    s12[0, 1] = 1
    s13 = np.eye(3, dtype=np.int64)
    s13[0, 2] = 1
    return commuting_lift_system(s12, s13, p, zero_rhs=zero_rhs)
