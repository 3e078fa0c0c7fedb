"""End-to-end verification of the non-negligibility argument for the class of
``GL_3(Z/p^2) -> GL_3(F_p)`` restricted to upper unitriangular matrices."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .cochains import Cochain, CohomologyContext, DEFAULT_MAX_AMBIENT_DIM
from .extensions import (ExtensionError, ExtensionSpec, claim54_system, conjugation_norm_matrix,
                         glnp2_factor_set, matrix_inverse_mod, order_p_lift_search)
from .groups import (GroupHom, Subgroup, all_subgroups, borel, elementary_matrix, generate_matrix_group,
                     matrix_label, subgroup_from_labels, torus, unitriangular)
from .maps import (carry_cocycle, conjugation_action, corestriction, cup_with_character, embedding_by_labels,
                   norm_of_conjugates, pullback, pushforward, restriction)
from .modules import HModule, gl_conjugation_module, matrix_unit, upper_triangular_indices
from .negligible import (DEFAULT_MAX_GROUP_ORDER, DEFAULT_MAX_MODULE_SIZE, STRATEGIES, build_negligible_basis,
                         image_contained, is_negligible, phi_image, restricted_invariant_quotient,
                         same_span_mod_coboundaries, span_contains, span_with_coboundaries)

STAGES = "abcdefgh"


@dataclass
class StageResult:
    stage: str
    title: str
    passed: bool
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"stage": self.stage, "title": self.title, "passed": self.passed,
                "seconds": round(self.seconds, 3), "details": self.details}


def E(i: int, j: int, n: int = 3, value: int = 1) -> np.ndarray:
    """Elementary matrix ``I + value * E_ij`` (1-based)."""
    return elementary_matrix(n, i - 1, j - 1, value)


class FlagshipSetup:
    """Groups, modules and cached spans shared by the stages."""

    def __init__(self, p: int = 3, max_ambient_dim: int = DEFAULT_MAX_AMBIENT_DIM,
                 max_group_order: int = DEFAULT_MAX_GROUP_ORDER, max_module_size: int = DEFAULT_MAX_MODULE_SIZE):
        self.p = p
        self.max_ambient_dim = max_ambient_dim
        self.max_group_order = max_group_order
        self.max_module_size = max_module_size

    @cached_property
    def B(self):
        return borel(3, self.p)

    @cached_property
    def ambient(self) -> HModule:
        return gl_conjugation_module(self.B)

    @cached_property
    def U(self):
        return unitriangular(3, self.p)

    @cached_property
    def ext(self) -> ExtensionSpec:
        return glnp2_factor_set(3, self.p, self.U)

    @property
    def A(self) -> HModule:
        return self.ext.kernel_module

    @property
    def alpha(self) -> Cochain:
        return self.ext.factor_set

    @cached_property
    def ctx(self) -> CohomologyContext:
        return CohomologyContext(self.A, self.max_ambient_dim)

    def sub(self, *pairs) -> Subgroup:
        return subgroup_from_labels(self.U, [E(i, j) for i, j in pairs])

    @cached_property
    def N(self) -> Subgroup:
        return self.sub((1, 2), (1, 3))

    @cached_property
    def Z(self) -> Subgroup:
        return self.sub((1, 3))

    @cached_property
    def S(self) -> Subgroup:
        return self.sub((2, 3))

    @cached_property
    def A_N(self) -> HModule:
        return self.A.restrict_to(self.N)

    @cached_property
    def ctx_N(self) -> CohomologyContext:
        return CohomologyContext(self.A_N, self.max_ambient_dim)

    @cached_property
    def emb_U(self) -> GroupHom:
        return embedding_by_labels(self.U, self.B)

    @cached_property
    def emb_N(self) -> GroupHom:
        return GroupHom(self.N.group, self.B, self.emb_U.image_of[list(self.N.members)], check=False)

    @cached_property
    def torus_gens(self) -> list[int]:
        T = torus(3, self.p)
        return [self.B.index_of(T.labels[g]) for g in T.gen_indices]

    @cached_property
    def torus_elements(self) -> list[int]:
        T = torus(3, self.p)
        return [self.B.index_of(l) for l in T.labels]

    @cached_property
    def res_alpha(self) -> Cochain:
        return restriction(self.alpha, self.N, self.A_N)

    def basis(self, strategy: str, extra=None):
        key = (strategy, extra is not None)
        cache = self.__dict__.setdefault("_bases", {})
        if key not in cache:
            cache[key] = build_negligible_basis(self.ctx, strategy, self.max_group_order, self.max_module_size,
                                                extra=extra)
        return cache[key]

    def character(self, K: Subgroup, i: int, j: int) -> np.ndarray:
        """The coordinate character ``chi_ij`` on ``K`` (values mod p)."""
        return np.array([int(self.U.label_matrix(g)[i - 1, j - 1]) % self.p for g in K.members], dtype=np.int64)


# individual stages ------------------------------------------------------------


def _jordan_reps(n: int, p: int) -> list[np.ndarray]:
    """Unipotent matrices with minimal polynomial (t-1)^2, one per Jordan type."""
    reps = []
    for blocks2 in range(1, n // 2 + 1):
        m = np.eye(n, dtype=np.int64)
        for b in range(blocks2):
            m[2 * b, 2 * b + 1] = 1
        reps.append(m)
    return reps


def _random_gl(n: int, p: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    while True:
        g = rng.integers(0, p, size=(n, n))
        try:
            return g, matrix_inverse_mod(g, p)
        except ExtensionError:
            continue


def stage_a(setup: FlagshipSetup, primes=(5, 7), max_n: int = 3, samples: int = 100, seed: int = 0) -> StageResult:
    rng = np.random.default_rng(seed)
    checked, failures = 0, []
    for p in primes:
        for n in range(2, max_n + 1):
            for rep in _jordan_reps(n, p):
                sigmas = [rep]
                for _ in range(samples):
                    g, gi = _random_gl(n, p, rng)
                    sigmas.append((g @ rep @ gi) % p)
                for s in sigmas:
                    checked += 1
                    norm_zero = not conjugation_norm_matrix(s, p).any()
                    lift = order_p_lift_search(s, p)
                    if not norm_zero or lift is not None:
                        failures.append({"p": p, "sigma": s.tolist(), "norm_zero": norm_zero})
    return StageResult("a", "order-p lifts of unipotent matrices with square-zero N", not failures,
                       details={"matrices_checked": checked, "failures": failures[:3]})


def stage_b(setup: FlagshipSetup) -> StageResult:
    system = claim54_system(3)
    cert = system.certificate()
    consistent = system.solution() is not None
    # N_{s12}(a) has a single non-zero entry, a21 in position (1,2)
    norm_rows = system.matrix[:9, :9]
    a21 = system.unknown_names.index("a21")
    shape_ok = (np.count_nonzero(norm_rows.any(axis=1)) == 1
                and np.array_equal(norm_rows[1], np.eye(18, dtype=np.int64)[a21][:9]))
    comm23 = system.matrix[system.row_names.index("commutator[23]")]
    comm_ok = np.count_nonzero(comm23) == 1 and comm23[a21] != 0
    zero_ok = claim54_system(3, zero_rhs=True).solution() is not None
    ok = (not consistent) and cert is not None and set(cert) == {"norm_s1[12]", "commutator[23]"} \
        and shape_ok and comm_ok and zero_ok
    return StageResult("b", "commuting order-3 lifts of s12, s13 do not exist", ok,
                       details={"consistent": consistent, "certificate": cert,
                                "norm_matrix_shape_ok": bool(shape_ok), "commutator_row_is_a21": bool(comm_ok),
                                "homogeneous_consistent": zero_ok})


def stage_c(setup: FlagshipSetup) -> StageResult:
    r = setup.res_alpha
    nonzero = not setup.ctx_N.is_coboundary(r)
    inv = {}
    for t in setup.torus_gens:
        moved = conjugation_action(r, t, setup.ambient, setup.emb_N)
        inv[str(matrix_label(setup.B.label_matrix(t)))] = setup.ctx_N.cohomologous(moved, r)
    u_inv = all(setup.ctx.cohomologous(conjugation_action(setup.alpha, t, setup.ambient, setup.emb_U), setup.alpha)
                for t in setup.torus_gens)
    ok = nonzero and all(inv.values()) and u_inv
    return StageResult("c", "res_N(alpha) is a non-zero T-invariant class", ok,
                       details={"res_N_nonzero": nonzero, "t_invariant": inv, "alpha_t_invariant": u_inv})


def stage_d(setup: FlagshipSetup) -> StageResult:
    subs = all_subgroups(setup.U)
    small = [K for K in subs if K.order == setup.p]
    mid = [K for K in subs if K.order == setup.p**2]
    chains = [(K1, K2) for K1 in small for K2 in mid if K2.contains_subgroup(K1)]
    results = [image_contained(setup.A, K1, K2, setup.ctx) for K1, K2 in chains]
    return StageResult("d", "Im(phi_H1) <= Im(phi_H2) for H1 < H2 of orders p, p^2", all(results) and bool(chains),
                       details={"chains": len(chains), "contained": sum(results)})


def psi_Z_rows(setup: FlagshipSetup) -> np.ndarray:
    """Cocycles ``cor_Z^N(a cup delta(chi))`` over N for ``a`` in ``A^Z``."""
    Z_in_N = Subgroup(setup.N.group, setup.N.parent_to_sub[list(setup.Z.members)])
    rows, _ = phi_image(setup.A_N, Z_in_N)
    return rows


def _restrict_rows(setup: FlagshipSetup, rows: np.ndarray) -> np.ndarray:
    out = [restriction(Cochain(2, setup.A, r), setup.N, setup.A_N).flat for r in rows]
    return np.array(out, dtype=np.int64).reshape(-1, setup.ctx_N.c2_dim)


def stage_e(setup: FlagshipSetup) -> StageResult:
    basis = setup.basis("centralizers")
    phi_U, _ = phi_image(setup.A, setup.U.whole())
    phi_N, _ = phi_image(setup.A, setup.N)
    target = np.concatenate([_restrict_rows(setup, phi_U), _restrict_rows(setup, phi_N), psi_Z_rows(setup)])
    span = span_with_coboundaries(setup.ctx_N, target)
    ok = span_contains(span, _restrict_rows(setup, basis.cocycles))
    return StageResult("e", "res_N of the negligible span lies in <res phi_U, res phi_N, psi_Z>", ok,
                       details={"generators_restricted": int(basis.cocycles.shape[0]),
                                "target_generators": int(target.shape[0])})


def _char_action(setup: FlagshipSetup, chi: np.ndarray, s: int) -> np.ndarray:
    """``(s.chi)(u) = chi(s^-1 u s)`` on N."""
    U = setup.U
    members = list(setup.N.members)
    conj = U.mult[U.mult[U.inv[s], members], s]
    return chi[setup.N.parent_to_sub[conj]]


def stage_f(setup: FlagshipSetup) -> StageResult:
    p = setup.p
    basis = setup.basis("centralizers")
    report = restricted_invariant_quotient(basis, setup.N, setup.torus_gens, setup.ambient)
    Ng = setup.N.group
    chi12, chi13 = setup.character(setup.N, 1, 2), setup.character(setup.N, 1, 3)
    s = setup.U.index_of(matrix_label(E(2, 3)))
    s_members = list(setup.S.members)
    # sigma23 acting on the characters of N
    chars_ok = (np.array_equal(_char_action(setup, chi12, s), chi12)
                and np.array_equal(_char_action(setup, chi13, s), (chi13 + chi12) % p))
    # N_S(delta chi) in H^2(N, Z), detected in H^2(N, Z/p^2) (injective as H^2(N, Z) is p-torsion)
    big = HModule.trivial(setup.U, p * p)
    big_N = big.restrict_to(setup.N)
    ctx_big = CohomologyContext(big_N)
    emb = GroupHom(Ng, setup.U, np.array(setup.N.members), check=False)
    ns = {}
    for name, chi in (("chi12", chi12), ("chi13", chi13)):
        w = Cochain(2, big_N, carry_cocycle(Ng, chi, p).reshape(-1, 1))
        ns[name] = ctx_big.is_coboundary(norm_of_conjugates(w, s_members, big, emb))
    # psi_Z(E13 x delta chi13) = cor_Z^N(E13 cup delta chi13) vanishes
    Z_in_N = Subgroup(Ng, setup.N.parent_to_sub[list(setup.Z.members)])
    A_Z = setup.A_N.restrict_to(Z_in_N)
    chiZ = setup.character(setup.Z, 1, 3)
    cup = cup_with_character(matrix_unit(3, 1, 3), chiZ, p, A_Z)
    psi = corestriction(cup, Z_in_N, setup.A_N)
    psi_zero = setup.ctx_N.is_coboundary(psi)
    ok = report.invariant_part_trivial and report.t_stable and chars_ok and all(ns.values()) and psi_zero
    return StageResult("f", "T-invariant part of res_N(negligible span) vanishes", ok,
                       details={**report.to_dict(), "sigma23_on_characters": chars_ok,
                                "N_S_delta_chi_zero": ns, "psi_Z_E13_chi13_zero": psi_zero})


def stage_g(setup: FlagshipSetup, inject_alpha: bool = False) -> StageResult:
    verdicts, spans = {}, {}
    for strategy in STRATEGIES:
        basis = setup.basis(strategy, extra=[setup.alpha] if inject_alpha else None)
        verdicts[strategy] = is_negligible(basis, setup.alpha)
        spans[strategy] = basis
    same = same_span_mod_coboundaries(spans[STRATEGIES[0]].tracker, spans[STRATEGIES[1]].tracker)
    ok = not any(verdicts.values()) and same
    details = {"alpha_negligible": verdicts, "strategies_agree": same,
               "label": spans["centralizers"].roots_of_unity_label(),
               "quotient_order": spans["centralizers"].quotient_size(),
               "generators": {k: len(v.generators) for k, v in spans.items()}}
    if inject_alpha:
        details["self_test"] = "alpha inserted into the generators"
    return StageResult("g", "alpha is not in the negligible subgroup of H^2(U, gl_3)", ok, details=details)


def _block_embed(m: np.ndarray, size: int) -> np.ndarray:
    out = np.eye(size, dtype=np.int64)
    out[: m.shape[0], : m.shape[1]] = m
    return out


def stage_h(setup: FlagshipSetup) -> StageResult:
    p = setup.p
    B, U = setup.B, setup.U
    gl_B = glnp2_factor_set(3, p, B)
    b_B = glnp2_factor_set(3, p, B, kernel="b")
    incl = np.zeros((9, 6), dtype=np.int64)
    for col, idx in enumerate(upper_triangular_indices(3)):
        incl[idx, col] = 1
    pushed = pushforward(b_B.factor_set, incl, gl_B.kernel_module)
    push_ok = pushed == gl_B.factor_set
    res_ok = np.array_equal(pullback(gl_B.factor_set, setup.emb_U).values, setup.alpha.values)
    index = B.order // U.order
    coprime = index % p != 0
    # block inclusion GL_3 -> GL_4 followed by the projection gl_4 -> gl_3
    U4 = generate_matrix_group([_block_embed(U.label_matrix(g), 4) for g in U.gen_indices], p)
    f = GroupHom(U, U4, np.array([U4.index_of(matrix_label(_block_embed(U.label_matrix(g), 4)))
                                  for g in range(U.order)]))
    ext4 = glnp2_factor_set(4, p, U4)
    pulled = pullback(ext4.factor_set, f)
    proj = np.zeros((9, 16), dtype=np.int64)
    for i in range(3):
        for j in range(3):
            proj[3 * i + j, 4 * i + j] = 1
    block_ok = pushforward(pulled, proj, setup.A) == setup.alpha
    ok = push_ok and res_ok and coprime and block_ok
    return StageResult("h", "reduction chain from b_3 over B_3 to gl_3 over U_3", ok,
                       details={"pushforward_b_to_gl_equals_gl_class": push_ok,
                                "restriction_B_to_U_equals_alpha": res_ok,
                                "index_B_U": index, "index_prime_to_p": coprime,
                                "block_GL3_in_GL4_shadow": block_ok})


STAGE_FUNCS: dict[str, Callable[..., StageResult]] = {
    "a": stage_a, "b": stage_b, "c": stage_c, "d": stage_d,
    "e": stage_e, "f": stage_f, "g": stage_g, "h": stage_h,
}


def run_stages(p: int = 3, stages: str = STAGES, inject_alpha: bool = False,
               max_ambient_dim: int = DEFAULT_MAX_AMBIENT_DIM, max_group_order: int = DEFAULT_MAX_GROUP_ORDER,
               max_module_size: int = DEFAULT_MAX_MODULE_SIZE) -> list[StageResult]:
    setup = FlagshipSetup(p, max_ambient_dim, max_group_order, max_module_size)
    out = []
    for s in stages:
        if s not in STAGE_FUNCS:
            raise ValueError(f"unknown stage {s!r}; choose from {STAGES}")
        t0 = time.perf_counter()
        if s == "g":
            res = stage_g(setup, inject_alpha=inject_alpha)
        elif s == "b" and p != 3:
            res = StageResult("b", "commuting order-3 lifts (p = 3 only)", True, details={"skipped": f"p = {p}"})
        else:
            res = STAGE_FUNCS[s](setup)
        res.seconds = time.perf_counter() - t0
        out.append(res)
    return out
