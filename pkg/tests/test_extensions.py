import json
from itertools import product

import numpy as np
import pytest

from coh2 import groups as g
from coh2.cochains import CohomologyContext
from coh2.extensions import (ExtensionError, claim54_system, commuting_lift_system, conjugation_norm,
                             conjugation_norm_matrix, cyclic_kummer, exhaustive_lift_search, factor_set_from_groups,
                             from_tables, glnp2_factor_set, lift_decision, matrix_inverse_mod, order_p_lift_search)
from coh2.groups import GroupError, GroupHom
from coh2.modules import HModule, matrix_unit


def unit(n, i, j):
    return matrix_unit(n, i, j).reshape(n, n)


def quotient(G, kernel):
    """Table of ``G/K`` and the projection, identity coset first."""
    K = sorted(G.generated_by(kernel))
    label, reps = {}, []
    for x in range(G.order):
        key = frozenset(int(G.mult[x, k]) for k in K)
        if key not in label:
            label[key] = len(reps)
            reps.append(x)
    proj = [label[frozenset(int(G.mult[x, k]) for k in K)] for x in range(G.order)]
    table = [[proj[G.mult[a, b]] for b in reps] for a in reps]
    return proj, table


def extension_of(G, kernel_gens, modulus):
    proj, table = quotient(G, kernel_gens)
    return from_tables(G.mult, proj, table, modulus, kernel_gens)


def central_of_order(G, k):
    return next(x for x in range(1, G.order) if G.element_orders[x] == k
                and all(G.mult[x, y] == G.mult[y, x] for y in range(G.order)))


def square_of_order_4(G):
    return G.power(next(x for x in range(G.order) if G.element_orders[x] == 4), 2)


EXTENSIONS = {
    "Z4->Z2": lambda: cyclic_kummer(2, 2),
    "Z9->Z3": lambda: cyclic_kummer(3, 3),
    "Z8->Z4": lambda: cyclic_kummer(4, 2),
    "Q8->V4": lambda: extension_of(g.metacyclic(4, 2, 3, 2), [central_of_order(g.metacyclic(4, 2, 3, 2), 2)], 2),
    "D4->V4": lambda: extension_of(g.dihedral(4), [central_of_order(g.dihedral(4), 2)], 2),
    "Z4xZ2->V4": lambda: extension_of(g.abelian([4, 2]), [square_of_order_4(g.abelian([4, 2]))], 2),
    "S3->Z2": lambda: extension_of(g.symmetric(3), [next(x for x in range(6) if g.symmetric(3).element_orders[x] == 3)],
                                   3),
    "A4->Z3": lambda: extension_of(g.alternating(4), [x for x in range(12) if g.alternating(4).element_orders[x] == 2][:2],
                                   2),
}
SOURCES = [g.cyclic(1), g.cyclic(2), g.cyclic(3), g.cyclic(4), g.abelian([2, 2]), g.symmetric(3)]


def all_homs(src, dst):
    out = []
    for imgs in product(range(dst.order), repeat=len(src.gen_indices)):
        try:
            out.append(GroupHom.from_generator_images(src, dst, list(imgs)))
        except GroupError:
            pass
    return out


@pytest.mark.parametrize("name", sorted(EXTENSIONS))
def test_twisted_product_is_a_group_of_the_right_order(name):
    ext = EXTENSIONS[name]()
    M, H = ext.kernel_module, ext.quotient
    elems = [(a, h) for h in range(H.order) for a in M.elements()]
    key = lambda x: (tuple(int(v) for v in x[0]), x[1])
    index = {key(x): i for i, x in enumerate(elems)}
    table = np.array([[index[key(ext.product(x, y))] for y in elems] for x in elems])
    assert np.array_equal(table[table], table[:, table])
    assert ext.factor_set.is_normalized()
    assert len(elems) == M.size * H.order


def test_kummer_product_has_an_element_of_full_order():
    ext = cyclic_kummer(4, 3)
    x = (np.zeros(1, dtype=np.int64), 1)
    y, steps = x, 1
    while not (y[1] == 0 and not y[0].any()):
        y = ext.product(y, x)
        steps += 1
    assert steps == 12


def test_split_extension_has_zero_class():
    G = g.direct_product(g.cyclic(3), g.symmetric(3))
    ext = extension_of(G, [next(x for x in range(G.order) if G.element_orders[x] == 3
                                 and all(G.mult[x, y] == G.mult[y, x] for y in range(G.order)))], 3)
    assert CohomologyContext(ext.kernel_module).is_coboundary(ext.factor_set)
    for name in ("S3->Z2", "A4->Z3"):
        ext = EXTENSIONS[name]()
        assert CohomologyContext(ext.kernel_module).is_coboundary(ext.factor_set)


@pytest.mark.parametrize("name", ["Q8->V4", "Z4->Z2", "Z9->Z3", "D4->V4"])
def test_non_split_extensions_have_nonzero_class(name):
    ext = EXTENSIONS[name]()
    assert not CohomologyContext(ext.kernel_module).is_coboundary(ext.factor_set)


@pytest.mark.parametrize("seed", range(4))
def test_section_choice_changes_the_cocycle_not_the_class(seed):
    G = g.dihedral(4)
    z = central_of_order(G, 2)
    proj, table = quotient(G, [z])
    Q = g.from_table(table)
    pi = GroupHom(G, Q, proj)
    M = HModule.trivial(Q, 2)
    rng = np.random.default_rng(seed)
    base = factor_set_from_groups(G, pi, M, [0, z])
    section = [int(rng.choice(np.flatnonzero(pi.image_of == h))) for h in range(Q.order)]
    other = factor_set_from_groups(G, pi, M, [0, z], section=section)
    assert CohomologyContext(M).cohomologous(base.factor_set, other.factor_set)


@pytest.mark.parametrize("build", [lambda: g.unitriangular(2, 3), lambda: g.borel(2, 3), lambda: g.unitriangular(2, 5)])
def test_gl2_mod_p_squared_matches_the_group_construction(build):
    H = build()
    p = H.modulus
    ext = glnp2_factor_set(2, p, H)
    I = np.eye(2, dtype=np.int64)
    kern = [I + p * unit(2, i, j) for i in (1, 2) for j in (1, 2)]
    G = g.generate_matrix_group([m % p for m in H.matrices[list(H.gen_indices)]] + kern, p * p)
    assert G.order == H.order * p**4
    pi = GroupHom(G, H, np.array([H.index_of(g.matrix_label(m % p)) for m in G.matrices]))
    M = ext.kernel_module
    iota = [G.index_of(g.matrix_label((I + p * v.reshape(2, 2)) % (p * p))) for v in M.elements()]
    section = [G.index_of(g.matrix_label(H.label_matrix(h) % p)) for h in range(H.order)]
    built = factor_set_from_groups(G, pi, M, iota, section=section)
    assert built.factor_set == ext.factor_set


def test_glnp2_errors():
    H = g.unitriangular(2, 3)
    with pytest.raises(ExtensionError):
        glnp2_factor_set(2, 5, H)
    with pytest.raises(ExtensionError):
        glnp2_factor_set(2, 3, H, kernel="sl")
    with pytest.raises(ExtensionError):
        glnp2_factor_set(2, 3, g.cyclic(3))


def test_borel_kernel_variant_is_the_upper_triangular_part():
    B = g.borel(2, 3)
    full, upper = glnp2_factor_set(2, 3, B), glnp2_factor_set(2, 3, B, kernel="b")
    assert upper.kernel_module.rank == 3
    assert np.array_equal(full.factor_set.values[:, [0, 1, 3]], upper.factor_set.values)


@pytest.mark.parametrize("name", sorted(EXTENSIONS))
def test_lift_decision_matches_exhaustive_search(name):
    ext = EXTENSIONS[name]()
    for src in SOURCES:
        for rho in all_homs(src, ext.quotient):
            res = lift_decision(rho, ext)
            found = exhaustive_lift_search(rho, ext)
            assert res.lifts == (found is not None)
            if res.lifts:
                assert [h for _, h in res.lift] == [rho(x) for x in range(src.order)]
            json.dumps(res.to_dict())


def test_identity_of_the_kummer_quotient_does_not_lift():
    ext = cyclic_kummer(3, 3)
    res = lift_decision(GroupHom.identity(ext.quotient), ext)
    assert not res.lifts
    assert res.witness is not None
    assert res.to_dict()["verdict"] == "does not lift"
    with pytest.raises(ExtensionError):
        lift_decision(GroupHom.identity(g.cyclic(3)), ext)


def test_exhaustive_search_cap():
    ext = cyclic_kummer(2, 2)
    rho = GroupHom.trivial(g.abelian([2, 2]), ext.quotient)
    with pytest.raises(ExtensionError):
        exhaustive_lift_search(rho, ext, cap=3)


def test_matrix_inverse_mod():
    rng = np.random.default_rng(0)
    for p in (2, 3, 5, 7):
        for _ in range(20):
            m = rng.integers(0, p, (3, 3))
            if round(np.linalg.det(m)) % p == 0:
                with pytest.raises(ExtensionError):
                    matrix_inverse_mod(m, p)
            else:
                assert np.array_equal(matrix_inverse_mod(m, p) @ m % p, np.eye(3, dtype=np.int64))


@pytest.mark.parametrize("p", [2, 3, 5])
def test_conjugation_norm_matches_direct_sum(p):
    sigma = (np.eye(3, dtype=np.int64) + unit(3, 1, 2) + unit(3, 2, 3)) % p
    if p == 2:
        sigma = (np.eye(3, dtype=np.int64) + unit(3, 1, 3)) % p
    inv = matrix_inverse_mod(sigma, p)
    rng = np.random.default_rng(p)
    a = rng.integers(0, p, (3, 3))
    direct = np.zeros((3, 3), dtype=np.int64)
    s, si = np.eye(3, dtype=np.int64), np.eye(3, dtype=np.int64)
    for _ in range(p):
        direct = (direct + s @ a @ si) % p
        s, si = s @ sigma % p, inv @ si % p
    assert np.array_equal(conjugation_norm(sigma, a, p).reshape(3, 3), direct)
    assert np.array_equal(conjugation_norm_matrix(sigma, p) @ a.reshape(-1) % p, direct.reshape(-1))


def unipotents_of_order_p(n, p):
    out = []
    for vals in product(range(p), repeat=n * (n - 1) // 2):
        m = np.eye(n, dtype=np.int64)
        m[np.triu_indices(n, 1)] = vals
        out.append(m)
    return out


@pytest.mark.parametrize("n,p", [(2, 2), (2, 3), (2, 5), (2, 7), (3, 3)])
def test_order_p_lift_linear_matches_exhaustive(n, p):
    for sigma in unipotents_of_order_p(n, p):
        if not np.array_equal(np.linalg.matrix_power(sigma, p) % p, np.eye(n, dtype=np.int64)):
            continue
        lin = order_p_lift_search(sigma, p)
        ex = order_p_lift_search(sigma, p, method="exhaustive", cap=10**5)
        assert (lin is None) == (ex is None)
        for tau in (lin, ex):
            if tau is not None:
                assert np.array_equal(tau % p, sigma % p)
                assert np.array_equal(np.linalg.matrix_power(tau, p) % (p * p), np.eye(n, dtype=np.int64))


def test_order_p_lift_examples():
    I3 = np.eye(3, dtype=np.int64)
    assert np.array_equal(order_p_lift_search(I3, 3), I3)
    assert order_p_lift_search(I3 + unit(3, 1, 3), 3) is not None
    for p in (5, 7):
        assert order_p_lift_search(np.eye(2, dtype=np.int64) + unit(2, 1, 2), p) is None
    with pytest.raises(ExtensionError):
        order_p_lift_search(np.diag([2, 1, 1]), 3)
    with pytest.raises(ExtensionError):
        order_p_lift_search(I3 + unit(3, 1, 2), 5, method="exhaustive", cap=1000)
    with pytest.raises(ValueError):
        order_p_lift_search(I3, 3, method="guess")


def test_claim_system_is_inconsistent_with_a_certificate():
    system = claim54_system(3)
    assert len(system.unknown_names) == 18
    assert len(system.row_names) == 27
    assert system.solution() is None
    cert = system.certificate()
    assert cert
    weights = np.array([cert.get(r, 0) for r in system.row_names])
    assert not (weights @ system.matrix % 3).any()
    assert int(weights @ system.rhs) % 3


def test_commuting_system_with_zero_rhs_is_consistent():
    system = claim54_system(3, zero_rhs=True)
    x = system.solution()
    assert x is not None
    assert system.certificate() is None


def test_commuting_system_matches_brute_force_on_gl2():
    """Order-p commuting lifts of two commuting unipotents, found by enumeration."""
    p = 2
    s1 = np.array([[1, 1], [0, 1]])
    s2 = np.eye(2, dtype=np.int64)
    system = commuting_lift_system(s1, s2, p)
    I = np.eye(2, dtype=np.int64)
    q = p * p
    found = False
    for a, b in product(product(range(p), repeat=4), repeat=2):
        t1 = (I + p * np.array(a).reshape(2, 2)) @ s1 % q
        t2 = (I + p * np.array(b).reshape(2, 2)) @ s2 % q
        if (np.array_equal(np.linalg.matrix_power(t1, p) % q, I)
                and np.array_equal(np.linalg.matrix_power(t2, p) % q, I)
                and np.array_equal(t1 @ t2 % q, t2 @ t1 % q)):
            found = True
            break
    assert (system.solution() is not None) == found


def test_commuting_system_errors():
    with pytest.raises(ExtensionError):
        commuting_lift_system(np.eye(3, dtype=np.int64) + unit(3, 1, 2), np.eye(3, dtype=np.int64) + unit(3, 2, 3), 3)
