from itertools import product
from math import gcd, prod

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from battery import fingerprint, groups_up_to_16
from coh2 import groups as g
from coh2.groups import CapExceeded, GroupError, GroupHom, Subgroup
from oracles import all_subgroup_sets

BATTERY = groups_up_to_16()

# number of groups of each order up to 16
ISOCLASS_COUNTS = {1: 1, 2: 1, 3: 1, 4: 2, 5: 1, 6: 2, 7: 1, 8: 5, 9: 2, 10: 2, 11: 1, 12: 5, 13: 1, 14: 2,
                   15: 1, 16: 14}


def test_battery_covers_every_isomorphism_class():
    by_order: dict[int, set] = {}
    for G in BATTERY.values():
        by_order.setdefault(G.order, set()).add(fingerprint(G))
    assert {k: len(v) for k, v in by_order.items()} == ISOCLASS_COUNTS


@pytest.mark.parametrize("name", sorted(BATTERY))
def test_group_axioms(name):
    G = BATTERY[name]
    M = G.mult.astype(np.int64)
    # (ab)c = a(bc) over all triples
    assert np.array_equal(M[M], M[:, M])
    assert (np.sort(M, axis=1) == np.arange(G.order)).all()
    assert (M[np.arange(G.order), G.inv] == 0).all()


@pytest.mark.parametrize("name", ["S3", "D4", "Q8", "A4", "Z2^3", "Z2xZ4", "D6", "Dic3", "Z4:Z4", "Pauli",
                                  "Z3xZ3", "Z2xQ8"])
def test_all_subgroups_matches_closure_oracle(name):
    G = BATTERY[name]
    found = {K.member_set for K in g.all_subgroups(G)}
    assert len(found) == len(g.all_subgroups(G))
    assert found == all_subgroup_sets(G.mult)


@pytest.mark.parametrize("build,count", [
    (lambda: g.symmetric(3), 6),
    (lambda: g.dihedral(4), 10),
    (lambda: g.metacyclic(4, 2, 3, 2), 6),
    (lambda: g.alternating(4), 10),
    (lambda: g.symmetric(4), 30),
    (lambda: g.abelian([2, 2, 2]), 16),
])
def test_subgroup_counts(build, count):
    assert len(g.all_subgroups(build())) == count


@pytest.mark.parametrize("n,p", [(2, 2), (2, 3), (3, 2), (2, 5)])
def test_general_linear_order(n, p):
    G = g.general_linear(n, p)
    assert G.order == prod(p**n - p**i for i in range(n))


@pytest.mark.parametrize("n,p", [(2, 3), (3, 2), (3, 3), (4, 2)])
def test_triangular_groups(n, p):
    U, B, T = g.unitriangular(n, p), g.borel(n, p), g.torus(n, p)
    assert U.order == p ** (n * (n - 1) // 2)
    assert T.order == (p - 1) ** n
    assert B.order == U.order * T.order
    for m in U.matrices:
        assert np.array_equal(np.tril(m), np.eye(n, dtype=np.int64))


def test_u3_structure():
    U = g.unitriangular(3, 3)
    assert U.exponent() == 3
    centre = [x for x in range(U.order) if all(U.mult[x, y] == U.mult[y, x] for y in range(U.order))]
    assert len(centre) == 3
    assert sorted(K.order for K in g.all_subgroups(U)).count(3) == 13
    assert sorted(K.order for K in g.all_subgroups(U)).count(9) == 4


def brute_homs_to_cyclic(G, e):
    """All maps G -> Z/e determined by generator images that are homomorphisms."""
    out = set()
    for imgs in product(range(e), repeat=len(G.gen_indices)):
        vals = np.zeros(G.order, dtype=np.int64)
        for x in G.bfs_order()[1:]:
            prev, s = G.words[x]
            vals[x] = (vals[prev] + imgs[s]) % e
        if ((vals[:, None] + vals[None, :] - vals[G.mult]) % e == 0).all():
            out.add(tuple(vals))
    return out


@pytest.mark.parametrize("name", ["Z6", "S3", "D4", "Q8", "A4", "Z2xZ4", "Dic3", "Z3xZ3", "Z4:Z4"])
@pytest.mark.parametrize("e", [2, 3, 4, 6])
def test_characters_match_brute_force(name, e):
    G = BATTERY[name]
    chars = g.characters_mod(G, e)
    span = {tuple(v) for v in (np.array(list(product(range(e), repeat=chars.rows)), dtype=np.int64).reshape(
        -1, chars.rows) @ chars.entries) % e} if chars.rows else {(0,) * G.order}
    assert span == brute_homs_to_cyclic(G, e)


@pytest.mark.parametrize("name", ["S3", "D4", "A4", "Q16", "Pauli"])
def test_coset_decomposition(name):
    G = BATTERY[name]
    for H in g.all_subgroups(G):
        reps, rep_of, h_part = g.coset_decomposition(G, H)
        assert len(reps) == H.index
        assert reps[0] == 0
        for x in range(G.order):
            assert G.mult[h_part[x], rep_of[x]] == x
            assert h_part[x] in H
            assert rep_of[x] in reps
        assert len(g.transversal(G, H, side="left")) == H.index


@given(st.integers(1, 12), st.integers(1, 12))
@settings(max_examples=40, deadline=None)
def test_homs_between_cyclic_groups(m, n):
    Gm, Gn = g.cyclic(m), g.cyclic(n)
    # 1 -> k is a homomorphism iff m*k = 0 mod n
    for k in range(n):
        ok = (m * k) % n == 0
        if ok:
            f = GroupHom.from_generator_images(Gm, Gn, [k] if Gm.gen_indices else [])
            if m > 1:
                assert f(1) == k
        elif Gm.gen_indices:
            with pytest.raises(GroupError):
                GroupHom.from_generator_images(Gm, Gn, [k])
    valid = sum((m * k) % n == 0 for k in range(n))
    assert valid == gcd(m, n)


def test_hom_compose_and_kernel():
    S3 = g.symmetric(3)
    Z2 = g.cyclic(2)
    sign = GroupHom(S3, Z2, g.characters_mod(S3, 2).entries[0])
    assert len(sign.kernel()) == 3
    assert np.array_equal(GroupHom.identity(Z2).compose(sign).image_of, sign.image_of)
    assert np.array_equal(sign.compose(GroupHom.identity(S3)).image_of, sign.image_of)
    # every non-identity element to 1
    bad = np.where(S3.element_orders == 1, 0, 1)
    with pytest.raises(GroupError):
        GroupHom(S3, Z2, bad)


def test_subgroup_rejects_non_subgroups():
    S3 = g.symmetric(3)
    t = next(x for x in range(1, 6) if S3.element_orders[x] == 2)
    u = next(x for x in range(1, 6) if S3.element_orders[x] == 2 and x != t)
    with pytest.raises(GroupError):
        Subgroup(S3, [0, t, u])


def test_table_errors():
    with pytest.raises(GroupError):
        g.from_table([[0, 1], [1, 1]])
    with pytest.raises(GroupError):
        g.metacyclic(5, 2, 2, 0)


def test_cap_on_closure():
    with pytest.raises(CapExceeded):
        g.general_linear(3, 3, max_order=1000)


def test_matrix_group_labels_round_trip():
    G = g.borel(2, 5)
    for x in range(G.order):
        assert G.index_of(g.matrix_label(G.label_matrix(x))) == x
    a, b = 3, 7
    assert np.array_equal(G.label_matrix(G.mul(a, b)), G.label_matrix(a) @ G.label_matrix(b) % 5)
