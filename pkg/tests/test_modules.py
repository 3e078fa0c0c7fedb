import numpy as np
import pytest

from battery import battery_modules, groups_up_to_16
from coh2 import groups as g
from coh2.modules import (HModule, ModuleError, as_matrix, borel_lie_module, character_module, direct_sum,
                          element_norm, gl_conjugation_module, invariants, is_invariant, matrix_unit, norm_map,
                          orbit_representatives, permutation_module, stabilizer, weight_of_torus_element)
from coh2.pipeline import E

BATTERY = groups_up_to_16()
CASES = [(name, i) for name in ["S3", "D4", "Q8", "A4", "Z2xZ4", "Dic3", "Z3xZ3", "D5"]
         for i in range(len(battery_modules(BATTERY[name])))]


def brute_fixed(M, members):
    elems = M.elements()
    keep = np.ones(len(elems), dtype=bool)
    for h in members:
        keep &= (M.act(h, elems) == elems).all(axis=1)
    return {tuple(v) for v in elems[keep]}


def brute_orbits(M):
    elems = M.elements()
    codes = M.encode(elems)
    seen, orbits = set(), []
    for c, v in zip(codes, elems):
        if c in seen:
            continue
        orb = {int(M.encode(M.act(h, v))[0]) for h in range(M.group.order)}
        seen |= orb
        orbits.append(orb)
    return orbits


@pytest.fixture(scope="module")
def flag():
    U = g.unitriangular(3, 3)
    return U, gl_conjugation_module(U)


def test_gl3_invariants_of_unitriangular(flag):
    U, A = flag
    assert invariants(A).span_size() == 9
    scalars_and_E13 = {tuple((a * np.eye(3, dtype=int).reshape(-1) + b * matrix_unit(3, 1, 3)) % 3)
                       for a in range(3) for b in range(3)}
    assert brute_fixed(A, range(U.order)) == scalars_and_E13


def test_gl3_invariants_of_N(flag):
    U, A = flag
    N = g.subgroup_from_labels(U, [E(1, 2), E(1, 3)])
    assert invariants(A, N).span_size() == 27
    assert len(brute_fixed(A, N.members)) == 27


def test_stabilizer_of_E13_is_everything(flag):
    U, A = flag
    assert stabilizer(A, matrix_unit(3, 1, 3)).order == U.order
    assert is_invariant(A, matrix_unit(3, 1, 3))


def test_conjugating_E21(flag):
    U, A = flag
    s12 = U.index_of(g.matrix_label(E(1, 2)))
    got = A.act(s12, matrix_unit(3, 2, 1))
    want = (matrix_unit(3, 1, 1) - matrix_unit(3, 1, 2) + matrix_unit(3, 2, 1) - matrix_unit(3, 2, 2)) % 3
    assert np.array_equal(got, want)
    # the same thing by matrix multiplication
    conj = E(1, 2) @ as_matrix(matrix_unit(3, 2, 1), 3) @ E(1, 2, value=-1) % 3
    assert np.array_equal(as_matrix(got, 3), conj)


@pytest.mark.parametrize("name,i", CASES)
def test_invariants_match_enumeration(name, i):
    M = battery_modules(BATTERY[name])[i]
    for H in g.all_subgroups(M.group)[:6]:
        inv = invariants(M, H)
        assert inv.span_size() == len(brute_fixed(M, H.members))
        for v in inv.entries:
            assert is_invariant(M, v, H)


@pytest.mark.parametrize("name,i", CASES)
def test_orbits_match_enumeration(name, i):
    M = battery_modules(BATTERY[name])[i]
    reps, sizes = orbit_representatives(M)
    orbits = brute_orbits(M)
    assert sizes.sum() == M.size
    assert sorted(sizes.tolist()) == sorted(len(o) for o in orbits)
    rep_codes = set(M.encode(reps).tolist())
    assert rep_codes == {min(o) for o in orbits}


def test_orbit_count_by_burnside(flag):
    U, A = flag
    reps, sizes = orbit_representatives(A)
    fixed = sum(len(brute_fixed(A, [h])) for h in range(U.order))
    assert fixed % U.order == 0
    assert len(reps) == fixed // U.order == 867


@pytest.mark.parametrize("name", ["S3", "D4", "A4", "Q8"])
def test_permutation_modules(name):
    G = BATTERY[name]
    for H in g.all_subgroups(G):
        M = permutation_module(G, 3, H)
        assert M.rank == H.index
        M.verify()
        # the coset H itself is fixed exactly by H
        stab = stabilizer(M, np.eye(M.rank, dtype=np.int64)[0])
        assert stab.member_set == H.member_set


@pytest.mark.parametrize("name,i", CASES[:12])
def test_norm_lands_in_invariants(name, i):
    M = battery_modules(BATTERY[name])[i]
    G = M.group
    rng = np.random.default_rng(i)
    for K in g.all_subgroups(G):
        inv = invariants(M, K).entries
        if inv.shape[0] == 0:
            continue
        a = (rng.integers(0, M.modulus, inv.shape[0]) @ inv) % M.modulus
        total = norm_map(M, None, K, a)
        assert is_invariant(M, total)
        brute = sum(M.act(t, a) for t in g.transversal(G, K, "left")) % M.modulus
        assert np.array_equal(total, brute)
    assert np.array_equal(norm_map(M, None, G.whole(), np.zeros(M.rank, dtype=int)), np.zeros(M.rank))


def test_element_norm_of_cyclic_group():
    Z4 = g.cyclic(4)
    M = character_module(Z4, 5, [2])
    assert np.array_equal(element_norm(M, 1, [1]), [(1 + 2 + 4 + 8) % 5])


def test_torus_weights():
    T = g.torus(3, 5)
    A = gl_conjugation_module(T)
    for x in range(T.order):
        t = T.label_matrix(x)
        for i in range(1, 4):
            for j in range(1, 4):
                w = weight_of_torus_element(t, i, j, 5)
                assert np.array_equal(A.act(x, matrix_unit(3, i, j)), w * matrix_unit(3, i, j) % 5)


def test_borel_lie_module():
    B = g.borel(3, 3)
    b = borel_lie_module(B)
    assert b.rank == 6
    assert b.basis_labels == ["E11", "E12", "E13", "E22", "E23", "E33"]
    with pytest.raises(ModuleError):
        borel_lie_module(g.general_linear(2, 3))


def test_module_map_and_direct_sum():
    S3 = g.symmetric(3)
    H = g.all_subgroups(S3)[0]
    P = permutation_module(S3, 3, H)
    T = HModule.trivial(S3, 3)
    augmentation = np.ones((1, P.rank), dtype=np.int64)
    assert P.is_module_map(T, augmentation)
    assert not P.is_module_map(T, np.eye(1, P.rank, dtype=np.int64))
    D = direct_sum(P, T)
    D.verify()
    assert D.size == P.size * T.size


def test_bad_actions_rejected():
    Z2 = g.cyclic(2)
    with pytest.raises(ModuleError):
        HModule(Z2, 4, [[[1]], [[2]]])
    with pytest.raises(ModuleError):
        character_module(Z2, 4, [2])
    with pytest.raises(ModuleError):
        HModule.from_generator_action(Z2, 3, [])
