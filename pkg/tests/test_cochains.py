from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from battery import battery_modules, groups_up_to_16
from coh2 import groups as g
from coh2.cochains import (Cochain, CochainError, CohomologyContext, coboundary_preimage, d0_matrix, d1_matrix,
                           d2_matrix, differential, h2_structure, invariant_factors_from_sizes, is_cocycle)
from coh2.extensions import cyclic_kummer
from coh2.modules import HModule
from oracles import counts_from_invariants, h2_torsion_counts

BATTERY = groups_up_to_16()
NAMES = ["Z4", "S3", "Z2xZ2", "D4", "Q8", "A4", "Dic3", "Z3xZ3"]
CASES = [(n, i) for n in NAMES for i in range(len(battery_modules(BATTERY[n])))]


@given(st.sampled_from(CASES), st.integers(0, 1), st.integers(0, 2**32 - 1))
@settings(max_examples=80, deadline=None)
def test_d_squared_is_zero(case, degree, seed):
    name, i = case
    M = battery_modules(BATTERY[name])[i]
    c = Cochain.random(degree, M, np.random.default_rng(seed))
    assert differential(differential(c)).is_zero()


@pytest.mark.parametrize("name,i", CASES)
def test_matrices_match_pointwise_differential(name, i):
    M = battery_modules(BATTERY[name])[i]
    rng = np.random.default_rng(i)
    n = M.modulus
    for degree, D in ((0, d0_matrix(M)), (1, d1_matrix(M)), (2, d2_matrix(M))):
        c = Cochain.random(degree, M, rng)
        assert np.array_equal((c.flat @ D) % n, differential(c).flat)


def test_pointwise_formula_on_an_example():
    S3 = g.symmetric(3)
    M = battery_modules(S3)[4]  # sign-twisted Z/3
    x = Cochain.random(1, M, np.random.default_rng(0))
    dx = differential(x)
    for a, b in product(range(6), repeat=2):
        want = (M.act(a, x(b)) - x(S3.mul(a, b)) + x(a)) % 3
        assert np.array_equal(dx(a, b), want)


@pytest.mark.parametrize("name,i", CASES[:16])
def test_is_cocycle_agrees_with_differential(name, i):
    M = battery_modules(BATTERY[name])[i]
    rng = np.random.default_rng(i)
    ctx = CohomologyContext(M)
    z = ctx.cocycle_basis().entries
    for row in z[:5]:
        c = Cochain(2, M, row)
        assert is_cocycle(c)
        assert differential(c).is_zero()
    c = Cochain.random(2, M, rng)
    assert is_cocycle(c) == differential(c).is_zero()


def test_kummer_class_is_not_a_coboundary_by_exhaustion():
    ext = cyclic_kummer(3, 3)
    f = ext.factor_set
    M = f.module
    hits = 0
    for vals in product(range(3), repeat=3):
        if differential(Cochain(1, M, np.array(vals).reshape(3, 1))) == f:
            hits += 1
    assert hits == 0
    assert not CohomologyContext(M).is_coboundary(f)


@pytest.mark.parametrize("name,i", CASES[:20])
def test_coboundary_preimage_round_trip(name, i):
    M = battery_modules(BATTERY[name])[i]
    rng = np.random.default_rng(i)
    b = differential(Cochain.random(1, M, rng))
    x = coboundary_preimage(b)
    assert x is not None
    assert differential(x) == b


@pytest.mark.parametrize("name,n,factors", [
    ("1", 5, []),
    ("Z2xZ2", 2, [2, 2, 2]),
    ("Z2xZ2", 4, [2, 2, 2]),
    ("S3", 2, [2]),
    ("S3", 3, []),
    ("Q8", 2, [2, 2]),
    ("D4", 2, [2, 2, 2]),
    ("A4", 2, [2]),
    ("A4", 3, [3]),
    ("Z3xZ3", 3, [3, 3, 3]),
    ("Z4xZ4", 4, [4, 4, 4]),
    ("Z6", 4, [2]),
])
def test_h2_trivial_coefficients_universal_coefficients(name, n, factors):
    """Hom(H_2(G), Z/n) + Ext(H_1(G), Z/n) for the groups' known homology."""
    ctx = CohomologyContext(HModule.trivial(BATTERY[name], n))
    assert h2_structure(ctx) == factors


@pytest.mark.parametrize("name,n", [("Z2xZ2", 2), ("Z2xZ2", 4), ("Z2xZ2", 3), ("Z3", 3), ("Z4", 2)])
def test_h2_against_enumeration(name, n):
    G = BATTERY[name]
    factors = h2_structure(CohomologyContext(HModule.trivial(G, n)))
    assert counts_from_invariants(factors, n) == h2_torsion_counts(G.mult.astype(np.int64), n)


@given(st.lists(st.sampled_from([2, 3, 4, 8, 9, 6, 12]), max_size=4), st.sampled_from([24, 72, 36]))
@settings(max_examples=60, deadline=None)
def test_invariant_factors_from_sizes(cyclic_orders, modulus):
    orders = [d for d in cyclic_orders if modulus % d == 0]

    def size(m):
        out = 1
        for d in orders:
            out *= d // np.gcd(m, d)
        return out

    got = invariant_factors_from_sizes(size, modulus)
    # compare primary decompositions
    def primary(fs):
        out = []
        for f in fs:
            for q in (2, 3):
                e = 0
                while f % q == 0:
                    f //= q
                    e += 1
                if e:
                    out.append(q**e)
        return sorted(out)

    assert primary(got) == primary(orders)
    assert all(b % a == 0 for a, b in zip(got, got[1:]))


def test_cochain_arithmetic_and_normalization():
    M = HModule.trivial(g.cyclic(3), 5)
    rng = np.random.default_rng(1)
    a, b = Cochain.random(2, M, rng), Cochain.random(2, M, rng)
    assert (a + b) - b == a
    assert 5 * a == Cochain.zero(2, M)
    assert -a + a == Cochain.zero(2, M)
    assert cyclic_kummer(3, 5).factor_set.is_normalized()
    with pytest.raises(CochainError):
        a + Cochain.random(1, M, rng)


def test_cochain_evaluation_matches_from_function():
    G = g.symmetric(3)
    M = HModule.trivial(G, 7)
    c = Cochain.from_function(2, M, lambda x, y: [x * 6 + y])
    assert int(c(2, 5)[0]) == 17 % 7


def test_caps():
    M = HModule.trivial(g.cyclic(16), 2, 2)
    with pytest.raises(CochainError):
        CohomologyContext(M, max_ambient_dim=100)
    with pytest.raises(CochainError):
        d2_matrix(M, max_ambient_dim=1000)
    with pytest.raises(CochainError):
        h2_structure(CohomologyContext(M), max_h2_dim=10)
    with pytest.raises(CochainError):
        differential(Cochain.zero(3, HModule.trivial(g.cyclic(2), 2)))
