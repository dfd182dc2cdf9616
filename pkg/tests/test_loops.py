from itertools import permutations, product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from autoloop.errors import NoIdentity, NotLatin
from autoloop.loops import (
    L_maps,
    R_maps,
    T_maps,
    associator_subloop,
    associator_table,
    center,
    find_isomorphisms,
    inner_generators,
    inner_mapping_group,
    is_automorphic,
    is_group,
    is_homomorphism,
    loop_from_table,
    loop_invariants,
    multiplication_group,
    subloop_generated,
    table_divide,
)
from autoloop.qrv import LoopElement


def cyclic(n):
    return loop_from_table(None, [[(i + j) % n for j in range(n)] for i in range(n)])


def reduced_latin_squares(n):
    """All Latin squares on 0..n-1 with first row and column in natural order."""
    grid = [[0] * n for _ in range(n)]
    for i in range(n):
        grid[0][i] = grid[i][0] = i

    def fill(k):
        if k == (n - 1) * (n - 1):
            yield [row[:] for row in grid]
            return
        r, c = 1 + k // (n - 1), 1 + k % (n - 1)
        for v in range(n):
            if all(grid[r][j] != v for j in range(c)) and all(grid[i][c] != v for i in range(r)):
                grid[r][c] = v
                yield from fill(k + 1)
        grid[r][c] = 0

    yield from fill(0)


def nonassociative_loop_of_order_5():
    for sq in reduced_latin_squares(5):
        Q = loop_from_table(None, sq)
        if not is_group(Q):
            return Q
    raise AssertionError("no nonassociative loop of order 5 found")


def naive_automorphism_count(Q):
    """Count automorphisms by choosing images of a generating pair and propagating."""
    n, t, e = Q.order, Q.table, Q.identity

    def closure(gens):
        S = {e, *gens}
        while True:
            new = {int(t[x, y]) for x in S for y in S} | S
            if new == S:
                return S
            S = new

    gens = []
    while len(closure(gens)) < n:
        gens.append(next(x for x in range(n) if x not in closure(gens)))
    count = 0
    for images in product(range(n), repeat=len(gens)):
        f = {e: e, **dict(zip(gens, images))}
        ok, changed = True, True
        while ok and changed:
            changed = False
            for x, y in list(product(list(f), repeat=2)):
                z, w = int(t[x, y]), int(t[f[x], f[y]])
                if z in f:
                    ok = ok and f[z] == w
                else:
                    f[z] = w
                    changed = True
        if ok and len(f) == n and len(set(f.values())) == n:
            count += 1
    return count


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

def test_cyclic_table_accepted():
    Q = cyclic(3)
    assert Q.identity == 0 and Q.order == 3


def test_repeated_entry_rejected():
    with pytest.raises(NotLatin):
        loop_from_table(None, [[0, 1, 2], [1, 1, 0], [2, 0, 1]])


def test_quasigroup_without_identity_rejected():
    # x * y = 2x + 2y mod 3 is Latin but has no identity
    with pytest.raises(NoIdentity):
        loop_from_table(None, [[(2 * x + 2 * y) % 3 for y in range(3)] for x in range(3)])


def test_realized_table_accepted(loops3):
    Q = loops3[0]
    assert loop_from_table(Q.elements, Q.table).identity == Q.identity == 0


def test_division_laws_exhaustive(loops3):
    for Q in loops3:
        n = Q.order
        for x, y in product(range(n), repeat=2):
            assert table_divide(Q, "left", x, Q.mul(x, y)) == y
            assert table_divide(Q, "right", y, Q.mul(x, y)) == x
        assert all(table_divide(Q, "left", Q.identity, y) == y for y in range(n))


# ---------------------------------------------------------------------------
# inner mappings and automorphicity
# ---------------------------------------------------------------------------

def test_inner_maps_of_groups_are_trivial():
    Z = cyclic(6)
    ident = np.arange(6)
    for kind, _, perm in inner_generators(Z):
        assert (perm == ident).all(), kind
    assert is_automorphic(Z).ok


def test_inner_generators_fix_identity(loops3):
    Q = loops3[1]
    gens = inner_generators(Q)
    assert len(gens) == Q.order + 2 * Q.order ** 2
    assert all(perm[Q.identity] == Q.identity for _, _, perm in gens)


def test_T_of_sqrt2_multiplies_by_sqrt2(ctx3, loops3):
    Q = loops3[0]
    r = ctx3.gen
    x = Q.index(LoopElement(r, ctx3.zero))
    T = T_maps(Q)[x]
    for z, (b, v) in enumerate(Q.elements):
        assert Q.elements[T[z]] == LoopElement(b, v * r)


def test_automorphic_p3(loops3):
    for Q in loops3:
        assert is_automorphic(Q, kinds=("T", "L", "R")).ok


def test_order5_nonassociative_loop_is_not_automorphic():
    Q = nonassociative_loop_of_order_5()
    res = is_automorphic(Q)
    assert not res.ok
    kind, args, (y, z) = res.witness
    maps = {
        "T": lambda: T_maps(Q)[args[0]],
        "L": lambda: L_maps(Q, args[0])[args[1]],
        "R": lambda: R_maps(Q, args[0])[args[1]],
    }
    f = maps[kind]()
    assert f[Q.mul(y, z)] != Q.mul(f[y], f[z])


def test_automorphic_implies_L_maps_are_automorphisms(loops3):
    # independent of is_automorphic, which only inspects T and R by default
    Q = loops3[0]
    t = Q.table
    for x in range(Q.order):
        for f in L_maps(Q, x):
            assert (f[t] == t[np.ix_(f, f)]).all()


# ---------------------------------------------------------------------------
# associators and subloops
# ---------------------------------------------------------------------------

def test_associator_example(ctx3, loops3):
    Q = loops3[0]
    r, one, zero = ctx3.gen, ctx3.one, ctx3.zero
    x = Q.index(LoopElement(r, one))
    y = Q.index(LoopElement(r, zero))
    assert Q.elements[associator_table(Q, x, y, y)] == LoopElement(zero, one * 2)
    assert all(associator_table(Q, Q.identity, a, b) == Q.identity for a in range(0, 27, 4) for b in range(27))


def test_subloops(ctx3, loops3):
    Q = loops3[0]
    assert list(subloop_generated(Q, []).members) == [Q.identity]
    zeroK = [Q.index(LoopElement(ctx3.zero, u)) for u in ctx3.elements()]
    H = subloop_generated(Q, zeroK)
    assert len(H) == 9 and H.is_normal
    x = Q.index(LoopElement(ctx3.gen, ctx3.one))
    powers = {Q.identity, x}
    y = x
    while True:
        y = Q.mul(y, x)
        if y in powers:
            break
        powers.add(y)
    assert set(int(m) for m in subloop_generated(Q, [x]).members) == powers


def test_associator_subloop(ctx3, loops3):
    assert len(associator_subloop(cyclic(5))) == 1
    Q = loops3[0]
    A = associator_subloop(Q)
    assert A.is_normal
    assert {Q.elements[int(m)] for m in A.members} == {LoopElement(ctx3.zero, u) for u in ctx3.elements()}
    members = set(int(m) for m in A.members)
    for _, _, perm in inner_generators(Q):
        assert {int(perm[m]) for m in members} == members


def test_invariants(loops3):
    inv = loop_invariants(loops3[0])
    assert inv.exponent == 3 and not inv.is_group
    assert [loops3[0].elements[c] for c in inv.center] == [loops3[0].elements[0]]
    Z9 = loop_invariants(cyclic(9))
    assert Z9.is_group and Z9.exponent == 9 and len(Z9.center) == 9
    assert center(cyclic(4)) == tuple(range(4))


def test_p2_invariants():
    from autoloop.formats import build_extension

    Q = build_extension(2, 0).loop()
    inv = loop_invariants(Q)
    assert inv.exponent == 2
    assert inv.is_commutative == bool((Q.table == Q.table.T).all())


def test_group_closures():
    Q = cyclic(5)
    assert inner_mapping_group(Q).order == 1
    M = multiplication_group(Q)
    assert M.order == 5 and not M.truncated
    assert multiplication_group(cyclic(7), budget=3).truncated


# ---------------------------------------------------------------------------
# isomorphism oracle
# ---------------------------------------------------------------------------

def test_aut_of_small_cyclic_groups():
    assert find_isomorphisms(cyclic(3), cyclic(3), "count") == 2
    assert find_isomorphisms(cyclic(8), cyclic(8), "count") == 4
    assert find_isomorphisms(cyclic(4), loop_from_table(None, [[i ^ j for j in range(4)] for i in range(4)]), "first") is None


def test_aut_count_matches_permutation_scan():
    from autoloop.formats import build_extension

    Q = build_extension(2, 0).loop()
    t = Q.table
    count = 0
    rest = [x for x in range(8) if x != Q.identity]
    for images in permutations(rest):
        f = np.empty(8, dtype=np.int64)
        f[Q.identity] = Q.identity
        f[rest] = images
        count += bool((f[t] == t[np.ix_(f, f)]).all())
    assert find_isomorphisms(Q, Q, "count") == count


def test_aut_count_matches_generator_propagation(loops3):
    Q = loops3[0]
    assert find_isomorphisms(Q, Q, "count") == naive_automorphism_count(Q) == 144


def test_iso_W1_W2(loops3):
    f = find_isomorphisms(loops3[1], loops3[2], "first")
    assert f is not None and is_homomorphism(loops3[1], loops3[2], f)
    assert find_isomorphisms(loops3[0], loops3[1], "first") is None


@settings(max_examples=8)
@given(st.permutations(list(range(1, 27))))
def test_aut_count_relabel_invariant(loops3, perm):
    Q = loops3[1]
    relabelled = Q.relabel([0] + list(perm))
    assert find_isomorphisms(relabelled, relabelled, "count") == 72
    assert find_isomorphisms(Q, relabelled, "first") is not None
