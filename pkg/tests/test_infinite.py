import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from autoloop.algebra import RatFun
from autoloop.errors import BudgetExceeded, NonPrime
from autoloop.infinite import (
    RatLoopElement,
    _LinearDenominators,
    bfs_closure,
    default_generators,
    in_L,
    make_laurent_loop,
    membership_U,
    random_ratfun,
    verify_infinite_identities,
)


def rand_elem(loop, rng, den_in_U=False):
    return loop.elem(rng.randrange(loop.p), random_ratfun(loop.p, rng, den_in_U=den_in_U))


def test_construction_and_examples():
    with pytest.raises(NonPrime):
        make_laurent_loop(4)
    L = make_laurent_loop(3)
    t, one = L.t, L.one
    assert L.mul(L.elem(1, 0), L.elem(0, 1)) == L.elem(1, one - t)
    assert L.mul(L.elem(0, 1), L.elem(1, 0)) == L.elem(1, one + t)
    assert L.inverse(L.elem(1, 0)) == L.elem(2, 0)
    assert L.I(1) * L.I_inv(1) == one and L.J(2) * L.J_inv(2) == one


def test_membership_examples():
    assert membership_U(3, RatFun(3, (1,), (1, 1))).in_U
    assert not membership_U(3, RatFun(3, (1,), (0, 1))).in_U
    rep = membership_U(3, RatFun(3, (1,), (1, 1, 1)))  # 1 + t + t^2 = (1 + 2t)^2 over F_3
    assert rep.in_U and rep.factorization["factors"] == {2: 2}
    assert not membership_U(3, RatFun(3, (1,), (1, 0, 1))).in_U
    assert membership_U(5, RatFun(5, (0, 1), (1, 2, 1))).in_U


def test_membership_char2():
    s = RatFun(2, (1, 1))
    assert membership_U(2, RatFun(2, (1,), (1, 0, 1))).in_U
    assert not membership_U(2, RatFun(2, (0, 1))).in_U  # t is not in F_2[t^2]
    assert membership_U(2, s, 1).in_U and not membership_U(2, s, 0).in_U
    L = make_laurent_loop(2)
    assert in_L(L, L.elem(1, s)) and not in_L(L, L.elem(1, 1))


@pytest.mark.parametrize("p", [2, 3, 5])
def test_division_laws_random(p):
    L = make_laurent_loop(p)
    rng = random.Random(p)
    for _ in range(1000 // p):
        x, y = rand_elem(L, rng), rand_elem(L, rng)
        xy = L.mul(x, y)
        assert L.left_div(x, xy) == y
        assert L.right_div(xy, y) == x
        assert L.mul(x, L.left_div(x, y)) == y
        assert L.mul(L.right_div(y, x), x) == y
        assert L.mul(L.identity, x) == x == L.mul(x, L.identity)


def test_commutativity_depends_on_characteristic():
    L2 = make_laurent_loop(2)
    rng = random.Random(0)
    for _ in range(200):
        x, y = rand_elem(L2, rng), rand_elem(L2, rng)
        assert L2.mul(x, y) == L2.mul(y, x)
    L3 = make_laurent_loop(3)
    x, y = L3.elem(1, 0), L3.elem(1, 1)
    assert L3.mul(x, y) != L3.mul(y, x)


@given(st.sampled_from([2, 3, 5]), st.integers(0, 10 ** 6))
def test_exponent_p(p, seed):
    L = make_laurent_loop(p)
    x = rand_elem(L, random.Random(seed))
    assert L.power(x, p) == L.identity
    if x != L.identity:
        assert all(L.power(x, m) != L.identity for m in range(1, p))


# ---------------------------------------------------------------------------
# closure
# ---------------------------------------------------------------------------

def naive_closure(p, depth):
    """Same level semantics as bfs_closure, on plain rational functions."""
    L = make_laurent_loop(p)
    seen = {L.identity: 0}
    levels = [[L.identity]]
    for g in default_generators(L):
        if g not in seen:
            seen[g] = 0
            levels[0].append(g)
    for k in range(1, depth + 1):
        new = []
        for i in range(k):
            for x in levels[i]:
                for y in levels[k - 1 - i]:
                    for z in (L.mul(x, y), L.left_div(x, y), L.right_div(y, x)):
                        if z not in seen:
                            seen[z] = k
                            new.append(z)
        levels.append(new)
    return seen


def test_depth_zero_is_generators_and_identity():
    rep = bfs_closure(3, depth=0)
    L = make_laurent_loop(3)
    assert set(rep.elements) == {L.identity, *default_generators(L)}
    assert rep.level_sizes == [3] and not rep.violations


@pytest.mark.parametrize("p,depth", [(2, 4), (3, 4), (5, 3)])
def test_closure_matches_naive(p, depth):
    rep = bfs_closure(p, depth=depth)
    assert rep.elements == naive_closure(p, depth)
    assert not rep.violations


def test_closure_p3_targets():
    rep = bfs_closure(3, depth=5)
    assert rep.level_sizes == [3, 8, 39, 223, 980, 3331]
    L = make_laurent_loop(3)
    assert rep.reached == {
        L.elem(0, (0, 1)): 4,
        L.elem(0, (0, 0, 1)): 3,
        L.elem(0, (1, 2, 1)): 3,
    }


def test_closure_budget_carries_partial_report():
    with pytest.raises(BudgetExceeded) as err:
        bfs_closure(3, depth=8, budget=500)
    part = err.value.partial
    assert not part.complete and len(part.elements) == 501
    assert not part.violations


@pytest.mark.parametrize("p", [2, 3, 5])
def test_kernel_agrees_with_rational_arithmetic(p):
    L = make_laurent_loop(p)
    kern = _LinearDenominators(p)
    rng = random.Random(10 + p)
    pool = [L.identity, *default_generators(L)]
    for _ in range(600):
        x, y = rng.choice(pool), rng.choice(pool)
        zx, zy = kern.encode(x), kern.encode(y)
        op = rng.randrange(3)
        if op == 0:
            got, want = kern.mul(zx, zy), L.mul(x, y)
        elif op == 1:
            got, want = kern.left_div(zx, zy), L.left_div(x, y)
        else:
            got, want = kern.right_div(zy, zx), L.right_div(y, x)
        assert kern.decode(got) == want
        assert kern.encode(want) == got
        pool.append(want)


def test_kernel_rejects_foreign_denominators():
    kern = _LinearDenominators(3)
    with pytest.raises(ValueError):
        kern.encode(RatLoopElement(0, RatFun(3, (1,), (1, 0, 1))))


@pytest.mark.parametrize("p", [2, 3, 5])
def test_identities(p):
    rep = verify_infinite_identities(p, samples=30)
    assert rep.all_ok, [c.name for c in rep.failures()]
    assert len(rep.checks) > 100
