"""Finite loops given by Cayley tables.

Maps act on the right, as in ``z -> zf``; a permutation is stored as the
integer array of its images. Inner mappings:

    T_x     : z -> x \\ (z x)
    L_{x,y} : z -> (y x) \\ (y (x z))
    R_{x,y} : z -> ((z x) y) / (x y)
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import NoIdentity, NotLatin

INNER_KINDS = ("T", "L", "R")


class FiniteLoop:
    """A validated loop: ``table[i, j]`` is the index of ``elements[i] * elements[j]``."""

    def __init__(self, elements: Sequence, table, identity: int):
        self.elements = list(elements)
        self.table = table
        self.identity = identity
        self.order = len(self.elements)
        idx = np.arange(self.order)
        self.ldiv = np.empty_like(table)
        self.ldiv[idx[:, None], table] = idx[None, :]
        self.rdiv = np.empty_like(table)
        self.rdiv[table, idx[None, :]] = idx[:, None]
        self._index = {e: i for i, e in enumerate(self.elements)}

    def __repr__(self):
        return f"FiniteLoop(order={self.order}, identity={self.identity})"

    def __len__(self):
        return self.order

    def index(self, element) -> int:
        return self._index[element]

    def mul(self, x: int, y: int) -> int:
        return int(self.table[x, y])

    def left_div(self, x: int, y: int) -> int:
        """x \\ y, the z with x z = y."""
        return int(self.ldiv[x, y])

    def right_div(self, y: int, x: int) -> int:
        """y / x, the z with z x = y."""
        return int(self.rdiv[y, x])

    def relabel(self, perm: Sequence[int]) -> "FiniteLoop":
        """The isomorphic copy in which old element i gets index perm[i]."""
        perm = np.asarray(perm)
        inv = np.argsort(perm)
        table = perm[self.table[np.ix_(inv, inv)]]
        elements = [self.elements[i] for i in inv]
        return FiniteLoop(elements, table, int(perm[self.identity]))


def loop_from_table(elements: Optional[Sequence], table) -> FiniteLoop:
    t = np.asarray(table, dtype=np.int64)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise NotLatin("table is not square")
    n = t.shape[0]
    if elements is None:
        elements = list(range(n))
    if len(elements) != n:
        raise ValueError(f"{len(elements)} labels for a table of order {n}")
    if n == 0 or t.min() < 0 or t.max() >= n:
        raise NotLatin("table entries out of range")
    full = np.arange(n)
    srt_rows = np.sort(t, axis=1)
    bad_rows = np.nonzero((srt_rows != full).any(axis=1))[0]
    if len(bad_rows):
        raise NotLatin(f"row {int(bad_rows[0])} repeats an entry", witness=("row", int(bad_rows[0])))
    srt_cols = np.sort(t, axis=0)
    bad_cols = np.nonzero((srt_cols != full[:, None]).any(axis=0))[0]
    if len(bad_cols):
        raise NotLatin(f"column {int(bad_cols[0])} repeats an entry", witness=("col", int(bad_cols[0])))
    for e in range(n):
        if (t[e] == full).all() and (t[:, e] == full).all():
            return FiniteLoop(elements, t, e)
    raise NoIdentity("no two-sided identity")


def table_divide(Q: FiniteLoop, side: str, x: int, y: int) -> int:
    """left: z with x z = y; right: z with z x = y."""
    if side == "left":
        return Q.left_div(x, y)
    if side == "right":
        return Q.right_div(y, x)
    raise ValueError(f"side must be 'left' or 'right', not {side!r}")


# ---------------------------------------------------------------------------
# inner mappings
# ---------------------------------------------------------------------------

def translation_arrays(Q: FiniteLoop) -> tuple[np.ndarray, np.ndarray]:
    """(L, R) with L[x] the image array of L_x and R[x] that of R_x."""
    return Q.table.copy(), Q.table.T.copy()


def T_maps(Q: FiniteLoop) -> np.ndarray:
    """Row x is T_x."""
    T = Q.table
    n = Q.order
    return Q.ldiv[np.arange(n)[:, None], T.T]


def L_maps(Q: FiniteLoop, x: int) -> np.ndarray:
    """Row y is L_{x,y}."""
    T = Q.table
    yx = T[:, x]
    yxz = T[:, T[x]]
    return Q.ldiv[yx[:, None], yxz]


def R_maps(Q: FiniteLoop, x: int) -> np.ndarray:
    """Row y is R_{x,y}."""
    T = Q.table
    zxy = T[T[:, x]].T  # [y, z] = (z x) y
    xy = T[x]
    return Q.rdiv[zxy, xy[:, None]]


def iter_inner_blocks(Q: FiniteLoop, kinds: Iterable[str] = INNER_KINDS) -> Iterator[tuple[str, tuple, np.ndarray]]:
    """Yield (kind, args, maps) blocks; maps rows are image arrays.

    T comes as one block with args () (row x is T_x); L and R come one block
    per x with args (x,) (row y is L_{x,y} / R_{x,y}).
    """
    kinds = tuple(kinds)
    if "T" in kinds:
        yield "T", (), T_maps(Q)
    for x in range(Q.order):
        if "L" in kinds:
            yield "L", (x,), L_maps(Q, x)
        if "R" in kinds:
            yield "R", (x,), R_maps(Q, x)


def inner_generators(Q: FiniteLoop) -> list[tuple[str, tuple, np.ndarray]]:
    """All T_x, L_{x,y}, R_{x,y} as (kind, args, image array)."""
    out = []
    for kind, args, block in iter_inner_blocks(Q):
        if kind == "T":
            out.extend(("T", (x,), block[x]) for x in range(Q.order))
        else:
            x = args[0]
            out.extend((kind, (x, y), block[y]) for y in range(Q.order))
    return out


def homomorphism_failures(Q: FiniteLoop, maps: np.ndarray) -> np.ndarray:
    """Boolean array over rows of ``maps``: True where the row is not an endomorphism."""
    maps = np.atleast_2d(maps)
    T = Q.table
    step = max(1, 4_000_000 // (Q.order * Q.order))
    out = np.zeros(len(maps), dtype=bool)
    for start in range(0, len(maps), step):
        chunk = maps[start:start + step]
        lhs = chunk[:, T]  # (y z)f
        rhs = T[chunk[:, :, None], chunk[:, None, :]]  # yf zf
        out[start:start + step] = (lhs != rhs).reshape(len(chunk), -1).any(axis=1)
    return out


def is_homomorphism(Q1: FiniteLoop, Q2: FiniteLoop, f) -> bool:
    f = np.asarray(f)
    return bool((f[Q1.table] == Q2.table[f[:, None], f[None, :]]).all())


@dataclass
class AutomorphicResult:
    ok: bool
    witness: Optional[tuple] = None  # (kind, args, (y, z)) of the first failing map

    def __bool__(self):
        return self.ok


def is_automorphic(Q: FiniteLoop, kinds: Iterable[str] = ("T", "R")) -> AutomorphicResult:
    """Check that every inner generator of the given kinds is an automorphism.

    The default kinds (T and R) suffice for the whole inner mapping group.
    """
    T = Q.table
    for kind, args, block in iter_inner_blocks(Q, kinds):
        bad = homomorphism_failures(Q, block)
        if bad.any():
            row = int(np.nonzero(bad)[0][0])
            f = block[row]
            lhs = f[T]
            rhs = T[f[:, None], f[None, :]]
            y, z = (int(v) for v in np.argwhere(lhs != rhs)[0])
            full_args = (row,) if kind == "T" else (args[0], row)
            return AutomorphicResult(False, (kind, full_args, (y, z)))
    return AutomorphicResult(True)


# ---------------------------------------------------------------------------
# associators and subloops
# ---------------------------------------------------------------------------

def associator_table(Q: FiniteLoop, x: int, y: int, z: int) -> int:
    """[x,y,z] = ((xy)z) / (x(yz))."""
    T = Q.table
    return int(Q.rdiv[T[T[x, y], z], T[x, T[y, z]]])


def all_associators(Q: FiniteLoop) -> np.ndarray:
    """Array A[x, y, z] = [x, y, z]."""
    T = Q.table
    xy_z = T[T.reshape(-1)].reshape(Q.order, Q.order, Q.order)
    x_yz = T[np.arange(Q.order)[:, None, None], T[None, :, :]]
    return Q.rdiv[xy_z, x_yz]


@dataclass(frozen=True)
class SubloopHandle:
    members: tuple
    is_normal: bool

    def __len__(self):
        return len(self.members)

    def __contains__(self, x):
        return x in self.members


def _close(Q: FiniteLoop, members: np.ndarray) -> np.ndarray:
    """Closure under product and both divisions (sorted index array)."""
    S = np.unique(np.append(members, Q.identity))
    while True:
        ix = np.ix_(S, S)
        new = np.unique(np.concatenate([Q.table[ix].ravel(), Q.ldiv[ix].ravel(), Q.rdiv[ix].ravel(), S]))
        if len(new) == len(S):
            return S
        S = new


def is_normal_subloop(Q: FiniteLoop, members: Sequence[int]) -> bool:
    """Stable under every inner generator."""
    S = np.asarray(sorted(members))
    mask = np.zeros(Q.order, dtype=bool)
    mask[S] = True
    for _, _, block in iter_inner_blocks(Q):
        if not mask[block[:, S]].all():
            return False
    return True


def subloop_generated(Q: FiniteLoop, gens: Iterable[int], check_normal: bool = True) -> SubloopHandle:
    S = _close(Q, np.asarray(list(gens), dtype=np.int64))
    members = tuple(int(x) for x in S)
    return SubloopHandle(members, is_normal_subloop(Q, members) if check_normal else False)


def normal_closure(Q: FiniteLoop, gens: Iterable[int]) -> SubloopHandle:
    """Smallest normal subloop containing gens: alternate subloop closure and
    saturation under the inner generators until nothing changes."""
    S = _close(Q, np.asarray(list(gens), dtype=np.int64))
    while True:
        mask = np.zeros(Q.order, dtype=bool)
        mask[S] = True
        for _, _, block in iter_inner_blocks(Q):
            mask[block[:, S].ravel()] = True
        grown = np.nonzero(mask)[0]
        if len(grown) == len(S):
            return SubloopHandle(tuple(int(x) for x in S), True)
        S = _close(Q, grown)


def associator_subloop(Q: FiniteLoop) -> SubloopHandle:
    return normal_closure(Q, np.unique(all_associators(Q)))


def associativity_mask(Q: FiniteLoop) -> np.ndarray:
    """Boolean M[x, y, z] = ((xy)z == x(yz))."""
    T = Q.table
    n = Q.order
    xy_z = T[T.reshape(-1)].reshape(n, n, n)
    x_yz = T[np.arange(n)[:, None, None], T[None, :, :]]
    return xy_z == x_yz


def is_group(Q: FiniteLoop) -> bool:
    return bool(associativity_mask(Q).all())


def is_commutative(Q: FiniteLoop) -> bool:
    return bool((Q.table == Q.table.T).all())


def center(Q: FiniteLoop) -> tuple:
    """{x : x commutes with everything and [x,y,z] = [y,x,z] = [y,z,x] = 1 for all y, z}."""
    A = associativity_mask(Q)
    comm = (Q.table == Q.table.T).all(axis=1)
    left = A.all(axis=(1, 2))
    middle = A.all(axis=(0, 2))
    right = A.all(axis=(0, 1))
    return tuple(int(x) for x in np.nonzero(comm & left & middle & right)[0])


def left_power_order(Q: FiniteLoop, x: int, cap: Optional[int] = None) -> int:
    """Least k >= 1 with ((x x) x)...x = 1 (k factors), or 0 if not reached within cap."""
    cap = cap or Q.order
    y = x
    for k in range(1, cap + 1):
        if y == Q.identity:
            return k
        y = int(Q.table[y, x])
    return 0


def element_order(Q: FiniteLoop, x: int) -> Optional[int]:
    """Order of x, or None when x does not generate a group.

    The singleton closure <x> is checked for associativity, so the answer does
    not rely on an assumed bracketing.
    """
    S = np.asarray(subloop_generated(Q, [x], check_normal=False).members)
    sub = Q.table[np.ix_(S, S)]
    pos = {int(v): i for i, v in enumerate(S)}
    local = np.vectorize(pos.__getitem__)(sub) if len(S) > 1 else np.zeros((1, 1), dtype=np.int64)
    n = len(S)
    xy_z = local[local.reshape(-1)].reshape(n, n, n)
    x_yz = local[np.arange(n)[:, None, None], local[None, :, :]]
    if not (xy_z == x_yz).all():
        return None
    return left_power_order(Q, x)


@dataclass
class LoopInvariants:
    order: int
    center: tuple
    exponent: Optional[int]
    is_group: bool
    is_commutative: bool
    power_associative: bool
    element_orders: dict = field(default_factory=dict)  # order -> count

    def as_dict(self) -> dict:
        return {
            "order": self.order,
            "center_size": len(self.center),
            "exponent": self.exponent,
            "is_group": self.is_group,
            "is_commutative": self.is_commutative,
            "power_associative": self.power_associative,
            "element_orders": {str(k): v for k, v in sorted(self.element_orders.items())},
        }


def loop_invariants(Q: FiniteLoop) -> LoopInvariants:
    orders = [element_order(Q, x) for x in range(Q.order)]
    pa = all(o is not None for o in orders)
    exponent = math.lcm(*orders) if pa else None
    return LoopInvariants(
        order=Q.order,
        center=center(Q),
        exponent=exponent,
        is_group=is_group(Q),
        is_commutative=is_commutative(Q),
        power_associative=pa,
        element_orders=dict(Counter(orders)) if pa else {},
    )


# ---------------------------------------------------------------------------
# permutation group closure
# ---------------------------------------------------------------------------

@dataclass
class GroupClosure:
    order: int
    truncated: bool
    elements: list


def permutation_closure(gens: Iterable[np.ndarray], n: int, budget: int = 100_000) -> GroupClosure:
    """Naive closure of the group generated by ``gens``; stops at ``budget`` elements."""
    gens = {tuple(int(v) for v in g) for g in gens}
    gens.discard(tuple(range(n)))
    gen_arrays = [np.asarray(g) for g in sorted(gens)]
    ident = tuple(range(n))
    seen = {ident}
    frontier = [np.arange(n)]
    while frontier:
        nxt = []
        for f in frontier:
            for g in gen_arrays:
                h = g[f]  # apply f, then g
                key = tuple(h.tolist())
                if key not in seen:
                    seen.add(key)
                    nxt.append(h)
                    if len(seen) >= budget:
                        return GroupClosure(len(seen), True, sorted(seen))
        frontier = nxt
    return GroupClosure(len(seen), False, sorted(seen))


def inner_mapping_group(Q: FiniteLoop, budget: int = 100_000) -> GroupClosure:
    gens = [g for _, _, g in inner_generators(Q)]
    return permutation_closure(gens, Q.order, budget)


def multiplication_group(Q: FiniteLoop, budget: int = 100_000) -> GroupClosure:
    """Mlt(Q) closure, capped at ``budget`` elements; ``truncated`` reports the cap."""
    L, R = translation_arrays(Q)
    return permutation_closure(list(L) + list(R), Q.order, budget)


# ---------------------------------------------------------------------------
# isomorphism search
# ---------------------------------------------------------------------------

def element_profiles(Q: FiniteLoop) -> list[tuple]:
    """Per-element isomorphism invariants: (left power order, commutant size, in Asc)."""
    asc = set(associator_subloop(Q).members)
    comm = (Q.table == Q.table.T).sum(axis=1)
    return [(left_power_order(Q, x), int(comm[x]), x in asc) for x in range(Q.order)]


def _generation_plan(Q: FiniteLoop, class_size: dict, profiles: list) -> tuple[list[int], list[list[tuple]]]:
    """Pick generators greedily and record how every element is reached.

    Returns gens and, per generator, the steps (z, a, b) with z = a b that
    extend the closure after that generator is added.
    """
    n = Q.order
    T = Q.table
    known = np.zeros(n, dtype=bool)
    known[Q.identity] = True
    gens: list[int] = []
    plans: list[list[tuple]] = []

    def close_from(mask: np.ndarray) -> tuple[np.ndarray, list[tuple]]:
        mask = mask.copy()
        steps = []
        while True:
            S = np.nonzero(mask)[0]
            prod = T[np.ix_(S, S)]
            fresh = ~mask[prod]
            if not fresh.any():
                return mask, steps
            ii, jj = np.nonzero(fresh)
            for i, j in zip(ii, jj):
                z = int(prod[i, j])
                if not mask[z]:
                    mask[z] = True
                    steps.append((z, int(S[i]), int(S[j])))

    while not known.all():
        cands = [x for x in range(n) if not known[x]]
        # only a few representatives per profile class are tried for growth
        seen_class: Counter = Counter()
        trial = []
        for x in sorted(cands, key=lambda x: (class_size[profiles[x]], x)):
            if seen_class[profiles[x]] < 4:
                seen_class[profiles[x]] += 1
                trial.append(x)
        best = None
        for x in trial:
            m = known.copy()
            m[x] = True
            grown, steps = close_from(m)
            key = (-int(grown.sum()), class_size[profiles[x]], x)
            if best is None or key < best[0]:
                best = (key, x, grown, steps)
        _, x, grown, steps = best
        gens.append(x)
        plans.append(steps)
        known = grown
    return gens, plans


def find_isomorphisms(Q1: FiniteLoop, Q2: FiniteLoop, mode: str = "first"):
    """Backtracking isomorphism search Q1 -> Q2.

    mode "first" returns one bijection (index array) or None, "count" returns
    the number of isomorphisms, "all" returns the list of them.
    """
    if mode not in ("first", "count", "all"):
        raise ValueError(f"unknown mode {mode!r}")
    empty = {"first": None, "count": 0, "all": []}[mode]
    if Q1.order != Q2.order:
        return empty
    n = Q1.order
    prof1 = element_profiles(Q1)
    prof2 = element_profiles(Q2) if Q2 is not Q1 else prof1
    if Counter(prof1) != Counter(prof2):
        return empty
    by_class: dict = {}
    for y, pr in enumerate(prof2):
        by_class.setdefault(pr, []).append(y)
    class_size = {k: len(v) for k, v in by_class.items()}
    gens, plans = _generation_plan(Q1, class_size, prof1)

    T1, T2 = Q1.table, Q2.table
    f = np.full(n, -1, dtype=np.int64)
    used = np.zeros(n, dtype=bool)
    f[Q1.identity] = Q2.identity
    used[Q2.identity] = True
    results = []
    count = 0
    domain = [Q1.identity]

    def extend(level: int) -> bool:
        nonlocal count
        if level == len(gens):
            if mode == "count":
                count += 1
            else:
                results.append(f.copy())
            return mode == "first"
        g = gens[level]
        for h in by_class[prof1[g]]:
            if used[h]:
                continue
            assigned = [g]
            f[g] = h
            used[h] = True
            ok = True
            for z, a, b in plans[level]:
                img = T2[f[a], f[b]]
                if used[img] or prof2[img] != prof1[z]:
                    ok = False
                    break
                f[z] = img
                used[img] = True
                assigned.append(z)
            if ok:
                S = np.array(domain + assigned)
                fS = f[S]
                ok = bool((f[T1[np.ix_(S, S)]] == T2[np.ix_(fS, fS)]).all())
            if ok:
                domain.extend(assigned)
                if extend(level + 1):
                    return True
                del domain[-len(assigned):]
            for z in assigned:
                used[f[z]] = False
                f[z] = -1
        return False

    extend(0)
    if mode == "count":
        return count
    if mode == "first":
        return results[0] if results else None
    return results


def automorphism_count(Q: FiniteLoop) -> int:
    return find_isomorphisms(Q, Q, "count")
