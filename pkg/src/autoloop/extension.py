"""Loops Q_{k<K}(W) over a finite extension k = F_p < K: isomorphisms,
automorphism groups, the order-p^3 classification and the 2 x 2 matrix
form of these loops.

Linear maps of K are n x n matrices over F_p acting on coordinate rows in
the power basis, so ``uA`` is ``coords(u) @ A`` and ``AB`` means "A, then B".
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .algebra import ExtElem, FieldContext, Matrix, make_quadratic_context
from .errors import (
    AutoloopError,
    NotAnisotropic,
    NotInS,
    NotIso,
    NotTame,
    ScalarMatrix,
    TrivialIntersection,
)
from .loops import (
    associator_subloop,
    find_isomorphisms,
    is_homomorphism,
    loop_from_table,
    loop_invariants,
)
from .qrv import EndoBackend, LoopElement, field_backend, matrix_backend, realize_cayley


class OracleDisagreement(AutoloopError, RuntimeError):
    code = "OracleDisagreement"


# ---------------------------------------------------------------------------
# linear algebra on K
# ---------------------------------------------------------------------------

def coords(u: ExtElem) -> Matrix:
    return Matrix.vector(u.coeffs, u.ctx.p)


def from_coords(ctx: FieldContext, row: Matrix) -> ExtElem:
    return ctx.elem(row.rows[0])


def linear_apply(A: Matrix, u: ExtElem) -> ExtElem:
    return from_coords(u.ctx, coords(u) * A)


def linear_matrix(ctx: FieldContext, fn) -> Matrix:
    """Matrix of a k-linear map K -> K given as a function."""
    basis = [ctx.from_poly((0,) * i + (1,)) for i in range(ctx.n)]
    return Matrix([fn(b).coeffs for b in basis], ctx.p)


def mult_matrix(ctx: FieldContext, c: ExtElem) -> Matrix:
    """M_c : u -> uc."""
    return linear_matrix(ctx, lambda u: u * c)


def frobenius_matrix(ctx: FieldContext, power: int = 1) -> Matrix:
    return linear_matrix(ctx, lambda u: ctx.frobenius(u, power))


def conjugate_bar(ctx: FieldContext, A: Matrix, a: ExtElem, A_inv: Optional[Matrix] = None) -> Optional[ExtElem]:
    """The e with A^-1 M_a A = M_e, or None when that product is no multiplication map."""
    A_inv = A_inv if A_inv is not None else A.inv()
    C = A_inv * mult_matrix(ctx, a) * A
    e = from_coords(ctx, coords(ctx.one) * C)
    return e if C == mult_matrix(ctx, e) else None


def general_linear_group(p: int, n: int) -> list[Matrix]:
    """All of GL_n(F_p); only sensible for tiny p^(n^2)."""
    out = []
    for entries in product(range(p), repeat=n * n):
        M = Matrix([entries[i * n:(i + 1) * n] for i in range(n)], p)
        if M.det():
            out.append(M)
    return out


# ---------------------------------------------------------------------------
# subspaces W and field automorphisms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubspaceW:
    ctx: FieldContext
    basis: tuple
    param: Optional[int] = None

    def __post_init__(self):
        elems = self.elements()
        if len(set(elems)) != len(elems):
            raise ValueError("W basis is linearly dependent")
        for a in elems:
            if a and a.is_scalar():
                raise TrivialIntersection(f"W contains the nonzero scalar {a!r}", witness=a)

    def elements(self) -> list[ExtElem]:
        p = self.ctx.p
        out = []
        for cs in product(range(p), repeat=len(self.basis)):
            s = self.ctx.zero
            for c, b in zip(cs, self.basis):
                s = s + b * c
            out.append(s)
        return out

    def element_set(self) -> frozenset:
        return frozenset(self.elements())

    def backend(self) -> EndoBackend:
        return _backend_cache(self)

    def label(self) -> str:
        if self.param is not None:
            return f"W_{self.param}"
        return "span{" + ",".join(str(b) for b in self.basis) + "}"

    def __repr__(self):
        return f"SubspaceW({self.label()}, p={self.ctx.p})"


_BACKENDS: dict = {}


def _backend_cache(W: SubspaceW) -> EndoBackend:
    key = (W.ctx, tuple(b.coeffs for b in W.basis))
    if key not in _BACKENDS:
        _BACKENDS[key] = field_backend(W.ctx, list(W.basis))
    return _BACKENDS[key]


@dataclass(frozen=True)
class FieldAutomorphism:
    """x -> x^(p^power)."""

    ctx: FieldContext
    power: int

    def __call__(self, x: ExtElem) -> ExtElem:
        return self.ctx.frobenius(x, self.power)

    @property
    def matrix(self) -> Matrix:
        return frobenius_matrix(self.ctx, self.power)

    def is_identity(self) -> bool:
        return self.power % self.ctx.n == 0


def _is_canonical_quadratic(ctx: FieldContext) -> bool:
    p = ctx.p
    return p != 2 and ctx.n == 2 and ctx.d is not None and ctx.modulus == ((-ctx.d) % p, 0, 1)


def subspace_W_a(ctx: FieldContext, a: int) -> SubspaceW:
    """W_0 = k sqrt(d), W_a = k(1 + a sqrt(d))."""
    if not _is_canonical_quadratic(ctx):
        raise ValueError("W_a needs the canonical quadratic context x^2 - d")
    a %= ctx.p
    root = ctx.gen
    return SubspaceW(ctx, (root if a == 0 else ctx.one + root * a,), a)


def enumerate_admissible_W(ctx: FieldContext) -> list[SubspaceW]:
    """One-dimensional W with k1 meet W = 0, for a quadratic extension.

    Odd p with the canonical modulus gives W_0, ..., W_{p-1} in order of a;
    otherwise the lines are listed directly, ordered by their least nonzero element.
    """
    if ctx.n != 2:
        raise ValueError("admissible-W enumeration is for quadratic extensions")
    if _is_canonical_quadratic(ctx):
        return [subspace_W_a(ctx, a) for a in range(ctx.p)]
    lines = {}
    for x in ctx.nonzero():
        if x.is_scalar():
            continue
        members = frozenset(x * c for c in range(1, ctx.p))
        rep = min(members)
        lines[members] = rep
    return [SubspaceW(ctx, (rep,)) for rep in sorted(lines.values())]


def subfield_generated(ctx: FieldContext, gens: Sequence[ExtElem]) -> set:
    """Closure of gens and 1 under +, * and inverses."""
    S = {ctx.zero, ctx.one, *gens}
    while True:
        new = set(S)
        items = list(S)
        for x in items:
            new.add(-x)
            if x:
                new.add(x.inv())
            for y in items:
                new.add(x + y)
                new.add(x * y)
        if len(new) == len(S):
            return S
        S = new


def tame_check(ctx: FieldContext, W: SubspaceW) -> bool:
    """k is prime by construction and finite K is perfect, so only generation is checked."""
    if not W.basis:
        return False
    return len(subfield_generated(ctx, list(W.basis))) == ctx.order


def _require_tame(ctx: FieldContext, *Ws: SubspaceW) -> None:
    for W in Ws:
        if not tame_check(ctx, W):
            raise NotTame(f"{W!r} does not generate K")


def field_automorphisms(ctx: FieldContext) -> list[FieldAutomorphism]:
    return [FieldAutomorphism(ctx, i) for i in ctx.automorphisms()]


def theory_iso(ctx: FieldContext, W0: SubspaceW, W1: SubspaceW) -> Optional[FieldAutomorphism]:
    """A field automorphism carrying W0 onto W1, or None when the loops are not isomorphic."""
    _require_tame(ctx, W0, W1)
    target = W1.element_set()
    for phi in field_automorphisms(ctx):
        if frozenset(phi(a) for a in W0.elements()) == target:
            return phi
    return None


def stabilizer_I(ctx: FieldContext, W: SubspaceW) -> list[FieldAutomorphism]:
    """I(W): field automorphisms preserving W."""
    target = W.element_set()
    return [phi for phi in field_automorphisms(ctx) if frozenset(phi(a) for a in W.elements()) == target]


# ---------------------------------------------------------------------------
# S(W0, W1) and the correspondence with isomorphisms
# ---------------------------------------------------------------------------

def in_S(ctx: FieldContext, A: Matrix, W0: SubspaceW, W1: SubspaceW) -> bool:
    """A^-1 M_{W0} A = M_{W1} as sets."""
    if A.det() == 0:
        return False
    A_inv = A.inv()
    target = W1.element_set()
    images = set()
    for a in W0.elements():
        e = conjugate_bar(ctx, A, a, A_inv)
        if e is None or e not in target:
            return False
        images.add(e)
    return len(images) == len(target)


def S_bruteforce(ctx: FieldContext, W0: SubspaceW, W1: SubspaceW) -> list[Matrix]:
    """S(W0, W1) by scanning all of GL_n(F_p)."""
    return [A for A in general_linear_group(ctx.p, ctx.n) if in_S(ctx, A, W0, W1)]


def build_S_W(ctx: FieldContext, W: SubspaceW) -> list[Matrix]:
    """S(W) = I(W) N(W): every A = phi M_c, phi in I(W), c in K*."""
    _require_tame(ctx, W)
    out = []
    seen = set()
    for phi in stabilizer_I(ctx, W):
        F = phi.matrix
        for c in ctx.nonzero():
            A = F * mult_matrix(ctx, c)
            if not in_S(ctx, A, W, W):
                raise AssertionError(f"{A!r} built from {phi}, {c} is not in S(W)")
            if A in seen:
                raise AssertionError(f"duplicate map {A!r} in S(W)")
            seen.add(A)
            out.append(A)
    return out


@dataclass(frozen=True)
class IsoDescriptor:
    """(A, c): the loop map (a,u) -> (a Abar, c * a Abar + u A)."""

    A: Matrix
    c: ExtElem

    def bar(self, a: ExtElem) -> Optional[ExtElem]:
        return conjugate_bar(a.ctx, self.A, a)

    def compose(self, other: "IsoDescriptor") -> "IsoDescriptor":
        """(A, c)(B, d) = (AB, cB + d): self first, then other."""
        return IsoDescriptor(self.A * other.A, linear_apply(other.A, self.c) + other.c)


def psi_function(ctx: FieldContext, desc: IsoDescriptor):
    """The element map of desc, with Abar tabulated lazily."""
    A, c = desc.A, desc.c
    A_inv = A.inv()
    cache = {}

    def f(x: LoopElement) -> LoopElement:
        a, u = x
        if a not in cache:
            e = conjugate_bar(ctx, A, a, A_inv)
            if e is None:
                raise NotInS(f"A^-1 M_a A is not a multiplication map for a = {a!r}")
            cache[a] = e
        ab = cache[a]
        return LoopElement(ab, c * ab + linear_apply(A, u))

    return f


def iso_correspondence(B0: EndoBackend, B1: EndoBackend, desc: IsoDescriptor, verify: bool = True) -> np.ndarray:
    """The isomorphism Q(B0) -> Q(B1) of desc, as an index array of the realized tables."""
    ctx = B0.ctx
    W0 = SubspaceW(ctx, B0.w_basis)
    W1 = SubspaceW(ctx, B1.w_basis)
    if not in_S(ctx, desc.A, W0, W1):
        raise NotInS(f"{desc.A!r} is not in S(W0, W1)")
    f = psi_function(ctx, desc)
    Q0, Q1 = realize_cayley(B0), realize_cayley(B1)
    arr = np.array([Q1.index(f(x)) for x in Q0.elements], dtype=np.int64)
    if verify and not (len(set(arr.tolist())) == Q0.order and is_homomorphism(Q0, Q1, arr)):
        raise NotIso("Psi(A, c) is not a loop isomorphism")
    return arr


def extract_descriptor(B0: EndoBackend, B1: EndoBackend, f) -> IsoDescriptor:
    """Recover (A, c) from an isomorphism f (index array between realized tables)."""
    ctx = B0.ctx
    Q0, Q1 = realize_cayley(B0), realize_cayley(B1)
    f = np.asarray(f)
    if len(set(f.tolist())) != Q0.order or not is_homomorphism(Q0, Q1, f):
        raise NotIso("supplied map is not a loop isomorphism")

    def image(x: LoopElement) -> LoopElement:
        return Q1.elements[f[Q0.index(x)]]

    zero_w = B0.w_zero
    # A from (0,u)f = (0,uA)
    rows = []
    for i in range(ctx.n):
        e = ctx.from_poly((0,) * i + (1,))
        a1, u1 = image(LoopElement(zero_w, e))
        if a1:
            raise NotIso("f does not preserve 0 x K")
        rows.append(u1.coeffs)
    A = Matrix(rows, ctx.p)
    for u in ctx.elements():
        a1, u1 = image(LoopElement(zero_w, u))
        if a1 or u1 != linear_apply(A, u):
            raise NotIso("f restricted to 0 x K is not additive")
    # transient maps B, C with (a,0)f = (aB, aC)
    Bmap, Cmap = {}, {}
    for a in B0.w_elements:
        Bmap[a], Cmap[a] = image(LoopElement(a, ctx.zero))
    b = next(x for x in B0.w_elements if x)
    c = Bmap[b].inv() * Cmap[b]
    for a in B0.w_elements:
        if Cmap[a] != c * Bmap[a]:
            raise NotIso("aC is not proportional to aB")
    desc = IsoDescriptor(A, c)
    W0, W1 = SubspaceW(ctx, B0.w_basis), SubspaceW(ctx, B1.w_basis)
    if not in_S(ctx, A, W0, W1):
        raise NotInS("recovered A is not in S(W0, W1)")
    for a in B0.w_elements:
        if desc.bar(a) != Bmap[a]:
            raise NotIso("recovered Abar disagrees with f on W x 0")
    return desc


def iso_descriptors(ctx: FieldContext, W0: SubspaceW, W1: SubspaceW) -> list[IsoDescriptor]:
    """S(W0, W1) x K, through phi M_c with phi carrying W0 to W1."""
    _require_tame(ctx, W0, W1)
    out = []
    target = W1.element_set()
    for phi in field_automorphisms(ctx):
        if frozenset(phi(a) for a in W0.elements()) != target:
            continue
        F = phi.matrix
        for c in ctx.nonzero():
            A = F * mult_matrix(ctx, c)
            out.extend(IsoDescriptor(A, shift) for shift in ctx.elements())
    return out


@dataclass
class AutTheory:
    W: SubspaceW
    S: list
    descriptors: list
    order: int
    maps: list = field(default_factory=list)


def aut_group_by_theory(ctx: FieldContext, W: SubspaceW, realize: bool = True) -> AutTheory:
    """Aut(Q_{k<K}(W)) as S(W) x K with (A,c)(B,d) = (AB, cB + d).

    The product rule closes on S(W) x K exactly when S(W) is a group, which is
    checked; with ``realize`` each descriptor is also turned into a verified
    table automorphism.
    """
    S = build_S_W(ctx, W)
    S_set = set(S)
    for A in S:
        if A.inv() not in S_set:
            raise AssertionError("S(W) not closed under inverses")
        for B in S:
            if A * B not in S_set:
                raise AssertionError("S(W) not closed under composition")
    descriptors = [IsoDescriptor(A, c) for A in S for c in ctx.elements()]
    out = AutTheory(W, S, descriptors, len(S) * ctx.order)
    if realize:
        B = W.backend()
        out.maps = [iso_correspondence(B, B, d) for d in descriptors]
    return out


def aut_order_theory(ctx: FieldContext, W: SubspaceW) -> int:
    """|I(W)| (p^n - 1) p^n."""
    _require_tame(ctx, W)
    return len(stabilizer_I(ctx, W)) * (ctx.order - 1) * ctx.order


# ---------------------------------------------------------------------------
# 2 x 2 matrices and anisotropic planes
# ---------------------------------------------------------------------------

@dataclass
class MatrixPlane:
    A: Matrix
    anisotropic: bool
    backend: EndoBackend
    theta: ExtElem
    target: SubspaceW
    bridge: np.ndarray

    def bridge_function(self):
        return _bridge_function(self.A, self.theta)


def isotropic_witness(A: Matrix) -> Optional[tuple[int, int]]:
    """First (a, b) != 0 in lexicographic order with det(aI + bA) = 0."""
    p = A.p
    I = Matrix.identity(2, p)
    for a, b in product(range(p), repeat=2):
        if (a, b) != (0, 0) and (I * a + A * b).det() == 0:
            return a, b
    return None


def _bridge_function(A: Matrix, theta: ExtElem):
    """(bA, u) -> (b theta, psi(u)) where psi(x e1 + y e1 A) = x + y theta."""
    p = A.p
    e1 = Matrix.vector((1, 0), p)
    basis = Matrix([e1.rows[0], (e1 * A).rows[0]], p)
    basis_inv = basis.inv()
    ctx = theta.ctx

    def scalar_of(a: Matrix) -> int:
        # a = bA for the unique b in F_p
        for b in range(p):
            if A * b == a:
                return b
        raise ValueError(f"{a!r} is not in kA")

    def f(x: LoopElement) -> LoopElement:
        a, u = x
        xy = (u * basis_inv).rows[0]
        return LoopElement(theta * scalar_of(a), ctx.scalar(xy[0]) + theta * xy[1])

    return f


def matrix_plane(p: int, A: Matrix, ctx: Optional[FieldContext] = None) -> MatrixPlane:
    """Check kI + kA is anisotropic, build Q_k(A) and the isomorphism onto Q_{k<K}(k theta)."""
    A = A if isinstance(A, Matrix) else Matrix(A, p)
    I = Matrix.identity(2, p)
    if any(A == I * c for c in range(p)):
        raise ScalarMatrix(f"{A!r} is a scalar matrix")
    witness = isotropic_witness(A)
    if witness is not None:
        raise NotAnisotropic(f"det(aI + bA) = 0 at (a, b) = {witness}", witness=witness)
    ctx = ctx or make_quadratic_context(p)
    tr, det = A.trace(), A.det()
    theta = next(x for x in ctx.elements() if x * x - x * tr + det == ctx.zero)
    target = next(W for W in enumerate_admissible_W(ctx) if theta in W.element_set())
    B = matrix_backend(p, [A])
    f = _bridge_function(A, theta)
    Qa, Qt = realize_cayley(B), realize_cayley(target.backend())
    bridge = np.array([Qt.index(f(x)) for x in Qa.elements], dtype=np.int64)
    if len(set(bridge.tolist())) != Qa.order or not is_homomorphism(Qa, Qt, bridge):
        raise NotIso("bridge map is not an isomorphism")
    return MatrixPlane(A, True, B, theta, target, bridge)


def companion_matrix(theta: ExtElem) -> Matrix:
    """M_theta in the basis {1, theta}: rows theta and theta^2 = e + f theta."""
    ctx = theta.ctx
    p = ctx.p
    sq = theta * theta
    # solve sq = e + f theta in the basis {1, theta}
    for e, f in product(range(p), repeat=2):
        if ctx.scalar(e) + theta * f == sq:
            return Matrix([[0, 1], [e, f]], p)
    raise ValueError(f"{theta!r} does not generate a quadratic extension")


# ---------------------------------------------------------------------------
# classification of the order-p^3 loops
# ---------------------------------------------------------------------------

CSV_HEADER = ["p", "rep_a", "order", "exponent", "center_size", "asc_size", "aut_order", "oracle_confirmed"]
TABLE_INVARIANT_CAP = 7
ORACLE_CAP = 5


@dataclass
class ClassRow:
    p: int
    rep_a: object
    W: SubspaceW
    order: int
    exponent: int
    center_size: int
    asc_size: int
    aut_order: int
    element_orders: dict
    oracle_confirmed: bool = False
    oracle_aut_order: Optional[int] = None

    def fingerprint(self) -> tuple:
        return (
            self.order,
            self.exponent,
            self.center_size,
            self.asc_size,
            tuple(sorted(self.element_orders.items())),
            self.aut_order,
        )

    def csv_row(self) -> list:
        return [
            self.p,
            self.rep_a,
            self.order,
            self.exponent,
            self.center_size,
            self.asc_size,
            self.aut_order,
            "true" if self.oracle_confirmed else "false",
        ]


@dataclass
class ClassificationTable:
    p: int
    rows: list
    oracle_run: bool = False
    pair_checks: list = field(default_factory=list)  # (label0, label1, theory_iso, oracle_iso)

    @property
    def count(self) -> int:
        return len(self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["# format=autoloop-classification-v1"])
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow(r.csv_row())
        return buf.getvalue()


def representatives(ctx: FieldContext) -> list[SubspaceW]:
    """W_a for 0 <= a <= (p-1)/2 (odd p) or the first admissible line (p = 2)."""
    Ws = enumerate_admissible_W(ctx)
    if ctx.p == 2:
        return Ws[:1]
    return [W for W in Ws if W.param <= (ctx.p - 1) // 2]


def _row_for(ctx: FieldContext, W: SubspaceW) -> ClassRow:
    p = ctx.p
    aut = aut_order_theory(ctx, W)
    rep = W.param if W.param is not None else W.label()
    order = p * ctx.order
    if p <= TABLE_INVARIANT_CAP:
        Q = realize_cayley(W.backend())
        inv = loop_invariants(Q)
        return ClassRow(p, rep, W, order, inv.exponent, len(inv.center), len(associator_subloop(Q)),
                        aut, inv.element_orders)
    # beyond table scale: exponent p by the power rule, trivial center, Asc = 0 x K
    return ClassRow(p, rep, W, order, p, 1, ctx.order, aut, {1: 1, p: order - 1})


def _oracle_pair(args) -> bool:
    t0, t1 = args
    return find_isomorphisms(loop_from_table(None, t0), loop_from_table(None, t1), "first") is not None


def classify_p3(p: int, oracle: bool = False, oracle_cap: int = ORACLE_CAP, force: bool = False,
                workers: int = 1) -> ClassificationTable:
    """Isomorphism classes of Q_{k<K}(W) with k = F_p, K = F_{p^2}, dim W = 1.

    With ``oracle`` (and p within the cap, unless forced), every theoretical
    claim is re-derived by brute force on Cayley tables: iso / non-iso for all
    pairs of admissible W and |Aut| of each representative. ``workers`` > 1
    spreads the pair searches over a process pool.
    """
    ctx = make_quadratic_context(p)
    table = ClassificationTable(p, [_row_for(ctx, W) for W in representatives(ctx)])
    if not oracle or (p > oracle_cap and not force):
        return table
    table.oracle_run = True
    Ws = enumerate_admissible_W(ctx)
    loops = [realize_cayley(W.backend()) for W in Ws]
    pairs = [(i, j) for i in range(len(Ws)) for j in range(i + 1, len(Ws))]
    jobs = [(loops[i].table, loops[j].table) for i, j in pairs]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            found_all = list(pool.map(_oracle_pair, jobs))
    else:
        found_all = [_oracle_pair(job) for job in jobs]
    for (i, j), found in zip(pairs, found_all):
        theory = theory_iso(ctx, Ws[i], Ws[j]) is not None
        table.pair_checks.append((Ws[i].label(), Ws[j].label(), theory, found))
        if theory != found:
            raise OracleDisagreement(f"{Ws[i].label()} vs {Ws[j].label()}: theory {theory}, oracle {found}")
    for row in table.rows:
        Q = loops[Ws.index(row.W)]
        count = find_isomorphisms(Q, Q, "count")
        row.oracle_aut_order = count
        if count != row.aut_order:
            raise OracleDisagreement(f"{row.W.label()}: theory |Aut| {row.aut_order}, oracle {count}")
        row.oracle_confirmed = True
    return table
