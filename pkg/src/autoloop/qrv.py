"""The loop Q_{R,V}(W) on W x V with (a,u)(b,v) = (a+b, u(1+b) + v(1-a)).

Two endomorphism backends share one interface, so every formula below is
written once:

* ``field-mult``: V = K a finite field, W a subspace of K acting by b -> ba.
* ``matrix``: V = F_p^n as row vectors (1 x n matrices), W a space of commuting
  n x n matrices acting on the right.

Endomorphisms compose left to right: ``u * (a * b)`` is ``(u * a) * b``.
"""

from __future__ import annotations

from itertools import product
from typing import Any, NamedTuple, Optional, Sequence

import numpy as np

from .algebra import ExtElem, FieldContext, Matrix, make_context, make_quadratic_context
from .errors import InvalidParam, NotCommuting, NotInvertible, TooLarge, TrivialIntersection
from .loops import FiniteLoop

DEFAULT_CAP = 2048


class LoopElement(NamedTuple):
    a: Any  # endomorphism in W
    u: Any  # vector in V

    def __str__(self):
        return f"({self.a};{self.u})"


class ParamAut(NamedTuple):
    """The automorphism (a,u) -> (a, xa + ud) for d in C_E(W)* and x in V."""

    d: Any
    x: Any


def _span(basis: Sequence, zero, p: int) -> list:
    out = []
    for coeffs in product(range(p), repeat=len(basis)):
        s = zero
        for c, b in zip(coeffs, basis):
            if c:
                s = s + b * c
        out.append(s)
    return out


class EndoBackend:
    """A validated instance of the construction: V, W and cached (1 +- a)^-1."""

    def __init__(self, variant: str, p: int, one, v_zero, w_basis: Sequence, v_elements: list,
                 ctx: Optional[FieldContext] = None):
        self.variant = variant
        self.p = p
        self.one = one
        self.v_zero = v_zero
        self.w_basis = tuple(w_basis)
        self.ctx = ctx
        self.w_zero = one * 0
        self.w_elements = _span(self.w_basis, self.w_zero, p)
        if len(set(self.w_elements)) != len(self.w_elements):
            raise ValueError("W basis is linearly dependent")
        self.v_elements = v_elements
        self._check_commuting()
        self._I_inv = {}
        self._J_inv = {}
        for a in self.w_elements:
            self._I_inv[a] = self._invert(one + a, a)
        for a in self.w_elements:
            # J_a = I_{-a}, already known to be invertible
            self._J_inv[a] = self._I_inv[-a]
        self._cayley = None

    # construction-time checks ------------------------------------------------
    def _check_commuting(self):
        for i, a in enumerate(self.w_basis):
            for b in self.w_basis[i + 1:]:
                if a * b != b * a:
                    raise NotCommuting(f"{a!r} and {b!r} do not commute", witness=(a, b))

    def _invert(self, e, a):
        try:
            if self.variant == "field-mult":
                return e.inv()
            if e.det() == 0:
                raise ZeroDivisionError
            return e.inv()
        except ZeroDivisionError:
            raise NotInvertible(f"1 + a is not invertible for a = {a!r}", witness=a) from None

    # endomorphism helpers ------------------------------------------------------
    def I(self, a):
        return self.one + a

    def J(self, a):
        return self.one - a

    def I_inv(self, a):
        inv = self._I_inv.get(a)
        return inv if inv is not None else self._invert(self.one + a, a)

    def J_inv(self, a):
        inv = self._J_inv.get(a)
        return inv if inv is not None else self._invert(self.one - a, -a)

    def endo_inv(self, d):
        return d.inv()

    def is_invertible(self, d) -> bool:
        if self.variant == "field-mult":
            return bool(d)
        return d.det() != 0

    def commutes_with_W(self, d) -> bool:
        return all(d * b == b * d for b in self.w_basis)

    # enumeration ---------------------------------------------------------------
    @property
    def order(self) -> int:
        return len(self.w_elements) * len(self.v_elements)

    def elements(self) -> list[LoopElement]:
        """All (a, u), lexicographic by W-coordinates then V-coordinates."""
        return [LoopElement(a, u) for a in self.w_elements for u in self.v_elements]

    def identity(self) -> LoopElement:
        return LoopElement(self.w_zero, self.v_zero)

    def params(self) -> dict:
        if self.variant == "field-mult":
            return {
                "modulus": list(self.ctx.modulus),
                "d": self.ctx.d,
                "basis": [list(b.coeffs) for b in self.w_basis],
            }
        return {"n": self.one.shape[0], "basis": [[list(r) for r in b.rows] for b in self.w_basis]}

    def __repr__(self):
        return f"EndoBackend({self.variant}, p={self.p}, W={list(self.w_basis)})"


def field_backend(ctx: FieldContext, basis: Sequence[ExtElem]) -> EndoBackend:
    """Q_{k<K}(W): W = span(basis) inside K, acting by multiplication."""
    W = _span(basis, ctx.zero, ctx.p)
    for a in W:
        if a and a.is_scalar():
            raise TrivialIntersection(f"W contains the nonzero scalar {a!r}", witness=a)
    return EndoBackend("field-mult", ctx.p, ctx.one, ctx.zero, basis, ctx.elements(), ctx)


def matrix_backend(p: int, basis: Sequence[Matrix], n: Optional[int] = None) -> EndoBackend:
    """Q_{F_p, F_p^n}(W): W = span of commuting n x n matrices."""
    basis = [b if isinstance(b, Matrix) else Matrix(b, p) for b in basis]
    if n is None:
        if not basis:
            raise ValueError("dimension n is required for W = 0")
        n = basis[0].shape[0]
    V = [Matrix.vector(c, p) for c in product(range(p), repeat=n)]
    return EndoBackend("matrix", p, Matrix.identity(n, p), Matrix.zeros(1, n, p), basis, V)


def make_backend(spec: dict) -> EndoBackend:
    """Build a backend from a plain dict (the ``--spec`` file format).

    field-mult: ``{"variant": "field-mult", "p": 3, "basis": [[0, 1]]}`` with
    optional ``"modulus"`` (lowest degree first) or ``"d"``.
    matrix: ``{"variant": "matrix", "p": 3, "basis": [[[0, 1], [0, 0]]]}``.
    """
    variant = spec.get("variant", "field-mult")
    p = int(spec["p"])
    if variant == "field-mult":
        if spec.get("modulus") is not None:
            ctx = make_context(p, spec["modulus"])
        else:
            ctx = make_quadratic_context(p, spec.get("d"))
        return field_backend(ctx, [ctx.elem(b) for b in spec["basis"]])
    if variant == "matrix":
        return matrix_backend(p, [Matrix(b, p) for b in spec["basis"]], spec.get("n"))
    raise ValueError(f"unknown backend variant {variant!r}")


# ---------------------------------------------------------------------------
# structured formulas
# ---------------------------------------------------------------------------

def qrv_mul(B: EndoBackend, x: LoopElement, y: LoopElement) -> LoopElement:
    (a, u), (b, v) = x, y
    return LoopElement(a + b, u * B.I(b) + v * B.J(a))


def qrv_divide(B: EndoBackend, side: str, x: LoopElement, y: LoopElement) -> LoopElement:
    """left: x \\ y; right: y / x (x is the divisor in both cases)."""
    (a, u), (b, v) = x, y
    if side == "left":
        return LoopElement(b - a, (v - u * B.I(b - a)) * B.J_inv(a))
    if side == "right":
        return LoopElement(b - a, (v - u * B.J(b - a)) * B.I_inv(a))
    raise ValueError(f"side must be 'left' or 'right', not {side!r}")


def qrv_inverse(B: EndoBackend, x: LoopElement) -> LoopElement:
    return LoopElement(-x.a, -x.u)


def qrv_power(B: EndoBackend, x: LoopElement, m: int, bracketing: str = "left") -> LoopElement:
    """x^m with left ((xx)x)... or right x(x(x...)) bracketing."""
    y = B.identity()
    for _ in range(m):
        y = qrv_mul(B, y, x) if bracketing == "left" else qrv_mul(B, x, y)
    return y


def check_param_aut(B: EndoBackend, f: ParamAut) -> None:
    if not B.is_invertible(f.d):
        raise InvalidParam(f"d = {f.d!r} is not invertible")
    if not B.commutes_with_W(f.d):
        raise InvalidParam(f"d = {f.d!r} does not commute with W")


def param_aut_apply(B: EndoBackend, f: ParamAut, x: LoopElement, check: bool = True) -> LoopElement:
    if check:
        check_param_aut(B, f)
    a, u = x
    return LoopElement(a, f.x * a + u * f.d)


def inner_formula(B: EndoBackend, kind: str, *args: LoopElement) -> ParamAut:
    """Closed forms: T_{(a,u)} = f(I_a J_a^-1, -2u J_a^-1) and
    L_{(a,u),(b,v)} = f(J_a J_b J_{b+a}^-1, -v a J_{b+a}^-1)."""
    if kind == "T":
        (a, u), = args
        Jinv = B.J_inv(a)
        return ParamAut(B.I(a) * Jinv, (u * Jinv) * (-2))
    if kind == "L":
        (a, u), (b, v) = args
        Jinv = B.J_inv(b + a)
        return ParamAut(B.J(a) * B.J(b) * Jinv, -(v * a * Jinv))
    raise ValueError(f"kind must be 'T' or 'L', not {kind!r}")


def qrv_associator(B: EndoBackend, x: LoopElement, y: LoopElement, z: LoopElement) -> LoopElement:
    """[(a,u),(b,v),(c,w)] = (0, (ubc - wab) I_{a+b+c}^-1)."""
    (a, u), (b, _), (c, w) = x, y, z
    return LoopElement(B.w_zero, (u * b * c - w * a * b) * B.I_inv(a + b + c))


def group_criterion(B: EndoBackend) -> bool:
    """True iff W^2 = 0, i.e. the loop is a group."""
    return all(not (a * b) for a in B.w_basis for b in B.w_basis)


def element_label(x: LoopElement) -> str:
    return str(x)


# ---------------------------------------------------------------------------
# Cayley table
# ---------------------------------------------------------------------------

def realize_cayley(B: EndoBackend, cap: int = DEFAULT_CAP) -> FiniteLoop:
    """The Cayley table of Q_{R,V}(W), built through precomputed index maps."""
    if B.order > cap:
        raise TooLarge(f"loop order {B.order} exceeds cap {cap}")
    if B._cayley is not None and B._cayley[0] >= B.order:
        return B._cayley[1]
    W, V = B.w_elements, B.v_elements
    nw, nv = len(W), len(V)
    widx = {a: i for i, a in enumerate(W)}
    vidx = {u: i for i, u in enumerate(V)}
    w_add = np.array([[widx[a + b] for b in W] for a in W], dtype=np.int64)
    v_add = np.array([[vidx[u + v] for v in V] for u in V], dtype=np.int64)
    # u I_b and v J_a as index maps
    i_map = np.array([[vidx[u * B.I(b)] for u in V] for b in W], dtype=np.int64)
    j_map = np.array([[vidx[v * B.J(a)] for v in V] for a in W], dtype=np.int64)
    ai = np.repeat(np.arange(nw), nv)
    ui = np.tile(np.arange(nv), nw)
    A, Bw = ai[:, None], ai[None, :]
    U, Vv = ui[:, None], ui[None, :]
    prod_w = w_add[A, Bw]
    prod_v = v_add[i_map[Bw, U], j_map[A, Vv]]
    table = prod_w * nv + prod_v
    elements = B.elements()
    Q = FiniteLoop(elements, table, 0)
    B._cayley = (cap, Q)
    return Q


def realize_cayley_naive(B: EndoBackend) -> np.ndarray:
    """Table straight from qrv_mul; slow, used as a cross-check."""
    elements = B.elements()
    index = {x: i for i, x in enumerate(elements)}
    return np.array([[index[qrv_mul(B, x, y)] for y in elements] for x in elements], dtype=np.int64)


def structured_map_to_array(B0: EndoBackend, B1: EndoBackend, fn) -> np.ndarray:
    """Index array of an element map Q(B0) -> Q(B1) in realize_cayley order."""
    Q1 = realize_cayley(B1)
    return np.array([Q1.index(fn(x)) for x in B0.elements()], dtype=np.int64)
