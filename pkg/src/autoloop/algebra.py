"""Exact arithmetic over F_p: polynomials, extension fields, small matrices
and reduced rational functions.

Everything here is immutable. Polynomials are plain tuples of coefficients,
lowest degree first, with no trailing zeros (the zero polynomial is ``()``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterator, Optional, Sequence

from .errors import DivisionByZero, NonPrime, NotIrreducible, Singular

Poly = tuple


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _check_prime(p: int) -> None:
    if not isinstance(p, int) or not is_prime(p):
        raise NonPrime(f"{p!r} is not prime")


# ---------------------------------------------------------------------------
# polynomials over F_p
# ---------------------------------------------------------------------------

_INV_CACHE: dict = {}


def _inverses(p: int) -> list:
    inv = _INV_CACHE.get(p)
    if inv is None:
        inv = [0] + [pow(x, p - 2, p) for x in range(1, p)]
        _INV_CACHE[p] = inv
    return inv


def _strip(c: list) -> Poly:
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def poly_trim(coeffs: Sequence[int], p: int) -> Poly:
    return _strip([x % p for x in coeffs])


def poly_deg(f: Poly) -> int:
    return len(f) - 1  # -1 for the zero polynomial


def poly_add(f: Poly, g: Poly, p: int) -> Poly:
    if len(f) < len(g):
        f, g = g, f
    out = list(f)
    for i, c in enumerate(g):
        out[i] = (out[i] + c) % p
    return _strip(out)


def poly_neg(f: Poly, p: int) -> Poly:
    return tuple((-c) % p for c in f)


def poly_sub(f: Poly, g: Poly, p: int) -> Poly:
    return poly_add(f, poly_neg(g, p), p)


def poly_scale(f: Poly, c: int, p: int) -> Poly:
    c %= p
    if c == 0:
        return ()
    if c == 1:
        return f
    return tuple((x * c) % p for x in f)


def poly_mul(f: Poly, g: Poly, p: int) -> Poly:
    if not f or not g:
        return ()
    if len(g) == 1:
        return poly_scale(f, g[0], p)
    if len(f) == 1:
        return poly_scale(g, f[0], p)
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return _strip([x % p for x in out])


def poly_divmod(f: Poly, g: Poly, p: int) -> tuple[Poly, Poly]:
    if not g:
        raise DivisionByZero("polynomial division by zero")
    dg = len(g) - 1
    if len(f) <= dg:
        return (), f
    r = list(f)
    lead = g[-1]
    inv_lead = 1 if lead == 1 else _inverses(p)[lead]
    q = [0] * (len(f) - dg)
    for k in range(len(f) - 1 - dg, -1, -1):
        c = (r[k + dg] * inv_lead) % p
        if c:
            q[k] = c
            for j in range(dg):
                r[k + j] = (r[k + j] - c * g[j]) % p
    del r[dg:]
    return tuple(q), _strip(r)


def poly_rem(f: Poly, g: Poly, p: int) -> Poly:
    return poly_divmod(f, g, p)[1]


def poly_monic(f: Poly, p: int) -> Poly:
    if not f or f[-1] == 1:
        return f
    return poly_scale(f, _inverses(p)[f[-1]], p)


def poly_gcd(f: Poly, g: Poly, p: int) -> Poly:
    """Monic gcd; gcd(0, 0) is 0."""
    while g:
        if len(g) == 1:
            return (1,)
        f, g = g, poly_divmod(f, g, p)[1]
    return poly_monic(f, p)


def poly_xgcd(f: Poly, g: Poly, p: int) -> tuple[Poly, Poly, Poly]:
    """Return (g0, s, t) with s*f + t*g = g0 and g0 monic."""
    r0, r1 = f, g
    s0, s1 = (1,), ()
    t0, t1 = (), (1,)
    while r1:
        q, r = poly_divmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, poly_sub(s0, poly_mul(q, s1, p), p)
        t0, t1 = t1, poly_sub(t0, poly_mul(q, t1, p), p)
    if not r0:
        return (), s0, t0
    inv = _inverses(p)[r0[-1]]
    return poly_scale(r0, inv, p), poly_scale(s0, inv, p), poly_scale(t0, inv, p)


def poly_powmod(f: Poly, e: int, m: Poly, p: int) -> Poly:
    result: Poly = (1,)
    base = poly_divmod(f, m, p)[1]
    while e:
        if e & 1:
            result = poly_divmod(poly_mul(result, base, p), m, p)[1]
        base = poly_divmod(poly_mul(base, base, p), m, p)[1]
        e >>= 1
    return result


def is_irreducible(m: Poly, p: int) -> bool:
    """Rabin-style test: gcd(m, x^(p^i) - x) = 1 for 1 <= i <= deg/2."""
    n = poly_deg(m)
    if n < 1:
        return False
    if n == 1:
        return True
    x = (0, 1)
    xp = x
    for _ in range(n // 2):
        xp = poly_powmod(xp, p, m, p)
        if poly_gcd(m, poly_sub(xp, x, p), p) != (1,):
            return False
    return True


def poly_str(f: Poly, var: str = "t") -> str:
    if not f:
        return "0"
    terms = []
    for i, c in enumerate(f):
        if not c:
            continue
        if i == 0:
            terms.append(str(c))
            continue
        mon = var if i == 1 else f"{var}^{i}"
        terms.append(mon if c == 1 else f"{c}{mon}")
    return "+".join(terms)


# ---------------------------------------------------------------------------
# finite fields F_p[x]/(m)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldContext:
    """The field K = F_p[x]/(modulus); ``modulus`` is monic, lowest degree first."""

    p: int
    modulus: Poly
    d: Optional[int] = None

    def __post_init__(self):
        _check_prime(self.p)
        if not self.modulus or self.modulus[-1] != 1:
            raise NotIrreducible(f"modulus {self.modulus} is not monic")
        if not is_irreducible(self.modulus, self.p):
            raise NotIrreducible(f"modulus {self.modulus} is reducible over F_{self.p}")

    @property
    def n(self) -> int:
        return len(self.modulus) - 1

    @property
    def order(self) -> int:
        return self.p ** self.n

    def __repr__(self):
        return f"FieldContext(p={self.p}, modulus={poly_str(self.modulus, 'x')})"

    def elem(self, coeffs: Sequence[int]) -> "ExtElem":
        c = [x % self.p for x in coeffs]
        if len(c) > self.n:
            return self.from_poly(poly_trim(c, self.p))
        return ExtElem(self, tuple(c) + (0,) * (self.n - len(c)))

    def from_poly(self, f: Poly) -> "ExtElem":
        r = poly_divmod(f, self.modulus, self.p)[1]
        return ExtElem(self, tuple(r) + (0,) * (self.n - len(r)))

    def scalar(self, c: int) -> "ExtElem":
        return self.elem([c])

    @cached_property
    def zero(self) -> "ExtElem":
        return self.scalar(0)

    @cached_property
    def one(self) -> "ExtElem":
        return self.scalar(1)

    @cached_property
    def gen(self) -> "ExtElem":
        """The class of x, i.e. sqrt(d) for the canonical odd quadratic field."""
        return self.from_poly((0, 1))

    def elements(self) -> list["ExtElem"]:
        """All field elements, lexicographic in the coefficient tuple."""
        return [ExtElem(self, c) for c in product(range(self.p), repeat=self.n)]

    def nonzero(self) -> list["ExtElem"]:
        return [x for x in self.elements() if x]

    def frobenius(self, x: "ExtElem", times: int = 1) -> "ExtElem":
        for _ in range(times % self.n if self.n else 0):
            x = x ** self.p
        return x

    def automorphisms(self) -> list[int]:
        """Aut(K) as Frobenius exponents 0..n-1."""
        return list(range(self.n))


class ExtElem:
    """An element of a FieldContext, stored by power-basis coefficients."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: FieldContext, coeffs: tuple):
        self.ctx = ctx
        self.coeffs = coeffs

    def _coerce(self, other) -> "ExtElem":
        if isinstance(other, ExtElem):
            return other
        if isinstance(other, int):
            return self.ctx.scalar(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.ctx.p
        return ExtElem(self.ctx, tuple((x + y) % p for x, y in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        p = self.ctx.p
        return ExtElem(self.ctx, tuple((-a) % p for a in self.coeffs))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            p = self.ctx.p
            return ExtElem(self.ctx, tuple((a * other) % p for a in self.coeffs))
        if not isinstance(other, ExtElem):
            return NotImplemented
        ctx = self.ctx
        prod = poly_mul(poly_trim(self.coeffs, ctx.p), poly_trim(other.coeffs, ctx.p), ctx.p)
        return ctx.from_poly(prod)

    __rmul__ = __mul__

    def inv(self) -> "ExtElem":
        if not self:
            raise DivisionByZero("inverse of zero in extension field")
        ctx = self.ctx
        g, s, _ = poly_xgcd(poly_trim(self.coeffs, ctx.p), ctx.modulus, ctx.p)
        return ctx.from_poly(s)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inv()

    def __rtruediv__(self, other):
        return self.inv() * other

    def __pow__(self, e: int):
        if e < 0:
            return self.inv() ** (-e)
        result = self.ctx.one
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __bool__(self):
        return any(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ctx.scalar(other)
        if not isinstance(other, ExtElem):
            return NotImplemented
        return self.coeffs == other.coeffs and self.ctx == other.ctx

    def __hash__(self):
        return hash(self.coeffs)

    def __lt__(self, other):
        return self.coeffs < other.coeffs

    def is_scalar(self) -> bool:
        return not any(self.coeffs[1:])

    def __repr__(self):
        return poly_str(poly_trim(self.coeffs, self.ctx.p), "x")

    __str__ = __repr__


def least_nonresidue(p: int) -> int:
    squares = {(x * x) % p for x in range(p)}
    return next(d for d in range(1, p) if d not in squares)


def make_quadratic_context(p: int, d: Optional[int] = None) -> FieldContext:
    """Canonical F_{p^2}: x^2 - d (least non-residue d) for odd p, x^2 + x + 1 for p = 2."""
    _check_prime(p)
    if p == 2:
        return FieldContext(2, (1, 1, 1))
    if d is None:
        d = least_nonresidue(p)
    d %= p
    return FieldContext(p, ((-d) % p, 0, 1), d)


def make_context(p: int, modulus: Sequence[int]) -> FieldContext:
    """A degree-n extension from a user-supplied monic modulus (lowest degree first)."""
    _check_prime(p)
    return FieldContext(p, poly_trim(modulus, p))


def ext_arith(ctx: FieldContext, op: str, x: ExtElem, y: Optional[ExtElem] = None) -> ExtElem:
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    if op == "neg":
        return -x
    if op == "inv":
        return x.inv()
    raise ValueError(f"unknown op {op!r}")


def frobenius(ctx: FieldContext, x: ExtElem) -> ExtElem:
    return ctx.frobenius(x)


# ---------------------------------------------------------------------------
# matrices over F_p
# ---------------------------------------------------------------------------

class Matrix:
    """Immutable matrix over F_p. ``*`` is the matrix product.

    Vectors are 1 x n matrices, so ``u * M`` is the right action u -> uM.
    """

    __slots__ = ("p", "rows", "_hash")

    def __init__(self, rows, p: int):
        self.p = p
        self.rows = tuple(tuple(int(x) % p for x in r) for r in rows)
        self._hash = hash(self.rows)

    @classmethod
    def identity(cls, n: int, p: int) -> "Matrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)], p)

    @classmethod
    def zeros(cls, m: int, n: int, p: int) -> "Matrix":
        return cls([[0] * n for _ in range(m)], p)

    @classmethod
    def vector(cls, entries, p: int) -> "Matrix":
        return cls([list(entries)], p)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0]) if self.rows else 0

    def entries(self) -> tuple:
        return tuple(x for r in self.rows for x in r)

    def __add__(self, other):
        if isinstance(other, int):
            other = Matrix.identity(self.shape[0], self.p) * other
        return Matrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.p)

    __radd__ = __add__

    def __neg__(self):
        return Matrix([[-a for a in r] for r in self.rows], self.p)

    def __sub__(self, other):
        if isinstance(other, int):
            other = Matrix.identity(self.shape[0], self.p) * other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return Matrix([[a * other for a in r] for r in self.rows], self.p)
        if not isinstance(other, Matrix):
            return NotImplemented
        cols = list(zip(*other.rows))
        return Matrix([[sum(a * b for a, b in zip(r, c)) for c in cols] for r in self.rows], self.p)

    def __rmul__(self, other):
        if isinstance(other, int):
            return self * other
        return NotImplemented

    def transpose(self) -> "Matrix":
        return Matrix(list(zip(*self.rows)), self.p)

    def trace(self) -> int:
        return sum(self.rows[i][i] for i in range(len(self.rows))) % self.p

    def det(self) -> int:
        p = self.p
        a = [list(r) for r in self.rows]
        n = len(a)
        det = 1
        for col in range(n):
            piv = next((r for r in range(col, n) if a[r][col]), None)
            if piv is None:
                return 0
            if piv != col:
                a[col], a[piv] = a[piv], a[col]
                det = -det
            det = det * a[col][col] % p
            inv = pow(a[col][col], p - 2, p)
            for r in range(col + 1, n):
                f = a[r][col] * inv % p
                if f:
                    a[r] = [(x - f * y) % p for x, y in zip(a[r], a[col])]
        return det % p

    def inv(self) -> "Matrix":
        p = self.p
        n = len(self.rows)
        if n == 2:
            return mat2_inv(self)
        a = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(self.rows)]
        for col in range(n):
            piv = next((r for r in range(col, n) if a[r][col]), None)
            if piv is None:
                raise Singular("matrix is singular")
            a[col], a[piv] = a[piv], a[col]
            inv = pow(a[col][col], p - 2, p)
            a[col] = [(x * inv) % p for x in a[col]]
            for r in range(n):
                if r != col and a[r][col]:
                    f = a[r][col]
                    a[r] = [(x - f * y) % p for x, y in zip(a[r], a[col])]
        return Matrix([r[n:] for r in a], p)

    def is_zero(self) -> bool:
        return not any(self.entries())

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.p == other.p and self.rows == other.rows

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.rows < other.rows

    def __repr__(self):
        return "[" + ";".join(",".join(str(x) for x in r) for r in self.rows) + "]"


def mat2_inv(A: Matrix) -> Matrix:
    """Inverse from the characteristic equation: A^-1 = det(A)^-1 (tr(A) I - A)."""
    p = A.p
    det = A.det()
    if det == 0:
        raise Singular(f"{A!r} has determinant 0")
    I = Matrix.identity(2, p)
    return (I * A.trace() - A) * pow(det, p - 2, p)


def mat2_arith(p: int, op: str, A: Matrix, B: Optional[Matrix] = None):
    if op == "mul":
        return A * B
    if op == "add":
        return A + B
    if op == "det":
        return A.det()
    if op == "trace":
        return A.trace()
    if op == "inv":
        return mat2_inv(A)
    raise ValueError(f"unknown op {op!r}")


def parse_matrix(text: str, p: int) -> Matrix:
    """Parse row-major ``"r0c0,r0c1;r1c0,r1c1"`` text."""
    rows = [[int(x) for x in r.split(",")] for r in text.strip().split(";")]
    if len({len(r) for r in rows}) != 1 or len(rows) != len(rows[0]):
        raise ValueError(f"matrix text {text!r} is not square")
    return Matrix(rows, p)


# ---------------------------------------------------------------------------
# rational functions over F_p
# ---------------------------------------------------------------------------

class RatFun:
    """A reduced fraction num/den over F_p: den monic, gcd(num, den) = 1, zero is 0/1."""

    __slots__ = ("p", "num", "den", "_hash")

    def __init__(self, p: int, num: Sequence[int], den: Sequence[int] = (1,), reduced: bool = False):
        self.p = p
        if reduced:
            self.num, self.den = tuple(num), tuple(den)
        else:
            self.num, self.den = _reduce(poly_trim(num, p), poly_trim(den, p), p)
        self._hash = hash((self.num, self.den))

    @classmethod
    def poly(cls, p: int, coeffs: Sequence[int]) -> "RatFun":
        return cls(p, coeffs)

    @classmethod
    def const(cls, p: int, c: int) -> "RatFun":
        return cls(p, (c,))

    @classmethod
    def t(cls, p: int) -> "RatFun":
        return cls(p, (0, 1), reduced=True)

    def _coerce(self, other):
        if isinstance(other, RatFun):
            return other
        if isinstance(other, int):
            return RatFun.const(self.p, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.p
        if not self.num:
            return other
        if not other.num:
            return self
        d1, d2 = self.den, other.den
        if d1 == d2:
            return RatFun(p, poly_add(self.num, other.num, p), d1)
        # Henrici: only factors of gcd(d1, d2) can cancel
        g = poly_gcd(d1, d2, p)
        if g == (1,):
            num = poly_add(poly_mul(self.num, d2, p), poly_mul(other.num, d1, p), p)
            return RatFun(p, num, poly_mul(d1, d2, p), reduced=True)
        d1g = poly_divmod(d1, g, p)[0]
        d2g = poly_divmod(d2, g, p)[0]
        num = poly_add(poly_mul(self.num, d2g, p), poly_mul(other.num, d1g, p), p)
        if not num:
            return RatFun(p, (), reduced=False)
        h = poly_gcd(num, g, p)
        den = poly_mul(d1, d2g, p)
        if h != (1,):
            num = poly_divmod(num, h, p)[0]
            den = poly_divmod(den, h, p)[0]
        return RatFun(p, num, den, reduced=True)

    def mul_linear(self, c: int) -> "RatFun":
        """self * (1 + c t)."""
        p = self.p
        c %= p
        if c == 0 or not self.num:
            return self
        lin = (1, c)
        q, r = poly_divmod(self.den, lin, p)
        if not r:
            return RatFun(p, poly_scale(self.num, c, p), poly_monic(q, p), reduced=True)
        return RatFun(p, poly_mul(self.num, lin, p), self.den, reduced=True)

    def div_linear(self, c: int) -> "RatFun":
        """self / (1 + c t)."""
        p = self.p
        c %= p
        if c == 0 or not self.num:
            return self
        lin = (1, c)
        q, r = poly_divmod(self.num, lin, p)
        if not r:
            return RatFun(p, q, self.den, reduced=True)
        # den * (t + 1/c) is monic; scale num by 1/c
        inv = _inverses(p)[c]
        return RatFun(p, poly_scale(self.num, inv, p), poly_mul(self.den, (inv, 1), p), reduced=True)

    __radd__ = __add__

    def __neg__(self):
        return RatFun(self.p, poly_neg(self.num, self.p), self.den, reduced=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.p
        return RatFun(p, poly_mul(self.num, other.num, p), poly_mul(self.den, other.den, p))

    __rmul__ = __mul__

    def inv(self) -> "RatFun":
        if not self.num:
            raise DivisionByZero("inverse of the zero rational function")
        return RatFun(self.p, self.den, self.num)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inv()

    def __rtruediv__(self, other):
        return self.inv() * other

    def __pow__(self, e: int):
        if e < 0:
            return self.inv() ** (-e)
        p = self.p
        num, den = (1,), (1,)
        for _ in range(e):
            num, den = poly_mul(num, self.num, p), poly_mul(den, self.den, p)
        return RatFun(p, num, den, reduced=True) if e else RatFun.const(p, 1)

    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        if isinstance(other, int):
            other = RatFun.const(self.p, other)
        if not isinstance(other, RatFun):
            return NotImplemented
        return self.p == other.p and self.num == other.num and self.den == other.den

    def __hash__(self):
        return self._hash

    def __repr__(self):
        if self.den == (1,):
            return poly_str(self.num)
        return f"({poly_str(self.num)})/({poly_str(self.den)})"

    __str__ = __repr__


def _reduce(num: Poly, den: Poly, p: int) -> tuple[Poly, Poly]:
    if not den:
        raise DivisionByZero("rational function with zero denominator")
    if not num:
        return (), (1,)
    g = poly_gcd(num, den, p)
    if g != (1,):
        num = poly_divmod(num, g, p)[0]
        den = poly_divmod(den, g, p)[0]
    lead = den[-1]
    if lead != 1:
        inv = pow(lead, p - 2, p)
        num, den = poly_scale(num, inv, p), poly_scale(den, inv, p)
    return num, den


def ratfun_arith(p: int, op: str, f: RatFun, g: Optional[RatFun] = None) -> RatFun:
    if op == "add":
        return f + g
    if op == "mul":
        return f * g
    if op == "div":
        return f / g
    if op == "neg":
        return -f
    raise ValueError(f"unknown op {op!r}")


def iter_polys(p: int, max_deg: int) -> Iterator[Poly]:
    """Every polynomial of degree <= max_deg, as trimmed tuples."""
    for c in product(range(p), repeat=max_deg + 1):
        yield poly_trim(c, p)
