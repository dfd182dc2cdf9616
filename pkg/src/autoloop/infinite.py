"""The infinite loops on F_p t x F_p(t).

The ambient field is taken to be F_p(t) instead of Laurent series; every
element the generators (t, 0), (0, 1) reach lies there, so arithmetic stays
exact. An element (i t, u) is stored as ``RatLoopElement(i, u)``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

from .algebra import RatFun, is_prime, poly_divmod, poly_mul
from .errors import BudgetExceeded, NonPrime


class RatLoopElement(NamedTuple):
    i: int  # first coordinate is i*t
    u: RatFun

    def __str__(self):
        a = "0" if self.i == 0 else ("t" if self.i == 1 else f"{self.i}t")
        return f"({a}, {self.u})"


class LaurentLoop:
    """Q_{k<K}(F_p t) with K = F_p(t), multiplication (a,u)(b,v) = (a+b, u(1+b) + v(1-a))."""

    def __init__(self, p: int):
        if not is_prime(p):
            raise NonPrime(f"{p!r} is not prime")
        self.p = p
        self.t = RatFun.t(p)
        self.one = RatFun.const(p, 1)
        self.zero = RatFun.const(p, 0)
        self._I = {}
        self._Iinv = {}
        for i in range(p):
            I = RatFun(p, (1, i))
            self._I[i] = I
            self._Iinv[i] = I.inv()

    def elem(self, i: int, u) -> RatLoopElement:
        if isinstance(u, int):
            u = RatFun.const(self.p, u)
        elif not isinstance(u, RatFun):
            u = RatFun.poly(self.p, u)
        return RatLoopElement(i % self.p, u)

    @property
    def identity(self) -> RatLoopElement:
        return RatLoopElement(0, self.zero)

    def I(self, i: int) -> RatFun:
        """1 + i t."""
        return self._I[i % self.p]

    def J(self, i: int) -> RatFun:
        """1 - i t."""
        return self._I[(-i) % self.p]

    def I_inv(self, i: int) -> RatFun:
        return self._Iinv[i % self.p]

    def J_inv(self, i: int) -> RatFun:
        return self._Iinv[(-i) % self.p]

    def mul(self, x: RatLoopElement, y: RatLoopElement) -> RatLoopElement:
        (i, u), (j, v) = x, y
        return RatLoopElement((i + j) % self.p, u.mul_linear(j) + v.mul_linear(-i))

    def left_div(self, x: RatLoopElement, y: RatLoopElement) -> RatLoopElement:
        """x \\ y."""
        (i, u), (j, v) = x, y
        k = (j - i) % self.p
        return RatLoopElement(k, (v - u.mul_linear(k)).div_linear(-i))

    def right_div(self, y: RatLoopElement, x: RatLoopElement) -> RatLoopElement:
        """y / x."""
        (j, v), (i, u) = y, x
        k = (j - i) % self.p
        return RatLoopElement(k, (v - u.mul_linear(-k)).div_linear(i))

    def inverse(self, x: RatLoopElement) -> RatLoopElement:
        return RatLoopElement((-x.i) % self.p, -x.u)

    def power(self, x: RatLoopElement, m: int, bracketing: str = "left") -> RatLoopElement:
        y = self.identity
        for _ in range(m):
            y = self.mul(y, x) if bracketing == "left" else self.mul(x, y)
        return y

    def __repr__(self):
        return f"LaurentLoop(p={self.p})"


def make_laurent_loop(p: int) -> LaurentLoop:
    return LaurentLoop(p)


# ---------------------------------------------------------------------------
# membership in U
# ---------------------------------------------------------------------------

@dataclass
class MembershipReport:
    element: RatFun
    in_U: bool
    factorization: Optional[dict]


def _strip_linear(den: tuple, root: int, p: int) -> tuple[tuple, int]:
    """Divide out (t - root) as often as possible."""
    lin = ((-root) % p, 1)
    m = 0
    while len(den) > 1:
        q, r = poly_divmod(den, lin, p)
        if r:
            break
        den, m = q, m + 1
    return den, m


def _is_poly_in_t2(f: tuple) -> bool:
    return all(c == 0 for c in f[1::2])


def membership_U(p: int, f: RatFun, i: Optional[int] = None) -> MembershipReport:
    """Decide whether f lies in the localization U.

    Odd p: U = F_p[t] localized at {1 + ct}; the reduced denominator must
    split into such factors (trial division over c). The factorization maps
    c to the multiplicity of (1 + ct).

    p = 2: U = F_2[t^2] localized at {1 + t^2}, and the question is whether
    f = g (1+t)^i with g in U; when ``i`` is None both i = 0 and i = 1 are tried.
    """
    if p != 2:
        den = f.den
        factors = {}
        for c in range(1, p):
            root = (-pow(c, p - 2, p)) % p  # 1 + ct vanishes at t = -1/c
            den, m = _strip_linear(den, root, p)
            if m:
                factors[c] = m
        if den == (1,):
            return MembershipReport(f, True, {"factors": factors})
        return MembershipReport(f, False, None)

    choices = [i % 2] if i is not None else [0, 1]
    for k in choices:
        g = f / RatFun(2, (1, 1)) ** k if k else f
        den, m = _strip_linear(g.den, 1, 2)
        if den == (1,) and m % 2 == 0 and _is_poly_in_t2(g.num):
            return MembershipReport(f, True, {"i": k, "num_even": True, "power_of_1+t^2": m // 2})
    return MembershipReport(f, False, None)


def in_L(loop: LaurentLoop, x: RatLoopElement) -> bool:
    """Predicted form of <(t,0),(0,1)>: W x U for odd p, {(it, g(1+t)^i)} for p = 2."""
    if loop.p == 2:
        return membership_U(2, x.u, x.i).in_U
    return membership_U(loop.p, x.u).in_U


# ---------------------------------------------------------------------------
# bounded closure
# ---------------------------------------------------------------------------

@dataclass
class ClosureReport:
    depth: int
    elements: dict  # element -> derivation size
    violations: list
    reached: dict  # target -> derivation size (None if unreached)
    complete: bool = True
    level_sizes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "depth": self.depth,
            "element_count": len(self.elements),
            "level_sizes": self.level_sizes,
            "violations": [str(v) for v in self.violations],
            "reached": {str(k): v for k, v in self.reached.items()},
            "complete": self.complete,
        }


def default_generators(loop: LaurentLoop) -> list[RatLoopElement]:
    return [loop.elem(1, 0), loop.elem(0, 1)]


def default_targets(loop: LaurentLoop) -> list[RatLoopElement]:
    p = loop.p
    if p == 2:
        return [
            loop.elem(1, RatFun(2, (1, 1))),
            loop.elem(1, RatFun(2, (1, 1), (1, 0, 1))),
            loop.elem(0, RatFun(2, (1,), (1, 0, 1))),
            loop.elem(0, RatFun(2, (0, 0, 1))),
        ]
    return [loop.elem(0, (0, 1)), loop.elem(0, (0, 0, 1)), loop.elem(0, (1, 2, 1))]


# ---------------------------------------------------------------------------
# closure kernel
#
# Product and divisions only ever add elements or multiply and divide them by
# some 1 + ct, so every denominator met during closure is a product of those
# linear factors. The kernel stores u as (num, e) with u = num / prod (1+ct)^e[c]
# and no factor 1 + ct with e[c] > 0 dividing num; that form is canonical, and
# reducing it needs only root tests instead of polynomial gcds.
# ---------------------------------------------------------------------------

class _LinearDenominators:
    def __init__(self, p: int):
        self.p = p
        self.roots = [None] + [(-pow(c, p - 2, p)) % p for c in range(1, p)]
        self.zero_e = (0,) * p
        self._dens: dict = {}

    def _eval(self, f: tuple, r: int) -> int:
        acc = 0
        for c in reversed(f):
            acc = (acc * r + c) % self.p
        return acc

    def _times(self, f: tuple, c: int) -> tuple:
        """f * (1 + ct)."""
        p = self.p
        if not f:
            return f
        out = [f[0]]
        for k in range(1, len(f)):
            out.append((f[k] + c * f[k - 1]) % p)
        out.append((c * f[-1]) % p)
        while out and out[-1] == 0:
            out.pop()
        return tuple(out)

    def _exact_div(self, f: tuple, c: int) -> tuple:
        """f / (1 + ct), assuming it divides."""
        p = self.p
        inv = pow(c, p - 2, p)
        # high to low: q[k-1] = (f[k] - q[k]) / c
        n = len(f) - 1
        q = [0] * n
        carry = 0
        for k in range(n, 0, -1):
            carry = ((f[k] - carry) * inv) % p
            q[k - 1] = carry
        return tuple(q)

    def mul_linear(self, u, c: int):
        num, e = u
        c %= self.p
        if c == 0 or not num:
            return u
        if e[c]:
            e = list(e)
            e[c] -= 1
            return num, tuple(e)
        return self._times(num, c), e

    def div_linear(self, u, c: int):
        num, e = u
        c %= self.p
        if c == 0 or not num:
            return u
        if self._eval(num, self.roots[c]) == 0:
            return self._exact_div(num, c), e
        e = list(e)
        e[c] += 1
        return num, tuple(e)

    def add(self, u, v, sign: int = 1):
        """u + sign * v."""
        (n1, e1), (n2, e2) = u, v
        if not n2:
            return u
        if not n1:
            return v if sign == 1 else self.neg(v)
        p = self.p
        if e1 != e2:
            e = tuple(max(a, b) for a, b in zip(e1, e2))
            for c in range(1, p):
                for _ in range(e[c] - e1[c]):
                    n1 = self._times(n1, c)
                for _ in range(e[c] - e2[c]):
                    n2 = self._times(n2, c)
        else:
            e = e1
        out = list(n1)
        if len(out) < len(n2):
            out.extend([0] * (len(n2) - len(out)))
        for k, c in enumerate(n2):
            out[k] = (out[k] + sign * c) % p
        while out and out[-1] == 0:
            out.pop()
        num = tuple(out)
        if not num:
            return (), self.zero_e
        if any(e):
            e = list(e)
            for c in range(1, p):
                while e[c] and self._eval(num, self.roots[c]) == 0:
                    num = self._exact_div(num, c)
                    e[c] -= 1
            e = tuple(e)
        return num, e

    def neg(self, u):
        num, e = u
        return tuple((-c) % self.p for c in num), e

    def sub(self, u, v):
        return self.add(u, v, -1)

    def mul(self, x, y):
        (i, u), (j, v) = x, y
        return (i + j) % self.p, self.add(self.mul_linear(u, j), self.mul_linear(v, -i))

    def left_div(self, x, y):
        (i, u), (j, v) = x, y
        k = (j - i) % self.p
        return k, self.div_linear(self.sub(v, self.mul_linear(u, k)), -i)

    def right_div(self, y, x):
        (j, v), (i, u) = y, x
        k = (j - i) % self.p
        return k, self.div_linear(self.sub(v, self.mul_linear(u, -k)), i)

    def encode(self, x: RatLoopElement):
        """Kernel form of x; ValueError if the denominator is not of the required shape."""
        p = self.p
        den, e = x.u.den, [0] * p
        for c in range(1, p):
            while len(den) > 1 and self._eval(den, self.roots[c]) == 0:
                den = self._exact_div(den, c)
                e[c] += 1
        if len(den) != 1:
            raise ValueError(f"{x.u} has a denominator outside the kernel")
        # den is now a nonzero constant; fold it into the numerator
        inv = pow(den[0], p - 2, p)
        return x.i, (tuple((c * inv) % p for c in x.u.num), tuple(e))

    def decode(self, z) -> RatLoopElement:
        i, (num, e) = z
        den = self._dens.get(e)
        if den is None:
            den = (1,)
            for c in range(1, self.p):
                for _ in range(e[c]):
                    den = poly_mul(den, (1, c), self.p)
            self._dens[e] = den
        return RatLoopElement(i, RatFun(self.p, num, den))


def bfs_closure(p: int, gens: Optional[Iterable[RatLoopElement]] = None, depth: int = 8,
                budget: int = 200_000, targets: Optional[Iterable[RatLoopElement]] = None) -> ClosureReport:
    """Close gens under product and both divisions, layer by derivation size.

    Level k holds the elements whose smallest derivation tree uses k binary
    operations: results of x * y, x \\ y, y / x with x from level i and y from
    level j, i + j = k - 1. Level 0 is gens together with the identity.
    Raises BudgetExceeded (carrying the partial report) once more than
    ``budget`` elements are known.
    """
    loop = LaurentLoop(p)
    kern = _LinearDenominators(p)
    gens = default_generators(loop) if gens is None else list(gens)
    targets = default_targets(loop) if targets is None else list(targets)
    seen: dict = {}
    levels: list[list] = [[]]
    for g in [loop.identity, *gens]:
        z = kern.encode(g)
        if z not in seen:
            seen[z] = 0
            levels[0].append(z)
    report = ClosureReport(depth, {}, [], {}, True, [len(levels[0])])
    mul, ldiv, rdiv = kern.mul, kern.left_div, kern.right_div

    def finish():
        elements = {kern.decode(z): k for z, k in seen.items()}
        report.elements = elements
        report.violations = [x for x in elements if not in_L(loop, x)]
        report.reached = {t: elements.get(t) for t in targets}
        report.level_sizes = [len(lv) for lv in levels]
        return report

    for k in range(1, depth + 1):
        new = []
        for i in range(k):
            right = levels[k - 1 - i]
            for x in levels[i]:
                for y in right:
                    for z in (mul(x, y), ldiv(x, y), rdiv(y, x)):
                        if z not in seen:
                            seen[z] = k
                            new.append(z)
                            if len(seen) > budget:
                                levels.append(new)
                                report.complete = False
                                raise BudgetExceeded(f"more than {budget} elements at level {k}", finish())
        levels.append(new)
    return finish()


# ---------------------------------------------------------------------------
# identities behind the structure of <(t,0),(0,1)>
# ---------------------------------------------------------------------------

@dataclass
class IdentityCheck:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class IdentityReport:
    p: int
    checks: list

    @property
    def all_ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.ok]

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "all_ok": self.all_ok,
            "checks": [{"name": c.name, "ok": c.ok, "detail": c.detail} for c in self.checks],
        }


def random_ratfun(p: int, rng: random.Random, max_deg: int = 3, den_in_U: bool = False) -> RatFun:
    """A random element of F_p(t), or of U when ``den_in_U``."""
    num = tuple(rng.randrange(p) for _ in range(rng.randint(0, max_deg) + 1))
    if den_in_U:
        den = (1,)
        for _ in range(rng.randint(0, 2)):
            if p == 2:
                den = poly_mul(den, (1, 0, 1), p)
            else:
                den = poly_mul(den, (1, rng.randrange(1, p)), p)
        if p == 2:
            num = tuple(c if k % 2 == 0 else 0 for k, c in enumerate(num))
    else:
        den = tuple(rng.randrange(p) for _ in range(rng.randint(0, max_deg))) + (1,)
    return RatFun(p, num, den)


def verify_infinite_identities(p: int, samples: int = 50, seed: int = 0) -> IdentityReport:
    loop = LaurentLoop(p)
    rng = random.Random(seed)
    t = loop.t
    one = loop.one
    E = loop.elem
    checks: list[IdentityCheck] = []

    def check(name, lhs, rhs):
        checks.append(IdentityCheck(name, lhs == rhs, f"{_fmt(lhs)} vs {_fmt(rhs)}"))

    tt, e01 = E(1, 0), E(0, 1)
    t_inv = loop.inverse(tt)

    # (0,t^m)(t,0) . (t,0)^-1 (0,t^m) = (t, t^m(1+t)) (-t, t^m(1+t)) = (0, 2(t^m - t^(m+2)))
    for m in range(0, 11):
        tm = t ** m
        left = loop.mul(E(0, tm), tt)
        right = loop.mul(t_inv, E(0, tm))
        check(f"aux-power m={m}: first factor", left, E(1, tm * (1 + t)))
        check(f"aux-power m={m}: second factor", right, E(-1, tm * (1 + t)))
        check(f"aux-power m={m}", loop.mul(left, right), E(0, 2 * (tm - t ** (m + 2))))

    # ((a,0) \ (0,(1-a)^m)) / (-a,0) = (-a,(1-a)^(m-1)) / (-a,0) = (0,(1-a)^(m-2))
    for i in range(1, p):
        one_minus = one - t * i
        for m in range(-5, 6):
            step = loop.left_div(E(i, 0), E(0, one_minus ** m))
            check(f"localization step a={i}t m={m}: left division", step, E(-i, one_minus ** (m - 1)))
            check(f"localization step a={i}t m={m}", loop.right_div(step, E(-i, 0)), E(0, one_minus ** (m - 2)))

    # (a,0)(0,u) . (0, u a (1-a)^-1) = (a, u)
    for _ in range(samples):
        i = rng.randrange(1, p)
        u = random_ratfun(p, rng, den_in_U=True)
        a = t * i
        x = loop.mul(E(i, 0), E(0, u))
        check(f"reassembly a={i}t u={u}", loop.mul(x, E(0, u * a / (one - a))), E(i, u))

    # power rule and exponent p
    for _ in range(samples):
        x = E(rng.randrange(p), random_ratfun(p, rng))
        for m in range(0, 2 * p + 1):
            want = E(m * x.i, x.u * m)
            ok = loop.power(x, m, "left") == want and loop.power(x, m, "right") == want
            if not ok:
                checks.append(IdentityCheck(f"power rule x={x} m={m}", False))
        nontrivial = x != loop.identity
        exp_ok = loop.power(x, p) == loop.identity and not (
            nontrivial and any(loop.power(x, m) == loop.identity for m in range(1, p)))
        checks.append(IdentityCheck(f"power rule and exponent {p} for x={x}", exp_ok))

    # (it,u) -> i is a homomorphism onto Z_p with kernel 0 x U
    for _ in range(samples):
        x = E(rng.randrange(p), random_ratfun(p, rng, den_in_U=True))
        y = E(rng.randrange(p), random_ratfun(p, rng, den_in_U=True))
        z = loop.mul(x, y)
        checks.append(IdentityCheck(f"projection {x} * {y}", z.i == (x.i + y.i) % p))

    # nonassociativity witness
    tt_then = loop.mul(loop.mul(tt, tt), e01)
    then_tt = loop.mul(tt, loop.mul(tt, e01))
    if p == 2:
        check("nonassociativity: ((t,0)(t,0))(0,1)", tt_then, E(0, 1))
        check("nonassociativity: (t,0)((t,0)(0,1))", then_tt, E(0, one + t * t))
    else:
        check("nonassociativity: ((t,0)(t,0))(0,1)", tt_then, E(2, one - 2 * t))
        check("nonassociativity: (t,0)((t,0)(0,1))", then_tt, E(2, one - 2 * t + t * t))
    checks.append(IdentityCheck("nonassociativity: products differ", tt_then != then_tt))

    if p != 2:
        check("(t,0)(0,1)", loop.mul(tt, e01), E(1, one - t))
        check("(-t,0) . (0,1)(t,0)", loop.mul(t_inv, loop.mul(e01, tt)), E(0, one + 2 * t + t * t))
        x, y = E(1, 0), E(1, 1)
        checks.append(IdentityCheck("noncommutative: (t,0)(t,1) != (t,1)(t,0)", loop.mul(x, y) != loop.mul(y, x)))
    else:
        checks.extend(_char2_checks(loop, rng, samples))
    return IdentityReport(p, checks)


def _char2_checks(loop: LaurentLoop, rng: random.Random, samples: int) -> list[IdentityCheck]:
    t, one, E = loop.t, loop.one, loop.elem
    s = one + t  # 1 + t
    s2 = one + t * t  # 1 + t^2
    out = []

    def check(name, lhs, rhs):
        out.append(IdentityCheck(name, lhs == rhs, f"{_fmt(lhs)} vs {_fmt(rhs)}"))

    for _ in range(samples):
        x = E(rng.randrange(2), random_ratfun(2, rng))
        y = E(rng.randrange(2), random_ratfun(2, rng))
        a, b = t * x.i, t * y.i
        check(f"char-2 product {x} * {y}", loop.mul(x, y), E(x.i + y.i, x.u * (one + b) + y.u * (one + a)))
        check(f"commutative {x} * {y}", loop.mul(x, y), loop.mul(y, x))
        check(f"char-2 left division {x} \\ {y}", loop.left_div(x, y),
              E(x.i + y.i, (y.u + x.u * (one + a + b)) / (one + a)))

    for _ in range(samples):
        f = random_ratfun(2, rng, den_in_U=True)
        g = random_ratfun(2, rng, den_in_U=True)
        check(f"(t,f(1+t))(t,g(1+t)) f={f} g={g}", loop.mul(E(1, f * s), E(1, g * s)), E(0, (f + g) * s2))
        check(f"(0,f)\\(t,g(1+t)) f={f} g={g}", loop.left_div(E(0, f), E(1, g * s)), E(1, (g + f) * s))
        check(f"(t,f(1+t))\\(0,g) f={f} g={g}", loop.left_div(E(1, f * s), E(0, g)), E(1, (g / s2 + f) * s))
        check(f"(t,f(1+t))\\(t,g(1+t)) f={f} g={g}", loop.left_div(E(1, f * s), E(1, g * s)), E(0, g + f))
        check(f"generator identity u={f}", loop.mul(E(1, 0), loop.mul(E(0, f), E(1, 0))), E(0, f * s2))
        check(f"generator identity u={f}: inner product", loop.mul(E(0, f), E(1, 0)), E(1, f * s))

    tt, e01 = E(1, 0), E(0, 1)
    x1 = loop.mul(tt, e01)
    check("(t,0)(0,1) = (t,1+t)", x1, E(1, s))
    x2 = loop.left_div(tt, e01)
    check("(t,0)\\(0,1) = (t,(1+t^2)^-1(1+t))", x2, E(1, s / s2))
    x3 = loop.left_div(x1, x2)
    check("(t,1+t)\\(t,(1+t^2)^-1(1+t)) = (0,1+(1+t^2)^-1)", x3, E(0, one + one / s2))
    check("(0,(1+t^2)^-1) from the previous two", loop.right_div(x3, e01), E(0, one / s2))
    return out


def _fmt(x) -> str:
    return str(x)

