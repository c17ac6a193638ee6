"""Exact rationals, quadratic irrationals, continued fractions and value-group elements.

Nothing in this module consults floating point when deciding a comparison.
Rationals are plain ``fractions.Fraction`` objects; quadratic irrationals are
``QuadIrr`` instances produced by the ``quad`` factory, which collapses to a
``Fraction`` whenever the irrational part vanishes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from numbers import Rational

from .errors import DomainError, ParseError, ValidationError

Rat = Fraction


def squarefree_split(n: int) -> tuple[int, int]:
    """Return (s, d) with n = s^2 * d and d squarefree. Requires n > 0."""
    if n <= 0:
        raise DomainError(f"squarefree_split needs a positive integer, got {n}")
    s, d = 1, 1
    rest = n
    p = 2
    # trial division up to the cube root; what remains is 1, a prime, p^2 or p*q
    while p * p * p <= rest:
        e = 0
        while rest % p == 0:
            rest //= p
            e += 1
        s *= p ** (e // 2)
        if e % 2:
            d *= p
        p += 1 if p == 2 else 2
    r = isqrt(rest)
    if r * r == rest:
        s *= r
    else:
        d *= rest
    return s, d


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


def _sign_sum_sqrt(a: Fraction, b: Fraction, d: int) -> int:
    """Sign of a + b*sqrt(d), decided by squaring."""
    sa = (a > 0) - (a < 0)
    sb = (b > 0) - (b < 0)
    if sb == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb
    # opposite signs: compare a^2 with b^2 d
    lhs = a * a
    rhs = b * b * d
    if lhs == rhs:
        return 0
    return sa if lhs > rhs else sb


class QuadIrr:
    """The real number a + b*sqrt(d) with b != 0 and d > 1 squarefree."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a: Fraction, b: Fraction, d: int):
        self.a = a
        self.b = b
        self.d = d

    def _coerce(self, other):
        if isinstance(other, QuadIrr):
            if other.d != self.d:
                raise DomainError(f"mixed radicals sqrt({self.d}) and sqrt({other.d})")
            return other.a, other.b
        if isinstance(other, (int, Fraction)):
            return Fraction(other), Fraction(0)
        return None

    def __add__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return quad(self.a + c[0], self.b + c[1], self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadIrr(-self.a, -self.b, self.d)

    def __sub__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return quad(self.a - c[0], self.b - c[1], self.d)

    def __rsub__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return quad(c[0] - self.a, c[1] - self.b, self.d)

    def __mul__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a2, b2 = c
        return quad(self.a * a2 + self.b * b2 * self.d, self.a * b2 + self.b * a2, self.d)

    __rmul__ = __mul__

    def inverse(self):
        norm = self.a * self.a - self.b * self.b * self.d
        return quad(self.a / norm, -self.b / norm, self.d)

    def __truediv__(self, other):
        if isinstance(other, QuadIrr):
            return self * other.inverse()
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return quad(self.a / other, self.b / other, self.d)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.inverse() * other
        return NotImplemented

    def sign(self) -> int:
        return _sign_sum_sqrt(self.a, self.b, self.d)

    def _cmp(self, other) -> int:
        c = self._coerce(other)
        if c is None:
            raise TypeError(f"cannot compare QuadIrr with {other!r}")
        return _sign_sum_sqrt(self.a - c[0], self.b - c[1], self.d)

    def __eq__(self, other):
        if isinstance(other, QuadIrr):
            return (self.a, self.b, self.d) == (other.a, other.b, other.d)
        return False

    def __hash__(self):
        return hash(("QuadIrr", self.a, self.b, self.d))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __floor__(self) -> int:
        return floor_exact(self)

    def __repr__(self):
        return f"QuadIrr({fmt_exact(self)})"

    def __str__(self):
        return fmt_exact(self)


Real = Fraction | QuadIrr


def quad(a, b, d: int) -> Real:
    """Canonical a + b*sqrt(d): square factors of d are pulled out, b = 0 gives a Fraction."""
    a = _as_fraction(a)
    b = _as_fraction(b)
    if d < 0:
        raise DomainError("negative radicand")
    if b == 0 or d == 0:
        return a
    s, sf = squarefree_split(d)
    if sf == 1:
        return a + b * s
    return QuadIrr(a, b * s, sf)


def sqrt_rat(r) -> Real:
    """Exact square root of a non-negative rational."""
    r = _as_fraction(r)
    if r < 0:
        raise DomainError(f"square root of negative number {r}")
    # sqrt(p/q) = sqrt(p*q)/q
    return quad(0, Fraction(1, r.denominator), r.numerator * r.denominator)


def _floor_sqrt_rat(r: Fraction) -> int:
    return isqrt(r.numerator * r.denominator) // r.denominator


def floor_exact(x) -> int:
    if isinstance(x, (int, Fraction)):
        return Fraction(x).__floor__()
    bsq = x.b * x.b * x.d
    fb = _floor_sqrt_rat(bsq)
    if x.b < 0:
        fb = -fb - 1
    n = x.a.__floor__() + fb
    while x < n:
        n -= 1
    while x >= n + 1:
        n += 1
    return n


def ceil_exact(x) -> int:
    return -floor_exact(-x)


def is_real(x) -> bool:
    return isinstance(x, (int, Fraction, QuadIrr))


# ---------------------------------------------------------------- formatting


def fmt_rat(x) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def fmt_exact(x) -> str:
    if isinstance(x, QuadIrr):
        head = fmt_rat(x.a)
        mag = abs(x.b)
        coef = "" if mag == 1 else f"{fmt_rat(mag)}*"
        op = "+" if x.b > 0 else "-"
        if x.a == 0:
            return f"{'' if x.b > 0 else '-'}{coef}sqrt({x.d})"
        return f"{head} {op} {coef}sqrt({x.d})"
    if isinstance(x, ValElem):
        return str(x)
    return fmt_rat(x)


def to_decimal(x, digits: int = 12) -> str:
    """Round-half-up decimal rendering with exactly ``digits`` fractional digits."""
    scale = 10**digits
    n = floor_exact(x * scale + Fraction(1, 2))
    sign = "-" if n < 0 else ""
    n = abs(n)
    whole, frac = divmod(n, scale)
    if digits == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{digits}d}"


_RAT_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")
_QUAD_RE = re.compile(
    r"^\s*([+-]?\d+(?:/\d+)?)?\s*(?:([+-])\s*(?:(\d+(?:/\d+)?)\s*\*\s*)?sqrt\(\s*(\d+)\s*\))\s*$"
)


def parse_rat(text: str) -> Fraction:
    m = _RAT_RE.match(text)
    if not m:
        raise ParseError(f"not a rational number: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) else 1
    if den == 0:
        raise ParseError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def parse_real(text: str) -> Real:
    """Parse "p/q", "a + b*sqrt(d)", "sqrt(d)" or a continued fraction "[..]"."""
    t = text.strip()
    if t.startswith("["):
        return cf_eval(parse_cf(t))
    if "sqrt" not in t:
        return parse_rat(t)
    if t.startswith("sqrt") or t.startswith("-sqrt") or re.match(r"^[+-]?\d+(?:/\d+)?\s*\*\s*sqrt", t):
        t = "0 " + ("+ " + t if not t.startswith("-") else t)
    m = _QUAD_RE.match(t)
    if not m:
        raise ParseError(f"not a quadratic irrational: {text!r}")
    a = parse_rat(m.group(1)) if m.group(1) else Fraction(0)
    b = parse_rat(m.group(3)) if m.group(3) else Fraction(1)
    if m.group(2) == "-":
        b = -b
    return quad(a, b, int(m.group(4)))


# ------------------------------------------------------- continued fractions


@dataclass(frozen=True)
class ContFrac:
    preperiod: tuple[int, ...]
    period: tuple[int, ...] | None = None

    @property
    def is_finite(self) -> bool:
        return self.period is None

    def problems(self) -> list[str]:
        out = []
        if self.period is None and not self.preperiod:
            out.append("empty continued fraction")
        if self.period is not None and not self.period:
            out.append("empty period")
        for i, a in enumerate(self.preperiod):
            if not isinstance(a, int) or a < 1:
                out.append(f"partial quotient {i} is {a}, must be a positive integer")
        if self.period:
            for i, a in enumerate(self.period):
                if not isinstance(a, int) or a < 1:
                    out.append(f"period entry {i} is {a}, must be a positive integer")
        return out

    def quotients(self, count: int) -> list[int]:
        """First ``count`` partial quotients (the period repeats indefinitely)."""
        out = list(self.preperiod[:count])
        if self.period:
            i = 0
            while len(out) < count:
                out.append(self.period[i % len(self.period)])
                i += 1
        return out

    def __str__(self):
        return fmt_cf(self)


def _eval_finite(qs) -> Fraction:
    x = Fraction(qs[-1])
    for a in reversed(qs[:-1]):
        x = a + 1 / x
    return x


def cf_eval(cf: ContFrac) -> Real:
    issues = cf.problems()
    if issues:
        raise ValidationError("malformed continued fraction: " + "; ".join(issues))
    if cf.period is None:
        return _eval_finite(cf.preperiod)
    # y = [p1; ..., pk, y]  =>  Q_k y^2 + (Q_{k-1} - P_k) y - P_{k-1} = 0
    p_prev, p_cur = 1, cf.period[0]
    q_prev, q_cur = 0, 1
    for a in cf.period[1:]:
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
    qa, qb, qc = q_cur, q_prev - p_cur, -p_prev
    disc = qb * qb - 4 * qa * qc
    y = quad(Fraction(-qb, 2 * qa), Fraction(1, 2 * qa), disc)
    x = y
    for a in reversed(cf.preperiod):
        x = a + 1 / x
    return x


def cf_of_rat(x) -> ContFrac:
    x = _as_fraction(x)
    if x < 1:
        raise DomainError(f"continued fraction needs a value >= 1, got {fmt_rat(x)}")
    qs = []
    num, den = x.numerator, x.denominator
    while den:
        q, r = divmod(num, den)
        qs.append(q)
        num, den = den, r
    return ContFrac(tuple(qs))


def cf_of_quad(x: QuadIrr, limit: int = 100000) -> ContFrac:
    if x < 1:
        raise DomainError(f"continued fraction needs a value >= 1, got {fmt_exact(x)}")
    seen: dict[QuadIrr, int] = {}
    qs: list[int] = []
    while x not in seen:
        if len(qs) > limit:
            raise DomainError("continued fraction period not found within limit")
        seen[x] = len(qs)
        a = floor_exact(x)
        qs.append(a)
        x = 1 / (x - a)
    start = seen[x]
    return ContFrac(tuple(qs[:start]), tuple(qs[start:]))


def cf_of(x) -> ContFrac:
    if isinstance(x, QuadIrr):
        return cf_of_quad(x)
    return cf_of_rat(x)


def fmt_cf(cf: ContFrac) -> str:
    parts = [str(a) for a in cf.preperiod]
    per = "(" + ", ".join(str(a) for a in cf.period) + ")" if cf.period else None
    if not parts:
        return f"[{per}]"
    head = parts[0]
    rest = parts[1:] + ([per] if per else [])
    if not rest:
        return f"[{head}]"
    return f"[{head}; " + ", ".join(rest) + "]"


def parse_cf(text: str) -> ContFrac:
    t = text.strip()
    if not (t.startswith("[") and t.endswith("]")):
        raise ParseError(f"continued fraction must be bracketed: {text!r}")
    body = t[1:-1].strip()
    period = None
    if "(" in body:
        i = body.index("(")
        if not body.endswith(")") or body.count("(") != 1 or body.count(")") != 1:
            raise ParseError(f"period must be one trailing (...) group: {text!r}")
        period = _int_list(body[i + 1 : -1], text)
        if not period:
            raise ParseError(f"empty period in {text!r}")
        body = body[:i].rstrip().rstrip(",;").strip()
    if not body:
        pre: list[int] = []
    elif ";" in body:
        head, _, tail = body.partition(";")
        pre = _int_list(head, text) + (_int_list(tail, text) if tail.strip() else [])
        if len(_int_list(head, text)) != 1:
            raise ParseError(f"exactly one integer part expected before ';' in {text!r}")
    else:
        pre = _int_list(body, text)
        if len(pre) != 1:
            raise ParseError(f"missing ';' after the integer part in {text!r}")
    return ContFrac(tuple(pre), tuple(period) if period is not None else None)


def _int_list(s: str, ctx: str) -> list[int]:
    out = []
    for piece in s.split(","):
        piece = piece.strip()
        if not re.fullmatch(r"[+-]?\d+", piece):
            raise ParseError(f"bad partial quotient {piece!r} in {ctx!r}")
        out.append(int(piece))
    return out


# ---------------------------------------------------------- value group


class ValElem:
    """p + q*gamma with integer p, q; gamma is only meaningful when q != 0."""

    __slots__ = ("p", "q", "gamma")

    def __init__(self, p: int, q: int = 0, gamma: Real | None = None):
        if q != 0 and gamma is None:
            raise DomainError("a nonzero gamma-coefficient needs gamma")
        self.p = p
        self.q = q
        self.gamma = gamma if q != 0 else None

    def real(self) -> Real:
        if self.q == 0:
            return Fraction(self.p)
        return self.p + self.q * self.gamma

    def _gamma_with(self, other: "ValElem"):
        if self.q and other.q and self.gamma != other.gamma:
            raise DomainError("value-group elements with different gamma")
        return self.gamma if self.q else other.gamma

    @staticmethod
    def lift(x) -> "ValElem":
        if isinstance(x, ValElem):
            return x
        if isinstance(x, int):
            return ValElem(x)
        if isinstance(x, Fraction) and x.denominator == 1:
            return ValElem(x.numerator)
        raise TypeError(f"cannot lift {x!r} to a value-group element")

    def __add__(self, other):
        if not isinstance(other, (ValElem, int)):
            return NotImplemented
        o = ValElem.lift(other)
        return ValElem(self.p + o.p, self.q + o.q, self._gamma_with(o))

    __radd__ = __add__

    def __neg__(self):
        return ValElem(-self.p, -self.q, self.gamma)

    def __sub__(self, other):
        if not isinstance(other, (ValElem, int)):
            return NotImplemented
        return self + (-ValElem.lift(other))

    def __rsub__(self, other):
        return ValElem.lift(other) - self

    def __mul__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        return ValElem(self.p * k, self.q * k, self.gamma)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, ValElem)):
            return valelem_cmp(self, ValElem.lift(other)) == 0
        if isinstance(other, (Fraction, QuadIrr)):
            return self.real() == other
        return NotImplemented

    def __hash__(self):
        if self.q == 0:
            return hash(self.p)
        return hash((self.p, self.q, self.gamma))

    def __lt__(self, other):
        return valelem_cmp(self, ValElem.lift(other)) < 0

    def __le__(self, other):
        return valelem_cmp(self, ValElem.lift(other)) <= 0

    def __gt__(self, other):
        return valelem_cmp(self, ValElem.lift(other)) > 0

    def __ge__(self, other):
        return valelem_cmp(self, ValElem.lift(other)) >= 0

    def __str__(self):
        if self.q == 0:
            return str(self.p)
        op = "+" if self.q > 0 else "-"
        return f"{self.p}{op}{abs(self.q)}*gamma"

    def __repr__(self):
        return f"ValElem({self.p}, {self.q}, {self.gamma!s})"


def valelem_cmp(x: ValElem, y: ValElem) -> int:
    """Exact sign of x - y as real numbers: -1, 0 or 1."""
    if x.q and y.q and x.gamma != y.gamma:
        raise DomainError("value-group elements with different gamma")
    gamma = x.gamma if x.q else y.gamma
    dp, dq = x.p - y.p, x.q - y.q
    if dq == 0:
        return (dp > 0) - (dp < 0)
    diff = dp + dq * gamma
    if isinstance(diff, QuadIrr):
        return diff.sign()
    return (diff > 0) - (diff < 0)
