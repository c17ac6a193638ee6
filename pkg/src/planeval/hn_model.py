"""Hamburger-Noether data: coefficient fields, rows, validation, parametrization, sampling.

Row ``i`` relates the variables ``w_{i-1}, w_i, w_{i+1}`` (with ``w_{-1} = v`` and
``w_0 = u``):

* free row:   ``w_{i-1} = sum_{l=k}^{h} a_l w_i^l + w_i^h w_{i+1}``
* power row:  ``w_{i-1} = w_i^h w_{i+1}``

Row 0 is always free with ``k = 1``; its coefficients ``a_{01}..a_{0h}`` may all vanish.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field as dc_field, replace
from fractions import Fraction
from typing import Union

from .errors import DomainError, ParseError, UnsupportedClassError, ValidationError
from .exactnum import ContFrac, ValElem, cf_eval, cf_of_quad, fmt_cf, fmt_rat, parse_cf, parse_rat

# ------------------------------------------------------------------ fields


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for p in small:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    # these bases are deterministic for n < 3.3e24
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class FpElem:
    __slots__ = ("v", "p")

    def __init__(self, v: int, p: int):
        self.v = v % p
        self.p = p

    def _val(self, other):
        if isinstance(other, FpElem):
            if other.p != self.p:
                raise DomainError("elements of different prime fields")
            return other.v
        if isinstance(other, int):
            return other
        if isinstance(other, Fraction):
            return other.numerator * pow(other.denominator, -1, self.p)
        return None

    def __add__(self, other):
        o = self._val(other)
        return NotImplemented if o is None else FpElem(self.v + o, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._val(other)
        return NotImplemented if o is None else FpElem(self.v - o, self.p)

    def __rsub__(self, other):
        o = self._val(other)
        return NotImplemented if o is None else FpElem(o - self.v, self.p)

    def __mul__(self, other):
        o = self._val(other)
        return NotImplemented if o is None else FpElem(self.v * o, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return FpElem(-self.v, self.p)

    def __truediv__(self, other):
        o = self._val(other)
        if o is None:
            return NotImplemented
        if o % self.p == 0:
            raise ZeroDivisionError("division by zero in F_p")
        return FpElem(self.v * pow(o, -1, self.p), self.p)

    def __rtruediv__(self, other):
        o = self._val(other)
        if o is None:
            return NotImplemented
        return FpElem(o, self.p) / self

    def __pow__(self, e: int):
        return FpElem(pow(self.v, e, self.p), self.p)

    def __eq__(self, other):
        o = self._val(other)
        if o is None:
            return NotImplemented
        return (self.v - o) % self.p == 0

    def __hash__(self):
        return hash((self.v, self.p))

    def __bool__(self):
        return self.v != 0

    def __repr__(self):
        return f"FpElem({self.v}, {self.p})"

    def __str__(self):
        return str(self.v)


class RationalField:
    name = "Q"
    bound = 2**15

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("Q")

    def elem(self, x) -> Fraction:
        return Fraction(x)

    def zero(self):
        return Fraction(0)

    def one(self):
        return Fraction(1)

    def random(self, rng: random.Random) -> Fraction:
        return Fraction(rng.randint(-self.bound, self.bound))

    def random_nonzero(self, rng: random.Random) -> Fraction:
        while True:
            x = self.random(rng)
            if x:
                return x

    def parse(self, text: str) -> Fraction:
        return parse_rat(text)

    def fmt(self, x) -> str:
        return fmt_rat(x)

    def __repr__(self):
        return "QQ"


class PrimeField:
    def __init__(self, p: int):
        if not is_prime(p):
            raise ValidationError(f"{p} is not prime")
        self.p = p

    @property
    def name(self) -> str:
        return f"Fp:{self.p}"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("Fp", self.p))

    def elem(self, x) -> FpElem:
        if isinstance(x, FpElem):
            return FpElem(x.v, self.p)
        x = Fraction(x)
        if x.denominator % self.p == 0:
            raise DomainError(f"{x} has no image in F_{self.p}")
        return FpElem(x.numerator * pow(x.denominator, -1, self.p), self.p)

    def zero(self):
        return FpElem(0, self.p)

    def one(self):
        return FpElem(1, self.p)

    def random(self, rng: random.Random) -> FpElem:
        return FpElem(rng.randrange(self.p), self.p)

    def random_nonzero(self, rng: random.Random) -> FpElem:
        return FpElem(rng.randrange(1, self.p), self.p)

    def parse(self, text: str) -> FpElem:
        return self.elem(parse_rat(text))

    def fmt(self, x) -> str:
        return str(self.elem(x).v)

    def __repr__(self):
        return f"PrimeField({self.p})"


QQ = RationalField()
MERSENNE31 = 2**31 - 1
Field = Union[RationalField, PrimeField]


def parse_field(text: str) -> Field:
    t = text.strip()
    if t in ("Q", "QQ"):
        return QQ
    m = re.fullmatch(r"Fp:(\d+)", t)
    if not m:
        raise ParseError(f"unknown field {text!r}; use Q or Fp:<prime>")
    return PrimeField(int(m.group(1)))


# -------------------------------------------------------------------- rows


@dataclass(frozen=True)
class FreeRow:
    h: int
    k: int
    coeffs: tuple | None = None  # a_k..a_h, or None when erased

    def coeff(self, l: int):
        """a_l for 1 <= l <= h; zero below k."""
        if self.coeffs is None:
            raise ValidationError("coefficients are erased")
        if l < self.k:
            return 0
        return self.coeffs[l - self.k]


@dataclass(frozen=True)
class PowerRow:
    h: int


Row = Union[FreeRow, PowerRow]


@dataclass(frozen=True)
class Divisorial:
    pass


@dataclass(frozen=True)
class Irrational:
    tail: ContFrac


@dataclass(frozen=True)
class Curve:
    pass


Terminal = Union[Divisorial, Irrational, Curve]


@dataclass(frozen=True)
class HNExpansion:
    rows: tuple
    terminal: Terminal = Divisorial()
    field: Field = dc_field(default=QQ)

    @property
    def free_indices(self) -> list[int]:
        return [i for i, r in enumerate(self.rows) if isinstance(r, FreeRow)]

    @property
    def is_madic(self) -> bool:
        return (
            isinstance(self.terminal, Divisorial)
            and len(self.rows) == 1
            and isinstance(self.rows[0], FreeRow)
            and self.rows[0].h == 1
        )

    @property
    def has_coeffs(self) -> bool:
        return all(not isinstance(r, FreeRow) or r.coeffs is not None for r in self.rows)

    def erased(self) -> "HNExpansion":
        rows = tuple(replace(r, coeffs=None) if isinstance(r, FreeRow) else r for r in self.rows)
        return replace(self, rows=rows)

    def with_rows(self, rows) -> "HNExpansion":
        return replace(self, rows=tuple(rows))


# -------------------------------------------------------------- validation


def validate(hn: HNExpansion) -> list[str]:
    """Diagnostics for every violated structural rule; empty when the data is valid."""
    out: list[str] = []
    rows = hn.rows
    if not rows:
        return ["expansion has no rows"]
    first = rows[0]
    if not isinstance(first, FreeRow):
        out.append("row 0: the first row must be free")
    elif first.k != 1:
        out.append(
            f"row 0: first row must start at k=1 (got k={first.k}); "
            "if nu(u) > nu(v), swap u and v"
        )
    for i, r in enumerate(rows):
        if r.h < 1:
            out.append(f"row {i}: h must be >= 1")
        if isinstance(r, FreeRow):
            if i >= 1 and r.k < 2:
                out.append(f"row {i}: free rows after the first need k >= 2 (got k={r.k})")
            if r.k < 1 or r.k > r.h:
                out.append(f"row {i}: need 1 <= k <= h (got k={r.k}, h={r.h})")
            if r.coeffs is not None:
                if len(r.coeffs) != r.h - r.k + 1:
                    out.append(
                        f"row {i}: expected {r.h - r.k + 1} coefficients, got {len(r.coeffs)}"
                    )
                elif i >= 1 and r.coeffs[0] == 0:
                    out.append(f"row {i}: zero leading coefficient a_{{{i},{r.k}}}")
    last = rows[-1]
    term = hn.terminal
    if isinstance(term, Divisorial):
        if isinstance(last, PowerRow) and last.h < 2:
            out.append(f"row {len(rows) - 1}: a final power row needs h >= 2")
        if isinstance(last, FreeRow) and len(rows) > 1 and last.k == last.h:
            out.append(
                f"row {len(rows) - 1}: final free row with k = h is not canonical; "
                "write it as a power row"
            )
    elif isinstance(term, Irrational):
        for p in term.tail.problems():
            out.append(f"irrational tail: {p}")
        if term.tail.period is None:
            out.append("irrational tail: needs a nonempty period")
        elif 0 in term.tail.period:
            out.append("irrational tail: period contains 0")
    elif isinstance(term, Curve):
        if not isinstance(last, FreeRow):
            out.append("curve expansions must end with a free row")
    return out


def ensure_valid(hn: HNExpansion) -> None:
    issues = validate(hn)
    if issues:
        raise ValidationError("invalid expansion: " + "; ".join(issues))


def classify(hn: HNExpansion) -> str:
    if isinstance(hn.terminal, Irrational):
        return "irrational"
    if isinstance(hn.terminal, Curve):
        return "curve"
    return "divisorial"


def require_class(hn: HNExpansion, allowed: tuple[str, ...], what: str) -> str:
    cls = classify(hn)
    if cls not in allowed:
        hint = "; use vdelta" if cls == "curve" else ""
        raise UnsupportedClassError(f"unsupported class for {what}: {cls} valuation{hint}")
    return cls


# ------------------------------------------------------- derived structure


def last_free(hn: HNExpansion) -> int:
    return hn.free_indices[-1]


def gamma_cf(hn: HNExpansion) -> ContFrac:
    """Continued fraction of gamma = nu(w_{s_G}) / nu(w_{s_G+1}) for an irrational expansion.

    Power rows stored after the last free row come first, then the tail quotients.
    """
    sg = last_free(hn)
    extra = tuple(r.h for r in hn.rows[sg + 1 :])
    tail = hn.terminal.tail
    return ContFrac(extra + tuple(tail.preperiod), tail.period)


def gamma_of(hn: HNExpansion):
    return cf_eval(gamma_cf(hn))


def canonical(hn: HNExpansion) -> HNExpansion:
    """Irrational expansions with power rows stored after the last free row fold them into the tail."""
    if not isinstance(hn.terminal, Irrational):
        return hn
    sg = last_free(hn)
    tail = cf_of_quad(gamma_of(hn))
    return HNExpansion(hn.rows[: sg + 1], Irrational(tail), hn.field)


def row_values(hn: HNExpansion) -> list:
    """nu(w_i) for every stored row i (ints, or ValElem for irrational expansions)."""
    rows = hn.rows
    n = len(rows)
    cls = classify(hn)
    vals: list = [None] * (n + 1)  # vals[i] = nu(w_i); index n holds w_n
    if cls == "divisorial":
        vals[n] = 0
        vals[n - 1] = 1
        start = n - 1
    elif cls == "irrational":
        sg = last_free(hn)
        gamma = gamma_of(hn)
        vals[sg] = ValElem(0, 1, gamma)
        vals[sg + 1] = ValElem(1) if sg + 1 <= n else None
        # stored power rows below s_G: nu(w_{i+1}) = nu(w_{i-1}) - h_i nu(w_i)
        for i in range(sg + 1, n):
            vals[i + 1] = vals[i - 1] - rows[i].h * vals[i]
        start = sg
    else:
        sg = last_free(hn)
        vals[sg] = 1
        vals[sg + 1] = 0
        start = sg
    for i in range(start, 0, -1):
        r = rows[i]
        if isinstance(r, PowerRow):
            vals[i - 1] = r.h * vals[i] + vals[i + 1]
        else:
            vals[i - 1] = r.k * vals[i]
    return vals[:n] if cls != "curve" else vals[: last_free(hn) + 1]


# ---------------------------------------------------------- parametrization


@dataclass(frozen=True)
class ParamEq:
    """u and v as finitely supported series.

    Divisorial: keys (a, b) mean t^a z^b. Irrational: keys (p, q) mean t^(p + q*gamma).
    """

    u: dict
    v: dict
    kind: str
    gamma: object = None


def _pmul(x: dict, y: dict, field) -> dict:
    out: dict = {}
    for (a1, b1), c1 in x.items():
        for (a2, b2), c2 in y.items():
            key = (a1 + a2, b1 + b2)
            out[key] = out.get(key, field.zero()) + c1 * c2
    return {k: c for k, c in out.items() if c != 0}


def parametrize(hn: HNExpansion) -> ParamEq:
    require_class(hn, ("divisorial", "irrational"), "parametrization")
    ensure_valid(hn)
    if not hn.has_coeffs:
        raise ValidationError("parametrization needs coefficients; sample them first")
    f = hn.field
    rows = hn.rows
    if classify(hn) == "divisorial":
        top = len(rows) - 1
        lower = {(1, 0): f.one()}  # w_N = t
        below = {(0, 1): f.one()}  # w_{N+1} = z
        gamma = None
    else:
        top = last_free(hn)
        lower = {(0, 1): f.one()}  # w_{s_G} = t^gamma
        below = {(1, 0): f.one()}  # w_{s_G+1} = t
        gamma = gamma_of(hn)
    for i in range(top, -1, -1):
        r = rows[i]
        powers = [{(0, 0): f.one()}]
        for _ in range(r.h):
            powers.append(_pmul(powers[-1], lower, f))
        nxt = _pmul(powers[r.h], below, f)
        if isinstance(r, FreeRow):
            for l in range(r.k, r.h + 1):
                c = f.elem(r.coeff(l))
                if c != 0:
                    for key, val in powers[l].items():
                        nxt[key] = nxt.get(key, f.zero()) + c * val
            nxt = {key: c for key, c in nxt.items() if c != 0}
        lower, below = nxt, lower
    return ParamEq(u=below, v=lower, kind=classify(hn), gamma=gamma)


# ---------------------------------------------------------------- sampling


def coefficient_slots(hn: HNExpansion) -> int:
    return sum(r.h - r.k + 1 for r in hn.rows if isinstance(r, FreeRow))


def sample_very_general(hn: HNExpansion, field: Field | None = None, seed: int = 0) -> HNExpansion:
    """Fill every coefficient slot with independent uniform field elements.

    The leading coefficient of each free row after the first is drawn nonzero.
    """
    fld = field if field is not None else hn.field
    rng = random.Random(seed)
    rows = []
    for i, r in enumerate(hn.rows):
        if isinstance(r, FreeRow):
            cs = []
            for idx in range(r.h - r.k + 1):
                if i >= 1 and idx == 0:
                    cs.append(fld.random_nonzero(rng))
                else:
                    cs.append(fld.random(rng))
            rows.append(FreeRow(r.h, r.k, tuple(cs)))
        else:
            rows.append(r)
    return HNExpansion(tuple(rows), hn.terminal, fld)


def random_structure(rng: random.Random, max_rows: int, max_h: int, klass: str = "divisorial") -> HNExpansion:
    """A random valid coefficient-erased structure.

    ``klass`` is "divisorial", "irrational" or "mixed".
    """
    if klass == "mixed":
        klass = rng.choice(["divisorial", "irrational"])
    if klass not in ("divisorial", "irrational"):
        raise DomainError(f"unknown class {klass!r}")
    max_h = max(1, max_h)
    while True:
        nrows = rng.randint(1, max(1, max_rows))
        rows: list = [FreeRow(rng.randint(1, max_h), 1)]
        for _ in range(nrows - 1):
            if max_h >= 2 and rng.random() < 0.5:
                h = rng.randint(2, max_h)
                rows.append(FreeRow(h, rng.randint(2, h)))
            else:
                rows.append(PowerRow(rng.randint(1, max_h)))
        if klass == "irrational":
            while rows and isinstance(rows[-1], PowerRow):
                rows.pop()
            pre = tuple(rng.randint(1, 3) for _ in range(rng.randint(0, 2)))
            per = tuple(rng.randint(1, 3) for _ in range(rng.randint(1, 2)))
            hn = HNExpansion(tuple(rows), Irrational(ContFrac(pre, per)))
        else:
            hn = HNExpansion(tuple(rows), Divisorial())
        if not validate(hn):
            return hn


# ---------------------------------------------------------------- file I/O

_FREE_RE = re.compile(r"^free\s+h=(\d+)\s+coeffs\s+k=(\d+)\s*:\s*(.*)$")
_POWER_RE = re.compile(r"^power\s+h=(\d+)$")


def parse_hn(text: str) -> HNExpansion:
    fld: Field | None = None
    rows: list = []
    terminal: Terminal | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if terminal is not None:
            raise ParseError(f"unexpected content after terminal line: {line!r}", lineno, 1)
        if line.startswith("field:"):
            if fld is not None or rows:
                raise ParseError("field header must appear once, before the rows", lineno, 1)
            fld = parse_field(line[len("field:") :])
            continue
        if fld is None:
            raise ParseError("missing 'field:' header", lineno, 1)
        m = _FREE_RE.match(line)
        if m:
            h, k = int(m.group(1)), int(m.group(2))
            body = m.group(3).strip()
            items = [c.strip() for c in body.split(",")] if body else []
            if k <= h and len(items) != h - k + 1:
                raise ParseError(f"expected {h - k + 1} coefficients, got {len(items)}", lineno, m.start(3) + 1)
            if items and all(c == "?" for c in items):
                coeffs = None
            else:
                try:
                    coeffs = tuple(fld.parse(c) for c in items)
                except ParseError as e:
                    raise ParseError(str(e), lineno, m.start(3) + 1) from None
            rows.append(FreeRow(h, k, coeffs))
            continue
        m = _POWER_RE.match(line)
        if m:
            rows.append(PowerRow(int(m.group(1))))
            continue
        if line.startswith("terminal:"):
            kind = line[len("terminal:") :].strip()
            if kind == "divisorial":
                terminal = Divisorial()
            elif kind == "curve":
                terminal = Curve()
            elif kind.startswith("irrational"):
                mm = re.fullmatch(r"irrational\s+cf=(\[.*\])", kind)
                if not mm:
                    raise ParseError("expected 'irrational cf=[...]'", lineno, 1)
                try:
                    terminal = Irrational(parse_cf(mm.group(1)))
                except ParseError as e:
                    raise ParseError(str(e), lineno, line.index("[") + 1) from None
            else:
                raise ParseError(f"unknown terminal {kind!r}", lineno, len("terminal:") + 2)
            continue
        raise ParseError(f"unrecognized line {line!r}", lineno, 1)
    if fld is None:
        raise ParseError("missing 'field:' header")
    if terminal is None:
        raise ParseError("missing 'terminal:' line")
    if not rows:
        raise ParseError("no rows")
    return HNExpansion(tuple(rows), terminal, fld)


def format_hn(hn: HNExpansion) -> str:
    lines = [f"field: {hn.field.name}"]
    for r in hn.rows:
        if isinstance(r, FreeRow):
            if r.coeffs is None:
                body = ", ".join("?" for _ in range(r.h - r.k + 1))
            else:
                body = ", ".join(hn.field.fmt(c) for c in r.coeffs)
            lines.append(f"free h={r.h} coeffs k={r.k}: {body}")
        else:
            lines.append(f"power h={r.h}")
    t = hn.terminal
    if isinstance(t, Irrational):
        lines.append(f"terminal: irrational cf={fmt_cf(t.tail)}")
    elif isinstance(t, Curve):
        lines.append("terminal: curve")
    else:
        lines.append("terminal: divisorial")
    return "\n".join(lines) + "\n"


def load_hn(path: str) -> HNExpansion:
    with open(path, encoding="utf-8") as fh:
        return parse_hn(fh.read())
