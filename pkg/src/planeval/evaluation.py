"""Valuations of polynomials: series substitution, the multiplicity walk, and limits."""

from __future__ import annotations

import re
from functools import cmp_to_key, lru_cache
from fractions import Fraction
from math import comb

from .errors import DomainError, ParseError
from .exactnum import ContFrac, ValElem, cf_eval, cf_of_rat, fmt_rat, parse_rat, valelem_cmp
from .hn_model import (
    Divisorial,
    FreeRow,
    HNExpansion,
    PowerRow,
    canonical,
    classify,
    ensure_valid,
    gamma_cf,
    last_free,
    parametrize,
    require_class,
    validate,
)

# --------------------------------------------------------------- polynomials


class BivarPoly:
    """Finite map (i, j) -> coefficient; local chart means u^i v^j, affine means x^i y^j."""

    __slots__ = ("terms", "chart")

    def __init__(self, terms: dict | None = None, chart: str = "local"):
        if chart not in ("local", "affine"):
            raise DomainError(f"unknown chart {chart!r}")
        self.terms = {k: c for k, c in (terms or {}).items() if c != 0}
        self.chart = chart

    @classmethod
    def const(cls, c, chart: str = "local") -> "BivarPoly":
        return cls({(0, 0): Fraction(c)}, chart)

    @classmethod
    def monomial(cls, i: int, j: int, c=1, chart: str = "local") -> "BivarPoly":
        return cls({(i, j): Fraction(c) if not hasattr(c, "p") else c}, chart)

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def _same_chart(self, other: "BivarPoly") -> None:
        if self.chart != other.chart:
            raise DomainError("polynomials live in different charts")

    def __add__(self, other):
        if not isinstance(other, BivarPoly):
            other = BivarPoly.const(other, self.chart)
        self._same_chart(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return BivarPoly(out, self.chart)

    __radd__ = __add__

    def __neg__(self):
        return BivarPoly({k: -c for k, c in self.terms.items()}, self.chart)

    def __sub__(self, other):
        return self + (-other if isinstance(other, BivarPoly) else -Fraction(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, BivarPoly):
            return BivarPoly({k: c * other for k, c in self.terms.items()}, self.chart)
        self._same_chart(other)
        out: dict = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, 0) + c1 * c2
        return BivarPoly(out, self.chart)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out = BivarPoly.const(1, self.chart)
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, BivarPoly) and self.chart == other.chart and self.terms == other.terms

    def __hash__(self):
        return hash((self.chart, frozenset(self.terms.items())))

    def __repr__(self):
        return f"BivarPoly({format_poly(self)!r}, chart={self.chart!r})"

    def __str__(self):
        return format_poly(self)


def format_poly(f: BivarPoly) -> str:
    if f.is_zero():
        return "0"
    a, b = ("u", "v") if f.chart == "local" else ("x", "y")
    pieces = []
    for (i, j), c in sorted(f.terms.items(), key=lambda kv: (-(kv[0][0] + kv[0][1]), -kv[0][0])):
        mono = []
        if i:
            mono.append(a if i == 1 else f"{a}^{i}")
        if j:
            mono.append(b if j == 1 else f"{b}^{j}")
        text_c = str(c) if not isinstance(c, Fraction) else fmt_rat(c)
        neg = text_c.startswith("-")
        mag = text_c[1:] if neg else text_c
        if mono:
            body = "*".join(mono) if mag == "1" else mag + "*" + "*".join(mono)
        else:
            body = mag
        pieces.append(("-" if neg else "+", body))
    first_sign, first_body = pieces[0]
    out = ("-" if first_sign == "-" else "") + first_body
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


_TOKEN = re.compile(r"\s*(?:(\d+)|([uvxy])|(\*\*|[-+*/^()]))")


def parse_poly(text: str) -> BivarPoly:
    """Parse "v^2 - u^3", "(x + 2*y)^3 - 1/2" or a "terms:" block of "i j c" lines."""
    stripped = text.strip()
    if stripped.startswith("terms"):
        return _parse_terms(stripped)
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos:].strip()[0]!r}", 1, pos + 1)
        if m.group(1):
            tokens.append(("num", int(m.group(1)), m.start(1)))
        elif m.group(2):
            tokens.append(("var", m.group(2), m.start(2)))
        else:
            op = "^" if m.group(3) == "**" else m.group(3)
            tokens.append(("op", op, m.start(3)))
        pos = m.end()
    parser = _Parser(tokens, text)
    f = parser.parse()
    return f


class _Parser:
    def __init__(self, tokens, text):
        self.toks = tokens
        self.i = 0
        self.text = text
        self.chart = None

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def error(self, msg, tok=None):
        col = (tok[2] + 1) if tok else len(self.text) + 1
        raise ParseError(msg, 1, col)

    def parse(self) -> BivarPoly:
        if not self.toks:
            self.error("empty polynomial")
        f = self.expr()
        if self.peek() is not None:
            self.error("trailing input", self.peek())
        chart = self.chart or "local"
        return BivarPoly(f.terms, chart)

    def expr(self) -> BivarPoly:
        f = self.term()
        while (t := self.peek()) and t[0] == "op" and t[1] in "+-":
            self.take()
            g = self.term()
            f = f + g if t[1] == "+" else f - g
        return f

    def term(self) -> BivarPoly:
        f = self.factor()
        while (t := self.peek()) and t[0] == "op" and t[1] in "*/":
            self.take()
            g = self.factor()
            if t[1] == "*":
                f = f * g
            else:
                if g.degree > 0 or g.is_zero():
                    self.error("division only by a nonzero constant", t)
                f = f * (1 / g.terms[(0, 0)])
        return f

    def factor(self) -> BivarPoly:
        t = self.peek()
        if t and t[0] == "op" and t[1] in "+-":
            self.take()
            f = self.factor()
            return -f if t[1] == "-" else f
        base = self.base()
        t = self.peek()
        if t and t[0] == "op" and t[1] == "^":
            self.take()
            e = self.take()
            if not e or e[0] != "num":
                self.error("exponent must be a non-negative integer", e)
            return base ** e[1]
        return base

    def base(self) -> BivarPoly:
        t = self.take()
        if t is None:
            self.error("unexpected end of input")
        kind, val, _ = t
        if kind == "num":
            return BivarPoly.const(val)
        if kind == "var":
            chart = "local" if val in "uv" else "affine"
            if self.chart and self.chart != chart:
                self.error("cannot mix u, v with x, y", t)
            self.chart = chart
            return BivarPoly({(1, 0) if val in "ux" else (0, 1): Fraction(1)})
        if val == "(":
            f = self.expr()
            close = self.take()
            if not close or close[1] != ")":
                self.error("missing ')'", close)
            return f
        self.error(f"unexpected {val!r}", t)


def _parse_terms(text: str) -> BivarPoly:
    lines = text.splitlines()
    head = lines[0].strip()
    m = re.fullmatch(r"terms(?:\s*\((local|affine)\))?\s*:\s*(.*)", head)
    if not m:
        raise ParseError("expected 'terms:' header", 1, 1)
    chart = m.group(1) or "local"
    body = [m.group(2)] + lines[1:]
    terms: dict = {}
    for n, line in enumerate(body, start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3 or not parts[0].isdigit() or not parts[1].isdigit():
            raise ParseError(f"expected 'i j coeff', got {line!r}", n, 1)
        key = (int(parts[0]), int(parts[1]))
        terms[key] = terms.get(key, 0) + parse_rat(parts[2])
    return BivarPoly(terms, chart)


def to_field(f: BivarPoly, field) -> dict:
    out = {}
    for k, c in f.terms.items():
        e = field.elem(c)
        if e != 0:
            out[k] = e
    return out


# -------------------------------------------------------- chart conversion


def chart_convert(f: BivarPoly, d: int) -> BivarPoly:
    """Affine g~(x, y) to local g(u, v) = g~(x, y)/x^d, or the inverse when f is local.

    With u = y/x and v = 1/x: x^i y^j / x^d = u^j v^(d-i-j).
    """
    if d < f.degree:
        raise DomainError(f"degree bound {d} is below the polynomial degree {f.degree}")
    out = {}
    if f.chart == "affine":
        for (i, j), c in f.terms.items():
            out[(j, d - i - j)] = c
        return BivarPoly(out, "local")
    for (i, j), c in f.terms.items():
        out[(d - i - j, i)] = c
    return BivarPoly(out, "affine")


# ---------------------------------------------------- series substitution


@lru_cache(maxsize=512)
def _param(hn: HNExpansion):
    return parametrize(hn)


def _truncated_mul(x: dict, y: dict, cap: int | None, field) -> dict:
    out: dict = {}
    zero = field.zero()
    for (a1, b1), c1 in x.items():
        for (a2, b2), c2 in y.items():
            a = a1 + a2
            if cap is not None and a >= cap:
                continue
            key = (a, b1 + b2)
            out[key] = out.get(key, zero) + c1 * c2
    return {k: c for k, c in out.items() if c != 0}


def _substitute(hn: HNExpansion, f: BivarPoly, cap: int | None) -> dict:
    field = hn.field
    pe = _param(hn)
    coeffs = to_field(f, field)
    if not coeffs:
        raise DomainError("the valuation of the zero polynomial is undefined")
    maxi = max(i for i, _ in coeffs)
    maxj = max(j for _, j in coeffs)
    one = {(0, 0): field.one()}
    upow = [one]
    for _ in range(maxi):
        upow.append(_truncated_mul(upow[-1], pe.u, cap, field))
    vpow = [one]
    for _ in range(maxj):
        vpow.append(_truncated_mul(vpow[-1], pe.v, cap, field))
    total: dict = {}
    zero = field.zero()
    for (i, j), c in coeffs.items():
        for key, val in _truncated_mul(upow[i], vpow[j], cap, field).items():
            total[key] = total.get(key, zero) + c * val
    return {k: c for k, c in total.items() if c != 0}


def substitution_cap(hn: HNExpansion, f: BivarPoly) -> int:
    from .invariants import value_sequence

    return max(f.degree, 0) * sum(value_sequence(hn)) + 1


def value_substitution(hn: HNExpansion, f: BivarPoly):
    """ord_t f(u(t, z), v(t, z)); a ValElem with gamma for irrational data."""
    cls = require_class(hn, ("divisorial", "irrational"), "evaluation")
    if f.chart != "local":
        raise DomainError("evaluate local-chart polynomials; convert with chart_convert first")
    if f.is_zero():
        raise DomainError("the valuation of the zero polynomial is undefined")
    if cls == "irrational":
        series = _substitute(hn, f, None)
        if not series:
            raise DomainError("polynomial vanishes in the field")
        gamma = _param(hn).gamma
        exps = [ValElem(p, q, gamma) for p, q in series]
        return min(exps, key=cmp_to_key(valelem_cmp))
    # Truncating every factor below `cap` leaves all exponents below `cap` exact, so a
    # small cap that already shows a term gives the true order; otherwise double it.
    limit = substitution_cap(hn, f) << 8
    cap = substitution_cap(hn, BivarPoly({(1, 0): Fraction(1)}))
    while cap <= limit:
        series = _substitute(hn, f, cap)
        if series:
            return ValElem(min(a for a, _ in series))
        cap *= 2
    raise AssertionError("truncation cap exhausted; the polynomial may vanish in the field")


def value_normalized(hn: HNExpansion, f: BivarPoly):
    from .invariants import invariant_bundle, real

    b0 = real(invariant_bundle(hn).maxcontact[0])
    return real(value_substitution(hn, f)) / b0


# -------------------------------------------------------- multiplicity walk


def _translate(F: dict, a, field) -> dict:
    """F(X, Y + a)."""
    out: dict = {}
    zero = field.zero()
    for (i, j), c in F.items():
        for r in range(j + 1):
            coef = c * comb(j, r) * _pow(a, j - r, field)
            out[(i, r)] = out.get((i, r), zero) + coef
    return {k: c for k, c in out.items() if c != 0}


def _pow(a, e: int, field):
    out = field.one()
    for _ in range(e):
        out = out * a
    return out


def multiplicity_walk(hn: HNExpansion, f: BivarPoly) -> list[int]:
    """mult_{p_n} of the strict transforms of f at every center p_n."""
    require_class(hn, ("divisorial",), "the multiplicity walk")
    ensure_valid(hn)
    field = hn.field
    F = to_field(f, field)
    if not F:
        raise DomainError("the valuation of the zero polynomial is undefined")
    mults: list[int] = []
    for i, row in enumerate(hn.rows):
        for l in range(1, row.h + 1):
            mult = min(a + b for a, b in F)
            mults.append(mult)
            if mult == 0:
                continue
            F = {(a + b - mult, b): c for (a, b), c in F.items()}
            coef = row.coeff(l) if isinstance(row, FreeRow) else 0
            coef = field.elem(coef)
            if coef != 0:
                F = _translate(F, coef, field)
        F = {(b, a): c for (a, b), c in F.items()}
    return mults


def value_proximity(hn: HNExpansion, f: BivarPoly, m: list[int] | None = None) -> int:
    """sum_i m_i * mult_{p_i}(f) with m taken from the proximity relations."""
    from .dual_graph import configuration_from_structure, multiplicities

    if f.chart != "local":
        raise DomainError("evaluate local-chart polynomials; convert with chart_convert first")
    if m is None:
        m = multiplicities(configuration_from_structure(hn))
    mults = multiplicity_walk(hn, f)
    if len(m) != len(mults):
        raise DomainError("value sequence length does not match the number of centers")
    return sum(mi * ki for mi, ki in zip(m, mults))


# ------------------------------------------------------------ limit mode


def divisorial_truncation(hn: HNExpansion, n: int) -> HNExpansion | None:
    """Replace the irrational tail by the n-th convergent of gamma; None when not a valid expansion."""
    hn = canonical(hn)
    sg = last_free(hn)
    qs = gamma_cf(hn).quotients(n)
    conv = cf_eval(ContFrac(tuple(qs)))
    if conv <= 1:
        return None
    canon = cf_of_rat(conv).preperiod
    rows = hn.rows[: sg + 1] + tuple(PowerRow(c) for c in canon)
    out = HNExpansion(rows, Divisorial(), hn.field)
    return None if validate(out) else out


def value_irrational_by_limit(
    hn: HNExpansion,
    f: BivarPoly,
    window: int = 3,
    max_terms: int = 40,
    tol: Fraction | None = None,
) -> tuple[Fraction, Fraction]:
    """Bracket nu^N(f) by normalized values at consecutive convergent truncations.

    Along the segment of valuations sharing the stored rows, nu^N(f) is monotone in the
    final exponent, and consecutive convergents sit on opposite sides of it.
    """
    if classify(hn) != "irrational":
        raise DomainError("limit mode needs an irrational expansion")
    if f.is_zero():
        raise DomainError("the valuation of the zero polynomial is undefined")
    window = max(2, window)
    values: list[Fraction] = []
    for n in range(1, max_terms + 1):
        trunc = divisorial_truncation(hn, n)
        if trunc is None:
            continue
        values.append(value_normalized(trunc, f))
        if len(values) >= window and len(set(values[-window:])) == 1:
            return values[-1], values[-1]
        if tol is not None and len(values) >= 2 and abs(values[-1] - values[-2]) <= tol:
            break
    if len(values) < 2:
        raise DomainError("not enough convergents to bracket the value")
    lo, hi = sorted(values[-2:])
    return lo, hi
