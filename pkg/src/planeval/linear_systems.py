"""Vanishing sequences by exact elimination, mu_d, mu-hat brackets, expected dimensions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from math import gcd

from .errors import DomainError
from .evaluation import BivarPoly, _param, _truncated_mul
from .exactnum import ValElem, valelem_cmp
from .hn_model import QQ, HNExpansion, require_class
from .invariants import invariant_bundle, real, value_sequence


@dataclass(frozen=True)
class VanishingSequence:
    d: int
    values: tuple  # ascending ValElem
    witnesses: tuple  # BivarPoly with nu(witness) = value, same order

    @property
    def mu(self):
        return self.values[-1]


def monomials(d: int) -> list[tuple[int, int]]:
    return [(i, j) for total in range(d + 1) for j in range(total + 1) for i in [total - j]]


def _monomial_images(hn: HNExpansion, d: int, cap: int | None) -> list[dict]:
    field = hn.field
    pe = _param(hn)
    one = {(0, 0): field.one()}
    upow, vpow = [one], [one]
    for _ in range(d):
        upow.append(_truncated_mul(upow[-1], pe.u, cap, field))
        vpow.append(_truncated_mul(vpow[-1], pe.v, cap, field))
    return [_truncated_mul(upow[i], vpow[j], cap, field) for i, j in monomials(d)]


def _column_order(images: list[dict], kind: str, gamma) -> list:
    keys = set()
    for img in images:
        keys.update(img)
    if kind == "divisorial":
        return sorted(keys)
    return sorted(keys, key=cmp_to_key(lambda x, y: valelem_cmp(ValElem(*x, gamma), ValElem(*y, gamma))))


def _reduce_all(rows: list[list], combos: list[list], integral: bool) -> list[int]:
    """Echelon form with distinct minimal pivot columns.

    Each incoming row is reduced by the existing pivot rows until its leading column is
    new; those rows vanish left of their own pivot, so the lead only moves right.
    Integral rows use fraction-free updates followed by content division.
    """
    pivots: dict[int, int] = {}
    lead = [None] * len(rows)
    for idx in range(len(rows)):
        c = _lead(rows[idx])
        while c is not None and c in pivots:
            p = pivots[c]
            if integral:
                a, b = rows[p][c], rows[idx][c]
                rows[idx] = [a * x - b * y for x, y in zip(rows[idx], rows[p])]
                combos[idx] = [a * x - b * y for x, y in zip(combos[idx], combos[p])]
                g = 0
                for x in rows[idx] + combos[idx]:
                    g = gcd(g, x)
                if g > 1:
                    rows[idx] = [x // g for x in rows[idx]]
                    combos[idx] = [x // g for x in combos[idx]]
            else:
                factor = rows[idx][c] / rows[p][c]
                rows[idx] = [x - factor * y for x, y in zip(rows[idx], rows[p])]
                combos[idx] = [x - factor * y for x, y in zip(combos[idx], combos[p])]
            c = _lead(rows[idx])
        if c is None:
            raise AssertionError("monomial images are linearly dependent")
        pivots[c] = idx
        lead[idx] = c
    return lead


def _lead(row) -> int | None:
    for i, x in enumerate(row):
        if x != 0:
            return i
    return None


def vanishing_sequence(hn: HNExpansion, d: int) -> VanishingSequence:
    """Values of nu on a basis of degree-<=d polynomials adapted to the valuation filtration."""
    if d < 0:
        raise DomainError("degree must be non-negative")
    cls = require_class(hn, ("divisorial", "irrational"), "vanishing sequences")
    cap = d * sum(value_sequence(hn)) + 1 if cls == "divisorial" else None
    images = _monomial_images(hn, d, cap)
    gamma = _param(hn).gamma
    cols = _column_order(images, cls, gamma)
    index = {k: i for i, k in enumerate(cols)}
    mons = monomials(d)
    field = hn.field
    n = len(mons)
    if field == QQ:
        rows, scale = [], []
        for img in images:
            den = 1
            for c in img.values():
                den = den * c.denominator // gcd(den, c.denominator)
            row = [0] * len(cols)
            for k, c in img.items():
                row[index[k]] = int(c * den)
            rows.append(row)
            scale.append(den)
        combos = [[int(i == j) for j in range(n)] for i in range(n)]
        lead = _reduce_all(rows, combos, integral=True)
        # row i is sum_j combos[i][j] * scale[j] * image_j
        witnesses = [
            BivarPoly({mons[j]: Fraction(combos[i][j] * scale[j]) for j in range(n) if combos[i][j]})
            for i in range(n)
        ]
    else:
        zero, one = field.zero(), field.one()
        rows = []
        for img in images:
            row = [zero] * len(cols)
            for k, c in img.items():
                row[index[k]] = c
            rows.append(row)
        combos = [[one if i == j else zero for j in range(n)] for i in range(n)]
        lead = _reduce_all(rows, combos, integral=False)
        witnesses = [
            BivarPoly({mons[j]: Fraction(combos[i][j].v) for j in range(n) if combos[i][j] != 0})
            for i in range(n)
        ]
    if cls == "divisorial":
        vals = [ValElem(cols[c][0]) for c in lead]
    else:
        vals = [ValElem(*cols[c], gamma) for c in lead]
    order = sorted(range(n), key=lambda i: lead[i])
    return VanishingSequence(d, tuple(vals[i] for i in order), tuple(witnesses[i] for i in order))


def mu_d(hn: HNExpansion, d: int):
    return vanishing_sequence(hn, d).mu


def h0_unibranch(hn: HNExpansion, d: int, alpha) -> int:
    """dim {f : deg f <= d, nu(f) >= alpha} (with 0 included)."""
    require_class(hn, ("divisorial",), "h0 of unibranch systems")
    seq = vanishing_sequence(hn, d)
    a = real(alpha)
    return sum(1 for v in seq.values if real(v) >= a)


def expected_dim(d: int, r) -> int:
    if any(x < 0 for x in r):
        raise DomainError("multiplicities must be non-negative")
    return (d + 1) * (d + 2) // 2 - sum(x * (x + 1) // 2 for x in r)


@dataclass(frozen=True)
class MuHatReport:
    lower: Fraction
    lower_degree: int
    upper: Fraction | None
    upper_rule: str | None
    exact: object | None
    table: tuple  # (d, mu_d)

    @property
    def caveat(self) -> str | None:
        if self.upper is None:
            return None
        return "upper bound holds for very general members of the dual-graph family"


def mu_hat_upper_bound(bbar, vol_inv) -> tuple[Fraction | None, str | None]:
    """Upper bound for mu-hat of a very general divisorial valuation, when the hypotheses hold."""
    b0, b1 = bbar[0], bbar[1]
    if b1 * b1 < vol_inv:
        return None, None
    A = [a for a in range(1, b1 // b0 + 1) if a * a * b0 * b0 >= vol_inv]
    if A:
        return Fraction(b0 * min(A)), "beta0*min(A)"
    return Fraction(b1), "beta1"


def mu_hat_report(hn: HNExpansion, d_max: int) -> MuHatReport:
    from .minimality import npi_test

    if d_max < 1:
        raise DomainError("d_max must be at least 1")
    require_class(hn, ("divisorial",), "mu-hat reports")
    table = []
    best = None
    best_d = 1
    for d in range(1, d_max + 1):
        mu = mu_d(hn, d)
        table.append((d, mu))
        q = Fraction(int(mu.p), d)
        if best is None or q > best:
            best, best_d = q, d
    b = invariant_bundle(hn)
    if b.is_madic:
        return MuHatReport(best, best_d, Fraction(1), "m-adic", Fraction(1), tuple(table))
    upper, rule = mu_hat_upper_bound(b.maxcontact, b.vol_inv)
    w = npi_test(hn)
    exact = w.nu_v if w is not None else None
    return MuHatReport(best, best_d, upper, rule, exact, tuple(table))
