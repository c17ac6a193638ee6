"""Sequence of values, Puiseux exponents, characteristic and maximal contact sequences, volumes."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import DomainError
from .exactnum import ContFrac, Real, ValElem, cf_eval
from .hn_model import (
    HNExpansion,
    PowerRow,
    ensure_valid,
    gamma_of,
    require_class,
    row_values,
)


def real(x) -> Real:
    """Exact real value of an int, Fraction, QuadIrr or ValElem."""
    if isinstance(x, ValElem):
        return x.real()
    if isinstance(x, int):
        return Fraction(x)
    return x


def _as_int(x) -> int:
    r = real(x)
    if not isinstance(r, Fraction) or r.denominator != 1:
        raise AssertionError(f"expected an integer ratio, got {r}")
    return r.numerator


@dataclass(frozen=True)
class InvariantBundle:
    kind: str
    m: tuple
    puiseux: tuple
    charseq: tuple
    maxcontact: tuple
    eseq: tuple
    nseq: tuple
    vol_inv: object
    vol_inv_normalized: object
    satellite_end: bool = False

    @property
    def is_madic(self) -> bool:
        return self.kind == "divisorial" and self.maxcontact == (1,) and self.m == (1,)

    @property
    def beta0(self):
        return self.maxcontact[0]


def _check_class(hn: HNExpansion) -> str:
    cls = require_class(hn, ("divisorial", "irrational"), "invariants")
    ensure_valid(hn)
    return cls


def value_sequence(hn: HNExpansion) -> tuple:
    """m_i: nu(w_i) repeated h_i times (for irrational data, the stored prefix)."""
    _check_class(hn)
    vals = row_values(hn)
    out = []
    for r, v in zip(hn.rows, vals):
        out.extend([v] * r.h)
    return tuple(out)


def _segment_cf(hn: HNExpansion, j: int, free: list[int]) -> list[int]:
    """Partial quotients of beta'_{j+1} (finite segments only)."""
    rows = hn.rows
    s = free[j]
    k = 1 if j == 0 else rows[s].k
    qs = [rows[s].h - k + 1]
    if j + 1 < len(free):
        nxt = free[j + 1]
        qs.extend(rows[i].h for i in range(s + 1, nxt))
        qs.append(rows[nxt].k)
    else:
        qs.extend(rows[i].h for i in range(s + 1, len(rows)))
    return qs


def puiseux_exponents(hn: HNExpansion) -> tuple:
    cls = _check_class(hn)
    if hn.is_madic:
        return (Fraction(1),)
    free = hn.free_indices
    out: list = [Fraction(1)]
    for j in range(len(free)):
        if cls == "irrational" and j == len(free) - 1:
            s = free[j]
            k = 1 if j == 0 else hn.rows[s].k
            out.append(hn.rows[s].h - k + 1 + 1 / gamma_of(hn))
        else:
            out.append(cf_eval(ContFrac(tuple(_segment_cf(hn, j, free)))))
    return tuple(out)


def char_and_maxcontact(hn: HNExpansion) -> tuple[tuple, tuple, tuple, tuple]:
    """(charseq, maxcontact, eseq, nseq) from the row recurrences.

    For a divisorial expansion ending in a power row the extra value
    e_G * maxcontact[G+1] is appended to maxcontact.
    """
    cls = _check_class(hn)
    vals = row_values(hn)
    if hn.is_madic:
        return (1,), (1,), (1,), (1,)
    rows = hn.rows
    free = hn.free_indices
    nrows = len(rows)

    def r(i):
        # nu(w_{s_G+1}) = 1 for irrational data; nu(w_{N+1}) = 0 for divisorial
        if cls == "irrational" and i == free[-1] + 1:
            return ValElem(1)
        return vals[i] if i < len(vals) else 0

    e = [vals[s] for s in free]
    beta = [vals[0]]
    bbar = [vals[0]]
    nseq = [1]
    for j, s in enumerate(free):
        k = 1 if j == 0 else rows[s].k
        n_j = 1 if j == 0 else _as_int(real(e[j - 1]) / real(e[j]))
        if j > 0:
            nseq.append(n_j)
        step = (rows[s].h - k) * e[j] + r(s + 1)
        beta.append(beta[-1] + step)
        bbar.append(n_j * bbar[-1] + step)
    satellite_end = cls == "divisorial" and isinstance(rows[-1], PowerRow) and nrows > 1
    if satellite_end:
        bbar.append(_as_int(e[-1]) * bbar[-1])
    return tuple(beta), tuple(bbar), tuple(e), tuple(nseq)


def invariant_bundle(hn: HNExpansion) -> InvariantBundle:
    cls = _check_class(hn)
    m = value_sequence(hn)
    pu = puiseux_exponents(hn)
    beta, bbar, e, n = char_and_maxcontact(hn)
    satellite_end = cls == "divisorial" and isinstance(hn.rows[-1], PowerRow) and len(hn.rows) > 1
    if hn.is_madic:
        vol, voln = 1, Fraction(1)
    elif cls == "divisorial":
        vol = bbar[-1]
        voln = Fraction(vol, bbar[0] ** 2)
    else:
        b0 = real(bbar[0])
        vol = real(e[-1]) * real(bbar[-1])
        voln = vol / (b0 * b0)
    return InvariantBundle(cls, m, pu, beta, bbar, e, n, vol, voln, satellite_end)


def eq_delta_check(bundle: InvariantBundle) -> bool:
    """beta'_{j+1} == (bbar_{j+1} - n_j bbar_j)/e_j + 1 for 0 <= j <= G."""
    if bundle.is_madic:
        return bundle.puiseux == (1,)
    G = len(bundle.eseq) - 1
    if len(bundle.puiseux) != G + 2:
        return False
    for j in range(G + 1):
        n_j = bundle.nseq[j]
        lhs = bundle.puiseux[j + 1]
        rhs = (real(bundle.maxcontact[j + 1]) - n_j * real(bundle.maxcontact[j])) / real(bundle.eseq[j]) + 1
        if lhs != rhs:
            return False
    return True


def gcd_chain(maxcontact) -> list[int]:
    """e_j = gcd(bbar_0..bbar_j), divisorial data only."""
    out = []
    g = 0
    for b in maxcontact:
        g = gcd(g, int(b))
        out.append(g)
    return out


def gcd_chain_check(bundle: InvariantBundle) -> bool:
    """e_j from nu(w_{s_j}) agrees with gcd(bbar_0..bbar_j); divisorial only."""
    if bundle.kind != "divisorial":
        raise DomainError("gcd chain comparison needs integer maximal contact values")
    chain = gcd_chain(bundle.maxcontact)
    return all(chain[j] == bundle.eseq[j] for j in range(len(bundle.eseq)))


def volumes(bundle: InvariantBundle) -> tuple:
    return bundle.vol_inv, bundle.vol_inv_normalized


def semigroup_generators(bundle: InvariantBundle) -> set:
    if bundle.kind != "divisorial":
        raise DomainError("semigroup generators are defined for divisorial valuations")
    return set(bundle.maxcontact)


def noether_sum(bundle: InvariantBundle) -> int:
    return sum(x * x for x in bundle.m)
