"""Non-positivity at infinity, minimal families, copositivity of G, the V_delta family, asymptotics."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .dual_graph import DualGraph, graph_of, structure_of_graph
from .errors import CapabilityError, DomainError
from .evaluation import BivarPoly, value_normalized, value_substitution
from .exactnum import (
    ValElem,
    ceil_exact,
    cf_of_quad,
    cf_of_rat,
    floor_exact,
    fmt_exact,
    sqrt_rat,
    to_decimal,
)
from .hn_model import (
    QQ,
    Curve,
    Divisorial,
    FreeRow,
    HNExpansion,
    Irrational,
    PowerRow,
    classify,
    ensure_valid,
    row_values,
    sample_very_general,
    validate,
)
from .invariants import gcd_chain, invariant_bundle

U = BivarPoly({(1, 0): Fraction(1)})
V = BivarPoly({(0, 1): Fraction(1)})


# ------------------------------------------------------------------- NPI


@dataclass(frozen=True)
class NPIWitness:
    hn: HNExpansion
    nu_u: int
    nu_v: int
    last_mcv: int
    slack: int

    @property
    def certifies_minimal(self) -> bool:
        return self.slack == 0


def npi_test(hn: HNExpansion) -> NPIWitness | None:
    """Witness iff nu(v) > nu(u) and nu(v)^2 >= the last maximal contact value."""
    if classify(hn) != "divisorial":
        raise DomainError("the non-positivity test needs a divisorial valuation")
    if hn.is_madic:
        return NPIWitness(hn, 1, 1, 1, 0)
    vol = invariant_bundle(hn).vol_inv
    nu_u = int(value_substitution(hn, U).p)
    nu_v = int(value_substitution(hn, V).p)
    if nu_v > nu_u and nu_v * nu_v >= vol:
        return NPIWitness(hn, nu_u, nu_v, vol, nu_v * nu_v - vol)
    return None


def npi_failure(hn: HNExpansion) -> str:
    """Which defining inequality fails (empty string when both hold)."""
    vol = invariant_bundle(hn).vol_inv
    nu_u = int(value_substitution(hn, U).p)
    nu_v = int(value_substitution(hn, V).p)
    if nu_v <= nu_u:
        return f"nu(v) = {nu_v} is not greater than nu(u) = {nu_u}"
    if nu_v * nu_v < vol:
        return f"nu(v)^2 = {nu_v * nu_v} < {vol}"
    return ""


def mu_hat_npi(w: NPIWitness) -> ValElem:
    return ValElem(w.nu_v)


def line_placement(structure: HNExpansion, j: int, seed: int = 0, field=None) -> HNExpansion:
    """Very general coefficients, except that the line v = 0 passes through the first j free points.

    Row-0 coefficients a_{01}..a_{0,j-1} vanish and a_{0j} is nonzero; j = h_0 + 1 makes
    every row-0 coefficient vanish.
    """
    hn = sample_very_general(structure, field, seed)
    h0 = hn.rows[0].h
    if not 1 <= j <= h0 + 1:
        raise DomainError(f"placement {j} outside 1..{h0 + 1}")
    rng = random.Random(seed ^ 0x5EED)
    cs = list(hn.rows[0].coeffs)
    for l in range(1, min(j, h0 + 1)):
        cs[l - 1] = hn.field.zero()
    if j <= h0:
        cs[j - 1] = hn.field.random_nonzero(rng)
    rows = (FreeRow(h0, 1, tuple(cs)),) + hn.rows[1:]
    return HNExpansion(rows, hn.terminal, hn.field)


# ------------------------------------------------------------- enlargement


def append_free_points(structure: HNExpansion, n: int) -> HNExpansion:
    """Append n free centers after the last one (coefficients erased)."""
    if n < 0:
        raise AssertionError("negative number of appended points")
    rows = list(structure.erased().rows)
    if n == 0:
        return HNExpansion(tuple(rows), Divisorial(), structure.field)
    last = rows[-1]
    if isinstance(last, PowerRow):
        rows[-1] = FreeRow(last.h + n, last.h)
    else:
        rows[-1] = FreeRow(last.h + n, last.k)
    return HNExpansion(tuple(rows), Divisorial(), structure.field)


def enlarge_to_minimal(w: NPIWitness) -> DualGraph:
    return graph_of(append_free_points(w.hn, w.slack))


def enlarged_structure(w: NPIWitness) -> HNExpansion:
    return append_free_points(w.hn, w.slack)


def satellite_nonminimality_check(w: NPIWitness) -> bool:
    hn = w.hn
    if hn.is_madic or not isinstance(hn.rows[-1], PowerRow):
        raise DomainError("the valuation is not defined by a satellite divisor")
    return w.slack > 0


# --------------------------------------------------------- the family Γ_{ω,k}^a


class _MinusInfinity:
    def __repr__(self):
        return "MinusInfinity"

    def __str__(self):
        return "-infinity"


MINUS_INFINITY = _MinusInfinity()


def _mcv_triple(mcv) -> tuple[int, int, int]:
    if len(mcv) < 2:
        raise DomainError("needs a valuation other than the m-adic one")
    return int(mcv[0]), int(mcv[1]), int(mcv[-1])


def iota(mcv):
    """(b0 - 2 b1 + sqrt(b0^2 - 4 b0 b1 + 4 vol)) / (2 b0), or MINUS_INFINITY."""
    b0, b1, vol = _mcv_triple(mcv)
    disc = b0 * b0 - 4 * b0 * b1 + 4 * vol
    if disc < 0:
        return MINUS_INFINITY
    return (b0 - 2 * b1 + sqrt_rat(disc)) / (2 * b0)


def _k_admissible(mcv, k: int) -> bool:
    if k < 0:
        return False
    i = iota(mcv)
    return i is MINUS_INFINITY or k >= i


def family_B(mcv, k: int) -> list[Fraction]:
    """Integers a with sqrt(vol/b0^2 + k) <= a < b1/b0 + k, together with b1/b0 + k."""
    if not _k_admissible(mcv, k):
        raise DomainError(f"k = {k} is below max(0, iota) = {iota(mcv)}")
    b0, b1, vol = _mcv_triple(mcv)
    top = Fraction(b1, b0) + k
    low_sq = Fraction(vol, b0 * b0) + k
    out = [Fraction(a) for a in range(0, ceil_exact(top)) if a < top and a * a >= low_sq]
    if top not in out:
        out.append(top)
    return out


def gamma_k_structure(structure: HNExpansion, k: int) -> HNExpansion:
    """Prepend k free points: row 0 grows by k. The closed form for the shifted
    maximal contact values is checked against the recomputed ones and the Noether sum."""
    if k < 0:
        raise DomainError("k must be non-negative")
    base = structure.erased()
    r0 = base.rows[0]
    out = HNExpansion((FreeRow(r0.h + k, 1),) + base.rows[1:], Divisorial(), base.field)
    ensure_valid(out)
    before = invariant_bundle(base)
    after = invariant_bundle(out)
    if not before.is_madic:
        b = before.maxcontact
        e = gcd_chain(b)
        expected = (b[0],) + tuple(b[i] + k * b[0] * b[0] // e[i - 1] for i in range(1, len(b)))
        if after.maxcontact != expected:
            raise AssertionError(f"shifted values {after.maxcontact} differ from closed form {expected}")
    if after.vol_inv != sum(x * x for x in after.m):
        raise AssertionError("Noether recount failed for the shifted graph")
    return out


def build_gamma_k(omega, k: int) -> DualGraph:
    return graph_of(gamma_k_structure(_as_structure(omega), k))


def appended_count(mcv, k: int, a: Fraction) -> int:
    b0, _, vol = _mcv_triple(mcv)
    n = (Fraction(a) ** 2 - k) * b0 * b0 - vol
    if n.denominator != 1 or n < 0:
        raise AssertionError(f"appended count {n} is not a non-negative integer")
    return int(n)


def gamma_k_a_structure(omega, k: int, a) -> HNExpansion:
    structure = _as_structure(omega)
    mcv = invariant_bundle(structure).maxcontact
    a = Fraction(a)
    if a not in family_B(mcv, k):
        raise DomainError(f"a = {a} is not in B(omega, {k})")
    return append_free_points(gamma_k_structure(structure, k), appended_count(mcv, k, a))


def build_gamma_k_a(omega, k: int, a) -> DualGraph:
    return graph_of(gamma_k_a_structure(omega, k, a))


def _as_structure(x) -> HNExpansion:
    if isinstance(x, DualGraph):
        return structure_of_graph(x)
    return x.erased()


# ---------------------------------------------------------- certification


@dataclass(frozen=True)
class Certificate:
    placement: int
    witness: NPIWitness
    mu_hat_normalized: object
    vol_normalized_inverse: Fraction
    route: str  # "family" or "enlargement"
    omega: HNExpansion | None = None
    k: int | None = None
    a: Fraction | None = None


@dataclass(frozen=True)
class Rejection:
    reasons: tuple  # (placement, message)


def _strip_trailing_free(structure: HNExpansion, n: int) -> HNExpansion | None:
    rows = list(structure.rows)
    last = rows[-1]
    if n == 0:
        return structure
    if not isinstance(last, FreeRow):
        return None
    if len(rows) == 1:
        if last.h - n < 1:
            return None
        rows[-1] = FreeRow(last.h - n, 1)
    else:
        if last.h - n < last.k:
            return None
        rows[-1] = PowerRow(last.k) if last.h - n == last.k else FreeRow(last.h - n, last.k)
    out = HNExpansion(tuple(rows), Divisorial(), structure.field)
    return None if validate(out) else out


def decompose_family(structure: HNExpansion, a: Fraction):
    """Find (omega, k) with Γ_{omega,k}^a equal to the given structure (largest strip, largest k)."""
    structure = structure.erased()
    last = structure.rows[-1]
    max_strip = last.h - last.k if isinstance(last, FreeRow) else 0
    if len(structure.rows) == 1:
        max_strip = last.h - 1
    for n in range(max_strip, -1, -1):
        stripped = _strip_trailing_free(structure, n)
        if stripped is None:
            continue
        h0 = stripped.rows[0].h
        for k in range(h0 - 1, -1, -1):
            omega = HNExpansion((FreeRow(h0 - k, 1),) + stripped.rows[1:], Divisorial(), structure.field)
            if validate(omega) or omega.is_madic:
                continue
            mcv = invariant_bundle(omega).maxcontact
            if not _k_admissible(mcv, k) or a not in family_B(mcv, k):
                continue
            try:
                rebuilt = gamma_k_a_structure(omega, k, a)
            except (AssertionError, DomainError):
                continue
            if rebuilt == structure:
                return omega, k
    return None


def certify_minimal_family(g: DualGraph | HNExpansion, seed: int = 0, field=QQ):
    structure = _as_structure(g)
    if classify(structure) != "divisorial":
        raise DomainError("certification needs a divisorial graph")
    bundle = invariant_bundle(structure)
    b0 = bundle.maxcontact[0]
    h0 = structure.rows[0].h
    top = h0 + 1 if len(structure.rows) > 1 else h0
    reasons = []
    for j in range(1, top + 1):
        hn = line_placement(structure, j, seed, field)
        w = npi_test(hn)
        if w is None:
            reasons.append((j, npi_failure(hn)))
            continue
        if w.slack != 0:
            reasons.append((j, f"slack nu(v)^2 - {w.last_mcv} = {w.slack} is not 0"))
            continue
        mu_n = Fraction(w.nu_v, b0)
        voln = bundle.vol_inv_normalized
        if mu_n * mu_n != voln:
            raise AssertionError("certified mu-hat disagrees with the normalized volume")
        found = decompose_family(structure, mu_n)
        if found is not None:
            omega, k = found
            return Certificate(j, w, mu_n, voln, "family", omega, k, mu_n)
        return Certificate(j, w, mu_n, voln, "enlargement")
    return Rejection(tuple(reasons))


# ----------------------------------------------------- G matrix and copositivity


def g_matrix(rows) -> list[list[int]]:
    """g_ij = 9 sum_k m_ik m_jk - (sum_k m_ik)(sum_k m_jk); rows are zero-padded."""
    rows = [list(r) for r in rows]
    width = max((len(r) for r in rows), default=0)
    rows = [r + [0] * (width - len(r)) for r in rows]
    sums = [sum(r) for r in rows]
    return [
        [9 * sum(a * b for a, b in zip(ri, rj)) - si * sj for rj, sj in zip(rows, sums)]
        for ri, si in zip(rows, sums)
    ]


def _solve(M: list[list[Fraction]], b: list[Fraction]) -> list[Fraction] | None:
    n = len(M)
    A = [list(map(Fraction, row)) + [Fraction(bi)] for row, bi in zip(M, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            return None
        A[col], A[piv] = A[piv], A[col]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col] / A[col][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return [A[i][n] / A[i][i] for i in range(n)]


def simplex_minimum(G, max_size: int = 12) -> Fraction:
    """Exact min of x G x^T over the standard simplex by enumerating KKT supports.

    A minimizer in the relative interior of a face with support S solves
    G_S x = lam 1, 1^T x = 1, and then x G x^T = lam. A singular system leaves the form
    constant along a line inside the face, so the minimum also occurs on a smaller face;
    skipping singular supports is therefore safe.
    """
    s = len(G)
    if s == 0:
        raise DomainError("empty matrix")
    if any(len(r) != s for r in G):
        raise DomainError("matrix must be square")
    if any(G[i][j] != G[j][i] for i in range(s) for j in range(s)):
        raise DomainError("matrix must be symmetric")
    if s > max_size:
        raise CapabilityError(f"exact copositivity is limited to size {max_size}, got {s}")
    best = None
    for size in range(1, s + 1):
        for S in combinations(range(s), size):
            M = [[G[i][j] for j in S] + [-1] for i in S] + [[1] * size + [0]]
            sol = _solve(M, [0] * size + [1])
            if sol is None:
                continue
            x, lam = sol[:size], sol[size]
            if all(xi > 0 for xi in x):
                if best is None or lam < best:
                    best = lam
    return best


def p_sufficiency(G, mode: str = "strict", max_size: int = 12) -> bool:
    if mode not in ("strict", "almost"):
        raise DomainError(f"unknown mode {mode!r}")
    if len(G) == 1:
        return G[0][0] > 0 if mode == "strict" else G[0][0] >= 0
    m = simplex_minimum(G, max_size)
    return m > 0 if mode == "strict" else m >= 0


def copositive_2x2(G, strict: bool) -> bool:
    a, b, c = G[0][0], G[0][1], G[1][1]
    if strict:
        return a > 0 and c > 0 and (b >= 0 or a * c > b * b)
    return a >= 0 and c >= 0 and (b >= 0 or a * c >= b * b)


# ------------------------------------------------------------------- V_delta


@dataclass(frozen=True)
class VDeltaParams:
    delta: HNExpansion
    A: Fraction
    B: Fraction
    interval_lo: Fraction


def vdelta_params(delta: HNExpansion) -> VDeltaParams:
    """A = 1/(b0)^2 and B = e_{g-1} b_g / b0^2 for the anchor; A = B = 1 when g = 0."""
    if not isinstance(delta.terminal, Curve):
        raise DomainError("the anchor must be a curve expansion")
    ensure_valid(delta)
    vals = row_values(delta)
    free = delta.free_indices
    g = len(free) - 1
    if g == 0:
        return VDeltaParams(delta, Fraction(1), Fraction(1), Fraction(1))
    rows = delta.rows
    bbar = [vals[0]]
    e = [vals[s] for s in free]
    for j in range(g):
        s = free[j]
        k = 1 if j == 0 else rows[s].k
        n_j = 1 if j == 0 else e[j - 1] // e[j]
        bbar.append(n_j * bbar[-1] + (rows[s].h - k) * e[j] + vals[s + 1])
    A = Fraction(1, bbar[0] ** 2)
    B = Fraction(e[g - 1] * bbar[g], bbar[0] ** 2)
    return VDeltaParams(delta, A, B, B)


def vdelta(params: VDeltaParams, t) -> HNExpansion:
    """The valuation of the family whose inverse normalized volume is t."""
    if t < params.B:
        raise DomainError(f"t = {fmt_exact(t)} lies left of the interval start {fmt_exact(params.B)}")
    delta = params.delta
    beta = (t - params.B) / params.A + 1
    free = delta.free_indices
    sg = free[-1]
    prefix = delta.rows[:sg]
    anchor = delta.rows[sg]
    kg = anchor.k if sg > 0 else 1
    if beta == 1:
        if sg == 0:
            c = anchor.coeffs[:1] if anchor.coeffs is not None else None
            return HNExpansion((FreeRow(1, 1, c),), Divisorial(), delta.field)
        return HNExpansion(prefix + (PowerRow(kg),), Divisorial(), delta.field)
    c0 = floor_exact(beta)
    h = c0 + kg - 1
    coeffs = None
    if anchor.coeffs is not None:
        width = h - kg + 1
        stored = list(anchor.coeffs[:width])
        coeffs = tuple(stored + [delta.field.zero()] * (width - len(stored)))
    last = FreeRow(h, kg, coeffs)
    if isinstance(beta, Fraction):
        tail_rows = tuple(PowerRow(c) for c in cf_of_rat(beta).preperiod[1:])
        out = HNExpansion(prefix + (last,) + tail_rows, Divisorial(), delta.field)
    else:
        out = HNExpansion(prefix + (last,), Irrational(cf_of_quad(1 / (beta - c0))), delta.field)
    ensure_valid(out)
    return out


def lipschitz_probe(params: VDeltaParams, f: BivarPoly, samples) -> tuple[Fraction, list]:
    table = [(Fraction(t), value_normalized(vdelta(params, Fraction(t)), f)) for t in samples]
    if len({t for t, _ in table}) != len(table):
        raise DomainError("samples must be pairwise distinct")
    best = Fraction(0)
    for (t1, y1), (t2, y2) in combinations(table, 2):
        best = max(best, abs(y1 - y2) / abs(t1 - t2))
    return best, table


# ------------------------------------------------------------ asymptotics


@dataclass(frozen=True)
class AsymptoticRow:
    t: Fraction
    a: int
    nu_v: int
    beta0: int
    vol_inv: int
    ratio: object

    @property
    def ratio_decimal(self) -> str:
        return to_decimal(self.ratio, 12)


def theta_structure(t: Fraction) -> HNExpansion:
    """Rows of the quasi-monomial graph with single exponent t."""
    from .dual_graph import structure_from_exponents

    return structure_from_exponents([Fraction(1), Fraction(t)])


def asymptotic_experiment(t_values, seed: int = 0) -> list[AsymptoticRow]:
    out = []
    for t in t_values:
        t = Fraction(t)
        if t < 2:
            raise DomainError(f"t = {t} must be at least 2")
        a = ceil_exact(sqrt_rat(t))
        structure = theta_structure(t)
        h0 = structure.rows[0].h
        if a > h0:
            raise AssertionError(f"Theta_{t} has only {h0} initial free points, needs {a}")
        hn = line_placement(structure, a, seed)
        bundle = invariant_bundle(hn)
        b0 = bundle.maxcontact[0]
        nu_v = int(value_substitution(hn, V).p)
        if nu_v != a * b0:
            raise AssertionError(f"line placement gave nu(v) = {nu_v}, expected {a * b0}")
        w = npi_test(hn)
        if w is None:
            raise AssertionError(f"the placement for t = {t} is not non-positive at infinity")
        out.append(AsymptoticRow(t, a, nu_v, b0, bundle.vol_inv, a / sqrt_rat(t)))
    return out

