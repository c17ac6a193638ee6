"""Dual graphs, proximity configurations and their conversions to HN structures and exponents.

Vertices are labeled by creation order 1..s. A free point p_n (proximate to p_{n-1} only)
adds the edge n-(n-1); a satellite point on E_{n-1} and E_j replaces the edge (n-1)-j by
n-(n-1) and n-j.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParseError, ValidationError
from .exactnum import ContFrac, QuadIrr, cf_of_quad, cf_of_rat, fmt_cf, floor_exact, parse_cf
from .hn_model import (
    Divisorial,
    FreeRow,
    HNExpansion,
    Irrational,
    PowerRow,
    canonical,
    ensure_valid,
    require_class,
    validate,
)


@dataclass(frozen=True)
class Point:
    index: int
    parent: int | None
    proximate: tuple[int, ...]

    @property
    def free(self) -> bool:
        return len(self.proximate) <= 1


@dataclass(frozen=True)
class Configuration:
    points: tuple[Point, ...]

    @property
    def s(self) -> int:
        return len(self.points)

    def satellite_flags(self) -> list[bool]:
        return [not p.free for p in self.points]


@dataclass(frozen=True)
class DualGraph:
    s: int
    edges: frozenset  # of (i, j) with i < j
    arrow: int | None = None
    tail: ContFrac | None = None

    def neighbors(self, v: int) -> list[int]:
        return sorted(j if i == v else i for i, j in self.edges if v in (i, j))

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    @property
    def is_irrational(self) -> bool:
        return self.tail is not None


def _edge(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


# ------------------------------------------------------ rows <-> proximity


def configuration_from_structure(hn: HNExpansion) -> Configuration:
    """Proximity data of the centers encoded by the rows (the finite part for irrational data)."""
    require_class(hn, ("divisorial", "irrational"), "configurations")
    hn = canonical(hn)
    ensure_valid(hn)
    xdiv = ydiv = None
    n = 0
    points = []
    for i, r in enumerate(hn.rows):
        for l in range(1, r.h + 1):
            n += 1
            prox = tuple(sorted({d for d in (xdiv, ydiv) if d is not None}, reverse=True))
            points.append(Point(n, n - 1 if n > 1 else None, prox))
            xdiv = n
            # the old y-axis divisor survives only when the translation a_l vanishes
            translated = i == 0 or (isinstance(r, FreeRow) and l >= r.k)
            if translated:
                ydiv = None
        xdiv, ydiv = ydiv, xdiv
    return Configuration(tuple(points))


def multiplicities(conf: Configuration) -> list[int]:
    """m_s = 1 and m_i = sum of m_j over the points p_j proximate to p_i."""
    s = conf.s
    m = [0] * (s + 1)
    m[s] = 1
    for i in range(s - 1, 0, -1):
        m[i] = sum(m[p.index] for p in conf.points if i in p.proximate)
    return m[1:]


def structure_from_configuration(conf: Configuration, tail: ContFrac | None = None) -> HNExpansion:
    """Coefficient-erased rows reproducing the configuration; raises when none exist."""
    m = multiplicities(conf)
    sat = conf.satellite_flags()
    runs: list[list[int]] = []  # 0-based point indices per row
    for idx, val in enumerate(m):
        if runs and m[runs[-1][0]] == val:
            runs[-1].append(idx)
        else:
            runs.append([idx])
    rows: list = []
    for r, run in enumerate(runs):
        h = len(run)
        if r == 0:
            rows.append(FreeRow(h, 1))
            continue
        inner = [sat[i] for i in run[1:]]
        last = r == len(runs) - 1
        next_sat = sat[runs[r + 1][0]] if not last else True
        if all(inner) and next_sat and not (last and tail is not None):
            rows.append(PowerRow(h))
        else:
            k = 1
            for flag in inner:
                if not flag:
                    break
                k += 1
            rows.append(FreeRow(h, max(k, 2)))
    terminal = Irrational(tail) if tail is not None else Divisorial()
    hn = HNExpansion(tuple(rows), terminal)
    if validate(hn) or configuration_from_structure(hn) != conf:
        raise ValidationError("configuration is not realized by any valuation expansion")
    return hn


# --------------------------------------------------- proximity <-> graph


def graph_from_configuration(conf: Configuration, tail: ContFrac | None = None) -> DualGraph:
    edges: set = set()
    for p in conf.points:
        n = p.index
        if n == 1:
            continue
        others = [j for j in p.proximate if j != n - 1]
        if others:
            j = others[0]
            edges.discard(_edge(n - 1, j))
            edges.add(_edge(n, j))
        edges.add(_edge(n, n - 1))
    arrow = None if tail is not None else conf.s
    return DualGraph(conf.s, frozenset(edges), arrow, tail)


def check_graph(g: DualGraph) -> None:
    if g.s < 1:
        raise ValidationError("graph needs at least one vertex")
    for i, j in g.edges:
        if not (1 <= i < j <= g.s):
            raise ValidationError(f"edge {i}-{j} out of range")
    if len(g.edges) != g.s - 1:
        raise ValidationError("graph is not a tree (wrong number of edges)")
    seen = {1}
    stack = [1]
    while stack:
        v = stack.pop()
        for w in g.neighbors(v):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != g.s:
        raise ValidationError("graph is not connected")
    for v in range(1, g.s + 1):
        if g.degree(v) > 3:
            raise ValidationError(f"vertex {v} has degree {g.degree(v)} > 3")
    if g.tail is None:
        if g.arrow != g.s:
            raise ValidationError(f"arrow must mark the last vertex {g.s}, got {g.arrow}")
    else:
        if g.arrow is not None:
            raise ValidationError("irrational graphs carry a tail instead of an arrow")
        issues = g.tail.problems()
        if issues or not g.tail.period:
            raise ValidationError("tail must be a periodic continued fraction")


def configuration_from_graph(g: DualGraph) -> Configuration:
    """Recover proximities by blowing down the vertices in reverse creation order."""
    check_graph(g)
    edges = set(g.edges)
    prox: dict[int, tuple[int, ...]] = {}
    for n in range(g.s, 1, -1):
        nbrs = sorted(j if i == n else i for i, j in edges if n in (i, j))
        if n - 1 not in nbrs or len(nbrs) > 2:
            raise ValidationError(f"vertex {n} cannot be blown down (neighbors {nbrs})")
        edges.discard(_edge(n, n - 1))
        if len(nbrs) == 2:
            j = nbrs[0]
            edges.discard(_edge(n, j))
            edges.add(_edge(n - 1, j))
            prox[n] = (n - 1, j)
        else:
            prox[n] = (n - 1,)
    if edges:
        raise ValidationError("graph is not realizable by a sequence of point blow-ups")
    prox[1] = ()
    points = tuple(Point(n, n - 1 if n > 1 else None, prox[n]) for n in range(1, g.s + 1))
    return Configuration(points)


def self_intersections(g: DualGraph) -> list[int]:
    """E_i^2 = -1 - #(points proximate to p_i)."""
    conf = configuration_from_graph(g)
    return [-1 - sum(1 for p in conf.points if i in p.proximate) for i in range(1, g.s + 1)]


# ------------------------------------------------ HN structure <-> graph


def graph_of(hn: HNExpansion) -> DualGraph:
    hn = canonical(hn)
    tail = hn.terminal.tail if isinstance(hn.terminal, Irrational) else None
    return graph_from_configuration(configuration_from_structure(hn), tail)


def structure_of_graph(g: DualGraph) -> HNExpansion:
    return structure_from_configuration(configuration_from_graph(g), g.tail)


# --------------------------------------------------- exponents <-> graph


def structure_from_exponents(puiseux, klass: str = "divisorial") -> HNExpansion:
    pu = list(puiseux)
    if not pu or pu[0] != 1:
        raise ValidationError("the exponent list must start with 1")
    if len(pu) == 1:
        if klass != "divisorial":
            raise ValidationError("an irrational exponent list needs a final irrational entry")
        return HNExpansion((FreeRow(1, 1),), Divisorial())
    rows: list = []
    k = 1
    tail = None
    for j, x in enumerate(pu[1:], start=1):
        last = j == len(pu) - 1
        if not (x > 1):
            raise ValidationError(f"exponent {j} must exceed 1")
        if isinstance(x, QuadIrr):
            if not (last and klass == "irrational"):
                raise ValidationError(f"exponent {j} is irrational but not the final entry of an irrational list")
            c0 = floor_exact(x)
            rows.append(FreeRow(c0 + k - 1, k))
            tail = cf_of_quad(1 / (x - c0))
            break
        if last and klass == "irrational":
            raise ValidationError("the final exponent of an irrational list must be irrational")
        qs = cf_of_rat(Fraction(x)).preperiod
        if not last:
            if len(qs) < 2:
                raise ValidationError(f"interior exponent {j} must not be an integer")
            rows.append(FreeRow(qs[0] + k - 1, k))
            rows.extend(PowerRow(c) for c in qs[1:-1])
            k = qs[-1]
        else:
            rows.append(FreeRow(qs[0] + k - 1, k))
            rows.extend(PowerRow(c) for c in qs[1:])
    terminal = Irrational(tail) if tail is not None else Divisorial()
    hn = HNExpansion(tuple(rows), terminal)
    ensure_valid(hn)
    return hn


def graph_from_exponents(puiseux, klass: str = "divisorial") -> DualGraph:
    return graph_of(structure_from_exponents(puiseux, klass))


def exponents_from_graph(g: DualGraph) -> tuple:
    from .invariants import puiseux_exponents

    return puiseux_exponents(structure_of_graph(g))


def coefficient_space_dim_rows(hn: HNExpansion) -> int:
    """b = h_0 + sum over later free rows of (h - k + 1)."""
    require_class(hn, ("divisorial", "irrational"), "coefficient space")
    rows = canonical(hn).rows
    return rows[0].h + sum(r.h - r.k + 1 for r in rows[1:] if isinstance(r, FreeRow))


def coefficient_space_dim(g: DualGraph) -> int:
    return coefficient_space_dim_rows(structure_of_graph(g))


# ------------------------------------------------------------- text forms


def export_dot(g: DualGraph) -> str:
    lines = ["graph dual {", "  node [shape=circle];"]
    for v in range(1, g.s + 1):
        if v == g.arrow:
            lines.append(f'  {v} [label="{v}", shape=doublecircle, xlabel="arrow"];')
        else:
            lines.append(f'  {v} [label="{v}"];')
    for i, j in sorted(g.edges):
        lines.append(f"  {i} -- {j};")
    if g.tail is not None:
        lines.append(f'  tail [shape=box, label="tail {fmt_cf(g.tail)}"];')
        lines.append(f"  {g.s} -- tail [style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def format_graph(g: DualGraph) -> str:
    lines = [f"s={g.s}", "edges: " + ", ".join(f"{i}-{j}" for i, j in sorted(g.edges))]
    if g.arrow is not None:
        lines.append(f"arrow={g.arrow}")
    if g.tail is not None:
        lines.append(f"tail={fmt_cf(g.tail)}")
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> DualGraph:
    s = arrow = None
    edges: set = set()
    tail = None
    saw_edges = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if m := re.fullmatch(r"s\s*=\s*(\d+)", line):
            s = int(m.group(1))
        elif line.startswith("edges:"):
            saw_edges = True
            body = line[len("edges:") :].strip()
            for piece in filter(None, (p.strip() for p in body.split(","))):
                mm = re.fullmatch(r"(\d+)\s*-\s*(\d+)", piece)
                if not mm:
                    raise ParseError(f"bad edge {piece!r}", lineno, line.index(piece) + 1)
                i, j = int(mm.group(1)), int(mm.group(2))
                if i == j:
                    raise ParseError(f"self-loop {piece!r}", lineno)
                edges.add(_edge(i, j))
        elif m := re.fullmatch(r"arrow\s*=\s*(\d+)", line):
            arrow = int(m.group(1))
        elif line.startswith("tail="):
            tail = parse_cf(line[len("tail=") :])
        else:
            raise ParseError(f"unrecognized line {line!r}", lineno, 1)
    if s is None:
        raise ParseError("missing 's=' line")
    if not saw_edges:
        raise ParseError("missing 'edges:' line")
    return DualGraph(s, frozenset(edges), arrow, tail)


def load_graph(path: str) -> DualGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())
