"""Command-line front end.

Every subcommand builds a Report (ordered key/value pairs plus optional tables) and
renders it as human text, ``key=value`` lines or JSON lines.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import __version__
from .dual_graph import export_dot, format_graph, graph_of, parse_graph, structure_of_graph
from .errors import DomainError, ParseError, PlanevalError
from .evaluation import (
    chart_convert,
    parse_poly,
    value_irrational_by_limit,
    value_normalized,
    value_proximity,
    value_substitution,
)
from .exactnum import QuadIrr, fmt_cf, fmt_exact, parse_rat, parse_real, to_decimal
from .hn_model import (
    HNExpansion,
    classify,
    format_hn,
    parse_field,
    parse_hn,
    random_structure,
    require_class,
    sample_very_general,
)
from .invariants import invariant_bundle
from .linear_systems import mu_hat_report, vanishing_sequence
from .minimality import (
    Certificate,
    asymptotic_experiment,
    build_gamma_k,
    certify_minimal_family,
    enlarged_structure,
    g_matrix,
    gamma_k_a_structure,
    lipschitz_probe,
    mu_hat_npi,
    npi_failure,
    npi_test,
    p_sufficiency,
    simplex_minimum,
    vdelta,
    vdelta_params,
)


@dataclass
class Report:
    fields: list = field(default_factory=list)
    tables: list = field(default_factory=list)  # (name, columns, rows)
    headline: str | None = None
    headline_keys: tuple = ()

    def add(self, key: str, value) -> None:
        self.fields.append((key, _text(value)))
        if isinstance(value, QuadIrr):
            self.fields.append((f"{key}.approx", to_decimal(value, 12)))

    def table(self, name: str, columns: list[str], rows: list[list]) -> None:
        self.tables.append((name, columns, [[_text(c) for c in r] for r in rows]))


def _text(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (Fraction, QuadIrr, int)):
        return fmt_exact(x)
    if isinstance(x, (list, tuple)):
        return ", ".join(_text(v) for v in x)
    return str(x)


def render(report: Report, mode: str) -> str:
    out = []
    if mode == "human":
        if report.headline:
            out.append(report.headline)
        out.extend(f"{k}: {v}" for k, v in report.fields if k not in report.headline_keys)
        for name, cols, rows in report.tables:
            out.append(f"{name}:")
            widths = [max(len(c), *(len(r[i]) for r in rows)) if rows else len(c) for i, c in enumerate(cols)]
            out.append("  " + "  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip())
            out.extend("  " + "  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows)
    elif mode == "machine":
        out.extend(f"{k}={v}" for k, v in report.fields)
        for name, cols, rows in report.tables:
            for i, r in enumerate(rows):
                out.extend(f"{name}.{i}.{c}={v}" for c, v in zip(cols, r))
    else:
        out.extend(json.dumps({"key": k, "value": v}, ensure_ascii=False) for k, v in report.fields)
        for name, cols, rows in report.tables:
            out.extend(json.dumps({"table": name, **dict(zip(cols, r))}, ensure_ascii=False) for r in rows)
    return "\n".join(out) + "\n"


# ------------------------------------------------------------------ inputs


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}") from None


def _is_graph_text(text: str) -> bool:
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            return line.startswith("s=")
    return False


def _load_structure(path: str) -> HNExpansion:
    """An HN file, or a graph file turned into its coefficient-erased structure."""
    text = _read(path)
    if _is_graph_text(text):
        return structure_of_graph(parse_graph(text))
    return parse_hn(text)


def _concrete(hn: HNExpansion, field_spec: str | None, seed: int) -> HNExpansion:
    """Sample erased coefficients; explicit coefficients are kept as given."""
    fld = parse_field(field_spec) if field_spec else None
    if hn.has_coeffs:
        if fld is not None and fld != hn.field:
            raise DomainError(f"file coefficients live in {hn.field.name}, not {fld.name}")
        return hn
    return sample_very_general(hn, fld, seed)


def _poly(text: str):
    f = parse_poly(text)
    if f.chart == "affine":
        f = chart_convert(f, max(f.degree, 0))
    return f


# ---------------------------------------------------------------- commands


def cmd_invariants(args) -> Report:
    hn = _load_structure(args.path)
    require_class(hn, ("divisorial", "irrational"), "invariants")
    b = invariant_bundle(hn)
    r = Report()
    r.add("class", b.kind)
    r.add("m", list(b.m))
    r.add("puiseux", list(b.puiseux))
    r.add("charseq", list(b.charseq))
    r.add("maxcontact", list(b.maxcontact))
    r.add("e", list(b.eseq))
    r.add("n", list(b.nseq))
    r.add("vol_inv", b.vol_inv)
    r.add("vol_inv_normalized", b.vol_inv_normalized)
    if b.kind == "irrational":
        from .hn_model import gamma_cf, gamma_of

        r.add("gamma", gamma_of(hn))
        r.add("gamma_cf", fmt_cf(gamma_cf(hn)))
    return r


def cmd_eval(args) -> Report:
    hn = _concrete(_load_structure(args.path), args.field, args.seed)
    f = _poly(args.poly)
    val = value_substitution(hn, f)
    norm = value_normalized(hn, f)
    r = Report()
    r.headline = f"value: {val}, normalized: {fmt_exact(norm)}"
    r.headline_keys = ("value", "normalized")
    r.add("value", str(val))
    r.add("normalized", norm)
    if val.gamma is not None:
        r.add("gamma", val.gamma)
    if args.both_methods:
        if classify(hn) == "divisorial":
            other = value_proximity(hn, f)
            if other != val.p:
                raise AssertionError(f"oracle disagreement: substitution {val} vs proximity {other}")
            r.add("proximity_value", other)
        else:
            lo, hi = value_irrational_by_limit(hn, f)
            if not lo <= norm <= hi:
                raise AssertionError("exact value lies outside the convergent bracket")
            r.add("limit_bracket", [lo, hi])
        r.add("oracles_agree", True)
    return r


def cmd_corpus(args) -> Report:
    rng = random.Random(args.seed)
    os.makedirs(args.out, exist_ok=True)
    digest = hashlib.sha256()
    width = max(4, len(str(args.count - 1)))
    for i in range(args.count):
        hn = random_structure(rng, args.max_rows, args.max_h, args.klass)
        text = format_hn(hn)
        digest.update(text.encode())
        with open(os.path.join(args.out, f"case_{i:0{width}d}.hn"), "w", encoding="utf-8") as fh:
            fh.write(text)
    r = Report()
    r.add("count", args.count)
    r.add("out", args.out)
    r.add("sha256", digest.hexdigest())
    return r


def cmd_mu(args) -> Report:
    hn = _concrete(_load_structure(args.path), args.field, args.seed)
    rep = mu_hat_report(hn, args.degree_max)
    r = Report()
    r.add("lower", rep.lower)
    r.add("lower_degree", rep.lower_degree)
    r.add("upper", rep.upper if rep.upper is not None else "none")
    if rep.upper_rule:
        r.add("upper_rule", rep.upper_rule)
    if rep.caveat:
        r.add("caveat", rep.caveat)
    r.add("exact", rep.exact if rep.exact is not None else "none")
    r.table("mu", ["d", "mu_d", "mu_d/d"], [[d, str(mu), Fraction(int(mu.p), d)] for d, mu in rep.table])
    if args.emit_sequence:
        rows = []
        for d in range(1, args.degree_max + 1):
            rows.append([d, ", ".join(str(v) for v in vanishing_sequence(hn, d).values)])
        r.table("sequence", ["d", "values"], rows)
    return r


def _witness_fields(r: Report, w) -> None:
    r.add("nu_u", w.nu_u)
    r.add("nu_v", w.nu_v)
    r.add("last_mcv", w.last_mcv)
    r.add("slack", w.slack)


def cmd_npi(args) -> Report:
    hn = _concrete(_load_structure(args.path), args.field, args.seed)
    w = npi_test(hn)
    r = Report()
    r.add("npi", w is not None)
    if w is None:
        r.add("reason", npi_failure(hn))
        return r
    _witness_fields(r, w)
    r.add("mu_hat", str(mu_hat_npi(w)))
    r.add("certifies_minimal", w.slack == 0)
    if w.slack:
        enlarged = enlarged_structure(w)
        r.add("enlarged_graph", format_graph(graph_of(enlarged)).strip().replace("\n", "; "))
    r.add("hn", format_hn(hn).strip().replace("\n", "; "))
    return r


def cmd_certify(args) -> Report:
    res = certify_minimal_family(_load_structure(args.path), args.seed, parse_field(args.field or "Q"))
    r = Report()
    if not isinstance(res, Certificate):
        r.add("certified", False)
        for j, why in res.reasons:
            r.add(f"placement.{j}", why)
        return r
    r.add("certified", True)
    r.add("route", res.route)
    r.add("placement", res.placement)
    _witness_fields(r, res.witness)
    r.add("mu_hat_normalized", res.mu_hat_normalized)
    r.add("vol_inv_normalized", res.vol_normalized_inverse)
    if res.omega is not None:
        r.add("omega", format_graph(graph_of(res.omega)).strip().replace("\n", "; "))
        r.add("k", res.k)
        r.add("a", res.a)
    r.add("hn", format_hn(res.witness.hn).strip().replace("\n", "; "))
    return r


def cmd_family(args) -> Report:
    omega = _load_structure(args.omega).erased()
    a = parse_rat(args.a)
    shifted = invariant_bundle(structure_of_graph(build_gamma_k(omega, args.k)))
    structure = gamma_k_a_structure(omega, args.k, a)
    g = graph_of(structure)
    b = invariant_bundle(structure)
    r = Report()
    r.add("vertices", g.s)
    r.add("shifted_maxcontact", list(shifted.maxcontact))
    r.add("appended", g.s - len(shifted.m))
    r.add("m", list(b.m))
    r.add("maxcontact", list(b.maxcontact))
    r.add("vol_inv_normalized", b.vol_inv_normalized)
    r.add("graph", format_graph(g).strip().replace("\n", "; "))
    return r


def cmd_vdelta(args) -> Report:
    delta = _load_structure(args.delta)
    params = vdelta_params(delta)
    t = parse_real(args.t)
    hn = vdelta(params, t)
    b = invariant_bundle(hn)
    if b.vol_inv_normalized != t:
        raise AssertionError("affine volume law violated")
    r = Report()
    r.add("A", params.A)
    r.add("B", params.B)
    r.add("t", t)
    r.add("class", classify(hn))
    r.add("vol_inv_normalized", b.vol_inv_normalized)
    r.add("hn", format_hn(hn).strip().replace("\n", "; "))
    if args.poly:
        samples = [parse_real(s) for s in args.samples.split(",")] if args.samples else [t]
        q, table = lipschitz_probe(params, _poly(args.poly), samples)
        r.add("max_quotient", q)
        r.table("lipschitz", ["t", "normalized"], [[s, v] for s, v in table])
    return r


def _read_values(path: str) -> list[Fraction]:
    text = _read(path)
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0]
        for tok in line.replace(",", " ").split():
            try:
                out.append(parse_rat(tok))
            except ParseError as e:
                raise ParseError(str(e), lineno, line.index(tok) + 1) from None
    return out


def cmd_asymptotic(args) -> Report:
    rows = asymptotic_experiment(_read_values(args.t_list), args.seed)
    r = Report()
    r.table(
        "asymptotic",
        ["t", "a", "beta0", "nu_v", "vol_inv", "ratio", "approx"],
        [[x.t, x.a, x.beta0, x.nu_v, x.vol_inv, x.ratio, x.ratio_decimal] for x in rows],
    )
    return r


def _read_matrix(path: str) -> list[list[int]]:
    rows = []
    for lineno, line in enumerate(_read(path).splitlines(), 1):
        line = line.split("#", 1)[0].replace(",", " ").strip()
        if not line:
            continue
        try:
            rows.append([int(x) for x in line.split()])
        except ValueError:
            raise ParseError("expected integers", lineno, 1) from None
    if not rows:
        raise ParseError("empty matrix file")
    return rows


def cmd_psuff(args) -> Report:
    data = _read_matrix(args.matrix)
    G = g_matrix(data) if args.multiplicities else data
    r = Report()
    r.add("size", len(G))
    r.table("G", [f"c{j}" for j in range(len(G))], G)
    r.add("simplex_minimum", simplex_minimum(G, args.max_size))
    r.add("p_sufficient", p_sufficiency(G, "strict", args.max_size))
    r.add("almost_p_sufficient", p_sufficiency(G, "almost", args.max_size))
    return r


def cmd_graph(args) -> Report:
    text = _read(args.path)
    r = Report()
    if _is_graph_text(text):
        hn = structure_of_graph(parse_graph(text))
        r.add("hn", format_hn(hn).strip().replace("\n", "; "))
    else:
        g = graph_of(parse_hn(text))
        r.add("graph", format_graph(g).strip().replace("\n", "; "))
    return r


def cmd_dot(args) -> str:
    text = _read(args.path)
    g = parse_graph(text) if _is_graph_text(text) else graph_of(parse_hn(text))
    return export_dot(g)


# ------------------------------------------------------------------ parser

OUTPUTS = ["human", "machine", "json-lines"]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="planeval", description="Exact computations with plane valuations.")
    p.add_argument("--version", action="version", version=f"planeval {__version__}")
    p.add_argument("--output", choices=OUTPUTS, default="human")
    # also accepted after the subcommand name
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=OUTPUTS, default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    def command(name: str, help: str):
        return sub.add_parser(name, help=help, parents=[common])

    def with_sampling(sp):
        sp.add_argument("--field", default=None, help="Q or Fp:<prime>; used to sample erased coefficients")
        sp.add_argument("--seed", type=int, default=0)

    sp = command("invariants", "invariants of an HN or graph file")
    sp.add_argument("path")
    sp.set_defaults(run=cmd_invariants)

    sp = command("eval", "value of a polynomial")
    sp.add_argument("path")
    sp.add_argument("poly")
    sp.add_argument("--both-methods", action="store_true")
    with_sampling(sp)
    sp.set_defaults(run=cmd_eval)

    sp = command("corpus", "write a deterministic corpus of HN structures")
    sp.add_argument("--count", type=int, default=500)
    sp.add_argument("--max-rows", type=int, default=4)
    sp.add_argument("--max-h", type=int, default=4)
    sp.add_argument("--class", dest="klass", choices=["divisorial", "irrational", "mixed"], default="mixed")
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--out", required=True)
    sp.set_defaults(run=cmd_corpus)

    sp = command("mu", "mu_d table and mu-hat bracket")
    sp.add_argument("path")
    sp.add_argument("--degree-max", type=int, default=4)
    sp.add_argument("--emit-sequence", action="store_true")
    with_sampling(sp)
    sp.set_defaults(run=cmd_mu)

    sp = command("npi", "non-positivity at infinity test")
    sp.add_argument("path")
    with_sampling(sp)
    sp.set_defaults(run=cmd_npi)

    sp = command("certify", "certify minimality of very general members of a graph")
    sp.add_argument("path")
    with_sampling(sp)
    sp.set_defaults(run=cmd_certify)

    sp = command("family", "build the graph Gamma_{omega,k}^a")
    sp.add_argument("--omega", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--a", required=True)
    sp.set_defaults(run=cmd_family)

    sp = command("vdelta", "member of the family anchored at a curve")
    sp.add_argument("--delta", required=True)
    sp.add_argument("--t", required=True)
    sp.add_argument("--poly", default=None, help="also probe Lipschitz quotients of this polynomial")
    sp.add_argument("--samples", default=None, help="comma-separated sample values for --poly")
    sp.set_defaults(run=cmd_vdelta)

    sp = command("asymptotic", "ratio ceil(sqrt t)/sqrt t for listed t")
    sp.add_argument("--t-list", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(run=cmd_asymptotic)

    sp = command("psuff", "P-sufficiency of a G matrix")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--multiplicities", action="store_true", help="rows are value sequences; build G from them")
    sp.add_argument("--max-size", type=int, default=12)
    sp.set_defaults(run=cmd_psuff)

    sp = command("graph", "convert between HN and graph files")
    sp.add_argument("path")
    sp.set_defaults(run=cmd_graph)

    sp = command("dot", "DOT export of a dual graph")
    sp.add_argument("path")
    sp.set_defaults(run=cmd_dot)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = args.run(args)
    except PlanevalError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    sys.stdout.write(result if isinstance(result, str) else render(result, args.output))
    return 0


if __name__ == "__main__":
    sys.exit(main())
