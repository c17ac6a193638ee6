import hashlib
import json

import pytest

from planeval.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def fields(out):
    return dict(line.split("=", 1) for line in out.splitlines())


def test_invariants_human(capsys, data_dir):
    code, out, _ = run(capsys, "invariants", data_dir / "w1.hn")
    assert code == 0
    assert "maxcontact: 2, 3, 6" in out
    assert "vol_inv_normalized: 3/2" in out


def test_eval_headline_and_machine(capsys, data_dir):
    code, out, _ = run(capsys, "eval", data_dir / "w1.hn", "v^2-u^3")
    assert code == 0
    assert out.splitlines()[0] == "value: 6, normalized: 3"
    code, out, _ = run(capsys, "--output", "machine", "eval", data_dir / "w1.hn", "v^2-u^3", "--both-methods")
    f = fields(out)
    assert (f["value"], f["normalized"], f["proximity_value"], f["oracles_agree"]) == ("6", "3", "6", "true")


def test_output_flag_after_subcommand(capsys, data_dir):
    code, out, _ = run(capsys, "eval", data_dir / "w1.hn", "v", "--output", "machine")
    assert code == 0
    assert fields(out)["value"] == "3"


def test_eval_irrational_both_methods(capsys, data_dir):
    code, out, _ = run(capsys, "--output", "machine", "eval", data_dir / "w1_irrational.hn", "v", "--both-methods")
    assert code == 0
    f = fields(out)
    assert f["value"] == "1+1*gamma"
    assert f["normalized"] == "11/7 - 1/7*sqrt(2)"
    assert f["oracles_agree"] == "true"


def test_json_lines(capsys, data_dir):
    code, out, _ = run(capsys, "--output", "json-lines", "asymptotic", "--t-list", data_dir / "t_list.txt")
    assert code == 0
    rows = [json.loads(line) for line in out.splitlines()]
    table = [r for r in rows if r.get("table") == "asymptotic"]
    assert [r["t"] for r in table] == ["2", "10", "99", "100", "2500", "9999", "10000"]
    assert table[5]["approx"] == "1.000050003750"
    assert table[0]["ratio"] == "sqrt(2)"


def test_mu_and_npi(capsys, data_dir):
    code, out, _ = run(capsys, "--output", "machine", "mu", data_dir / "w1.hn", "--degree-max", "3")
    f = fields(out)
    assert (f["lower"], f["upper"], f["upper_rule"], f["exact"]) == ("3", "3", "beta1", "3")
    code, out, _ = run(capsys, "--output", "machine", "npi", data_dir / "w1.hn")
    f = fields(out)
    assert (f["npi"], f["slack"], f["certifies_minimal"]) == ("true", "3", "false")


def test_certify_and_family(capsys, data_dir):
    code, out, _ = run(capsys, "--output", "machine", "certify", data_dir / "w3.hn")
    f = fields(out)
    assert code == 0 and f["certified"] == "true" and f["mu_hat_normalized"] == "2"
    code, out, _ = run(capsys, "--output", "machine", "family", "--omega", data_dir / "w1.hn", "--k", 1, "--a", 2)
    f = fields(out)
    assert (f["vertices"], f["maxcontact"], f["vol_inv_normalized"]) == ("10", "2, 5, 16", "4")


def test_vdelta_lipschitz(capsys, data_dir):
    code, out, _ = run(capsys, "--output", "machine", "vdelta", "--delta", data_dir / "smooth_branch.hn",
                       "--t", "3/2", "--poly", "v^2-u^3", "--samples", "1,3/2,2,3")
    f = fields(out)
    assert code == 0
    assert f["max_quotient"] == "2"
    assert [f[f"lipschitz.{i}.normalized"] for i in range(4)] == ["2", "3", "3", "3"]


def test_psuff(capsys, data_dir):
    code, out, _ = run(capsys, "--output", "machine", "psuff", "--matrix", data_dir / "w1_multiplicities.txt",
                       "--multiplicities")
    assert fields(out)["simplex_minimum"] == "38"
    code, out, _ = run(capsys, "--output", "machine", "psuff", "--matrix", data_dir / "nine_ones.txt",
                       "--multiplicities")
    f = fields(out)
    assert (f["p_sufficient"], f["almost_p_sufficient"]) == ("false", "true")
    code, out, _ = run(capsys, "--output", "machine", "psuff", "--matrix", data_dir / "matrix_2x2.txt")
    assert fields(out)["simplex_minimum"] == "-1"


def test_graph_and_dot(capsys, data_dir, tmp_path):
    code, out, _ = run(capsys, "dot", data_dir / "w1.hn")
    assert code == 0 and out.startswith("graph dual {")
    (tmp_path / "g.txt").write_text("s=3\nedges: 1-3, 2-3\narrow=3\n")
    code, out, _ = run(capsys, "invariants", tmp_path / "g.txt")
    assert code == 0 and "maxcontact: 2, 3, 6" in out


def test_corpus_is_deterministic(capsys, tmp_path):
    digests = []
    for name in ("a", "b"):
        code, _, _ = run(capsys, "corpus", "--count", 20, "--out", tmp_path / name)
        assert code == 0
        files = sorted((tmp_path / name).glob("case_*.hn"))
        assert len(files) == 20
        digests.append([hashlib.sha256(p.read_bytes()).hexdigest() for p in files])
    assert digests[0] == digests[1]


@pytest.mark.parametrize(
    "argv, code, message",
    [
        (["invariants", "{d}/smooth_branch.hn"], 3, "use vdelta"),
        (["eval", "{d}/w1.hn", "0"], 4, "zero"),
        (["eval", "{d}/w1.hn", "u +"], 2, ""),
        (["invariants", "{d}/missing.hn"], 2, ""),
        (["vdelta", "--delta", "{d}/smooth_branch.hn", "--t", "1/2"], 4, "interval"),
        (["family", "--omega", "{d}/w1.hn", "--k", "1", "--a", "3"], 4, "not in B"),
    ],
)
def test_exit_codes(capsys, data_dir, argv, code, message):
    got, _, err = run(capsys, *[a.format(d=data_dir) for a in argv])
    assert got == code
    assert err.startswith("error:")
    assert message in err


def test_parse_error_position(capsys, tmp_path):
    bad = tmp_path / "bad.hn"
    bad.write_text("field: Q\nfree h=1 coeffs k=1: 0\npower h=two\nterminal: divisorial\n")
    code, _, err = run(capsys, "invariants", bad)
    assert code == 2
    assert "line 3" in err


def test_capability_error(capsys, tmp_path):
    m = tmp_path / "big.txt"
    m.write_text("\n".join(" ".join(["1"] * 13) for _ in range(13)) + "\n")
    code, _, err = run(capsys, "psuff", "--matrix", m)
    assert code == 5
    code, _, _ = run(capsys, "psuff", "--matrix", m, "--max-size", 13)
    assert code == 0
