import csv
import io
import json
import math
import subprocess
import sys

import jsonschema
import pytest

from mudeformed.cli import (
    CSV_PHI_COLUMNS,
    CSV_SWEEP_COLUMNS,
    EXIT_CONVERGENCE,
    EXIT_DOMAIN,
    EXIT_IDENTITY,
    EXIT_OK,
    EXIT_USAGE,
    RECORD_SCHEMA,
    dumps,
    fmt_float,
    main,
)


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def record(*argv):
    code, text, err = run(*argv)
    assert text.count("\n") == 1
    rec = json.loads(text)
    jsonschema.validate(rec, RECORD_SCHEMA)
    return code, rec, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_fmt_float_round_trips():
    for v in (0.1, 1 / 3, math.pi, 1e-300, -2.5e17):
        assert float(fmt_float(v)) == v
    assert fmt_float(0.1) == "0.10000000000000001"


def test_dumps():
    assert dumps({"a": [1, 0.5, None, True, math.nan]}) == '{"a": [1, 0.5, null, true, null]}'
    with pytest.raises(TypeError):
        dumps(object())


class TestExp:
    def test_undeformed(self):
        code, rec, _ = record("exp", "--mu", "0", "--x", "1", "--method", "both")
        assert code == EXIT_OK
        r = rec["results"]
        assert r["series"]["re"] == pytest.approx(0.5403023058681398, abs=1e-15)
        assert r["bessel"]["im"] == pytest.approx(0.8414709848078965, abs=1e-15)
        assert r["discrepancy"] < 1e-10

    def test_mu_bound(self):
        code, text, err = run("exp", "--mu", "-0.6", "--x", "1")
        assert code == EXIT_DOMAIN
        assert text == ""
        assert "mu must exceed -1/2" in err

    def test_negative_mu_modulus(self):
        code, rec, _ = record("exp", "--mu", "-0.25", "--x", "2", "--method", "both")
        assert code == EXIT_OK
        assert rec["results"]["series"]["modulus_sq"] > 1
        assert rec["results"]["bessel"]["modulus_sq"] > 1

    def test_single_methods(self):
        _, rec, _ = record("exp", "--mu", "0.5", "--x", "-3", "--method", "series")
        assert set(rec["results"]) == {"series"}
        _, rec, _ = record("exp", "--mu", "0.5", "--x", "0", "--method", "bessel")
        assert rec["results"]["bessel"]["re"] == 1.0
        assert rec["warnings"]

    def test_non_convergence_exit(self):
        code, _, err = run("exp", "--mu", "0", "--x", "1e6", "--method", "series")
        assert code == EXIT_CONVERGENCE
        assert "error" in err

    @pytest.mark.parametrize("argv", [["exp", "--mu", "abc", "--x", "1"], ["exp", "--mu", "inf", "--x", "1"], ["exp", "--x", "1"], []])
    def test_usage_errors(self, argv, capsys):
        code, _, _ = run(*argv)
        assert code == EXIT_USAGE


class TestVerify:
    def test_all_passed(self):
        code, rec, _ = record("verify", "--suite", "all", "--n-max", "20", "--mu-set", "-2/5,1/3,2")
        assert code == EXIT_OK
        res = rec["results"]
        assert res["all_passed"]
        assert len(res["reports"]) == 14
        assert rec["inputs"]["mu_set"] == ["-2/5", "1/3", "2"]

    def test_odd_vanish_at_zero(self):
        code, rec, _ = record("verify", "--suite", "ODD_VANISH", "--n-max", "5", "--mu-set", "0")
        assert code == EXIT_OK
        assert rec["results"]["reports"][0]["passed"]

    def test_cases_listed(self):
        code, rec, _ = record("verify", "--suite", "CLOSED_4_9", "--n-max", "6", "--mu-set", "-1/4", "--cases")
        assert code == EXIT_OK
        cases = rec["results"]["reports"][0]["cases"]
        assert [c["n"] for c in cases] == [1, 2, 3, 4, 5, 6]
        assert all(c["lhs"] == c["rhs"] for c in cases)

    def test_separate_mu_value(self):
        code, rec, _ = record("verify", "--suite", "SYMMETRY", "--n-max", "3", "--mu-set", "-1/4")
        assert code == EXIT_OK

    def test_xy_grid(self):
        code, rec, _ = record("verify", "--suite", "PRODUCT_ODD", "--n-max", "4", "--mu-set", "1/2", "--xy-grid", "1,-1;-3/2,2/7")
        assert code == EXIT_OK
        assert rec["inputs"]["xy_grid"] == [["1", "-1"], ["-3/2", "2/7"]]

    @pytest.mark.parametrize(
        "argv",
        [
            ["--mu-set", "0.5"],
            ["--mu-set", "1/0"],
            ["--suite", "NOPE"],
            ["--n-max", "0"],
            ["--xy-grid", "1,2,3"],
        ],
    )
    def test_usage_errors(self, argv, capsys):
        code, _, _ = run("verify", *argv)
        assert code == EXIT_USAGE

    def test_mu_below_bound(self):
        code, _, err = run("verify", "--suite", "SYMMETRY", "--n-max", "2", "--mu-set", "-1/2")
        assert code == EXIT_DOMAIN

    def test_failure_exit(self, monkeypatch):
        import mudeformed.combinatorics as comb

        def broken(mu, n, xy):
            yield comb.Case(n, None, None, comb.Fraction(0), comb.Fraction(1))

        monkeypatch.setitem(comb._REGISTRY, comb.Identity.SYMMETRY, (broken, 0))
        code, rec, _ = record("verify", "--suite", "SYMMETRY", "--n-max", "2", "--mu-set", "1")
        assert code == EXIT_IDENTITY
        assert not rec["results"]["all_passed"]
        assert rec["results"]["reports"][0]["counterexample"]["n"] == 0


class TestMeasure:
    def test_value(self):
        code, rec, _ = record("measure", "--mu", "0", "--set", "[1,2]")
        assert code == EXIT_OK
        assert rec["results"]["measure"] == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)

    def test_normalization_warning(self):
        code, rec, _ = record("measure", "--mu", "0.5", "--set", "[0.5,1];[0,0.6]")
        assert rec["inputs"]["set"] == [[0.0, 1.0]]
        assert rec["results"]["measure"] == pytest.approx(0.25, rel=1e-15)
        assert rec["warnings"]

    def test_bad_set(self, capsys):
        code, _, _ = run("measure", "--mu", "0", "--set", "[2,1]")
        assert code == EXIT_USAGE


class TestTrace:
    def test_undeformed(self):
        code, rec, _ = record("trace", "--mu", "0", "--A", "[1,2]", "--B", "[0,1]")
        assert code == EXIT_OK
        r = rec["results"]
        assert r["trace"] == pytest.approx(1 / (2 * math.pi), abs=1e-12)
        assert r["verdict"] == "EQUAL_WITHIN_TOL"

    def test_less(self):
        code, rec, _ = record("trace", "--mu", "1", "--A", "[1,2]", "--B", "[0,1]")
        assert rec["results"]["verdict"] == "LESS"

    def test_hypothesis_violation(self):
        code, text, err = run("trace", "--mu", "0.5", "--A", "[-1,1]", "--B", "[0,1]")
        assert code == EXIT_DOMAIN
        assert text == ""
        assert "closure" in err

    def test_negative_endpoints(self):
        code, rec, _ = record("trace", "--mu", "-0.25", "--A", "[-2,-1]", "--B", "[-1,0]")
        assert rec["results"]["verdict"] == "GREATER"

    def test_tol_flag(self):
        _, rec, _ = record("trace", "--mu", "0.5", "--A", "[1,2]", "--B", "[0,1]", "--tol", "1e-10")
        assert rec["inputs"]["quadrature"]["rel_tol"] == 1e-10

    def test_quad_config(self, tmp_path):
        cfg = tmp_path / "quad.cfg"
        cfg.write_text("# tighter\nrel_tol = 1e-9\nmax_depth=20\n\nmax_panels = 5000\n")
        _, rec, _ = record("trace", "--mu", "0.5", "--A", "[1,2]", "--B", "[0,1]", "--quad-config", str(cfg))
        q = rec["inputs"]["quadrature"]
        assert (q["rel_tol"], q["max_depth"], q["max_panels"]) == (1e-9, 20, 5000)
        # --tol wins over the file
        _, rec, _ = record("trace", "--mu", "0.5", "--A", "[1,2]", "--B", "[0,1]", "--quad-config", str(cfg), "--tol", "1e-7")
        assert rec["inputs"]["quadrature"]["rel_tol"] == 1e-7

    @pytest.mark.parametrize("content", ["bogus = 1\n", "rel_tol 1e-8\n", "max_depth = x\n", "rel_tol = -1\n"])
    def test_bad_quad_config(self, tmp_path, content):
        cfg = tmp_path / "quad.cfg"
        cfg.write_text(content)
        code, _, err = run("trace", "--mu", "0.5", "--A", "[1,2]", "--B", "[0,1]", "--quad-config", str(cfg))
        assert code == EXIT_USAGE
        assert err.startswith("error:")

    def test_missing_quad_config(self, tmp_path):
        code, _, _ = run("trace", "--mu", "0.5", "--A", "[1,2]", "--B", "[0,1]", "--quad-config", str(tmp_path / "none"))
        assert code == EXIT_USAGE

    def test_non_convergence_exit(self, tmp_path):
        cfg = tmp_path / "quad.cfg"
        cfg.write_text("max_panels = 2\n")
        code, rec, _ = record("trace", "--mu", "2.5", "--A", "[1,2]", "--B", "[0,20]", "--quad-config", str(cfg))
        assert code == EXIT_CONVERGENCE
        assert rec["results"]["verdict"] == "INDETERMINATE"
        assert rec["warnings"]


class TestSweep:
    def test_csv(self):
        code, text, err = run(
            "sweep", "--mu-from", "-0.4", "--mu-to", "2", "--steps", "25", "--A", "[1,2]", "--B", "[0,1]", "--format", "csv"
        )
        assert code == EXIT_OK
        table = rows(text)
        assert table[0] == CSV_SWEEP_COLUMNS
        body = table[1:]
        assert len(body) == 25
        for row in body:
            mu, ratio, verdict = float(row[0]), float(row[5]), row[7]
            if mu < 0:
                assert ratio > 1 and verdict == "GREATER"
            elif mu > 0:
                assert ratio < 1 and verdict == "LESS"
            else:
                assert row[0] == "0"
                assert verdict == "EQUAL_WITHIN_TOL"

    def test_single_step(self):
        code, text, _ = run("sweep", "--mu-from", "0", "--mu-to", "0", "--steps", "1", "--A", "[1,2]", "--B", "[0,1]", "--format", "csv")
        body = rows(text)[1:]
        assert len(body) == 1
        assert float(body[0][5]) == pytest.approx(1, abs=1e-8)

    def test_json(self):
        code, rec, _ = record("sweep", "--mu-from", "-0.25", "--mu-to", "1", "--steps", "3", "--A", "[1,2]", "--B", "[0,1]")
        assert code == EXIT_OK
        verdicts = [r["verdict"] for r in rec["results"]["rows"]]
        assert verdicts == ["GREATER", "LESS", "LESS"]

    def test_bad_start(self):
        code, _, err = run("sweep", "--mu-from", "-0.6", "--mu-to", "1", "--steps", "3", "--A", "[1,2]", "--B", "[0,1]")
        assert code == EXIT_DOMAIN
        assert "mu must exceed -1/2" in err

    @pytest.mark.parametrize("argv", [["--mu-from", "1", "--mu-to", "0", "--steps", "3"], ["--mu-from", "0", "--mu-to", "1", "--steps", "0"]])
    def test_usage(self, argv):
        code, _, _ = run("sweep", *argv, "--A", "[1,2]", "--B", "[0,1]")
        assert code == EXIT_USAGE

    def test_zero_in_a(self):
        code, _, _ = run("sweep", "--mu-from", "0", "--mu-to", "1", "--steps", "2", "--A", "[0,2]", "--B", "[0,1]")
        assert code == EXIT_DOMAIN

    def test_csv_warnings_on_stderr(self):
        code, text, err = run(
            "sweep", "--mu-from", "0", "--mu-to", "1", "--steps", "2", "--A", "[1,2];[1.5,3]", "--B", "[0,1]", "--format", "csv"
        )
        assert code == EXIT_OK
        assert "warning:" in err
        assert "warning" not in text


class TestPhi:
    def test_undeformed(self):
        code, text, _ = run("phi", "--mu", "0", "--x-from", "-5", "--x-to", "5", "--steps", "11")
        assert code == EXIT_OK
        table = rows(text)
        assert table[0] == CSV_PHI_COLUMNS
        assert len(table) == 12
        for x, p, d in table[1:]:
            assert abs(float(p) - 1) < 1e-12
            assert (d == "") == (float(x) <= 0)

    def test_positive_mu_below_one(self):
        _, text, _ = run("phi", "--mu", "0.5", "--x-from", "-5", "--x-to", "5", "--steps", "11")
        for x, p, _ in rows(text)[1:]:
            if x == "0":
                assert float(p) == 1
            else:
                assert float(p) < 1

    def test_derivative_sign(self):
        _, text, _ = run("phi", "--mu", "-0.25", "--x-from", "0.5", "--x-to", "10", "--steps", "20")
        body = rows(text)[1:]
        assert len(body) == 20
        assert all(float(d) > 0 for _, _, d in body)

    @pytest.mark.parametrize("argv", [["--steps", "1"], ["--x-from", "2", "--x-to", "1"]])
    def test_usage(self, argv):
        base = {"--x-from": "0", "--x-to": "1", "--steps": "5"}
        for k, v in zip(argv[::2], argv[1::2]):
            base[k] = v
        flat = [t for kv in base.items() for t in kv]
        code, _, _ = run("phi", "--mu", "0.5", *flat)
        assert code == EXIT_USAGE


def test_determinism():
    argv = ["sweep", "--mu-from", "-0.3", "--mu-to", "0.3", "--steps", "3", "--A", "[1,2]", "--B", "[-1,1]"]
    assert run(*argv)[1] == run(*argv)[1]


def test_timestamp_flag():
    _, rec, _ = record("--timestamp", "measure", "--mu", "0", "--set", "[1,2]")
    assert "timestamp" in rec
    _, rec, _ = record("measure", "--mu", "0", "--set", "[1,2]")
    assert "timestamp" not in rec


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "mudeformed", "exp", "--mu", "0.5", "--x", "2"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "exp"
