"""Expression grammar, subcommand dispatch, report determinism."""

import itertools
import json
from fractions import Fraction

import pytest

from newton_sublevel import ParseError, parse_expression, print_expression, run
from newton_sublevel.cli import _tokenize


F = Fraction


# ---------------------------------------------------------------------------
# round-trip corpus: parse -> print -> parse must reproduce the AST


_TERMS = ["x", "y", "x^2", "y^3", "2*x", "3/4*y", "x*y", "x^2*y^3",
          "x^(1/2)", "x^(3/2)*y", "5", "1/2", "2*x^4*y", "7*y^5"]


def _corpus():
    exprs = list(_TERMS)
    for a, b in itertools.combinations(_TERMS[:10], 2):
        exprs.append(f"{a} + {b}")
        exprs.append(f"{a} - {b}")
    for a, b, c in [("x^2", "y^2", "x^5"), ("2*x", "y^3", "1/2"),
                    ("x*y", "x^(1/2)", "y")]:
        exprs.append(f"{a} + {b} - {c}")
    exprs += [
        "(y - x^2)^2",
        "(y - x^2 - x^3)^2 - x^9",
        "(x + y)^3",
        "(y + x^3)^2 + x^8",
        "(2*x - y)^2",
        "((y - x^2)^2 + x^5)",
        "((x))",
        "-x^2*y^2",
        "-x - y",
        "+x",
        "2x",
        "2x^2*y",
        "x(x + y)",
        "(x + y)(x - y)",
        "3/2",
        "x^0",
        "y^0*x",
        "(y - x^2)^2 + 0*y",
    ]
    return exprs


def test_corpus_is_large_enough():
    assert len(_corpus()) >= 100


@pytest.mark.parametrize("text", _corpus())
def test_parse_print_parse_identity(text):
    first = parse_expression(text)
    printed = print_expression(first.ast)
    second = parse_expression(printed)
    assert second.ast == first.ast
    # canonical form is a fixed point
    assert print_expression(second.ast) == printed
    assert second.poly == first.poly


# ---------------------------------------------------------------------------
# parsing: semantics


def test_parse_monomials_exact():
    p = parse_expression("x^2*y^2 + x^5").poly
    assert p.coeff(F(2), 2) == 1 and p.coeff(F(5), 0) == 1
    assert len(p.terms) == 2


def test_parse_expands_squares():
    p = parse_expression("(y - x^2)^2").poly
    assert p.coeff(F(0), 2) == 1
    assert p.coeff(F(2), 1) == -2
    assert p.coeff(F(4), 0) == 1


def test_parse_fractional_x_power():
    p = parse_expression("x^(1/2) + y").poly
    assert p.coeff(F(1, 2), 0) == 1 and p.coeff(F(0), 1) == 1


def test_parse_rational_coefficients():
    p = parse_expression("3/4*x - 1/2*y^2").poly
    assert p.coeff(F(1), 0) == F(3, 4) and p.coeff(F(0), 2) == F(-1, 2)


def test_parse_implicit_multiplication():
    assert parse_expression("2x*y").poly == parse_expression("2*x*y").poly
    assert parse_expression("x(x + y)").poly == parse_expression("x^2 + x*y").poly


def test_parse_cancellation():
    assert parse_expression("(x + y)(x - y) - x^2 + y^2").poly.is_zero()


# ---------------------------------------------------------------------------
# parsing: rejection with positions


@pytest.mark.parametrize("bad", [
    "", "x +* y", "x^", "(y - x^2", "x^y", "x/y", "x ** y", "x & y",
    "x - -y", "1/0", "x^(1/0)",
])
def test_parse_rejects_syntax(bad):
    with pytest.raises(ParseError):
        parse_expression(bad)


@pytest.mark.parametrize("bad,needle", [
    ("y^(1/2)", "y-power"),
    ("y^(-1)", "y-power"),
    ("x^(-2)", "x-power"),
    ("2^(1/2)", "fractional power"),
    ("(x + y)^(1/2)", "nonnegative integer"),
])
def test_parse_rejects_semantics(bad, needle):
    with pytest.raises(ParseError, match=needle):
        parse_expression(bad)


def test_parse_error_positions():
    with pytest.raises(ParseError) as err:
        parse_expression("x +* y")
    assert err.value.line == 1 and err.value.col == 4
    with pytest.raises(ParseError) as err:
        parse_expression("x +\n* y")
    assert err.value.line == 2 and err.value.col == 1


def test_tokenizer_tracks_columns():
    toks = _tokenize("x + 12/5")
    assert [t.kind for t in toks] == ["NAME", "OP", "INT", "OP", "INT", "END"]
    assert [t.col for t in toks[:-1]] == [1, 3, 5, 7, 8]


# ---------------------------------------------------------------------------
# subcommands: happy paths


def test_analyze_morse(tmp_path):
    assert run(["analyze", "x^2 + y^2", "--out", str(tmp_path)]) == 0
    blob = json.loads((tmp_path / "analyze.json").read_text())
    assert blob["schema"] == "newton-sublevel/report/1"
    assert blob["results"]["newton_distance"] == "1"
    assert blob["results"]["index"] == {"j": "1", "p": 0, "morse_hyperbolic": False}
    assert blob["results"]["superadapted"] is True
    assert not (tmp_path / "analyze.FAILED").exists()


def test_analyze_rational_distance(tmp_path):
    assert run(["analyze", "(y - x^2)^2", "--out", str(tmp_path)]) == 0
    blob = json.loads((tmp_path / "analyze.json").read_text())
    assert blob["results"]["newton_distance"] == "4/3"
    assert blob["results"]["superadapted"] is False
    assert blob["results"]["shears_to_superadapted"] == 1
    assert blob["results"]["index"]["j"] == "1/2"


def test_adapt_reports_shear_chain(tmp_path):
    assert run(["adapt", "(y - x^2 - x^3)^2", "--out", str(tmp_path)]) == 0
    blob = json.loads((tmp_path / "adapt.json").read_text())
    assert blob["results"]["iterations"] == 2
    assert blob["results"]["final"] == "y^2"
    assert [s["root"] for s in blob["results"]["shears"]] == ["1", "1"]


def test_resolve_writes_decomposition_and_verify(tmp_path):
    assert run(["resolve", "(y - x^2)^2", "--out", str(tmp_path)]) == 0
    dec = json.loads((tmp_path / "resolution.json").read_text())
    ver = json.loads((tmp_path / "verify.json").read_text())
    assert dec["charts"] and all("x_max" in c for c in dec["charts"])
    assert all("/" in c["x_max"] or c["x_max"].lstrip("-").isdigit()
               for c in dec["charts"])
    assert ver["results"]["all_passed"] is True
    assert ver["results"]["charts"] == len(dec["charts"])
    assert all(row["passed"] for row in ver["results"]["verify"])


def test_measure_fit_near_half(tmp_path):
    code = run(["measure", "(y - x^2)^2", "--out", str(tmp_path),
                "--eps", "1e-2..1e-5:6", "--samples", "400000", "--seed", "0"])
    assert code == 0
    blob = json.loads((tmp_path / "measure.json").read_text())
    assert abs(blob["results"]["fit"]["j_hat"] - 0.5) < 0.08
    csv_text = (tmp_path / "measure.csv").read_text()
    assert csv_text.splitlines()[0] == "epsilon,estimate,stderr,n,method"
    assert len(csv_text.splitlines()) == 7


def test_oscillate_morse(tmp_path):
    code = run(["oscillate", "x^2 + y^2", "--out", str(tmp_path),
                "--lambda", "50..800:6"])
    assert code == 0
    blob = json.loads((tmp_path / "oscillate.json").read_text())
    assert abs(blob["results"]["fit"]["j_hat"] - 1.0) < 0.05
    assert (tmp_path / "oscillate.csv").read_text().splitlines()[0] == \
        "lambda,re,im,abs"


def test_sweep_exit_and_tables(tmp_path):
    # a perturbation with a leading minus needs parentheses (or "--") so the
    # shell token is not mistaken for a flag
    code = run(["sweep", "x^2*y^2 + x^5", "(-x^2*y^2)", "--out", str(tmp_path),
                "--t-grid", "-1/2,1/2,1"])
    assert code == 0
    blob = json.loads((tmp_path / "sweep.json").read_text())
    assert blob["results"]["verdict"]["ok"] is True
    rows = (tmp_path / "sweep.csv").read_text().splitlines()
    assert rows[0].startswith("t,j,p")
    assert len(rows) == 4


def test_sweep_double_dash_separator(tmp_path):
    code = run(["sweep", "--t-grid", "1/2,1", "--out", str(tmp_path),
                "--", "x^2*y^2 + x^5", "-x^2*y^2"])
    assert code == 0
    blob = json.loads((tmp_path / "sweep.json").read_text())
    assert blob["results"]["verdict"]["ok"] is True


def test_sweep_mixture_mode(tmp_path):
    code = run(["sweep", "x^2*y^2 + x^5", "x^5 + y^4", "--mixture",
                "--out", str(tmp_path), "--t-grid", "0,1,inf"])
    assert code == 0
    rows = (tmp_path / "sweep.csv").read_text().splitlines()
    assert rows[-1].startswith("inf,")


def test_check_vdc_small_ensemble(tmp_path):
    code = run(["check-vdc", "--samples", "10", "--seed", "0",
                "--out", str(tmp_path)])
    assert code == 0
    blob = json.loads((tmp_path / "vdc.json").read_text())
    assert blob["results"]["violations"] == 0
    assert {row["k"] for row in blob["results"]["per_k"]} == {1, 2, 3}


# ---------------------------------------------------------------------------
# subcommands: failure paths and exit codes


def test_exit_1_on_parse_error(tmp_path):
    assert run(["analyze", "", "--out", str(tmp_path)]) == 1
    assert run(["analyze", "x +* y", "--out", str(tmp_path)]) == 1
    assert not (tmp_path / "analyze.json").exists()
    assert not (tmp_path / "analyze.FAILED").exists()


def test_exit_1_on_usage_error(tmp_path):
    assert run(["analyze", "x^2", "--eps", "nonsense", "--out", str(tmp_path)]) == 1
    assert run(["frobnicate", "x^2"]) == 1
    assert run(["measure", "x^2 + y^2", "--mode", "telepathic"]) == 1


def test_exit_2_with_failure_marker(tmp_path):
    # nonintegral edge slope defeats the shear reduction
    code = run(["analyze", "(y - x^(3/2))^2", "--out", str(tmp_path)])
    assert code == 2
    marker = tmp_path / "analyze.FAILED"
    assert marker.exists()
    assert "slope" in marker.read_text()


def test_exit_2_oscillate_fractional(tmp_path):
    code = run(["oscillate", "x^(1/2) + y", "--out", str(tmp_path),
                "--lambda", "50..100:2"])
    assert code == 2
    assert (tmp_path / "oscillate.FAILED").exists()


# ---------------------------------------------------------------------------
# config files


def test_config_supplies_defaults_and_flags_override(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("# experiment defaults\nseed = 9\nsamples = 50000\n"
                   "eps = 1e-2..1e-4:4\n")
    out1 = tmp_path / "a"
    out1.mkdir()
    assert run(["measure", "x^2 + y^2", "--config", str(cfg),
                "--out", str(out1)]) == 0
    blob = json.loads((out1 / "measure.json").read_text())
    assert blob["config"]["seed"] == 9
    assert blob["config"]["samples"] == 50000
    out2 = tmp_path / "b"
    out2.mkdir()
    assert run(["measure", "x^2 + y^2", "--config", str(cfg), "--seed", "3",
                "--out", str(out2)]) == 0
    blob2 = json.loads((out2 / "measure.json").read_text())
    assert blob2["config"]["seed"] == 3


def test_config_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("volume = 11\n")
    assert run(["analyze", "x^2 + y^2", "--config", str(cfg),
                "--out", str(tmp_path)]) == 1


# ---------------------------------------------------------------------------
# determinism


def _run_measure(outdir, monkeypatch, threads):
    monkeypatch.setenv("NEWTON_SUBLEVEL_THREADS", str(threads))
    outdir.mkdir(exist_ok=True)
    assert run(["measure", "x^2*y^2 + x^5", "--out", str(outdir),
                "--eps", "1e-2..1e-4:4", "--samples", "100000",
                "--seed", "11"]) == 0
    return ((outdir / "measure.csv").read_bytes(),
            (outdir / "measure.json").read_bytes())


def test_reports_byte_identical_across_runs_and_threads(tmp_path, monkeypatch):
    a = _run_measure(tmp_path / "r1", monkeypatch, 1)
    b = _run_measure(tmp_path / "r2", monkeypatch, 1)
    c = _run_measure(tmp_path / "r4", monkeypatch, 4)
    assert a == b == c


def test_sweep_reports_deterministic(tmp_path):
    outs = []
    for name in ("s1", "s2"):
        d = tmp_path / name
        d.mkdir()
        assert run(["sweep", "x^2*y^2 + x^5", "y^7", "--out", str(d),
                    "--t-grid", "-1,-1/2,1/2,1"]) == 0
        outs.append(((d / "sweep.csv").read_bytes(),
                     (d / "sweep.json").read_bytes()))
    assert outs[0] == outs[1]


def test_json_reports_have_sorted_keys_and_no_timestamps(tmp_path):
    assert run(["analyze", "y^2 - x^3", "--out", str(tmp_path)]) == 0
    raw = (tmp_path / "analyze.json").read_text()
    blob = json.loads(raw)
    assert raw == json.dumps(blob, indent=1, sort_keys=True) + "\n"
    assert "time" not in raw and "date" not in raw
