import csv
import io
import json
import subprocess
import sys

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from treedense.cli import SUBCOMMANDS, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_bounds_example(tmp_path, capsys):
    out = tmp_path / "curve.csv"
    code, _, _ = run_cli(capsys, "bounds", "--d", "3", "--p-grid", "0.001:0.999:0.001", "--out", str(out))
    assert code == 0
    table = rows(out.read_text())
    assert len(table) == 998
    row = next(r for r in table if float(r["p"]) == 0.45)
    assert (float(row["lower"]), row["source"], row["k"]) == (0.5, "k-copies", "2")
    assert [float(r["lower"]) for r in table] == sorted(float(r["lower"]) for r in table)


def test_exact_example(capsys):
    code, out, _ = run_cli(capsys, "exact", "--d", "3", "--p", "0.6667", "--n", "64")
    assert code == 0
    table = rows(out)
    assert [int(r["n"]) for r in table] == [1, 2, 4, 8, 16, 32, 64]
    last = table[-1]
    assert abs(float(last["p_fully_open"]) - 7 / 8) < 2e-3
    assert float(last["p_fully_open"]) <= float(last["mean_density"]) <= 1


def test_coverage_example(capsys):
    code, out, err = run_cli(capsys, "coverage", "--d", "4", "--k-max", "64")
    assert code == 0
    assert out.splitlines() == ["kind,d,k_max,gap_lo,gap_hi"]
    assert "no gaps" in err
    code, out, _ = run_cli(capsys, "coverage", "--d", "3")
    assert any(r["gap_lo"] == "0.5" and abs(float(r["gap_hi"]) - 2 / 3) < 1e-4 for r in rows(out))


def test_survival_and_density(capsys):
    code, out, _ = run_cli(capsys, "survival", "--p", "0.4", "--n", "200")
    assert code == 0 and float(rows(out)[-1]["p_fully_open"]) < 1e-6
    code, out, _ = run_cli(capsys, "density", "--sampler", "matching", "--horizons", "4,8",
                           "--trials", "20", "--format", "json")
    data = json.loads(out)
    assert code == 0 and [r["n"] for r in data] == [4, 8]
    assert all(r["max"] <= 0.5 + 1 / r["n"] for r in data)


def test_copies_marginal_barrier(capsys):
    code, out, _ = run_cli(capsys, "copies", "--trials", "20", "--n", "12")
    assert code == 0 and rows(out)[0]["violations"] == "0"
    code, out, _ = run_cli(capsys, "marginal", "--sampler", "complement(bernoulli(0.3))", "--trials", "200")
    assert code == 0 and all(float(r["exact"]) == 0.7 for r in rows(out))
    code, out, _ = run_cli(capsys, "barrier", "--sampler", "bernoulli(1)", "--n", "6",
                           "--a", "1", "--trials", "5")
    assert code == 0 and rows(out)[0]["survive_frac"] == "1"


def test_globals_either_side(capsys):
    a = run_cli(capsys, "--seed", "4", "--trials", "7", "density", "--horizons", "6")
    b = run_cli(capsys, "density", "--horizons", "6", "--seed", "4", "--trials", "7")
    assert a[0] == b[0] == 0 and a[1] == b[1]


@pytest.mark.parametrize("argv,flag", [
    (["bounds", "--d", "2"], "--d"),
    (["bounds", "--d", "x"], "--d"),
    (["exact", "--p", "1.5"], "--p"),
    (["barrier", "--a", "-0.1"], "--a"),
    (["barrier", "--c", "-1"], "--c"),
    (["barrier", "--cap", "0"], "--cap"),
    (["coverage", "--k-max", "0"], "--k-max"),
    (["coverage", "--grid-step", "2"], "--grid-step"),
    (["density", "--trials", "0"], "--trials"),
    (["density", "--horizons", "8,4"], "horizons"),
    (["density", "--bogus"], "--bogus"),
    (["bounds", "--p-grid", "1:0:1"], "grid"),
    (["density", "--threads", "0"], "threads"),
    (["density", "--format", "xml"], "--format"),
    (["copies", "--sampler", "matching"], "--sampler"),
    (["barrier", "--sampler", "bipartite-site"], "--sampler"),
    (["exact", "--c", "1"], "--c"),
])
def test_bad_flags_exit_2(capsys, argv, flag):
    code, _, err = run_cli(capsys, *argv)
    assert code == 2
    assert flag in err


def test_bad_sampler_reports_offset(capsys):
    code, _, err = run_cli(capsys, "density", "--sampler", "max(bernoulli(0.5),k=)")
    assert code == 2 and "offset" in err


def test_config_merges_under_flags(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"p": 0.3, "horizons": [1, 2], "d": 4}))
    code, out, _ = run_cli(capsys, "exact", "--config", str(cfg), "--p", "0.5")
    table = rows(out)
    assert code == 0 and [r["n"] for r in table] == ["1", "2"]
    assert all(r["p"] == "0.5" and r["d"] == "4" for r in table)
    cfg.write_text(json.dumps({"kind": "coverage"}))
    assert run_cli(capsys, "exact", "--config", str(cfg))[0] == 2
    cfg.write_text(json.dumps({"nonsense": 1}))
    code, _, err = run_cli(capsys, "exact", "--config", str(cfg))
    assert code == 2 and "nonsense" in err


def test_threads_env_fallback(monkeypatch, capsys):
    monkeypatch.setenv("TREEDENSE_THREADS", "3")
    a = run_cli(capsys, "density", "--horizons", "8", "--trials", "30")
    monkeypatch.setenv("TREEDENSE_THREADS", "zero")
    assert run_cli(capsys, "density", "--horizons", "8")[0] == 2
    monkeypatch.delenv("TREEDENSE_THREADS")
    b = run_cli(capsys, "density", "--horizons", "8", "--trials", "30")
    assert a[0] == b[0] == 0 and a[1] == b[1]


def test_help_documents_formulas(capsys):
    for sub, needle in [("bounds", "1 - (1 - 2/d)^(1/k)"), ("survival", "theta"),
                        ("exact", "Q_j(m)")]:
        assert main([sub, "--help"]) == 0
        assert needle in capsys.readouterr().out


def test_console_script_module():
    res = subprocess.run([sys.executable, "-m", "treedense.cli", "bounds", "--p-grid", "0.5:0.6:0.1"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines() == ["p,lower,source,k", "0.5,0.5,trivial,"]


GOOD = {
    "--d": ["3", "4"], "--p": ["0.3", "0.7"], "--n": ["4", "3,6"], "--a": ["0.5"],
    "--c": ["0", "2"], "--cap": ["50"], "--k-max": ["8"], "--grid-step": ["0.01"],
    "--p-grid": ["0.1:0.5:0.1"], "--sampler": ["bernoulli(0.4)", "matching", "max(bernoulli(0.3),k=2)"],
    "--horizons": ["3,6"], "--seed": ["1"], "--trials": ["3"], "--format": ["csv", "json"],
    "--threads": ["1", "2"],
}
BAD = {
    "--d": ["1", "z"], "--p": ["-1", "q"], "--n": ["x"], "--a": ["2"], "--c": ["-3"],
    "--cap": ["-1"], "--k-max": ["-2"], "--grid-step": ["0"], "--p-grid": ["a:b"],
    "--sampler": ["bernoulli(", "foo"], "--horizons": ["0"], "--trials": ["0"],
    "--format": ["yaml"], "--threads": ["-1"],
}


@st.composite
def command_lines(draw):
    sub = draw(st.sampled_from(sorted(SUBCOMMANDS)))
    flags = draw(st.lists(st.sampled_from(sorted(GOOD)), unique=True, max_size=5))
    bad = draw(st.one_of(st.none(), st.sampled_from(flags))) if flags else None
    argv = [sub]
    for f in draw(st.permutations(flags)):
        pool = BAD[f] if f == bad and f in BAD else GOOD[f]
        argv += [f, draw(st.sampled_from(pool))]
    return argv


@settings(max_examples=120, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(command_lines())
def test_flag_fuzz(capsys, argv):
    code = main(argv)
    _, err = capsys.readouterr()
    assert code in (0, 2), err
    if code == 2:
        assert any(f in err for f in GOOD), err
