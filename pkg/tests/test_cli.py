import subprocess
import sys

import numpy as np
import pytest

from equidep.cli import run


def run_ok(args, capsys):
    code = run(args)
    out, err = capsys.readouterr()
    assert code == 0, err
    return out, err


@pytest.fixture
def pair_csv(tmp_path):
    x = np.linspace(0.0, 3.0, 400)
    path = tmp_path / "pair.csv"
    path.write_text("x,y\n" + "".join(f"{float(a)!r},{float(np.exp(a))!r}\n" for a in x))
    return path


def test_measure_comonotone_prints_one(pair_csv, capsys):
    out, _ = run_ok(["measure", "--kind", "ccor", "--input", str(pair_csv)], capsys)
    assert out == "1.0\n"


def test_measure_many_kinds(pair_csv, capsys):
    out, _ = run_ok(["measure", "--kinds", "ccor,spearman,dcor", "--input", str(pair_csv)], capsys)
    assert out.splitlines() == ["ccor,1.0", "spearman,1.0", "dcor,1.0"]


def test_measure_columns_and_params(tmp_path, capsys):
    path = tmp_path / "t.csv"
    rng = np.random.default_rng(0)
    rows = rng.random((300, 3))
    path.write_text("a,b,c\n" + "".join(",".join(repr(float(v)) for v in r) + "\n" for r in rows))
    out, _ = run_ok(
        ["measure", "--kind", "ccor", "--input", str(path), "--columns", "c,a", "--bandwidth", "0.1", "--grid", "50"],
        capsys,
    )
    assert 0.0 <= float(out) <= 1.0


def test_gen_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        run_ok(["gen", "mixture", "--rel", "linear", "--p", "0.5", "--n", "1000", "--seed", "7", "-o", str(path)], capsys)
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "x,y" and len(lines) == 1001


def test_gen_full_precision_roundtrip(tmp_path, capsys):
    from equidep.synth import gen_gaussian_copula

    out, _ = run_ok(["gen", "gaussian", "--rho", "0.5", "--n", "50", "--seed", "3"], capsys)
    values = np.array([[float(v) for v in line.split(",")] for line in out.splitlines()[1:]])
    s = gen_gaussian_copula(0.5, 50, 3)
    np.testing.assert_array_equal(values[:, 0], s.xs)
    np.testing.assert_array_equal(values[:, 1], s.ys)


@pytest.mark.parametrize(
    "args",
    [
        ["regression", "--rel", "cross", "--noise-sd", "0.2"],
        ["gaussian", "--rho", "0.3"],
        ["hardpair", "--variant", "c2"],
        ["mixture", "--rel", "circle", "--p", "1/3", "--fixed-count"],
    ],
)
def test_gen_families(args, capsys, tmp_path):
    svg = tmp_path / "p.svg"
    out, _ = run_ok(["gen", args[0], "--n", "100", "--plot", str(svg), *args[1:]], capsys)
    assert len(out.splitlines()) == 101
    assert svg.read_text().startswith("<svg")


def test_seed_env_fallback(monkeypatch, capsys):
    monkeypatch.setenv("EQUIDEP_SEED", "42")
    env, _ = run_ok(["gen", "gaussian", "--rho", "0.1", "--n", "20"], capsys)
    flag, _ = run_ok(["gen", "gaussian", "--rho", "0.1", "--n", "20", "--seed", "42"], capsys)
    assert env == flag
    monkeypatch.setenv("EQUIDEP_SEED", "x")
    assert run(["gen", "gaussian", "--rho", "0.1", "--n", "20"]) == 2


def test_scan_contract(tmp_path, capsys):
    rng = np.random.default_rng(1)
    path = tmp_path / "table.csv"
    cols = rng.random((120, 4))
    cols[:80, 3] = np.nan
    lines = ["a,b,c,d"] + [",".join("NA" if np.isnan(v) else repr(float(v)) for v in r) for r in cols]
    path.write_text("\n".join(lines) + "\n")
    out, err = run_ok(["scan", "--input", str(path), "--min-n", "50", "--kinds", "ccor,pearson,dcor"], capsys)
    rows = out.splitlines()
    assert rows[0] == "var_a,var_b,n_common,ccor,pearson,dcor,ccor_minus_abs_rho,flags"
    assert len(rows) == 1 + 3
    assert "skipped=3" in err


def test_scan_top_k_and_plot(tmp_path, capsys):
    rng = np.random.default_rng(2)
    path = tmp_path / "table.csv"
    path.write_text("a,b,c\n" + "".join(",".join(repr(float(v)) for v in r) + "\n" for r in rng.random((60, 3))))
    svg = tmp_path / "scan.svg"
    out, _ = run_ok(["scan", "--input", str(path), "--top-k", "1", "--plot", str(svg)], capsys)
    assert len(out.splitlines()) == 2
    assert svg.exists()


def test_simulate_power(capsys, tmp_path):
    svg = tmp_path / "power.svg"
    out, _ = run_ok(
        ["simulate", "power", "--kinds", "pearson,ccor", "--rel", "linear", "--noise-grid", "0:0.5:2",
         "--n", "60", "--n-sims", "10", "--n-perm", "19", "--workers", "1", "--plot", str(svg)],
        capsys,
    )
    lines = out.splitlines()
    assert lines[0] == "kind,relationship,noise_sd,power,cutoff"
    assert len(lines) == 1 + 4
    assert lines[1].startswith("pearson,linear,0.0,1.0,")


def test_simulate_power_single_noise(capsys):
    out, _ = run_ok(
        ["simulate", "power", "--kind", "spearman", "--rel", "cross", "--noise-sd", "0.1",
         "--n", "40", "--n-sims", "5", "--n-perm", "19", "--workers", "1"],
        capsys,
    )
    assert len(out.splitlines()) == 2


def test_simulate_equitability(capsys):
    out, _ = run_ok(
        ["simulate", "equitability", "--kinds", "ccor,pearson", "--sizes", "100", "--workers", "1"], capsys
    )
    lines = out.splitlines()
    assert lines[0] == "kind,separation_auc"
    assert [l.split(",")[0] for l in lines[1:]] == ["ccor", "pearson"]
    out, _ = run_ok(
        ["simulate", "equitability", "--kinds", "ccor", "--sizes", "100", "--details", "--workers", "1"], capsys
    )
    assert len(out.splitlines()) == 1 + 6 * 2


def test_oracle_examples(capsys, tmp_path):
    out, _ = run_ok(["oracle", "--example", "E", "--kinds", "ccor,phicor,micor"], capsys)
    assert out.splitlines() == ["ccor,0.75", "phicor,0.866025", "micor,0.968246"]
    out, _ = run_ok(["oracle", "--p", "0.5", "--kinds", "sigma,kappa", "--grid", "256"], capsys)
    sigma, kappa = (float(l.split(",")[1]) for l in out.splitlines())
    assert sigma == pytest.approx(0.5, abs=1e-2) and kappa == pytest.approx(0.5, abs=1e-2)
    grid = tmp_path / "grid.csv"
    np.savetxt(grid, np.ones((8, 8)), delimiter=",")
    out, _ = run_ok(["oracle", "--input", str(grid), "--kinds", "ccor"], capsys)
    assert out == "ccor,0.0\n"


def test_errors_exit_nonzero(tmp_path, capsys):
    assert run(["measure", "--input", str(tmp_path / "missing.csv")]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,abc\n")
    assert run(["measure", "--input", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err
    assert run(["gen", "hardpair", "--n", "10", "--epsilon", "0.5"]) == 2
    grid = tmp_path / "g.csv"
    grid.write_text("1,2\n3,4\n")
    assert run(["oracle", "--input", str(grid)]) == 2


def test_unknown_flag_and_kind_are_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["measure", "--bogus"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        run(["scan", "--input", "x", "--kinds", "ccor,nope"])
    assert "nope" in capsys.readouterr().err


def test_console_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "equidep.cli", "--version"], capture_output=True, text=True, check=True
    )
    assert res.stdout.startswith("equidep")
