import json
import math

import pytest

from entropic_sdot import cli, identities
from entropic_sdot.asymptotics import SweepError
from entropic_sdot.entropic import DiagnosticsRow
from entropic_sdot.exceptions import ScenarioError
from entropic_sdot.scenario import bundled_scenarios, load_scenario, parse_scenario

FIG1A = {
    "name": "fig1a",
    "density": {"family": "gaussian", "mean": 0.0, "sigma": 1.0},
    "atoms": {"positions": [-1.0, 1.0], "weights": [0.5, 0.5]},
    "eta": [2**k for k in range(2, 11)],
}


def test_parse_valid():
    sc = parse_scenario(json.dumps(FIG1A))
    assert sc.name == "fig1a"
    assert sc.etas == [2.0**k for k in range(2, 11)]
    assert sc.atoms.weights.tolist() == [0.5, 0.5]
    assert sc.density.family == "gaussian"


def test_default_weights_are_uniform():
    doc = dict(FIG1A, atoms={"positions": [[0.2, 0.2], [0.8, 0.8], [0.5, 0.1]]},
               density={"family": "uniform2d", "polygon": [[0, 0], [1, 0], [1, 1], [0, 1]]})
    sc = parse_scenario(json.dumps(doc))
    assert sc.atoms.weights == pytest.approx([1 / 3] * 3)


@pytest.mark.parametrize("change, where", [
    ({"atoms": {"positions": [1.0, 1.0]}}, "atoms.positions"),
    ({"atoms": {"positions": [-1.0, 1.0], "weights": [0.3, 0.3]}}, "atoms.weights"),
    ({"atoms": {"positions": [-1.0, 1.0], "weights": [0.5, -0.5]}}, "atoms.weights[1]"),
    ({"density": {"family": "gaussian", "sigma": 1.0, "rate": 2.0}}, "density"),
    ({"density": {"family": "cauchy"}}, "density.family"),
    ({"density": {"family": "power_law", "exponent": 1.5}}, "density.exponent"),
    ({"etas": [1, 2]}, "<root>"),
    ({"eta": [4, -1]}, "eta[1]"),
    ({"eta": [4, 4]}, "eta"),
    ({"atoms": {"positions": [[0.1, 0.2], [0.3, 0.4]]}}, "atoms.positions"),
])
def test_parse_errors_name_the_path(change, where):
    doc = dict(FIG1A, **change)
    with pytest.raises(ScenarioError) as info:
        parse_scenario(json.dumps(doc))
    assert str(info.value).startswith(where + ":")
    assert info.value.path == where


def test_json_syntax_error_has_line():
    with pytest.raises(ScenarioError) as info:
        parse_scenario('{\n  "density": {"family": "gaussian"},\n  "atoms": [\n}')
    assert str(info.value).startswith("line 4, column 1:")


def test_bundled_scenarios_load():
    names = bundled_scenarios()
    assert names == sorted(["fig1a_gaussian", "fig1b_laplace", "uniform_symmetric", "uniform_asymmetric",
                            "powerlaw_p05", "square2d_two_atoms"])
    for name in names:
        assert load_scenario(name).name == name


def test_load_missing():
    with pytest.raises(ScenarioError):
        load_scenario("nope")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_sweep_csv(capsys, tmp_path):
    path = tmp_path / "fig1a.json"
    path.write_text(json.dumps(FIG1A))
    code, out, _ = run(capsys, "sweep", str(path))
    assert code == 0
    header, rows = cli.read_csv(out)
    assert header == DiagnosticsRow.columns()
    assert rows[-1][header.index("suboptimality_scaled")] == pytest.approx(0.1641, abs=1e-4)
    # round trip at 17 significant digits and byte-identical reruns
    assert cli.rows_to_csv([DiagnosticsRow(*r) for r in rows]) == out
    out_file = tmp_path / "a.csv"
    assert run(capsys, "sweep", str(path), "--out", str(out_file))[0] == 0
    assert out_file.read_text() == out


def test_eta_override_and_flags(capsys):
    code, out, _ = run(capsys, "sweep", "uniform_symmetric", "--eta", "16,8", "--tol", "1e-11",
                       "--quad-rel-tol", "1e-11", "--seed", "3", "--method", "sinkhorn")
    assert code == 0
    _, rows = cli.read_csv(out)
    assert [r[0] for r in rows] == [8.0, 16.0]


def test_predict(capsys):
    code, out, _ = run(capsys, "predict", "fig1b_laplace")
    assert code == 0
    assert json.loads(out)["subopt_constant"] == pytest.approx(0.205617, abs=1e-6)


def test_solve(capsys):
    code, out, _ = run(capsys, "solve", "uniform_asymmetric", "--eta", "8")
    assert code == 0
    report = json.loads(out)
    assert report["unregularized"]["g_star"] == pytest.approx([-1.5, 0.5])
    assert report["unregularized"]["facet_weights"]["0,1"] == pytest.approx(0.5)
    assert report["entropic"][0]["eta"] == 8.0


def test_verify_identities(capsys, monkeypatch):
    code, out, _ = run(capsys, "verify-identities")
    assert code == 0
    assert out.splitlines()[0].startswith("PASS  Li2(-1) = -pi^2/12")
    bad = identities.IdentityCheck("broken", 1.0, 1e-12)
    monkeypatch.setattr(cli, "identity_suite", lambda: [bad])
    assert run(capsys, "verify-identities")[0] == cli.EXIT_IDENTITY


def test_oracle_compare(capsys):
    code, out, _ = run(capsys, "oracle-compare", "uniform_asymmetric", "--grid-points", "500")
    assert code == 0
    header, rows = cli.read_csv(out)
    assert rows[0][header.index("eta")] == 8.0
    assert rows[0][header.index("cost_rel_diff")] < 1e-3


def test_case_study(capsys):
    code, out, _ = run(capsys, "case-study", "powerlaw_p05", "--eta", "64")
    assert code == 0
    header, rows = cli.read_csv(out)
    assert rows[0][1] == pytest.approx(0.00033110053474272510123, rel=1e-10)


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "predict", "missing_scenario")[0] == cli.EXIT_INVALID
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(dict(FIG1A, atoms={"positions": [-1, 1], "weights": [0.3, 0.3]})))
    code, _, err = run(capsys, "sweep", str(bad))
    assert code == cli.EXIT_INVALID and "atoms.weights" in err
    assert run(capsys, "case-study", "uniform_asymmetric")[0] == cli.EXIT_INVALID
    assert run(capsys, "oracle-compare", "square2d_two_atoms")[0] == cli.EXIT_INVALID
    with pytest.raises(SystemExit):
        cli.main(["sweep", "fig1a_gaussian", "--eta", "0,1"])


def test_solver_failure_exit_code(capsys, monkeypatch):
    def failing(problem, etas, **kw):
        rows = [DiagnosticsRow.failed(e, 0.2) for e in etas]
        raise SweepError("1 eta value(s) failed: 8", rows, [])

    monkeypatch.setattr(cli, "run_sweep", failing)
    code, out, err = run(capsys, "sweep", "uniform_symmetric", "--eta", "8")
    assert code == cli.EXIT_SOLVER
    assert "solver error" in err
    # the partial CSV is still written, with NaN for the failed row
    assert math.isnan(cli.read_csv(out)[1][0][1])
