import json

import pytest

from k2local import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr()


def test_fgl_verify_reports_json_lines(capsys):
    code, out = run(capsys, "fgl", "verify")
    assert code == 0
    rows = [json.loads(line) for line in out.out.splitlines()]
    assert [r["check"] for r in rows] == ["fgl.two_series", "fgl.formal_inverse", "fgl.axioms"]
    assert all(set(r) == {"check", "status", "detail", "ms"} and r["status"] == "pass" for r in rows)


def test_usage_errors_exit_2(capsys):
    assert cli.main(["nonsense"]) == 2
    assert cli.main(["cohomology", "compute", "--pmax", "7"]) == 2
    assert cli.main(["fgl", "verify", "--precision", "2"]) == 2
    assert cli.main(["comodule", "solve", "--a", "1"]) == 2
    capsys.readouterr()


def test_config_file_and_override(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("# run settings\npmax = 2\na = 1\nb = 0\nscenario = B\n")
    args = cli._parser().parse_args(["hfpss", "chart", "--config", str(cfg_file), "--pmax", "3"])
    cfg = cli.build_config(args)
    assert cfg.pmax == 3 and cfg.scenario == "B" and cfg.param_list() == [(1, 0)]


def test_config_rejects_unknown_key(tmp_path):
    cfg_file = tmp_path / "bad.cfg"
    cfg_file.write_text("colour = blue\n")
    with pytest.raises(cli.ConfigError):
        cli.read_config(str(cfg_file))


def test_run_config_validation():
    with pytest.raises(cli.ConfigError):
        cli.RunConfig(series_degree=4).validate()
    with pytest.raises(cli.ConfigError):
        cli.RunConfig(params="2,0").validate()
    assert cli.RunConfig().validate().param_list() == list(cli.PARAMS)


def test_cohomology_compute(capsys):
    code, out = run(capsys, "cohomology", "compute", "--group", "c6", "--pmax", "1", "--a", "0", "--b", "1")
    assert code == 0
    rows = [json.loads(line) for line in out.out.splitlines()]
    assert {(r["p"], r["t_mod_6"]): r["dim"] for r in rows if r["dim"]} == {(0, 0): 2, (0, 2): 1, (0, 4): 1}


def test_chart_to_file(tmp_path, capsys):
    out = tmp_path / "b.svg"
    code, _ = run(capsys, "hfpss", "chart", "--scenario", "B", "--format", "svg", "--out", str(out))
    assert code == 0 and out.read_text().startswith("<svg")


def test_comodule_solve_text(capsys):
    code, out = run(capsys, "comodule", "solve", "--format", "ascii", "--a", "1", "--b", "1")
    assert code == 0 and out.out.startswith("(a, b) = (1, 1)")


def test_failed_check_exits_1(monkeypatch, capsys):
    monkeypatch.setitem(cli.SECTIONS, "fgl", lambda: [("fgl.broken", lambda cfg: (False, "forced"))])
    code, out = run(capsys, "fgl", "verify")
    assert code == 1 and json.loads(out.out)["status"] == "fail"


def test_crash_is_reported_as_failure(monkeypatch):
    def boom(cfg):
        raise RuntimeError("no")
    monkeypatch.setitem(cli.SECTIONS, "fgl", lambda: [("fgl.crash", boom)])
    report = cli.run_section("fgl", cli.RunConfig())
    assert not report.ok and "RuntimeError" in report.results[0].detail


def test_run_all_passes():
    report = cli.run_all(cli.RunConfig(params="0,1"))
    assert report.ok, report.lines()
    assert len(report.results) == 20
