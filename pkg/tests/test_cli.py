import json

import pytest

from zmcss import cli
from zmcss.config import DEFAULT_CONFIG_TEXT, SCHEMA, ConfigError, load_config, parse_config
from zmcss.fields import Field2D, Grid2D, write_field_csv
from zmcss.report import RunManifest, emit_report, write_report


# -- config -------------------------------------------------------------------

def test_default_text_matches_schema_defaults():
    cfg = parse_config(DEFAULT_CONFIG_TEXT)
    d = cfg.to_dict()
    for sec, keys in SCHEMA.items():
        for key, (kind, default) in keys.items():
            if default is None or key not in d[sec]:
                continue
            val = d[sec][key]
            assert (tuple(val) if kind == "floats" else val) == default, (sec, key)
    assert cfg.p == 1.5 and cfg.potential.a_inf == 1.0


def test_missing_required_keys_are_all_listed():
    with pytest.raises(ConfigError) as exc:
        parse_config("[problem]\n")
    msgs = exc.value.errors
    assert any("'p'" in m for m in msgs) and any("'a_inf'" in m for m in msgs)


def test_p_out_of_range_message():
    with pytest.raises(ConfigError, match=r"p must lie in \(1,2\)"):
        parse_config(DEFAULT_CONFIG_TEXT, {("problem", "p"): 2.5})


def test_unknown_keys_and_sections_and_bad_values():
    text = DEFAULT_CONFIG_TEXT + "\n[extra]\nx = 1\n"
    text = text.replace("sigma = 2.0", "sigma = 2.0\nsigmaa = 1").replace("n = 128", "n = many")
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    errs = exc.value.errors
    assert any("unknown section [extra]" in e for e in errs)
    assert any("'sigmaa'" in e for e in errs)
    assert any("'many'" in e for e in errs)


def test_load_config_errors_name_the_path(tmp_path):
    with pytest.raises(ConfigError, match="nope.cfg"):
        load_config(str(tmp_path / "nope.cfg"))
    f = tmp_path / "run.cfg"
    f.write_text(DEFAULT_CONFIG_TEXT.replace("tol = 1e-5", "tol = 1e-7"))
    assert load_config(str(f)).solver.tol == 1e-7


# -- report -------------------------------------------------------------------

def test_manifest_rejects_unknown_verdicts():
    with pytest.raises(ValueError):
        RunManifest("x", {}, {}, {"a": "maybe"})
    m = RunManifest("x", {}, {}, {"a": "pass", "b": "skipped"})
    assert m.all_pass and not RunManifest("x", {}, {}, {"a": "saturated"}).all_pass


def test_emit_is_canonical_and_handles_nonfinite():
    m = RunManifest("x", {"b": 1, "a": [1.0, 2.5]}, {"v": float("inf"), "w": None}, {"k": "pass"})
    js = emit_report(m, "json")
    data = json.loads(js)
    assert data["results"]["v"] == "inf" and data["timestamp"] is None
    assert js == emit_report(m, "json")
    lines = emit_report(m, "csv").decode().splitlines()
    assert lines[0] == "key,value" and "config.a,1.0;2.5" in lines
    with pytest.raises(ValueError):
        emit_report(m, "xml")


def test_write_report_error_names_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="file"):
        write_report(str(blocker / "r.json"), b"{}")


# -- command line -------------------------------------------------------------

def _run(args, tmp_path, name="r.json"):
    out = tmp_path / name
    code = cli.main(args + ["--report", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_solve_small(tmp_path):
    code, rep = _run(["solve", "--n", "32", "--L", "8", "--field-csv", str(tmp_path / "u.csv")],
                     tmp_path)
    assert code == cli.EXIT_OK
    assert set(rep) == {"command", "config", "results", "verdicts", "version", "timestamp"}
    assert all(v == "pass" for v in rep["verdicts"].values())
    assert (tmp_path / "u.csv").exists()
    # the written field feeds the energy subcommand
    code, en = _run(["energy", "--field", str(tmp_path / "u.csv")], tmp_path, "e.json")
    assert code == cli.EXIT_OK
    assert en["results"]["total"] == pytest.approx(rep["results"]["energy"], rel=1e-12)


def test_solve_is_byte_stable(tmp_path):
    a = cli.main(["solve", "--n", "32", "--L", "8", "--report", str(tmp_path / "a.json")])
    b = cli.main(["solve", "--n", "32", "--L", "8", "--report", str(tmp_path / "b.json")])
    assert a == b == cli.EXIT_OK
    ra = json.loads((tmp_path / "a.json").read_text())
    rb = json.loads((tmp_path / "b.json").read_text())
    ra["results"].pop("elapsed", None)
    rb["results"].pop("elapsed", None)
    assert ra == rb


def test_timestamp_flag(tmp_path):
    code, rep = _run(["check-f", "--timestamp"], tmp_path)
    assert code == cli.EXIT_OK and rep["timestamp"].endswith("Z")


def test_compare_small(tmp_path):
    code, rep = _run(["compare-potentials", "--n", "32", "--L", "8"], tmp_path)
    assert code == cli.EXIT_OK
    assert rep["results"]["m_a_upper"] < rep["results"]["m_inf_upper"]
    code, _ = _run(["compare-potentials", "--n", "32", "--L", "8", "--b", "0"], tmp_path, "z.json")
    assert code == cli.EXIT_NUMERIC


def test_gauge_check(tmp_path):
    code, rep = _run(["gauge-check"], tmp_path)
    assert code == cli.EXIT_OK and rep["results"]["curl_residual"] < 5e-3
    code, _ = _run(["gauge-check", "--curl-tol", "1e-9"], tmp_path, "g.json")
    assert code == cli.EXIT_NUMERIC
    u = Field2D.gaussian(Grid2D(6.0, 64))
    write_field_csv(u, tmp_path / "g.csv")
    code, rep = _run(["gauge-check", "--field", str(tmp_path / "g.csv")], tmp_path, "h.json")
    assert rep["config"]["n"] == 64


def test_check_f_verdicts(tmp_path):
    code, rep = _run(["check-f"], tmp_path)
    assert code == cli.EXIT_OK
    assert set(rep["verdicts"]) == {"f1", "f2", "f2prime", "f3", "f4", "critical_growth"}


def test_tm_probe_saturated_and_alpha_syntax(tmp_path):
    code, rep = _run(["tm-probe", "--alphas", "2pi,20000pi", "--n-list", "4,8"], tmp_path)
    assert rep["verdicts"]["alpha=20000pi"] == "saturated"
    assert rep["verdicts"]["alpha=2pi"] == "pass"
    assert code == cli.EXIT_NUMERIC


@pytest.mark.parametrize("args", [
    ["solve", "--p", "1.0"],
    ["solve", "--n", "100"],
    ["solve", "--bogus"],
    ["nonsense"],
    ["moser", "--p", "2.2"],
    ["energy", "--field", "/nonexistent/u.csv"],
    ["solve", "--config", "/nonexistent/run.cfg"],
])
def test_config_errors_exit_3(args, tmp_path, capsys):
    assert cli.main(args + ["--report", str(tmp_path / "x.json")]) == cli.EXIT_CONFIG


def test_default_config_round_trip(capsys):
    assert cli.main(["default-config"]) == cli.EXIT_OK
    assert capsys.readouterr().out == DEFAULT_CONFIG_TEXT


def test_report_to_stdout(capsys):
    assert cli.main(["moser", "--n-list", "2", "--report", "-"]) == cli.EXIT_OK
    assert json.loads(capsys.readouterr().out)["command"] == "moser"
