import json
from pathlib import Path

import jsonschema
import pytest
from click.testing import CliRunner

from syntomo.cli import load_config, load_schema, main, parse_config, render_table, validate_report, write_atomic
from syntomo.errors import ConfigError

ROOT = Path(__file__).resolve().parents[1]
DESK_A = str(ROOT / "configs" / "desk_a.toml")


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(main, list(args), catch_exceptions=False)


def write(tmp_path, text, name="cfg.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_shipped_configs_parse():
    for path in sorted((ROOT / "configs").glob("*.toml")):
        rc = load_config(path)
        assert rc.pipeline.profile in ("A", "B")


def test_unknown_key_is_rejected():
    with pytest.raises(ConfigError, match="colour"):
        parse_config({"profile": {"name": "A", "colour": 1}})
    with pytest.raises(ConfigError, match="extras"):
        parse_config({"profile": {"name": "A"}, "extras": {}})


def test_type_errors_name_the_field():
    with pytest.raises(ConfigError, match=r"\[profile\]\.n"):
        parse_config({"profile": {"name": "A", "n": "four"}})
    with pytest.raises(ConfigError, match=r"\[run\]\.format"):
        parse_config({"profile": {"name": "A"}, "run": {"format": "xml"}})


def test_malformed_toml_exits_2(runner, tmp_path):
    cfg = write(tmp_path, "[profile\nname = 'A'\n")
    res = invoke(runner, "run", "--config", cfg, "--suite", "homology")
    assert res.exit_code == 2
    assert "malformed TOML" in res.output


def test_unknown_key_exits_2(runner, tmp_path):
    cfg = write(tmp_path, "[profile]\nname = 'A'\nprime = 3\n")
    res = invoke(runner, "run", "--config", cfg, "--suite", "homology")
    assert res.exit_code == 2
    assert "prime" in res.output


def test_missing_config_file_exits_2(runner, tmp_path):
    res = invoke(runner, "run", "--config", str(tmp_path / "nope.toml"))
    assert res.exit_code == 2


def test_homology_suite_passes(runner):
    res = invoke(runner, "run", "--config", DESK_A, "--suite", "homology")
    assert res.exit_code == 0
    report = json.loads(res.output)
    validate_report(report)
    assert report["passed"] and all(c["passed"] for c in report["checks"])


def test_output_is_byte_identical_across_runs_and_threads(runner, tmp_path):
    outs = []
    for threads in ("1", "1", "4"):
        path = tmp_path / f"r{len(outs)}.json"
        res = invoke(runner, "run", "--config", DESK_A, "--suite", "rings", "--threads", threads,
                     "--seed", "5", "--out", str(path))
        assert res.exit_code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_seed_changes_samples_but_not_verdict(runner):
    a = invoke(runner, "run", "--config", DESK_A, "--suite", "rings", "--seed", "1")
    b = invoke(runner, "run", "--config", DESK_A, "--suite", "rings", "--seed", "2")
    assert a.exit_code == b.exit_code == 0
    assert json.loads(a.output)["seed"] == 1 and json.loads(b.output)["seed"] == 2


def test_cohomology_table_lists_degrees_ascending(runner):
    res = invoke(runner, "cohomology", "--config", DESK_A, "--format", "table", "--no-stability")
    assert res.exit_code == 0
    degs = [int(line.split(":")[0].strip()[2:]) for line in res.output.splitlines()
            if line.strip().startswith("H^")]
    assert degs == sorted(degs) and degs


def test_cohomology_json_matches_schema(runner):
    res = invoke(runner, "cohomology", "--config", DESK_A, "--complex", "syn", "--complex", "hk", "--deco", "PD")
    assert res.exit_code == 0
    report = json.loads(res.output)
    validate_report(report)
    names = [c["name"] for c in report["complexes"]]
    assert names == ["syn_PD", "hk_PD"]


def test_cohomology_edge_certificate(runner):
    res = invoke(runner, "cohomology", "--config", DESK_A, "--edge", "phi_to_psi", "--no-stability")
    assert res.exit_code == 0
    report = json.loads(res.output)
    assert report["edges"][0]["name"] == "phi_to_psi"


def test_herr_and_compare_need_profile_b(runner):
    assert invoke(runner, "herr", "--config", DESK_A).exit_code == 2
    assert invoke(runner, "compare", "--config", DESK_A).exit_code == 2


def test_solve_implicit_square_root(runner):
    res = invoke(runner, "solve-implicit", "--coeffs", "1,0,-8", "--p", "7", "--digits", "4", "--start", "1")
    assert res.exit_code == 0
    result = json.loads(res.output)["result"]
    assert (result["value"] ** 2 - 8) % 7**4 == 0


def test_solve_implicit_bad_start_exits_1(runner):
    res = invoke(runner, "solve-implicit", "--coeffs", "1,0,-8", "--p", "7", "--start", "2")
    assert res.exit_code == 1
    assert json.loads(res.output)["passed"] is False


def test_solve_implicit_bad_input_exits_2(runner):
    assert invoke(runner, "solve-implicit", "--coeffs", "x", "--p", "7", "--start", "1").exit_code == 2
    assert invoke(runner, "solve-implicit", "--coeffs", "1,0,-8", "--p", "8", "--start", "1").exit_code == 2


def test_schemas_are_valid_documents():
    for name in ("report", "complex", "cohomology"):
        jsonschema.Draft202012Validator.check_schema(load_schema(name))


def test_invalid_report_is_refused():
    with pytest.raises(jsonschema.ValidationError):
        validate_report({"command": "run"})


def test_table_renderer_marks_failures():
    report = {"command": "run", "suite": "x", "seed": 0, "config": None, "plan": None, "complexes": [],
              "edges": [], "stability": {"M": None, "2M matched": None, "entries": []},
              "checks": [{"name": "a", "passed": False, "measured": {}}], "skipped": ["b"],
              "result": None, "passed": False}
    text = render_table(report)
    assert "FAIL a" in text and "SKIP b" in text


def test_atomic_write_replaces_file(tmp_path):
    path = tmp_path / "r.json"
    path.write_text("old")
    write_atomic(path, "new")
    assert path.read_text() == "new"
    assert [p.name for p in tmp_path.iterdir()] == ["r.json"]
