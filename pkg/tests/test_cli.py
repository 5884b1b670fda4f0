import json
import os

import pytest

import main
from db.connection import dispose_engines
from quantum.qcore import InvalidInputError, StepTooLarge
from quantum.statmech.constants import HIGH_TEMPERATURE, LOW_TEMPERATURE
from scenarios import EXIT_CONFIG, EXIT_GUARD, EXIT_OK, SCENARIOS, ConfigError, load_config, resolve_config, run_scenario
from scenarios.experiments import Scenario

SMALL_POLARIZATION = {"scenario": "polarization", "seed": 11,
                      "params": {"epsilon": 0.1, "trajectories": 200, "kept": 1}}


@pytest.fixture(autouse=True)
def _registry_cleanup():
    yield
    dispose_engines()


def _write(path, document) -> str:
    path.write_text(json.dumps(document, indent=2), encoding="utf-8")
    return str(path)


def _hashes(manifest_path: str) -> dict:
    with open(manifest_path, encoding="utf-8") as handle:
        manifest = json.load(handle)
    return {entry["path"]: entry["sha256"] for entry in manifest["artifacts"]}


# ---------- Config resolution ----------
def test_defaults_are_filled_in():
    config = resolve_config({"scenario": "tq_headline"})
    assert config.seed == 0
    assert config.format == "both"
    assert config.params["t_c_days"] == 100.0
    assert resolve_config({"scenario": "ising"}).params["temperatures"] == [LOW_TEMPERATURE, HIGH_TEMPERATURE]


def test_unknown_keys_are_reported_with_location():
    with pytest.raises(ConfigError) as info:
        resolve_config({"scenario": "ising", "params": {"L": 8, "temprature": 2.0}})
    assert info.value.diagnostics[0][0] == "params.temprature"
    with pytest.raises(ConfigError):
        resolve_config({"scenario": "ising", "verbose": True})
    with pytest.raises(ConfigError):
        resolve_config({"scenario": "no_such_scenario"})


def test_cross_field_checks():
    with pytest.raises(ConfigError):
        resolve_config({"scenario": "thermalization", "params": {"d_mc": 100, "sector_dims": [50, 40]}})
    with pytest.raises(ConfigError):
        resolve_config({"scenario": "polarization", "seed": 2 ** 64})


def test_flags_beat_environment_beat_file(tmp_path, monkeypatch):
    path = _write(tmp_path / "config.json", {"scenario": "tq_headline", "output_dir": "from_file"})
    assert load_config(path).output_dir == "from_file"
    monkeypatch.setenv("QTRAJ_OUTPUT_DIR", "from_env")
    assert load_config(path).output_dir == "from_env"
    assert load_config(path, {"output_dir": "from_flag", "seed": None}).output_dir == "from_flag"


def test_diagnostics_point_at_the_file_line(tmp_path):
    path = _write(tmp_path / "bad.json", {"scenario": "ising", "params": {"L": 1}})
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert info.value.lines[0].startswith(f"{path}:")
    assert "params.L" in info.value.lines[0]


# ---------- Runs ----------
def test_run_writes_manifest_and_registry(tmp_path):
    config = resolve_config({"scenario": "tq_headline", "output_dir": str(tmp_path)})
    outcome = run_scenario(config)
    assert outcome.exit_code == EXIT_OK
    with open(outcome.manifest_path, encoding="utf-8") as handle:
        manifest = json.load(handle)
    assert manifest["status"] == "ok"
    assert manifest["config"]["params"]["radius_m"] == 1.4e5
    assert {entry["path"] for entry in manifest["artifacts"]} == {"headline.csv", "headline.json", "results.json"}
    with open(os.path.join(outcome.run_dir, "results.json"), encoding="utf-8") as handle:
        assert json.load(handle)["t_q_years"] == pytest.approx(24.1, abs=0.1)


def test_same_seed_gives_identical_artifacts(tmp_path):
    first = run_scenario(resolve_config({**SMALL_POLARIZATION, "output_dir": str(tmp_path / "a"), "threads": 1}))
    second = run_scenario(resolve_config({**SMALL_POLARIZATION, "output_dir": str(tmp_path / "b"), "threads": 3}))
    assert first.exit_code == second.exit_code == EXIT_OK
    assert _hashes(first.manifest_path) == _hashes(second.manifest_path)


def test_manifest_reruns_its_config(tmp_path):
    first = run_scenario(resolve_config({**SMALL_POLARIZATION, "output_dir": str(tmp_path / "a")}))
    config = load_config(first.manifest_path, {"output_dir": str(tmp_path / "b")})
    assert config.params == resolve_config(SMALL_POLARIZATION).params
    assert _hashes(run_scenario(config).manifest_path) == _hashes(first.manifest_path)


def test_numerical_guard_exits_with_three(tmp_path, monkeypatch):
    def overflow(params, seed, threads, sink):
        raise StepTooLarge("jump probability 1.2 at step 4", probability=1.2, step=4)

    monkeypatch.setitem(SCENARIOS, "tq_headline", Scenario(overflow, "always overflows"))
    outcome = run_scenario(resolve_config({"scenario": "tq_headline", "output_dir": str(tmp_path)}))
    assert outcome.exit_code == EXIT_GUARD
    assert outcome.status == "guard:step_too_large"
    assert os.path.exists(outcome.manifest_path)


def test_invalid_scenario_input_exits_with_two(tmp_path, monkeypatch):
    def refuse(params, seed, threads, sink):
        raise InvalidInputError("state of dimension 3 does not match the operators")

    monkeypatch.setitem(SCENARIOS, "tq_headline", Scenario(refuse, "always refuses"))
    outcome = run_scenario(resolve_config({"scenario": "tq_headline", "output_dir": str(tmp_path)}))
    assert outcome.exit_code == EXIT_CONFIG
    assert outcome.status == "config_error"


# ---------- Command line ----------
def test_cli_run_validate_and_history(tmp_path, capsys):
    path = _write(tmp_path / "headline.json", {"scenario": "tq_headline"})
    output = str(tmp_path / "out")
    assert main.main(["-q", "run", path, "--output", output, "--seed", "5", "--format", "csv"]) == EXIT_OK
    printed = capsys.readouterr().out.split()
    assert printed[-1].endswith(os.path.join("tq_headline_seed5", "manifest.json"))
    assert any(line.endswith("headline.csv") for line in printed)

    assert main.main(["-q", "validate", path]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["params"]["mass_kg"] == 1e19

    assert main.main(["-q", "history", "--output", output]) == EXIT_OK
    row = capsys.readouterr().out.strip().split("\t")
    assert row[1:4] == ["tq_headline", "5", "ok"]


def test_cli_reports_config_errors(tmp_path, capsys):
    path = _write(tmp_path / "bad.json", {"scenario": "ising", "params": {"sweeps": 0}})
    assert main.main(["-q", "run", path, "--output", str(tmp_path)]) == EXIT_CONFIG
    assert "params.sweeps" in capsys.readouterr().err
    broken = tmp_path / "broken.json"
    broken.write_text('{"scenario": "ising",\n  "seed": }', encoding="utf-8")
    assert main.main(["-q", "validate", str(broken)]) == EXIT_CONFIG
    assert f"{broken}:2:" in capsys.readouterr().err


def test_cli_lists_every_scenario(capsys):
    assert main.main(["list-scenarios"]) == EXIT_OK
    names = [line.split("\t")[0] for line in capsys.readouterr().out.strip().splitlines()]
    assert len(names) == 11
    assert {"polarization", "ehrenfest_sweep", "thermalization", "modal_toy"} <= set(names)
