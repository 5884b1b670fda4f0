import pytest

from db.connection import dispose_engines, get_db, registry_path
from db.db_operations import add_artifact, create_run, finish_run, get_artifacts_for_run, get_runs, init_db


@pytest.fixture
def registry(tmp_path):
    init_db(str(tmp_path))
    yield str(tmp_path)
    dispose_engines()


def test_registry_lives_in_output_dir(registry, tmp_path):
    assert registry_path(registry) == str(tmp_path / "registry.sqlite")
    assert (tmp_path / "registry.sqlite").exists()


def test_run_lifecycle(registry):
    with get_db(registry) as db:
        run = create_run(db, "tq_headline", 2 ** 64 - 1, "ab" * 32)
        assert run.status == "running"
        finished = finish_run(db, run.run_id, "ok", 0, 0.25, "/tmp/manifest.json")
        assert finished.exit_code == 0
        assert finish_run(db, run.run_id + 100, "ok", 0, 0.1) is None

    with get_db(registry) as db:
        runs = get_runs(db)
        assert len(runs) == 1
        assert runs[0].seed == str(2 ** 64 - 1)
        assert runs[0].status == "ok"
        assert runs[0].manifest_path == "/tmp/manifest.json"


def test_runs_filter_by_scenario(registry):
    with get_db(registry) as db:
        create_run(db, "ising_glauber", 1, "0" * 64)
        create_run(db, "tq_headline", 2, "1" * 64)
        create_run(db, "ising_glauber", 3, "2" * 64)
        assert [r.seed for r in get_runs(db, "ising_glauber")] == ["1", "3"]
        assert len(get_runs(db)) == 3


def test_artifacts_belong_to_their_run(registry):
    with get_db(registry) as db:
        run = create_run(db, "polarization", 7, "f" * 64)
        add_artifact(db, run.run_id, "polarization/histories.csv", "a" * 64, "csv", 120)
        add_artifact(db, run.run_id, "polarization/summary.json", "b" * 64, "json", 80)
        artifacts = get_artifacts_for_run(db, run.run_id)
        assert [a.kind for a in artifacts] == ["csv", "json"]
        assert artifacts[0].run.scenario == "polarization"
