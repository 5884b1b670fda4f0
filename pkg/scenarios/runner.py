"""
scenarios/runner.py

Behavior:
    - load_config reads a config document (or a manifest, using its ``config``
      member), applies the precedence flags > QTRAJ_OUTPUT_DIR > file >
      defaults and returns a resolved ScenarioConfig.
    - run_scenario executes one scenario into <output_dir>/<scenario>_seed<seed>/,
      writes manifest.json next to the artifacts and records the run in the
      registry of the output directory.
    - Exit status: 0 success, 2 configuration error, 3 numerical guard.
"""
from __future__ import annotations

import logging
import os
import re
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from db.connection import get_db
from db.db_operations import add_artifact, create_run, finish_run, init_db
from quantum import __version__
from quantum.qcore import ImpossibleOutcome, InvalidInputError, NumericalGuardError
from util.helper import dump_json, read_document, safe_json_parse, sha256_file, sha256_text, write_json

from .config import ConfigError, ScenarioConfig, resolve_config
from .experiments import SCENARIOS, ArtifactSink

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GUARD = 3

OUTPUT_ENV = "QTRAJ_OUTPUT_DIR"
MANIFEST_NAME = "manifest.json"


@dataclass
class RunOutcome:
    exit_code: int
    status: str
    run_dir: str
    manifest_path: str
    artifacts: List[dict] = field(default_factory=list)
    error: Optional[str] = None


def _field_line(raw: str, location: str) -> Optional[int]:
    """1-based line of the first ``"key"`` naming the innermost field of a location."""
    keys = [part for part in location.split(".") if part and not part.isdigit() and not part.startswith("<")]
    if not keys:
        return None
    match = re.search(r'"' + re.escape(keys[-1]) + r'"\s*:', raw)
    return raw.count("\n", 0, match.start()) + 1 if match else None


def format_diagnostics(path: str, raw: str, error: ConfigError) -> List[str]:
    lines = []
    for location, message in error.diagnostics:
        line = _field_line(raw, location)
        where = f"{path}:{line}" if line else path
        lines.append(f"{where}: {location}: {message}")
    return lines


def load_config(path: str, overrides: Optional[Dict[str, Any]] = None) -> ScenarioConfig:
    """
    Read and resolve a run document.

    :param path: config file, or the manifest.json of an earlier run
    :param overrides: CLI values (seed, output_dir, threads, format); None entries are ignored
    :raises DocumentError: unreadable file or JSON syntax error (with line and column)
    :raises ConfigError: invalid fields; each diagnostic carries the file line when it can be found
    """
    raw = read_document(path)
    document = safe_json_parse(raw, path)
    if isinstance(document.get("config"), dict) and "artifacts" in document:
        logger.info("Scenario Runner: %s is a manifest, re-running its config", path)
        document = document["config"]
    overrides = dict(overrides or {})
    if overrides.get("output_dir") is None and os.environ.get(OUTPUT_ENV):
        overrides["output_dir"] = os.environ[OUTPUT_ENV]
    try:
        return resolve_config(document, overrides)
    except ConfigError as exc:
        raise ConfigError(exc.diagnostics, format_diagnostics(path, raw, exc)) from exc


def _artifact_entry(path: str, run_dir: str) -> dict:
    return {
        "path": os.path.relpath(path, run_dir),
        "sha256": sha256_file(path),
        "bytes": os.path.getsize(path),
        "kind": os.path.splitext(path)[1].lstrip("."),
    }


def run_scenario(config: ScenarioConfig) -> RunOutcome:
    """
    Execute one resolved scenario and write its manifest.

    :param config: output of load_config or resolve_config
    :return: RunOutcome with the exit status and the artifact list
    """
    started = datetime.now(timezone.utc)
    clock = time.perf_counter()
    resolved = config.resolved()
    threads = config.threads or os.cpu_count() or 1
    run_dir = os.path.join(config.output_dir, f"{config.scenario}_seed{config.seed}")
    sink = ArtifactSink(run_dir, config.format)

    init_db(config.output_dir)
    with get_db(config.output_dir) as db:
        run_id = create_run(db, config.scenario, config.seed, sha256_text(dump_json(resolved))).run_id
    logger.info("Scenario Runner: run %d, %s with seed %d on %d thread(s)", run_id, config.scenario, config.seed, threads)

    status, exit_code, error = "ok", EXIT_OK, None
    try:
        results = SCENARIOS[config.scenario].run(config.typed_params(), config.seed, threads, sink)
        sink.document("results", results)
    except NumericalGuardError as exc:
        status, exit_code, error = f"guard:{exc.guard}", EXIT_GUARD, str(exc)
        logger.error("Scenario Runner: numerical guard %s tripped: %s", exc.guard, exc)
    except ImpossibleOutcome as exc:
        status, exit_code, error = "guard:impossible_outcome", EXIT_GUARD, str(exc)
        logger.error("Scenario Runner: impossible outcome sampled: %s", exc)
    except InvalidInputError as exc:
        status, exit_code, error = "config_error", EXIT_CONFIG, str(exc)
        logger.error("Scenario Runner: invalid scenario input: %s", exc)
    wall_time = time.perf_counter() - clock

    artifacts = [_artifact_entry(path, run_dir) for path in sink.paths]
    manifest_path = write_json(os.path.join(run_dir, MANIFEST_NAME), {
        "version": __version__,
        "scenario": config.scenario,
        "seed": config.seed,
        "started_at": started.isoformat(),
        "wall_time": wall_time,
        "threads": threads,
        "config": resolved,
        "artifacts": artifacts,
        "status": status,
        "exit_code": exit_code,
        "error": error,
    })

    with get_db(config.output_dir) as db:
        finish_run(db, run_id, status, exit_code, wall_time, manifest_path)
        for entry in artifacts:
            add_artifact(db, run_id, os.path.join(run_dir, entry["path"]), entry["sha256"], entry["kind"], entry["bytes"])
    logger.info("Scenario Runner: run %d finished with status %s in %.2f s, %d artifact(s)",
                run_id, status, wall_time, len(artifacts))
    return RunOutcome(exit_code, status, run_dir, manifest_path, artifacts, error)


def describe_error(exc: Exception) -> List[str]:
    """Diagnostic lines for errors raised while loading a config."""
    return list(exc.lines) if isinstance(exc, ConfigError) else [str(exc)]
