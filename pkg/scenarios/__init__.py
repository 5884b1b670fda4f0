from .config import PARAMS_MODELS, ConfigError, ScenarioConfig, resolve_config
from .experiments import SCENARIOS, ArtifactSink
from .runner import EXIT_CONFIG, EXIT_GUARD, EXIT_OK, RunOutcome, load_config, run_scenario

__all__ = [
    "ArtifactSink",
    "ConfigError",
    "EXIT_CONFIG",
    "EXIT_GUARD",
    "EXIT_OK",
    "PARAMS_MODELS",
    "RunOutcome",
    "SCENARIOS",
    "ScenarioConfig",
    "load_config",
    "resolve_config",
    "run_scenario",
]
