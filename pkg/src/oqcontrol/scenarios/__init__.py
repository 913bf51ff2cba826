"""Configuration-driven scenario runs."""

from .catalog import CATALOG, SCENARIO_IDS, list_scenarios
from .config import SchemaError, ScenarioConfig, default_config, load_config
from .runner import RunRecord, run_scenario
from .verify import RunFilesError, verify_run
