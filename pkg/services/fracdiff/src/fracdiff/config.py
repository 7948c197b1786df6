"""
Configuration management for the fracdiff service.

- Loads settings from a YAML file
- Applies FRACDIFF_* environment overrides (a ``.env`` file is honoured)
- Builds typed solver settings for the numerical modules
"""

import os
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv

from fracdiff.laplace import InversionConfig
from fracdiff.specfun import EvalConfig, SeriesConfig
from fracdiff.stefan import NewtonConfig
from fracdiff.volterra import DEFAULT_CONDITION_LIMIT

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = "config/default.yaml"

ENV_MAPPING = {
    "FRACDIFF_SERIES_MAX_TERMS": "series_max_terms",
    "FRACDIFF_SERIES_REL_TOL": "series_rel_tol",
    "FRACDIFF_SERIES_ABS_TOL": "series_abs_tol",
    "FRACDIFF_SERIES_SWITCH": "series_switch",
    "FRACDIFF_CANCELLATION_LIMIT": "cancellation_limit",
    "FRACDIFF_SERIES_ACCURACY": "series_accuracy",
    "FRACDIFF_NODE_COUNT": "node_count",
    "FRACDIFF_CONTOUR_SCALE": "contour_scale",
    "FRACDIFF_RADIUS_CAP": "radius_cap",
    "FRACDIFF_PRECISION_GUARD": "precision_guard",
    "FRACDIFF_CONDITION_LIMIT": "condition_limit",
    "FRACDIFF_NEWTON_TOL": "newton_tol",
    "FRACDIFF_NEWTON_MAX_ITER": "newton_max_iter",
    "FRACDIFF_STARTUP_SUBSTEPS": "startup_substeps",
    "FRACDIFF_THREADS": "threads",
    "FRACDIFF_CONSOLE_LOGS": "console_logs",
    "FRACDIFF_LOG_LEVEL": "log_level",
    "FRACDIFF_LOG_DIR": "log_dir",
}

FLOAT_KEYS = {
    "series_rel_tol",
    "series_abs_tol",
    "series_switch",
    "cancellation_limit",
    "series_accuracy",
    "contour_scale",
    "radius_cap",
    "precision_guard",
    "condition_limit",
    "newton_tol",
}
INT_KEYS = {"series_max_terms", "node_count", "newton_max_iter", "startup_substeps", "threads"}
BOOL_KEYS = {"console_logs"}


class ConfigManager:
    """
    Service configuration: a YAML file overlaid with environment variables.
    """

    def __init__(self, config_path: str = DEFAULT_CONFIG_PATH):
        """
        Args:
            config_path (str): Path to the YAML configuration file.
        """
        self.config_path = config_path
        self.config: Dict[str, Any] = {}

        self._load_config_from_file()

        load_dotenv()
        self._load_from_env()

        logger.info(f"Configuration loaded from {config_path}")

    def _load_config_from_file(self) -> None:
        try:
            with open(self.config_path, "r") as config_file:
                self.config = yaml.safe_load(config_file) or {}
            logger.debug(f"Loaded configuration from {self.config_path}")
        except FileNotFoundError:
            logger.warning(f"Configuration file not found: {self.config_path}")
            self.config = {}
        except yaml.YAMLError as e:
            logger.error(f"Error parsing configuration file: {e}")
            self.config = {}

    def _load_from_env(self) -> None:
        for env_var, config_key in ENV_MAPPING.items():
            if env_var not in os.environ:
                continue
            value = os.environ[env_var]

            if config_key in FLOAT_KEYS:
                try:
                    self.config[config_key] = float(value)
                except ValueError:
                    logger.error(f"Invalid float value for {env_var}: {value}")
                    continue
            elif config_key in INT_KEYS:
                try:
                    self.config[config_key] = int(value)
                except ValueError:
                    logger.error(f"Invalid integer value for {env_var}: {value}")
                    continue
            elif config_key in BOOL_KEYS:
                self.config[config_key] = value.lower() in ["true", "1", "yes", "y", "on"]
            else:
                self.config[config_key] = value

            logger.debug(f"Overriding {config_key} from environment variable {env_var}")

    def get(self, key: str, default: Any = None) -> Any:
        return self.config.get(key, default)

    def set(self, key: str, value: Any) -> None:
        self.config[key] = value
        logger.debug(f"Set configuration {key} to {value}")

    def get_all(self) -> Dict[str, Any]:
        """
        Returns:
            Dict[str, Any]: A copy of the whole configuration.
        """
        return self.config.copy()

    def save(self, path: Optional[str] = None) -> None:
        """
        Write the current configuration as YAML.

        Args:
            path (Optional[str]): Target file; defaults to the file it was loaded from.
        """
        save_path = path or self.config_path
        try:
            with open(save_path, "w") as file:
                yaml.dump(self.config, file, default_flow_style=False)
            logger.info(f"Configuration saved to {save_path}")
        except OSError as e:
            logger.error(f"Error saving configuration to {save_path}: {e}")


@dataclass(frozen=True)
class SolverSettings:
    """Typed numerical settings shared by the CLI and the verification suites."""

    eval: EvalConfig = field(default_factory=EvalConfig)
    condition_limit: float = DEFAULT_CONDITION_LIMIT
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    threads: int = 1


def solver_settings(config: Dict[str, Any]) -> SolverSettings:
    """
    Build SolverSettings from a configuration dictionary; missing keys keep their defaults.

    Raises:
        DomainError: a value is out of range.
    """
    series_defaults = SeriesConfig()
    series = SeriesConfig(
        max_terms=int(config.get("series_max_terms", series_defaults.max_terms)),
        rel_tol=float(config.get("series_rel_tol", series_defaults.rel_tol)),
        abs_tol=float(config.get("series_abs_tol", series_defaults.abs_tol)),
        switch_argument=float(config.get("series_switch", series_defaults.switch_argument)),
        cancellation_limit=float(config.get("cancellation_limit", series_defaults.cancellation_limit)),
        accuracy_target=float(config.get("series_accuracy", series_defaults.accuracy_target)),
    )
    inversion_defaults = InversionConfig()
    inversion = InversionConfig(
        node_count=int(config.get("node_count", inversion_defaults.node_count)),
        contour_scale=float(config.get("contour_scale", inversion_defaults.contour_scale)),
        radius_cap=float(config.get("radius_cap", inversion_defaults.radius_cap)),
        working_precision_guard=float(config.get("precision_guard", inversion_defaults.working_precision_guard)),
    )
    newton_defaults = NewtonConfig()
    newton = NewtonConfig(
        tol=float(config.get("newton_tol", newton_defaults.tol)),
        max_iter=int(config.get("newton_max_iter", newton_defaults.max_iter)),
        damping=float(config.get("newton_damping", newton_defaults.damping)),
        startup_substeps=int(config.get("startup_substeps", newton_defaults.startup_substeps)),
    )
    threads = max(1, int(config.get("threads", 1)))
    return SolverSettings(
        eval=EvalConfig(series=series, inversion=inversion),
        condition_limit=float(config.get("condition_limit", DEFAULT_CONDITION_LIMIT)),
        newton=newton,
        threads=threads,
    )
