"""
Configuration management for the inkstyle glyph generator.
Handles loading, saving, and accessing configuration settings.
"""

import configparser
import os
from typing import Any, Dict, Optional
from src.config.logger import get_logger
from src.errors import ConfigurationError

logger = get_logger(__name__)


class Settings:
    """Manages application configuration settings."""

    def __init__(self, config_path: Optional[str] = None):
        """
        Initialize settings manager.

        Args:
            config_path: INI file layered over the built-in defaults.
                None keeps the defaults only.
        """
        self.config = configparser.ConfigParser()
        self.config_path = config_path
        self._create_default_config()
        if config_path is not None:
            self._load_config(config_path)

    def _load_config(self, path: str):
        """Layer an INI file over the defaults."""
        if not os.path.exists(path):
            raise ConfigurationError(f"Config file not found: {path}")
        try:
            self.config.read(path, encoding="utf-8")
        except configparser.Error as e:
            raise ConfigurationError(f"Error loading config file {path}: {e}") from e
        logger.info(f"Configuration loaded from: {path}")

    def _create_default_config(self):
        """Populate the built-in defaults."""
        self.config["Data"] = {
            "corpus": "",
            "dictionary": "",
            "source_dir": "",
            "font_path": "",
            "test_count": "1000",
            "skip_missing": "false",
            "workers": "4",
        }

        self.config["Model"] = {
            "styles_count": "7",
            "vocab_size": "517",
            "style_embedding_dim": "128",
            "generator_filters": "64",
            "discriminator_filters": "64",
            "final_dropout": "true",
            "dropout_rate": "0.5",
        }

        # Flat TrainConfig fields
        self.config["Training"] = {
            "batch_size": "16",
            "epochs": "40",
            "lr_initial": "0.001",
            "lr_phase2_decay": "0.5",
            "lr_decay_start": "20",
            "lr_decay_mode": "per_epoch",
            "beta1": "0.5",
            "beta2": "0.999",
            "g_steps_per_d_step": "2",
            "lambda_p": "100",
            "lambda_c": "15",
            "lambda_s": "1",
            "style_mode": "onehot",
            "components_enabled": "true",
            "seed": "0",
        }

        self.config["Logging"] = {
            "log_level": "INFO",
            "log_dir": "",
            "max_log_size_mb": "10",
            "log_backup_count": "5",
        }

        self.config["Output"] = {
            "out_dir": "runs",
        }

    def get(self, section: str, key: str, fallback: Any = None) -> str:
        """
        Get a configuration value.

        Args:
            section: Configuration section name
            key: Configuration key name
            fallback: Default value if key not found

        Returns:
            Configuration value as string
        """
        try:
            return self.config.get(section, key, fallback=fallback)
        except (configparser.NoSectionError, configparser.NoOptionError):
            logger.warning(f"Config key not found: [{section}]{key}, using fallback: {fallback}")
            return fallback

    def get_int(self, section: str, key: str, fallback: int = 0) -> int:
        """Get configuration value as integer."""
        try:
            return self.config.getint(section, key, fallback=fallback)
        except ValueError:
            logger.warning(f"Invalid integer value for [{section}]{key}, using fallback: {fallback}")
            return fallback

    def get_float(self, section: str, key: str, fallback: float = 0.0) -> float:
        """Get configuration value as float."""
        try:
            return self.config.getfloat(section, key, fallback=fallback)
        except ValueError:
            logger.warning(f"Invalid float value for [{section}]{key}, using fallback: {fallback}")
            return fallback

    def get_bool(self, section: str, key: str, fallback: bool = False) -> bool:
        """Get configuration value as boolean."""
        try:
            return self.config.getboolean(section, key, fallback=fallback)
        except ValueError:
            logger.warning(f"Invalid boolean value for [{section}]{key}, using fallback: {fallback}")
            return fallback

    def set(self, section: str, key: str, value: Any):
        """
        Set a configuration value.

        Args:
            section: Configuration section name
            key: Configuration key name
            value: Value to set
        """
        if not self.config.has_section(section):
            self.config.add_section(section)

        if isinstance(value, bool):
            value = "true" if value else "false"
        self.config.set(section, key, str(value))
        logger.debug(f"Config updated: [{section}]{key} = {value}")

    def save(self, path: Optional[str] = None):
        """
        Save the effective configuration.

        Args:
            path: Target file; defaults to the file it was loaded from
        """
        target = path or self.config_path
        if not target:
            raise ConfigurationError("No path given to save configuration")
        os.makedirs(os.path.dirname(os.path.abspath(target)), exist_ok=True)
        with open(target, "w", encoding="utf-8") as f:
            self.config.write(f)
        logger.info(f"Configuration saved to {target}")

    # Convenience methods for common settings

    def get_logging_options(self) -> Dict[str, Any]:
        """Keyword arguments for configure_logging()."""
        return {
            "log_dir": self.get("Logging", "log_dir", "") or None,
            "level": self.get("Logging", "log_level", "INFO"),
            "max_bytes": self.get_int("Logging", "max_log_size_mb", 10) * 1024 * 1024,
            "backup_count": self.get_int("Logging", "log_backup_count", 5),
        }

    def get_out_dir(self) -> str:
        """Get the run output directory."""
        return self.get("Output", "out_dir", "runs")
