"""
Tests the INI settings layer: defaults, typed getters, overrides and saving.
"""

import pytest

from src.config.settings import Settings
from src.errors import ConfigurationError
from src.training.config import TRAINING_KEYS, TrainConfig


def test_defaults_match_train_config():
    settings = Settings()
    assert TrainConfig.from_settings(settings) == TrainConfig()
    assert set(settings.config.options("Training")) == set(TRAINING_KEYS)
    assert settings.get_out_dir() == "runs"


def test_file_values_override_defaults(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[Training]\nbatch_size = 8\nstyle_mode = embedding\n", encoding="utf-8")
    settings = Settings(str(path))
    assert settings.get_int("Training", "batch_size") == 8
    assert settings.get_int("Training", "epochs") == 40
    assert TrainConfig.from_settings(settings).style_mode == "embedding"


def test_invalid_values_fall_back(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[Training]\nbatch_size = many\ncomponents_enabled = maybe\n", encoding="utf-8")
    settings = Settings(str(path))
    assert settings.get_int("Training", "batch_size", 16) == 16
    assert settings.get_bool("Training", "components_enabled", True) is True
    assert settings.get("Nowhere", "key", "x") == "x"


def test_missing_file_is_a_configuration_error(tmp_path):
    with pytest.raises(ConfigurationError):
        Settings(str(tmp_path / "absent.ini"))


def test_set_and_save(tmp_path):
    settings = Settings()
    settings.set("Training", "components_enabled", False)
    settings.set("Extra", "note", 3)
    path = str(tmp_path / "out" / "saved.ini")
    settings.save(path)

    loaded = Settings(path)
    assert loaded.get("Training", "components_enabled") == "false"
    assert loaded.get_int("Extra", "note") == 3


def test_save_without_path():
    with pytest.raises(ConfigurationError):
        Settings().save()


def test_logging_options(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[Logging]\nlog_level = DEBUG\nmax_log_size_mb = 2\n", encoding="utf-8")
    options = Settings(str(path)).get_logging_options()
    assert options["level"] == "DEBUG"
    assert options["max_bytes"] == 2 * 1024 * 1024
    assert options["log_dir"] is None


def test_output_dir_from_file(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[Output]\nout_dir = elsewhere\n", encoding="utf-8")
    assert Settings(str(path)).get_out_dir() == "elsewhere"
