import math
from pathlib import Path

import pytest

from src.config import (DEFAULTS, ConfigNotFoundError, ConfigParseError, ConfigValidationError, ExperimentConfig,
                        load_config)

EXAMPLE_CONFIG = Path(__file__).resolve().parent.parent / "config.example.toml"


def write(tmp_path: Path, text: str) -> str:
    path = tmp_path / "config.toml"
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_defaults_without_file():
    conf = load_config()
    assert conf.values == DEFAULTS

def test_empty_file_gives_reference_setup(tmp_path):
    conf = load_config(write(tmp_path, ""))
    cfg = conf.system_config()

    assert cfg.num_antennas == 256
    assert cfg.carrier_freq == 100e9
    assert cfg.coherence_param == 1.2
    assert cfg.gain_threshold == pytest.approx(1 / math.sqrt(2))
    assert cfg.distance_samples == 6
    assert cfg.num_candidates == 3
    assert conf["trials"] == 1000
    assert cfg.ref_gain == pytest.approx(10 ** -7.2, rel=1e-12)
    assert cfg.noise_power == pytest.approx(1e-10, rel=1e-12)
    assert cfg.tx_power == pytest.approx(1.0, rel=1e-12)

def test_example_config_matches_defaults():
    assert load_config(str(EXAMPLE_CONFIG)).values == DEFAULTS

def test_values_are_read(tmp_path):
    conf = load_config(write(tmp_path, 'num_antennas = 64\ndistances_m = [1, 2.5]\nschemes = ["two-phase-k1"]\n'))
    assert conf["num_antennas"] == 64
    assert conf["distances_m"] == [1.0, 2.5]
    assert conf["schemes"] == ["two-phase-k1"]

def test_missing_file():
    with pytest.raises(ConfigNotFoundError):
        load_config("does/not/exist.toml")

def test_parse_error_names_position(tmp_path):
    with pytest.raises(ConfigParseError, match="line"):
        load_config(write(tmp_path, "num_antennas = = 3\n"))

@pytest.mark.parametrize("text,field", [
    ("num_antennas = -4\n", "num_antennas"),
    ("nmu_antennas = 4\n", "nmu_antennas"),
    ("trials = 1.5\n", "trials"),
    ("gain_threshold = 1.0\n", "gain_threshold"),
    ("num_candidates = 300\n", "num_candidates"),
    ('schemes = ["two-phase", "hierarchical"]\n', "schemes"),
    ('sweep = "angle"\n', "sweep"),
    ("single_theta = 2.0\n", "single_theta"),
    ("distance_samples_per_angle = [6, 6]\n", "distance_samples_per_angle"),
    ("stdout_debug = 1\n", "stdout_debug"),
    ("[logging]\nstdout_debug = true\n", "logging"),
])
def test_validation_errors_name_the_field(tmp_path, text, field):
    path = write(tmp_path, text)
    with pytest.raises(ConfigValidationError) as excinfo:
        load_config(path)

    assert excinfo.value.field == field
    assert path in str(excinfo.value)

def test_override_ignores_unset_flags():
    conf = ExperimentConfig().override(seed=7, trials=None, output_dir="out")
    assert conf["seed"] == 7
    assert conf["trials"] == DEFAULTS["trials"]
    assert conf["output_dir"] == "out"

    with pytest.raises(ConfigValidationError):
        ExperimentConfig().override(trials=0)

def test_config_hash():
    assert ExperimentConfig().config_hash() == ExperimentConfig().config_hash()
    assert ExperimentConfig().config_hash() != ExperimentConfig({"seed": 1}).config_hash()
    assert len(ExperimentConfig().config_hash()) == 64

def test_logging_options_shape():
    options = ExperimentConfig({"stdout_debug": True}).logging_options()
    assert options == {"logging": {"stdout_debug": True, "log_to_file": False, "file_debug": False, "journal_debug": False}}
