import numpy as np
import pytest

from src.main import run_cli
from src.results import read_csv


def small_config(tmp_path, extra: str = "") -> str:
    path = tmp_path / "small.toml"
    path.write_text("num_antennas = 16\ntrials = 3\n" + extra, encoding="utf-8")
    return str(path)


def test_codebook_polar_defaults(tmp_path):
    assert run_cli(["codebook", "--kind", "polar", "--seed", "4", "--out", str(tmp_path)]) == 0

    frame, header = read_csv(tmp_path / "codebook_polar.csv")
    assert len(frame) == 1536
    assert header["command"] == "codebook"
    assert header["seed"] == "4"
    assert len(header["config_hash"]) == 64
    assert frame.columns[:4].tolist() == ["angle_index", "distance_index", "theta", "distance_m"]

def test_codebook_far(tmp_path):
    assert run_cli(["codebook", "--kind", "far", "--config", small_config(tmp_path), "--out", str(tmp_path)]) == 0

    frame, header = read_csv(tmp_path / "codebook_far.csv")
    assert "config_hash" in header
    assert len(frame) == 16
    assert np.isinf(frame["distance_m"]).all()

def test_sweep_distance_defaults(tmp_path):
    assert run_cli(["sweep-distance", "--trials", "2", "--out", str(tmp_path)]) == 0

    frame, header = read_csv(tmp_path / "results.csv")
    assert sorted(set(frame["sweep_value"])) == [3.0 + 10 * i for i in range(11)]
    assert set(frame["scheme"]) == {"perfect-csi", "exhaustive", "two-phase", "far-field"}
    assert len(frame) == 44
    assert header["seed"] == "0"
    assert len(header["config_hash"]) == 64
    assert (tmp_path / "success_rate.svg").exists()
    assert (tmp_path / "rate.svg").exists()

def test_sweep_snr_with_range_flag(tmp_path):
    argv = ["sweep-snr", "--config", small_config(tmp_path), "--snr-points", "0:10:5", "--schemes", "two-phase-k1,ls-estimation",
            "--out", str(tmp_path)]
    assert run_cli(argv) == 0

    frame, _ = read_csv(tmp_path / "results.csv")
    assert sorted(set(frame["sweep_value"])) == [0.0, 5.0, 10.0]
    assert set(frame["scheme"]) == {"two-phase-k1", "ls-estimation"}

def test_sweeps_are_repeatable(tmp_path):
    argv = ["sweep-distance", "--config", small_config(tmp_path), "--distances", "1,5", "--seed", "3", "--out", str(tmp_path)]

    assert run_cli(argv) == 0
    first = (tmp_path / "results.csv").read_bytes()
    assert run_cli(argv) == 0
    assert (tmp_path / "results.csv").read_bytes() == first

def test_single_is_repeatable(tmp_path):
    argv = ["single", "--theta", "0.6", "--r", "5", "--seed", "7", "--out", str(tmp_path)]

    assert run_cli(argv) == 0
    single = (tmp_path / "single.csv").read_bytes()
    pilots = (tmp_path / "pilots.csv").read_bytes()

    assert run_cli(argv) == 0
    assert (tmp_path / "single.csv").read_bytes() == single
    assert (tmp_path / "pilots.csv").read_bytes() == pilots

def test_single_outputs(tmp_path):
    assert run_cli(["single", "--config", small_config(tmp_path), "--theta", "-0.2", "--r", "0.3", "--out", str(tmp_path)]) == 0

    frame, header = read_csv(tmp_path / "single.csv")
    assert header["command"] == "single"
    assert set(frame["scheme"]) == {"perfect-csi", "exhaustive", "two-phase", "two-phase-universal", "far-field", "ls-estimation"}
    assert frame.set_index("scheme").loc["perfect-csi", "pilots"] == 0
    assert frame.set_index("scheme").loc["exhaustive", "pilots"] == 96

    pilots, _ = read_csv(tmp_path / "pilots.csv")
    assert pilots.columns.tolist() == ["scheme", "phase", "step", "angle_index", "distance_index", "power"]
    assert len(pilots[pilots["scheme"] == "exhaustive"]) == 96
    assert set(pilots[pilots["scheme"] == "two-phase"]["phase"]) == {"angle", "distance"}

def test_beamgain(tmp_path):
    argv = ["beamgain", "--points", "0.4:1,0.4:100", "--resolution", "512", "--out", str(tmp_path)]
    assert run_cli(argv) == 0

    frame, _ = read_csv(tmp_path / "beamgain.csv")
    assert frame.columns.tolist() == ["omega", "theta0.4_r1m", "theta0.4_r100m"]
    assert len(frame) == 512
    assert frame["theta0.4_r100m"].max() > frame["theta0.4_r1m"].max()
    assert (tmp_path / "beamgain.svg").exists()

def test_run_follows_sweep_key(tmp_path):
    config = small_config(tmp_path, 'sweep = "single"\n')
    assert run_cli(["run", "--config", config, "--out", str(tmp_path)]) == 0
    assert (tmp_path / "single.csv").exists()

def test_codebook_import(tmp_path):
    assert run_cli(["codebook", "--config", small_config(tmp_path), "--out", str(tmp_path)]) == 0

    config = small_config(tmp_path, f'codebook_import = "{(tmp_path / "codebook_polar.csv").as_posix()}"\n')
    assert run_cli(["sweep-distance", "--config", config, "--distances", "2", "--out", str(tmp_path / "run")]) == 0
    frame, _ = read_csv(tmp_path / "run" / "results.csv")
    assert set(frame["overhead"][frame["scheme"] == "exhaustive"]) == {96}

def test_codebook_import_mismatch_fails(tmp_path):
    assert run_cli(["codebook", "--config", small_config(tmp_path), "--out", str(tmp_path)]) == 0

    config = tmp_path / "big.toml"
    config.write_text(f'num_antennas = 32\ncodebook_import = "{(tmp_path / "codebook_polar.csv").as_posix()}"\n', encoding="utf-8")
    assert run_cli(["sweep-distance", "--config", str(config), "--trials", "1", "--out", str(tmp_path / "run")]) == 1

@pytest.mark.parametrize("argv", [
    ["sweep-distance", "--bogus"],
    ["codebook", "--kind", "spherical"],
    ["sweep-snr", "--snr-points", "a,b"],
    ["beamgain", "--points", "0.4"],
    [],
])
def test_usage_errors_exit_2(argv):
    assert run_cli(argv) == 2

def test_help_exits_0():
    assert run_cli(["--help"]) == 0

@pytest.mark.parametrize("argv", [
    ["sweep-distance", "--config", "does/not/exist.toml"],
    ["sweep-distance", "--schemes", "hierarchical"],
    ["sweep-distance", "--trials", "0"],
    ["single", "--theta", "1.5"],
    ["beamgain", "--resolution", "1"],
])
def test_runtime_errors_exit_1(tmp_path, argv):
    assert run_cli(argv + ["--out", str(tmp_path)]) == 1
