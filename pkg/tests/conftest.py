import math

import pytest

from src.channel import SystemConfig
from src.codebooks import build_far_codebook, build_polar_codebook


def make_config(num_antennas: int = 256, **changes) -> SystemConfig:
    """Reference setup: 100 GHz, beta = -72 dB, P = 30 dBm, sigma^2 = -70 dBm, alpha = 1.2, S = 6, K = 3."""

    args = dict(
        num_antennas=num_antennas,
        carrier_freq=100e9,
        ref_gain=10 ** (-72 / 10),
        tx_power=1.0,
        noise_power=1e-10,
        coherence_param=1.2,
        gain_threshold=1 / math.sqrt(2),
        num_candidates=3,
        distance_samples=6,
    )
    args.update(changes)
    return SystemConfig(**args)


@pytest.fixture(scope="session")
def reference_cfg():
    return make_config()

@pytest.fixture(scope="session")
def reference_codebooks(reference_cfg):
    return build_far_codebook(reference_cfg), build_polar_codebook(reference_cfg)

@pytest.fixture(scope="session")
def small_cfg():
    return make_config(64)

@pytest.fixture(scope="session")
def small_codebooks(small_cfg):
    return build_far_codebook(small_cfg), build_polar_codebook(small_cfg)
