import math
from typing import Optional

import numpy as np

from ..channel import ChannelVector, SystemConfig
from ..codebooks import FarFieldCodebook
from .training_scheme import TrainingOutcome, TrainingScheme


def ls_estimate(
        channel: ChannelVector,
        far_codebook: FarFieldCodebook,
        cfg: SystemConfig,
        rng: np.random.Generator
    ) -> np.ndarray:
    """
    Least-squares estimate of the channel row from N downlink pilots sent through the
    far-field codebook. With S = sqrt(P) [w_1 ... w_N] the observations are y = h^H S + z,
    solved as S^T (h^H)^T = y^T.
    """

    pilot_matrix = math.sqrt(cfg.tx_power) * far_codebook.codewords.T # column i is the i-th pilot beam
    noise = rng.standard_normal((2, pilot_matrix.shape[1])) * math.sqrt(cfg.noise_power / 2)
    observed = channel.row @ pilot_matrix + (noise[0] + 1j * noise[1])

    estimate, *_ = np.linalg.lstsq(pilot_matrix.T, observed, rcond=None)
    return estimate

def phase_only_beamformer(row: np.ndarray) -> np.ndarray:
    """Unit-modulus beamformer matching the phases of conj(row), as analog phase shifters can."""

    return np.exp(1j * np.angle(np.conj(row))) / math.sqrt(len(row))


class LSChannelEstimation(TrainingScheme):
    """Channel estimation baseline: LS estimate from N pilots, then phase-only beamforming."""

    name = "ls-estimation"

    def train(self, channel: ChannelVector, rng: np.random.Generator) -> TrainingOutcome:
        estimate = ls_estimate(channel, self.far_codebook, self.cfg, rng)
        beamformer = phase_only_beamformer(estimate)

        selected = self.nearest_codeword(beamformer) if self.polar_codebook is not None else None
        return TrainingOutcome(
            selected=selected,
            pilots_used=len(self.far_codebook),
            beamformer=beamformer
        )

    def overhead(self, outcome: Optional[TrainingOutcome] = None) -> int:
        return len(self.far_codebook)


def ls_channel_estimation_baseline(
        channel: ChannelVector,
        far_codebook: FarFieldCodebook,
        cfg: SystemConfig,
        rng: np.random.Generator
    ) -> TrainingOutcome:
    return LSChannelEstimation(cfg, far_codebook, None).train(channel, rng)
