from typing import Optional

import numpy as np

from ..channel import ChannelVector, SystemConfig
from ..codebooks import PolarCodebook
from .training_scheme import TrainingOutcome, TrainingScheme, argmax_lowest, receive_pilots


class PolarExhaustiveTraining(TrainingScheme):
    """Two-dimensional exhaustive sweep over every (angle, distance) codeword of the polar codebook."""

    name = "exhaustive"

    def train(self, channel: ChannelVector, rng: np.random.Generator) -> TrainingOutcome:
        codebook = self.polar_codebook
        ids = [codebook.codeword_id(row) for row in range(len(codebook))]

        sweep = receive_pilots(channel, codebook.codewords, ids, self.cfg, rng, "polar")
        best = argmax_lowest(sweep.powers)

        return TrainingOutcome(
            selected=ids[best],
            pilots_used=len(sweep),
            beamformer=codebook.codewords[best],
            trace=[sweep]
        )

    def overhead(self, outcome: Optional[TrainingOutcome] = None) -> int:
        return len(self.polar_codebook)


def polar_exhaustive(
        channel: ChannelVector,
        polar_codebook: PolarCodebook,
        cfg: SystemConfig,
        rng: np.random.Generator
    ) -> TrainingOutcome:
    """Functional form of PolarExhaustiveTraining."""

    return PolarExhaustiveTraining(cfg, None, polar_codebook).train(channel, rng)
