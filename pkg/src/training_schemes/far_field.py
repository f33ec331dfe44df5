from typing import Optional

import numpy as np

from ..channel import ChannelVector, SystemConfig
from ..codebooks import FarFieldCodebook
from .training_scheme import TrainingOutcome, TrainingScheme, argmax_lowest


class FarFieldTraining(TrainingScheme):
    """Conventional angle-domain exhaustive sweep over the far-field codebook."""

    name = "far-field"

    def train(self, channel: ChannelVector, rng: np.random.Generator) -> TrainingOutcome:
        sweep = self.far_sweep(channel, rng)
        best = argmax_lowest(sweep.powers)

        return TrainingOutcome(
            selected=sweep.ids[best], # scored as the s = 0 layer of the polar codebook
            pilots_used=len(sweep),
            beamformer=self.far_codebook.codewords[best],
            trace=[sweep]
        )

    def overhead(self, outcome: Optional[TrainingOutcome] = None) -> int:
        return len(self.far_codebook)


def far_field_exhaustive(
        channel: ChannelVector,
        far_codebook: FarFieldCodebook,
        cfg: SystemConfig,
        rng: np.random.Generator
    ) -> TrainingOutcome:
    return FarFieldTraining(cfg, far_codebook, None).train(channel, rng)
