import math
from abc import ABC, abstractmethod
from typing import List, Optional, Sequence

import numpy as np

from ..channel import ChannelVector, SystemConfig
from ..codebooks import CodewordId, FarFieldCodebook, PolarCodebook

ARGMAX_RTOL = 1e-12 # values this close to the maximum count as tied


class ReceivedPilot:
    def __init__(self, codeword_id: Optional[CodewordId], raw_sample: complex) -> None:
        self.codeword_id = codeword_id
        self.raw_sample = raw_sample
        self.measured_power = abs(raw_sample) ** 2 # watts

    def __repr__(self) -> str:
        return f"ReceivedPilot({self.codeword_id}, power={self.measured_power:.4g})"


class PilotSweep:
    """Received samples of one beam sweep, kept as arrays. Indexing yields ReceivedPilot objects."""

    def __init__(self, phase: str, ids: Sequence[CodewordId], samples: np.ndarray) -> None:
        self.phase = phase
        self.ids = list(ids)
        self.samples = samples

    @property
    def powers(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    def __len__(self) -> int:
        return len(self.ids)

    def __getitem__(self, i: int) -> ReceivedPilot:
        return ReceivedPilot(self.ids[i], complex(self.samples[i]))


class TrainingOutcome:
    def __init__(
            self,
            selected: Optional[CodewordId], # None when the scheme has no codebook to score against
            pilots_used: int,
            beamformer: np.ndarray,
            trace: Optional[List[PilotSweep]] = None,
            dominant=None, # DominantAngleSet, two-phase schemes only
            candidates=None # CandidateAngleSet, two-phase schemes only
        ) -> None:
        self.selected = selected
        self.pilots_used = pilots_used
        self.beamformer = beamformer
        self.trace = trace if trace is not None else []
        self.dominant = dominant
        self.candidates = candidates


def receive_pilot(
        channel: ChannelVector,
        v: np.ndarray,
        cfg: SystemConfig,
        rng: np.random.Generator,
        codeword_id: Optional[CodewordId] = None
    ) -> ReceivedPilot:
    """One pilot y = h^H v x + z with x = sqrt(P) and z ~ CN(0, sigma^2)."""

    noise = rng.standard_normal(2) * math.sqrt(cfg.noise_power / 2)
    y = complex(channel.row @ v) * math.sqrt(cfg.tx_power) + complex(noise[0], noise[1])
    return ReceivedPilot(codeword_id, y)

def receive_pilots(
        channel: ChannelVector,
        codewords: np.ndarray,
        ids: Sequence[CodewordId],
        cfg: SystemConfig,
        rng: np.random.Generator,
        phase: str
    ) -> PilotSweep:
    """Sweep codewords (one per row) with an independent noise draw per pilot."""

    noise = rng.standard_normal((2, len(codewords))) * math.sqrt(cfg.noise_power / 2)
    samples = (codewords @ channel.row) * math.sqrt(cfg.tx_power) + (noise[0] + 1j * noise[1])
    return PilotSweep(phase, ids, samples)

def argmax_lowest(values: np.ndarray) -> int:
    """Index of the maximum; near-ties resolve to the lowest index."""

    top = values.max()
    return int(np.flatnonzero(values >= top * (1 - ARGMAX_RTOL))[0])


class TrainingScheme(ABC):
    name: str = ""

    def __init__(
            self,
            cfg: SystemConfig,
            far_codebook: Optional[FarFieldCodebook],
            polar_codebook: Optional[PolarCodebook]
        ) -> None:
        self.cfg = cfg
        self.far_codebook = far_codebook
        self.polar_codebook = polar_codebook

    @abstractmethod
    def train(self, channel: ChannelVector, rng: np.random.Generator) -> TrainingOutcome:
        """Run the training protocol against one channel realization"""
        pass

    @abstractmethod
    def overhead(self, outcome: Optional[TrainingOutcome] = None) -> int:
        """Training symbols spent, for the given run when the cost depends on it"""
        pass

    def nearest_codeword(self, v: np.ndarray) -> CodewordId:
        """Polar codeword f maximizing |f^H v|, used to score schemes that don't select a codeword."""

        gains = np.abs(np.conj(self.polar_codebook.codewords) @ v) ** 2
        return self.polar_codebook.codeword_id(argmax_lowest(gains))

    def far_sweep(self, channel: ChannelVector, rng: np.random.Generator, phase: str = "angle") -> PilotSweep:
        """Sweep all N far-field codewords."""

        ids = [CodewordId(n, 0) for n in range(1, len(self.far_codebook) + 1)]
        return receive_pilots(channel, self.far_codebook.codewords, ids, self.cfg, rng, phase)
