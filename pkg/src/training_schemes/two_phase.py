import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from ..channel import ChannelVector, SystemConfig, UserLocation, beam_gain_pattern
from ..codebooks import FarFieldCodebook, PolarCodebook, grid_angles, overhead_two_phase
from .training_scheme import (PilotSweep, ReceivedPilot, TrainingOutcome, TrainingScheme, argmax_lowest,
                              receive_pilots)


class DominantAngleSet:
    """Far-field codeword indices (1-based, ascending) whose received power beats rho^2 times the peak."""

    def __init__(self, indices: List[int], threshold: float) -> None:
        self.indices = indices
        self.threshold = threshold # watts

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, n: int) -> bool:
        return n in self.indices

    def median(self) -> float:
        """Median index; mean of the two middle indices for even sizes."""

        return float(np.median(self.indices))


class CandidateAngleSet:
    """Contiguous window of K angle indices handed to the distance sweep."""

    def __init__(self, indices: List[int]) -> None:
        self.indices = indices

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, n: int) -> bool:
        return n in self.indices


def dominant_angle_region(pilots: PilotSweep | Sequence[ReceivedPilot] | np.ndarray, rho: float) -> DominantAngleSet:
    """
    Psi = {n : |y(w_n)|^2 > rho^2 max |y(w)|^2}.
    A plain array is taken as powers of codewords 1..N in order.
    """

    if isinstance(pilots, PilotSweep):
        indices = np.array([cid.angle_index for cid in pilots.ids])
        powers = pilots.powers
    elif isinstance(pilots, np.ndarray):
        indices = np.arange(1, len(pilots) + 1)
        powers = pilots
    else:
        indices = np.array([p.codeword_id.angle_index for p in pilots])
        powers = np.array([p.measured_power for p in pilots])

    if len(powers) == 0:
        raise ValueError("Dominant-angle region needs at least one pilot")

    peak = powers.max()
    threshold = rho * rho * peak
    selected = indices[powers > threshold]
    if len(selected) == 0: # only when every power is exactly zero
        selected = indices[[argmax_lowest(powers)]]

    return DominantAngleSet(sorted(int(n) for n in selected), float(threshold))

def middle_k_candidates(region: DominantAngleSet, num_candidates: int, num_angles: int) -> CandidateAngleSet:
    """
    K contiguous indices around floor(Med(Psi)), shifted inward when the window
    would leave [1, N] so that exactly K candidates remain.
    """

    if len(region) == 0:
        raise ValueError("Dominant-angle region is empty")
    if not 1 <= num_candidates <= num_angles:
        raise ValueError(f"K must lie in [1, {num_angles}], got {num_candidates}")

    centre = math.floor(region.median())
    start = centre - (num_candidates - 1) // 2
    end = centre + math.ceil((num_candidates - 1) / 2)

    if start < 1:
        end += 1 - start
        start = 1
    if end > num_angles:
        start -= end - num_angles
        end = num_angles

    return CandidateAngleSet(list(range(start, end + 1)))


class TwoPhaseTraining(TrainingScheme):
    """
    Angle sweep over W to find the dominant-angle region, middle-K candidate selection,
    then a distance sweep over the polar codewords of the candidate angles only.
    """

    name = "two-phase"

    def __init__(
            self,
            cfg: SystemConfig,
            far_codebook: Optional[FarFieldCodebook],
            polar_codebook: Optional[PolarCodebook],
            num_candidates: Optional[int] = None
        ) -> None:
        super().__init__(cfg, far_codebook, polar_codebook)
        self.num_candidates = num_candidates if num_candidates is not None else cfg.num_candidates

        if not 1 <= self.num_candidates <= cfg.num_antennas:
            raise ValueError(f"K must lie in [1, {cfg.num_antennas}], got {self.num_candidates}")

    def _angle_phase(self, channel: ChannelVector, rng: np.random.Generator):
        angle_sweep = self.far_sweep(channel, rng)
        region = dominant_angle_region(angle_sweep, self.cfg.gain_threshold)
        return angle_sweep, region

    def _distance_phase(
            self,
            channel: ChannelVector,
            rng: np.random.Generator,
            angle_sweep: PilotSweep,
            region: DominantAngleSet
        ) -> TrainingOutcome:
        codebook = self.polar_codebook
        candidates = middle_k_candidates(region, self.num_candidates, codebook.num_angles)

        rows = np.concatenate([np.arange(codebook.block(k).start, codebook.block(k).stop) for k in candidates])
        ids = [codebook.codeword_id(row) for row in rows]
        distance_sweep = receive_pilots(channel, codebook.codewords[rows], ids, self.cfg, rng, "distance")
        best = argmax_lowest(distance_sweep.powers)

        return TrainingOutcome(
            selected=ids[best],
            pilots_used=len(angle_sweep) + len(distance_sweep),
            beamformer=codebook.codewords[rows[best]],
            trace=[angle_sweep, distance_sweep],
            dominant=region,
            candidates=candidates
        )

    def train(self, channel: ChannelVector, rng: np.random.Generator) -> TrainingOutcome:
        angle_sweep, region = self._angle_phase(channel, rng)
        return self._distance_phase(channel, rng, angle_sweep, region)

    def overhead(self, outcome: Optional[TrainingOutcome] = None) -> int:
        cfg = self.cfg.replace(num_candidates=self.num_candidates)
        if outcome is None:
            return overhead_two_phase(cfg)
        if outcome.candidates is None: # universal variant stopped after the angle sweep
            return cfg.num_antennas
        return overhead_two_phase(cfg, outcome.candidates)


class UniversalTwoPhaseTraining(TwoPhaseTraining):
    """
    Two-phase training that stops after the angle sweep when the received power is
    concentrated in at most universal_max_region codewords (the user looks far-field).
    """

    name = "two-phase-universal"

    def train(self, channel: ChannelVector, rng: np.random.Generator) -> TrainingOutcome:
        angle_sweep, region = self._angle_phase(channel, rng)

        if len(region) > self.cfg.universal_max_region:
            return self._distance_phase(channel, rng, angle_sweep, region)

        best = argmax_lowest(angle_sweep.powers)
        logging.debug(f"Dominant region of size {len(region)}, skipping distance sweep")
        return TrainingOutcome(
            selected=angle_sweep.ids[best],
            pilots_used=len(angle_sweep),
            beamformer=self.far_codebook.codewords[best],
            trace=[angle_sweep],
            dominant=region
        )


def two_phase_training(
        channel: ChannelVector,
        far_codebook: FarFieldCodebook,
        polar_codebook: PolarCodebook,
        cfg: SystemConfig,
        rng: np.random.Generator
    ) -> TrainingOutcome:
    return TwoPhaseTraining(cfg, far_codebook, polar_codebook).train(channel, rng)

def universal_two_phase_training(
        channel: ChannelVector,
        far_codebook: FarFieldCodebook,
        polar_codebook: PolarCodebook,
        cfg: SystemConfig,
        rng: np.random.Generator
    ) -> TrainingOutcome:
    return UniversalTwoPhaseTraining(cfg, far_codebook, polar_codebook).train(channel, rng)


class RegionSummary:
    def __init__(self, region: DominantAngleSet, median_index: int, true_index: int) -> None:
        self.region = region
        self.median_index = median_index # floor(Med(Psi))
        self.true_index = true_index # grid index nearest the true angle

    @property
    def width(self) -> int:
        """Span of the region in grid steps."""

        return self.region.indices[-1] - self.region.indices[0]

    @property
    def deviation(self) -> int:
        return abs(self.median_index - self.true_index)


def nearest_grid_index(theta: float, num_antennas: int) -> int:
    """Grid index n whose theta_n = (2n-N-1)/N lies closest to theta."""

    return int(np.argmin(np.abs(grid_angles(num_antennas) - theta))) + 1

def dominant_region_summary(loc: UserLocation, cfg: SystemConfig) -> RegionSummary:
    """Noiseless dominant-angle region of a user, and how far its median lands from the true angle."""

    powers = beam_gain_pattern(loc, grid_angles(cfg.num_antennas), cfg) ** 2
    region = dominant_angle_region(powers, cfg.gain_threshold)

    return RegionSummary(region, math.floor(region.median()), nearest_grid_index(loc.theta, cfg.num_antennas))
