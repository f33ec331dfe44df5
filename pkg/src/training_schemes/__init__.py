import re
from typing import Optional

from ..channel import SystemConfig
from ..codebooks import FarFieldCodebook, PolarCodebook
from .far_field import FarFieldTraining, far_field_exhaustive
from .ls_estimation import LSChannelEstimation, ls_channel_estimation_baseline, ls_estimate
from .oracle import oracle_best_codeword
from .perfect_csi import PerfectCSIBeamforming
from .polar_exhaustive import PolarExhaustiveTraining, polar_exhaustive
from .training_scheme import PilotSweep, ReceivedPilot, TrainingOutcome, TrainingScheme, receive_pilot, receive_pilots
from .two_phase import (CandidateAngleSet, DominantAngleSet, TwoPhaseTraining, UniversalTwoPhaseTraining,
                        dominant_angle_region, dominant_region_summary, middle_k_candidates, two_phase_training,
                        universal_two_phase_training)

SCHEMES = {
    PerfectCSIBeamforming.name: PerfectCSIBeamforming,
    PolarExhaustiveTraining.name: PolarExhaustiveTraining,
    TwoPhaseTraining.name: TwoPhaseTraining,
    UniversalTwoPhaseTraining.name: UniversalTwoPhaseTraining,
    FarFieldTraining.name: FarFieldTraining,
    LSChannelEstimation.name: LSChannelEstimation,
}

_TWO_PHASE_K = re.compile(r"^two-phase-k([1-9][0-9]*)$") # two-phase with an explicit K, e.g. two-phase-k1


def is_known_scheme(name: str) -> bool:
    return name in SCHEMES or _TWO_PHASE_K.match(name) is not None

def create_scheme(
        name: str,
        cfg: SystemConfig,
        far_codebook: Optional[FarFieldCodebook],
        polar_codebook: Optional[PolarCodebook]
    ) -> TrainingScheme:
    """Instantiate a training scheme by its report name."""

    match = _TWO_PHASE_K.match(name)
    if match:
        scheme = TwoPhaseTraining(cfg, far_codebook, polar_codebook, num_candidates=int(match.group(1)))
        scheme.name = name
        return scheme

    if name not in SCHEMES:
        raise ValueError(f"Unknown training scheme '{name}'")
    return SCHEMES[name](cfg, far_codebook, polar_codebook)


__all__ = [
    "CandidateAngleSet", "DominantAngleSet", "FarFieldTraining", "LSChannelEstimation", "PerfectCSIBeamforming",
    "PilotSweep", "PolarExhaustiveTraining", "ReceivedPilot", "SCHEMES", "TrainingOutcome", "TrainingScheme",
    "TwoPhaseTraining", "UniversalTwoPhaseTraining", "create_scheme", "dominant_angle_region",
    "dominant_region_summary", "far_field_exhaustive", "is_known_scheme", "ls_channel_estimation_baseline",
    "ls_estimate", "middle_k_candidates", "oracle_best_codeword", "polar_exhaustive", "receive_pilot",
    "receive_pilots", "two_phase_training", "universal_two_phase_training"
]
