import logging
import math
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from threading import Lock
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .channel import SystemConfig, UserLocation, near_steering, synthesize_channel
from .codebooks import CodewordId, FarFieldCodebook, PolarCodebook, build_far_codebook, build_polar_codebook
from .training_schemes import TrainingScheme, create_scheme, oracle_best_codeword

DEFAULT_SNR_DISTANCE = 10.0 # meters, user distance of the SNR sweep
THREADS_ENV = "XLBT_THREADS"

ProgressCallback = Callable[[int, int], None]


class TrialRecord:
    """Outcome of every scheme for one drawn user."""

    def __init__(self, truth: UserLocation, oracle: CodewordId) -> None:
        self.truth = truth
        self.oracle = oracle
        self.selected: Dict[str, Optional[CodewordId]] = {}
        self.pilots_used: Dict[str, int] = {}
        self.rates: Dict[str, float] = {} # bits/s/Hz
        self.success: Dict[str, bool] = {}

    def add(self, scheme: str, selected: Optional[CodewordId], pilots_used: int, rate: float) -> None:
        self.selected[scheme] = selected
        self.pilots_used[scheme] = pilots_used
        self.rates[scheme] = rate
        self.success[scheme] = selected == self.oracle


class SweepReport:
    """Per-point, per-scheme Monte Carlo statistics of one sweep."""

    def __init__(
            self,
            kind: str, # "snr", "distance" or "single"
            values: List[float],
            schemes: List[str],
            trials: int,
            seed: int,
            metadata: Optional[Dict[str, str]] = None
        ) -> None:
        if trials < 1:
            raise ValueError(f"Trial count must be positive, got {trials}")

        self.kind = kind
        self.values = values
        self.schemes = schemes
        self.trials = trials
        self.seed = seed
        self.metadata = metadata if metadata is not None else {}

        self.success_rate: Dict[str, List[float]] = {s: [] for s in schemes}
        self.rate: Dict[str, List[float]] = {s: [] for s in schemes}
        self.overhead: Dict[str, List[float]] = {s: [] for s in schemes}
        self.records: List[List[TrialRecord]] = []

    @property
    def unit(self) -> str:
        return {"snr": "dB", "distance": "m"}.get(self.kind, "")

    def add_point(self, records: List[TrialRecord]) -> None:
        """Aggregate one sweep point, in trial order."""

        self.records.append(records)
        for scheme in self.schemes:
            successes = sum(1 for record in records if record.success[scheme])
            self.success_rate[scheme].append(successes / len(records))
            self.rate[scheme].append(float(np.mean([record.rates[scheme] for record in records])))
            self.overhead[scheme].append(float(np.mean([record.pilots_used[scheme] for record in records])))


def linear_to_db(value: float) -> float:
    return 10 * math.log10(value)

def db_to_linear(value_db: float) -> float:
    return 10 ** (value_db / 10)

def reference_snr(cfg: SystemConfig, distance: float) -> float:
    """Linear reference SNR P beta N / (r^2 sigma^2)."""

    if not distance > 0:
        raise ValueError(f"Distance must be positive, got {distance}")
    if not cfg.noise_power > 0:
        raise ValueError("Reference SNR is undefined for a noiseless link (noise_power = 0)")

    return cfg.tx_power * cfg.ref_gain * cfg.num_antennas / (distance ** 2 * cfg.noise_power)

def tx_power_for_snr(cfg: SystemConfig, snr: float, distance: float) -> float:
    """Transmit power in watts giving the linear reference SNR snr at distance."""

    return snr * distance ** 2 * cfg.noise_power / (cfg.ref_gain * cfg.num_antennas)

def achievable_rate(truth: UserLocation, v: np.ndarray, cfg: SystemConfig) -> float:
    """log2(1 + P beta N |b^H v|^2 / (r^2 sigma^2)) against the true near-field steering vector."""

    gain = abs(np.vdot(near_steering(truth, cfg), v)) ** 2
    return math.log2(1 + reference_snr(cfg, truth.distance) * gain)

def draw_user(
        rng: np.random.Generator,
        distance: float | Tuple[float, float],
        angle: Optional[float] = None
    ) -> UserLocation:
    """Draw a user; a fixed distance/angle is used as is, a (low, high) distance and a missing angle are uniform."""

    if isinstance(distance, tuple):
        low, high = distance
        if not 0 < low <= high:
            raise ValueError(f"Invalid distance range {distance}")
        r = float(rng.uniform(low, high))
    else:
        r = float(distance)

    theta = float(rng.uniform(-1.0, 1.0)) if angle is None else float(angle)
    return UserLocation(theta, r)

def trial_rng(seed: int, point: int, trial: int, role: int) -> np.random.Generator:
    """Independent stream for one (point, trial, role); role 0 draws the user."""

    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(point, trial, role)))

def scheme_role(scheme: str) -> int:
    return 1 + zlib.crc32(scheme.encode())

def worker_count() -> int:
    """Thread count from XLBT_THREADS (0 or unset = one per CPU)."""

    value = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        threads = int(value)
    except ValueError:
        logging.warning(f"Ignoring invalid {THREADS_ENV}={value!r}")
        threads = 0

    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


class Simulator:
    def __init__(
            self,
            cfg: SystemConfig,
            schemes: Sequence[str],
            far_codebook: Optional[FarFieldCodebook] = None,
            polar_codebook: Optional[PolarCodebook] = None,
            workers: Optional[int] = None,
            progress: Optional[ProgressCallback] = None
        ) -> None:
        if not schemes:
            raise ValueError("Select at least one training scheme")

        self.cfg = cfg
        self.schemes = list(schemes)
        self.far_codebook = far_codebook if far_codebook is not None else build_far_codebook(cfg)
        self.polar_codebook = polar_codebook if polar_codebook is not None else build_polar_codebook(cfg)
        self.workers = workers if workers is not None else worker_count()
        self.progress = progress

        self._done = 0
        self._done_lock = Lock()

        logging.debug(f"Simulator ready: schemes {', '.join(self.schemes)}, {self.workers} worker(s)")

    def _schemes_for(self, cfg: SystemConfig) -> List[TrainingScheme]:
        return [create_scheme(name, cfg, self.far_codebook, self.polar_codebook) for name in self.schemes]

    def run_trial(
            self,
            loc: UserLocation,
            cfg: SystemConfig,
            seed: int,
            point: int,
            trial: int,
            schemes: Optional[List[TrainingScheme]] = None
        ) -> TrialRecord:
        """Run every scheme against the channel of loc, each with its own noise stream."""

        channel = synthesize_channel(loc, cfg)
        record = TrialRecord(loc, oracle_best_codeword(channel, self.polar_codebook))

        for scheme in schemes if schemes is not None else self._schemes_for(cfg):
            outcome = scheme.train(channel, trial_rng(seed, point, trial, scheme_role(scheme.name)))
            record.add(scheme.name, outcome.selected, outcome.pilots_used, achievable_rate(loc, outcome.beamformer, cfg))

        return record

    def _tick(self, total: int) -> None:
        with self._done_lock:
            self._done += 1
            if self.progress is not None:
                self.progress(self._done, total)

    def _run_point(
            self,
            cfg: SystemConfig,
            point: int,
            trials: int,
            seed: int,
            distance: float | Tuple[float, float],
            total: int
        ) -> List[TrialRecord]:
        schemes = self._schemes_for(cfg)

        def one_trial(trial: int) -> TrialRecord:
            loc = draw_user(trial_rng(seed, point, trial, 0), distance)
            record = self.run_trial(loc, cfg, seed, point, trial, schemes)
            self._tick(total)
            return record

        if self.workers <= 1:
            return [one_trial(trial) for trial in range(trials)]

        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(one_trial, range(trials))) # map keeps trial order

    def run_snr_sweep(
            self,
            snr_points: Sequence[float], # dB
            trials: int,
            seed: int,
            distance: float = DEFAULT_SNR_DISTANCE
        ) -> SweepReport:
        """Sweep the reference SNR by setting P for a user at fixed distance and uniform angle."""

        if len(snr_points) == 0:
            raise ValueError("SNR sweep needs at least one point")

        report = SweepReport("snr", [float(p) for p in snr_points], self.schemes, trials, seed, {
            "user_distance_m": repr(float(distance)),
            "user_angle": "uniform[-1,1]",
        })

        self._done = 0
        total = trials * len(snr_points)
        for point, snr_db in enumerate(snr_points):
            tx_power = tx_power_for_snr(self.cfg, db_to_linear(snr_db), distance)
            logging.info(f"SNR point {point + 1}/{len(snr_points)}: {snr_db} dB (P = {linear_to_db(tx_power) + 30:.2f} dBm)")
            report.add_point(self._run_point(self.cfg.replace(tx_power=tx_power), point, trials, seed, float(distance), total))

        return report

    def run_distance_sweep(self, distances: Sequence[float], trials: int, seed: int) -> SweepReport:
        """Sweep the user distance at fixed transmit power with uniform angle."""

        if len(distances) == 0:
            raise ValueError("Distance sweep needs at least one point")
        if any(not r > 0 for r in distances):
            raise ValueError("Distances must be positive")

        report = SweepReport("distance", [float(r) for r in distances], self.schemes, trials, seed, {
            "tx_power_dbm": repr(linear_to_db(self.cfg.tx_power) + 30),
            "user_angle": "uniform[-1,1]",
        })

        self._done = 0
        total = trials * len(distances)
        for point, distance in enumerate(distances):
            logging.info(f"Distance point {point + 1}/{len(distances)}: {distance} m")
            report.add_point(self._run_point(self.cfg, point, trials, seed, float(distance), total))

        return report


def run_snr_sweep(
        cfg: SystemConfig,
        snr_points: Sequence[float],
        trials: int,
        schemes: Sequence[str],
        seed: int,
        distance: float = DEFAULT_SNR_DISTANCE,
        **kwargs
    ) -> SweepReport:
    return Simulator(cfg, schemes, **kwargs).run_snr_sweep(snr_points, trials, seed, distance)

def run_distance_sweep(
        cfg: SystemConfig,
        distances: Sequence[float],
        trials: int,
        schemes: Sequence[str],
        seed: int,
        **kwargs
    ) -> SweepReport:
    return Simulator(cfg, schemes, **kwargs).run_distance_sweep(distances, trials, seed)
