import logging
import math
from typing import Iterable, List, NamedTuple, Optional, Self

import numpy as np
import pandas as pd

from .channel import SystemConfig, UserLocation, far_steering_matrix, near_steering


class CodewordId(NamedTuple):
    """Codeword index pair. angle_index is 1-based, distance_index 0 means the far-field layer."""

    angle_index: int
    distance_index: int


class CodebookFormatError(ValueError):
    """Raised when a codebook CSV can't be imported."""


def grid_angles(num_antennas: int) -> np.ndarray:
    """Sector centres theta_n = (2n-N-1)/N for n = 1..N."""

    n = np.arange(1, num_antennas + 1)
    return (2 * n - num_antennas - 1) / num_antennas

def threshold_distance(cfg: SystemConfig) -> float:
    """Z_delta = D^2 / (2 alpha^2 lambda) with D = (N-1)d, in meters."""

    return cfg.aperture ** 2 / (2 * cfg.coherence_param ** 2 * cfg.wavelength)

def sample_distances(theta: float, count: int, cfg: SystemConfig) -> List[float]:
    """Non-uniform distance samples for one angle; element 0 is the far-field sentinel."""

    if count < 1:
        raise ValueError(f"Sample count must be positive, got {count}")

    anchor = threshold_distance(cfg) * (1 - theta * theta)
    return [math.inf] + [anchor / s for s in range(1, count)]

def _kept_distances(theta: float, count: int, cfg: SystemConfig) -> List[float]:
    """Samples of one angle after dropping those closer than cfg.min_distance (s = 0 always stays)."""

    distances = sample_distances(theta, count, cfg)
    if cfg.min_distance <= 0:
        return distances
    return [distances[0]] + [r for r in distances[1:] if r >= cfg.min_distance]

def samples_per_angle(cfg: SystemConfig) -> List[int]:
    """Effective S_n for every angle index, truncation included."""

    thetas = grid_angles(cfg.num_antennas)
    return [len(_kept_distances(float(theta), cfg.samples_for_angle(n), cfg)) for n, theta in enumerate(thetas, start=1)]

def overhead_exhaustive(cfg: SystemConfig) -> int:
    """Training symbols needed to sweep the whole polar codebook."""

    return sum(samples_per_angle(cfg))

def overhead_two_phase(cfg: SystemConfig, candidates: Optional[Iterable[int]] = None) -> int:
    """
    Training symbols of the two-phase method: N far-field pilots plus the polar pilots of the candidate angles.
    Without explicit candidates the nominal N + K*S is returned, which needs the same S_n for every angle.
    """

    sizes = samples_per_angle(cfg)
    if candidates is not None:
        return cfg.num_antennas + sum(sizes[k - 1] for k in candidates)

    if len(set(sizes)) > 1:
        raise ValueError("Two-phase overhead depends on the candidate angles when S_n differs between angles")
    return cfg.num_antennas + cfg.num_candidates * sizes[0]


class FarFieldCodebook:
    """Angle-domain DFT codebook W, one codeword per row."""

    def __init__(self, angles: np.ndarray, codewords: np.ndarray) -> None:
        self.angles = angles
        self.codewords = codewords

    def __len__(self) -> int:
        return len(self.angles)

    def codeword(self, n: int) -> np.ndarray:
        """Codeword w_n (1-based)."""

        return self.codewords[n - 1]

    def to_csv(self, path: str, header: Optional[str] = None) -> None:
        num_angles = len(self.angles)
        _write_codebook_csv(
            path,
            np.arange(1, num_angles + 1),
            np.zeros(num_angles, dtype=int),
            self.angles,
            np.full(num_angles, math.inf),
            self.codewords,
            header
        )


class PolarCodebook:
    """
    Polar-domain codebook F. Codewords are stored flat, one per row, ordered by
    (angle_index, distance_index); offsets[n-1]:offsets[n] is the block of angle n.
    """

    def __init__(
            self,
            angle_index: np.ndarray,
            distance_index: np.ndarray,
            thetas: np.ndarray,
            distances: np.ndarray, # meters, inf for s = 0
            codewords: np.ndarray,
            threshold_distance: float # meters
        ) -> None:
        self.angle_index = angle_index
        self.distance_index = distance_index
        self.thetas = thetas
        self.distances = distances
        self.codewords = codewords
        self.threshold_distance = threshold_distance

        num_angles = int(angle_index.max()) if len(angle_index) else 0
        counts = np.bincount(angle_index, minlength=num_angles + 1)[1:]
        self.sizes: List[int] = [int(c) for c in counts]
        self.offsets = np.concatenate(([0], np.cumsum(counts)))

    def __len__(self) -> int:
        return len(self.codewords)

    @property
    def num_angles(self) -> int:
        return len(self.sizes)

    def block(self, n: int) -> slice:
        """Row slice holding the codewords of angle index n."""

        return slice(int(self.offsets[n - 1]), int(self.offsets[n]))

    def codeword_id(self, row: int) -> CodewordId:
        return CodewordId(int(self.angle_index[row]), int(self.distance_index[row]))

    def row_of(self, cid: CodewordId) -> int:
        if not 1 <= cid.angle_index <= self.num_angles:
            raise ValueError(f"Angle index {cid.angle_index} out of range")
        if not 0 <= cid.distance_index < self.sizes[cid.angle_index - 1]:
            raise ValueError(f"Distance index {cid.distance_index} out of range for angle {cid.angle_index}")
        return int(self.offsets[cid.angle_index - 1]) + cid.distance_index

    def codeword(self, cid: CodewordId) -> np.ndarray:
        return self.codewords[self.row_of(cid)]

    def location(self, cid: CodewordId) -> tuple[float, float]:
        """(theta, distance) the codeword is focused on."""

        row = self.row_of(cid)
        return float(self.thetas[row]), float(self.distances[row])

    def to_csv(self, path: str, header: Optional[str] = None) -> None:
        _write_codebook_csv(path, self.angle_index, self.distance_index, self.thetas, self.distances, self.codewords, header)

    @classmethod
    def from_csv(cls, path: str, cfg: SystemConfig) -> Self:
        """Rebuild a polar codebook from an export written by to_csv."""

        logging.debug(f"Importing codebook from {path}")
        frame = pd.read_csv(path, comment="#", float_precision="round_trip")

        num_antennas = cfg.num_antennas
        expected = _codebook_columns(num_antennas)
        if list(frame.columns) != expected:
            missing = [c for c in expected if c not in frame.columns]
            raise CodebookFormatError(
                f"{path}: columns don't match an N={num_antennas} codebook"
                + (f" (missing {missing[0]})" if missing else "")
            )

        angle_index = frame["angle_index"].to_numpy(dtype=int)
        distance_index = frame["distance_index"].to_numpy(dtype=int)

        order = np.lexsort((distance_index, angle_index))
        if not np.array_equal(order, np.arange(len(frame))):
            raise CodebookFormatError(f"{path}: rows are not ordered by (angle_index, distance_index)")
        if angle_index.min() != 1 or angle_index.max() != num_antennas or len(np.unique(angle_index)) != num_antennas:
            raise CodebookFormatError(f"{path}: angle_index must cover 1..{num_antennas}")
        for n in range(1, num_antennas + 1):
            layers = distance_index[angle_index == n]
            if not np.array_equal(layers, np.arange(len(layers))):
                bad_row = int(np.flatnonzero(angle_index == n)[0]) + 1
                raise CodebookFormatError(f"{path}: distance_index of angle {n} is not 0..S_n-1 (data row {bad_row})")

        real = frame[[f"re_{i}" for i in range(num_antennas)]].to_numpy(dtype=float)
        imag = frame[[f"im_{i}" for i in range(num_antennas)]].to_numpy(dtype=float)

        return cls(
            angle_index=angle_index,
            distance_index=distance_index,
            thetas=frame["theta"].to_numpy(dtype=float),
            distances=frame["distance_m"].to_numpy(dtype=float),
            codewords=real + 1j * imag,
            threshold_distance=threshold_distance(cfg)
        )


def build_far_codebook(cfg: SystemConfig) -> FarFieldCodebook:
    """Far-field codebook W = {a(theta_1), ..., a(theta_N)}."""

    angles = grid_angles(cfg.num_antennas)
    return FarFieldCodebook(angles, far_steering_matrix(angles, cfg))

def build_polar_codebook(cfg: SystemConfig) -> PolarCodebook:
    """Polar-domain codebook F with non-uniform distance sampling per grid angle."""

    angles = grid_angles(cfg.num_antennas)
    z_delta = threshold_distance(cfg)

    angle_index: List[int] = []
    distance_index: List[int] = []
    thetas: List[float] = []
    distances: List[float] = []
    codewords: List[np.ndarray] = []

    far = far_steering_matrix(angles, cfg)
    truncated = 0
    for n, theta in enumerate(angles, start=1):
        theta = float(theta)
        nominal = cfg.samples_for_angle(n)
        kept = _kept_distances(theta, nominal, cfg)
        truncated += nominal - len(kept)

        for s, r in enumerate(kept):
            angle_index.append(n)
            distance_index.append(s)
            thetas.append(theta)
            distances.append(r)
            codewords.append(far[n - 1] if s == 0 else near_steering(UserLocation(theta, r), cfg))

    if truncated:
        logging.debug(f"Dropped {truncated} distance samples closer than {cfg.min_distance} m")
    logging.debug(f"Built polar codebook with {len(codewords)} codewords (Z_delta = {z_delta:.3f} m)")

    return PolarCodebook(
        angle_index=np.array(angle_index, dtype=int),
        distance_index=np.array(distance_index, dtype=int),
        thetas=np.array(thetas),
        distances=np.array(distances),
        codewords=np.array(codewords),
        threshold_distance=z_delta
    )


def _codebook_columns(num_antennas: int) -> List[str]:
    return (["angle_index", "distance_index", "theta", "distance_m"]
            + [f"re_{i}" for i in range(num_antennas)]
            + [f"im_{i}" for i in range(num_antennas)])

def _write_codebook_csv(
        path: str,
        angle_index: np.ndarray,
        distance_index: np.ndarray,
        thetas: np.ndarray,
        distances: np.ndarray,
        codewords: np.ndarray,
        header: Optional[str] = None # leading # comment line
    ) -> None:
    num_antennas = codewords.shape[1]
    columns = {
        "angle_index": angle_index,
        "distance_index": distance_index,
        "theta": thetas,
        "distance_m": distances,
    }
    for i in range(num_antennas):
        columns[f"re_{i}"] = codewords[:, i].real
    for i in range(num_antennas):
        columns[f"im_{i}"] = codewords[:, i].imag

    with open(path, "w", encoding="utf-8", newline="") as f:
        if header:
            f.write(header + "\n")
        pd.DataFrame(columns).to_csv(f, index=False, float_format="%.17g", lineterminator="\n")
    logging.info(f"Wrote {len(codewords)} codewords to {path}")
