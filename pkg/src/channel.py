import math
from typing import List, Optional, Self, Sequence

import numpy as np

SPEED_OF_LIGHT = 2.99792458e8 # m/s


class SystemConfig:
    """
    Physical constants and array parameters of one XL-array link.
    All values are linear (watts, ratios); dB conversion happens in the config loader.
    """

    def __init__(
            self,
            num_antennas: int,
            carrier_freq: float, # Hz
            ref_gain: float, # linear power ratio at 1 m
            tx_power: float, # watts
            noise_power: float, # watts
            coherence_param: float,
            gain_threshold: float,
            num_candidates: int,
            distance_samples: int,
            distance_samples_per_angle: Optional[Sequence[int]] = None,
            min_distance: float = 0.0, # meters, 0 disables endfire truncation
            universal_max_region: int = 1
        ) -> None:
        if num_antennas < 2:
            raise ValueError(f"num_antennas must be at least 2, got {num_antennas}")
        if not 0 < gain_threshold < 1:
            raise ValueError(f"gain_threshold must lie in (0, 1), got {gain_threshold}")
        if not 1 <= num_candidates <= num_antennas:
            raise ValueError(f"num_candidates must lie in [1, {num_antennas}], got {num_candidates}")
        if distance_samples < 1:
            raise ValueError(f"distance_samples must be positive, got {distance_samples}")
        for name, value in (("carrier_freq", carrier_freq), ("ref_gain", ref_gain), ("tx_power", tx_power),
                            ("coherence_param", coherence_param)):
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if noise_power < 0:
            raise ValueError(f"noise_power must not be negative, got {noise_power}")
        if min_distance < 0:
            raise ValueError(f"min_distance must not be negative, got {min_distance}")

        per_angle = list(distance_samples_per_angle) if distance_samples_per_angle else []
        if per_angle and len(per_angle) != num_antennas:
            raise ValueError(f"distance_samples_per_angle needs {num_antennas} entries, got {len(per_angle)}")
        if any(s < 1 for s in per_angle):
            raise ValueError("distance_samples_per_angle entries must be positive")

        self.num_antennas = int(num_antennas)
        self.carrier_freq = float(carrier_freq)
        self.wavelength = SPEED_OF_LIGHT / self.carrier_freq # meters
        self.antenna_spacing = self.wavelength / 2 # meters
        self.ref_gain = float(ref_gain)
        self.tx_power = float(tx_power)
        self.noise_power = float(noise_power)
        self.coherence_param = float(coherence_param)
        self.gain_threshold = float(gain_threshold)
        self.num_candidates = int(num_candidates)
        self.distance_samples = int(distance_samples)
        self.distance_samples_per_angle: List[int] = [int(s) for s in per_angle]
        self.min_distance = float(min_distance)
        self.universal_max_region = int(universal_max_region)

    @property
    def aperture(self) -> float:
        """Physical span (N-1)d of the array in meters."""

        return (self.num_antennas - 1) * self.antenna_spacing

    def samples_for_angle(self, n: int) -> int:
        """Nominal distance sample count S_n for angle index n (before endfire truncation)."""

        if self.distance_samples_per_angle:
            return self.distance_samples_per_angle[n - 1]
        return self.distance_samples

    def replace(self, **changes) -> Self:
        """Return a copy with some constructor arguments replaced."""

        args = dict(
            num_antennas=self.num_antennas,
            carrier_freq=self.carrier_freq,
            ref_gain=self.ref_gain,
            tx_power=self.tx_power,
            noise_power=self.noise_power,
            coherence_param=self.coherence_param,
            gain_threshold=self.gain_threshold,
            num_candidates=self.num_candidates,
            distance_samples=self.distance_samples,
            distance_samples_per_angle=self.distance_samples_per_angle,
            min_distance=self.min_distance,
            universal_max_region=self.universal_max_region,
        )
        args.update(changes)
        return type(self)(**args)


class UserLocation:
    """Ground-truth polar position of the user relative to the array centre."""

    def __init__(self, theta: float, distance: float) -> None:
        if not -1 <= theta <= 1:
            raise ValueError(f"Spatial angle must lie in [-1, 1], got {theta}")
        if not distance > 0:
            raise ValueError(f"User distance must be positive, got {distance}")

        self.theta = float(theta)
        self.distance = float(distance) # meters

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, UserLocation):
            return NotImplemented
        return (self.theta, self.distance) == (other.theta, other.distance)

    def __repr__(self) -> str:
        return f"UserLocation(theta={self.theta!r}, distance={self.distance!r})"


class ChannelVector:
    """Near-field LoS channel row h^H = sqrt(N) h b^H(theta, r) of one user."""

    def __init__(self, row: np.ndarray, gain: complex, truth: UserLocation) -> None:
        self.row = row
        self.gain = gain
        self.truth = truth

    def scaled(self, factor: float) -> Self:
        return type(self)(self.row * factor, self.gain * factor, self.truth)


def antenna_offset(n: int, cfg: SystemConfig) -> float:
    """Signed offset delta_n = (2n-N-1)/2 of antenna n (1-based), in units of d."""

    if not 1 <= n <= cfg.num_antennas:
        raise ValueError(f"Antenna index must lie in [1, {cfg.num_antennas}], got {n}")

    return (2 * n - cfg.num_antennas - 1) / 2

def antenna_offsets(cfg: SystemConfig) -> np.ndarray:
    """All offsets delta_1..delta_N as an array."""

    n = np.arange(1, cfg.num_antennas + 1)
    return (2 * n - cfg.num_antennas - 1) / 2

def _distance_excess(offsets: np.ndarray, loc: UserLocation, cfg: SystemConfig) -> np.ndarray:
    """
    r^(n) - r for every offset, in the cancellation-free form
    (delta^2 d^2 - 2 r theta delta d) / (r^(n) + r).
    """

    y = offsets * cfg.antenna_spacing
    r = loc.distance
    numerator = y * y - 2 * r * loc.theta * y
    per_antenna = np.sqrt(r * r + numerator)
    return numerator / (per_antenna + r)

def per_antenna_distance(n: int, loc: UserLocation, cfg: SystemConfig) -> float:
    """Exact distance in meters between antenna n at (0, delta_n d) and the user."""

    y = antenna_offset(n, cfg) * cfg.antenna_spacing
    r = loc.distance
    return math.sqrt(r * r + y * y - 2 * r * loc.theta * y)

def near_steering(loc: UserLocation, cfg: SystemConfig) -> np.ndarray:
    """Unit-norm near-field steering column b(theta, r)."""

    excess = _distance_excess(antenna_offsets(cfg), loc, cfg)
    cycles = np.mod(excess / cfg.wavelength, 1.0) # phase reduced modulo 2*pi before trig
    return np.exp(2j * np.pi * cycles) / np.sqrt(cfg.num_antennas)

def far_steering(theta: float, cfg: SystemConfig) -> np.ndarray:
    """
    Unit-norm far-field steering column a(theta), referenced to the array centre
    so that it is exactly the r -> inf limit of near_steering.
    """

    if not -1 <= theta <= 1:
        raise ValueError(f"Spatial angle must lie in [-1, 1], got {theta}")

    cycles = np.mod(-theta * antenna_offsets(cfg) / 2, 1.0)
    return np.exp(2j * np.pi * cycles) / np.sqrt(cfg.num_antennas)

def far_steering_matrix(thetas: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """Far-field steering columns for many angles, one codeword per row."""

    cycles = np.mod(-np.outer(thetas, antenna_offsets(cfg)) / 2, 1.0)
    return np.exp(2j * np.pi * cycles) / np.sqrt(cfg.num_antennas)

def synthesize_channel(loc: UserLocation, cfg: SystemConfig) -> ChannelVector:
    """Build the LoS channel row of a user at loc."""

    if loc.distance == 0:
        raise ValueError("Channel is undefined at zero distance")

    r = loc.distance
    cycles = math.fmod(r / cfg.wavelength, 1.0)
    gain = math.sqrt(cfg.ref_gain) / r * complex(math.cos(2 * math.pi * cycles), -math.sin(2 * math.pi * cycles))
    row = math.sqrt(cfg.num_antennas) * gain * np.conj(near_steering(loc, cfg))

    return ChannelVector(row, gain, loc)

def beam_gain(u: np.ndarray, w: np.ndarray) -> float:
    """Normalized beam gain |u^H w|."""

    if u.shape != w.shape:
        raise ValueError(f"Vector length mismatch: {u.shape} vs {w.shape}")

    return float(abs(np.vdot(u, w)))

def beam_gain_pattern(loc: UserLocation, omegas: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """|b^H(theta, r) a(omega)| for every omega, the gain of far-field beams swept over angle."""

    codewords = far_steering_matrix(np.asarray(omegas, dtype=float), cfg)
    return np.abs(codewords @ np.conj(near_steering(loc, cfg)))

def rayleigh_distance(aperture: float, wavelength: float) -> float:
    """Near/far-field boundary 2D^2/lambda in meters."""

    if not (aperture > 0 and wavelength > 0):
        raise ValueError("Aperture and wavelength must be positive")

    return 2 * aperture ** 2 / wavelength
