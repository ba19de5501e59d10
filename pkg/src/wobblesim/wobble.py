"""Random pitch-angle processes: Wiener, random-amplitude sinusoid, or none."""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

#: Pitch amplitudes above this (10 degrees) leave the small-angle regime.
SMALL_ANGLE_LIMIT_RAD = float(np.deg2rad(10.0))


class ProcessKind(str, enum.Enum):
    WIENER = "wiener"
    SINUSOID = "sinusoid"
    NONE = "none"


@dataclass(frozen=True)
class FrequencyLaw:
    """Distribution of the wobble frequency ``F`` in Hz.

    ``kind="uniform"`` draws from ``[low, high)``; ``kind="point"`` fixes ``F = low``.
    """

    kind: str = "uniform"
    low: float = 5.0
    high: float = 25.0

    def __post_init__(self):
        if self.kind not in ("uniform", "point"):
            raise ValueError(f"unknown frequency law {self.kind!r}")
        if self.low <= 0:
            raise ValueError("wobble frequency must be positive")
        if self.kind == "uniform" and not self.high > self.low:
            raise ValueError("uniform frequency law needs high > low")

    @classmethod
    def point(cls, value: float) -> "FrequencyLaw":
        return cls("point", value, value)

    @property
    def f_min(self) -> float:
        return self.low

    @property
    def mean(self) -> float:
        return self.low if self.kind == "point" else 0.5 * (self.low + self.high)

    def sample(self, rng: np.random.Generator, size=None):
        if self.kind == "point":
            return np.full(size, self.low) if size is not None else self.low
        return rng.uniform(self.low, self.high, size)


@dataclass(frozen=True)
class PitchProcessSpec:
    kind: ProcessKind
    wiener_rate_b: float | None = None
    max_pitch_theta_m: float | None = None
    freq_law: FrequencyLaw | None = None

    def __post_init__(self):
        kind = ProcessKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is ProcessKind.WIENER:
            if self.wiener_rate_b is None or not self.wiener_rate_b > 0:
                raise ValueError("Wiener process needs wiener_rate_b > 0")
            if self.max_pitch_theta_m is not None or self.freq_law is not None:
                raise ValueError("sinusoid fields set on a Wiener process")
        elif kind is ProcessKind.SINUSOID:
            if self.max_pitch_theta_m is None or not self.max_pitch_theta_m > 0:
                raise ValueError("sinusoid needs max_pitch_theta_m > 0")
            if self.wiener_rate_b is not None:
                raise ValueError("wiener_rate_b set on a sinusoid process")
            if self.freq_law is None:
                object.__setattr__(self, "freq_law", FrequencyLaw())
            if self.max_pitch_theta_m > SMALL_ANGLE_LIMIT_RAD + 1e-12:
                warnings.warn(
                    f"max pitch {np.rad2deg(self.max_pitch_theta_m):.2f} deg exceeds the "
                    "10 deg small-angle regime",
                    stacklevel=3,
                )
        elif any(v is not None for v in (self.wiener_rate_b, self.max_pitch_theta_m, self.freq_law)):
            raise ValueError("no-wobble process takes no parameters")

    @classmethod
    def wiener(cls, b: float) -> "PitchProcessSpec":
        return cls(ProcessKind.WIENER, wiener_rate_b=b)

    @classmethod
    def sinusoid(cls, theta_m: float, freq_law: FrequencyLaw | None = None) -> "PitchProcessSpec":
        return cls(ProcessKind.SINUSOID, max_pitch_theta_m=theta_m, freq_law=freq_law or FrequencyLaw())

    @classmethod
    def none(cls) -> "PitchProcessSpec":
        return cls(ProcessKind.NONE)

    @property
    def has_stationary_increments(self) -> bool:
        return self.kind is not ProcessKind.SINUSOID


@dataclass(frozen=True)
class PitchPath:
    times: np.ndarray
    values: np.ndarray
    seed: object = field(default=None, compare=False)


def realization_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent stream for realization ``index``; the same pair always gives the same stream."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))


def _check_grid(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("time grid must be a non-empty 1-D array")
    if times[0] < 0:
        raise ValueError("time grid must start at t >= 0")
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")
    return times


def draw_values(spec: PitchProcessSpec, times: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Pitch values on an already-validated grid, consuming draws from ``rng``."""
    if spec.kind is ProcessKind.NONE:
        return np.zeros_like(times)
    if spec.kind is ProcessKind.WIENER:
        steps = np.diff(times, prepend=0.0)
        increments = rng.standard_normal(times.size) * np.sqrt(spec.wiener_rate_b * steps)
        return np.cumsum(increments)
    amplitude = rng.uniform(-spec.max_pitch_theta_m, spec.max_pitch_theta_m)
    freq = spec.freq_law.sample(rng)
    return amplitude * np.sin(2.0 * np.pi * freq * times)


def sample_path(spec: PitchProcessSpec, times, seed) -> PitchPath:
    """Sample one pitch trajectory on ``times``.

    ``seed`` is anything :func:`numpy.random.default_rng` accepts (an int or a
    ``SeedSequence``); equal seeds give bit-identical paths.
    """
    times = _check_grid(times)
    rng = np.random.default_rng(seed)
    return PitchPath(times, draw_values(spec, times, rng), seed)


def increment_cf_wiener(c, tau, b: float):
    """Characteristic function ``E[exp(j c W(tau))] = exp(-c^2 b tau / 2)`` of a Wiener increment."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be non-negative")
    out = np.exp(-0.5 * np.square(c) * b * tau)
    return float(out) if out.ndim == 0 else out


def amplitude_cf_sinusoid(c, s, theta_m: float):
    """Average of ``exp(j c A s)`` over ``A ~ U[-theta_m, theta_m)``.

    Equals ``sinc(c theta_m s / pi)`` with the normalized ``sinc(x) = sin(pi x)/(pi x)``,
    exactly 1 at zero argument.
    """
    out = np.sinc(np.multiply(np.multiply(c, s), theta_m) / np.pi)
    return float(out) if np.ndim(out) == 0 else out
