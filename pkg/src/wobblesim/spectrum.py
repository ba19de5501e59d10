"""Rician / Laplacian angular power spectrum and multipath draws."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.constants import speed_of_light

from .quadrature import integrate

DEFAULT_MAX_AOD = float(np.deg2rad(85.0))


@dataclass(frozen=True)
class AngleLaw:
    """Distribution of multipath departure angles (radians from the vertical).

    ``uniform`` spans ``[low, high]``; ``point`` puts all mass on ``low``.
    """

    kind: str = "uniform"
    low: float = 0.0
    high: float = DEFAULT_MAX_AOD

    def __post_init__(self):
        if self.kind not in ("uniform", "point"):
            raise ValueError(f"unknown angle law {self.kind!r}")
        if not 0.0 <= self.low < np.pi / 2:
            raise ValueError("departure angles must lie in [0, pi/2)")
        if self.kind == "uniform" and not self.low < self.high < np.pi / 2:
            raise ValueError("uniform angle law needs low < high < pi/2")

    @classmethod
    def point(cls, value: float) -> "AngleLaw":
        return cls("point", value, value)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "point":
            return np.full(size, self.low)
        return rng.uniform(self.low, self.high, size)

    def expect(self, fn, *, breakpoints=(), rtol: float = 1e-8, atol: float = 0.0):
        """``E[fn(phi)]`` under this law; ``fn`` is vectorized over its first axis."""
        if self.kind == "point":
            return np.asarray(fn(np.array([self.low])))[0]
        width = self.high - self.low
        return integrate(
            fn, self.low, self.high, breakpoints=breakpoints, rtol=rtol, atol=atol * width
        ) / width


def _unit_gain(phi):
    return np.ones_like(np.asarray(phi, dtype=float))


@dataclass(frozen=True)
class ChannelSpec:
    """Air-to-ground link parameters. Angles are in radians."""

    carrier_hz: float
    antenna_offset_m: float = 0.4
    uav_height_m: float = 100.0
    rician_k: float = 11.5
    laplace_scale: float = 1.0
    los_aod: float = float(np.deg2rad(20.0))
    num_mpc: int = 20
    angle_law: AngleLaw = field(default_factory=AngleLaw)
    gain_pattern: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.carrier_hz > 0:
            raise ValueError("carrier frequency must be positive")
        if not self.antenna_offset_m > 0 or not self.uav_height_m > 0:
            raise ValueError("antenna offset and UAV height must be positive")
        if self.rician_k < 0:
            raise ValueError("Rician K-factor must be non-negative")
        if not self.laplace_scale > 0:
            raise ValueError("Laplacian scale must be positive")
        # the horizon (pi/2) is allowed: it is the LoS path the pitch cannot perturb
        if not 0.0 <= self.los_aod <= np.pi / 2:
            raise ValueError("LoS departure angle must lie in [0, pi/2]")
        if self.num_mpc < 0 or int(self.num_mpc) != self.num_mpc:
            raise ValueError("number of multipath components must be a non-negative integer")

    @property
    def wavelength_m(self) -> float:
        return speed_of_light / self.carrier_hz

    def gain(self, phi):
        return (self.gain_pattern or _unit_gain)(phi)

    def path_weight(self, phi):
        """Per-path power ``gain^2 * exp(-|phi - phi_0| / sigma) / (2 sigma)``."""
        sigma = self.laplace_scale
        lap = np.exp(-np.abs(np.asarray(phi) - self.los_aod) / sigma) / (2.0 * sigma)
        return np.square(self.gain(phi)) * lap

    def expect_angle(self, fn, *, rtol: float = 1e-8, atol: float = 0.0):
        """Expectation over one multipath angle, splitting at the Laplacian kink."""
        return self.angle_law.expect(fn, breakpoints=(self.los_aod,), rtol=rtol, atol=atol)

    def mean_path_power(self) -> float:
        return float(self.expect_angle(self.path_weight))

    def mean_total_power(self) -> float:
        """Expected ``|alpha_0|^2 + sum |alpha_n|^2``; the ACF value at zero lag."""
        if self.num_mpc == 0:
            return 1.0
        return (self.rician_k + 1.0) * self.num_mpc * self.mean_path_power()


def default_num_mpc(carrier_hz: float) -> int:
    """Scatterer count used for the reference scenarios: 20 up to 6 GHz, 10 above."""
    return 20 if carrier_hz <= 6e9 * (1 + 1e-12) else 10


def reference_channel(carrier_hz: float, **overrides) -> ChannelSpec:
    """Reference scenario: K = 11.5, LoS AoD 20 deg, sigma = 1, a_D = 0.4 m, z_D = 100 m."""
    params = dict(carrier_hz=carrier_hz, num_mpc=default_num_mpc(carrier_hz))
    params.update(overrides)
    return ChannelSpec(**params)


@dataclass(frozen=True)
class MpcDraw:
    angles: np.ndarray
    powers: np.ndarray
    los_power: float
    static_phases: np.ndarray
    degenerate_los: bool = False


def draw_from(spec: ChannelSpec, rng: np.random.Generator) -> MpcDraw:
    n = spec.num_mpc
    angles = spec.angle_law.sample(rng, n)
    phases = rng.uniform(0.0, 2.0 * np.pi, n)
    powers = spec.path_weight(angles) if n else np.zeros(0)
    if n == 0:
        # K * (empty sum) would silence the LoS path entirely
        return MpcDraw(angles, powers, 1.0, phases, degenerate_los=True)
    return MpcDraw(angles, powers, float(spec.rician_k * powers.sum()), phases)


def draw_mpcs(spec: ChannelSpec, seed) -> MpcDraw:
    """Departure angles, Laplacian powers, LoS power and static phases for one realization."""
    return draw_from(spec, np.random.default_rng(seed))


def total_power(draw: MpcDraw) -> float:
    return float(draw.los_power + np.sum(draw.powers))
