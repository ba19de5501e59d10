"""Channel autocorrelation by quadrature over departure angle and wobble frequency.

The autocorrelation of the received signal is a power-weighted average of the
characteristic function of the pitch increment ``theta(t+tau) - theta(t)``,
scaled per path by ``(2 pi / lambda) a_D cos(phi_n)``.  Multipath angles are
i.i.d., so the sum over ``n`` is ``N`` times a single-angle expectation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .quadrature import integrate
from .spectrum import ChannelSpec
from .wobble import FrequencyLaw, PitchProcessSpec, ProcessKind

#: Relative agreement required between the 64- and 128-node rules.
QUAD_RTOL = 1e-8
#: Absolute accuracy of the inner frequency average (its magnitude is at most 1).
SINC_AVERAGE_ATOL = 1e-10


class Provenance(str, enum.Enum):
    ANALYTIC = "analytic"
    MONTE_CARLO = "montecarlo"


@dataclass(eq=False)
class AcfCurve:
    """Autocorrelation ``R(t, t + tau)`` sampled on a tau grid at fixed anchor ``t``.

    ``stderr``/``stderr_imag`` are standard errors of the real and imaginary
    parts (Monte Carlo only).  ``generator`` evaluates the exact curve at an
    arbitrary lag and is used to refine threshold crossings.
    """

    taus: np.ndarray
    values: np.ndarray
    normalizer: float
    provenance: Provenance = Provenance.ANALYTIC
    anchor_t: float = 0.0
    stderr: np.ndarray | None = None
    stderr_imag: np.ndarray | None = None
    generator: Callable[[float], float] | None = field(default=None, repr=False)

    def __post_init__(self):
        self.taus = np.asarray(self.taus, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        self.provenance = Provenance(self.provenance)
        if self.taus.shape != self.values.shape or self.taus.ndim != 1:
            raise ValueError("taus and values must be 1-D arrays of equal length")
        if np.any(np.diff(self.taus) <= 0):
            raise ValueError("tau grid must be strictly increasing")

    @property
    def normalized(self) -> np.ndarray:
        return self.values.real / self.normalizer


@dataclass(eq=False)
class AutocorrMatrix:
    """``E[r(t) r^H(t + tau)]`` across M UAVs at one lag."""

    entries: np.ndarray
    stderr_real: np.ndarray | None = None
    stderr_imag: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def stderr(self) -> np.ndarray | None:
        """Standard error of each complex entry."""
        if self.stderr_real is None:
            return None
        return np.hypot(self.stderr_real, self.stderr_imag)


def _lags(tau) -> np.ndarray:
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0) or not np.all(np.isfinite(tau)):
        raise ValueError("lags must be finite and non-negative")
    return tau


def _shaped(values: np.ndarray, like: np.ndarray):
    values = values.reshape(like.shape)
    return float(values) if values.ndim == 0 else values


def wiener_decay_rate(spec: ChannelSpec, b: float) -> float:
    """``2 pi^2 a_D^2 b / lambda^2``; multiply by ``cos^2(phi) tau`` for the exponent."""
    return 2.0 * np.pi**2 * spec.antenna_offset_m**2 * b / spec.wavelength_m**2


def _wiener_terms(spec: ChannelSpec, b: float, variance_time: np.ndarray):
    """LoS factor and multipath expectation ``E[w exp(-rate cos^2 tau)]`` on a flat lag array."""
    rate = wiener_decay_rate(spec, b)
    los = np.exp(-rate * np.cos(spec.los_aod) ** 2 * variance_time)
    if spec.num_mpc == 0:
        return los, None, None
    mean_w = spec.mean_path_power()

    def integrand(phi):
        decay = np.exp(-rate * np.outer(np.cos(phi) ** 2, variance_time))
        return spec.path_weight(phi)[:, None] * decay

    mpc = spec.expect_angle(integrand, rtol=QUAD_RTOL, atol=QUAD_RTOL * mean_w)
    return los, mpc, mean_w


def acf_wiener(spec: ChannelSpec, b: float, tau):
    """Stationary ACF for Wiener pitch with rate ``b`` rad^2/s. Real and positive."""
    if not b > 0:
        raise ValueError("Wiener rate b must be positive")
    tau = _lags(tau)
    return _shaped(_wiener_flat(spec, b, tau.ravel()), tau)


def _wiener_flat(spec, b, variance_time):
    los, mpc, mean_w = _wiener_terms(spec, b, variance_time)
    if mpc is None:
        return los
    n = spec.num_mpc
    return n * (spec.rician_k * mean_w * los + mpc)


def acf_ratio_k(spec: ChannelSpec, b: float, tau, K: float):
    """Normalized Wiener ACF ``R(tau; K) / R(0; K)`` as an explicit function of K."""
    if K < 0:
        raise ValueError("K must be non-negative")
    tau = _lags(tau)
    los, mpc, mean_w = _wiener_terms(spec, b, tau.ravel())
    if mpc is None:
        return _shaped(los, tau)
    ratio = K / (K + 1.0) * los + mpc / ((K + 1.0) * mean_w)
    return _shaped(ratio, tau)


def effective_doppler(theta_tau: float, tau: float, spec: ChannelSpec) -> float:
    """Wobble-induced Doppler ``a_D cos(phi_0) theta(tau) / (lambda tau)`` in Hz."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    return spec.antenna_offset_m * np.cos(spec.los_aod) * theta_tau / (spec.wavelength_m * tau)


def _sine_difference(t: float, tau: float):
    if t == 0.0:
        return lambda f: np.sin(2.0 * np.pi * f * tau)
    return lambda f: np.sin(2.0 * np.pi * f * (t + tau)) - np.sin(2.0 * np.pi * f * t)


def _sinc_average(kappas: np.ndarray, law: FrequencyLaw, t: float, tau: float, diff=None):
    """``E_F[sinc(kappa * s(F))]`` with ``s`` the sine difference, for each kappa."""
    diff = diff or _sine_difference(t, tau)
    if law.kind == "point":
        return np.sinc(kappas * diff(np.array(law.low)))
    width = law.high - law.low
    # sine cycles swept across the frequency band, times sinc lobes per cycle
    cycles = width * (2.0 * t + tau) * (1.0 + 4.0 * float(np.max(np.abs(kappas), initial=0.0)))
    panels = 1 + int(np.ceil(cycles / 8.0))
    avg = integrate(
        lambda f: np.sinc(np.outer(diff(f), kappas)),
        law.low,
        law.high,
        panels=panels,
        rtol=0.0,
        atol=SINC_AVERAGE_ATOL * width,
    )
    return avg / width


def _sinusoid_single(spec: ChannelSpec, proc: PitchProcessSpec, t: float, tau: float, diff=None):
    kappa0 = 2.0 / spec.wavelength_m * spec.antenna_offset_m * proc.max_pitch_theta_m
    law = proc.freq_law
    los = float(_sinc_average(np.array([kappa0 * np.cos(spec.los_aod)]), law, t, tau, diff)[0])
    if spec.num_mpc == 0:
        return los
    mean_w = spec.mean_path_power()

    def integrand(phi):
        return spec.path_weight(phi) * _sinc_average(kappa0 * np.cos(phi), law, t, tau, diff)

    mpc = float(spec.expect_angle(integrand, rtol=QUAD_RTOL, atol=QUAD_RTOL * mean_w))
    return spec.num_mpc * (spec.rician_k * mean_w * los + mpc)


def _require_sinusoid(proc: PitchProcessSpec):
    if proc.kind is not ProcessKind.SINUSOID:
        raise ValueError("sinusoidal ACF requires a sinusoid pitch process")


def acf_sinusoid(spec: ChannelSpec, proc: PitchProcessSpec, t: float, tau):
    """Non-stationary ACF ``R(t, t + tau)`` for random-amplitude sinusoidal pitch."""
    _require_sinusoid(proc)
    if t < 0:
        raise ValueError("anchor time must be non-negative")
    tau = _lags(tau)
    flat = np.array([_sinusoid_single(spec, proc, float(t), float(x)) for x in tau.ravel()])
    return _shaped(flat, tau)


def acf_sinusoid_t0(spec: ChannelSpec, proc: PitchProcessSpec, tau):
    """Sinusoidal ACF anchored at ``t = 0``, where the sine difference is ``sin(2 pi F tau)``."""
    _require_sinusoid(proc)
    tau = _lags(tau)
    flat = np.array(
        [
            _sinusoid_single(spec, proc, 0.0, float(x), lambda f, x=x: np.sin(2.0 * np.pi * f * x))
            for x in tau.ravel()
        ]
    )
    return _shaped(flat, tau)


def acf(spec: ChannelSpec, proc: PitchProcessSpec, t: float, tau):
    """``R(t, t + tau)`` for any pitch process.

    For Wiener pitch the increment variance is formed from the two time
    instants, so stationarity shows up numerically rather than by construction.
    """
    tau = _lags(tau)
    if proc.kind is ProcessKind.NONE:
        return _shaped(np.full(tau.size, spec.mean_total_power()), tau)
    if proc.kind is ProcessKind.WIENER:
        elapsed = (t + tau.ravel()) - t
        return _shaped(_wiener_flat(spec, proc.wiener_rate_b, elapsed), tau)
    return acf_sinusoid(spec, proc, t, tau)


def analytic_curve(spec: ChannelSpec, proc: PitchProcessSpec, taus, t: float = 0.0) -> AcfCurve:
    taus = _lags(taus)
    values = np.atleast_1d(acf(spec, proc, t, taus))
    # zero-lag value: the maximum of any autocorrelation, computed by the same quadrature
    zero = values[0] if taus.size and taus.flat[0] == 0.0 else acf(spec, proc, t, 0.0)
    return AcfCurve(
        taus=taus,
        values=values.astype(complex),
        normalizer=float(zero),
        provenance=Provenance.ANALYTIC,
        anchor_t=t,
        generator=lambda x: float(acf(spec, proc, t, x)),
    )


def mus_acf_matrix(specs: Sequence[ChannelSpec], proc: PitchProcessSpec, t: float, tau: float) -> AutocorrMatrix:
    """Autocorrelation matrix for M UAVs acting as a distributed array.

    Cross-UAV entries vanish: each UAV's path phases are independent and
    uniform modulo one wavelength, so only the per-UAV ACFs survive.
    """
    if len(specs) == 0:
        raise ValueError("need at least one UAV")
    ref = specs[0]
    for s in specs[1:]:
        if not np.isclose(s.wavelength_m, ref.wavelength_m, rtol=1e-12, atol=0.0):
            raise ValueError("all UAVs must share one carrier wavelength")
        if s.antenna_offset_m != ref.antenna_offset_m:
            raise ValueError("all UAVs must share the antenna offset")
    diag = np.array([float(acf(s, proc, t, float(tau))) for s in specs])
    return AutocorrMatrix(np.diag(diag).astype(complex))
