"""Coherence time: first lag where the normalized ACF falls to a threshold."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy.optimize import bisect

from .acf_analytic import AcfCurve, Provenance, wiener_decay_rate
from .spectrum import ChannelSpec

#: Relative precision of the refined crossing.
REFINE_RTOL = 1e-6
#: Allowed fall of the tail's lower envelope for a curve to count as a plateau.
TAIL_FLATNESS = 1e-4
#: Standard errors a Monte Carlo point must clear before a crossing is accepted.
MC_SIGMAS = 3.0


class CoherenceKind(str, enum.Enum):
    FINITE = "finite"
    UNBOUNDED = "unbounded"


class InconclusiveCoherence(RuntimeError):
    """The search window ended with the ACF still falling, or noise blurs the crossing."""


@dataclass(frozen=True)
class CoherenceResult:
    kind: CoherenceKind
    anchor_t: float
    threshold_gamma: float
    t_c_seconds: float | None = None
    limiting_acf: float | None = None

    @property
    def is_finite(self) -> bool:
        return self.kind is CoherenceKind.FINITE

    @property
    def seconds(self) -> float:
        """Coherence time, ``inf`` when unbounded."""
        return self.t_c_seconds if self.is_finite else float("inf")

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "t_c_seconds": self.t_c_seconds,
            "limiting_acf": self.limiting_acf,
            "anchor_t": self.anchor_t,
            "threshold_gamma": self.threshold_gamma,
        }


def default_tau_grid(tau_max: float = 1.0, n: int = 256, tau_min: float = 1e-6, log_until: float = 0.1, n_log: int | None = None):
    """Lag grid ``0, log-spaced [tau_min, log_until], linear (log_until, tau_max]``.

    By default a quarter of the points are linear.  With 256 points the log
    head steps about 6%, which resolves sub-millisecond crossings and dips a
    few milliseconds wide near 10 ms.
    """
    if not 0 < tau_min < log_until < tau_max:
        raise ValueError("need 0 < tau_min < log_until < tau_max")
    if n_log is None:
        n_log = n - 1 - n // 4
    n_lin = n - 1 - n_log
    if n_lin < 1:
        raise ValueError("grid too small for its log head")
    head = np.geomspace(tau_min, log_until, n_log)
    lin = np.linspace(log_until, tau_max, n_lin + 1)[1:]
    return np.concatenate([[0.0], head, lin])


def _check_gamma(gamma: float):
    if not 0.0 < gamma <= 1.0:
        raise ValueError("threshold gamma must lie in (0, 1]")


def _plateau_or_raise(taus, ratio, gamma, anchor_t) -> CoherenceResult:
    """Classify a window with no crossing as a plateau, else report it inconclusive."""
    start = taus[-1] / 10.0
    tail = taus >= start
    mid = 0.5 * (start + taus[-1])
    early, late = ratio[tail & (taus <= mid)], ratio[tail & (taus > mid)]
    if early.size == 0 or late.size == 0:
        raise InconclusiveCoherence("too few lags in the last decade of the search window")
    # decaying oscillations about a limit raise the lower envelope; a still-falling curve lowers it
    drop = float(np.min(early) - np.min(late))
    if drop >= TAIL_FLATNESS:
        raise InconclusiveCoherence(
            f"no crossing of gamma={gamma} by tau={taus[-1]:.3g} s and the ACF tail is "
            f"still falling (envelope drop {drop:.3g}); extend the search window"
        )
    return CoherenceResult(
        CoherenceKind.UNBOUNDED, anchor_t, gamma, limiting_acf=float(np.min(ratio))
    )


def _refine(fn, lo: float, hi: float, target: float) -> float:
    """Bisect ``fn(tau) = target`` on a bracket where fn(lo) > target >= fn(hi)."""
    g = lambda x: fn(x) - target
    if g(hi) == 0.0:
        return hi
    return float(bisect(g, lo, hi, xtol=1e-15, rtol=REFINE_RTOL))


def coherence_time(curve: AcfCurve, gamma: float) -> CoherenceResult:
    """First lag where ``Re R / max Re R`` drops to ``gamma``.

    Analytic curves are refined with their generating function; Monte Carlo
    curves are linearly interpolated and a crossing only counts once the point
    estimate plus three standard errors is below threshold.
    """
    _check_gamma(gamma)
    real = curve.values.real
    peak = float(np.max(real))
    if not peak > 0:
        raise ValueError("curve maximum must be positive")
    ratio = real / peak
    below = np.nonzero(ratio <= gamma)[0]
    if below.size == 0:
        return _plateau_or_raise(curve.taus, ratio, gamma, curve.anchor_t)
    i = int(below[0])
    taus = curve.taus
    if curve.provenance is Provenance.MONTE_CARLO and curve.stderr is not None:
        if real[i] + MC_SIGMAS * curve.stderr[i] > gamma * peak:
            raise InconclusiveCoherence(
                f"crossing at tau={taus[i]:.3g} s is within {MC_SIGMAS:g} standard errors of "
                "the threshold; increase the number of realizations"
            )
    if i == 0:
        return CoherenceResult(CoherenceKind.FINITE, curve.anchor_t, gamma, t_c_seconds=float(taus[0]))
    lo, hi = float(taus[i - 1]), float(taus[i])
    if curve.generator is not None:
        t_c = _refine(lambda x: curve.generator(x) / peak, lo, hi, gamma)
    else:
        r0, r1 = ratio[i - 1], ratio[i]
        t_c = lo + (r0 - gamma) / (r0 - r1) * (hi - lo)
    return CoherenceResult(CoherenceKind.FINITE, curve.anchor_t, gamma, t_c_seconds=t_c)


def scan_coherence_time(
    fn: Callable[[np.ndarray], np.ndarray],
    gamma: float,
    taus=None,
    anchor_t: float = 0.0,
    block: int = 32,
) -> CoherenceResult:
    """Coherence time of an exact ACF, evaluated lazily in blocks of lags.

    ``fn`` maps a lag array to ACF values.  The first lag must be 0: for a
    genuine autocorrelation ``|R(t, t+tau)| <= R(t, t)``, so the zero-lag value
    is the maximum and evaluation can stop at the first crossing.
    """
    _check_gamma(gamma)
    taus = default_tau_grid() if taus is None else np.asarray(taus, dtype=float)
    if taus[0] != 0.0:
        raise ValueError("lazy scan needs the lag grid to start at 0")
    scalar = lambda x: float(np.real(np.atleast_1d(fn(np.array([x])))[0]))
    peak = scalar(0.0)
    if not peak > 0:
        raise ValueError("zero-lag ACF must be positive")
    if gamma >= 1.0:
        return CoherenceResult(CoherenceKind.FINITE, anchor_t, gamma, t_c_seconds=0.0)
    ratios = [1.0]
    for start in range(1, taus.size, block):
        chunk = taus[start:start + block]
        vals = np.real(np.atleast_1d(fn(chunk))) / peak
        hits = np.nonzero(vals <= gamma)[0]
        if hits.size:
            j = start + int(hits[0])
            t_c = _refine(lambda x: scalar(x) / peak, float(taus[j - 1]), float(taus[j]), gamma)
            return CoherenceResult(CoherenceKind.FINITE, anchor_t, gamma, t_c_seconds=t_c)
        ratios.extend(vals)
    return _plateau_or_raise(taus, np.array(ratios), gamma, anchor_t)


@dataclass(frozen=True)
class NonstationaryCoherence:
    result: CoherenceResult
    table: tuple[CoherenceResult, ...]

    @property
    def minimizing_t(self) -> float | None:
        finite = [r for r in self.table if r.is_finite]
        if not finite:
            return None
        return min(finite, key=lambda r: r.t_c_seconds).anchor_t


def coherence_time_nonstationary(
    acf_fn: Callable[[float, np.ndarray], np.ndarray],
    gamma: float,
    t_grid: Iterable[float],
    taus=None,
) -> NonstationaryCoherence:
    """Minimum over anchor times of the per-anchor coherence time.

    Each ``R(t, .)`` is normalized by its own zero-lag value.  The result is
    unbounded only if every anchor is unbounded.
    """
    _check_gamma(gamma)
    t_grid = [float(t) for t in t_grid]
    if not t_grid:
        raise ValueError("anchor grid must be non-empty")
    table = tuple(
        scan_coherence_time(lambda x, t=t: acf_fn(t, x), gamma, taus, anchor_t=t) for t in t_grid
    )
    finite = [r for r in table if r.is_finite]
    if finite:
        best = min(finite, key=lambda r: r.t_c_seconds)
    else:
        best = min(table, key=lambda r: r.limiting_acf)
    return NonstationaryCoherence(best, table)


def coherence_time_wiener_los(spec: ChannelSpec, b: float, gamma: float) -> float:
    """Closed-form coherence time of a pure-LoS link under Wiener pitch."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("closed form needs 0 < gamma < 1")
    # cos(pi/2) evaluates to ~6e-17, not 0
    if np.pi / 2 - spec.los_aod < 1e-12:
        raise ValueError("LoS path orthogonal to the pitch displacement: coherence is unbounded")
    return float(np.log(1.0 / gamma) / (wiener_decay_rate(spec, b) * np.cos(spec.los_aod) ** 2))
