"""Monte Carlo estimation of the channel ACF from simulated received signals.

Realization ``i`` draws its multipath angles, static phases and pitch path from
the stream ``SeedSequence(master_seed, spawn_key=(i,))``, so any realization can
be regenerated on its own.  Realizations are processed in fixed-size chunks
whose moments are merged in chunk order; serial and threaded runs therefore
produce bit-identical estimates.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .acf_analytic import AcfCurve, AutocorrMatrix, Provenance
from .geometry import Point3, exact_path_delta, point_from_angles
from .spectrum import ChannelSpec, draw_from
from .wobble import PitchProcessSpec, _check_grid, draw_values

MIN_REALIZATIONS = 100
#: Scatterer heights are drawn uniformly on [0, SCATTERER_HEIGHT_FRACTION * z_D].
SCATTERER_HEIGHT_FRACTION = 0.3


@dataclass(frozen=True)
class EnsembleConfig:
    num_realizations: int = 100_000
    master_seed: int = 1
    time_grid: np.ndarray | None = None
    uav_count: int = 1
    chunk_size: int = 2000
    workers: int = 1

    def __post_init__(self):
        if self.num_realizations < 1:
            raise ValueError("need at least one realization")
        if self.uav_count < 1:
            raise ValueError("need at least one UAV")
        if self.chunk_size < 1 or self.workers < 1:
            raise ValueError("chunk_size and workers must be positive")
        if self.time_grid is not None:
            object.__setattr__(self, "time_grid", _check_grid(self.time_grid))

    def seed_sequence(self, index: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.master_seed, spawn_key=(index,))


# -- single realization -------------------------------------------------------

@dataclass
class _Realization:
    amplitudes: np.ndarray  # (P,) with P = N + 1, LoS first
    phases: np.ndarray  # (P,) static phase per path
    aods: np.ndarray  # (P,)
    theta: np.ndarray  # (T,)
    scatterers: np.ndarray | None = None  # (P, 3), exact-geometry mode only


def _draw_realization(spec, proc, times, rng, exact: bool, ue_azimuth: float) -> _Realization:
    mpc = draw_from(spec, rng)
    theta = draw_values(proc, times, rng)
    k = 2.0 * np.pi / spec.wavelength_m
    los_distance = spec.uav_height_m / np.cos(spec.los_aod)
    amplitudes = np.sqrt(np.concatenate([[mpc.los_power], mpc.powers]))
    phases = np.concatenate([[np.mod(k * los_distance, 2.0 * np.pi)], mpc.static_phases])
    aods = np.concatenate([[spec.los_aod], mpc.angles])
    real = _Realization(amplitudes, phases, aods, theta)
    if exact:
        # drawn last so approximate and exact runs share every other draw
        n = spec.num_mpc
        omega = np.concatenate([[ue_azimuth], rng.uniform(0.0, 2.0 * np.pi, n)])
        heights = np.concatenate(
            [[0.0], rng.uniform(0.0, SCATTERER_HEIGHT_FRACTION * spec.uav_height_m, n)]
        )
        pts = point_from_angles(aods, omega, heights, spec.uav_height_m)
        real.scatterers = np.stack([pts.x, pts.y, pts.z], axis=-1)
    return real


def _path_deltas(spec: ChannelSpec, aods, theta, scatterers=None):
    """Path-length change from rest, shape ``aods.shape + theta.shape[-1:]``."""
    a_D = spec.antenna_offset_m
    if scatterers is None:
        return a_D * np.cos(aods)[..., None] * theta[..., None, :]
    pt = Point3(scatterers[..., 0, None], scatterers[..., 1, None], scatterers[..., 2, None])
    return exact_path_delta(pt, 0.0, theta[..., None, :], a_D, spec.uav_height_m)


def _received(spec: ChannelSpec, amplitudes, phases, aods, theta, scatterers=None):
    """``r(t) = sum_n alpha_n exp(-j (psi_n + k delta_n(t)))``; works on stacked realizations."""
    k = 2.0 * np.pi / spec.wavelength_m
    delta = _path_deltas(spec, aods, theta, scatterers)
    phase = phases[..., None] + k * delta
    return np.einsum("...p,...pt->...t", amplitudes.astype(complex), np.exp(-1j * phase))


def simulate_received(
    spec: ChannelSpec,
    proc: PitchProcessSpec,
    times,
    seed,
    *,
    exact_geometry: bool = False,
    ue_azimuth: float = 0.0,
) -> np.ndarray:
    """Baseband received signal of one realization on ``times``.

    In exact-geometry mode scatterers are placed explicitly (uniform azimuth,
    height uniform up to 30% of the UAV height) and path lengths are recomputed
    without the small-angle approximation.
    """
    times = _check_grid(times)
    rng = np.random.default_rng(seed)
    real = _draw_realization(spec, proc, times, rng, exact_geometry, ue_azimuth)
    return _received(spec, real.amplitudes, real.phases, real.aods, real.theta, real.scatterers)


# -- moment accumulation ------------------------------------------------------

@dataclass
class _Moments:
    """Count, mean and centered sums of squares for real and imaginary parts."""

    n: int
    mean: np.ndarray
    m2_re: np.ndarray
    m2_im: np.ndarray

    @classmethod
    def of(cls, samples: np.ndarray) -> "_Moments":
        mean = samples.mean(axis=0)
        dev = samples - mean
        return cls(samples.shape[0], mean, np.sum(dev.real**2, axis=0), np.sum(dev.imag**2, axis=0))

    def merge(self, other: "_Moments") -> "_Moments":
        n = self.n + other.n
        d = other.mean - self.mean
        w = self.n * other.n / n
        return _Moments(
            n,
            self.mean + d * (other.n / n),
            self.m2_re + other.m2_re + d.real**2 * w,
            self.m2_im + other.m2_im + d.imag**2 * w,
        )

    def stderr(self):
        denom = max(self.n - 1, 1) * self.n
        return np.sqrt(self.m2_re / denom), np.sqrt(self.m2_im / denom)


def _reduce(chunk_fn, cfg: EnsembleConfig) -> _Moments:
    starts = list(range(0, cfg.num_realizations, cfg.chunk_size))
    bounds = [(s, min(s + cfg.chunk_size, cfg.num_realizations)) for s in starts]
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(lambda b: _Moments.of(chunk_fn(*b)), bounds))
    else:
        parts = [_Moments.of(chunk_fn(*b)) for b in bounds]
    total = parts[0]
    for part in parts[1:]:
        total = total.merge(part)
    return total


def _lag_times(cfg: EnsembleConfig, t: float, tau_grid):
    """Sampling grid plus the indices of ``t`` and each ``t + tau`` on it."""
    taus = np.asarray(tau_grid, dtype=float)
    if taus.ndim != 1 or np.any(taus < 0) or np.any(np.diff(taus) <= 0):
        raise ValueError("tau grid must be non-negative and strictly increasing")
    wanted = np.concatenate([[t], t + taus])
    if cfg.time_grid is None:
        times = np.unique(wanted)
    else:
        times = cfg.time_grid
    idx = np.clip(np.searchsorted(times, wanted), 1, max(times.size - 1, 1))
    idx = np.where(np.abs(times[idx - 1] - wanted) <= np.abs(times[idx] - wanted), idx - 1, idx)
    tol = 1e-12 * max(1.0, float(times[-1]))
    if np.any(np.abs(times[idx] - wanted) > tol):
        raise ValueError("t and every t + tau must lie on the ensemble time grid")
    return times, idx[0], idx[1:]


def _check_count(cfg: EnsembleConfig):
    if cfg.num_realizations < MIN_REALIZATIONS:
        raise ValueError(f"need at least {MIN_REALIZATIONS} realizations for standard errors")


def estimate_acf(
    cfg: EnsembleConfig,
    spec: ChannelSpec,
    proc: PitchProcessSpec,
    t: float,
    tau_grid,
    *,
    exact_geometry: bool = False,
    ue_azimuth: float = 0.0,
) -> AcfCurve:
    """Sample mean of ``r(t) r*(t + tau)`` over the ensemble, with standard errors."""
    _check_count(cfg)
    times, i0, lag_idx = _lag_times(cfg, t, tau_grid)

    def chunk(lo, hi):
        reals = [
            _draw_realization(spec, proc, times, np.random.default_rng(cfg.seed_sequence(i)), exact_geometry, ue_azimuth)
            for i in range(lo, hi)
        ]
        stack = lambda name: np.stack([getattr(r, name) for r in reals])
        scat = stack("scatterers") if exact_geometry else None
        r = _received(spec, stack("amplitudes"), stack("phases"), stack("aods"), stack("theta"), scat)
        prod = r[:, i0, None] * np.conj(r[:, lag_idx])
        # zero lag is |r|^2 exactly; the fused product can leave an imaginary residue
        prod[:, lag_idx == i0] = np.abs(r[:, i0, None]) ** 2
        return prod

    mom = _reduce(chunk, cfg)
    se_re, se_im = mom.stderr()
    return AcfCurve(
        taus=np.asarray(tau_grid, dtype=float),
        values=mom.mean,
        normalizer=float(np.max(mom.mean.real)),
        provenance=Provenance.MONTE_CARLO,
        anchor_t=float(t),
        stderr=se_re,
        stderr_imag=se_im,
    )


def _draw_mus(specs: Sequence[ChannelSpec], proc, times, rng, shared: bool):
    """Stacked per-UAV amplitudes, phases, angles and pitch paths for one realization."""
    ref = specs[0]
    n = ref.num_mpc
    if shared:
        common = draw_from(ref, rng)
    amps, phases, aods, thetas = [], [], [], []
    for spec in specs:
        mpc = common if shared else draw_from(spec, rng)
        powers = spec.path_weight(mpc.angles) if n else np.zeros(0)
        los_power = spec.rician_k * powers.sum() if n else 1.0
        # per-UAV UAV-to-scatterer distances: uniform phases modulo one wavelength
        own = rng.uniform(0.0, 2.0 * np.pi, n + 1)
        amps.append(np.sqrt(np.concatenate([[los_power], powers])))
        phases.append(own + np.concatenate([[0.0], mpc.static_phases]))
        aods.append(np.concatenate([[spec.los_aod], mpc.angles]))
        thetas.append(draw_values(proc, times, rng))
    return np.array(amps), np.array(phases), np.array(aods), np.array(thetas)


def estimate_acf_matrix(
    cfg: EnsembleConfig,
    specs: Sequence[ChannelSpec],
    proc: PitchProcessSpec,
    t: float,
    tau_grid,
    *,
    shared_scatterers: bool = True,
) -> list[AutocorrMatrix]:
    """Ensemble estimate of ``E[r_i(t) r_k*(t + tau)]`` for every UAV pair and lag.

    Every UAV wobbles independently.  With ``shared_scatterers`` all UAVs see
    the same scatterer set (same angles and scatterer-to-UE phases).
    """
    _check_count(cfg)
    specs = list(specs)
    if len(specs) != cfg.uav_count:
        raise ValueError(f"expected {cfg.uav_count} UAV channel specs, got {len(specs)}")
    if len({s.num_mpc for s in specs}) != 1:
        raise ValueError("all UAVs must share the number of multipath components")
    if len({round(s.wavelength_m, 15) for s in specs}) != 1:
        raise ValueError("all UAVs must share one carrier wavelength")
    times, i0, lag_idx = _lag_times(cfg, t, tau_grid)
    ref = specs[0]

    def chunk(lo, hi):
        draws = [
            _draw_mus(specs, proc, times, np.random.default_rng(cfg.seed_sequence(i)), shared_scatterers)
            for i in range(lo, hi)
        ]
        amps, phases, aods, thetas = (np.stack(x) for x in zip(*draws))
        r = _received(ref, amps, phases, aods, thetas)  # (B, M, T)
        prod = r[:, :, None, i0, None] * np.conj(r[:, None, :, lag_idx])  # (B, M, M, L)
        diag = np.arange(len(specs))
        for j in np.nonzero(lag_idx == i0)[0]:
            prod[:, diag, diag, j] = np.abs(r[:, :, i0]) ** 2
        return prod

    mom = _reduce(chunk, cfg)
    se_re, se_im = mom.stderr()
    return [
        AutocorrMatrix(mom.mean[..., j], se_re[..., j], se_im[..., j]) for j in range(len(lag_idx))
    ]
