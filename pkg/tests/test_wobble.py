import warnings

import mpmath as mp
import numpy as np
import pytest
from scipy import stats

from wobblesim.wobble import (
    FrequencyLaw,
    PitchProcessSpec,
    ProcessKind,
    amplitude_cf_sinusoid,
    draw_values,
    increment_cf_wiener,
    realization_rng,
    sample_path,
)

DEG = np.pi / 180


def test_spec_field_validation():
    with pytest.raises(ValueError):
        PitchProcessSpec(ProcessKind.WIENER)
    with pytest.raises(ValueError):
        PitchProcessSpec(ProcessKind.WIENER, wiener_rate_b=1.0, max_pitch_theta_m=0.1)
    with pytest.raises(ValueError):
        PitchProcessSpec(ProcessKind.SINUSOID, wiener_rate_b=1.0, max_pitch_theta_m=0.1)
    with pytest.raises(ValueError):
        PitchProcessSpec.sinusoid(0.0)
    with pytest.raises(ValueError):
        FrequencyLaw("uniform", 25.0, 5.0)


def test_large_pitch_warns():
    with pytest.warns(UserWarning):
        PitchProcessSpec.sinusoid(15 * DEG)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        PitchProcessSpec.sinusoid(10 * DEG)


def test_stationarity_flags():
    assert PitchProcessSpec.wiener(1.0).has_stationary_increments
    assert PitchProcessSpec.none().has_stationary_increments
    assert not PitchProcessSpec.sinusoid(5 * DEG).has_stationary_increments


def test_grid_validation():
    spec = PitchProcessSpec.wiener(1.0)
    for bad in ([], [0.1, 0.1], [-1.0, 0.0], [[0.0, 1.0]]):
        with pytest.raises(ValueError):
            sample_path(spec, bad, 0)


def test_no_wobble_is_zero():
    path = sample_path(PitchProcessSpec.none(), np.linspace(0, 1, 11), 3)
    assert np.all(path.values == 0.0)


def test_sinusoid_starts_at_zero():
    spec = PitchProcessSpec.sinusoid(5 * DEG)
    for seed in range(50):
        assert sample_path(spec, [0.0, 0.01], seed).values[0] == 0.0


def test_same_seed_same_bytes():
    spec = PitchProcessSpec.wiener(1.0)
    times = np.linspace(0, 0.5, 64)
    a = sample_path(spec, times, np.random.SeedSequence(9, spawn_key=(4,)))
    b = sample_path(spec, times, np.random.SeedSequence(9, spawn_key=(4,)))
    assert a.values.tobytes() == b.values.tobytes()
    c = realization_rng(9, 4).standard_normal(3)
    d = np.random.default_rng(np.random.SeedSequence(9, spawn_key=(4,))).standard_normal(3)
    assert np.array_equal(c, d)


def test_wiener_marginal_variance():
    spec = PitchProcessSpec.wiener(1.0)
    rng = np.random.default_rng(2024)
    x = np.array([draw_values(spec, np.array([0.04]), rng)[0] for _ in range(100_000)])
    var = x.var(ddof=1)
    # standard error of a Gaussian sample variance
    se = 0.04 * np.sqrt(2.0 / (x.size - 1))
    assert abs(var - 0.04) <= 3 * se


def test_wiener_increments_stationary():
    spec = PitchProcessSpec.wiener(1.0)
    t1, tau = 0.3, 0.05
    late = np.empty(10_000)
    early = np.empty(10_000)
    for i in range(10_000):
        v = sample_path(spec, [t1, t1 + tau], realization_rng(5, i)).values
        late[i] = v[1] - v[0]
        early[i] = sample_path(spec, [tau], realization_rng(6, i)).values[0]
    assert stats.ks_2samp(late, early).pvalue > 0.01


def test_sinusoid_bounded():
    theta_m = 5 * DEG
    spec = PitchProcessSpec.sinusoid(theta_m)
    times = np.linspace(0, 1, 1000)
    rng = np.random.default_rng(1)
    vals = np.concatenate([draw_values(spec, times, rng) for _ in range(1000)])
    assert vals.size == 10**6
    assert np.count_nonzero(np.abs(vals) > theta_m) == 0


def test_sinusoid_increments_not_stationary():
    spec = PitchProcessSpec.sinusoid(5 * DEG)
    tau = 0.005
    t_q = 1.0 / (4.0 * spec.freq_law.mean)
    rng = np.random.default_rng(11)
    n = 20_000
    inc = np.empty((2, n))
    for i in range(n):
        v = draw_values(spec, np.array([tau, t_q, t_q + tau]), rng)
        inc[0, i] = v[0]
        inc[1, i] = v[2] - v[1]
    v0, v1 = inc.var(axis=1, ddof=1)
    # standard error of a sample variance, from the fourth central moment
    se = [np.sqrt((np.mean((x - x.mean()) ** 4) - s**2) / n) for x, s in zip(inc, (v0, v1))]
    assert abs(v0 - v1) > 3 * np.hypot(*se)


def test_uniform_frequency_law():
    law = FrequencyLaw()
    f = law.sample(np.random.default_rng(0), 100_000)
    assert f.min() >= 5.0 and f.max() < 25.0
    assert law.f_min == 5.0 and law.mean == 15.0
    assert FrequencyLaw.point(10.0).sample(np.random.default_rng(0), 3).tolist() == [10.0] * 3


def test_wiener_cf_examples():
    assert increment_cf_wiener(3.0, 0.0, 1.0) == 1.0
    assert increment_cf_wiener(0.0, 0.7, 1.0) == 1.0
    c = 2 * np.pi / 0.05 * 0.4 * np.cos(20 * DEG)
    assert increment_cf_wiener(c, 6.213e-4, 1.0) == pytest.approx(0.5, abs=1e-4)
    with pytest.raises(ValueError):
        increment_cf_wiener(1.0, -1.0, 1.0)


def test_wiener_cf_matches_sampling():
    c, tau = 4.0, 0.05
    w = np.random.default_rng(3).standard_normal(200_000) * np.sqrt(tau)
    emp = np.mean(np.exp(1j * c * w))
    assert abs(emp - increment_cf_wiener(c, tau, 1.0)) < 5 / np.sqrt(w.size)


def test_sinusoid_cf_examples():
    assert amplitude_cf_sinusoid(5.0, 0.0, 0.1) == 1.0
    assert amplitude_cf_sinusoid(np.pi / 0.1, 1.0, 0.1) == pytest.approx(0.0, abs=1e-15)
    # kappa in the (2/lambda) a_D cos(phi) scaling enters a normalized sinc; the
    # phase coefficient is pi * kappa
    kappa = 2 / 0.05 * 0.4 * np.cos(20 * DEG)
    x = mp.mpf(2) / mp.mpf("0.05") * mp.mpf("0.4") * mp.cos(mp.radians(20)) * mp.radians(5)
    want = float(mp.sin(mp.pi * x) / (mp.pi * x))
    assert amplitude_cf_sinusoid(np.pi * kappa, 1.0, 5 * DEG) == pytest.approx(want, rel=1e-13)


def test_sinusoid_cf_matches_sampling():
    theta_m, c, s = 0.1, 30.0, 0.7
    a = np.random.default_rng(4).uniform(-theta_m, theta_m, 200_000)
    emp = np.mean(np.exp(1j * c * a * s))
    assert abs(emp - amplitude_cf_sinusoid(c, s, theta_m)) < 5 / np.sqrt(a.size)
