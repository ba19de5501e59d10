import numpy as np
import pytest

from wobblesim.acf_analytic import acf, mus_acf_matrix
from wobblesim.acf_montecarlo import (
    EnsembleConfig,
    estimate_acf,
    estimate_acf_matrix,
    simulate_received,
)
from wobblesim.geometry import GeometryError
from wobblesim.spectrum import ChannelSpec, reference_channel
from wobblesim.wobble import PitchProcessSpec

DEG = np.pi / 180
TAUS = np.linspace(0, 0.004, 17)


def test_no_wobble_signal_constant(ch6):
    r = simulate_received(ch6, PitchProcessSpec.none(), np.linspace(0, 1, 50), 3)
    assert np.all(r == r[0])


def test_pure_los_unit_modulus(wiener):
    spec = ChannelSpec(6e9, num_mpc=0)
    r = simulate_received(spec, wiener, np.linspace(0, 1, 200), 8)
    np.testing.assert_allclose(np.abs(r), 1.0, rtol=1e-14)
    assert np.std(np.angle(r)) > 0.1


def test_realization_regenerates_alone(ch6, sinus5):
    cfg = EnsembleConfig(num_realizations=100, master_seed=42, chunk_size=10)
    times = np.concatenate([[0.0], TAUS[1:]])
    r = simulate_received(ch6, sinus5, times, cfg.seed_sequence(37))
    again = simulate_received(ch6, sinus5, times, np.random.SeedSequence(42, spawn_key=(37,)))
    assert r.tobytes() == again.tobytes()


def test_ensemble_uses_per_realization_streams(ch6, wiener):
    cfg = EnsembleConfig(num_realizations=100, master_seed=5, chunk_size=7)
    c = estimate_acf(cfg, ch6, wiener, 0.0, TAUS)
    times = TAUS
    rs = np.array([simulate_received(ch6, wiener, times, cfg.seed_sequence(i)) for i in range(100)])
    np.testing.assert_allclose(c.values, np.mean(rs[:, :1] * np.conj(rs), axis=0), rtol=1e-12)


def test_too_few_realizations(ch6, wiener):
    with pytest.raises(ValueError):
        estimate_acf(EnsembleConfig(num_realizations=99), ch6, wiener, 0.0, TAUS)


def test_bad_lag_grid(ch6, wiener):
    cfg = EnsembleConfig(num_realizations=100)
    with pytest.raises(ValueError):
        estimate_acf(cfg, ch6, wiener, 0.0, [0.0, 0.002, 0.001])
    grid_cfg = EnsembleConfig(num_realizations=100, time_grid=np.linspace(0, 1, 11))
    with pytest.raises(ValueError):
        estimate_acf(grid_cfg, ch6, wiener, 0.0, [0.0, 0.15])
    # lags that sit on the supplied grid are accepted
    estimate_acf(grid_cfg, ch6, wiener, 0.1, [0.0, 0.2])


def test_zero_lag_is_total_power(ch6, sinus5):
    c = estimate_acf(EnsembleConfig(num_realizations=4000), ch6, sinus5, 0.0, TAUS)
    assert abs(c.values[0].real - ch6.mean_total_power()) <= 3 * c.stderr[0]
    assert abs(c.values[0].imag) < 1e-12


@pytest.mark.parametrize("proc", [PitchProcessSpec.wiener(1.0), PitchProcessSpec.sinusoid(5 * DEG)], ids=["wiener", "sinusoid"])
def test_matches_analytic(ch6, proc):
    c = estimate_acf(EnsembleConfig(num_realizations=5000, master_seed=3), ch6, proc, 0.0, TAUS)
    ref = acf(ch6, proc, 0.0, TAUS)
    z = np.abs(c.values.real - ref) / c.stderr
    assert np.all(z <= 4.0)
    assert np.all(np.abs(c.values.imag[1:]) <= 4.0 * c.stderr_imag[1:])


def test_bit_identical_reruns(ch6, sinus5):
    cfg = EnsembleConfig(num_realizations=300, master_seed=11, chunk_size=64)
    a = estimate_acf(cfg, ch6, sinus5, 0.01, TAUS)
    b = estimate_acf(cfg, ch6, sinus5, 0.01, TAUS)
    assert a.values.tobytes() == b.values.tobytes() and a.stderr.tobytes() == b.stderr.tobytes()


def test_threaded_matches_serial(ch6, wiener):
    serial = estimate_acf(EnsembleConfig(num_realizations=1000, chunk_size=128), ch6, wiener, 0.0, TAUS)
    threaded = estimate_acf(EnsembleConfig(num_realizations=1000, chunk_size=128, workers=4), ch6, wiener, 0.0, TAUS)
    assert serial.values.tobytes() == threaded.values.tobytes()
    assert serial.stderr.tobytes() == threaded.stderr.tobytes()


def test_chunking_agrees(ch6, wiener):
    a = estimate_acf(EnsembleConfig(num_realizations=1000, chunk_size=1000), ch6, wiener, 0.0, TAUS)
    b = estimate_acf(EnsembleConfig(num_realizations=1000, chunk_size=37), ch6, wiener, 0.0, TAUS)
    np.testing.assert_allclose(a.values, b.values, rtol=1e-12)
    np.testing.assert_allclose(a.stderr, b.stderr, rtol=1e-10)


def test_stderr_scales_inverse_sqrt(ch6, wiener):
    medians = [
        np.median(estimate_acf(EnsembleConfig(num_realizations=m, master_seed=9), ch6, wiener, 0.0, TAUS).stderr[1:])
        for m in (400, 800, 1600, 3200, 6400)
    ]
    ratio = medians[0] / medians[-1]
    assert 4 * 0.8 <= ratio <= 4 * 1.2


def test_exact_geometry_close_to_approx(ch6, sinus5):
    cfg = EnsembleConfig(num_realizations=500)
    a = estimate_acf(cfg, ch6, sinus5, 0.0, TAUS).normalized
    b = estimate_acf(cfg, ch6, sinus5, 0.0, TAUS, exact_geometry=True).normalized
    # shared random numbers: only the path-length model differs
    assert np.max(np.abs(a - b)) < 5e-3


def test_exact_geometry_rejects_degenerate_layout(sinus5):
    spec = reference_channel(6e9, uav_height_m=1.0)
    with pytest.raises(GeometryError):
        estimate_acf(EnsembleConfig(num_realizations=100), spec, sinus5, 0.0, TAUS, exact_geometry=True)


def test_matrix_single_uav_matches_acf(ch6, wiener):
    cfg = EnsembleConfig(num_realizations=3000, uav_count=1)
    mats = estimate_acf_matrix(cfg, [ch6], wiener, 0.0, TAUS)
    single = estimate_acf(cfg, ch6, wiener, 0.0, TAUS)
    for j, m in enumerate(mats):
        diff = abs(m.entries[0, 0].real - single.values[j].real)
        assert diff <= 3 * np.hypot(m.stderr_real[0, 0], single.stderr[j])


@pytest.mark.parametrize("shared", [True, False], ids=["shared", "separate"])
def test_matrix_decorrelates(shared, wiener):
    specs = [reference_channel(6e9, los_aod=a * DEG) for a in (20, 60)]
    cfg = EnsembleConfig(num_realizations=4000, uav_count=2, master_seed=4)
    mats = estimate_acf_matrix(cfg, specs, wiener, 0.0, TAUS, shared_scatterers=shared)
    for tau, m in zip(TAUS, mats):
        assert abs(m.entries[0, 1]) <= 4 * m.stderr[0, 1]
        assert abs(m.entries[1, 0]) <= 4 * m.stderr[1, 0]
        ref = mus_acf_matrix(specs, wiener, 0.0, tau)
        assert np.all(np.abs(np.diag(m.entries).real - np.diag(ref.entries).real) <= 4 * np.diag(m.stderr_real))


def test_matrix_validates_specs(ch6, wiener):
    cfg = EnsembleConfig(num_realizations=100, uav_count=2)
    with pytest.raises(ValueError):
        estimate_acf_matrix(cfg, [ch6], wiener, 0.0, TAUS)
    with pytest.raises(ValueError):
        estimate_acf_matrix(cfg, [ch6, reference_channel(5e9)], wiener, 0.0, TAUS)
    with pytest.raises(ValueError):
        estimate_acf_matrix(cfg, [ch6, reference_channel(6e9, num_mpc=10)], wiener, 0.0, TAUS)
