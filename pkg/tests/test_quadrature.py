import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as sint

from wobblesim.quadrature import QuadratureError, fixed_gauss_legendre, integrate


def test_fixed_rule_exact_for_polynomials():
    # 64 nodes integrate degree 127 exactly
    got = fixed_gauss_legendre(lambda x: x**126, -1.0, 1.0)
    assert got == pytest.approx(2.0 / 127.0, rel=1e-13)


def test_vector_valued_integrand():
    ks = np.arange(1, 6)
    got = integrate(lambda x: np.sin(np.outer(x, ks)), 0.0, np.pi, rtol=1e-12, atol=1e-14)
    want = (1 - np.cos(ks * np.pi)) / ks
    np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-14)


def test_kink_breakpoint():
    f = lambda x: np.exp(-np.abs(x - 0.3))
    want = 2 - np.exp(-0.3) - np.exp(-0.7)
    assert integrate(f, 0.0, 1.0, breakpoints=(0.3,), rtol=1e-13) == pytest.approx(want, rel=1e-13)
    # without the breakpoint the kink is found by bisection
    assert integrate(f, 0.0, 1.0, rtol=1e-10) == pytest.approx(want, rel=1e-9)


def test_oscillatory_matches_scipy():
    f = lambda x: np.sinc(40 * np.sin(2 * np.pi * x * 0.5))
    got = integrate(f, 5.0, 25.0, panels=8, rtol=1e-10)
    want, _ = sint.quad(f, 5.0, 25.0, limit=2000, epsabs=1e-13, epsrel=1e-12)
    assert got == pytest.approx(want, rel=1e-9)


def test_budget_exceeded_raises():
    with pytest.raises(QuadratureError):
        integrate(lambda x: np.sin(1e6 * x), 0.0, 1.0, rtol=1e-12, max_panels=16)


def test_bad_interval():
    with pytest.raises(ValueError):
        integrate(np.sin, 1.0, 1.0)


@given(a=st.floats(-3, 3), w=st.floats(0.01, 5), k=st.floats(0.1, 20))
def test_cosine_integral(a, w, k):
    b = a + w
    want = (np.sin(k * b) - np.sin(k * a)) / k
    assert integrate(lambda x: np.cos(k * x), a, b, rtol=1e-10, atol=1e-14) == pytest.approx(want, rel=1e-9, abs=1e-13)
