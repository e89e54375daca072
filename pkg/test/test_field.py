import pytest
import numpy as np
from scipy import integrate
from emfhole.fading import one_minus_gain_laplace
from emfhole.field import FieldFunctional, field_integral_at_origin


def _direct(s, a, beta, m, c):
    """Integral in t = ln x by adaptive quadrature, real and imaginary part
    separately"""
    def g(t):
        x = np.exp(t)
        return one_minus_gain_laplace(s * c * x ** -beta, m) * x ** 2

    t_low = np.log(a) if a > 0 else -40.0
    kwargs = dict(limit=400, epsabs=0.0, epsrel=1e-10)
    real, _ = integrate.quad(lambda t: g(t).real, t_low, 120.0, **kwargs)
    imag, _ = integrate.quad(lambda t: g(t).imag, t_low, 120.0, **kwargs)
    return real + 1j * imag


@pytest.mark.parametrize("beta", [2.5, 4.0])
def test_field_functional_at_origin_rayleigh(beta):
    c, s = 500.0, 0.8
    field = FieldFunctional(beta, 1, c)
    # closed form for m = 1
    expected = (s * c) ** (2.0 / beta) * (np.pi / beta) / np.sin(
        2.0 * np.pi / beta
    )
    assert field(s, 0.0) == pytest.approx(expected, rel=1e-10)
    assert field_integral_at_origin(1.0, 1, beta) == pytest.approx(
        (np.pi / beta) / np.sin(2.0 * np.pi / beta), rel=1e-12
    )


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("s", [0.8, 0.7 - 0.4j, 2.0e-3 + 5.0j])
@pytest.mark.parametrize("a", [0.0, 1.0e-10, 5.0, 50.0, 500.0, 1.0e6])
def test_field_functional_direct(m, s, a):
    beta, c = 2.5, 500.0
    value = FieldFunctional(beta, m, c)(s, a)
    expected = _direct(s, a, beta, m, c)
    assert abs(value - expected) <= 1e-7 * abs(expected) + 1e-14


def test_field_functional_broadcast_and_phases():
    field = FieldFunctional(4.0, 2, 40.0)
    s = np.array([[0.0, 1.0, 1.0 - 1.0j], [2.0j, 3.0, 0.5 + 0.1j]])
    a = np.array([10.0, 30.0, 0.0])
    values = field(s, a)
    assert values.shape == (2, 3)
    assert values[0, 0] == 0.0
    for i in range(2):
        for j in range(3):
            assert values[i, j] == pytest.approx(field(s[i, j], a[j]),
                                                 rel=1e-12)
    # same phase, one table
    single = field(np.array([1.0, 4.0, 9.0]), 20.0)
    assert np.all(np.diff(single.real) > 0)


def test_field_functional_monotone_in_distance():
    field = FieldFunctional(2.5, 1, 500.0)
    a = np.geomspace(1e-3, 1e5, 50)
    values = field(0.5, a).real
    assert np.all(np.diff(values) < 0)
    assert np.all(values > 0)


def test_field_functional_invalid_beta():
    with pytest.raises(ValueError):
        FieldFunctional(2.0, 1, 1.0)
