import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from fragsolve.errors import DomainError
from fragsolve.specfun import (
    gamma_q,
    hermite_basis,
    hermite_coefficients,
    kummer_1f1,
    log_gamma_ratio,
    tricomi_psi,
    upper_incomplete_gamma,
)

A = st.floats(-5.0, 5.0)
B = st.floats(0.5, 6.0)
Z = st.floats(-30.0, 30.0)


def f11(a, b, z):
    return float(kummer_1f1(a, b, z))


def derivative_gap(a, b, z):
    """Five-point derivative of 1F1 in z against (a/b) 1F1(a+1; b+1; z), relative to the scale."""
    h = 1e-3 * (1.0 + abs(z))
    fd = (f11(a, b, z - 2 * h) - 8 * f11(a, b, z - h) + 8 * f11(a, b, z + h) - f11(a, b, z + 2 * h)) / (12 * h)
    exact = a / b * f11(a + 1, b + 1, z)
    scale = max(abs(exact), abs(f11(a, b, z)))
    return abs(fd - exact) / scale


def integral_gap(a, p, x):
    lhs = integrate.quad(lambda y: y**p * f11(a + 1, 2.0, x - y), 0.0, x, epsabs=0.0, epsrel=1e-12, limit=200)[0]
    rhs = x**p / a * (f11(a, p + 1, x) - 1.0)
    return abs(lhs - rhs) / abs(rhs)


# --- examples ------------------------------------------------------------------------------


@pytest.mark.parametrize(
    "a, b, z, expected",
    [
        (0.7, 2.0, 0.0, 1.0),
        (1.0, 2.0, 1.0, math.e - 1.0),
        (-1.0, 2.0, 3.0, -0.5),
        (-2.0, 1.0, 1.0, -0.5),
        (0.5, 1.5, -1.0, math.sqrt(math.pi) / 2 * math.erf(1.0)),
    ],
)
def test_kummer_examples(a, b, z, expected):
    assert f11(a, b, z) == pytest.approx(expected, rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("z", [-50.0, -12.5, -1e-3, 0.3, 7.0, 25.0, 50.0])
@pytest.mark.parametrize("a, b", [(0.3, 1.7), (-2.5, 3.0), (4.0, 0.5), (-1.0 / 6.0, 2.0), (1.5, 2.0)])
def test_kummer_against_mpmath(a, b, z):
    ref = float(mp.hyp1f1(a, b, z))
    assert f11(a, b, z) == pytest.approx(ref, rel=1e-10, abs=1e-300)


def test_kummer_vectorised():
    z = np.linspace(-20, 20, 9)
    out = kummer_1f1(0.4, 1.3, z)
    np.testing.assert_allclose(out, [f11(0.4, 1.3, v) for v in z], rtol=1e-15)


def test_kummer_log_scale_avoids_overflow():
    # exp(-800) * 1F1(1; 2; 800) = (1 - exp(-800)) / 800
    assert float(kummer_1f1(1.0, 2.0, 800.0, log_scale=-800.0)) == pytest.approx(1.0 / 800.0, rel=1e-12)


def test_kummer_overflow_is_reported():
    with pytest.raises(OverflowError):
        kummer_1f1(1.0, 2.0, 800.0)


@pytest.mark.parametrize("b", [0.0, -1.0, -3.0])
def test_kummer_rejects_nonpositive_integer_b(b):
    with pytest.raises(DomainError):
        kummer_1f1(1.0, b, 0.5)


def test_kummer_polynomial_case_is_exact():
    # a = -m terminates after m + 1 terms
    z = 2.5
    expected = sum(math.comb(3, n) * (-1) ** n * z**n / math.prod(range(2, 2 + n)) for n in range(4))
    assert f11(-3.0, 2.0, z) == pytest.approx(expected, rel=1e-15)


def test_tricomi_psi_one_one():
    # Psi(1; 1; z) = e^z E1(z)
    assert tricomi_psi(1.0, 1.0, 1.0) == pytest.approx(math.e * float(mp.e1(1.0)), rel=1e-8)
    quad = integrate.quad(lambda t: math.exp(-t) / (1.0 + t), 0.0, math.inf)[0]
    assert tricomi_psi(1.0, 1.0, 1.0) == pytest.approx(quad, rel=1e-8)


def test_tricomi_psi_asymptotics():
    assert tricomi_psi(0.5, 1.2, 40.0) / 40.0**-0.5 == pytest.approx(1.0, rel=0.05)


@pytest.mark.parametrize("b", [0.3, 1.0, 2.7])
def test_tricomi_psi_zero_a(b):
    assert tricomi_psi(0.0, b, 3.0) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("z", [1e-3, 0.1, 1.0, 7.5, 50.0])
@pytest.mark.parametrize("a, b", [(0.5, 1.2), (1.0 / 6.0, 0.75), (2.0, 3.5), (1.0, 1.0)])
def test_tricomi_psi_against_mpmath(a, b, z):
    assert tricomi_psi(a, b, z) == pytest.approx(float(mp.hyperu(a, b, z)), rel=1e-8)


def test_tricomi_psi_rejects_nonpositive_z():
    with pytest.raises(DomainError):
        tricomi_psi(1.0, 1.0, 0.0)


def test_incomplete_gamma_examples():
    assert upper_incomplete_gamma(1.0, 2.0) == pytest.approx(math.exp(-2.0), rel=1e-14)
    assert upper_incomplete_gamma(0.5, 0.0) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    ref = integrate.quad(lambda t: math.exp(-t) * t**1.5, 1.3, math.inf, epsabs=0.0, epsrel=1e-13)[0]
    assert upper_incomplete_gamma(2.5, 1.3) == pytest.approx(ref, rel=1e-10)


@given(s=st.floats(0.05, 30.0), x=st.floats(0.0, 60.0))
def test_incomplete_gamma_against_mpmath(s, x):
    ref = float(mp.gammainc(s, x, mp.inf, regularized=True))
    assert gamma_q(s, x) == pytest.approx(ref, rel=1e-10, abs=1e-300)


@pytest.mark.parametrize("s, x", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.5)])
def test_incomplete_gamma_domain(s, x):
    with pytest.raises(DomainError):
        upper_incomplete_gamma(s, x)


def test_log_gamma_ratio():
    sign, log_mag = log_gamma_ratio(5.0 / 6.0, 1.0 / 3.0)
    expected = math.gamma(5.0 / 6.0) / math.gamma(1.0 / 3.0)
    assert sign * math.exp(log_mag) == pytest.approx(expected, rel=1e-14)


# --- Hermite --------------------------------------------------------------------------------


def test_hermite_low_orders():
    assert hermite_coefficients(1) == (0, 1)
    assert hermite_coefficients(2) == (-1, 0, 1)
    assert hermite_basis(1).roots == pytest.approx((0.0,), abs=1e-15)
    assert hermite_basis(2).roots == pytest.approx((-1.0, 1.0), abs=1e-14)
    assert hermite_basis(2).derivative_at_roots == pytest.approx((-2.0, 2.0), abs=1e-14)


def _he_exact(x, m):
    """He_m(x) and He_(m-1)(x) in 50-digit arithmetic."""
    with mp.workdps(50):
        prev, cur = mp.mpf(0), mp.mpf(1)
        x = mp.mpf(x)
        for n in range(m):
            prev, cur = cur, x * cur - n * prev
        return cur, prev


@pytest.mark.parametrize("m", [1, 2, 3, 5, 8, 13, 21, 30])
def test_hermite_root_structure(m):
    basis = hermite_basis(m)
    roots = np.array(basis.roots)
    assert roots.size == m
    assert np.all(np.diff(roots) > 0)
    np.testing.assert_allclose(roots, -roots[::-1], atol=1e-12)
    assert np.all(np.abs(basis.derivative_at_roots) > 0)


@pytest.mark.parametrize("m", range(1, 16))
def test_hermite_value_at_roots(m):
    # beyond m = 15 a correctly rounded root already leaves |He_m| ~ ulp * |He_m'| above this bound
    for lam in hermite_basis(m).roots:
        val = float(abs(_he_exact(lam, m)[0]))
        assert val < 1e-10 * max(1.0, abs(lam) ** m)


@pytest.mark.parametrize("m", [16, 20, 25, 30])
def test_hermite_roots_correctly_rounded(m):
    # Newton correction evaluated in extended precision is at rounding level
    for lam in hermite_basis(m).roots:
        val, lower = _he_exact(lam, m)
        step = float(val / (m * lower))
        assert abs(step) <= 1e-15 * max(abs(lam), 1e-3)


def test_hermite_roots_against_numpy():
    ref = np.sort(np.polynomial.hermite_e.hermeroots([0] * 5 + [1]))
    np.testing.assert_allclose(hermite_basis(5).roots, ref, atol=1e-12)


@pytest.mark.parametrize("m", range(1, 30))
def test_hermite_recurrence_coefficientwise(m):
    nxt = hermite_coefficients(m + 1)
    cur = hermite_coefficients(m)
    prev = hermite_coefficients(m - 1) if m > 1 else (1,)
    shifted = (0,) + cur
    built = [shifted[j] - m * (prev[j] if j < len(prev) else 0) for j in range(m + 2)]
    assert tuple(built) == nxt


@pytest.mark.parametrize("m", [0, 31, 2.0])
def test_hermite_range(m):
    with pytest.raises(DomainError):
        hermite_basis(m)


# --- identities ------------------------------------------------------------------------------


@settings(max_examples=200)
@given(a=A, b=B, z=Z)
def test_kummer_transformation(a, b, z):
    lhs = f11(a, b, z)
    rhs = math.exp(z) * f11(b - a, b, -z)
    assert abs(lhs - rhs) <= 1e-9 * (1.0 + abs(lhs))


@settings(max_examples=200)
@given(a=A, b=B, z=Z)
def test_derivative_identity(a, b, z):
    assert derivative_gap(a, b, z) < 1e-6


@settings(max_examples=60)
@given(a=st.floats(-3.0, 3.0).filter(lambda v: abs(v) > 0.05), p=st.floats(0.0, 3.0), x=st.floats(0.1, 8.0))
def test_integral_identity(a, p, x):
    assert integral_gap(a, p, x) < 1e-7


@pytest.mark.parametrize("a", [0.1, 0.5, 1.0, 1.5, 1.9])
def test_negative_argument_decays_like_power(a):
    # 1F1(a; b; -z) z^a tends to Gamma(b)/Gamma(b - a)
    b = 2.3
    z = np.linspace(10.0, 50.0, 41)
    scaled = np.array([f11(a, b, -v) * v**a for v in z])
    limit = math.gamma(b) / math.gamma(b - a)
    assert np.all(np.abs(scaled) < 2.0 * abs(limit) + 1.0)
    assert scaled[-1] == pytest.approx(limit, rel=0.05)
