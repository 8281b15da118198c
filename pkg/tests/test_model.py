import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from fragsolve.errors import DomainError, UnsupportedConfigurationError, ValidityIntervalError
from fragsolve.model import (
    CONSTANT,
    DECAY,
    GROWTH,
    LINEAR,
    UNSUPPORTED,
    DensitySnapshot,
    Dirac,
    InitialCondition,
    PhysicalParams,
    characteristic_maps,
    classify,
    constant_subcase,
    derive,
    pushforward_initial,
)


# --- parameters --------------------------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(alpha=0.0),
        dict(nu=-2.0),
        dict(nu=0.5),
        dict(gamma=-0.1),
        dict(k=0.0),
        dict(a=-1.0),
        dict(mode="sideways"),
        dict(alpha=math.nan),
    ],
)
def test_params_validation(kwargs):
    base = dict(alpha=1.0, nu=0.0, gamma=1.0, k=1.0, a=1.0, mode=GROWTH)
    base.update(kwargs)
    with pytest.raises(DomainError):
        PhysicalParams(**base)


def test_derive_linear_fig1():
    d = derive(PhysicalParams.linear(3.0, -1.5))
    assert d.beta == 3.0
    assert d.theta == pytest.approx(-0.5)
    assert d.m == pytest.approx(1.0 / 6.0)
    assert d.mu == 1.0
    assert d.case == LINEAR


def test_derive_constant_example():
    p = PhysicalParams(alpha=-1.0 / 3.0, nu=-4.0 / 3.0, gamma=4.0 / 3.0, k=1.0, a=1.0, mode=DECAY)
    d = derive(p)
    assert d.m == pytest.approx(2.0, rel=1e-14)
    assert d.integer_m == 2
    assert d.beta == pytest.approx(-1.0 / 3.0, rel=1e-14)
    assert (d.mu, d.theta) == (0.0, 0.0)
    assert d.case == CONSTANT


def test_derive_binary():
    d = derive(PhysicalParams.linear(1.0, 0.0))
    assert (d.m, d.beta, d.theta, d.mu) == (2.0, 1.0, 1.0, 1.0)


def test_unsupported_combination():
    p = PhysicalParams(alpha=2.0, nu=-0.5, gamma=0.5, k=1.0, a=1.0)
    assert classify(p) == UNSUPPORTED
    with pytest.raises(UnsupportedConfigurationError):
        derive(p)


@given(
    alpha=st.floats(-4.0, 4.0).filter(lambda v: abs(v) > 1e-3),
    nu=st.floats(-1.99, 0.0),
    k=st.floats(0.1, 5.0),
    a=st.floats(0.1, 5.0),
    mode=st.sampled_from([GROWTH, DECAY]),
)
def test_linear_derived_invariants(alpha, nu, k, a, mode):
    d = derive(PhysicalParams.linear(alpha, nu, k=k, a=a, mode=mode))
    assert d.m > 0
    assert d.mu == 1.0
    assert np.sign(d.beta) == np.sign(alpha)
    assert np.sign(d.drift) == np.sign(alpha) * (1 if mode == GROWTH else -1)


@given(alpha=st.floats(-0.99, 1.0).filter(lambda v: abs(v) > 1e-3), mode=st.sampled_from([GROWTH, DECAY]))
def test_constant_derived_invariants(alpha, mode):
    d = derive(PhysicalParams.constant(alpha, mode=mode))
    assert d.case == CONSTANT
    assert (d.mu, d.theta) == (0.0, 0.0)
    assert d.m == pytest.approx((alpha + 1.0) / abs(alpha))


@pytest.mark.parametrize(
    "mode, sign, label, boundary",
    [(DECAY, -1, "i", False), (GROWTH, -1, "ii", False), (DECAY, 1, "iii", False), (GROWTH, 1, "iv", True)],
)
def test_case_table(mode, sign, label, boundary):
    case = constant_subcase(mode, sign)
    assert case.label == label
    assert case.physical_boundary is boundary


# --- characteristics -----------------------------------------------------------------------


def test_linear_maps_examples():
    maps = characteristic_maps(derive(PhysicalParams.linear(1.0, 0.0, mode=GROWTH)))
    assert float(maps.tau(0.0)) == 0.0
    assert float(maps.tau(math.log(2.0))) == pytest.approx(1.0, rel=1e-15)
    x = np.array([0.3, 2.0])
    np.testing.assert_allclose(maps.xi(x, 0.0), x)


def test_constant_maps_example():
    p = PhysicalParams(alpha=-1.0 / 3.0, nu=-4.0 / 3.0, gamma=4.0 / 3.0, k=1.0, a=1.0, mode=GROWTH)
    maps = characteristic_maps(derive(p))
    assert float(maps.z(1.0, 3.0)) == pytest.approx(0.0, abs=1e-15)


def test_decay_tau_capped():
    maps = characteristic_maps(derive(PhysicalParams.linear(2.0, 0.0, mode=DECAY)))
    assert maps.tau_limit == pytest.approx(0.5)
    taus = maps.tau(np.linspace(0.0, 5.0, 200))
    assert np.all(np.diff(taus) > 0) and np.all(taus < 0.5)
    with pytest.raises(ValidityIntervalError):
        maps.t_of_tau(0.5)


@pytest.mark.parametrize(
    "params",
    [
        PhysicalParams.linear(3.0, -1.5, mode=GROWTH),
        PhysicalParams.linear(-3.0, -1.5, mode=DECAY),
        PhysicalParams.linear(0.5, -0.2, k=2.0, a=0.3, mode=DECAY),
        PhysicalParams.constant(2.0 / 3.0, mode=GROWTH),
        PhysicalParams.constant(-0.75, mode=DECAY),
    ],
)
def test_round_trip(params, rng):
    maps = characteristic_maps(derive(params))
    x = 10.0 ** rng.uniform(-3.0, 3.0, 10_000)
    t = rng.uniform(0.0, 5.0, 10_000)
    back = maps.x_of(maps.xi(x, t), t)
    np.testing.assert_allclose(back, x, rtol=1e-12)
    tau = maps.tau(t)
    inside = tau < maps.tau_limit
    np.testing.assert_allclose(maps.t_of_tau(tau[inside]), t[inside], rtol=1e-12, atol=1e-14)


# --- initial data ---------------------------------------------------------------------------


def test_pushforward_dirac_example():
    p = PhysicalParams(alpha=-1.0 / 3.0, nu=-4.0 / 3.0, gamma=4.0 / 3.0, k=1.0, a=1.0, mode=DECAY)
    datum = pushforward_initial(InitialCondition.monodisperse(8.0), p)
    assert datum.dirac.location == pytest.approx(0.5, rel=1e-15)
    assert datum.dirac.weight == pytest.approx(1.0 / 3.0, rel=1e-14)


def test_pushforward_identity():
    datum = pushforward_initial(InitialCondition.monodisperse(2.5), PhysicalParams.linear(1.0, 0.0))
    assert datum.dirac == Dirac(2.5, 1.0)


def test_pushforward_sampled_value():
    p = PhysicalParams.linear(2.0, -1.0)
    u0 = InitialCondition.analytic(lambda x: np.exp(-x), (0.0, 50.0))
    w0 = pushforward_initial(u0, p).density
    assert float(w0(np.array([4.0]))[0]) == pytest.approx(2.0 * math.exp(-2.0), rel=1e-14)


def test_pushforward_narrow_gaussian_tends_to_dirac():
    p = PhysicalParams.linear(2.0, -0.5, a=1.5)
    x0 = 1.3
    dirac = pushforward_initial(InitialCondition.monodisperse(x0), p).dirac

    def mismatch(width):
        norm = 1.0 / (width * math.sqrt(2.0 * math.pi))
        u0 = InitialCondition.analytic(lambda x: norm * np.exp(-0.5 * ((x - x0) / width) ** 2),
                                       (x0 - 8 * width, x0 + 8 * width))
        datum = pushforward_initial(u0, p)
        lo, hi = datum.support
        val = integrate.quad(lambda v: float(datum.density(np.array([v]))[0]) * math.exp(-v), lo, hi,
                             epsabs=0.0, epsrel=1e-12, limit=200)[0]
        return abs(val - dirac.weight * math.exp(-dirac.location)) / dirac.weight

    coarse, fine = mismatch(1e-2), mismatch(1e-3)
    assert fine < 1e-3
    assert fine / coarse < 0.2


def test_sampled_interpolation_is_log_linear():
    u0 = InitialCondition.sampled([1.0, 4.0], [2.0, 4.0])
    # halfway in ln x between 1 and 4 is x = 2
    assert float(u0.density(np.array([2.0]))[0]) == pytest.approx(3.0)
    assert float(u0.density(np.array([5.0]))[0]) == 0.0


@pytest.mark.parametrize(
    "grid, values",
    [([1.0], [1.0]), ([2.0, 1.0], [1.0, 1.0]), ([0.0, 1.0], [1.0, 1.0]), ([1.0, 2.0], [1.0, -1.0])],
)
def test_sampled_validation(grid, values):
    with pytest.raises(DomainError):
        InitialCondition.sampled(grid, values)


def test_snapshot_zero_outside_support():
    snap = DensitySnapshot(t=1.0, dirac=None, regular=lambda x: np.ones_like(x), support=(1.0, 2.0))
    np.testing.assert_array_equal(snap.density(np.array([0.5, 1.5, 2.5])), [0.0, 1.0, 0.0])


def test_snapshot_rejects_negative_weight():
    with pytest.raises(DomainError):
        DensitySnapshot(t=0.0, dirac=Dirac(1.0, -1.0), regular=lambda x: x, support=(0.0, 1.0))
