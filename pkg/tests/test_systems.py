import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chaoscast.systems import (
    DivergenceError,
    MultiSeries,
    generate,
    integrate_flow,
    iterate_map,
    system_spec,
)


def test_logistic_fixed_point():
    # 0.75 is the fixed point 1 - 1/r of the r=4 logistic map.
    spec = system_spec("logistic", params={"r": 4.0}, x0=(0.75,))
    series = iterate_map(spec, 3)
    assert np.allclose(series.values[:, 0], 0.75, atol=1e-12)


def test_logistic_one_step():
    spec = system_spec("logistic", params={"r": 4.0}, x0=(0.2,))
    series = iterate_map(spec, 2)
    assert series.values[0, 0] == 0.2
    assert series.values[1, 0] == pytest.approx(0.64, abs=1e-15)


def test_henon_bounded():
    spec = system_spec("henon", x0=(0.0, 0.0))
    series = iterate_map(spec, 10_000)
    assert np.abs(series.values[:, 0]).max() < 2.0
    assert np.abs(series.values[:, 1]).max() < 1.0


def test_lorenz_equilibrium_stays_zero():
    spec = system_spec("lorenz", x0=(0.0, 0.0, 0.0))
    series = integrate_flow(spec, 50)
    assert np.all(series.values == 0.0)


def test_lorenz_bounded():
    spec = system_spec("lorenz", x0=(1.0, 1.0, 1.0), transient=1000)
    series = integrate_flow(spec, 10_000)
    assert np.abs(series.values[:, 2]).max() < 60.0
    assert series.step == 0.01


def test_rossler_bounded_nonconstant():
    spec = system_spec("rossler", x0=(1.0, 1.0, 1.0), transient=1000)
    series = integrate_flow(spec, 10_000)
    assert np.isfinite(series.values).all()
    assert np.abs(series.values).max() < 100.0
    assert series.values[:, 0].std() > 1.0


def test_determinism_bit_identical():
    spec = system_spec("lorenz", transient=37)
    a = integrate_flow(spec, 200)
    b = integrate_flow(spec, 200)
    assert np.array_equal(a.values, b.values)


@pytest.mark.parametrize("kind", ["logistic", "henon", "lorenz", "rossler"])
def test_transient_invariance(kind):
    transient, n = 64, 100
    with_transient = generate(system_spec(kind, transient=transient), n)
    from_zero = generate(system_spec(kind, transient=0), transient + n)
    assert np.array_equal(with_transient.values, from_zero.values[transient:])


def test_rk4_halving_shrinks_deviation_by_8x():
    # Fourth-order global error: halving dt shrinks the solution change
    # at a fixed model time by about 16x; require at least 8x.
    def states_until_t1(dt):
        steps = round(1.0 / dt)
        spec = system_spec("lorenz", dt=dt, x0=(1.0, 1.0, 1.0))
        return integrate_flow(spec, steps + 1).values

    coarse = states_until_t1(0.01)
    half = states_until_t1(0.005)
    quarter = states_until_t1(0.0025)
    dev_coarse = np.abs(coarse - half[::2]).max()
    dev_half = np.abs(half - quarter[::2]).max()
    assert dev_coarse / dev_half >= 8.0


def test_divergence_error_names_step():
    spec = system_spec("logistic", params={"r": 4.5}, x0=(0.5,))
    with pytest.raises(DivergenceError, match=r"step \d+"):
        iterate_map(spec, 200)


def test_kind_dispatch_guards():
    with pytest.raises(ValueError, match="map kind"):
        iterate_map(system_spec("lorenz"), 10)
    with pytest.raises(ValueError, match="flow kind"):
        integrate_flow(system_spec("logistic"), 10)


def test_spec_validation_messages():
    with pytest.raises(ValueError, match="kind"):
        system_spec("duffing")
    with pytest.raises(ValueError, match="x0"):
        system_spec("lorenz", x0=(1.0, 2.0))
    with pytest.raises(ValueError, match="transient"):
        system_spec("henon", transient=-1)
    with pytest.raises(ValueError, match="dt"):
        system_spec("rossler", dt=0.0)
    with pytest.raises(ValueError, match="params"):
        system_spec("logistic", params={"sigma": 10.0})
    with pytest.raises(ValueError, match="n"):
        iterate_map(system_spec("logistic"), 0)


def test_maps_ignore_dt():
    spec = system_spec("henon", dt=0.5)
    assert spec.dt is None
    assert iterate_map(spec, 3).step == 1.0


def test_multiseries_validation():
    with pytest.raises(ValueError, match="finite"):
        MultiSeries(names=("x",), values=np.array([[np.nan]]))
    with pytest.raises(ValueError, match="names"):
        MultiSeries(names=("x",), values=np.zeros((3, 2)))
    series = MultiSeries(names=("a", "b"), values=np.arange(6.0).reshape(3, 2))
    assert series.resolve("b") == 1
    assert series.resolve(0) == 0
    with pytest.raises(ValueError, match="unknown observable"):
        series.resolve("c")
    with pytest.raises(ValueError, match="unknown observable"):
        series.resolve(5)


@settings(deadline=None, max_examples=25)
@given(
    r=st.floats(min_value=3.5, max_value=4.0),
    x0=st.floats(min_value=0.05, max_value=0.95),
    transient=st.integers(min_value=0, max_value=50),
    n=st.integers(min_value=1, max_value=50),
)
def test_transient_invariance_property(r, x0, transient, n):
    spec_a = system_spec("logistic", params={"r": r}, x0=(x0,), transient=transient)
    spec_b = system_spec("logistic", params={"r": r}, x0=(x0,), transient=0)
    a = iterate_map(spec_a, n)
    b = iterate_map(spec_b, transient + n)
    assert np.array_equal(a.values, b.values[transient:])
