import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from affinv.errors import DomainError
from affinv.scalarmath import (
    LogReal,
    closed_f,
    erf,
    log_gamma,
    log_sum_exp,
    series_f,
    unit_ball_volume,
)


def erf_quad(x):
    val, _ = quad(lambda t: math.exp(-t * t), 0.0, x, epsabs=1e-14, epsrel=1e-14, limit=200)
    return 2 / math.sqrt(math.pi) * val


# log_gamma


def test_log_gamma_examples():
    assert log_gamma(1) == 0
    assert log_gamma(0.5) == pytest.approx(0.5723649429247001, rel=1e-15)
    assert log_gamma(11) == pytest.approx(math.log(math.factorial(10)), rel=1e-15)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_log_gamma_domain(bad):
    with pytest.raises(DomainError):
        log_gamma(bad)


def test_log_gamma_recurrence():
    xs = np.logspace(math.log10(0.5), 5, 1000)
    err = [abs(log_gamma(x + 1) - log_gamma(x) - math.log(x)) for x in xs]
    # log_gamma(1e5) ~ 1e6, whose double spacing is ~1e-10: scale by magnitude
    assert all(e <= 1e-12 * max(1.0, abs(log_gamma(x + 1))) for e, x in zip(err, xs))


# erf


def test_erf_examples():
    assert erf(0) == 0
    assert erf(math.sqrt(math.pi) / 2) == pytest.approx(erf_quad(math.sqrt(math.pi) / 2), abs=1e-14)
    assert erf(math.sqrt(math.pi) / 2) == pytest.approx(0.78986, abs=1e-4)
    assert abs(erf(6) - 1) <= 1e-14


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 1.7, 2.0, 2.5, 3.5, 5.0])
def test_erf_against_quadrature(x):
    assert abs(erf(x) - erf_quad(x)) <= 1e-14


@given(st.floats(min_value=-30, max_value=30, allow_nan=False))
def test_erf_odd_exactly(x):
    assert erf(-x) + erf(x) == 0


def test_erf_monotone_on_grid():
    vals = np.array([erf(x) for x in np.linspace(-4, 4, 2001)])
    assert np.all(np.diff(vals) > 0)


def test_erf_rejects_nonfinite():
    with pytest.raises(DomainError):
        erf(math.inf)


# log_sum_exp


def test_log_sum_exp_examples():
    assert log_sum_exp([0, 0]) == pytest.approx(math.log(2), rel=1e-15)
    assert log_sum_exp([1000, 1000]) == pytest.approx(1000 + math.log(2), rel=1e-15)
    assert log_sum_exp([math.log(1), math.log(2), math.log(3)]) == pytest.approx(math.log(6), rel=1e-15)


def test_log_sum_exp_empty():
    with pytest.raises(DomainError):
        log_sum_exp([])


def test_log_sum_exp_extremes():
    assert log_sum_exp([1e4, -1e4]) == 1e4
    assert log_sum_exp([-1e4, -1e4]) == pytest.approx(-1e4 + math.log(2), rel=1e-15)
    assert log_sum_exp([-math.inf, -math.inf]) == -math.inf


@settings(max_examples=200)
@given(
    st.lists(st.integers(-2000, 2000), min_size=1, max_size=20),
    st.integers(-4000, 4000),
)
def test_log_sum_exp_shift(terms, shift):
    # quarter-integer terms and shifts keep every subtraction exact; only the
    # final addition rounds, so the error is a few ulps of the operands
    t = np.array(terms, dtype=float) / 4
    s = shift / 4
    scale = abs(t).max() + abs(s) + 1
    assert abs(log_sum_exp(t + s) - (log_sum_exp(t) + s)) <= 4 * np.spacing(scale)


# unit_ball_volume


def test_unit_ball_volume_examples():
    assert unit_ball_volume(2, 2).value == pytest.approx(math.pi, rel=1e-15)
    assert unit_ball_volume(3, 1).value == pytest.approx(4 / 3, rel=1e-15)
    assert unit_ball_volume(4, math.inf).value == pytest.approx(16, rel=1e-15)
    assert unit_ball_volume(4, "inf").value == pytest.approx(16, rel=1e-15)
    for p in (1, 2, math.inf):
        assert unit_ball_volume(0, p).value == 1


def test_unit_ball_volume_large_n_stays_finite():
    v = unit_ball_volume(5000, 2)
    assert math.isfinite(v.log_value) and v.log_value < -10000


@pytest.mark.parametrize("p", [3, 0.5, "two"])
def test_unit_ball_volume_bad_p(p):
    with pytest.raises((DomainError, ValueError)):
        unit_ball_volume(3, p)


# series_f / closed_f


def test_series_f_examples():
    assert series_f(0, 1) == 1
    sp = math.sqrt(math.pi)
    assert closed_f(sp) == pytest.approx(3.9256, abs=5e-4)
    assert abs(series_f(sp, 200) - closed_f(sp)) < 1e-12


def test_series_f_converges_in_n():
    x = 1.5
    errs = [abs(series_f(x, n) - closed_f(x)) for n in (5, 10, 20, 40)]
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_series_f_negative_x():
    with pytest.raises(DomainError):
        series_f(-1, 10)
    with pytest.raises(DomainError):
        closed_f(-0.1)


# LogReal


def test_logreal_multiplication_adds_logs_exactly():
    a, b = LogReal.from_value(3.7e120), LogReal.from_value(2.2e-200)
    assert (a * b).log_value == a.log_value + b.log_value


def test_logreal_round_trip_within_one_ulp():
    rng = np.random.default_rng(1)
    for v in 10 ** rng.uniform(-300, 300, 5000):
        back = LogReal.from_value(float(v)).value
        assert abs(back - v) <= np.spacing(v)


def test_logreal_arithmetic():
    a, b = LogReal.from_value(6.0), LogReal.from_value(2.0)
    assert (a / b).value == pytest.approx(3.0, rel=1e-15)
    assert (a + b).value == pytest.approx(8.0, rel=1e-15)
    assert (b ** 10).value == pytest.approx(1024.0, rel=1e-15)
    assert (LogReal.zero() + a).value == 6.0
    assert (LogReal.zero() * a).value == 0.0
    assert LogReal.one().value == 1.0
    assert b < a


def test_logreal_errors():
    with pytest.raises(DomainError):
        LogReal.from_value(-1.0)
    with pytest.raises(DomainError):
        LogReal(math.nan)
    with pytest.raises(ZeroDivisionError):
        LogReal.one() / LogReal.zero()
