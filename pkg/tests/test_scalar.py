"""Exact scalar tower: QQi, Poly, RatFunc and the log-extended ring."""
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hotime.errors import BranchCutError, EngineMismatchError, PoleError, SingularPointError
from hotime.scalar import (
    I, LogExt, Poly, QQi, RatFunc, logext_derivative, logext_eval, ratfunc_derivative,
)

a = RatFunc.param()
fracs = st.fractions(min_value=-50, max_value=50, max_denominator=40)
qqis = st.builds(QQi, fracs, fracs)


def test_qqi_basic_arithmetic():
    z = QQi(Fraction(1, 2), 3)
    w = QQi(-2, Fraction(1, 3))
    assert z + w == QQi(Fraction(-3, 2), Fraction(10, 3))
    assert z * w == QQi(-1 - 1, Fraction(1, 6) - 6)
    assert (z / w) * w == z
    assert I * I == QQi(-1)


def test_qqi_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        QQi(1) / QQi(0)


@settings(max_examples=60, deadline=None)
@given(qqis, qqis, qqis)
def test_qqi_field_axioms(x, y, z):
    assert x + y == y + x
    assert x * y == y * x
    assert (x + y) * z == x * z + y * z
    assert (x * y) * z == x * (y * z)
    if y != QQi(0):
        assert (x / y) * y == x


def test_ratfunc_canonical_form():
    # (a^2 - 1) / (2a - 2) reduces to (a + 1)/2 with a monic denominator
    r = RatFunc(Poly([-1, 0, 1]), Poly([-2, 2]))
    assert r == (a + 1) / 2
    assert r.den == Poly([1])


def test_ratfunc_zero_denominator():
    with pytest.raises(ZeroDivisionError):
        RatFunc(Poly([1]), Poly([]))


def test_derivative_examples():
    assert ratfunc_derivative(RatFunc.const(1)).is_zero()
    r = 1 / (1 - a * a)
    assert ratfunc_derivative(r) == 2 * a / ((1 - a * a) * (1 - a * a))
    s = a * a / (1 + a)
    expect = (a * a + 2 * a) / ((1 + a) * (1 + a))
    assert ratfunc_derivative(s) == expect
    for p in (Fraction(1, 3), Fraction(2, 7), Fraction(-5, 4), Fraction(9, 2), Fraction(11, 13)):
        assert ratfunc_derivative(s)(p) == expect(p)


def test_ratfunc_pole_evaluation():
    with pytest.raises(PoleError):
        (1 / (1 - a * a))(1)


def test_canonical_evaluates_identically():
    num = Poly([3, -1, 0, 2])
    den = Poly([-1, 0, 1]) * Poly([5, 1])
    r = RatFunc(num * Poly([5, 1]), den)
    for p in (Fraction(1, 2), Fraction(-7, 3), Fraction(13, 5), Fraction(2, 9), Fraction(17, 4)):
        assert r(p) == (num * Poly([5, 1]))(p) / den(p)


def test_log_derivative_both_engines():
    assert logext_derivative(LogExt.log("alpha")) == LogExt(2 / (1 - a * a), 0, "alpha")
    assert logext_derivative(LogExt.log("z")) == LogExt(2 * I / (1 + a * a), 0, "z")
    assert logext_derivative(LogExt(0, 0)).is_zero()


def test_complex_log_derivative_numeric():
    z0 = mpmath.mpc(0.3, 0.4)
    h = mpmath.mpf("1e-8")
    with mpmath.workdps(30):
        fd = (mpmath.log(-(z0 + h - 1j) / (z0 + h + 1j)) - mpmath.log(-(z0 - h - 1j) / (z0 - h + 1j))) / (2 * h)
        assert abs(fd - 2j / (1 + z0 * z0)) < 1e-12


def test_logext_eval_examples():
    v = logext_eval(LogExt.log("alpha"), Fraction(1, 2))
    assert abs(v - mpmath.log(3)) < 1e-15
    w = logext_eval(LogExt.log("z"), QQi(0, Fraction(1, 2)))
    assert abs(w + mpmath.log(3)) < 1e-15
    with pytest.raises(PoleError):
        logext_eval(LogExt(1 / (1 - a * a), 0), 1)
    with pytest.raises(SingularPointError):
        logext_eval(LogExt.log("z"), I)
    with pytest.raises(BranchCutError):
        logext_eval(LogExt.log("z"), QQi(0, 2))


def test_engine_mix_rejected():
    with pytest.raises(EngineMismatchError):
        LogExt.log("alpha") + LogExt.log("z")


def test_lambda_squared_rejected():
    with pytest.raises(ValueError):
        LogExt.log() * LogExt.log()


@settings(max_examples=25, deadline=None)
@given(st.lists(fracs, min_size=1, max_size=4), st.lists(fracs, min_size=1, max_size=3),
       st.floats(min_value=0.05, max_value=0.9))
def test_derivative_matches_finite_difference(c0, c1, x0):
    e = LogExt(RatFunc(Poly(c0)), RatFunc(Poly(c1)))
    d = logext_derivative(e)
    with mpmath.workdps(30):
        x = mpmath.mpf(x0)
        h = mpmath.mpf("1e-5")

        def f(t):
            return e.r0(t) + e.r1(t) * 2 * mpmath.atanh(t)

        fd = (to_num(f(x + h)) - to_num(f(x - h))) / (2 * h)
        exact = logext_eval(d, x, precision=25)
        assert abs(fd - exact) <= 1e-6 * max(1, abs(exact))


def to_num(v):
    return v.to_mpc() if isinstance(v, QQi) else mpmath.mpmathify(v)


@pytest.mark.parametrize("alpha", [Fraction(k, 10) for k in range(1, 10)])
def test_engine_consistency(alpha):
    real = logext_eval(LogExt.log("alpha"), alpha, precision=30)
    cplx = logext_eval(LogExt.log("z"), QQi(0, alpha), precision=30)
    assert abs(real + cplx) < 1e-28
