"""Gaussian vectors: exact pairings, the operators acting on them and the arctan series."""
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hotime.errors import DomainError
from hotime.gauss import (
    EpsParam, GaussVector, apply_h, apply_t, apply_t_star, arctan_partial_sum, from_json,
    from_text, inner_product, norm, pairing, power_t_closed, to_json, to_text, xi,
)
from hotime.hermite import eigen_raw
from hotime.scalar import QQi

SQRT_PI = mpmath.sqrt(mpmath.pi)


def test_gaussian_moments():
    g = xi(1)
    assert abs(inner_product(g, g) - SQRT_PI) < 1e-15
    assert inner_product(xi(1, power=1), g) == 0
    assert abs(inner_product(xi(1, power=2), g) - SQRT_PI / 2) < 1e-15


def test_pairing_exact_in_sqrt_pi_units():
    p = pairing(xi(1, power=2), xi(1))
    assert p.is_exact()
    assert abs(p.sqrt_pi_units() - mpmath.mpf(1) / 2) < 1e-25


def test_width_validation():
    with pytest.raises(DomainError):
        GaussVector.monomial(0, QQi(1, 0))
    with pytest.raises(DomainError):
        GaussVector.monomial(0, QQi(0, -1))


def test_eps_range():
    with pytest.raises(DomainError):
        EpsParam.of(0)
    with pytest.raises(DomainError):
        EpsParam.of(Fraction(3, 2))
    assert EpsParam.of(Fraction(1, 4)).sqrt == Fraction(1, 2)


def test_parity_and_zero():
    f = xi(Fraction(1, 2), power=2) + xi(Fraction(1, 2), power=0)
    assert f.parity() == "even"
    assert (f + xi(1, power=1)).parity() == "mixed"
    assert (f - f).is_zero()


def test_apply_t_examples():
    a = Fraction(1, 3)
    f = xi(a)
    assert apply_t(f) == f * QQi(0, a)
    with pytest.raises(DomainError):
        apply_t(xi(1, power=1))
    z = QQi(0, Fraction(1, 2))
    g = GaussVector.monomial(2, z)
    assert apply_t(g) == GaussVector.monomial(2, z, z) + GaussVector.monomial(0, z, QQi(0, -2))


def test_apply_t_star_examples():
    a = Fraction(2, 5)
    f = xi(a, power=1)
    assert apply_t_star(f) == f * QQi(0, a)
    with pytest.raises(DomainError):
        apply_t_star(xi(1))
    z = QQi(Fraction(1, 7), Fraction(3, 4))
    g = GaussVector.monomial(3, z)
    assert apply_t_star(g) == GaussVector.monomial(3, z, z) + GaussVector.monomial(1, z, QQi(0, -2))


def test_apply_t_pointwise_oracle():
    # t(x^2 xi_z) = (z x^2 - 2i) xi_z, checked pointwise at z = i/2
    z = mpmath.mpc(0, 0.5)
    got = apply_t(GaussVector.monomial(2, QQi(0, Fraction(1, 2)))).numeric(25)
    with mpmath.workdps(25):
        for x in (mpmath.mpf("0.3"), mpmath.mpf("1.7")):
            val = sum(c * x**p * mpmath.exp(1j * w * x**2 / 2) for (p, w, _), c in got.terms.items())
            expect = (z * x**2 - 2j) * mpmath.exp(1j * z * x**2 / 2)
            assert abs(val - expect) < 1e-20


def test_apply_h_examples():
    e0 = xi(1)
    assert apply_h(e0) == e0 * QQi(Fraction(1, 2))
    z = QQi(Fraction(1, 5), Fraction(2, 3))
    f = GaussVector.monomial(0, z)
    expect = (GaussVector.monomial(2, z, (1 + z * z) * Fraction(1, 2))
              + GaussVector.monomial(0, z, -QQi(0, 1) * z * Fraction(1, 2)))
    assert apply_h(f) == expect


@pytest.mark.parametrize("alpha", [Fraction(k, 10) for k in range(1, 10)])
@pytest.mark.parametrize("eps", [1, Fraction(1, 4), Fraction(1, 100)])
def test_eigen_relation(alpha, eps):
    f = xi(alpha, eps)
    s = EpsParam.of(eps).sqrt
    assert apply_t(f) == f * QQi(0, alpha / s)


@pytest.mark.parametrize("n", range(11))
@pytest.mark.parametrize("eps", [1, Fraction(1, 4)])
def test_h_eigenvectors(n, eps):
    s = EpsParam.of(eps).sqrt
    v = eigen_raw(n, eps)
    assert apply_h(v, eps) == v * QQi(s * (n + Fraction(1, 2)))


def test_power_t_closed_examples():
    a = Fraction(1, 3)
    assert power_t_closed(1, 0, a) == {0: QQi(0, a)}
    assert power_t_closed(0, 3, a) == {6: QQi(1)}
    eps = Fraction(1, 4)
    expect = {2: QQi(0, a) ** 2, 0: QQi(0, a) * QQi(0, -Fraction(1, 2)) * 4}
    assert power_t_closed(2, 1, a, eps) == expect


@pytest.mark.parametrize("n", range(9))
@pytest.mark.parametrize("m", range(5))
def test_power_t_closed_matches_iteration(n, m):
    a, eps = Fraction(2, 7), Fraction(1, 4)
    s = EpsParam.of(eps).sqrt
    v = xi(a, eps, power=2 * m)
    for _ in range(n):
        v = apply_t(v) * s
    z = QQi(0, a / s)
    table = GaussVector()
    for p, c in power_t_closed(n, m, a, eps).items():
        table = table + GaussVector.monomial(p, z, c)
    assert v == table


def _quad_pair(p, z, q, w):
    f = lambda x: mpmath.conj(x**p * mpmath.exp(1j * z * x * x / 2)) * x**q * mpmath.exp(1j * w * x * x / 2)
    return mpmath.quad(f, [-mpmath.inf, -2, 0, 2, mpmath.inf])


def test_moments_against_quadrature():
    rng = random.Random(7)
    with mpmath.workdps(30):
        for _ in range(20):
            p, q = rng.randrange(9), rng.randrange(9)
            if (p + q) % 2:
                q = (q + 1) % 9
            z = QQi(Fraction(rng.randint(-20, 20), 10), Fraction(rng.randint(3, 25), 10))
            w = QQi(Fraction(rng.randint(-20, 20), 10), Fraction(rng.randint(3, 25), 10))
            exact = inner_product(GaussVector.monomial(p, z), GaussVector.monomial(q, w), precision=25)
            num = _quad_pair(p, z.to_mpc(), q, w.to_mpc())
            assert abs(exact - num) <= 1e-9 * max(abs(num), 1e-30)


def test_adjointness_on_safe_pairs():
    rng = random.Random(11)
    for _ in range(15):
        z = QQi(Fraction(rng.randint(-9, 9), 5), Fraction(rng.randint(1, 9), 5))
        w = QQi(Fraction(rng.randint(-9, 9), 5), Fraction(rng.randint(1, 9), 5))
        f = GaussVector.monomial(2 * rng.randrange(4), z, QQi(rng.randint(1, 5), rng.randint(-3, 3)))
        g = GaussVector.monomial(2 * rng.randrange(4) + 1, w, QQi(rng.randint(-3, 3), 1))
        lhs = inner_product(apply_t(f), g, 25)
        rhs = inner_product(f, apply_t_star(g), 25)
        assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1)


def test_series_m0_is_minus_t():
    f = xi(Fraction(1, 2))
    assert arctan_partial_sum(f, 1, 0).value == -apply_t(f)


def test_series_converges_below_one():
    a = Fraction(1, 2)
    res = arctan_partial_sum(xi(a), 1, 200)
    assert res.verdict == "converged"
    v = inner_product(xi(a), res.value, 30) / norm(xi(a), 30) ** 2
    expect = -0.5j * mpmath.log(3)
    assert abs(v - expect) < 1e-12


def test_series_divergent_at_one():
    res = arctan_partial_sum(xi(1), 1, 200)
    assert res.verdict == "divergent"
    assert res.increment_norms[-1] > 1e-3


def test_series_parity_guard():
    with pytest.raises(DomainError):
        arctan_partial_sum(xi(Fraction(1, 2), power=1), 1, 3)


widths = st.builds(lambda a, b: QQi(Fraction(a, 4), Fraction(b, 4)),
                   st.integers(-8, 8), st.integers(1, 12))
monos = st.builds(lambda p, z, c: GaussVector.monomial(p, z, QQi(c, 1)),
                  st.integers(0, 6), widths, st.integers(-4, 4))


@settings(max_examples=30, deadline=None)
@given(monos, monos)
def test_pairing_hermitian(f, g):
    lhs = pairing(f, g).conjugate().evaluate(25)
    assert abs(lhs - pairing(g, f).evaluate(25)) <= 1e-20 * max(abs(lhs), 1)


@settings(max_examples=30, deadline=None)
@given(monos, monos)
def test_serialization_round_trip(f, g):
    v = f + g * QQi(Fraction(1, 3))
    assert from_text(to_text(v)) == v
    assert from_json(to_json(v)) == v
