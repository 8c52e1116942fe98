"""The POVM time operator: its matrix and weights, checked on the Hermite frame."""
import math
import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from hotime.errors import DomainError
from hotime.gauss import GaussVector, apply_h, norm, pairing, xi
from hotime.hermite import eigen_raw, hermite_explicit, hermite_rodrigues, hermite_value
from hotime.povm import (
    TWO_PI, commutator_check, contrast_sweep, hermite_frame, norm_bound_check, povm_weight,
    tg_form, tg_matrix,
)
from hotime.scalar import QQi


def test_low_hermite_polynomials():
    assert hermite_explicit(0) == (1,)
    assert hermite_explicit(1) == (0, 2)
    assert hermite_explicit(2) == (-2, 0, 4)


@pytest.mark.parametrize("n", range(16))
def test_hermite_formulas_agree(n):
    assert hermite_explicit(n) == hermite_rodrigues(n)
    x = mpmath.mpf("0.7")
    direct = sum(c * x**k for k, c in enumerate(hermite_explicit(n)))
    assert abs(direct - hermite_value(n, x)) <= 1e-10 * max(1, abs(direct))


def test_frame_normalization():
    fr = hermite_frame(8)
    with mpmath.workdps(30):
        assert abs(fr.constants[0] ** 2 - 1 / mpmath.sqrt(mpmath.pi)) < 1e-28
        for n in range(9):
            for m in range(9):
                v = pairing(fr.vectors[n], fr.vectors[m])
                if n != m:
                    assert v.is_zero()
                else:
                    assert abs(v.evaluate(30) * fr.constants[n] ** 2 - 1) < 1e-12


def test_frame_eigen_relation():
    assert apply_h(eigen_raw(5)) == eigen_raw(5) * QQi(Fraction(11, 2))
    eps = Fraction(1, 4)
    fr = hermite_frame(6, eps)
    for n, v in enumerate(fr.vectors):
        assert apply_h(v, eps) == v * QQi(Fraction(1, 2) * (n + Fraction(1, 2)))


def test_tg_matrix_entries():
    T = tg_matrix(5)
    assert T.entry(0, 1) == QQi(0, -1)
    assert T.entry(1, 0) == QQi(0, 1)
    assert T.entry(3, 3) == "pi"
    A = T.numeric()
    assert np.allclose(np.diag(A), math.pi)
    assert T.is_hermitian()
    assert np.array_equal(A, A.conj().T)


def test_tg_text_format():
    lines = [ln for ln in tg_matrix(1).to_text().splitlines() if not ln.startswith("#")]
    assert lines[0].split() == ["pi:0", "0:-1"]
    assert lines[1].split() == ["0:1", "pi:0"]


def test_tg_form_ground_state():
    fr = hermite_frame(0)
    v = tg_form(fr.vector(0), fr.vector(0), 10)
    assert abs(complex(v.value) - math.pi) < 1e-12


def test_tg_form_difference_vector():
    c = np.zeros(4, dtype=complex)
    c[0], c[1] = 1 / math.sqrt(2), -1 / math.sqrt(2)
    v = tg_form(c, c, 3)
    # pi on the diagonal, minus the two off-diagonal i/(n-m) contributions
    expect = math.pi - 0.5 * (-1j + 1j)
    assert abs(complex(v.value) - expect) < 1e-12
    assert v.increment == 0


def test_tg_form_bound_random():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = rng.standard_normal(41) + 1j * rng.standard_normal(41)
        b = rng.standard_normal(41) + 1j * rng.standard_normal(41)
        v = abs(complex(tg_form(a, b, 40).value))
        assert v <= TWO_PI * np.linalg.norm(a) * np.linalg.norm(b)


def test_povm_weight_full_and_empty():
    f = eigen_raw(0) + eigen_raw(3) * QQi(2, 1)
    assert povm_weight([(0, 2)], f, 10) == 1
    assert povm_weight([], f, 10) == 0
    with pytest.raises(DomainError):
        povm_weight([(0, 1)], GaussVector(), 5)
    with pytest.raises(ValueError):
        povm_weight([(0, 3)], f, 5)


def test_povm_weight_exact_additivity():
    f = eigen_raw(0) + eigen_raw(2)
    w1 = povm_weight([(0, Fraction(1, 2))], f, 6)
    w2 = povm_weight([(Fraction(1, 2), 2)], f, 6)
    w = povm_weight([(0, Fraction(1, 2)), (Fraction(1, 2), 2)], f, 6)
    assert isinstance(w, Fraction) and w == 1
    assert abs(w1 + w2 - 1) < 1e-25


def test_povm_weight_monotone():
    rng = random.Random(5)
    f = xi(Fraction(3, 4)) + xi(Fraction(3, 4), power=2, coeff=QQi(0, 1))
    for _ in range(20):
        lo = Fraction(rng.randint(0, 8), 8)
        hi = lo + Fraction(rng.randint(0, 16 - int(lo * 8)), 8)
        lo2 = lo - Fraction(rng.randint(0, int(lo * 8)), 8)
        hi2 = hi + Fraction(rng.randint(0, 16 - int(hi * 8)), 8)
        small = povm_weight([(lo, hi)], f, 12)
        big = povm_weight([(lo2, hi2)], f, 12)
        assert small >= -1e-15
        assert small <= big + 1e-15, (lo, hi, lo2, hi2, small, big)
        assert big <= 1 + 1e-15


def test_povm_weight_radians():
    f = eigen_raw(1)
    assert abs(povm_weight([(0.0, math.pi)], f, 4, unit="rad") - 0.5) < 1e-12


@pytest.mark.parametrize("N", [1, 2, 5, 20, 100, 200])
def test_commutator_identity_exact(N):
    rep = commutator_check(N, keep_matrix=True)
    assert rep.equal and rep.restriction_ok and not rep.mismatches
    assert rep.commutator[0][1] == QQi(0, 1)
    assert rep.commutator[1][1] == QQi(0)


def test_norm_bound_examples():
    assert norm_bound_check(0).value == math.pi
    e50 = norm_bound_check(50)
    assert e50.value < TWO_PI
    assert abs(e50.value - e50.eigvalsh_max) < 1e-7


def test_norm_bound_monotone():
    vals = [norm_bound_check(N).value for N in (10, 20, 30, 40)]
    assert all(a <= b + 1e-9 for a, b in zip(vals, vals[1:]))
    assert vals[-1] <= TWO_PI


def test_contrast_witness():
    rows = contrast_sweep(0, [Fraction(1, 2), Fraction(1023, 1024)], N=60)
    assert all(r.tg_abs <= TWO_PI for r in rows)
    assert rows[-1].t_abs > TWO_PI
    assert all(r.t_diag_abs == 0 for r in rows)
    # closed form |t[f, g]| = 2a/(sqrt(3)(1-a^2)) for the k = 0 pair
    a = 1023 / 1024
    assert abs(rows[-1].t_abs - 2 * a / (math.sqrt(3) * (1 - a * a))) < 1e-9 * rows[-1].t_abs
    with pytest.raises(DomainError):
        contrast_sweep(0, [1])


def test_hermite_coefficients_norm():
    f = xi(Fraction(1, 2), power=2)
    fr = hermite_frame(60)
    a = fr.coefficients(f)
    with mpmath.workdps(30):
        assert abs(sum(abs(v) ** 2 for v in a) - norm(f, 30) ** 2) < 1e-10
