"""Hermite polynomials and the eigenbasis of h_eps in the Gaussian representation."""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import mpmath

from .gauss import EpsParam, GaussVector, pairing
from .scalar import QQi


@lru_cache(maxsize=None)
def hermite_explicit(n: int) -> tuple:
    """Coefficients (lowest degree first) of the physicists' H_n from the explicit sum
    H_n(x) = n! sum_k (-1)^k (2x)^(n-2k) / (k! (n-2k)!)."""
    c = [0] * (n + 1)
    for k in range(n // 2 + 1):
        c[n - 2 * k] = (-1) ** k * math.factorial(n) * 2 ** (n - 2 * k) // (
            math.factorial(k) * math.factorial(n - 2 * k))
    return tuple(c)


def hermite_rodrigues(n: int) -> tuple:
    """H_n via Rodrigues: (-1)^n e^{x^2} d^n/dx^n e^{-x^2}.

    Writing d^n e^{-x^2} = P_n(x) e^{-x^2} gives P_{n+1} = P_n' - 2x P_n.
    """
    p = [1]
    for _ in range(n):
        d = [k * p[k] for k in range(1, len(p))] + [0, 0]
        q = [0] + [-2 * v for v in p]
        p = [a + b for a, b in zip(d + [0] * (len(q) - len(d)), q)]
    p = p[: n + 1]
    sign = (-1) ** n
    return tuple(sign * v for v in p)


def hermite_value(n: int, x):
    """Numeric H_n(x) via the three-term recurrence."""
    h0, h1 = mpmath.mpf(1), 2 * mpmath.mpmathify(x)
    if n == 0:
        return h0
    for k in range(1, n):
        h0, h1 = h1, 2 * x * h1 - 2 * k * h0
    return h1


@lru_cache(maxsize=None)
def eigen_raw(n: int, eps=Fraction(1)) -> GaussVector:
    """Unnormalized eigenvector eps^((n mod 2)/4) H_n(x eps^(-1/4)) exp(-x^2/(2 sqrt eps)).

    Exact whenever sqrt(eps) is rational: every coefficient is an integer power of sqrt(eps).
    """
    s = EpsParam.of(eps).sqrt
    z = QQi(0, 1 / s)
    h = hermite_explicit(n)
    terms = GaussVector()
    for j, c in enumerate(h):
        if c:
            k = (j - n % 2) // 2
            terms = terms + GaussVector.monomial(j, z, QQi(Fraction(c) / s**k))
    return terms


def eigen_norm_sq(n: int, eps=Fraction(1)):
    """||eigen_raw(n)||^2 = sqrt(eps)^(n mod 2) eps^(1/4) 2^n n! sqrt(pi) (numeric)."""
    e = EpsParam.of(eps).eps
    return (mpmath.sqrt(mpmath.mpf(e.numerator) / e.denominator) ** (n % 2)
            * mpmath.root(mpmath.mpf(e.numerator) / e.denominator, 4)
            * 2**n * math.factorial(n) * mpmath.sqrt(mpmath.pi))


def eigen_constant(n: int, eps=Fraction(1)):
    """Normalization c_n with e_n = c_n * eigen_raw(n)."""
    return 1 / mpmath.sqrt(eigen_norm_sq(n, eps))


def hermite_coefficients(f: GaussVector, N: int, dps: int = 30, eps=Fraction(1)):
    """Numeric a_n = <e_n, f> for n = 0..N (exact pairing, then one rounding)."""
    out = []
    with mpmath.workdps(dps + 5):
        for n in range(N + 1):
            p = pairing(eigen_raw(n, eps), f)
            out.append(p.evaluate(dps + 5) * eigen_constant(n, eps) if not p.is_zero() else mpmath.mpc(0))
    return out


__all__ = ["hermite_explicit", "hermite_rodrigues", "hermite_value", "eigen_raw",
           "eigen_norm_sq", "eigen_constant", "hermite_coefficients"]
