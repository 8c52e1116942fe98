"""Exact scalar tower built on complex rationals.

Polynomials and rational functions in one parameter sit on top, and the
log-extended ring ``r0 + r1*Lambda`` sits on top of those.

Two engines share the same machinery and differ only in the formal log:

* ``"alpha"`` (real engine): Lambda = log((1+a)/(1-a)), Lambda' = 2/(1-a^2)
* ``"z"`` (complex engine): Lambda = log(-(z-i)/(z+i)), Lambda' = 2i/(1+z^2)

Nothing here rounds. Floats only appear in :func:`logext_eval` and the
``evaluate`` helpers, which go through mpmath at a caller-chosen precision.
"""
from __future__ import annotations

import numbers
from fractions import Fraction

import mpmath

from .errors import BranchCutError, EngineMismatchError, PoleError, SingularPointError

ENGINES = ("alpha", "z")
DEFAULT_TUBE = 1e-6


def _frac(v):
    if isinstance(v, Fraction):
        return v
    if isinstance(v, numbers.Integral):
        return Fraction(int(v))
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, numbers.Rational):
        return Fraction(v.numerator, v.denominator)
    raise TypeError(f"cannot build an exact rational from {v!r}")


class QQi:
    """Complex number with exact rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _frac(re)
        self.im = _frac(im)

    @staticmethod
    def coerce(v):
        if isinstance(v, QQi):
            return v
        if isinstance(v, (numbers.Rational, str)):
            return QQi(v)
        if isinstance(v, complex):
            # only accept complex literals with integral parts, e.g. 2j
            if v.real.is_integer() and v.imag.is_integer():
                return QQi(int(v.real), int(v.imag))
        raise TypeError(f"not an exact scalar: {v!r}")

    @staticmethod
    def _other(v):
        if isinstance(v, QQi):
            return v
        if isinstance(v, numbers.Rational):
            return QQi(v)
        return None

    # arithmetic -----------------------------------------------------------
    def __add__(self, o):
        p = self._other(o)
        if p is None:
            return self._numeric_op(o, lambda a, b: a + b)
        return QQi(self.re + p.re, self.im + p.im)

    __radd__ = __add__

    def __sub__(self, o):
        p = self._other(o)
        if p is None:
            return self._numeric_op(o, lambda a, b: a - b)
        return QQi(self.re - p.re, self.im - p.im)

    def __rsub__(self, o):
        p = self._other(o)
        if p is None:
            return self._numeric_op(o, lambda a, b: b - a)
        return QQi(p.re - self.re, p.im - self.im)

    def __mul__(self, o):
        p = self._other(o)
        if p is None:
            return self._numeric_op(o, lambda a, b: a * b)
        if p.im == 0:
            return QQi(self.re * p.re, self.im * p.re)
        return QQi(self.re * p.re - self.im * p.im, self.re * p.im + self.im * p.re)

    __rmul__ = __mul__

    def inverse(self):
        d = self.re * self.re + self.im * self.im
        if d == 0:
            raise ZeroDivisionError("QQi division by zero")
        return QQi(self.re / d, -self.im / d)

    def __truediv__(self, o):
        p = self._other(o)
        if p is None:
            return self._numeric_op(o, lambda a, b: a / b)
        if p.im == 0:
            if p.re == 0:
                raise ZeroDivisionError("QQi division by zero")
            return QQi(self.re / p.re, self.im / p.re)
        return self * p.inverse()

    def __rtruediv__(self, o):
        p = self._other(o)
        if p is None:
            return self._numeric_op(o, lambda a, b: b / a)
        return p * self.inverse()

    def __pow__(self, n):
        if not isinstance(n, numbers.Integral):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out, base = QQi(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def __pos__(self):
        return self

    def conjugate(self):
        return QQi(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, o):
        p = self._other(o)
        if p is None:
            if isinstance(o, complex):
                return complex(self) == o
            return NotImplemented
        return self.re == p.re and self.im == p.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    # conversions ----------------------------------------------------------
    def is_real(self):
        return self.im == 0

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def _mpmath_(self, prec, rounding):
        return self.to_mpc()

    def to_mpc(self):
        return mpmath.mpc(_frac_to_mpf(self.re), _frac_to_mpf(self.im))

    def _numeric_op(self, o, fn):
        if isinstance(o, (mpmath.mpf, mpmath.mpc, float, complex)):
            return fn(self.to_mpc(), mpmath.mpmathify(o))
        return NotImplemented

    def __repr__(self):
        return f"QQi({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"


I = QQi(0, 1)
ZERO = QQi(0)
ONE = QQi(1)


def _frac_to_mpf(f: Fraction):
    if f.denominator == 1:
        return mpmath.mpf(f.numerator)
    return mpmath.mpf(f.numerator) / f.denominator


def to_mp(v):
    """Convert an exact or numeric scalar to an mpmath number."""
    if isinstance(v, QQi):
        return v.to_mpc()
    if isinstance(v, Fraction):
        return _frac_to_mpf(v)
    return mpmath.mpmathify(v)


def is_exact(v) -> bool:
    return isinstance(v, (QQi, numbers.Rational))


# --------------------------------------------------------------------------
# Polynomials over QQi
# --------------------------------------------------------------------------
class Poly:
    """Dense univariate polynomial with QQi coefficients, lowest degree first."""

    __slots__ = ("c",)

    def __init__(self, coeffs=()):
        c = [QQi.coerce(v) for v in coeffs]
        while c and not c[-1]:
            c.pop()
        self.c = tuple(c)

    @classmethod
    def _raw(cls, c):
        p = cls.__new__(cls)
        c = list(c)
        while c and not c[-1]:
            c.pop()
        p.c = tuple(c)
        return p

    @classmethod
    def const(cls, v):
        return cls._raw([QQi.coerce(v)])

    @classmethod
    def monomial(cls, k, v=1):
        return cls._raw([ZERO] * k + [QQi.coerce(v)])

    @property
    def degree(self):
        return len(self.c) - 1  # -1 for zero polynomial

    def is_zero(self):
        return not self.c

    def lead(self):
        return self.c[-1]

    def __add__(self, o):
        a, b = self.c, o.c
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, v in enumerate(b):
            out[i] = out[i] + v
        return Poly._raw(out)

    def __neg__(self):
        return Poly._raw([-v for v in self.c])

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o):
        if isinstance(o, Poly):
            if not self.c or not o.c:
                return Poly._raw([])
            out = [ZERO] * (len(self.c) + len(o.c) - 1)
            for i, a in enumerate(self.c):
                if not a:
                    continue
                for j, b in enumerate(o.c):
                    if b:
                        out[i + j] = out[i + j] + a * b
            return Poly._raw(out)
        s = QQi.coerce(o)
        return Poly._raw([v * s for v in self.c])

    __rmul__ = __mul__

    def __eq__(self, o):
        return isinstance(o, Poly) and self.c == o.c

    def __hash__(self):
        return hash(self.c)

    def divmod(self, o):
        if o.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.c)
        dq = len(r) - len(o.c)
        if dq < 0:
            return Poly._raw([]), self
        q = [ZERO] * (dq + 1)
        inv = o.lead().inverse()
        for k in range(dq, -1, -1):
            coef = r[k + len(o.c) - 1] * inv
            q[k] = coef
            if coef:
                for j, b in enumerate(o.c):
                    r[k + j] = r[k + j] - coef * b
        return Poly._raw(q), Poly._raw(r[: len(o.c) - 1])

    def monic(self):
        if self.is_zero():
            return self
        inv = self.lead().inverse()
        return Poly._raw([v * inv for v in self.c])

    def derivative(self):
        return Poly._raw([v * k for k, v in enumerate(self.c) if k > 0])

    def __call__(self, x):
        acc = ZERO if is_exact(x) else mpmath.mpc(0)
        for v in reversed(self.c):
            acc = acc * x + v
        return acc

    def __repr__(self):
        return f"Poly({[str(v) for v in self.c]})"


def poly_gcd(a: Poly, b: Poly) -> Poly:
    while not b.is_zero():
        a, b = b, a.divmod(b)[1]
    return a.monic()


# --------------------------------------------------------------------------
# Rational functions
# --------------------------------------------------------------------------
class RatFunc:
    """Quotient of polynomials in one formal parameter, kept canonical:
    gcd-free and with a monic denominator, so ``==`` is structural."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, _canonical=False):
        if not isinstance(num, Poly):
            num = Poly.const(num)
        if den is None:
            den = Poly.const(1)
        elif not isinstance(den, Poly):
            den = Poly.const(den)
        if den.is_zero():
            raise ZeroDivisionError("RatFunc with zero denominator")
        if not _canonical:
            num, den = _canonicalize(num, den)
        self.num = num
        self.den = den

    @classmethod
    def const(cls, v):
        return cls(Poly.const(v))

    @classmethod
    def param(cls):
        """The bare parameter (alpha or z)."""
        return cls(Poly.monomial(1))

    def is_zero(self):
        return self.num.is_zero()

    def is_polynomial(self):
        return self.den.degree == 0

    def __add__(self, o):
        o = _as_ratfunc(o)
        if o.is_zero():
            return self
        if self.is_zero():
            return o
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, _canonical=True)

    def __sub__(self, o):
        return self + (-_as_ratfunc(o))

    def __rsub__(self, o):
        return _as_ratfunc(o) - self

    def __mul__(self, o):
        if isinstance(o, RatFunc):
            return RatFunc(self.num * o.num, self.den * o.den)
        s = QQi.coerce(o)
        if not s:
            return RatFunc(Poly(), Poly.const(1), _canonical=True)
        return RatFunc(self.num * s, self.den, _canonical=True)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, RatFunc):
            if o.is_zero():
                raise ZeroDivisionError("RatFunc division by zero")
            return RatFunc(self.num * o.den, self.den * o.num)
        return self * QQi.coerce(o).inverse()

    def __rtruediv__(self, o):
        return _as_ratfunc(o) / self

    def __eq__(self, o):
        if not isinstance(o, RatFunc):
            try:
                o = _as_ratfunc(o)
            except TypeError:
                return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((self.num, self.den))

    def derivative(self):
        return ratfunc_derivative(self)

    def __call__(self, x):
        d = self.den(x)
        if (is_exact(x) and not d) or (not is_exact(x) and d == 0):
            raise PoleError(f"denominator vanishes at {x}")
        return self.num(x) / d

    def __repr__(self):
        return f"RatFunc({self.num!r} / {self.den!r})"


def _canonicalize(num: Poly, den: Poly):
    if num.is_zero():
        return num, Poly.const(1)
    if den.degree > 0 and num.degree >= 0:
        g = poly_gcd(num, den)
        if g.degree > 0:
            num = num.divmod(g)[0]
            den = den.divmod(g)[0]
    lc = den.lead()
    if lc != ONE:
        inv = lc.inverse()
        num, den = num * inv, den * inv
    return num, den


def _as_ratfunc(o):
    if isinstance(o, RatFunc):
        return o
    return RatFunc.const(QQi.coerce(o))


def ratfunc_derivative(r: RatFunc) -> RatFunc:
    """Formal derivative via the quotient rule, returned canonical."""
    if r.is_polynomial():
        return RatFunc(r.num.derivative() * r.den.lead().inverse())
    return RatFunc(r.num.derivative() * r.den - r.num * r.den.derivative(), r.den * r.den)


# --------------------------------------------------------------------------
# Log-extended ring
# --------------------------------------------------------------------------
def lambda_prime(engine: str) -> RatFunc:
    """Derivative of the formal log symbol in the given engine."""
    if engine == "alpha":
        return RatFunc(Poly.const(2), Poly([1, 0, -1]))
    if engine == "z":
        return RatFunc(Poly.const(QQi(0, 2)), Poly([1, 0, 1]))
    raise ValueError(f"unknown engine {engine!r}")


_LP = {e: lambda_prime(e) for e in ENGINES}


class LogExt:
    """Element ``r0 + r1*Lambda`` of the log-extended ring."""

    __slots__ = ("r0", "r1", "engine")

    def __init__(self, r0=0, r1=0, engine="alpha"):
        if engine not in ENGINES:
            raise ValueError(f"unknown engine {engine!r}")
        self.r0 = _as_ratfunc(r0)
        self.r1 = _as_ratfunc(r1)
        self.engine = engine

    @classmethod
    def log(cls, engine="alpha"):
        """The bare symbol Lambda."""
        return cls(0, 1, engine)

    @classmethod
    def rational(cls, r, engine="alpha"):
        return cls(r, 0, engine)

    def _check(self, o):
        if isinstance(o, LogExt):
            if o.engine != self.engine:
                raise EngineMismatchError(f"{self.engine} vs {o.engine}")
            return o
        return LogExt(_as_ratfunc(o), 0, self.engine)

    def is_zero(self):
        return self.r0.is_zero() and self.r1.is_zero()

    def __add__(self, o):
        o = self._check(o)
        return LogExt(self.r0 + o.r0, self.r1 + o.r1, self.engine)

    __radd__ = __add__

    def __sub__(self, o):
        o = self._check(o)
        return LogExt(self.r0 - o.r0, self.r1 - o.r1, self.engine)

    def __neg__(self):
        return LogExt(-self.r0, -self.r1, self.engine)

    def __mul__(self, o):
        if isinstance(o, LogExt):
            o = self._check(o)
            if not self.r1.is_zero() and not o.r1.is_zero():
                raise ValueError("Lambda^2 is outside the log-extended ring")
            return LogExt(self.r0 * o.r0, self.r0 * o.r1 + self.r1 * o.r0, self.engine)
        if isinstance(o, RatFunc):
            return LogExt(self.r0 * o, self.r1 * o, self.engine)
        s = QQi.coerce(o)
        return LogExt(self.r0 * s, self.r1 * s, self.engine)

    __rmul__ = __mul__

    def __eq__(self, o):
        if not isinstance(o, LogExt):
            return NotImplemented
        return self.engine == o.engine and self.r0 == o.r0 and self.r1 == o.r1

    def __hash__(self):
        return hash((self.r0, self.r1, self.engine))

    def derivative(self):
        return logext_derivative(self)

    def __repr__(self):
        return f"LogExt[{self.engine}]({self.r0!r} + {self.r1!r}*L)"


def logext_derivative(e: LogExt) -> LogExt:
    """d/dparam (r0 + r1*L) = r0' + r1'*L + r1*L'."""
    r0 = ratfunc_derivative(e.r0) + e.r1 * _LP[e.engine]
    return LogExt(r0, ratfunc_derivative(e.r1), e.engine)


def cut_distance(z) -> float:
    """Distance from z to the complex-engine cut {iy : |y| >= 1}."""
    z = complex(z)
    y = abs(z.imag)
    if y >= 1:
        return abs(z.real)
    return abs(complex(z.real, 1 - y))


def log_symbol(engine, point, tube=DEFAULT_TUBE):
    """Numeric value of Lambda at ``point`` (mpmath, current working precision)."""
    if engine == "alpha":
        a = to_mp(point)
        if isinstance(a, mpmath.mpc):
            if a.imag != 0:
                raise BranchCutError("real engine takes a real alpha")
            a = a.real
        if abs(a) == 1:
            raise PoleError(f"log((1+a)/(1-a)) is singular at a={point}")
        if abs(a) > 1:
            raise BranchCutError(f"alpha={point} is outside (-1, 1)")
        return 2 * mpmath.atanh(a)
    z = to_mp(point)
    if z == mpmath.mpc(0, 1) or z == mpmath.mpc(0, -1):
        raise SingularPointError(f"log(-C(z)) is singular at z={point}")
    if cut_distance(complex(z)) <= tube:
        raise BranchCutError(f"z={point} lies within {tube} of the branch cut")
    return mpmath.log(-(z - 1j) / (z + 1j))


def logext_eval(e: LogExt, point, precision: int = 16, tube: float = DEFAULT_TUBE):
    """Evaluate ``r0(point) + r1(point)*Lambda(point)`` at ``precision`` digits.

    Returns an ``mpmath.mpc``. Raises PoleError / BranchCutError.
    """
    with mpmath.workdps(precision + 5):
        if e.engine == "z" and is_exact(point) and QQi.coerce(point) in (I, -I):
            raise SingularPointError(f"z={point} is a singular point")
        v0 = e.r0(point) if not e.r0.is_zero() else mpmath.mpc(0)
        if e.r1.is_zero():
            return +to_mp(v0)
        v1 = e.r1(point)
        return +(to_mp(v0) + to_mp(v1) * log_symbol(e.engine, point, tube))
