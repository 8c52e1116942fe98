"""Closed forms of the angle operator as differential expressions in the
width parameter.

On ``x^(2m) xi`` the angle operator acts as a polynomial in x^2 whose
coefficients live in the log-extended ring. We build those polynomials by
iterating the parameter operator

    t_alpha = x^2 - 2 sqrt(eps) d/dalpha      (real engine)
    t_z     = x^2 - 2i d/dz                   (complex engine, eps = 1)

on the formal log symbol. Sign convention (checked by the engine-consistency
tests): S x^(2m) xi_alpha = -(i/(2 sqrt eps)) (t_alpha^m L) xi_alpha with
L = log((1+a)/(1-a)), and S_hat x^(2m) xi_z = (i/2) (t_z^m Lc) xi_z with
Lc = log(-C(z)). At z = a*i, Lc = -L and t_z = t_alpha, so the two agree.
"""
from __future__ import annotations

import json
import math
from fractions import Fraction
from functools import lru_cache

import mpmath

from .errors import DomainError, EngineMismatchError
from .gauss import EpsParam, GaussVector, apply_q, _mul_labels, _norm_width
from .scalar import (I, LogExt, Poly, QQi, RatFunc, is_exact, logext_derivative,
                     logext_eval, to_mp)

PARAM = RatFunc.param()


class XPolyLog:
    """Polynomial in x with LogExt coefficients: ``{x_power: LogExt}``.

    ``s`` is sqrt(eps) (real engine); the complex engine always has s = 1.
    """

    __slots__ = ("coeffs", "engine", "s")

    def __init__(self, coeffs=None, engine="alpha", s=Fraction(1)):
        self.engine = engine
        self.s = Fraction(s)
        d = {}
        for p, c in (coeffs or {}).items():
            if not isinstance(c, LogExt):
                c = LogExt(c, 0, engine)
            if c.engine != engine:
                raise EngineMismatchError(f"coefficient engine {c.engine} in {engine} container")
            if not c.is_zero():
                d[int(p)] = c
        self.coeffs = d

    @classmethod
    def log(cls, engine="alpha", s=1):
        return cls({0: LogExt.log(engine)}, engine, s)

    def _same(self, o):
        if o.engine != self.engine or o.s != self.s:
            raise EngineMismatchError("XPolyLog engines/eps differ")

    def __add__(self, o):
        self._same(o)
        d = dict(self.coeffs)
        for p, c in o.coeffs.items():
            d[p] = d[p] + c if p in d else c
        return XPolyLog(d, self.engine, self.s)

    def __neg__(self):
        return XPolyLog({p: -c for p, c in self.coeffs.items()}, self.engine, self.s)

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, k):
        """Multiply by a coefficient (never by x)."""
        return XPolyLog({p: c * k for p, c in self.coeffs.items()}, self.engine, self.s)

    __rmul__ = __mul__

    def shift(self, k):
        """Multiply by x^k."""
        return XPolyLog({p + k: c for p, c in self.coeffs.items()}, self.engine, self.s)

    def mul_xpoly(self, poly):
        """Multiply by ``{x_power: RatFunc}``; coefficients act after the fact."""
        out = XPolyLog({}, self.engine, self.s)
        for k, r in poly.items():
            out = out + (self * r).shift(k)
        return out

    def d_param(self):
        return XPolyLog({p: logext_derivative(c) for p, c in self.coeffs.items()}, self.engine, self.s)

    def is_zero(self):
        return not self.coeffs

    def degree(self):
        return max(self.coeffs) if self.coeffs else -1

    def __eq__(self, o):
        return (isinstance(o, XPolyLog) and self.engine == o.engine and self.s == o.s
                and self.coeffs == o.coeffs)

    def __hash__(self):
        return hash((self.engine, self.s, tuple(sorted(self.coeffs.items(), key=lambda kv: kv[0]))))

    def evaluate(self, point, precision=16):
        """``{x_power: value}`` at a parameter point."""
        return {p: logext_eval(c, point, precision) for p, c in sorted(self.coeffs.items())}

    def specialize(self, point):
        """Exact coefficients at an exact point: ``{x_power: (r0(point), r1(point))}``."""
        return {p: (c.r0(point) if not c.r0.is_zero() else QQi(0),
                    c.r1(point) if not c.r1.is_zero() else QQi(0))
                for p, c in self.coeffs.items()}

    def __str__(self):
        sym = "a" if self.engine == "alpha" else "z"
        parts = []
        for p in sorted(self.coeffs, reverse=True):
            c = self.coeffs[p]
            bits = []
            if not c.r1.is_zero():
                bits.append(f"({_rf_str(c.r1, sym)})*L")
            if not c.r0.is_zero():
                bits.append(f"({_rf_str(c.r0, sym)})")
            parts.append(" + ".join(bits) + (f"*x^{p}" if p else ""))
        return " + ".join(parts) if parts else "0"

    def to_json(self):
        def rf(r):
            return {"num": [[str(v.re), str(v.im)] for v in r.num.c],
                    "den": [[str(v.re), str(v.im)] for v in r.den.c]}
        return json.dumps({
            "engine": self.engine, "sqrt_eps": str(self.s),
            "coeffs": {str(p): {"r0": rf(c.r0), "r1": rf(c.r1)} for p, c in sorted(self.coeffs.items())},
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)

        def rf(d):
            return RatFunc(Poly([QQi(Fraction(a), Fraction(b)) for a, b in d["num"]]),
                           Poly([QQi(Fraction(a), Fraction(b)) for a, b in d["den"]]))
        eng = data["engine"]
        return cls({int(p): LogExt(rf(c["r0"]), rf(c["r1"]), eng) for p, c in data["coeffs"].items()},
                   eng, Fraction(data["sqrt_eps"]))

    def __repr__(self):
        return f"XPolyLog[{self.engine}, s={self.s}]({self})"


def _rf_str(r, sym):
    def ps(p):
        terms = []
        for k, v in enumerate(p.c):
            if v:
                terms.append(f"{v}" + (f"*{sym}^{k}" if k > 1 else (f"*{sym}" if k == 1 else "")))
        return " + ".join(terms) or "0"
    if r.den.degree == 0:
        return ps(r.num)
    return f"[{ps(r.num)}]/[{ps(r.den)}]"


class ParamOperator:
    """t_param = x^2 - c d/dparam with c = 2 sqrt(eps) (alpha) or 2i (z)."""

    def __init__(self, engine="alpha", s=Fraction(1)):
        self.engine = engine
        self.s = Fraction(s)
        self.c = QQi(2 * self.s) if engine == "alpha" else QQi(0, 2)

    def __call__(self, phi: XPolyLog) -> XPolyLog:
        if phi.engine != self.engine or phi.s != self.s:
            raise EngineMismatchError("operator/operand engine mismatch")
        return phi.shift(2) - phi.d_param() * self.c

    def power(self, n, phi):
        for _ in range(n):
            phi = self(phi)
        return phi


def _sqrt_eps(eps):
    return EpsParam.of(eps).sqrt


@lru_cache(maxsize=None)
def t_power_log(m: int, engine: str = "alpha", s: Fraction = Fraction(1)) -> XPolyLog:
    """t_param^m applied to the bare log symbol (no prefactor)."""
    if m == 0:
        return XPolyLog.log(engine, s)
    return ParamOperator(engine, s)(t_power_log(m - 1, engine, s))


def s_closed(m: int, parity: str = "even", eps=1) -> XPolyLog:
    """Phi with S_eps(x^(2m) xi) = Phi xi (even) or S_eps*(x^(2m+1) xi) = Phi x xi (odd)."""
    if parity not in ("even", "odd"):
        raise ValueError("parity must be 'even' or 'odd'")
    if m < 0:
        raise ValueError("m must be >= 0")
    s = _sqrt_eps(eps)
    return t_power_log(m, "alpha", s) * QQi(0, -1 / (2 * s))


def s_closed_poly(rho, parity: str = "even", eps=1) -> XPolyLog:
    """Linear extension of :func:`s_closed` to rho(x^2) = sum rho[k] x^(2k)."""
    s = _sqrt_eps(eps)
    out = XPolyLog({}, "alpha", s)
    for k, r in enumerate(rho):
        r = QQi.coerce(r)
        if r:
            out = out + s_closed(k, parity, eps) * r
    return out


def binomial_log_sum(m: int, eps=1) -> XPolyLog:
    """Explicit binomial sum -(i/2s) sum_k C(m,k) (-2s)^k L^(k) x^(2m-2k)."""
    s = _sqrt_eps(eps)
    out = XPolyLog({}, "alpha", s)
    d = LogExt.log("alpha")
    for k in range(m + 1):
        out = out + XPolyLog({2 * m - 2 * k: d * QQi(math.comb(m, k) * (-2 * s) ** k)}, "alpha", s)
        d = logext_derivative(d)
    return out * QQi(0, -1 / (2 * s))


def s_hat_closed(m: int, parity: str = "even") -> XPolyLog:
    """Complex-engine closed form: (i/2) t_z^m log(-C(z)), eps = 1."""
    if parity not in ("even", "odd"):
        raise ValueError("parity must be 'even' or 'odd'")
    return t_power_log(m, "z", Fraction(1)) * QQi(0, Fraction(1, 2))


def to_z_engine(phi: XPolyLog) -> XPolyLog:
    """Rewrite an eps = 1 real-engine XPolyLog in the z engine via a = -i z and L = -Lc."""
    if phi.engine != "alpha" or phi.s != 1:
        raise EngineMismatchError("only eps = 1 real-engine values map to the z engine")
    sub = Poly([0, QQi(0, -1)])  # a = -i z

    def compose(r):
        return RatFunc(_compose(r.num, sub), _compose(r.den, sub))
    return XPolyLog({p: LogExt(compose(c.r0), -compose(c.r1), "z") for p, c in phi.coeffs.items()}, "z", 1)


def _compose(p: Poly, q: Poly) -> Poly:
    out = Poly()
    for v in reversed(p.c):
        out = out * q + Poly.const(v)
    return out


def shift_exponential(beta, order: int, eps=1) -> XPolyLog:
    """Truncated sum_{j<=order} (beta/(2s))^j / j! t^j L (exp(beta t / 2s) on L)."""
    s = _sqrt_eps(eps)
    b = Fraction(beta)
    out = XPolyLog({}, "alpha", s)
    for j in range(order + 1):
        out = out + t_power_log(j, "alpha", s) * QQi((b / (2 * s)) ** j / math.factorial(j))
    return out


# complex-engine Q_n and commutators ------------------------------------------
def _z_poly(*coeffs):
    return RatFunc(Poly(coeffs))


def _tz_power_on(n, phi):
    return ParamOperator("z")(phi) if n == 1 else ParamOperator("z").power(n, phi)


def _as_xpoly(e):
    if isinstance(e, XPolyLog):
        return e
    if not isinstance(e, LogExt):
        e = LogExt(e, 0, "z")
    return XPolyLog({0: e}, e.engine, 1)


def qn_apply(n: int, e) -> XPolyLog:
    """Q_n e = (1+z^2) t^n e - 4i n z t^(n-1) e - 4n(n-1) t^(n-2) e (x-graded result)."""
    phi = _as_xpoly(e)
    if phi.engine != "z":
        raise EngineMismatchError("Q_n lives in the complex engine")
    tz = ParamOperator("z")
    out = tz.power(n, phi) * _z_poly(1, 0, 1)
    if n >= 1:
        out = out + tz.power(n - 1, phi) * _z_poly(0, QQi(0, -4 * n))
    if n >= 2:
        out = out + tz.power(n - 2, phi) * QQi(-4 * n * (n - 1))
    return out


def qn_composed(n: int, e) -> XPolyLog:
    """t_z^n applied to (1+z^2) e."""
    phi = _as_xpoly(e) * _z_poly(1, 0, 1)
    return ParamOperator("z").power(n, phi)


def h_symbolic(phi: XPolyLog) -> XPolyLog:
    """h_eps acting on phi(x) xi, returned as the new x-polynomial.

    Complex engine (eps = 1, width z):
        h x^k xi = 1/2((1+z^2) x^(k+2) - i z (2k+1) x^k - k(k-1) x^(k-2)) xi
    Real engine (width z = i a / s, eps = s^2):
        h x^k xi = 1/2((1-a^2) x^(k+2) + s a (2k+1) x^k - s^2 k(k-1) x^(k-2)) xi
    """
    half = Fraction(1, 2)
    out = XPolyLog({}, phi.engine, phi.s)
    s = phi.s
    for k, c in phi.coeffs.items():
        if phi.engine == "z":
            up, mid, down = _z_poly(half, 0, half), _z_poly(0, QQi(0, -(2 * k + 1) * half)), QQi(-k * (k - 1) * half)
        else:
            up = _z_poly(half, 0, -half)
            mid, down = _z_poly(0, s * (2 * k + 1) * half), QQi(-s * s * k * (k - 1) * half)
        terms = {k + 2: c * up, k: c * mid}
        if k >= 2:
            terms[k - 2] = c * down
        out = out + XPolyLog(terms, phi.engine, s)
    return out


def s_apply_symbolic(phi: XPolyLog, parity="even") -> XPolyLog:
    """Angle operator on phi(x) xi where phi has rational (Lambda-free) coefficients.

    Each coefficient is a scalar for fixed parameter, so only the monomials are
    mapped through the closed forms.
    """
    out = XPolyLog({}, phi.engine, phi.s)
    for k, c in phi.coeffs.items():
        if not c.r1.is_zero():
            raise ValueError("input coefficients must be Lambda-free")
        if parity == "even":
            if k % 2:
                raise DomainError("odd power in an even input")
            m, shift = k // 2, 0
        else:
            if k % 2 == 0:
                raise DomainError("even power in an odd input")
            m, shift = (k - 1) // 2, 1
        base = s_hat_closed(m, parity) if phi.engine == "z" else s_closed(m, parity, phi.s**2)
        out = out + (base * c.r0).shift(shift)
    return out


def commutator_assembled(n: int, parity: str = "even", engine: str = "z", eps=1) -> XPolyLog:
    """[h, S#] x^(2n or 2n+1) xi assembled from h_symbolic and the closed forms."""
    s = Fraction(1) if engine == "z" else _sqrt_eps(eps)
    a = 2 * n + (parity == "odd")
    mono = XPolyLog({a: LogExt(1, 0, engine)}, engine, s)
    if engine == "z":
        s_mono = s_hat_closed(n, parity)
    else:
        s_mono = s_closed(n, parity, eps)
    if parity == "odd":
        s_mono = s_mono.shift(1)
    return h_symbolic(s_mono) - s_apply_symbolic(h_symbolic(mono), parity)


def commutator_symbolic(n: int, parity: str = "even") -> XPolyLog:
    """[h, S_hat#] x^(2n or 2n+1) xi_z (complex engine).

    Even parity uses the explicit operator-polynomial forms of h S_hat and
    S_hat h written in t_z; odd parity is assembled from the closed forms.
    Either way the result canonicalizes to -i x^(2n) (resp. -i x^(2n+1)).
    """
    if parity == "odd":
        return commutator_assembled(n, "odd", "z")
    return k1_form(n) - k2_form(n)


def _tlog(k):
    return t_power_log(k, "z", Fraction(1))


def k1_form(n: int) -> XPolyLog:
    """h S_hat x^(2n) xi_z = (i/4)[(1+z^2)x^2 t^n - iz t^n - 2n(1+2iz x^2) t^(n-1)
    - 4n(n-1) x^2 t^(n-2)] Lc."""
    out = _tlog(n).mul_xpoly({2: _z_poly(1, 0, 1), 0: _z_poly(0, QQi(0, -1))})
    if n >= 1:
        out = out + _tlog(n - 1).mul_xpoly({0: _z_poly(-2 * n), 2: _z_poly(0, QQi(0, -4 * n))})
    if n >= 2:
        out = out + _tlog(n - 2).mul_xpoly({2: _z_poly(-4 * n * (n - 1))})
    return out * QQi(0, Fraction(1, 4))


def k2_form(n: int) -> XPolyLog:
    """S_hat h x^(2n) xi_z = (i/4)[(1+z^2) t^(n+1) - i(4n+1) z t^n - 2n(2n-1) t^(n-1)] Lc."""
    out = _tlog(n + 1) * _z_poly(1, 0, 1) + _tlog(n) * _z_poly(0, QQi(0, -(4 * n + 1)))
    if n >= 1:
        out = out + _tlog(n - 1) * QQi(-2 * n * (2 * n - 1))
    return out * QQi(0, Fraction(1, 4))


# application to Gaussian vectors --------------------------------------------
def _alpha_of(z, s):
    """Real-engine parameter a = s * Im z for a purely imaginary width."""
    if isinstance(z, QQi):
        if z.re != 0:
            raise DomainError(f"width {z} is not purely imaginary; the real engine needs xi = exp(-a x^2/2s)")
        return z.im * s if is_exact(s) else to_mp(z.im) * s
    z = mpmath.mpmathify(z)
    if z.real != 0:
        raise DomainError(f"width {z} is not purely imaginary")
    return z.imag * to_mp(s)


def check_alpha(a):
    if not (0 < a < 1):
        raise DomainError(
            f"scaled width alpha={a} is outside (0,1); at alpha=1 the arctan series diverges "
            "(the Gaussian-polynomial span at alpha=1 meets the domain of S only in 0)"
        )


def _closed_image(phi: XPolyLog, point, label, c, shift, dps):
    """Terms of c * phi(point)(x) x^shift with the log symbol kept as ``label``."""
    out = []
    exact = is_exact(point) and isinstance(c, QQi)
    if exact:
        for p, (r0, r1) in phi.specialize(point).items():
            if r0:
                out.append((p + shift, c * r0, ()))
            if r1:
                out.append((p + shift, c * r1, (label,)))
    else:
        for p, v in phi.evaluate(point, dps).items():
            out.append((p + shift, to_mp(c) * v, ()))
    return out


@lru_cache(maxsize=None)
def log_derivative(k: int, engine: str = "alpha") -> LogExt:
    """k-th parameter derivative of the bare log symbol."""
    return LogExt.log(engine) if k == 0 else logext_derivative(log_derivative(k - 1, engine))


def log_poly_vector(k: int, a, s, width, coeff=QQi(1), shift: int = 0, dps: int = 30) -> GaussVector:
    """coeff * x^shift * (t_a^k L)(a)(x) * xi_width, via the binomial form
    t^k L = sum_j C(k,j) (-2s)^j L^(j) x^(2k-2j).

    Exact (with an ("alpha", a) label on the log parts) when a, s and coeff are
    exact; otherwise every coefficient is evaluated with mpmath at ``dps``.
    """
    width = _norm_width(width)
    exact = is_exact(a) and is_exact(s) and isinstance(coeff, QQi)
    d = {}

    def put(key, v):
        d[key] = d[key] + v if key in d else v

    label = ("alpha", a)
    for j in range(k + 1):
        p = 2 * k - 2 * j + shift
        dj = log_derivative(j)
        if exact:
            w = coeff * QQi(math.comb(k, j) * (-2 * Fraction(s)) ** j)
            if not dj.r0.is_zero():
                put((p, width, ()), w * dj.r0(a))
            if not dj.r1.is_zero():
                put((p, width, (label,)), w * dj.r1(a))
        else:
            with mpmath.workdps(dps + 5):
                w = to_mp(coeff) * math.comb(k, j) * (-2 * to_mp(s)) ** j
                put((p, width, ()), w * logext_eval(dj, a, dps + 5))
    return GaussVector._from_dict(d)


def _scale_of(eps, dps: int = 30):
    """sqrt(eps): exact Fraction for rational squares, mpf (at dps + 10 digits) otherwise."""
    e = EpsParam.of(eps)
    if e.is_square():
        return e.sqrt
    with mpmath.workdps(dps + 10):
        return mpmath.sqrt(to_mp(e.eps))


def apply_s(f: GaussVector, eps=1, star: bool = False, dps: int = 30) -> GaussVector:
    """S_eps (even input) or S_eps* (odd input).

    Exact with ("alpha", a) log labels when sqrt(eps) and all widths are exact;
    numeric otherwise.
    """
    s = _scale_of(eps, dps)
    par = f.parity()
    want = "odd" if star else "even"
    if not f.is_zero() and par != want:
        raise DomainError(f"S{'*' if star else ''} needs a {want} vector, got {par}")
    with mpmath.workdps(dps + 10):
        out = GaussVector()
        for (p, z, lb), c in f.terms.items():
            a = _alpha_of(z, s)
            check_alpha(a)
            if is_exact(s) and isinstance(c, QQi) and is_exact(a):
                pref = c * QQi(0, -1 / (2 * Fraction(s)))
            else:
                with mpmath.workdps(dps + 5):
                    pref = to_mp(c) * mpmath.mpc(0, -1) / (2 * to_mp(s))
            v = log_poly_vector(p // 2, a, s, z, pref, p % 2, dps)
            if lb:
                v = GaussVector._from_dict({(q, w, _mul_labels(lb, l2)): cc for (q, w, l2), cc in v.terms.items()})
            out = out + v
    return out


def check_z(z, tube=1e-6):
    from .scalar import cut_distance
    from .errors import BranchCutError, SingularPointError
    zc = complex(z)
    if not zc.imag > 0:
        raise DomainError(f"z={z} is not in the upper half plane")
    if (isinstance(z, QQi) and z == I) or abs(zc - 1j) <= tube:
        raise SingularPointError(f"z={z}: the matrix element diverges at z = i")
    if cut_distance(zc) <= tube:
        raise BranchCutError(f"z={z} lies on the cut {{a i : a >= 1}} (tube {tube})")


def apply_s_hat(f: GaussVector, star: bool = False, dps: int = 30, tube=1e-6) -> GaussVector:
    """Complex-engine S_hat (even) / S_hat* (odd) with log(-C(z)) labels."""
    par = f.parity()
    want = "odd" if star else "even"
    if not f.is_zero() and par != want:
        raise DomainError(f"S_hat{'*' if star else ''} needs a {want} vector, got {par}")
    d = {}
    for (p, z, lb), c in f.terms.items():
        check_z(z, tube)
        phi = s_hat_closed(p // 2, want)
        for p2, v, lab in _closed_image(phi, z, ("z", z), c, p % 2, dps):
            key = (p2, z, _mul_labels(lb, lab))
            d[key] = d[key] + v if key in d else v
    return GaussVector._from_dict(d)


def xpoly_to_vector(phi: XPolyLog, point, width, label, coeff=QQi(1), dps=30) -> GaussVector:
    """phi(point)(x) * xi_width as a labelled GaussVector."""
    width = _norm_width(width)
    d = {}
    for p2, v, lab in _closed_image(phi, point, label, coeff, 0, dps):
        key = (p2, width, lab)
        d[key] = d[key] + v if key in d else v
    return GaussVector._from_dict(d)


__all__ = [
    "XPolyLog", "ParamOperator", "t_power_log", "s_closed", "s_closed_poly", "binomial_log_sum",
    "s_hat_closed", "to_z_engine", "shift_exponential", "qn_apply", "qn_composed", "h_symbolic",
    "s_apply_symbolic", "commutator_assembled", "commutator_symbolic", "k1_form", "k2_form",
    "apply_s", "apply_s_hat", "log_poly_vector", "log_derivative", "check_alpha", "check_z", "xpoly_to_vector", "apply_q",
]
