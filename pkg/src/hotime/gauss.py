"""Finite sums of ``x**n * exp(i*z*x**2/2)`` (Im z > 0) and the operators
p, q^-1, t = q^-1 p, t* = p q^-1 and h_eps = (eps p^2 + q^2)/2 acting on them.

Everything is in the momentum representation, so p = -i d/dx and q is
multiplication by x.

A term may carry a *label*: a formal scalar factor such as log((1+a)/(1-a))
at a fixed a, or log(-C(z)) at a fixed z. Labels let the images of the angle
operator stay exact; they are resolved into numbers only on evaluation.
The inner product is conjugate-linear in the first slot.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import mpmath

from .errors import DomainError
from .scalar import QQi, is_exact, log_symbol, to_mp

# label helpers -------------------------------------------------------------
# ("alpha", a)  : log((1+a)/(1-a)), real, self-conjugate
# ("z", z)      : log(-C(z))
# ("z*", z)     : conj(log(-C(z)))


def conj_label(label):
    kind, p = label
    if kind == "alpha":
        return label
    return ("z*" if kind == "z" else "z", p)


def label_value(label, tube=None):
    kind, p = label
    if kind == "alpha":
        return log_symbol("alpha", p)
    v = log_symbol("z", p) if tube is None else log_symbol("z", p, tube)
    return mpmath.conj(v) if kind == "z*" else v


def _label_key(label):
    kind, p = label
    if isinstance(p, QQi):
        return (kind, p.re, p.im)
    if isinstance(p, Fraction):
        return (kind, p, Fraction(0))
    c = complex(p)
    return (kind, c.real, c.imag)


def _sorted_labels(labels):
    return tuple(sorted(labels, key=_label_key))


def _mul_labels(a, b):
    return _sorted_labels(a + b)


# epsilon -------------------------------------------------------------------
@dataclass(frozen=True)
class EpsParam:
    """Oscillator parameter 0 < eps <= 1 in h_eps = (eps p^2 + q^2)/2."""

    eps: Fraction

    def __post_init__(self):
        e = Fraction(self.eps) if not isinstance(self.eps, Fraction) else self.eps
        object.__setattr__(self, "eps", e)
        if not (0 < e <= 1):
            raise DomainError(f"eps must lie in (0, 1], got {e}")

    @classmethod
    def of(cls, v):
        if isinstance(v, EpsParam):
            return v
        if isinstance(v, float):
            v = Fraction(v).limit_denominator(10**12)
        return cls(Fraction(v))

    @property
    def sqrt(self) -> Fraction:
        """Exact sqrt(eps); only defined when eps is the square of a rational."""
        n, d = self.eps.numerator, self.eps.denominator
        rn, rd = math.isqrt(n), math.isqrt(d)
        if rn * rn != n or rd * rd != d:
            raise DomainError(
                f"eps={self.eps} is not a rational square; exact mode needs sqrt(eps) rational"
            )
        return Fraction(rn, rd)

    def is_square(self):
        try:
            self.sqrt
        except DomainError:
            return False
        return True


# vectors -------------------------------------------------------------------
@dataclass(frozen=True)
class GaussTerm:
    coeff: object
    power: int
    width: object
    labels: tuple = ()

    def __post_init__(self):
        if self.power < 0:
            raise DomainError("negative power")
        w = self.width
        im = w.im if isinstance(w, QQi) else mpmath.mpmathify(w).imag
        if not im > 0:
            raise DomainError(f"width z={w} must satisfy Im z > 0 (square integrability)")


def _norm_width(z):
    if isinstance(z, QQi):
        return z
    if is_exact(z):
        return QQi(z)
    if isinstance(z, complex) and z.real.is_integer() and z.imag.is_integer():
        return QQi(int(z.real), int(z.imag))
    return z if isinstance(z, mpmath.mpc) else mpmath.mpc(z)


def _is_zero(c):
    return (not c) if isinstance(c, QQi) else c == 0


class GaussVector:
    """Normal-form finite linear combination of labelled Gaussian monomials.

    Keys are ``(power, width, labels)``; equal keys are merged and zero
    coefficients dropped, so the empty vector is zero and ``==`` is exact.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[GaussTerm] = ()):
        d = {}
        for t in terms:
            GaussTerm(t.coeff, t.power, t.width, t.labels)  # validation
            key = (t.power, _norm_width(t.width), _sorted_labels(t.labels))
            c = _norm_coeff(t.coeff)
            d[key] = d[key] + c if key in d else c
        self.terms = {k: v for k, v in d.items() if not _is_zero(v)}

    @classmethod
    def _from_dict(cls, d):
        v = cls.__new__(cls)
        v.terms = {k: c for k, c in d.items() if not _is_zero(c)}
        return v

    @classmethod
    def monomial(cls, power, z, coeff=1, labels=()):
        return cls([GaussTerm(coeff, power, _norm_width(z), tuple(labels))])

    # arithmetic ------------------------------------------------------------
    def __add__(self, o):
        d = dict(self.terms)
        for k, c in o.terms.items():
            d[k] = d[k] + c if k in d else c
        return GaussVector._from_dict(d)

    def __neg__(self):
        return GaussVector._from_dict({k: -c for k, c in self.terms.items()})

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, s):
        s = _norm_coeff(s)
        return GaussVector._from_dict({k: c * s for k, c in self.terms.items()})

    __rmul__ = __mul__

    def with_label(self, label):
        return GaussVector._from_dict(
            {(p, z, _mul_labels(lb, (label,))): c for (p, z, lb), c in self.terms.items()}
        )

    def __eq__(self, o):
        return isinstance(o, GaussVector) and self.terms == o.terms

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        for (p, z, lb), c in sorted(self.terms.items(), key=_term_sort_key):
            yield GaussTerm(c, p, z, lb)

    def is_zero(self):
        return not self.terms

    def is_exact(self):
        return all(isinstance(c, QQi) and isinstance(z, QQi) for (p, z, _), c in self.terms.items())

    def parity(self):
        ps = {p % 2 for (p, _, _) in self.terms}
        if not ps or ps == {0}:
            return "even"
        if ps == {1}:
            return "odd"
        return "mixed"

    def split_parity(self):
        even = {k: c for k, c in self.terms.items() if k[0] % 2 == 0}
        odd = {k: c for k, c in self.terms.items() if k[0] % 2 == 1}
        return GaussVector._from_dict(even), GaussVector._from_dict(odd)

    def widths(self):
        return {z for (_, z, _) in self.terms}

    def numeric(self, dps=30):
        """Resolve labels and convert every coefficient to mpmath."""
        with mpmath.workdps(dps):
            d = {}
            for (p, z, lb), c in self.terms.items():
                v = to_mp(c)
                for label in lb:
                    v = v * label_value(label)
                key = (p, to_mp(z) if not isinstance(z, QQi) else z, ())
                d[key] = d[key] + v if key in d else v
        return GaussVector._from_dict(d)

    def __call__(self, x):
        """Pointwise value at real x (labels resolved)."""
        x = mpmath.mpf(x)
        acc = mpmath.mpc(0)
        for t in self:
            v = to_mp(t.coeff)
            for label in t.labels:
                v *= label_value(label)
            acc += v * x**t.power * mpmath.exp(1j * to_mp(t.width) * x**2 / 2)
        return acc

    def __repr__(self):
        parts = []
        for t in self:
            lb = "".join(f"*L{lab}" for lab in t.labels)
            parts.append(f"{t.coeff}*x^{t.power}*xi[{t.width}]{lb}")
        return "GaussVector(" + " + ".join(parts) + ")" if parts else "GaussVector(0)"


def _term_sort_key(item):
    (p, z, lb), _ = item
    zc = (z.re, z.im) if isinstance(z, QQi) else (float(z.real), float(z.imag))
    return (p, tuple(float(v) for v in zc), tuple(str(_label_key(x)) for x in lb))


def _norm_coeff(c):
    if isinstance(c, QQi):
        return c
    if is_exact(c):
        return QQi(c)
    if isinstance(c, complex) and c.real.is_integer() and c.imag.is_integer():
        return QQi(int(c.real), int(c.imag))
    return mpmath.mpmathify(c)


def xi(alpha, eps=1, power=0, coeff=1, dps=40):
    """``coeff * x**power * exp(-alpha x^2 / (2 sqrt(eps)))`` i.e. width z = i alpha/sqrt(eps)."""
    e = EpsParam.of(eps)
    a = Fraction(alpha) if is_exact(alpha) else alpha
    if is_exact(a) and e.is_square():
        z = QQi(0, a / e.sqrt)
    else:
        with mpmath.workdps(dps):
            z = mpmath.mpc(0, to_mp(a) / mpmath.sqrt(to_mp(e.eps)))
    return GaussVector.monomial(power, z, coeff)


# pairings ------------------------------------------------------------------
def double_factorial_odd(n):
    """(2n-1)!! with (-1)!! = 1."""
    out = 1
    for k in range(1, 2 * n, 2):
        out *= k
    return out


class Pairing:
    """Exact value of a Gaussian integral: sum of c * labels * sqrt(pi/s).

    Keys are ``(labels, s)``; ``s`` is the Gaussian exponent with Re s > 0.
    """

    __slots__ = ("parts",)

    def __init__(self, parts=None):
        self.parts = {k: v for k, v in (parts or {}).items() if not _is_zero(v)}

    def __add__(self, o):
        d = dict(self.parts)
        for k, v in o.parts.items():
            d[k] = d[k] + v if k in d else v
        return Pairing(d)

    def __neg__(self):
        return Pairing({k: -v for k, v in self.parts.items()})

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, s):
        s = _norm_coeff(s)
        return Pairing({k: v * s for k, v in self.parts.items()})

    __rmul__ = __mul__

    def conjugate(self):
        d = {}
        for (lb, s), v in self.parts.items():
            key = (_sorted_labels(tuple(conj_label(x) for x in lb)), _conj(s))
            cv = _conj(v)
            d[key] = d[key] + cv if key in d else cv
        return Pairing(d)

    def is_zero(self):
        return not self.parts

    def is_exact(self):
        return all(isinstance(v, QQi) and isinstance(s, QQi) for (_, s), v in self.parts.items())

    def evaluate(self, dps=30):
        with mpmath.workdps(dps + 5):
            acc = mpmath.mpc(0)
            for (lb, s), v in self.parts.items():
                term = to_mp(v) * mpmath.sqrt(mpmath.pi / to_mp(s))
                for label in lb:
                    term *= label_value(label)
                acc += term
        with mpmath.workdps(dps):
            return +acc

    def sqrt_pi_units(self, dps=30):
        """Value divided by sqrt(pi)."""
        with mpmath.workdps(dps + 5):
            v = self.evaluate(dps + 5) / mpmath.sqrt(mpmath.pi)
        with mpmath.workdps(dps):
            return +v

    def __complex__(self):
        return complex(self.evaluate(20))

    def __eq__(self, o):
        return isinstance(o, Pairing) and self.parts == o.parts

    def __repr__(self):
        return f"Pairing({self.parts!r})"


def _conj(v):
    if isinstance(v, QQi):
        return v.conjugate()
    return mpmath.conj(v)


def _moment_factor(n_total, s):
    """int x^n e^{-s x^2} dx / sqrt(pi/s) for even n; 0 for odd n."""
    if n_total % 2:
        return None
    n = n_total // 2
    df = double_factorial_odd(n)
    if isinstance(s, QQi):
        return QQi(df) / ((2 * s) ** n) if n else QQi(1)
    return df / (2 * s) ** n


def _pair(f, g, conj_first):
    d = {}
    half_i = QQi(0, Fraction(1, 2))
    for (pf, zf, lf), cf in f.terms.items():
        if conj_first:
            zf_, cf_, lf_ = -_conj(zf), _conj(cf), tuple(conj_label(x) for x in lf)
        else:
            zf_, cf_, lf_ = zf, cf, lf
        for (pg, zg, lg), cg in g.terms.items():
            if (pf + pg) % 2:
                continue
            # conj(xi_zf) = xi_{-conj zf}; exp(i zf_ x^2/2) exp(i zg x^2/2) = exp(-s x^2), s = -i(zf_+zg)/2
            zsum = zf_ + zg
            if isinstance(zsum, QQi):
                s = -(half_i * zsum)
            else:
                s = -0.5j * to_mp(zsum)
                if abs(s.imag) == 0:
                    s = mpmath.mpc(s.real, 0)
            mf = _moment_factor(pf + pg, s)
            key = (_mul_labels(lf_, lg), s)
            v = cf_ * cg * mf
            d[key] = d[key] + v if key in d else v
    return Pairing(d)


def pairing(f: GaussVector, g: GaussVector) -> Pairing:
    """Exact <f, g>, conjugate-linear in f."""
    return _pair(f, g, conj_first=True)


def bilinear_pairing(f: GaussVector, g: GaussVector) -> Pairing:
    """Exact integral of f*g without conjugation (holomorphic in the widths)."""
    return _pair(f, g, conj_first=False)


def inner_product(f: GaussVector, g: GaussVector, precision: int = 16):
    """Numeric <f, g> as an mpmath complex at ``precision`` digits."""
    return pairing(f, g).evaluate(precision)


def norm(f: GaussVector, precision: int = 20):
    with mpmath.workdps(precision + 5):
        v = mpmath.sqrt(abs(pairing(f, f).evaluate(precision + 5).real))
    return v


# operators -----------------------------------------------------------------
def _map_terms(f, fn):
    d = {}
    for (p, z, lb), c in f.terms.items():
        for p2, c2 in fn(p, z, c):
            key = (p2, z, lb)
            d[key] = d[key] + c2 if key in d else c2
    return GaussVector._from_dict(d)


def _mi(c):
    """-i * c, exact when possible."""
    return c * QQi(0, -1) if isinstance(c, QQi) else c * (-1j)


def apply_p(f):
    """p x^n xi_z = -i n x^(n-1) xi_z + z x^(n+1) xi_z."""
    def fn(p, z, c):
        out = [(p + 1, c * z)]
        if p:
            out.append((p - 1, _mi(c) * p))
        return out
    return _map_terms(f, fn)


def apply_q(f):
    return _map_terms(f, lambda p, z, c: [(p + 1, c)])


def apply_q_inv(f):
    for (p, _, _) in f.terms:
        if p == 0:
            raise DomainError("q^-1 is undefined on a power-0 term (no formal x^-1)")
    return _map_terms(f, lambda p, z, c: [(p - 1, c)])


def apply_t(f: GaussVector) -> GaussVector:
    """t = q^-1 p: t x^n xi_z = -i n x^(n-2) xi_z + z x^n xi_z (n != 1)."""
    for (p, _, _) in f.terms:
        if p == 1:
            raise DomainError(
                "t is undefined on x*xi: p(x xi) has a power-0 part that q^-1 cannot absorb "
                "(D(t^n) meets the odd Gaussian space only in 0)"
            )

    def fn(p, z, c):
        out = [(p, c * z)]
        if p >= 2:
            out.append((p - 2, _mi(c) * p))
        return out
    return _map_terms(f, fn)


def apply_t_star(f: GaussVector) -> GaussVector:
    """t* = p q^-1: t* x^n xi_z = -i (n-1) x^(n-2) xi_z + z x^n xi_z (n >= 1)."""
    for (p, _, _) in f.terms:
        if p == 0:
            raise DomainError("t* = p q^-1 is undefined on power-0 terms")

    def fn(p, z, c):
        out = [(p, c * z)]
        if p >= 2:
            out.append((p - 2, _mi(c) * (p - 1)))
        return out
    return _map_terms(f, fn)


def apply_h(f: GaussVector, eps=1) -> GaussVector:
    """h_eps = (eps p^2 + q^2)/2 on each term:

    h x^n xi_z = 1/2 ((1 + eps z^2) x^(n+2) - i eps z (2n+1) x^n - eps n(n-1) x^(n-2)) xi_z
    """
    e = EpsParam.of(eps).eps
    half = Fraction(1, 2)

    def fn(p, z, c):
        if isinstance(z, QQi) and isinstance(c, QQi):
            out = [(p + 2, c * (1 + e * z * z) * half),
                   (p, c * z * QQi(0, -e * (2 * p + 1) * half))]
            if p >= 2:
                out.append((p - 2, c * (-e * p * (p - 1) * half)))
            return out
        zz, cc, ee = to_mp(z), to_mp(c), to_mp(e)
        out = [(p + 2, cc * (1 + ee * zz * zz) / 2), (p, cc * zz * (-1j) * ee * (2 * p + 1) / 2)]
        if p >= 2:
            out.append((p - 2, -cc * ee * p * (p - 1) / 2))
        return out
    return _map_terms(f, fn)


def apply_q2_half(f: GaussVector) -> GaussVector:
    """q^2/2, the free Hamiltonian in the momentum representation."""
    return _map_terms(f, lambda p, z, c: [(p + 2, c * Fraction(1, 2) if isinstance(c, QQi) else c / 2)])


def power_t_closed(n: int, m: int, alpha, eps=1) -> dict:
    """Coefficient table of (sqrt(eps) t)^n x^(2m) xi_{alpha i, eps}.

    Returns ``{power: coeff}`` with
    coeff(x^(2m-2k)) = C(n,k) C(m,k) k! 2^k (alpha i)^(n-k) (-i sqrt(eps))^k.
    """
    s = EpsParam.of(eps).sqrt
    ai = QQi(0, Fraction(alpha))
    mis = QQi(0, -s)
    out = {}
    for k in range(0, min(n, m) + 1):
        c = math.comb(n, k) * math.comb(m, k) * math.factorial(k) * 2**k
        v = (ai ** (n - k)) * (mis**k) * c
        if v:
            out[2 * m - 2 * k] = v
    return out


# arctan series -------------------------------------------------------------
@dataclass
class SeriesResult:
    value: GaussVector
    increment_norms: list = field(default_factory=list)
    verdict: str = "converged"  # converged | undetermined | divergent
    raabe: float | None = None
    tail_ratio: float | None = None


def classify_increments(norms, window=10, raabe_threshold=1.5, tol=1e-12):
    """Convergence verdict from the increment norms of a partial-sum run.

    divergent   : norms fail to decrease over ``window`` consecutive terms, or
                  Raabe's statistic n(1 - r_n) at the tail stays <= threshold
                  (power-law decay no faster than ~ n^-1.5, e.g. harmonic).
    converged   : tail increment is negligible relative to the leading one.
    undetermined: neither.
    Returns (verdict, raabe, tail_ratio).
    """
    ns = [mpmath.mpf(v) for v in norms]  # mpf: tail norms can sit far below float range
    if len(ns) < 2:
        return "undetermined", None, None
    nondec = 0
    for a, b in zip(ns, ns[1:]):
        nondec = nondec + 1 if b >= a and a > 0 else 0
        if nondec >= window:
            return "divergent", None, None
    a, b = ns[-2], ns[-1]
    if a == 0:
        return "converged", None, 0.0
    r = b / a
    n = len(ns) - 1
    raabe = float(n * (1 - r))
    if b <= tol * ns[0]:
        return "converged", raabe, float(r)
    if raabe <= raabe_threshold:
        return "divergent", raabe, float(r)
    return "undetermined", raabe, float(r)


def arctan_partial_sum(f: GaussVector, eps, M: int, star: bool = False, track: bool = True,
                       precision: int = 20) -> SeriesResult:
    """-(1/sqrt eps) * sum_{n<=M} (-1)^n/(2n+1) (sqrt(eps) t#)^(2n+1) f, exactly.

    ``star`` selects t* (odd vectors) instead of t (even vectors).
    Increment norms are reported as the convergence indicator.
    """
    e = EpsParam.of(eps)
    s = e.sqrt
    op = apply_t_star if star else apply_t
    want = "odd" if star else "even"
    par = f.parity()
    if not f.is_zero() and par != want:
        raise DomainError(f"arctan(sqrt(eps) t{'*' if star else ''}) needs a {want} vector, got {par}")
    u = op(f) * s  # (sqrt eps t#)^1 f
    total = GaussVector()
    norms = []
    neg_inv_s = QQi(-1 / s)
    for n in range(M + 1):
        inc = u * (neg_inv_s * QQi(Fraction((-1) ** n, 2 * n + 1)))
        total = total + inc
        if track:
            norms.append(norm(inc, precision))
        if n < M:
            u = op(op(u) * s) * s
    verdict, raabe, ratio = classify_increments(norms) if track else ("undetermined", None, None)
    return SeriesResult(total, norms, verdict, raabe, ratio)


# serialization -------------------------------------------------------------
def _fmt(v):
    if isinstance(v, Fraction):
        return str(v)
    return mpmath.nstr(v, 40, strip_zeros=False) if not isinstance(v, (int,)) else str(v)


def _parse(tok):
    if "." in tok or "e" in tok.lower():
        return mpmath.mpf(tok)
    return Fraction(tok)


def _parts(v):
    if isinstance(v, QQi):
        return v.re, v.im
    v = mpmath.mpmathify(v)
    return (v.real, v.imag) if isinstance(v, mpmath.mpc) else (v, mpmath.mpf(0))


def _join(re, im):
    if isinstance(re, Fraction) and isinstance(im, Fraction):
        return QQi(re, im)
    return mpmath.mpc(re, im)


def to_text(f: GaussVector) -> str:
    """One term per line: ``coeff_re coeff_im power z_re z_im``."""
    lines = []
    for t in f:
        if t.labels:
            raise ValueError("labelled vectors have no text serialization; resolve labels first")
        cr, ci = _parts(t.coeff)
        zr, zi = _parts(t.width)
        lines.append(" ".join([_fmt(cr), _fmt(ci), str(t.power), _fmt(zr), _fmt(zi)]))
    return "\n".join(lines) + ("\n" if lines else "")


def from_text(text: str) -> GaussVector:
    terms = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cr, ci, p, zr, zi = line.split()
        terms.append(GaussTerm(_join(_parse(cr), _parse(ci)), int(p), _join(_parse(zr), _parse(zi))))
    return GaussVector(terms)


def to_json(f: GaussVector) -> str:
    rows = []
    for t in f:
        if t.labels:
            raise ValueError("labelled vectors have no JSON serialization; resolve labels first")
        cr, ci = _parts(t.coeff)
        zr, zi = _parts(t.width)
        rows.append({"coeff": [_fmt(cr), _fmt(ci)], "power": t.power, "z": [_fmt(zr), _fmt(zi)]})
    return json.dumps({"terms": rows}, sort_keys=True)


def from_json(text: str) -> GaussVector:
    data = json.loads(text)
    return GaussVector(
        GaussTerm(_join(_parse(r["coeff"][0]), _parse(r["coeff"][1])), int(r["power"]),
                  _join(_parse(r["z"][0]), _parse(r["z"][1])))
        for r in data["terms"]
    )
