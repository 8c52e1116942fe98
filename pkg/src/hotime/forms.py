"""Ultra-weak sesquilinear forms with their matrix elements and CCR residuals.

Every form is computed first as an exact :class:`~hotime.gauss.Pairing`
whenever the inputs allow it (rational widths, sqrt(eps) rational), so
identities such as the CCR residual can be checked as exact zeros before any
rounding happens. Non-square eps falls back to mpmath at the requested
precision.
"""
from __future__ import annotations

import functools
import inspect
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .errors import BranchCutError, DomainError, SingularPointError
from .gauss import (EpsParam, GaussVector, Pairing, _norm_width, apply_h, apply_q2_half,
                    apply_t, apply_t_star, bilinear_pairing, pairing, xi)
from .hermite import eigen_constant, eigen_raw, hermite_explicit
from .scalar import QQi, cut_distance, is_exact, to_mp
from .symrep import (_scale_of, apply_s, apply_s_hat, check_alpha, check_z, log_poly_vector,
                     t_power_log, xpoly_to_vector)

SCHEMA_VERSION = 1


def _precise(fn):
    """Run ``fn`` inside an mpmath context 10 digits above its ``dps`` argument."""
    sig = inspect.signature(fn)

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        bound = sig.bind(*args, **kwargs)
        bound.apply_defaults()
        with mpmath.workdps(bound.arguments["dps"] + 10):
            return fn(*args, **kwargs)
    return wrapper


@dataclass
class FormValue:
    """A form evaluation plus the metadata needed to reproduce it."""

    value: object
    form: str
    params: dict = field(default_factory=dict)
    truncation: int | None = None
    units: str = "plain"
    exact: Pairing | None = None
    increment: float | None = None

    def __complex__(self):
        return complex(self.value)

    def __abs__(self):
        return float(abs(self.value))

    @property
    def sqrt_pi_multiplier(self):
        """value / sqrt(pi)."""
        return self.value / mpmath.sqrt(mpmath.pi)

    def as_row(self, digits=17):
        v = complex(self.value)
        row = {"form": self.form}
        row.update({k: str(p) for k, p in sorted(self.params.items())})
        row.update({
            "re": repr(float(v.real)) if digits >= 17 else f"{v.real:.{digits}g}",
            "im": repr(float(v.imag)) if digits >= 17 else f"{v.imag:.{digits}g}",
            "units": self.units,
            "sqrt_pi_re": f"{float(mpmath.re(self.sqrt_pi_multiplier)):.17g}",
            "sqrt_pi_im": f"{float(mpmath.im(self.sqrt_pi_multiplier)):.17g}",
            "truncation": "" if self.truncation is None else str(self.truncation),
        })
        if self.increment is not None:
            row["increment"] = f"{self.increment:.3e}"
        return row


def _finish(p: Pairing, form, params, dps, truncation=None):
    with mpmath.workdps(dps):
        val = p.evaluate(dps) if not p.is_zero() else mpmath.mpc(0)
    units = "sqrt_pi" if p.is_exact() else "plain"
    return FormValue(val, form, params, truncation, units, p)


# t_eps ------------------------------------------------------------------------
def _scaled(s_vec, perturb):
    if perturb:
        return s_vec * (1 + to_mp(perturb))
    return s_vec


@_precise
def t_eps_pairing(psi: GaussVector, phi: GaussVector, eps=1, dps=30, perturb=None) -> Pairing:
    """Exact-when-possible value of t_eps[psi, phi] as a Pairing."""
    psi0, psi1 = psi.split_parity()
    phi0, phi1 = phi.split_parity()
    half = QQi(Fraction(1, 2))
    total = Pairing()
    for a, b, star in ((psi0, phi0, False), (psi1, phi1, True)):
        if a.is_zero() or b.is_zero():
            continue
        sa = _scaled(apply_s(a, eps, star, dps), perturb)
        sb = _scaled(apply_s(b, eps, star, dps), perturb)
        total = total + (pairing(a, sb) + pairing(sa, b)) * half
    return total


@_precise
def t_eps_form(psi: GaussVector, phi: GaussVector, eps=1, dps=30, perturb=None) -> FormValue:
    """t_eps[psi, phi] = 1/2((psi0, S phi0) + (S psi0, phi0)) + odd part with S*.

    Cross-parity pairs contribute nothing. ``perturb`` multiplies S by
    (1 + perturb); it is a mutation hook for the CCR checker.
    """
    p = t_eps_pairing(psi, phi, eps, dps, perturb)
    return _finish(p, "t_eps", {"eps": EpsParam.of(eps).eps}, dps)


def _alpha_width(a, s):
    """Width i a / s of xi_{a i, eps}."""
    if is_exact(a) and is_exact(s):
        return QQi(0, Fraction(a) / Fraction(s))
    return mpmath.mpc(0, to_mp(a) / to_mp(s))


def _parity_split(a, b):
    if a % 2 != b % 2:
        return None
    if a % 2 == 0:
        return a // 2, b // 2, 0
    return (a - 1) // 2, (b - 1) // 2, 2


@_precise
def k_matrix_element(a: int, b: int, alpha, beta, eps=1, dps=30) -> FormValue:
    """Closed-form t_eps[x^a xi_alpha, x^b xi_beta].

    Even a=2n, b=2m:
        (i/(4s)) (xi_alpha, {x^(2m) t_alpha^n L(alpha) - x^(2n) t_beta^m L(beta)} xi_beta)
    odd a=2n+1, b=2m+1: the same with x^(2m+2) and x^(2n+2); zero otherwise.
    """
    params = {"a": a, "b": b, "alpha": alpha, "beta": beta, "eps": EpsParam.of(eps).eps}
    sp = _parity_split(a, b)
    if sp is None:
        return FormValue(mpmath.mpc(0), "t_eps", params, units="sqrt_pi", exact=Pairing())
    n, m, extra = sp
    for v in (alpha, beta):
        check_alpha(v)
    s = _scale_of(eps, dps)
    wa, wb = _alpha_width(alpha, s), _alpha_width(beta, s)
    g = (log_poly_vector(n, alpha, s, wb, QQi(1), 2 * m + extra, dps)
         - log_poly_vector(m, beta, s, wb, QQi(1), 2 * n + extra, dps))
    pref = QQi(0, 1 / (4 * Fraction(s))) if is_exact(s) else mpmath.mpc(0, 1) / (4 * s)
    p = pairing(GaussVector.monomial(0, wa), g) * pref
    return _finish(p, "t_eps", params, dps)


def _hermite_split(n_total):
    """Coefficients of h_n (even) or k_n (odd) as a power series in x^2."""
    h = hermite_explicit(n_total)
    return [h[2 * k + n_total % 2] for k in range(n_total // 2 + 1)]


def _hermite_poly_vector(n_total, width):
    h = hermite_explicit(n_total)
    return GaussVector._from_dict({(j, width, ()): QQi(c) for j, c in enumerate(h) if c})


def _mul_vector_by_poly(v: GaussVector, coeffs) -> GaussVector:
    d = {}
    for (p, z, lb), c in v.terms.items():
        for j, h in enumerate(coeffs):
            if h:
                key = (p + j, z, lb)
                val = c * QQi(h) if isinstance(c, QQi) else c * h
                d[key] = d[key] + val if key in d else val
    return GaussVector._from_dict(d)


@_precise
def l_matrix_element(a: int, b: int, alpha, beta, eps=1, dps=30) -> FormValue:
    """t_eps[H_a xi_alpha, H_b xi_beta] via the Hermite split H_2n = h_n(x^2), H_2n+1 = k_n(x^2) x.

    Even: (i/(4s)) (xi_alpha, {H_b(x) h_n(t_alpha) L(alpha) - H_a(x) h_m(t_beta) L(beta)} xi_beta);
    odd: the same with k_n, k_m and an extra factor x; zero across parities.
    """
    params = {"a": a, "b": b, "alpha": alpha, "beta": beta, "eps": EpsParam.of(eps).eps}
    if a % 2 != b % 2:
        return FormValue(mpmath.mpc(0), "t_eps", params, units="sqrt_pi", exact=Pairing())
    for v in (alpha, beta):
        check_alpha(v)
    s = _scale_of(eps, dps)
    wa, wb = _alpha_width(alpha, s), _alpha_width(beta, s)
    extra = a % 2

    def rho_t_log(n_total, point):
        out = GaussVector()
        for k, r in enumerate(_hermite_split(n_total)):
            if r:
                out = out + log_poly_vector(k, point, s, wb, QQi(r), extra, dps)
        return out

    ha, hb = hermite_explicit(a), hermite_explicit(b)
    g = _mul_vector_by_poly(rho_t_log(a, alpha), hb) - _mul_vector_by_poly(rho_t_log(b, beta), ha)
    pref = QQi(0, 1 / (4 * Fraction(s))) if is_exact(s) else mpmath.mpc(0, 1) / (4 * s)
    p = pairing(GaussVector.monomial(0, wa), g) * pref
    return _finish(p, "t_eps", params, dps)


def hermite_input(n: int, alpha, eps=1) -> GaussVector:
    """H_n(x) xi_{alpha i, eps}."""
    s = _scale_of(eps)
    return _hermite_poly_vector(n, _norm_width(_alpha_width(alpha, s)))


# t_AB ---------------------------------------------------------------------------
def t_ab_pairing(psi: GaussVector, phi: GaussVector) -> Pairing:
    psi0, psi1 = psi.split_parity()
    phi0, phi1 = phi.split_parity()
    mhalf = QQi(Fraction(-1, 2))
    total = Pairing()
    for a, b, op in ((psi0, phi0, apply_t), (psi1, phi1, apply_t_star)):
        if a.is_zero() or b.is_zero():
            continue
        total = total + (pairing(a, op(b)) + pairing(op(a), b)) * mhalf
    return total


@_precise
def t_ab_form(psi: GaussVector, phi: GaussVector, dps=30) -> FormValue:
    """t_AB[psi, phi] = -1/2((psi0, t phi0) + (t psi0, phi0)) + odd part with t*."""
    return _finish(t_ab_pairing(psi, phi), "t_ab", {}, dps)


# t_hat ---------------------------------------------------------------------------
def _t_hat_pieces(a, b):
    sp = _parity_split(a, b)
    if sp is None:
        return None
    n, m, extra = sp
    qn = t_power_log(n, "z", Fraction(1)).shift(2 * m + extra)
    qm = t_power_log(m, "z", Fraction(1)).shift(2 * n + extra)
    return qn - qm


@_precise
def t_hat_form(a: int, b: int, z, dps=30, tube=1e-6) -> FormValue:
    """Analytic continuation -(i/4) int {(x^(2m) t_z^n - x^(2n) t_z^m) log(-C(z))} e^{i z x^2} dx.

    The pairing is bilinear (no conjugation) so that the result is
    holomorphic in z; odd a, b use x^(2m+2), x^(2n+2).
    """
    params = {"a": a, "b": b, "z": z}
    diff = _t_hat_pieces(a, b)
    check_z(z, tube)
    if diff is None:
        return FormValue(mpmath.mpc(0), "t_hat", params, units="sqrt_pi", exact=Pairing())
    zz = z if isinstance(z, QQi) else (QQi(z) if is_exact(z) else mpmath.mpc(z))
    if isinstance(zz, QQi):
        g = xpoly_to_vector(diff, zz, zz, ("z", zz), dps=dps)
        p = bilinear_pairing(GaussVector.monomial(0, zz), g) * QQi(0, Fraction(-1, 4))
        return _finish(p, "t_hat", params, dps)
    return FormValue(_t_hat_numeric(diff, zz, dps), "t_hat", params)


def _t_hat_numeric(diff, z, dps):
    """Numeric evaluation using the moments int x^(2j) e^{-s x^2} = (2j-1)!!/(2s)^j sqrt(pi/s), s = -iz."""
    with mpmath.workdps(dps + 5):
        z = mpmath.mpc(z)
        s = -1j * z
        root = mpmath.sqrt(mpmath.pi / s)
        acc = mpmath.mpc(0)
        for p, c in diff.evaluate(z, dps + 5).items():
            if p % 2:
                continue
            j = p // 2
            df = 1
            for k in range(1, 2 * j, 2):
                df *= k
            acc += c * df / (2 * s) ** j
        out = acc * root * mpmath.mpc(0, -0.25)
    with mpmath.workdps(dps):
        return +out


def t_hat_integrand(a: int, b: int, z, x, dps=30):
    """Pointwise defining integrand -(i/4) (...)(x) e^{i z x^2}, for quadrature cross-checks."""
    diff = _t_hat_pieces(a, b)
    if diff is None:
        return mpmath.mpc(0)
    with mpmath.workdps(dps):
        z = mpmath.mpc(z)
        x = mpmath.mpf(x)
        poly = sum(c * x**p for p, c in diff.evaluate(z, dps).items())
        return mpmath.mpc(0, -0.25) * poly * mpmath.exp(1j * z * x * x)


@_precise
def t_hat_pairing(psi: GaussVector, phi: GaussVector, dps=30, tube=1e-6) -> Pairing:
    """Sesquilinear hat form 1/2((psi0, S_hat phi0) + (S_hat psi0, phi0)) + odd part."""
    psi0, psi1 = psi.split_parity()
    phi0, phi1 = phi.split_parity()
    half = QQi(Fraction(1, 2))
    total = Pairing()
    for a, b, star in ((psi0, phi0, False), (psi1, phi1, True)):
        if a.is_zero() or b.is_zero():
            continue
        sa = apply_s_hat(a, star, dps, tube)
        sb = apply_s_hat(b, star, dps, tube)
        total = total + (pairing(a, sb) + pairing(sa, b)) * half
    return total


@_precise
def t_hat_sesq(psi: GaussVector, phi: GaussVector, dps=30) -> FormValue:
    return _finish(t_hat_pairing(psi, phi, dps), "t_hat", {}, dps)


# CCR -----------------------------------------------------------------------------
@dataclass
class CcrReport:
    residual: object
    phi: GaussVector
    psi: GaussVector
    form: str
    tolerance: float
    passed: bool
    exact_zero: bool = False
    overlap: object = None

    def as_row(self):
        r = complex(self.residual)
        return {"form": self.form, "residual_re": f"{r.real:.6e}", "residual_im": f"{r.imag:.6e}",
                "abs_residual": f"{abs(r):.6e}", "tolerance": f"{self.tolerance:g}",
                "exact_zero": str(self.exact_zero), "pass": str(self.passed)}


@_precise
def ccr_residual(form: str, phi: GaussVector, psi: GaussVector, eps=1, tolerance=1e-10,
                 dps=30, perturb=None) -> CcrReport:
    """residual = t[H phi, psi] - conj(t[H psi, phi]) + i <phi, psi>.

    H is h_eps for ``t_eps``, q^2/2 for ``t_ab`` and h_1 for ``t_hat``.
    """
    if form == "t_eps":
        def T(u, v):
            return t_eps_pairing(u, v, eps, dps, perturb)

        def H(u):
            return apply_h(u, eps)
    elif form == "t_ab":
        T, H = t_ab_pairing, apply_q2_half
    elif form == "t_hat":
        def T(u, v):
            return t_hat_pairing(u, v, dps)

        def H(u):
            return apply_h(u, 1)
    else:
        raise ValueError(f"unknown form {form!r}")
    ov = pairing(phi, psi)
    res = T(H(phi), psi) - T(H(psi), phi).conjugate() + ov * QQi(0, 1)
    with mpmath.workdps(dps):
        rv = res.evaluate(dps) if not res.is_zero() else mpmath.mpc(0)
        ovv = ov.evaluate(dps) if not ov.is_zero() else mpmath.mpc(0)
    passed = bool(abs(rv) <= tolerance * (1 + abs(ovv)))
    return CcrReport(rv, phi, psi, form, tolerance, passed, res.is_zero(), ovv)


# continuum limit -------------------------------------------------------------------
@dataclass
class ContinuumResult:
    rows: list
    limit: FormValue
    slope: float | None
    intercept: float | None
    fit_eps: list


@_precise
def continuum_sweep(psi: GaussVector, phi: GaussVector, eps_list, dps=30, drop=2) -> ContinuumResult:
    """t_eps over eps_list next to the limit t_AB, with the log-log slope of |t_eps - t_AB| vs eps.

    The ``drop`` largest eps are excluded from the fit: that is where the
    pre-asymptotic transient sits (the difference can even change sign there).
    """
    rows = [t_eps_form(psi, phi, e, dps) for e in eps_list]
    lim = t_ab_form(psi, phi, dps)
    pts = sorted((float(EpsParam.of(e).eps), abs(r.value - lim.value)) for e, r in zip(eps_list, rows))
    pts = pts[: len(pts) - drop] if drop else pts
    pts = [(e, d) for e, d in pts if d > 0]
    slope = intercept = None
    if len(pts) >= 2:
        xs = np.log([e for e, _ in pts])
        ys = np.log([float(d) for _, d in pts])
        slope, intercept = (float(v) for v in np.polyfit(xs, ys, 1))
    return ContinuumResult(rows, lim, slope, intercept, [e for e, _ in pts])


# divergence at alpha = 1 ----------------------------------------------------------
@dataclass
class DivergenceResult:
    m: int
    eps: object
    M_list: list
    values: list
    amplitude: object
    fit_c: float | None = None
    fit_d: float | None = None
    fit_error: float | None = None
    brute: dict = field(default_factory=dict)
    verdict: str = "divergent"
    message: str = ""


def odd_arctan_sum(M: int):
    """sum_{n<=M} 1/(2n+1) = (digamma(M + 3/2) - digamma(1/2)) / 2."""
    return (mpmath.digamma(mpmath.mpf(M) + 1.5) - mpmath.digamma(mpmath.mpf(0.5))) / 2


@_precise
def divergence_probe(m: int, eps=1, M_list=(10**3, 10**4, 10**5, 10**6), odd: bool = False,
                     brute_max: int = 0, dps: int = 30) -> DivergenceResult:
    """Magnitude of <e_2m, sum_{n<=M} (-1)^n/(2n+1) (sqrt(eps) t)^(2n+1) x^(2m) xi_{i,eps}>.

    At alpha = 1 every power of sqrt(eps) t keeps the x^(2m) coefficient at
    modulus 1 and only adds lower powers, which are orthogonal to e_2m, so
    the magnitude equals |<e_2m, x^(2m) xi>| times the odd harmonic sum.
    M values up to ``brute_max`` are also summed term by term in exact
    arithmetic as a cross-check. ``odd=True`` probes x^(2m+1) xi instead,
    which leaves the domain of (sqrt(eps) t)^(m+1) outright.
    """
    e = EpsParam.of(eps)
    M_list = list(M_list)
    if odd:
        f = xi(1, e.eps, power=2 * m + 1)
        s = _scale_of(e.eps)
        for k in range(1, m + 2):
            try:
                f = apply_t(f) * (s if is_exact(s) else to_mp(s))
            except DomainError as exc:
                return DivergenceResult(m, e.eps, M_list, [], None, verdict="domain_failure",
                                        message=f"step {k}: {exc}")
        return DivergenceResult(m, e.eps, M_list, [], None, verdict="undetermined")
    raw = eigen_raw(2 * m, e.eps)
    target = xi(1, e.eps, power=2 * m)
    with mpmath.workdps(dps + 5):
        amp = abs(pairing(raw, target).evaluate(dps + 5)) * eigen_constant(2 * m, e.eps)
        values = [amp * odd_arctan_sum(M) for M in M_list]
    res = DivergenceResult(m, e.eps, M_list, values, amp)
    for M in M_list:
        if M <= brute_max:
            res.brute[M] = _brute_probe(m, e.eps, M, raw, dps) * eigen_constant(2 * m, e.eps)
    usable = [(M, v) for M, v in zip(M_list, values) if M >= 1]
    if len(usable) >= 2:
        L = np.array([0.5 * math.log(M) for M, _ in usable])
        V = np.array([float(v) for _, v in usable])
        c, b = np.polyfit(L, V, 1)
        fit = c * L + b
        res.fit_c, res.fit_d = float(c), float(b / c)
        res.fit_error = float(np.max(np.abs(fit - V) / V))
    return res


def _brute_probe(m, eps, M, raw, dps):
    s = EpsParam.of(eps).sqrt
    u = apply_t(xi(1, eps, power=2 * m)) * s
    total = GaussVector()
    for n in range(M + 1):
        total = total + u * QQi(Fraction((-1) ** n, 2 * n + 1))
        if n < M:
            u = apply_t(apply_t(u) * s) * s
    return abs(pairing(raw, total).evaluate(dps))


# analyticity ---------------------------------------------------------------------
def _segment_ray_distance(p: complex, q: complex) -> float:
    """Distance between segment [p, q] and the cut {iy : y >= 1}."""
    if (p.real <= 0 <= q.real or q.real <= 0 <= p.real) and p.real != q.real:
        t = p.real / (p.real - q.real)
        y = p.imag + t * (q.imag - p.imag)
        if y >= 1:
            return 0.0
    d = min(cut_distance(p), cut_distance(q))
    # distance from the ray start i to the segment
    v = q - p
    L2 = abs(v) ** 2
    t = 0.0 if L2 == 0 else max(0.0, min(1.0, ((1j - p) * v.conjugate()).real / L2))
    return min(d, abs(p + t * v - 1j))


def _point_in_polygon(pt: complex, verts) -> bool:
    inside = False
    n = len(verts)
    for k in range(n):
        a, b = verts[k], verts[(k + 1) % n]
        if (a.imag > pt.imag) != (b.imag > pt.imag):
            x = a.real + (pt.imag - a.imag) * (b.real - a.real) / (b.imag - a.imag)
            if x > pt.real:
                inside = not inside
    return inside


def validate_loop(loop, tube=1e-6):
    verts = [complex(v) for v in loop]
    if len(verts) < 2:
        raise ValueError("a loop needs at least two vertices")
    for k, v in enumerate(verts):
        if not v.imag > tube:
            raise DomainError(f"loop vertex {v} is not inside the upper half plane")
    for k in range(len(verts)):
        p, q = verts[k], verts[(k + 1) % len(verts)]
        if _segment_ray_distance(p, q) <= tube:
            raise BranchCutError(f"loop edge {p} -> {q} touches the cut {{a i : a >= 1}} (tube {tube})")
    if _point_in_polygon(1j, verts):
        raise BranchCutError("the loop encloses z = i and hence the start of the cut")
    return verts


def square_loop(center, side):
    c, h = complex(center), side / 2
    return [c + complex(-h, -h), c + complex(h, -h), c + complex(h, h), c + complex(-h, h)]


@_precise
def analyticity_check(a: int, b: int, loop, quadrature_points: int = 32, tube=1e-6, dps: int = 20):
    """Contour integral of z -> t_hat[f_a, f_b] around a closed polygon (Gauss-Legendre per edge)."""
    verts = validate_loop(loop, tube)
    diff = _t_hat_pieces(a, b)
    if diff is None:
        return mpmath.mpc(0)
    nodes, weights = np.polynomial.legendre.leggauss(quadrature_points)
    total = mpmath.mpc(0)
    with mpmath.workdps(dps):
        for k in range(len(verts)):
            p, q = mpmath.mpc(verts[k]), mpmath.mpc(verts[(k + 1) % len(verts)])
            half = (q - p) / 2
            mid = (q + p) / 2
            for x, w in zip(nodes, weights):
                total += w * half * _t_hat_numeric(diff, mid + half * float(x), dps)
    return total


__all__ = [
    "FormValue", "CcrReport", "ContinuumResult", "DivergenceResult", "t_eps_form", "t_eps_pairing",
    "k_matrix_element", "l_matrix_element", "hermite_input", "t_ab_form", "t_ab_pairing",
    "t_hat_form", "t_hat_integrand", "t_hat_sesq", "t_hat_pairing", "ccr_residual",
    "continuum_sweep", "odd_arctan_sum", "divergence_probe", "validate_loop", "square_loop",
    "analyticity_check", "SingularPointError",
]
