"""The POVM time operator: Hermite frame, T_G matrix, weights and bounds.

Everything is truncated at a finite order N; each quantity that depends on
N also reports an N -> 2N increment so the truncation can be judged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .errors import DomainError
from .forms import FormValue, t_eps_form
from .gauss import EpsParam, GaussVector, apply_h, norm, pairing, xi
from .hermite import (eigen_constant, eigen_raw, hermite_coefficients, hermite_explicit,
                      hermite_rodrigues)
from .scalar import QQi, to_mp
from .symrep import check_alpha

TWO_PI = 2 * math.pi


# Hermite frame -----------------------------------------------------------------
@dataclass
class HermiteFrame:
    N: int
    eps: Fraction
    vectors: list
    constants: list

    def vector(self, n: int, dps: int = 30) -> GaussVector:
        """Normalized e_n with numeric coefficients."""
        with mpmath.workdps(dps):
            return self.vectors[n] * self.constants[n]

    def coefficients(self, f: GaussVector, dps: int = 30):
        return hermite_coefficients(f, self.N, dps, self.eps)


def hermite_frame(N: int, eps=1, dps: int = 30) -> HermiteFrame:
    """Eigenvectors e_0..e_N of h_eps, checking both Hermite formulas agree."""
    if N < 0:
        raise ValueError("N must be >= 0")
    e = EpsParam.of(eps).eps
    for n in range(N + 1):
        if hermite_explicit(n) != hermite_rodrigues(n):
            raise AssertionError(f"Hermite formulas disagree at n={n}")
    with mpmath.workdps(dps):
        consts = [eigen_constant(n, e) for n in range(N + 1)]
    return HermiteFrame(N, e, [eigen_raw(n, e) for n in range(N + 1)], consts)


# T_G ------------------------------------------------------------------------------
@dataclass
class TgMatrix:
    """Truncated T_G: i/(n-m) off the diagonal, pi on it."""

    N: int

    def entry(self, n: int, m: int):
        """Exact entry; the diagonal is returned as the string 'pi'."""
        if n == m:
            return "pi"
        return QQi(0, Fraction(1, n - m))

    def offdiag(self):
        return [[None if n == m else self.entry(n, m) for m in range(self.N + 1)] for n in range(self.N + 1)]

    def numeric(self) -> np.ndarray:
        idx = np.arange(self.N + 1)
        diff = idx[:, None] - idx[None, :]
        with np.errstate(divide="ignore"):
            K = np.where(diff != 0, 1.0 / np.where(diff != 0, diff, 1), 0.0)
        return np.pi * np.eye(self.N + 1) + 1j * K

    def is_hermitian(self) -> bool:
        for n in range(self.N + 1):
            for m in range(n + 1, self.N + 1):
                if self.entry(n, m).conjugate() != self.entry(m, n):
                    return False
        return True

    def to_text(self) -> str:
        """Dense row-major text: one row per line, entries 're:im' as exact rationals ('pi:0' on the diagonal)."""
        lines = [f"# TgMatrix N={self.N}"]
        for n in range(self.N + 1):
            row = []
            for m in range(self.N + 1):
                v = self.entry(n, m)
                row.append("pi:0" if v == "pi" else f"{v.re}:{v.im}")
            lines.append(" ".join(row))
        return "\n".join(lines) + "\n"


def tg_matrix(N: int) -> TgMatrix:
    if N < 0:
        raise ValueError("N must be >= 0")
    return TgMatrix(N)


def _coeff_vector(f, N, dps):
    """Hermite coefficients (length N+1, numpy complex) of a GaussVector or a coefficient sequence."""
    if isinstance(f, GaussVector):
        return np.array([complex(v) for v in hermite_coefficients(f, N, dps)], dtype=complex)
    arr = np.zeros(N + 1, dtype=complex)
    src = np.asarray(f, dtype=complex)
    arr[: min(N + 1, len(src))] = src[: N + 1]
    return arr


def _tg_value(a, b, N):
    T = tg_matrix(N).numeric()
    return complex(np.vdot(a[: N + 1], T @ b[: N + 1]))


def tg_form(f, g, N: int, dps: int = 30) -> FormValue:
    """t_G[f, g] = sum_nm conj(a_n) T_nm b_m with a, b the Hermite coefficients.

    ``f`` and ``g`` may be GaussVectors or Hermite coefficient sequences. The
    value at order N is reported with |value(2N) - value(N)| as ``increment``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    a = _coeff_vector(f, 2 * N, dps)
    b = _coeff_vector(g, 2 * N, dps)
    v = _tg_value(a, b, N)
    v2 = _tg_value(a, b, 2 * N)
    return FormValue(mpmath.mpc(v), "t_g", {"N": N}, truncation=N, increment=abs(v2 - v))


# POVM weights -------------------------------------------------------------------
def _exp_integral(k: int, r0: Fraction, r1: Fraction):
    """int_{pi r0}^{pi r1} e^{i k t} dt; exact QQi when k r0 and k r1 are integers."""
    x0, x1 = k * r0, k * r1
    if x0.denominator == 1 and x1.denominator == 1:
        return (QQi((-1) ** (x1.numerator % 2)) - QQi((-1) ** (x0.numerator % 2))) / QQi(0, k)
    return (mpmath.expjpi(x1) - mpmath.expjpi(x0)) / mpmath.mpc(0, k)


def _normalize_intervals(intervals, unit):
    if intervals and not isinstance(intervals[0], (tuple, list)):
        intervals = [intervals]
    out = []
    for lo, hi in intervals:
        if unit == "pi":
            lo, hi = Fraction(lo), Fraction(hi)
            if not (0 <= lo <= hi <= 2):
                raise ValueError(f"interval [{lo}pi, {hi}pi] is not inside [0, 2pi]")
        elif unit == "rad":
            lo, hi = float(lo), float(hi)
            if not (0 <= lo <= hi <= TWO_PI + 1e-15):
                raise ValueError(f"interval [{lo}, {hi}] is not inside [0, 2pi]")
        else:
            raise ValueError("unit must be 'pi' or 'rad'")
        out.append((lo, hi))
    return out


def _hermite_supported_exact(f: GaussVector):
    return (f.is_exact() and all(z == QQi(0, 1) and not lb for (_, z, lb) in f.terms))


def povm_weight(intervals, f: GaussVector, N: int, unit: str = "pi", dps: int = 30):
    """(f, P_(N)(A) f) / ||f||^2 for A a finite union of intervals in [0, 2pi].

    Endpoints are multiples of pi when ``unit='pi'`` (exact rationals) or
    radians when ``unit='rad'``. For vectors built on e^{-x^2/2} with exact
    coefficients the result is an exact Fraction whenever every cross term
    integrates to exactly zero (e.g. A = [0, 2pi]); otherwise an mpf.
    """
    if f.is_zero():
        raise DomainError("the POVM weight needs f != 0")
    ivs = _normalize_intervals(list(intervals), unit)
    if _hermite_supported_exact(f) and unit == "pi":
        q = [pairing(eigen_raw(n), f) for n in range(N + 1)]
        qv = [p.parts.get(((), QQi(1)), QQi(0)) for p in q]  # <raw_n, f> = qv * sqrt(pi)
        nsq = pairing(f, f).parts.get(((), QQi(1)), QQi(0)).re  # ||f||^2 / sqrt(pi)
        w = [Fraction(1, 2**n * math.factorial(n)) for n in range(N + 1)]
        exact = Fraction(0)
        numeric = mpmath.mpf(0)
        support = [n for n in range(N + 1) if qv[n]]
        with mpmath.workdps(dps + 5):
            for n in support:
                for lo, hi in ivs:
                    exact += qv[n].abs2() * w[n] * (hi - lo) / 2
            for n in support:
                for m in support:
                    if n == m:
                        continue
                    for lo, hi in ivs:
                        I_k = _exp_integral(n - m, lo, hi)
                        if isinstance(I_k, QQi) and not I_k:
                            continue
                        c = qv[n] * qv[m].conjugate()
                        numeric += mpmath.re(mpmath.mpmathify(c) * mpmath.mpmathify(I_k)
                                             * mpmath.sqrt(to_mp(w[n] * w[m])) / (2 * mpmath.pi))
            if numeric == 0:
                return exact / nsq
            return +((to_mp(exact) + numeric) / to_mp(nsq))
    with mpmath.workdps(dps + 5):
        a = hermite_coefficients(f, N, dps)
        total = mpmath.mpf(0)
        for lo, hi in ivs:
            t0, t1 = (mpmath.pi * mpmath.mpf(lo.numerator) / lo.denominator,
                      mpmath.pi * mpmath.mpf(hi.numerator) / hi.denominator) if unit == "pi" else (lo, hi)
            for n in range(N + 1):
                for m in range(N + 1):
                    k = n - m
                    I_k = (t1 - t0) if k == 0 else (mpmath.expj(k * t1) - mpmath.expj(k * t0)) / mpmath.mpc(0, k)
                    total += mpmath.re(a[n] * mpmath.conj(a[m]) * I_k)
        nf = norm(f, dps + 5) ** 2
        return +(total / (2 * mpmath.pi) / nf)


# commutator and bound -------------------------------------------------------------
@dataclass
class CommutatorReport:
    N: int
    equal: bool
    mismatches: list = field(default_factory=list)
    restriction_ok: bool = True
    commutator: list | None = None


def commutator_check(N: int, keep_matrix: bool = False, restriction_pairs=None) -> CommutatorReport:
    """Exact [h, T_G^(N)] against -i(1 - 2 pi P_0^(N)).

    With h = diag(n + 1/2) the diagonal pi terms commute away, leaving
    (n - m) * i/(n - m) = i off the diagonal and 0 on it; 2 pi P_0 is the
    all-ones matrix, so the right side is i off the diagonal and 0 on it.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    T = tg_matrix(N)
    half = Fraction(1, 2)
    C = []
    mism = []
    for n in range(N + 1):
        row = []
        for m in range(N + 1):
            if n == m:
                c = QQi(0)  # (n+1/2) pi - pi (n+1/2)
            else:
                c = T.entry(n, m) * ((n + half) - (m + half))
            rhs = QQi(0) if n == m else QQi(0, 1)
            if c != rhs:
                mism.append((n, m, c, rhs))
            row.append(c)
        C.append(row)
    pairs = restriction_pairs if restriction_pairs is not None else [
        (n, m) for n in range(min(N, 8) + 1) for m in range(min(N, 8) + 1) if n != m]
    ok = True
    for n, m in pairs:
        col = [C[k][n] - C[k][m] for k in range(N + 1)]
        want = [QQi(0, -1) if k == n else (QQi(0, 1) if k == m else QQi(0)) for k in range(N + 1)]
        ok &= col == want
    return CommutatorReport(N, not mism, mism, ok, C if keep_matrix else None)


@dataclass
class NormEstimate:
    N: int
    value: float
    iterations: int
    second: float | None = None
    eigvalsh_max: float | None = None

    @property
    def within_bound(self) -> bool:
        return self.value <= TWO_PI


def _power_iteration(A, tol, max_iter, rng, deflate=None):
    v = rng.standard_normal(A.shape[0]) + 1j * rng.standard_normal(A.shape[0])
    if deflate is not None:
        v -= deflate * np.vdot(deflate, v)
    v /= np.linalg.norm(v)
    lam = 0.0
    for it in range(1, max_iter + 1):
        w = A @ v
        if deflate is not None:
            w -= deflate * np.vdot(deflate, w)
        lam = float(np.vdot(v, w).real)
        if np.linalg.norm(w - lam * v) <= tol:
            return lam, v, it
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0, v, it
        v = w / nw
    return lam, v, max_iter


def norm_bound_check(N: int, tol: float = 1e-8, deflate: bool = False, seed: int = 0,
                     max_iter: int = 200000) -> NormEstimate:
    """Largest singular value of T_G^(N) by power iteration (T_G is positive definite).

    Iteration stops once the eigen-residual ||T v - lam v|| drops below ``tol``;
    ``eigvalsh_max`` is a dense-solver cross-check.
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    A = tg_matrix(N).numeric()
    if N == 0:
        return NormEstimate(0, math.pi, 0, None, math.pi)
    rng = np.random.default_rng(seed)
    lam, v, it = _power_iteration(A, tol, max_iter, rng)
    second = None
    if deflate:
        second, _, _ = _power_iteration(A, tol, max_iter, rng, deflate=v)
    return NormEstimate(N, lam, it, second, float(np.linalg.eigvalsh(A).max()))


# contrast -----------------------------------------------------------------------
@dataclass
class ContrastRow:
    alpha: object
    t_abs: float
    t_diag_abs: float
    tg_abs: float
    tg_increment: float

    def as_row(self):
        return {"alpha": str(self.alpha), "abs_t": f"{self.t_abs:.12g}",
                "abs_t_diag": f"{self.t_diag_abs:.3g}", "abs_tg": f"{self.tg_abs:.12g}",
                "tg_increment": f"{self.tg_increment:.3e}",
                "t_exceeds_2pi": str(self.t_abs > TWO_PI), "tg_within_2pi": str(self.tg_abs <= TWO_PI)}


def contrast_sweep(k: int, alpha_list, N: int = 100, dps: int = 30) -> list:
    """|t[f, g]| against |t_G[f, g]| for f, g the normalized x^(2k) xi_alpha, x^(2k+2) xi_alpha.

    The diagonal t[f, f] vanishes identically (S maps x^(2k) xi_alpha to i
    times a real vector), so the off-diagonal pair is the witness; the
    diagonal is still reported.
    """
    rows = []
    for a in alpha_list:
        check_alpha(a)
        f = xi(a, 1, power=2 * k)
        g = xi(a, 1, power=2 * k + 2)
        with mpmath.workdps(dps + 5):
            nf, ng = norm(f, dps + 5), norm(g, dps + 5)
            t = t_eps_form(f, g, 1, dps).value / (nf * ng)
            td = t_eps_form(f, f, 1, dps).value / (nf * nf)
        tg = tg_form(f, g, N, dps)
        scale = float(1 / (nf * ng))
        rows.append(ContrastRow(a, float(abs(t)), float(abs(td)), abs(complex(tg.value)) * scale,
                                tg.increment * scale))
    return rows


__all__ = ["HermiteFrame", "hermite_frame", "TgMatrix", "tg_matrix", "tg_form", "povm_weight",
           "CommutatorReport", "commutator_check", "NormEstimate", "norm_bound_check",
           "ContrastRow", "contrast_sweep", "apply_h"]
