"""Acceptance suite: one verdict line per criterion.

Each ``criterion_N`` returns a :class:`CriterionResult`; the detail strings
contain no timings so that two runs with the same seed are byte-identical.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .errors import SingularPointError
from .forms import (analyticity_check, ccr_residual, continuum_sweep, divergence_probe,
                    k_matrix_element, square_loop, t_eps_form, t_hat_form)
from .gauss import GaussVector, apply_t, arctan_partial_sum, xi
from .hermite import eigen_raw
from .povm import (TWO_PI, commutator_check, contrast_sweep, norm_bound_check, povm_weight,
                   tg_form)
from .scalar import LogExt, QQi, RatFunc, Poly
from .symrep import XPolyLog, apply_s, commutator_symbolic, qn_apply, qn_composed

TENTHS = [Fraction(k, 10) for k in range(1, 10)]


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str

    def line(self):
        return f"criterion {self.number:2d} [{'PASS' if self.passed else 'FAIL'}] {self.title}: {self.detail}"


def criterion_1(seed=0):
    """Eigen-relations of sqrt(eps) t and S_eps on xi, exact."""
    bad = []
    count = 0
    for e in (Fraction(1), Fraction(1, 4)):
        s = Fraction(math.isqrt(e.numerator), math.isqrt(e.denominator))
        for a in TENTHS:
            f = xi(a, e)
            z = next(iter(f.terms))[1]
            if apply_t(f) * s != f * QQi(0, a):
                bad.append(("t", a, e))
            want = GaussVector.monomial(0, z, QQi(0, -1 / (2 * s)), labels=(("alpha", a),))
            if apply_s(f, e) != want:
                bad.append(("S", a, e))
            count += 2
    return CriterionResult(1, "eigen-relations", not bad,
                           f"{count} exact identities checked, {len(bad)} failures")


def criterion_2(seed=0, M=400):
    """Series against closed form at M = 400 for m <= 4, alpha <= 3/4."""
    worst = 0.0
    worst_ratio = 0.0
    for e in (Fraction(1), Fraction(1, 4)):
        for a in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
            for m in range(5):
                f = xi(a, e, power=2 * m)
                res = arctan_partial_sum(f, e, M)
                closed = apply_s(f, e).numeric(40)
                series = res.value.numeric(40)
                diff = max(abs(series.terms.get(k, 0) - closed.terms.get(k, 0))
                           for k in set(series.terms) | set(closed.terms))
                scale = max(abs(v) for v in closed.terms.values())
                worst = max(worst, float(diff / scale))
                worst_ratio = max(worst_ratio, abs(res.tail_ratio / float(a * a) - 1))
    ok = worst <= 1e-8 and worst_ratio <= 0.02
    return CriterionResult(2, "series vs closed form", ok,
                           f"max relative coefficient gap {worst:.2e} (<= 1e-8), "
                           f"max |tail ratio / alpha^2 - 1| = {worst_ratio:.4f} (<= 0.02)")


def _ccr_grid_eps(eps, tol):
    worst, n, fails = 0.0, 0, 0
    for a in TENTHS:
        for b in TENTHS:
            for pa in range(7):
                for pb in range(pa % 2, 7, 2):
                    r = ccr_residual("t_eps", xi(a, eps, power=pa), xi(b, eps, power=pb), eps, tol)
                    rel = float(abs(r.residual) / (1 + abs(r.overlap)))
                    worst = max(worst, rel)
                    fails += not r.passed
                    n += 1
    return worst, n, fails


def criterion_3(seed=0, tol=1e-10):
    """Ultra-weak CCR residuals for every form on its documented grid."""
    parts = []
    total_fail = 0
    for e in (Fraction(1), Fraction(1, 4), Fraction(1, 100)):
        w, n, f = _ccr_grid_eps(e, tol)
        total_fail += f
        parts.append(f"t_eps eps={e}: {n} pairs, worst {w:.1e}")
    worst, n = 0.0, 0
    for a in TENTHS:
        for b in TENTHS:
            for pa in range(5):
                for pb in range(pa % 2, 5, 2):
                    r = ccr_residual("t_ab", xi(a, 1, power=pa), xi(b, 1, power=pb), 1, tol)
                    total_fail += not r.passed
                    worst = max(worst, float(abs(r.residual) / (1 + abs(r.overlap))))
                    n += 1
    parts.append(f"t_ab: {n} pairs, worst {worst:.1e}")
    zs = [QQi(Fraction(1, 5), Fraction(2, 5)), QQi(Fraction(-3, 10), Fraction(4, 5)), QQi(0, Fraction(1, 2))]
    worst, n = 0.0, 0
    for z1 in zs:
        for z2 in zs:
            for pa in range(5):
                for pb in range(pa % 2, 5, 2):
                    r = ccr_residual("t_hat", GaussVector.monomial(pa, z1), GaussVector.monomial(pb, z2), 1, tol)
                    total_fail += not r.passed
                    worst = max(worst, float(abs(r.residual) / (1 + abs(r.overlap))))
                    n += 1
    parts.append(f"t_hat: {n} pairs, worst {worst:.1e}")
    return CriterionResult(3, "ultra-weak CCR", total_fail == 0,
                           "; ".join(parts) + f"; failures {total_fail}")


def criterion_4(seed=0):
    """Symbolic commutators and the Q_n identity."""
    bad = []
    for n in range(5):
        for par in ("even", "odd"):
            p = 2 * n + (par == "odd")
            want = XPolyLog({p: LogExt(QQi(0, -1), 0, "z")}, "z", 1)
            if commutator_symbolic(n, par) != want:
                bad.append(("comm", n, par))
    inputs = [LogExt.log("z"), LogExt(1, 0, "z"),
              LogExt(RatFunc(Poly([1]), Poly([1, 0, 1])), 0, "z")]
    for n in range(7):
        for e in inputs:
            if qn_apply(n, e) != qn_composed(n, e):
                bad.append(("Q", n))
    return CriterionResult(4, "symbolic commutator identities", not bad,
                           f"10 commutators and 21 Q_n identities, {len(bad)} mismatches")


def criterion_5(seed=0):
    """Harmonic-sum divergence at alpha = 1."""
    Ms = [10**3, 10**4, 10**5, 10**6]
    worst = 0.0
    brute_gap = 0.0
    for e in (Fraction(1), Fraction(1, 4)):
        for m in range(3):
            r = divergence_probe(m, e, Ms)
            worst = max(worst, r.fit_error)
            small = divergence_probe(m, e, [0, 1, 10, 30], brute_max=30)
            for M, v in zip(small.M_list, small.values):
                brute_gap = max(brute_gap, float(abs(small.brute[M] - v) / v))
    odd = divergence_probe(1, 1, odd=True)
    ok = worst <= 0.05 and brute_gap <= 1e-20 and odd.verdict == "domain_failure"
    return CriterionResult(5, "divergence at alpha = 1", ok,
                           f"max relative fit error {worst:.2e} (<= 5%), exact partial sums vs "
                           f"harmonic closed form {brute_gap:.1e}, odd input: {odd.verdict}")


def random_m_pairs(rng: random.Random, count: int, max_power: int = 4):
    """Random same-parity monomial pairs x^a xi_alpha, x^b xi_beta with nonzero t_AB."""
    out = []
    while len(out) < count:
        a, b = rng.choice(TENTHS), rng.choice(TENTHS)
        pa = rng.randint(0, max_power)
        pb = rng.choice([p for p in range(max_power + 1) if p % 2 == pa % 2])
        if (a, pa) == (b, pb):
            continue
        out.append((xi(a, 1, power=pa), xi(b, 1, power=pb), (a, pa, b, pb)))
    return out


CONTINUUM_EPS = [Fraction(1, 2**k) for k in range(2, 11)]


def criterion_6(seed=0):
    """Continuum limit slope and endpoint consistency."""
    rng = random.Random(seed)
    slopes = []
    endpoint_ok = True
    for psi, phi, _ in random_m_pairs(rng, 10):
        r = continuum_sweep(psi, phi, CONTINUUM_EPS)
        slopes.append(r.slope)
        end = continuum_sweep(psi, phi, [1])
        endpoint_ok &= end.rows[0].exact == t_eps_form(psi, phi, 1).exact
    ok = all(s is not None and 0.9 <= s <= 1.1 for s in slopes) and endpoint_ok
    txt = ", ".join("none" if s is None else f"{s:.3f}" for s in slopes)
    return CriterionResult(6, "continuum limit", ok,
                           f"slopes [{txt}] (need [0.9, 1.1]); eps = 1 endpoint exact: {endpoint_ok}")


def criterion_7(seed=0):
    """Analytic continuation: restriction, contour integrals, singular point."""
    worst = 0.0
    for al in (Fraction(1, 5), Fraction(1, 2), Fraction(4, 5)):
        for a in range(5):
            for b in range(a % 2, 5, 2):
                d = abs(t_hat_form(a, b, QQi(0, al)).value - k_matrix_element(a, b, al, al, 1).value)
                worst = max(worst, float(d))
    loops = [square_loop(0.5 + 0.5j, 0.2), square_loop(-0.4 + 1.5j, 0.3), square_loop(0.5j, 0.4)]
    cont = 0.0
    for lp in loops:
        for a, b in ((0, 0), (2, 0), (4, 2), (3, 1)):
            cont = max(cont, float(abs(analyticity_check(a, b, lp))))
    try:
        t_hat_form(0, 0, QQi(0, 1))
        singular = False
    except SingularPointError:
        singular = True
    ok = worst <= 1e-10 and cont <= 1e-8 and singular
    return CriterionResult(7, "analytic continuation", ok,
                           f"restriction gap {worst:.1e} (<= 1e-10), max loop integral {cont:.1e} "
                           f"(<= 1e-8), z = i raises singular-point error: {singular}")


def _random_hermite_vector(rng, support):
    f = GaussVector()
    for n in range(support + 1):
        c = QQi(Fraction(rng.randint(-9, 9), rng.randint(1, 9)), Fraction(rng.randint(-9, 9), rng.randint(1, 9)))
        f = f + eigen_raw(n) * c
    return f


def criterion_8(seed=0):
    """POVM identities and bounds."""
    comm_ok = all(commutator_check(N).equal for N in (1, 2, 5, 20, 100, 200))
    rep = commutator_check(200, restriction_pairs=[(0, 1), (3, 17), (150, 7), (200, 0)])
    norms = {N: norm_bound_check(N).value for N in (10, 50, 100, 200, 400)}
    norm_ok = all(v <= TWO_PI for v in norms.values())
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(200):
        a = rng.standard_normal(401) + 1j * rng.standard_normal(401)
        b = rng.standard_normal(401) + 1j * rng.standard_normal(401)
        v = tg_form(a, b, 400)
        worst = max(worst, abs(complex(v.value)) / (np.linalg.norm(a) * np.linalg.norm(b)))
    prng = random.Random(seed)
    weights = [povm_weight([(0, 2)], _random_hermite_vector(prng, prng.randint(0, 6)), 10) for _ in range(5)]
    weight_ok = all(isinstance(w, Fraction) and w == 1 for w in weights)
    ok = comm_ok and rep.equal and rep.restriction_ok and norm_ok and worst <= TWO_PI and weight_ok
    return CriterionResult(8, "POVM identities", ok,
                           f"commutator exact: {comm_ok and rep.equal}, restriction exact: {rep.restriction_ok}, "
                           f"||T_G(400)|| = {norms[400]:.10f} <= 2pi, max |t_G|/(|f||g|) = {worst:.4f}, "
                           f"[0,2pi] weights exactly 1: {weight_ok}")


CONTRAST_ALPHAS = [Fraction(1, 10), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(9, 10),
                   1 - Fraction(1, 2**5), 1 - Fraction(1, 2**10)]


def criterion_9(seed=0):
    rows = contrast_sweep(0, CONTRAST_ALPHAS, 100)
    last = rows[-1]
    tg_ok = all(r.tg_abs <= TWO_PI for r in rows)
    ok = last.t_abs > TWO_PI and tg_ok
    return CriterionResult(9, "boundedness contrast", ok,
                           f"|t| at alpha = 1 - 2^-10 is {last.t_abs:.4f} (> 2pi), "
                           f"max |t_G| {max(r.tg_abs for r in rows):.4f} (<= 2pi)")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


def run_criteria(seed=0, only=None):
    out = []
    for k, fn in enumerate(CRITERIA, start=1):
        if only and k not in only:
            continue
        with mpmath.workdps(15):
            out.append(fn(seed))
    return out


def report(results) -> str:
    return "".join(r.line() + "\n" for r in results)


def criterion_10(first_report: str, seed=0, only=None) -> CriterionResult:
    """Re-run the criteria and compare the report bytes with a previous run."""
    second = report(run_criteria(seed, only))
    same = second.encode() == first_report.encode()
    return CriterionResult(10, "determinism", same,
                           f"second run byte-identical: {same} ({len(second.encode())} bytes)")


def run_all(seed=0):
    results = run_criteria(seed)
    first = report(results)
    results.append(criterion_10(first, seed))
    return results


__all__ = ["CriterionResult", "CRITERIA", "run_criteria", "run_all", "report", "criterion_10",
           "random_m_pairs"] + [f"criterion_{k}" for k in range(1, 10)]
