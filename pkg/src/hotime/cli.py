"""Batch front end: ``hotime <subcommand> [flags]``.

Exit codes: 0 ok, 2 domain error, 3 tolerance failure, 64 usage error.
Configuration is a flat ``key = value`` file (``--config``) overridden by
command-line flags. Lists are comma separated; rationals may be written
``1/4``; complex samples as ``1/5+2/5i``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from . import acceptance, forms, povm
from .errors import HotimeError
from .forms import SCHEMA_VERSION
from .gauss import GaussVector, xi
from .scalar import QQi

EXIT_OK, EXIT_DOMAIN, EXIT_TOLERANCE, EXIT_USAGE = 0, 2, 3, 64


class UsageError(Exception):
    pass


# parsing ------------------------------------------------------------------------
def parse_rational(tok: str) -> Fraction:
    tok = tok.strip()
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a rational number: {tok!r}") from exc


_Z_RE = re.compile(r"^\s*([+-]?[0-9./eE]+)?\s*(?:([+-])\s*([0-9./eE]*)\s*[ij])?\s*$")


def parse_complex(tok: str):
    """'a+bi' with rational parts -> QQi; a bare 'bi' or 'i' also works."""
    t = tok.strip().replace(" ", "")
    m = re.fullmatch(r"([+-]?[0-9./]*)[ij]", t)
    if m:
        mag = m.group(1)
        im = Fraction(1) if mag in ("", "+") else (Fraction(-1) if mag == "-" else parse_rational(mag))
        return QQi(0, im)
    m = _Z_RE.match(t)
    if not m or (m.group(1) is None and m.group(2) is None):
        raise UsageError(f"not a complex number: {tok!r}")
    re_part = parse_rational(m.group(1)) if m.group(1) else Fraction(0)
    if m.group(2) is None:
        return QQi(re_part, 0)
    mag = Fraction(1) if m.group(3) == "" else parse_rational(m.group(3))
    return QQi(re_part, mag if m.group(2) == "+" else -mag)


def _split(v: str):
    return [t for t in (x.strip() for x in v.split(",")) if t]


def parse_powers(v: str):
    """'2:0,1:3' -> [(2, 0), (1, 3)]; a bare '2' means (2, 2)."""
    out = []
    for tok in _split(v):
        try:
            if ":" in tok:
                a, b = tok.split(":")
                out.append((int(a), int(b)))
            else:
                out.append((int(tok), int(tok)))
        except ValueError as exc:
            raise UsageError(f"bad power pair {tok!r}") from exc
        if min(out[-1]) < 0:
            raise UsageError(f"powers must be >= 0: {tok!r}")
    return out


def parse_ints(v: str):
    try:
        return [int(float(t)) if "e" in t.lower() else int(t) for t in _split(v)]
    except ValueError as exc:
        raise UsageError(f"bad integer list {v!r}") from exc


def read_config(path: str) -> dict:
    """Flat key = value file; '#' starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for k, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{k}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


DEFAULTS = {
    "eps": "1",
    "alpha": "1/4",
    "beta": "1/2",
    "powers": "2:0",
    "z": "1/5+2/5i,-3/10+4/5i,1/2i",
    "bigN": "100",
    "M_list": "1000,10000,100000,1000000",
    "form": "t_eps",
    "tolerance": "1e-10",
    "precision": "30",
    "seed": "0",
    "format": "csv",
    "out": "",
    "perturb": "0",
    "kind": "k",
    "m": "0",
    "k": "0",
    "workers": "1",
}


@dataclass
class RunConfig:
    subcommand: str
    eps: list = field(default_factory=list)
    alpha: list = field(default_factory=list)
    beta: list = field(default_factory=list)
    powers: list = field(default_factory=list)
    z: list = field(default_factory=list)
    bigN: int = 100
    M_list: list = field(default_factory=list)
    form: str = "t_eps"
    tolerance: float = 1e-10
    precision: int = 30
    seed: int = 0
    format: str = "csv"
    out: str = ""
    perturb: float = 0.0
    kind: str = "k"
    m: int = 0
    k: int = 0
    workers: int = 1
    explicit: set = field(default_factory=set)


def build_config(sub: str, file_values: dict, cli_values: dict) -> RunConfig:
    raw = dict(DEFAULTS)
    unknown = set(file_values) - set(DEFAULTS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    raw.update(file_values)
    raw.update({k: v for k, v in cli_values.items() if v is not None})
    explicit = set(file_values) | {k for k, v in cli_values.items() if v is not None}
    try:
        cfg = RunConfig(
            subcommand=sub,
            eps=[parse_rational(t) for t in _split(raw["eps"])],
            alpha=[parse_rational(t) for t in _split(raw["alpha"])],
            beta=[parse_rational(t) for t in _split(raw["beta"])],
            powers=parse_powers(raw["powers"]),
            z=[parse_complex(t) for t in _split(raw["z"])],
            bigN=int(raw["bigN"]),
            M_list=parse_ints(raw["M_list"]),
            form=raw["form"],
            tolerance=float(raw["tolerance"]),
            precision=int(raw["precision"]),
            seed=int(raw["seed"]),
            format=raw["format"],
            out=raw["out"],
            perturb=float(raw["perturb"]),
            kind=raw["kind"],
            m=int(raw["m"]),
            k=int(raw["k"]),
            workers=int(raw["workers"]),
            explicit=explicit,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if cfg.format not in ("csv", "json"):
        raise UsageError("--format must be csv or json")
    if cfg.form not in ("t_eps", "t_ab", "t_hat"):
        raise UsageError("--form must be t_eps, t_ab or t_hat")
    return cfg


# output -------------------------------------------------------------------------
def render(rows, fmt: str, command: str) -> str:
    if fmt == "json":
        return json.dumps({"schema_version": SCHEMA_VERSION, "command": command, "rows": rows},
                          indent=1, sort_keys=True) + "\n"
    cols = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    if cols:
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", restval="")
        w.writeheader()
        w.writerows(rows)
    return buf.getvalue()


def emit(cfg: RunConfig, rows, command: str):
    text = render(rows, cfg.format, command)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _pmap(fn, items, workers):
    """Ordered map; results come back in grid order whatever the completion order."""
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _verdict(name, ok, **info):
    row = {"form": "verdict", "check": name, "pass": str(ok)}
    row.update({k: str(v) for k, v in info.items()})
    return row


# commands -----------------------------------------------------------------------
def _form_eval_one(args):
    a, b, al, be, e, dps = args
    v = forms.t_eps_form(xi(al, e, power=a), xi(be, e, power=b), e, dps)
    v.params.update({"a": a, "b": b, "alpha": al, "beta": be})
    return v.as_row()


def cmd_form_eval(cfg: RunConfig) -> int:
    grid = [(a, b, al, be, e, cfg.precision) for (a, b) in cfg.powers for al in cfg.alpha
            for be in cfg.beta for e in cfg.eps]
    emit(cfg, _pmap(_form_eval_one, grid, cfg.workers), "form-eval")
    return EXIT_OK


def _ccr_one(args):
    form, a, b, u, w, e, tol, dps, perturb = args
    if form == "t_hat":
        phi, psi = GaussVector.monomial(a, u), GaussVector.monomial(b, w)
    else:
        phi, psi = xi(u, e, power=a), xi(w, e, power=b)
    r = forms.ccr_residual(form, phi, psi, e, tol, dps, perturb or None)
    row = {"a": str(a), "b": str(b), "p1": str(u), "p2": str(w), "eps": str(e)}
    row.update(r.as_row())
    return row


def cmd_ccr(cfg: RunConfig) -> int:
    if cfg.form == "t_hat":
        grid = [(cfg.form, a, b, z1, z2, 1, cfg.tolerance, cfg.precision, cfg.perturb)
                for (a, b) in cfg.powers for z1 in cfg.z for z2 in cfg.z]
    else:
        eps = cfg.eps if cfg.form == "t_eps" else [Fraction(1)]
        grid = [(cfg.form, a, b, al, be, e, cfg.tolerance, cfg.precision, cfg.perturb)
                for (a, b) in cfg.powers for al in cfg.alpha for be in cfg.beta for e in eps]
    rows = _pmap(_ccr_one, grid, cfg.workers)
    ok = all(r["pass"] == "True" for r in rows)
    emit(cfg, rows, "ccr")
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_matrix(cfg: RunConfig) -> int:
    rows = []
    if cfg.kind == "tg":
        text = povm.tg_matrix(cfg.bigN).to_text()
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    for (a, b) in cfg.powers:
        for al in cfg.alpha:
            for be in cfg.beta:
                for e in cfg.eps:
                    if cfg.kind == "k":
                        v = forms.k_matrix_element(a, b, al, be, e, cfg.precision)
                    elif cfg.kind == "l":
                        v = forms.l_matrix_element(a, b, al, be, e, cfg.precision)
                    else:
                        raise UsageError("--kind must be k, l or tg")
                    rows.append(v.as_row())
    emit(cfg, rows, "matrix")
    return EXIT_OK


def cmd_continuum(cfg: RunConfig) -> int:
    eps = cfg.eps if "eps" in cfg.explicit else acceptance.CONTINUUM_EPS
    rows = []
    ok = True
    for (a, b) in cfg.powers:
        for al in cfg.alpha:
            for be in cfg.beta:
                res = forms.continuum_sweep(xi(al, 1, power=a), xi(be, 1, power=b), eps, cfg.precision)
                for e, r in zip(eps, res.rows):
                    row = r.as_row()
                    row.update({"a": str(a), "b": str(b), "alpha": str(al), "beta": str(be), "eps": str(e)})
                    rows.append(row)
                lim = res.limit.as_row()
                lim.update({"a": str(a), "b": str(b), "alpha": str(al), "beta": str(be)})
                rows.append(lim)
                good = res.slope is None or 0.9 <= res.slope <= 1.1
                ok &= good
                rows.append(_verdict("slope", good, slope="none" if res.slope is None else f"{res.slope:.6f}",
                                     fitted_eps=len(res.fit_eps)))
    emit(cfg, rows, "continuum")
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_diverge(cfg: RunConfig) -> int:
    rows = []
    ok = True
    for e in cfg.eps:
        res = forms.divergence_probe(cfg.m, e, cfg.M_list, dps=cfg.precision)
        for M, v in zip(res.M_list, res.values):
            rows.append({"form": "diverge", "m": str(cfg.m), "eps": str(e), "M": str(M),
                         "value": f"{float(v):.15g}", "half_log_M": f"{0.5 * float(mpmath.log(M)) if M else 0:.15g}"})
        good = res.fit_error is not None and res.fit_error <= 0.05
        ok &= good
        rows.append(_verdict("harmonic_fit", good, amplitude=f"{float(res.amplitude):.15g}",
                             c=f"{res.fit_c:.10g}" if res.fit_c is not None else "none",
                             d=f"{res.fit_d:.10g}" if res.fit_d is not None else "none",
                             fit_error=f"{res.fit_error:.3e}" if res.fit_error is not None else "none"))
    emit(cfg, rows, "diverge")
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_continue(cfg: RunConfig) -> int:
    rows = []
    ok = True
    for al in cfg.alpha:
        for (a, b) in cfg.powers:
            d = abs(forms.t_hat_form(a, b, QQi(0, al), cfg.precision).value
                    - forms.k_matrix_element(a, b, al, al, 1, cfg.precision).value)
            good = d <= cfg.tolerance
            ok &= good
            rows.append({"form": "t_hat", "check": "restriction", "a": str(a), "b": str(b),
                         "alpha": str(al), "abs_gap": f"{float(d):.3e}", "pass": str(good)})
    loops = [("square 0.5+0.5i side 0.2", forms.square_loop(0.5 + 0.5j, 0.2)),
             ("square -0.4+1.5i side 0.3", forms.square_loop(-0.4 + 1.5j, 0.3)),
             ("square 0.5i side 0.4", forms.square_loop(0.5j, 0.4))]
    for name, lp in loops:
        for (a, b) in cfg.powers:
            v = forms.analyticity_check(a, b, lp)
            good = abs(v) <= 1e-8
            ok &= good
            rows.append({"form": "t_hat", "check": "loop", "loop": name, "a": str(a), "b": str(b),
                         "abs_integral": f"{float(abs(v)):.3e}", "pass": str(good)})
    for z in cfg.z:
        for (a, b) in cfg.powers:
            v = forms.t_hat_form(a, b, z, cfg.precision)
            rows.append(v.as_row())
    emit(cfg, rows, "continue")
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_povm(cfg: RunConfig) -> int:
    N = cfg.bigN
    rows = []
    rep = povm.commutator_check(N)
    est = povm.norm_bound_check(N, seed=cfg.seed)
    f = povm.hermite_frame(3).vectors
    sample = f[0] + f[1] * QQi(2) + f[3] * QQi(0, 1)
    total = povm.povm_weight([(0, 2)], sample, N)
    half = povm.povm_weight([(0, 1)], sample, N)
    rows.append({"form": "t_g", "check": "commutator", "N": str(N), "exact_equal": str(rep.equal),
                 "restriction": str(rep.restriction_ok)})
    rows.append({"form": "t_g", "check": "norm", "N": str(N), "estimate": f"{est.value:.12f}",
                 "dense_max": f"{est.eigvalsh_max:.12f}", "bound": f"{povm.TWO_PI:.12f}"})
    rows.append({"form": "t_g", "check": "weight", "N": str(N), "interval": "[0,2pi]", "value": str(total)})
    rows.append({"form": "t_g", "check": "weight", "N": str(N), "interval": "[0,pi]",
                 "value": f"{float(half):.15g}"})
    ok = rep.equal and rep.restriction_ok and est.within_bound and total == 1
    rows.append(_verdict("povm", ok))
    emit(cfg, rows, "povm")
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_contrast(cfg: RunConfig) -> int:
    alphas = cfg.alpha if "alpha" in cfg.explicit else acceptance.CONTRAST_ALPHAS
    rows = [r.as_row() for r in povm.contrast_sweep(cfg.k, alphas, cfg.bigN, cfg.precision)]
    ok = all(r["tg_within_2pi"] == "True" for r in rows)
    rows.append(_verdict("contrast", ok, t_exceeds_2pi_somewhere=any(r["t_exceeds_2pi"] == "True" for r in rows)))
    emit(cfg, rows, "contrast")
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_acceptance(cfg: RunConfig) -> int:
    results = acceptance.run_all(cfg.seed)
    text = acceptance.report(results)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_TOLERANCE


COMMANDS = {
    "form-eval": cmd_form_eval, "ccr": cmd_ccr, "matrix": cmd_matrix, "continuum": cmd_continuum,
    "diverge": cmd_diverge, "continue": cmd_continue, "povm": cmd_povm, "contrast": cmd_contrast,
    "acceptance": cmd_acceptance,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def make_parser():
    p = _Parser(prog="hotime", description="Time operators of the harmonic oscillator: experiments and checks.")
    p.add_argument("subcommand", choices=sorted(COMMANDS))
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--precision", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--eps", help="comma-separated eps values, e.g. 1,1/4")
    p.add_argument("--alpha")
    p.add_argument("--beta")
    p.add_argument("--powers", help="power pairs a:b, comma separated")
    p.add_argument("--z", help="complex samples such as 1/5+2/5i")
    p.add_argument("--bigN", type=int)
    p.add_argument("--M-list", dest="M_list")
    p.add_argument("--form", help="t_eps, t_ab or t_hat (ccr)")
    p.add_argument("--kind", help="k, l or tg (matrix)")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--perturb", type=float, help="test hook: multiply S by 1 + perturb")
    p.add_argument("--m", type=int, help="power 2m for diverge")
    p.add_argument("--k", type=int, help="power 2k for contrast")
    p.add_argument("--workers", type=int)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        file_values = read_config(args.config) if args.config else {}
        cli_values = {k: (str(v) if v is not None else None) for k, v in vars(args).items()
                      if k not in ("subcommand", "config")}
        cfg = build_config(args.subcommand, file_values, cli_values)
        with mpmath.workdps(cfg.precision):
            return COMMANDS[args.subcommand](cfg)
    except UsageError as exc:
        sys.stderr.write(f"hotime: usage error: {exc}\n")
        return EXIT_USAGE
    except HotimeError as exc:
        sys.stderr.write(f"hotime: domain error: {exc}\n")
        return EXIT_DOMAIN


if __name__ == "__main__":
    raise SystemExit(main())
