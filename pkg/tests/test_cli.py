"""Command-line front end: exit codes and byte-level determinism."""
import csv
import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from hotime.cli import UsageError, main, parse_complex, parse_rational
from hotime.scalar import QQi


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_parsers():
    assert parse_rational("1/4") == Fraction(1, 4)
    assert parse_complex("1/5+2/5i") == QQi(Fraction(1, 5), Fraction(2, 5))
    assert parse_complex("1/2i") == QQi(0, Fraction(1, 2))
    assert parse_complex("i") == QQi(0, 1)
    with pytest.raises(UsageError):
        parse_rational("x")


def test_form_eval_single_row(capsys):
    code, out, _ = run(capsys, "form-eval", "--powers", "2:0", "--alpha", "1/4", "--beta", "1/2", "--eps", "1")
    assert code == 0
    r = rows(out)
    assert len(r) == 1 and r[0]["units"] == "sqrt_pi"


def test_form_eval_alpha_one(capsys):
    code, _, err = run(capsys, "form-eval", "--powers", "0:0", "--alpha", "1", "--beta", "1/2")
    assert code == 2
    assert "diverges" in err


def test_form_eval_empty_grid(capsys):
    code, out, _ = run(capsys, "form-eval", "--powers", "", "--alpha", "1/4", "--beta", "1/2")
    assert code == 0
    assert rows(out) == []


def test_ccr_pass_and_perturb(capsys):
    args = ["ccr", "--form", "t_eps", "--powers", "2:0,1:3", "--alpha", "1/3", "--beta", "2/3", "--eps", "1"]
    code, out, _ = run(capsys, *args)
    assert code == 0 and all(r["pass"] == "True" for r in rows(out))
    code, out, _ = run(capsys, *args, "--perturb", "1e-6")
    assert code == 3


def test_ccr_single_pair(capsys):
    code, out, _ = run(capsys, "ccr", "--form", "t_ab", "--powers", "2:0", "--alpha", "1/3", "--beta", "2/3")
    assert code == 0 and len(rows(out)) == 1


def test_continuum_verdict(capsys):
    code, out, _ = run(capsys, "continuum", "--powers", "2:0", "--alpha", "1/4", "--beta", "1/2")
    assert code == 0
    assert "slope" in out


def test_diverge_fit(capsys):
    code, out, _ = run(capsys, "diverge", "--m", "1", "--M-list", "1000,10000,100000", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["schema_version"] == 1


def test_povm_default(capsys):
    code, out, _ = run(capsys, "povm", "--bigN", "100")
    assert code == 0


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 64
    code, _, _ = run(capsys, "form-eval", "--alpha", "one")
    assert code == 64


def test_z_singular(capsys):
    code, _, err = run(capsys, "ccr", "--form", "t_hat", "--z", "i", "--powers", "2:0")
    assert code == 2
    assert "z = i" in err


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\npowers = 2:0\nalpha = 1/4\nbeta = 1/2\n")
    code, out, _ = run(capsys, "form-eval", "--config", str(cfg))
    assert code == 0 and len(rows(out)) == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    code, _, _ = run(capsys, "form-eval", "--config", str(bad))
    assert code == 64


def test_deterministic_output(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"out{k}.csv"
        subprocess.run([sys.executable, "-m", "hotime", "form-eval", "--powers", "2:0,0:2,4:2",
                        "--alpha", "1/4,1/2", "--beta", "1/2", "--eps", "1,1/4,1/2",
                        "--seed", "7", "--workers", "2", "--out", str(path)], check=True)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] and outs[0]
