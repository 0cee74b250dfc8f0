import shutil
import subprocess
import sys

import numpy as np
import pytest

from ersim.cli import main
from ersim.solver import read_diagnostics_csv
from ersim.spectral import read_snapshot

TG = """
[grid]
n = 2
m = 16

[solver]
N = 12
dt = 1e-3
T = 0.01
mu = 0.1
cadence = 5

[exponent]
regime = martingale

[run]
seed = 1
snapshots = true
"""

ENSEMBLE = """
[grid]
n = 2
m = 8

[solver]
N = 6
dt = 1e-2
T = 0.05

[exponent]
model = frozen_fourier
p_minus = 1.9
p_plus = 2.2
regime = martingale

[noise]
family = additive
K = 2

[initial]
kind = random_divfree
modes = 4

[run]
seed = 2
paths = 4
"""


def write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestSimulate:
    def test_taylor_green_smoke(self, tmp_path):
        out = tmp_path / "out"
        assert main(["simulate", "--config", write(tmp_path, TG), "--out", str(out)]) == 0
        lines = (out / "diagnostics.csv").read_text().splitlines()
        assert lines[0] == "#schema=1"
        assert lines[1].startswith("t,energy_L2,modular_eps")
        recs = read_diagnostics_csv(out / "diagnostics.csv")
        assert len(recs) == 3 and recs[0].seed == 1
        assert np.isclose(recs[0].energy_L2, 0.5)
        snap = read_snapshot(out / "velocity.ersf")
        assert snap.values.shape == (3, 2, 16, 16)
        assert (out / "config.ini").exists()

    def test_seed_override(self, tmp_path):
        out = tmp_path / "o"
        main(["simulate", "--config", write(tmp_path, TG), "--out", str(out), "--seed", "9"])
        assert read_diagnostics_csv(out / "diagnostics.csv")[0].seed == 9

    def test_malformed_config(self, tmp_path, capsys):
        code = main(["simulate", "--config", write(tmp_path, TG.replace("dt = 1e-3", "dt = x")),
                     "--out", str(tmp_path / "o")])
        assert code == 2
        assert "config error" in capsys.readouterr().err

    def test_blowup(self, tmp_path, capsys):
        text = TG.replace("N = 12", "N = 60").replace("dt = 1e-3", "dt = 0.05").replace("T = 0.01", "T = 5.0")
        text = text.replace("mu = 0.1", "mu = 1.0") + "\n[initial]\nkind = random_divfree\nmodes = 58\n"
        out = tmp_path / "b"
        assert main(["simulate", "--config", write(tmp_path, text), "--out", str(out)]) == 3
        assert (out / "blowup_dump.txt").exists()
        assert "blow-up" in capsys.readouterr().err


class TestEnsemble:
    def test_outputs_deterministic(self, tmp_path):
        cfg = write(tmp_path, ENSEMBLE)
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["ensemble", "--config", cfg, "--out", str(a)]) == 0
        assert main(["ensemble", "--config", cfg, "--out", str(b)]) == 0
        for name in ("diagnostics.csv", "statistics.csv", "report.txt"):
            assert (a / name).read_text() == (b / name).read_text()
        recs = read_diagnostics_csv(a / "diagnostics.csv")
        assert sorted({r.path_id for r in recs}) == [0, 1, 2, 3]
        report = (a / "report.txt").read_text().splitlines()
        assert [ln.split(",")[0] for ln in report[2:]] == ["1", "2", "4"]

    def test_needs_paths(self, tmp_path):
        out = tmp_path / "none"
        assert main(["ensemble", "--config", write(tmp_path, ENSEMBLE), "--paths", "1", "--out", str(out)]) == 2
        assert not out.exists()


class TestVerify:
    def test_spectral_suite(self, capsys):
        assert main(["verify", "spectral"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "suite,check,status,value,tolerance"
        assert all(",PASS," in ln for ln in out[1:])

    def test_failure_exit_code(self, monkeypatch):
        from ersim import verify
        monkeypatch.setitem(verify.SUITES, "spectral", lambda seed: [verify.Check("x", "y", 1.0, 0.0, False)])
        assert main(["verify", "spectral"]) == 1

    def test_unknown_suite(self):
        with pytest.raises(SystemExit):
            main(["verify", "nonsense"])


@pytest.mark.skipif(shutil.which("ersim") is None, reason="console script not installed")
def test_console_script(tmp_path):
    res = subprocess.run(["ersim", "verify", "constitutive"], capture_output=True, text=True)
    assert res.returncode == 0 and "monotonicity" in res.stdout


def test_module_entry():
    res = subprocess.run([sys.executable, "-m", "ersim.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "simulate" in res.stdout
