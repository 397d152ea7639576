"""Config loading, experiment drivers and the command-line interface."""

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from wignerlab import checkpoint
from wignerlab.errors import ConfigError, GridMismatchError
from wignerlab.harness import config
from wignerlab.harness.cli import main
from wignerlab.harness.experiments import compare, simulate

EVOLVE = """
kind = "evolve-wigner"
[grid]
nx = 16
lx = 6.283185307179586
nv = 64
lv = 16.0
[profile]
type = "modulated_maxwellian"
alpha = 0.2
k = 1.0
[potential]
name = "{potential}"
[time]
dt = 0.05
t_end = 0.5
snapshot_every = 2
[run]
eps = [0.2, 0.1]
[[norms]]
m = 1
r = 1
family = "Hmr_eps"
"""

CONVERGE = """
kind = "converge"
[grid]
nx = 16
lx = 6.283185307179586
nv = 64
lv = 16.0
[profile]
type = "modulated_maxwellian"
alpha = 0.2
k = 1.0
[potential]
name = "defocusing"
[time]
dt = 0.02
t_end = 0.2
[run]
eps = [0.2, 0.1, 0.05]
"""

PENROSE = """
kind = "penrose"
[profile]
type = "maxwellian"
[potential]
name = "defocusing"
[penrose]
kind = "quant"
n_g = 9
n_c = 65
n_eta = 8
"""

EIKONAL = """
kind = "eikonal"
[profile]
type = "maxwellian"
[potential]
name = "defocusing"
[eikonal]
s = 0.0
t = 0.2
t_max = 0.6
z = [[0.0, -1.0], [1.0, 0.5]]
xi = [[1.0, 0.5]]
modes = [{k = 1.0, amp = 0.3, rate = 0.5}]
"""


def _write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestConfig:
    def test_roundtrip(self, tmp_path):
        spec = config.load(_write(tmp_path, EVOLVE.format(potential="defocusing")))
        assert spec.kind == "evolve-wigner" and spec.eps == [0.2, 0.1]
        assert spec.resolved()["tolerances"] == config.TOL_PROFILES["fast"]

    @pytest.mark.parametrize(
        "edit",
        [
            ("nx = 16", "nx = 12"),
            ("lv = 16.0", "lv = -1.0"),
            ("eps = [0.2, 0.1]", "eps = [0.1, 0.2]"),
            ("eps = [0.2, 0.1]", "eps = [1.5]"),
            ("eps = [0.2, 0.1]", "eps = []"),
            ("dt = 0.05", "dt = 0.0"),
            ('kind = "evolve-wigner"', 'kind = "teleport"'),
            ('name = "{potential}"', "scale = 1"),
            ('type = "modulated_maxwellian"', 'shape = "x"'),
            ("t_end = 0.5", ""),
            ("family = \"Hmr_eps\"", ""),
        ],
    )
    def test_validation(self, tmp_path, edit):
        text = EVOLVE.replace(*edit).format(potential="defocusing")
        with pytest.raises(ConfigError):
            config.load(_write(tmp_path, text))

    def test_missing_and_malformed(self, tmp_path):
        with pytest.raises(ConfigError):
            config.load(str(tmp_path / "absent.toml"))
        with pytest.raises(ConfigError):
            config.load(_write(tmp_path, "kind = [unclosed"))
        with pytest.raises(ConfigError):
            config.from_dict({"kind": "penrose", "profile": {"type": "maxwellian"}}, "sloppy")

    def test_eikonal_requires_lattice(self, tmp_path):
        with pytest.raises(ConfigError):
            config.load(_write(tmp_path, EIKONAL.replace("s = 0.0", "")))


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    path = tmp_path_factory.mktemp("cmp") / "c.toml"
    path.write_text(EVOLVE.format(potential="defocusing"))
    spec = config.load(str(path))
    return simulate(spec, 0.2), simulate(spec, 0.1), simulate(spec, None)


class TestCompare:
    def test_self_distance_zero(self, runs):
        a = runs[0]
        assert compare(a, a) == {"field_sup": 0.0, "density_l2t": 0.0}

    def test_symmetric(self, runs):
        a, b, _ = runs
        ab, ba = compare(a, b), compare(b, a)
        assert ab["field_sup"] == ba["field_sup"] and ab["density_l2t"] == ba["density_l2t"]

    def test_weighted(self, runs):
        from wignerlab.norms import NormSpec

        a, _, v = runs
        plain = compare(a, v)["field_sup"]
        assert compare(a, v, NormSpec(0, 0, "Hmr_eps"), 0.2)["field_sup"] == pytest.approx(plain, rel=1e-12)

    def test_closer_for_smaller_eps(self, runs):
        a, b, v = runs
        assert compare(b, v)["field_sup"] < compare(a, v)["field_sup"]

    def test_mismatch(self, runs, tmp_path):
        spec = config.load(_write(tmp_path, EVOLVE.format(potential="defocusing").replace("nv = 64", "nv = 128")))
        with pytest.raises(GridMismatchError):
            compare(runs[0], simulate(spec, 0.2))


class TestCli:
    def test_evolve_wigner_free_streaming(self, tmp_path):
        out = tmp_path / "out"
        code = main(["evolve-wigner", "--config", _write(tmp_path, EVOLVE.format(potential="zero")), "--out", str(out)])
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert set(summary["members"]) == {"eps_0.2", "eps_0.1"}
        f, eps, t = checkpoint.read(out / "eps_0.1" / "final.wvl")
        assert eps == 0.1 and t == pytest.approx(0.5)
        X, V = f.grid.mesh()
        ref = (1 + 0.2 * np.cos(X - 0.5 * V)) * np.exp(-0.5 * V**2) / np.sqrt(2 * np.pi)
        assert np.abs(f.data - ref).max() <= 1e-10
        with open(out / "eps_0.1" / "timeseries.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["time", "quantity", "value"]
        assert {r[1] for r in rows[1:]} >= {"mass", "l2", "Hmr_eps_m1_r1", "density_l2"}

    def test_evolve_vlasov(self, tmp_path):
        text = EVOLVE.format(potential="defocusing").replace("evolve-wigner", "evolve-vlasov")
        out = tmp_path / "vl"
        assert main(["evolve-vlasov", "--config", _write(tmp_path, text), "--out", str(out)]) == 0
        assert json.loads((out / "summary.json").read_text())["members"]["vlasov"]["mass_drift"] <= 1e-12

    def test_converge_decreasing(self, tmp_path):
        out = tmp_path / "cv"
        assert main(["converge", "--config", _write(tmp_path, CONVERGE), "--out", str(out)]) == 0
        conv = json.loads((out / "summary.json").read_text())["convergence"]
        d = conv["field_sup_l2"]
        assert all(b < a for a, b in zip(d, d[1:]))
        assert len(conv["field_rates"]) == 2
        assert (out / "convergence.csv").read_text().startswith("eps,quantity,value")

    def test_penrose(self, tmp_path):
        out = tmp_path / "pr"
        assert main(["penrose", "--config", _write(tmp_path, PENROSE), "--out", str(out)]) == 0
        rep = json.loads((out / "report.json").read_text())
        assert rep["certified"] and rep["kind"] == "quant"
        assert (out / "surface.csv").exists()
        assert json.loads((out / "summary.json").read_text())["small_data"]["envelope"] == pytest.approx(1.0, abs=1e-6)

    def test_eikonal(self, tmp_path):
        out = tmp_path / "ek"
        assert main(["eikonal", "--config", _write(tmp_path, EIKONAL), "--out", str(out)]) == 0
        s = json.loads((out / "summary.json").read_text())
        assert s["worst"]["hj_residual"] <= 1e-5 and s["dz_within_envelope"]
        assert 0 < s["valid_window"] <= 0.6

    def test_check(self, tmp_path, capsys):
        assert main(["check", "--out", str(tmp_path)]) == 0
        res = json.loads((tmp_path / "check.json").read_text())["results"]
        assert res and all(r["passed"] for r in res)
        assert "PASS" in capsys.readouterr().out

    def test_config_error_exit_code(self, tmp_path, capsys):
        out = tmp_path / "bad"
        code = main(["converge", "--config", _write(tmp_path, CONVERGE.replace("nx = 16", "nx = 10")), "--out", str(out)])
        assert code == 2
        err = json.loads((out / "error.json").read_text())
        assert err["error"] == "ConfigError" and "nx" in err["message"]
        assert json.loads(capsys.readouterr().err)["error"] == "ConfigError"

    def test_kind_mismatch(self, tmp_path):
        assert main(["penrose", "--config", _write(tmp_path, CONVERGE), "--out", str(tmp_path / "o")]) == 2

    def test_runtime_error_exit_code(self, tmp_path):
        # a profile type outside the catalogue fails in the driver, not in the loader
        text = PENROSE.replace('type = "maxwellian"', 'type = "kappa"')
        assert main(["penrose", "--config", _write(tmp_path, text), "--out", str(tmp_path / "o")]) == 1
        assert json.loads((tmp_path / "o" / "error.json").read_text())["error"] == "ParameterError"

    def test_bad_workers(self, tmp_path):
        assert main(["penrose", "--config", _write(tmp_path, PENROSE), "--workers", "0"]) == 2

    def test_parallel_sweep_matches_serial(self, tmp_path):
        cfg = _write(tmp_path, EVOLVE.format(potential="defocusing"))
        main(["evolve-wigner", "--config", cfg, "--out", str(tmp_path / "s")])
        main(["evolve-wigner", "--config", cfg, "--out", str(tmp_path / "p"), "--workers", "2"])
        for name in ("summary.json", "eps_0.1/timeseries.csv", "eps_0.2/final.wvl"):
            assert (tmp_path / "s" / name).read_bytes() == (tmp_path / "p" / name).read_bytes()

    def test_console_script_help(self):
        res = subprocess.run([sys.executable, "-m", "wignerlab.harness.cli", "--help"], capture_output=True, text=True)
        assert res.returncode == 0 and "converge" in res.stdout
