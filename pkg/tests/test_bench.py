import filecmp
import math
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fibershell.bench import RUNNERS, ScenarioError, cli, oracles, parse, run_scenario, serialize
from fibershell.bench.io import read_csv
from fibershell.bench.scenario import apply_overrides


class TestOracles:
    def test_pure_shear_reference(self):
        assert_allclose(oracles.pure_shear(1.0), (0.0, 0.0), atol=1e-15)

    def test_pure_shear_hand_value(self):
        Rx, _ = oracles.pure_shear(1.2, mu=1.0, eps_L=2.0, eps_a=1.0, L0=1.0)
        assert_allclose(Rx, (0.44 + 0.0968 + 0.2684) / 1.2, rtol=1e-14)

    @pytest.mark.parametrize("phi,expected", [(45.0, 0.0), (60.0, 0.25)])
    def test_picture_frame(self, phi, expected):
        assert_allclose(oracles.picture_frame(math.radians(phi)), expected, atol=1e-15)

    @pytest.mark.parametrize("phi", [0.0, 90.0, 120.0])
    def test_picture_frame_range(self, phi):
        with pytest.raises(oracles.OracleRangeError):
            oracles.picture_frame(math.radians(phi))

    def test_pure_bending_zero_and_bound(self):
        assert_allclose(oracles.pure_bending(0.0), (0.0, 1.0))
        M = 0.5 * math.sqrt(10.0)
        assert_allclose(oracles.pure_bending(M)[1], math.sqrt(0.5), rtol=1e-12)
        with pytest.raises(oracles.OracleRangeError):
            oracles.pure_bending(1.01 * M)

    def test_energy_balance_is_stationary(self):
        # direct minimization of the strip potential over (lam, kappa)
        from scipy.optimize import minimize
        M, mu, bn = 0.8, 10.0, 1.0

        def pot(z):
            lam, k = z
            return 0.5 * mu * (lam**2 - 1 - 2 * np.log(lam)) + 0.5 * bn * (lam**2 * k)**2 - M * k * lam

        res = minimize(pot, [1.0, 0.5], method="Nelder-Mead", options=dict(xatol=1e-12, fatol=1e-15))
        H, lam = oracles.pure_bending_energy_balance(M, mu, bn)
        assert_allclose([lam, 2 * H], res.x, rtol=1e-6)

    def test_uniaxial(self):
        assert oracles.uniaxial(0.0)[0] == 0.0
        for u in (0.1, 0.3, 0.5):
            Rx, l2, res = oracles.uniaxial(u)
            assert abs(res) <= 1e-12
            assert Rx > 0 and 0 < l2 < 1

    def test_annulus(self):
        assert oracles.annulus(1.0) == 0.0
        with pytest.raises(oracles.OracleRangeError):
            oracles.annulus(-1.0)


class TestScenarioFiles:
    @pytest.mark.parametrize("name", cli.builtin_names())
    def test_round_trip(self, name):
        sc = parse(cli.builtin_text(name))
        again = parse(serialize(sc))
        assert again == sc
        assert sc.kind in RUNNERS

    def test_every_runner_has_a_scenario(self):
        kinds = {parse(cli.builtin_text(n)).kind for n in cli.builtin_names()}
        assert set(RUNNERS) <= kinds

    def test_overrides(self):
        sc = parse(cli.builtin_text("pure_shear"))
        out = apply_overrides(sc, mesh="2x3", steps=4, gauss=5, seed=9, tol=1e-3)
        assert out.sections["geometry"]["mesh"] == "2x3"
        assert out.get("schedule", "steps", int) == 4
        assert sc.sections["geometry"]["mesh"] == "1x1"
        with pytest.raises(ScenarioError, match="geometry.mesh"):
            apply_overrides(sc, mesh="2by3")

    @pytest.mark.parametrize("text,key", [
        ("[scenario]\nname = a\n", "scenario.kind"),
        ("[scenario]\nname = a\nkind = nope\n", "scenario.kind"),
        ("[scenario]\nname = a\nkind = pure_shear\n[geometry]\nLx = one\n", "geometry.Lx"),
    ])
    def test_bad_files_name_the_key(self, text, key):
        with pytest.raises(ScenarioError, match=key.replace(".", r"\.")):
            run_scenario(parse(text))

    def test_unknown_section(self):
        with pytest.raises(ScenarioError, match="unknown section 'meshing'"):
            parse("[scenario]\nname = a\nkind = pure_shear\n[meshing]\nx = 1\n")


def tree(path: Path) -> list:
    return sorted(p.relative_to(path).as_posix() for p in path.rglob("*") if p.is_file())


class TestCli:
    def test_list(self, capsys):
        assert cli.main(["list"]) == 0
        out = capsys.readouterr().out
        for name in ("pure_shear", "torsion", "bias_extension"):
            assert name in out

    def test_run_pure_shear(self, tmp_path, capsys):
        assert cli.main(["run", "pure_shear", "--mesh", "1x1", "--out", str(tmp_path)]) == 0
        run = tmp_path / "pure_shear"
        assert {"reactions.csv", "energies.csv", "report.txt", "scenario.ini"} <= set(tree(run))
        cols, data = read_csv(run / "reactions.csv")
        assert "err_x [-]" in cols
        assert np.max(data[:, cols.index("err_x [-]")]) <= 1e-10
        assert (run / "reactions.csv").read_text().startswith("# units: L0, eps0")
        assert parse((run / "scenario.ini").read_text()) == parse(cli.builtin_text("pure_shear"))
        assert "result: PASS" in (run / "report.txt").read_text()

    def test_out_env(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env"))
        assert cli.main(["run", "picture_frame", "--steps", "6"]) == 0
        assert (tmp_path / "env" / "picture_frame" / "reactions.csv").is_file()

    def test_run_from_file(self, tmp_path, capsys):
        f = tmp_path / "mine.ini"
        f.write_text(cli.builtin_text("uniaxial").replace("name = uniaxial", "name = mine"))
        assert cli.main(["run", str(f), "--out", str(tmp_path / "o")]) == 0
        assert (tmp_path / "o" / "mine" / "report.txt").is_file()

    @pytest.mark.parametrize("argv,msg", [
        (["run", "no_such_scenario"], "unknown scenario"),
        (["run", "pure_shear", "--mesh", "1by1"], "mesh"),
        (["run", "missing.ini"], "not found"),
    ])
    def test_errors_exit_2(self, argv, msg, tmp_path, capsys):
        assert cli.main(argv + ["--out", str(tmp_path)]) == 2
        assert msg in capsys.readouterr().err

    def test_malformed_file_names_key(self, tmp_path, capsys):
        f = tmp_path / "bad.ini"
        f.write_text(cli.builtin_text("pure_shear").replace("eps_L = 2.0", "eps_L = two"))
        assert cli.main(["run", str(f), "--out", str(tmp_path)]) == 2
        assert "material.eps_L" in capsys.readouterr().err

    def test_verify_subset(self, capsys):
        assert cli.main(["verify", "--only", "pure_shear", "picture_frame"]) == 0
        out = capsys.readouterr().out
        assert "all gated checks passed" in out
        assert "FAIL" not in out

    def test_verify_reports_failure(self, capsys):
        assert cli.main(["verify", "--only", "pure_shear", "--tol", "1e-300"]) == 1


class TestOutputs:
    def test_determinism_torsion_seed(self, tmp_path, capsys):
        argv = ["run", "torsion", "--seed", "7", "--mesh", "8x4", "--steps", "6"]
        assert cli.main(argv + ["--out", str(tmp_path / "a")]) == 0
        assert cli.main(argv + ["--out", str(tmp_path / "b")]) == 0
        a, b = tmp_path / "a" / "torsion", tmp_path / "b" / "torsion"
        assert tree(a) == tree(b)
        assert any(n.endswith(".vtk") for n in tree(a))
        match, mismatch, errors = filecmp.cmpfiles(a, b, tree(a), shallow=False)
        assert mismatch == [] and errors == []

    def test_seed_changes_output(self, tmp_path, capsys):
        base = ["run", "torsion", "--mesh", "8x4", "--steps", "2"]
        cli.main(base + ["--seed", "7", "--out", str(tmp_path / "a")])
        cli.main(base + ["--seed", "8", "--out", str(tmp_path / "b")])
        ra = (tmp_path / "a" / "torsion" / "reactions.csv").read_text()
        rb = (tmp_path / "b" / "torsion" / "reactions.csv").read_text()
        assert ra != rb

    def test_vtk_and_energy_csv(self, tmp_path, capsys):
        cli.main(["run", "annulus", "--gauss", "4", "--steps", "2", "--out", str(tmp_path)])
        run = tmp_path / "annulus"
        vtk = sorted(run.glob("fields_step*.vtk"))[-1].read_text().splitlines()
        assert vtk[0] == "# vtk DataFile Version 3.0" and vtk[2] == "ASCII"
        n = int(vtk[4].split()[1])
        for field in ("kg_sum", "Lambda1", "W"):
            assert any(line.startswith(f"SCALARS {field} ") for line in vtk)
        assert f"POINT_DATA {n}" in vtk
        cols, data = read_csv(run / "energies.csv")
        parts = [c for c in cols if c.split(" [")[0] in ("matrix", "stretch", "angle", "bend_out", "bend_in",
                                                          "torsion", "stab")]
        assert_allclose(data[:, [cols.index(c) for c in parts]].sum(1), data[:, -1], rtol=1e-12, atol=1e-14)
        assert (run / "energies.csv").read_text().splitlines()[0].startswith("# units:")

    def test_rerun_replaces_directory(self, tmp_path, capsys):
        for steps in ("4", "2"):
            assert cli.main(["run", "uniaxial", "--steps", steps, "--out", str(tmp_path)]) == 0
        _, data = read_csv(tmp_path / "uniaxial" / "reactions.csv")
        assert len(data) == 2
        assert [p.name for p in tmp_path.iterdir()] == ["uniaxial"]
