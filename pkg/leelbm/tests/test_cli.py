import json
import tempfile
from pathlib import Path
from unittest import TestCase, mock

import numpy as np
from click.testing import CliRunner

from leelbm.cli import cli, main
from leelbm.snapshots import read_snapshot


class CliTests(TestCase):
    def setUp(self) -> None:
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self) -> None:
        self.tmp.cleanup()

    def test_stability(self) -> None:
        out = self.dir / "d1q3.json"
        args = ["stability", "--lattice", "d1q3", "--resolution", "64"]
        assert main(args + ["--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["verdict"] == "stable"
        assert len(report["samples"]) == 64

    def test_stability_structure(self) -> None:
        out = self.dir / "d3q19.json"
        args = ["stability", "--lattice", "d3q19", "--resolution", "4"]
        assert main(args + ["--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["verdict"] == "indeterminate"
        assert report["structure"]["eigen_multiplicities"] == {
            "0": 5,
            "-2": 14,
            "other": 0,
        }

    def test_stability_survives_failed_eigen_solves(self) -> None:
        out = self.dir / "d3q19.json"
        args = ["stability", "--lattice", "d3q19", "--resolution", "4"]
        failure = np.linalg.LinAlgError("Eigenvalues did not converge")
        with mock.patch("numpy.linalg.eig", side_effect=failure):
            assert main(args + ["--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["verdict"] == "indeterminate"
        assert report["indeterminate_samples"] > 0
        assert report["structure"]["passed"]

    def test_stability_failure(self) -> None:
        out = self.dir / "tau1.json"
        args = ["stability", "--lattice", "d2q5", "--resolution", "4", "--tau", "1"]
        assert main(args + ["--out", str(out)]) == 1
        assert json.loads(out.read_text())["verdict"] == "unstable"

    def test_convergence(self) -> None:
        out = self.dir / "d1q3.csv"
        args = ["convergence", "--lattice", "d1q3", "--ic", "gauss1d"]
        args += ["--resolutions", "50,100,200", "--max-error", "1e-12"]
        assert main(args + ["--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("N,eps,steps,end_time,err_rho")
        assert [line.split(",")[0] for line in lines[1:]] == ["50", "100", "200"]

    def test_convergence_needs_fine_run_in_2d(self) -> None:
        args = ["convergence", "--lattice", "d2q5", "--ic", "gauss2d"]
        assert main(args) == 2
        assert main(args + ["--resolutions", "30", "--fine-n", "100"]) == 2

    def test_run_writes_snapshots(self) -> None:
        out = self.dir / "snaps"
        args = ["run", "--lattice", "d2q5", "--ic", "gauss2d", "-N", "100"]
        args += ["--end-time", "1", "--snapshot-every", "10", "--out", str(out)]
        assert main(args) == 0
        files = sorted(out.glob("*.csv"))
        assert [f.name for f in files] == [
            f"snapshot_{k:06d}.csv" for k in (0, 10, 20, 30, 40, 50)
        ]
        assert files[0].read_text().startswith("# t=0\n# x,y,rho,u_x,u_y,theta\n")
        t, field = read_snapshot(files[-1])
        assert abs(t - 1.0) < 1e-15
        assert field.grid.shape == (100, 100)
        assert abs(field.grid.eps - 0.02) < 1e-15

        again = self.dir / "again"
        args = ["run", "--lattice", "d2q5", "--ic", f"file:{files[0]}"]
        assert main(args + ["--end-time", "1", "--out", str(again)]) == 0
        t_again, replayed = read_snapshot(again / files[-1].name)
        assert abs(t_again - t) < 1e-14
        np.testing.assert_array_equal(replayed.rho, field.rho)

    def test_snapshot_round_trip(self) -> None:
        out = self.dir / "snaps"
        args = ["run", "--lattice", "d1q3", "-N", "20", "--end-time", "0.5"]
        assert main(args + ["--out", str(out)]) == 0
        t, field = read_snapshot(out / "snapshot_000000.csv")
        assert t == 0.0
        np.testing.assert_allclose(field.grid.axis(0), np.arange(20) / 20, atol=1e-15)
        assert abs(field.rho.max() - 1.0) < 1e-15

    def test_threads_do_not_change_snapshots(self) -> None:
        outputs = []
        for threads in ("1", "8"):
            out = self.dir / f"threads{threads}"
            args = ["run", "--lattice", "d2q5-diatomic", "--ic", "gauss2d", "-N", "50"]
            args += ["--end-time", "1", "--snapshot-every", "5", "--threads", threads]
            assert main(args + ["--out", str(out)]) == 0
            outputs.append({f.name: f.read_bytes() for f in out.glob("*.csv")})
        assert outputs[0] == outputs[1]

    def test_moments_check(self) -> None:
        for name in ["d2q5-diatomic", "d3q7-diatomic", "d3q19"]:
            out = self.dir / f"{name}.json"
            assert main(["moments-check", "--lattice", name, "--out", str(out)]) == 0
            report = json.loads(out.read_text())
            assert report["constraints"]["passed"], name
        assert json.loads(out.read_text())["compatibility"]["passed"]

    def test_custom_family(self) -> None:
        out = self.dir / "family.json"
        args = ["moments-check", "--lattice", "d3q-family"]
        args += ["--rho0", "1", "--theta0", "2/5", "--alpha", "0", "--out", str(out)]
        assert main(args) == 0
        assert json.loads(out.read_text())["constraints"]["set"] == "D3Q13"
        args = ["moments-check", "--lattice", "d3q-family"]
        assert main(args + ["--rho0", "1", "--theta0", "1/10", "--alpha", "0"]) == 2

    def test_config_file(self) -> None:
        config = self.dir / "config.json"
        out = self.dir / "config-run"
        run = {"lattice": "d1q3", "n": 10, "end_time": 0.2}
        config.write_text(json.dumps({"run": run}))
        assert main(["--config", str(config), "run", "--out", str(out)]) == 0
        t, field = read_snapshot(out / "snapshot_000002.csv")
        assert field.grid.shape == (10,) and abs(t - 0.2) < 1e-15

        config.write_text(json.dumps({"run": {"grid": 10}}))
        assert main(["--config", str(config), "run", "--out", str(out)]) == 2

    def test_usage_errors(self) -> None:
        assert main(["stability", "--lattice", "d2q9"]) == 2
        assert main(["run", "--lattice", "d1q3", "--ic", "square"]) == 2
        assert main(["run", "--lattice", "d2q5", "--ic", "gauss1d"]) == 2
        assert main(["nonsense"]) == 2

    def test_bad_numbers(self) -> None:
        family = ["moments-check", "--lattice", "d3q-family", "--theta0", "2/5"]
        assert main(family + ["--rho0", "abc"]) == 2
        assert main(family + ["--rho0", "1/0"]) == 2
        args = ["run", "--lattice", "d1q3", "-N", "10", "--end-time", "0.2"]
        args += ["--snapshot-every", "-1", "--out", str(self.dir / "snaps")]
        assert main(args) == 2
        assert not (self.dir / "snaps").exists()

    def test_end_times(self) -> None:
        result = CliRunner().invoke(cli, ["end-times"])
        assert result.exit_code == 0, result.output
        lines = result.output.splitlines()
        assert lines[0] == "N,eps,steps,achieved,gap"
        assert lines[1].startswith("25,0.080000000000000002,26,2.08")
        assert len(lines) == 5
