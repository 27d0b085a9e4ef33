import json

import pytest

from robinlap.cli import main


def run(args):
    return main(args)


class TestConfig:
    def test_invalid_grid_size_exits_2(self, tmp_path, capsys):
        code = run(["solve", "--N", "7", "--outdir", str(tmp_path)])
        assert code == 2
        assert "config error" in capsys.readouterr().err

    def test_missing_config_file_exits_2(self, tmp_path):
        code = run(["solve", "--config", str(tmp_path / "nope.toml"), "--outdir", str(tmp_path)])
        assert code == 2

    def test_toml_config_file(self, tmp_path):
        cfg = tmp_path / "run.toml"
        cfg.write_text(
            '[grid]\nd = 2\nN = 16\nNd = 8\n\n'
            '[coefficient]\nexpr = "0.0*x1"\np = 3.0\n\n'
            '[solve]\nlambdas = [[-2.0, 0.0]]\n'
        )
        out = tmp_path / "out"
        assert run(["solve", "--config", str(cfg), "--outdir", str(out)]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["grid"]["N"] == 16
        assert manifest["pass"] is True

    def test_json_config_file(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"grid": {"N": 16, "Nd": 8}}))
        out = tmp_path / "out"
        assert run(["lambda0", "--config", str(cfg), "--coeff", "0.0*x1",
                    "--outdir", str(out)]) == 0

    def test_flag_overrides_file(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"grid": {"N": 16, "Nd": 8}}))
        out = tmp_path / "out"
        run(["lambda0", "--config", str(cfg), "--coeff", "0.0*x1", "--N", "32",
             "--outdir", str(out)])
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["grid"]["N"] == 32


class TestCommands:
    def test_triple_check_passes(self, tmp_path):
        out = tmp_path / "out"
        assert run(["triple-check", "--outdir", str(out)]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["checks"]["green_residual"] <= 1e-12
        assert manifest["checks"]["krein_deviation"] <= 1e-10

    def test_lambda0_certificate(self, tmp_path):
        out = tmp_path / "out"
        code = run(["lambda0", "--coeff", "1.0 + 0.0*x1", "--p", "3.0",
                    "--N", "32", "--Nd", "16", "--outdir", str(out)])
        assert code == 0
        payload = json.loads((out / "lambda0.json").read_text())
        assert payload["certified_norm"] <= 0.5 + 1e-6
        assert payload["lambda0"] < 0

    def test_solve_writes_fields_and_summary(self, tmp_path):
        out = tmp_path / "out"
        code = run(["solve", "--coeff", "1.0 + 0.0*x1", "--p", "3.0",
                    "--lambda=-4", "--lambda=-1,1", "--N", "16", "--Nd", "8",
                    "--outdir", str(out)])
        assert code == 0
        summary = json.loads((out / "solve_summary.json").read_text())
        assert len(summary) == 2
        assert all(s["residual_pde"] <= 1e-8 for s in summary)
        assert (out / "field_0.bin").exists()
        assert (out / "density_1.csv").exists()

    def test_zero_coefficient_solve_has_zero_correction(self, tmp_path):
        out = tmp_path / "out"
        assert run(["solve", "--coeff", "0.0*x1", "--lambda=-2", "--N", "16",
                    "--Nd", "8", "--outdir", str(out)]) == 0
        density = (out / "density_0.csv").read_text().splitlines()[1:]
        values = [abs(float(row.split(",")[1])) for row in density]
        assert max(values) <= 1e-12

    def test_oracle_compare_halving_column(self, tmp_path):
        out = tmp_path / "out"
        code = run(["oracle-compare", "--coeff", "r**(-0.25) * ball(1.0)", "--p", "3.0",
                    "--grids", "32,64,128", "--outdir", str(out)])
        assert code == 0
        rows = (out / "oracle_compare.csv").read_text().splitlines()[2:]
        ratios = [float(r.split(",")[4]) for r in rows]
        assert all(r >= 2.0 for r in ratios)

    def test_estimates_battery(self, tmp_path):
        out = tmp_path / "out"
        code = run(["estimates", "--coeff", "1.0 + 0.0*x1", "--p", "3.0",
                    "--grids", "16,32", "--outdir", str(out)])
        assert code == 0
        assert (out / "estimates.csv").exists()
        assert (out / "klmn.json").exists()


class TestManifest:
    def test_outputs_hashed_and_deterministic(self, tmp_path):
        args = ["solve", "--coeff", "1.0 + 0.0*x1", "--lambda=-4",
                "--N", "16", "--Nd", "8", "--seed", "3"]
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run(args + ["--outdir", str(out1)]) == 0
        assert run(args + ["--outdir", str(out2)]) == 0
        m1 = json.loads((out1 / "manifest.json").read_text())
        m2 = json.loads((out2 / "manifest.json").read_text())
        named1 = {o["path"].rsplit("/", 1)[-1]: o["sha256"] for o in m1["outputs"]}
        named2 = {o["path"].rsplit("/", 1)[-1]: o["sha256"] for o in m2["outputs"]}
        assert named1 == named2
        listed = {o["path"].rsplit("/", 1)[-1] for o in m1["outputs"]}
        on_disk = {p.name for p in out1.iterdir()} - {"manifest.json"}
        assert listed == on_disk

    def test_versions_recorded(self, tmp_path):
        out = tmp_path / "out"
        run(["triple-check", "--outdir", str(out)])
        manifest = json.loads((out / "manifest.json").read_text())
        assert set(manifest["versions"]) == {"robinlap", "numpy", "scipy", "python"}
