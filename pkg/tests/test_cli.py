import json

import numpy as np
import pytest

from socmorse.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    RunConfig,
    build_transfer_spec,
    cmd_scan,
    config_to_text,
    main,
    parse_config_text,
)
from socmorse.errors import ConfigError

CANONICAL = """
# canonical transfer problem
transfer.depth_A = 8
transfer.alpha = 1.6
transfer.t_f = 10
design.c = 0.1
"""


class TestConfigParsing:
    def test_defaults(self):
        cfg = parse_config_text("")
        assert cfg == RunConfig()
        assert cfg.depth_A == 8.0
        assert cfg.scheme == "raman"

    def test_comments_and_values(self):
        cfg = parse_config_text(CANONICAL)
        assert cfg.depth_A == 8.0
        assert cfg.c == 0.1

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            parse_config_text("transfer.mass = 1")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError):
            parse_config_text("design.c = 0.1\ndesign.c = 0.2")

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigError):
            parse_config_text("grid.points = many")

    def test_missing_equals_rejected(self):
        with pytest.raises(ConfigError):
            parse_config_text("just some text")

    def test_range_grid(self):
        cfg = parse_config_text("noise.lambda = 0:1:0.5")
        assert cfg.lambda_grid == (0.0, 0.5, 1.0)

    def test_list_grid(self):
        cfg = parse_config_text("noise.lambda_prime = 0.1, 0.4, 0.9")
        assert cfg.lambda_prime_grid == (0.1, 0.4, 0.9)

    def test_snapshot_round_trip(self):
        cfg = parse_config_text(CANONICAL)
        again = parse_config_text(config_to_text(cfg))
        assert again == cfg

    def test_interacting_default_couplings(self):
        cfg = parse_config_text("transfer.scheme = so_direction_interacting")
        spec = build_transfer_spec(cfg)
        assert spec.g11 == pytest.approx(0.3, rel=1e-10)
        assert spec.g22 == pytest.approx(0.2, abs=0.005)
        assert spec.g12 == pytest.approx(0.115, abs=0.005)


class TestCommands:
    def test_design_artifacts_and_endpoints(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["design", "--out-dir", str(out)])
        assert code == EXIT_OK
        sidecar = json.loads((out / "schedule.json").read_text())
        assert sidecar["endpoints"]["b_start"] == pytest.approx(2.85, abs=1e-9)
        assert sidecar["endpoints"]["b_end"] == pytest.approx(3.15, abs=1e-9)
        assert sidecar["delta_e"] == pytest.approx(0.15)
        manifest = json.loads((out / "manifest.json").read_text())
        emitted = {p.name for p in out.iterdir()} - {"manifest.json"}
        listed = {path.rsplit("/", 1)[-1] for path in manifest["artifacts"]}
        assert emitted == listed  # every emitted file is in the manifest

    def test_design_deterministic(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["design", "--out-dir", str(out1)]) == EXIT_OK
        assert main(["design", "--out-dir", str(out2)]) == EXIT_OK
        assert (out1 / "schedule.csv").read_bytes() == (out2 / "schedule.csv").read_bytes()
        assert (out1 / "config_snapshot.txt").read_bytes() == \
            (out2 / "config_snapshot.txt").read_bytes()

    def test_design_wide_gap_sidecar(self, tmp_path):
        cfg = tmp_path / "wide.cfg"
        cfg.write_text("design.c = 1.5\n")
        out = tmp_path / "out"
        assert main(["design", "--config", str(cfg), "--out-dir", str(out)]) == EXIT_OK
        sidecar = json.loads((out / "schedule.json").read_text())
        assert sidecar["delta_e"] == pytest.approx(2.25)

    def test_simulate_twolevel(self, tmp_path):
        out = tmp_path / "out"
        code = main(["simulate", "--engine", "twolevel", "--out-dir", str(out)])
        assert code == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        assert report["final_fidelity"] >= 1 - 1e-6
        header = (out / "trajectory.csv").read_text().splitlines()[0]
        assert header.startswith("t,re_c1,im_c1,re_c2,im_c2,Px,Py,Pz")

    def test_simulate_grid_small(self, tmp_path):
        cfg = tmp_path / "grid.cfg"
        cfg.write_text("grid.points = 1024\ngrid.dt = 0.002\n")
        out = tmp_path / "out"
        code = main(["simulate", "--engine", "grid", "--config", str(cfg),
                     "--out-dir", str(out)])
        assert code == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        assert report["final_fidelity"] == pytest.approx(0.9966, abs=0.003)
        assert report["Pz_end"] == pytest.approx(-1.0, abs=0.01)
        density = (out / "final_density.csv").read_text().splitlines()
        assert density[0] == "x,dens_up,dens_down,dens_target"

    def test_scan_grid_engine_rejected_for_noise(self, tmp_path):
        cfg = tmp_path / "scan.cfg"
        cfg.write_text("transfer.scheme = so_direction\n")
        code = main(["scan", "--config", str(cfg), "--kind", "noise",
                     "--engine", "grid", "--out-dir", str(tmp_path / "out")])
        assert code == EXIT_CONFIG

    def test_systematic_scan_curvature_scalar(self, tmp_path):
        cfg = tmp_path / "scan.cfg"
        cfg.write_text("transfer.scheme = so_direction\nnoise.lambda = -0.15:0.15:0.05\n")
        out = tmp_path / "out"
        code = main(["scan", "--config", str(cfg), "--kind", "systematic",
                     "--out-dir", str(out)])
        assert code == EXIT_OK
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["scalars"]["curvature_at_zero"] < 0.0

    def test_scan_requires_tilt_scheme(self, tmp_path):
        out = tmp_path / "out"
        code = main(["scan", "--kind", "systematic", "--out-dir", str(out)])
        assert code == EXIT_CONFIG

    def test_scan_systematic(self, tmp_path):
        cfg = tmp_path / "scan.cfg"
        cfg.write_text("transfer.scheme = so_direction\nnoise.lambda = -0.2:0.2:0.2\n")
        out = tmp_path / "out"
        code = main(["scan", "--config", str(cfg), "--kind", "systematic",
                     "--out-dir", str(out)])
        assert code == EXIT_OK
        lines = (out / "scan_systematic.csv").read_text().splitlines()
        assert lines[0] == "lambda,fidelity"
        rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        assert rows.shape == (3, 2)
        assert rows[1, 1] == max(rows[:, 1])  # peak at zero error

    def test_scan_noise_with_oracle_column(self, tmp_path):
        cfg = tmp_path / "scan.cfg"
        cfg.write_text(
            "transfer.scheme = so_direction\n"
            "noise.lambda_prime = 0.0, 0.5\n"
            "noise.trajectories = 150\n"
        )
        out = tmp_path / "out"
        code = main(["scan", "--config", str(cfg), "--kind", "noise",
                     "--out-dir", str(out)])
        assert code == EXIT_OK
        lines = (out / "scan_noise.csv").read_text().splitlines()
        assert lines[0] == "lambda_prime,fidelity,oracle_fidelity,oracle_stderr"
        first = [float(v) for v in lines[1].split(",")]
        assert abs(first[1] - first[2]) <= 1e-6  # no noise: oracle is exact

    def test_empty_scan_grid_is_config_error(self, ctx, tmp_path):
        from dataclasses import replace

        cfg = replace(RunConfig(), scheme="so_direction", lambda_grid=())
        with pytest.raises(ConfigError):
            cmd_scan(cfg, "systematic", str(tmp_path / "out"))

    def test_missing_config_file(self, tmp_path):
        code = main(["design", "--config", str(tmp_path / "nope.cfg"),
                     "--out-dir", str(tmp_path / "out")])
        assert code == EXIT_CONFIG

    def test_infeasible_design_exit_code(self, tmp_path):
        cfg = tmp_path / "zero.cfg"
        cfg.write_text("transfer.alpha = 0\n")
        code = main(["design", "--config", str(cfg),
                     "--out-dir", str(tmp_path / "out")])
        assert code == EXIT_CONFIG

    def test_inspect_runs(self, capsys, tmp_path):
        code = main(["inspect", "--out-dir", str(tmp_path)])
        assert code == EXIT_OK
        captured = capsys.readouterr().out
        assert "bound states" in captured
        info = json.loads((tmp_path / "inspect.json").read_text())
        assert info["bound_count"] == 4
        assert info["levels"][0]["energy"] == -6.125


class TestReproduce:
    def test_fig2_shared_detuning(self, tmp_path):
        out = tmp_path / "out"
        code = main(["reproduce", "--figure", "fig2", "--out-dir", str(out)])
        assert code == EXIT_OK
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["scalars"]["max_delta_spread"] <= 1e-10
        header = (out / "fig2.csv").read_text().splitlines()[0]
        assert header == "t,Omega_alpha0.8,Omega_alpha1.2,Omega_alpha1.6,Omega_alpha2,Delta"

    def test_fig4_polarization_endpoints(self, tmp_path):
        out = tmp_path / "out"
        code = main(["reproduce", "--figure", "fig4", "--out-dir", str(out)])
        assert code == EXIT_OK
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["scalars"]["Pz_start"] == pytest.approx(1.0, abs=1e-9)
        assert manifest["scalars"]["Pz_end"] == pytest.approx(-1.0, abs=0.01)

    def test_fig7_compensation_curves(self, tmp_path):
        out = tmp_path / "out"
        code = main(["reproduce", "--figure", "fig7", "--out-dir", str(out)])
        assert code == EXIT_OK
        lines = (out / "fig7.csv").read_text().splitlines()
        assert lines[0] == "t,theta1,beta_noninteracting,beta_interacting"
        first = [float(v) for v in lines[1].split(",")]
        # the interacting Zeeman channel starts shifted by -g11 + g21, with
        # the constants derived from the density overlaps (close to -0.185)
        from dataclasses import replace

        spec = build_transfer_spec(replace(RunConfig(), scheme="so_direction_interacting"))
        assert first[3] - first[2] == pytest.approx(-spec.g11 + spec.g21, abs=1e-9)
        assert first[3] - first[2] == pytest.approx(-0.185, abs=0.002)
