import json
import math

import numpy as np
import pytest

from phasesynth import cli


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestStates:
    def test_binomial_amplitudes(self, capsys):
        code, out, _ = run_cli(capsys, "states", "--binomial", "3", "--json")
        assert code == 0
        data = json.loads(out)
        amps = [a[0] for a in data["amplitudes"]]
        expect = [1 / math.sqrt(8), math.sqrt(3 / 8), math.sqrt(3 / 8), 1 / math.sqrt(8)]
        assert np.allclose(amps, expect, atol=1e-12)

    def test_coherent_mean(self, capsys):
        code, out, _ = run_cli(capsys, "states", "--coherent-mean", "0.5", "--json")
        data = json.loads(out)
        assert abs(data["mean_photon"] - 0.5) < 1e-8

    def test_squeezed_approx_ratio_table(self, capsys):
        code, out, _ = run_cli(capsys, "states", "--squeezed-approx", "3")
        assert code == 0
        assert "1.0146" in out

    def test_requires_a_selection(self, capsys):
        with pytest.raises(SystemExit):
            cli.main(["states"])


class TestSimulate:
    def test_preset_run_writes_files(self, tmp_path, capsys):
        out_dir = tmp_path / "run"
        code, out, _ = run_cli(capsys, "simulate", "--config", "fig2",
                               "--mode", "exact", "--out", str(out_dir))
        assert code == 0
        points = (out_dir / "points.csv").read_text()
        assert points.startswith("#")
        assert len(points.strip().splitlines()) == 2 + 16
        summary = json.loads((out_dir / "summary.json").read_text())
        assert summary["outputs"]["points_csv"].endswith("points.csv")
        assert summary["mode"] == "exact"
        analytic = (out_dir / "analytic.csv").read_text()
        assert len(analytic.strip().splitlines()) == 2 + cli.ANALYTIC_GRID_POINTS

    def test_byte_identical_reruns(self, tmp_path, capsys):
        cfg = {
            "signal": {"kind": "coherent", "mean_photon": 0.076, "cutoff": 8},
            "reference": {"kind": "squeezed_approx", "N": 3, "cutoff": 20},
            "settings": 2, "trials_per_setting": 5000, "seed": 99,
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        blobs = []
        for tag in ("a", "b"):
            out_dir = tmp_path / tag
            code, *_ = run_cli(capsys, "simulate", "--config", str(cfg_path),
                               "--mode", "mc", "--out", str(out_dir))
            assert code == 0
            blobs.append((out_dir / "points.csv").read_bytes())
        assert blobs[0] == blobs[1]

    def test_seed_override_changes_mc_output(self, tmp_path, capsys):
        cfg = {
            "signal": {"kind": "coherent", "mean_photon": 0.076, "cutoff": 8},
            "reference": {"kind": "binomial", "N": 3},
            "settings": 1, "trials_per_setting": 5000, "seed": 1,
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        blobs = []
        for seed, tag in ((1, "a"), (2, "b")):
            out_dir = tmp_path / tag
            run_cli(capsys, "simulate", "--config", str(cfg_path), "--mode", "mc",
                    "--out", str(out_dir), "--seed", str(seed))
            blobs.append((out_dir / "points.csv").read_bytes())
        assert blobs[0] != blobs[1]

    def test_csv_round_trip_precision(self, tmp_path, capsys):
        out_dir = tmp_path / "run"
        run_cli(capsys, "simulate", "--config", "fig2", "--mode", "exact",
                "--out", str(out_dir))
        for line in (out_dir / "points.csv").read_text().splitlines():
            if line.startswith("#") or line.startswith("theta"):
                continue
            for tok in line.split(","):
                assert f"{float(tok):.17g}" == tok

    def test_missing_config_errors(self, tmp_path, capsys):
        with pytest.raises(SystemExit):
            cli.main(["simulate", "--config", str(tmp_path / "nope.json"),
                      "--out", str(tmp_path / "o")])

    def test_invalid_config_structured_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"signal": {"kind": "coherent", "mean_photon": 0.1}}))
        code, _, err = run_cli(capsys, "simulate", "--config", str(bad),
                               "--out", str(tmp_path / "o"))
        assert code == 1
        assert "invalid config" in err

    def test_photon_guard_structured_error(self, tmp_path, capsys):
        cfg = tmp_path / "guard.json"
        cfg.write_text(json.dumps({
            "signal": {"kind": "number", "n": 10},
            "reference": {"kind": "binomial", "N": 3},
            "photon_limit": 6,
        }))
        code, _, err = run_cli(capsys, "simulate", "--config", str(cfg),
                               "--out", str(tmp_path / "o"))
        assert code == 1
        assert "guard" in err

    def test_threads_env_var_keeps_output_identical(self, tmp_path, capsys, monkeypatch):
        cfg = {
            "signal": {"kind": "coherent", "mean_photon": 0.076, "cutoff": 8},
            "reference": {"kind": "binomial", "N": 3},
            "settings": 4, "trials_per_setting": 4000, "seed": 5,
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        blobs = []
        for threads, tag in (("1", "a"), ("4", "b")):
            monkeypatch.setenv("PHASESYNTH_THREADS", threads)
            out_dir = tmp_path / tag
            code, *_ = run_cli(capsys, "simulate", "--config", str(cfg_path),
                               "--mode", "mc", "--out", str(out_dir))
            assert code == 0
            blobs.append((out_dir / "points.csv").read_bytes())
        assert blobs[0] == blobs[1]


class TestValidate:
    def test_all_checks_pass(self, capsys):
        code, out, _ = run_cli(capsys, "validate")
        assert code == 0
        assert "overall: PASS" in out

    def test_json_report(self, capsys):
        code, out, _ = run_cli(capsys, "validate", "--json")
        data = json.loads(out)
        assert data["pass"] is True
        assert set(data["checks"]) == set(cli.CHECKS)
        for row in data["checks"].values():
            assert row["pass"] is True

    @pytest.mark.parametrize("name", sorted(cli.CHECKS))
    def test_injected_fault_fails_named_check(self, capsys, name):
        code, out, _ = run_cli(capsys, "validate", "--json", "--inject-fault", name)
        assert code == 1
        data = json.loads(out)
        assert data["checks"][name]["pass"] is False
        for other, row in data["checks"].items():
            if other != name:
                assert row["pass"] is True
