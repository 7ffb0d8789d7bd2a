"""Secondary acceptance: render the three bundled scenario outputs."""

import subprocess
import sys

import pytest

import phaseplot

phasesynth = pytest.importorskip("phasesynth", reason="primary package not installed")


@pytest.mark.parametrize("preset,mode", [("fig2", "exact"), ("fig3", "exact"), ("fig4", "mc")])
def test_c10_render_scenario_outputs(tmp_path, preset, mode, capsys):
    data_dir = tmp_path / preset
    proc = subprocess.run(
        [sys.executable, "-m", "phasesynth.cli", "simulate", "--config", preset,
         "--mode", mode, "--out", str(data_dir)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr

    out = tmp_path / f"{preset}.png"
    code = phaseplot.main(["--points", str(data_dir / "points.csv"),
                           "--curve", str(data_dir / "analytic.csv"),
                           "--out", str(out), "--title", preset])
    assert code == 0
    assert out.exists() and out.stat().st_size > 1000

    # --dump echoes the parsed values exactly
    code = phaseplot.main(["--points", str(data_dir / "points.csv"),
                           "--curve", str(data_dir / "analytic.csv"),
                           "--out", str(out), "--dump"])
    assert code == 0
    dumped = [l for l in capsys.readouterr().out.splitlines()
              if l and not l.startswith("#") and l != "theta,value,stderr"]
    expect = []
    for name in ("points.csv", "analytic.csv"):
        for line in (data_dir / name).read_text().splitlines():
            if line and not line.startswith("#") and line != "theta,value,stderr":
                expect.append(line)
    assert dumped == expect
    print(f"ACCEPTANCE 10 plotter-{preset}: PASS ({out})")
