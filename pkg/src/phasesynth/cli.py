"""Command-line front end.

Subcommands:
  states     inspect number-state amplitudes and phase summaries of a state
  simulate   run a sweep from a JSON config and emit CSV/JSON data files
  validate   run the built-in invariant suite and report residuals

``simulate`` accepts a config path or one of the bundled preset names
(``fig2``, ``fig3``, ``fig4``).  The environment variable
``PHASESYNTH_THREADS`` caps parallelism across phase settings.
"""

from __future__ import annotations

import argparse
import datetime
import importlib.resources
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import detector as det
from . import experiment as exp
from . import fock
from . import optics
from . import phase as ph

PRESETS = ("fig2", "fig3", "fig4")
ANALYTIC_GRID_POINTS = 512


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("PHASESYNTH_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------

def _state_for_args(args):
    if args.binomial is not None:
        return fock.binomial_state(args.binomial), f"binomial N={args.binomial}"
    if args.coherent_mean is not None:
        spec = {"kind": "coherent", "mean_photon": args.coherent_mean}
        return exp.state_from_spec(spec), f"coherent mean={args.coherent_mean}"
    if args.squeezed_approx is not None:
        spec = {"kind": "squeezed_approx", "N": args.squeezed_approx}
        return exp.state_from_spec(spec), f"squeezed approximation to binomial N={args.squeezed_approx}"
    if args.spec is not None:
        return exp.state_from_spec(json.loads(args.spec)), "custom spec"
    raise SystemExit("states: give one of --binomial, --coherent-mean, --squeezed-approx, --spec")


def cmd_states(args) -> int:
    state, label = _state_for_args(args)
    if isinstance(state, fock.StateEnsemble):
        raise SystemExit("states: ensembles are not supported by this table view")
    n = np.arange(state.cutoff + 1)
    thetas = np.linspace(0.0, 2.0 * math.pi, 9, endpoint=False)
    dens = ph.canonical_density(state, thetas)
    report = {
        "state": label,
        "cutoff": state.cutoff,
        "mean_photon": fock.mean_photon(state),
        "amplitudes": [[float(a.real), float(a.imag)] for a in state.amplitudes],
        "canonical_density": {f"{t:.6f}": float(v) for t, v in zip(thetas, dens)},
    }
    if args.squeezed_approx is not None:
        N = args.squeezed_approx
        beta = fock.binomial_state(N).amplitudes.real
        ratios = {}
        cN = state.amplitudes[N]
        for k in range(N + 1):
            ratios[f"c{k}/c{N}"] = {
                "value": float(abs(state.amplitudes[k] / cN)),
                "binomial": float(beta[k] / beta[N]),
            }
        report["ratio_table"] = ratios
    if args.json:
        print(json.dumps(report, indent=2))
        return 0
    print(f"state: {label}")
    print(f"mean photon number: {report['mean_photon']:.10g}")
    print("  n   amplitude            |c_n|^2")
    for k in n:
        a = state.amplitudes[k]
        print(f"{k:4d}  {a.real:+.8f}{a.imag:+.8f}j  {abs(a) ** 2:.8f}")
    if "ratio_table" in report:
        print("coefficient ratios against the binomial target:")
        for name, row in report["ratio_table"].items():
            print(f"  {name}: {row['value']:.4f}  (binomial {row['binomial']:.4f})")
    print("canonical density samples (theta: value):")
    for t, v in zip(thetas, dens):
        print(f"  {t:8.6f}: {v:.8f}")
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _load_config(spec: str) -> dict:
    if spec in PRESETS:
        text = importlib.resources.files("phasesynth").joinpath(f"presets/{spec}.json").read_text()
        return json.loads(text)
    path = Path(spec)
    if not path.exists():
        raise SystemExit(f"simulate: config {spec!r} is neither a preset {PRESETS} nor a readable file")
    return json.loads(path.read_text())


def cmd_simulate(args) -> int:
    data = _load_config(args.config)
    if args.seed is not None:
        data["seed"] = args.seed
    try:
        config = exp.ExperimentConfig.from_json(data)
    except (KeyError, ValueError) as err:
        print(f"simulate: invalid config: {err}", file=sys.stderr)
        return 1
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    runner = exp.run_exact if args.mode == "exact" else exp.run_monte_carlo
    try:
        result = runner(config, max_workers=_threads())
    except ValueError as err:
        print(f"simulate: numerical guard tripped: {err}", file=sys.stderr)
        return 1

    signal = exp.state_from_spec(config.signal)
    grid = np.linspace(0.0, 2.0 * math.pi, ANALYTIC_GRID_POINTS, endpoint=False)
    analytic = ph.canonical_distribution(signal, grid)

    points_path = out_dir / "points.csv"
    analytic_path = out_dir / "analytic.csv"
    points_path.write_text(ph.distribution_to_csv(result.points))
    analytic_path.write_text(ph.distribution_to_csv(analytic))

    summary = {
        "tool": "phasesynth",
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "mode": args.mode,
        "seed": config.seed,
        "config": config.to_json(),
        "outputs": {"points_csv": str(points_path), "analytic_csv": str(analytic_path)},
        "desired_event_rate": result.desired_event_rate,
        "raw_event_probs": [list(row) for row in result.raw_event_probs],
        "comparison_to_canonical": exp.compare_to_canonical(result, signal),
        "diagnostics": result.diagnostics,
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"wrote {points_path}, {analytic_path}, {out_dir / 'summary.json'}")
    print(f"desired event rate: {result.desired_event_rate:.6g}")
    return 0


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def _check_unitarity(fault: bool):
    worst = 0.0
    for N in (1, 2, 3, 5):
        m = optics.dft_transform(N).matrix.copy()
        if fault:
            m = m * (1.0 + 1e-6)
        gram = m.conj().T @ m
        worst = max(worst, float(np.max(np.abs(gram - np.eye(m.shape[0])))))
    m = optics.compose(optics.eight_port_network(0.3)).matrix
    gram = m.conj().T @ m
    worst = max(worst, float(np.max(np.abs(gram - np.eye(4)))))
    return worst, worst < 1e-12


def _check_engine_equivalence(fault: bool):
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(3):
        elements = []
        for _ in range(5):
            if rng.random() < 0.5:
                a, b = rng.choice(4, size=2, replace=False)
                elements.append(optics.BeamSplitter(int(a), int(b)))
            else:
                elements.append(optics.PhaseShifter(int(rng.integers(4)), float(rng.uniform(0, 2 * math.pi))))
        net = optics.Network(4, tuple(elements))
        amps = rng.normal(size=3) + 1j * rng.normal(size=3)
        amps /= np.linalg.norm(amps)
        state = optics.MultiModeState(4, {(0, 1, 0, 2): amps[0], (1, 1, 1, 0): amps[1],
                                          (0, 0, 0, 3): amps[2]})
        via_matrix = optics.evolve(state, optics.compose(net))
        via_elements = optics.evolve_sequential(state, net)
        keys = set(via_matrix.terms) | set(via_elements.terms)
        diff = max(abs(via_matrix.terms.get(k, 0j) - via_elements.terms.get(k, 0j)) for k in keys)
        if fault:
            diff += 1e-9
        worst = max(worst, float(diff))
    return worst, worst < 1e-11


def _check_event_rate(fault: bool):
    state = optics.MultiModeState(4, {(0, 3, 0, 0): 1.0})
    out = optics.evolve(state, optics.dft_transform(3))
    probs = out.probabilities()
    target = 3.0 / 32.0 + (1e-6 if fault else 0.0)
    worst = max(abs(probs.get(tuple(0 if j == m else 1 for j in range(4)), 0.0) - target)
                for m in range(4))
    return worst, worst < 1e-12


def _check_bernoulli_roundtrip(fault: bool):
    rng = np.random.default_rng(5)
    arr = rng.random((5, 5, 5, 5)) + 0.5  # bounded away from zero cells
    arr /= arr.sum()
    dist = det.JointCountDistribution.from_array(arr)
    model = det.DetectorModel(0.7 if not fault else 0.7000001)
    back = det.invert_efficiency(det.apply_efficiency(dist, det.DetectorModel(0.7)), model)
    diff = np.max(np.abs(back.to_array() - arr))
    return float(diff), float(diff) < 1e-9


def _check_parseval(fault: bool):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(5):
        c = rng.normal(size=4) + 1j * rng.normal(size=4)
        c /= np.linalg.norm(c)
        state = fock.FockVector(c)
        for delta in rng.uniform(0, 2 * math.pi, size=3):
            total = sum(ph.projection_probability(state, ph.truncated_phase_state(
                2 * math.pi * m / 4 + delta, 3)) for m in range(4))
            worst = max(worst, abs(total - 1.0))
    if fault:
        worst += 1e-9
    return float(worst), float(worst) < 1e-12


CHECKS = {
    "unitarity": _check_unitarity,
    "engine_equivalence": _check_engine_equivalence,
    "event_rate_3_32": _check_event_rate,
    "bernoulli_roundtrip": _check_bernoulli_roundtrip,
    "parseval": _check_parseval,
}


def cmd_validate(args) -> int:
    results = {}
    ok_all = True
    for name, check in CHECKS.items():
        residual, ok = check(fault=(args.inject_fault == name))
        results[name] = {"residual": residual, "pass": bool(ok)}
        ok_all &= ok
    if args.json:
        print(json.dumps({"checks": results, "pass": ok_all}, indent=2))
    else:
        for name, row in results.items():
            print(f"{'PASS' if row['pass'] else 'FAIL'}  {name:22s} residual={row['residual']:.3e}")
        print("overall:", "PASS" if ok_all else "FAIL")
    return 0 if ok_all else 1


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phasesynth", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"phasesynth {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_states = sub.add_parser("states", help="inspect a state in the number basis")
    p_states.add_argument("--binomial", type=int, default=None, metavar="N")
    p_states.add_argument("--coherent-mean", type=float, default=None, metavar="MEAN")
    p_states.add_argument("--squeezed-approx", type=int, default=None, metavar="N")
    p_states.add_argument("--spec", type=str, default=None, help="JSON state spec")
    p_states.add_argument("--json", action="store_true")
    p_states.set_defaults(func=cmd_states)

    p_sim = sub.add_parser("simulate", help="run a sweep and write data files")
    p_sim.add_argument("--config", required=True,
                       help=f"config path or preset name {PRESETS}")
    p_sim.add_argument("--mode", choices=("exact", "mc"), default="exact")
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_sim.set_defaults(func=cmd_simulate)

    p_val = sub.add_parser("validate", help="run the built-in invariant suite")
    p_val.add_argument("--json", action="store_true")
    p_val.add_argument("--inject-fault", choices=tuple(CHECKS), default=None,
                       help="test hook: force the named check to fail")
    p_val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
