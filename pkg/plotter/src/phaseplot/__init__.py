"""Render phase-distribution CSVs into figures.

Input files follow the simulator's CSV contract: optional ``#`` comment
lines, a ``theta,value,stderr`` header, then rows of three floats (radians,
1/radian, 1/radian; stderr 0 means exact).  The tool draws the analytic
curve as a line and the measured points as markers with error bars where the
stderr column is nonzero.  It computes nothing else: ``--dump`` echoes
exactly the values it parsed.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

__version__ = "0.1.0"

RANGE_CHOICES = ("0-2pi", "centered")


class CsvFormatError(Exception):
    def __init__(self, path, line_number, message):
        super().__init__(f"{path}:{line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class PlotSpec:
    points_path: Path
    curve_path: Path
    out_path: Path
    title: str = ""
    theta_range: str = "0-2pi"


@dataclass(frozen=True)
class Series:
    thetas: list
    values: list
    stderrs: list

    def __len__(self):
        return len(self.thetas)


def parse_csv(path: Path) -> Series:
    thetas, values, stderrs = [], [], []
    for line_number, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.replace(" ", "") == "theta,value,stderr":
            continue
        fields = line.split(",")
        if len(fields) != 3:
            raise CsvFormatError(path, line_number, f"expected 3 fields, got {len(fields)}")
        try:
            t, v, e = (float(f) for f in fields)
        except ValueError as err:
            raise CsvFormatError(path, line_number, str(err)) from None
        thetas.append(t)
        values.append(v)
        stderrs.append(e)
    return Series(thetas, values, stderrs)


def recenter(series: Series, theta_range: str) -> Series:
    """Optionally map angles from [0, 2 pi) to [-pi, pi) for display."""
    if theta_range == "0-2pi":
        return series
    rows = sorted(
        ((t - 2 * math.pi if t >= math.pi else t), v, e)
        for t, v, e in zip(series.thetas, series.values, series.stderrs)
    )
    return Series([r[0] for r in rows], [r[1] for r in rows], [r[2] for r in rows])


def render(spec: PlotSpec) -> None:
    points = parse_csv(spec.points_path)
    curve = parse_csv(spec.curve_path)
    if len(points) == 0:
        print(f"warning: no data rows in {spec.points_path}; drawing curve only",
              file=sys.stderr)

    points_v = recenter(points, spec.theta_range)
    curve_v = recenter(curve, spec.theta_range)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(curve_v.thetas, curve_v.values, "-", color="black", linewidth=1.2,
            label="theory")
    if len(points_v):
        has_err = any(e != 0.0 for e in points_v.stderrs)
        if has_err:
            ax.errorbar(points_v.thetas, points_v.values, yerr=points_v.stderrs,
                        fmt="o", color="tab:blue", markersize=4, capsize=2,
                        linestyle="none", label="measured")
        else:
            ax.plot(points_v.thetas, points_v.values, "o", color="tab:blue",
                    markersize=4, label="measured")
    ax.set_xlabel(r"$\theta$ [rad]")
    ax.set_ylabel(r"$P(\theta)$ [1/rad]")
    if spec.title:
        ax.set_title(spec.title)
    ax.set_ylim(bottom=0.0)
    ax.legend(loc="best", frameon=False)
    fig.tight_layout()
    spec.out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.out_path, dpi=150)
    plt.close(fig)


def dump(spec: PlotSpec) -> None:
    """Echo the parsed values exactly as plotted (17 significant digits)."""
    for label, path in (("points", spec.points_path), ("curve", spec.curve_path)):
        series = parse_csv(path)
        print(f"# dump {label} {path}")
        print("theta,value,stderr")
        for t, v, e in zip(series.thetas, series.values, series.stderrs):
            print(f"{t:.17g},{v:.17g},{e:.17g}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plot", description=__doc__)
    parser.add_argument("--points", required=True, type=Path, help="measured points CSV")
    parser.add_argument("--curve", required=True, type=Path, help="analytic curve CSV")
    parser.add_argument("--out", required=True, type=Path, help="output image path")
    parser.add_argument("--title", default="", help="figure title")
    parser.add_argument("--range", choices=RANGE_CHOICES, default="0-2pi",
                        dest="theta_range", help="theta axis convention")
    parser.add_argument("--dump", action="store_true",
                        help="echo the parsed values instead of writing an image")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(points_path=args.points, curve_path=args.curve,
                    out_path=args.out, title=args.title, theta_range=args.theta_range)
    try:
        if args.dump:
            dump(spec)
        else:
            render(spec)
    except FileNotFoundError as err:
        print(f"plot: {err}", file=sys.stderr)
        return 2
    except CsvFormatError as err:
        print(f"plot: malformed CSV: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
