#!/usr/bin/env python3
"""Render convergence-study CSVs as log-scale error plots.

Input files follow the study contract: a header row
``method,k,rel_error,sum_dev,seconds`` and one row per method per
iteration. Each CSV becomes one panel (two CSVs give the side-by-side
corrected/uncorrected layout); every method is one curve, styled
consistently across figures by its pole kind (color) and
desingularization mode (line style).

    python render.py --csv study.csv [--csv other.csv] --out fig.png
                     [--title TITLE] [--y-floor 1e-16]
"""

import argparse
import csv
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

EXPECTED_COLUMNS = ("method", "k", "rel_error")

POLE_COLORS = {
    "poly": "tab:blue",
    "si-geomean": "tab:orange",
    "si-time": "tab:green",
    "eds": "tab:red",
}
DESING_STYLES = {
    "none": "-",
    "rank1": "--",
    "proj": ":",
    "implicit": "-.",
}
FALLBACK_COLORS = ("tab:purple", "tab:brown", "tab:pink", "tab:gray", "tab:olive", "tab:cyan")


@dataclass
class PlotSpec:
    csv_paths: list
    out_path: str
    title: str = ""
    y_floor: float = 1e-16
    panel_titles: list = field(default_factory=list)

    def validate(self):
        if not self.csv_paths:
            raise ValueError("at least one CSV path is required")
        if not self.y_floor > 0:
            raise ValueError("y-floor must be positive")


def method_style(label):
    """(color, linestyle) for a method label, stable across figures."""
    pole, _, desing = label.partition("+")
    color = POLE_COLORS.get(pole)
    style = DESING_STYLES.get(desing, "-")
    if color is None:
        color = FALLBACK_COLORS[hash(label) % len(FALLBACK_COLORS)]
    return color, style


def read_series(path):
    """{method: (ks, rel_errors)} in file order, validated against the
    study header contract."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in EXPECTED_COLUMNS if c not in (reader.fieldnames or ())]
        if missing:
            raise ValueError(f"{path}: missing column(s) {', '.join(missing)}")
        series = {}
        for row in reader:
            try:
                k = int(row["k"])
                err = float(row["rel_error"])
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}: malformed row {row!r}") from exc
            ks, errs = series.setdefault(row["method"], ([], []))
            ks.append(k)
            errs.append(err)
    if not series:
        raise ValueError(f"{path}: no data rows")
    return series


def render(spec):
    """Write the figure for the spec; returns the output path."""
    spec.validate()
    panels = [read_series(p) for p in spec.csv_paths]

    fig, axes = plt.subplots(
        1, len(panels), figsize=(6.4 * len(panels), 4.8), dpi=150, squeeze=False
    )
    for i, (ax, series) in enumerate(zip(axes[0], panels)):
        for method in sorted(series):
            ks, errs = series[method]
            floored = [max(e, spec.y_floor) for e in errs]
            color, style = method_style(method)
            ax.semilogy(ks, floored, label=method, color=color, linestyle=style)
        ax.set_xlabel("iteration")
        ax.set_ylabel("relative error")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=8)
        if spec.panel_titles and i < len(spec.panel_titles):
            ax.set_title(spec.panel_titles[i])
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    fig.savefig(spec.out_path)
    plt.close(fig)
    return spec.out_path


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--csv", action="append", required=True, help="study CSV (repeat for panels)"
    )
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--title", default="")
    parser.add_argument("--panel-title", action="append", default=[])
    parser.add_argument("--y-floor", type=float, default=1e-16)
    args = parser.parse_args(argv)

    spec = PlotSpec(
        csv_paths=args.csv,
        out_path=args.out,
        title=args.title,
        y_floor=args.y_floor,
        panel_titles=args.panel_title,
    )
    try:
        render(spec)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
