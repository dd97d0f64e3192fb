"""Render convergence figures from experiment results CSV files.

One figure per invocation: ``voteplots --csv <results.csv> --kind
decay|onset|bound-overlay|margins --out <img> [--ref-slope s] [--logx
--logy] [--epsilon e]``.  Decay figures carry a least-squares slope per
curve (fitted on log-log points, zero-probability rows excluded and
counted); bound-overlay figures draw the analytic concentration floor
1 - 2*m!*exp(-2 eps^2 n / m!) beneath the empirical points.

Rendering is a pure function of the CSV bytes and the plot options:
figures embed no timestamps or tool-version metadata, so reruns are
byte-identical.  Exit codes: 0 success, 1 empty/unusable data, 2 bad
options or column-schema mismatch (the error lists the column diff).
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

REQUIRED_COLUMNS = (
    "experiment", "rule", "axiom", "model", "phi", "n", "z",
    "trials", "p_hat", "ci_low", "ci_high", "seed", "ms",
)
PLOT_KINDS = ("decay", "onset", "bound-overlay", "margins")
FACTORIAL_M = 6  # three candidates


class SchemaError(ValueError):
    """The CSV's columns do not match the fixed results schema."""


class DataError(ValueError):
    """The CSV parsed but holds no usable rows for the requested figure."""


class OptionError(ValueError):
    """The plot options are incomplete or inconsistent."""


@dataclass(frozen=True)
class PlotSpec:
    csv_paths: Tuple[str, ...]
    kind: str
    out_path: str
    ref_slope: Optional[float] = None
    logx: bool = False
    logy: bool = False
    epsilon: Optional[float] = None

    def __post_init__(self):
        if self.kind not in PLOT_KINDS:
            raise OptionError(
                f"unknown plot kind {self.kind!r}; choose from {', '.join(PLOT_KINDS)}"
            )
        if not self.csv_paths:
            raise OptionError("at least one --csv path is required")


def load_results(paths: Sequence[str]) -> List[Dict]:
    """Parse and pool results rows.  Unknown columns are ignored; missing
    required columns raise SchemaError naming the diff; a header-only or
    empty file raises DataError."""
    rows: List[Dict] = []
    for path in paths:
        with open(path, newline="") as handle:
            reader = csv.DictReader(handle)
            header = reader.fieldnames
            if header is None:
                raise DataError(f"{path}: file is empty")
            missing = [c for c in REQUIRED_COLUMNS if c not in header]
            if missing:
                extra = [c for c in header if c not in REQUIRED_COLUMNS]
                raise SchemaError(
                    f"{path}: missing required columns {missing}"
                    + (f" (ignorable extras present: {extra})" if extra else "")
                )
            for record in reader:
                rows.append({
                    "experiment": record["experiment"],
                    "rule": record["rule"],
                    "axiom": record["axiom"],
                    "model": record["model"],
                    "phi": float(record["phi"]),
                    "n": int(record["n"]),
                    "z": int(record["z"]),
                    "trials": int(record["trials"]),
                    "p_hat": float(record["p_hat"]),
                    "ci_low": float(record["ci_low"]),
                    "ci_high": float(record["ci_high"]),
                })
    if not rows:
        raise DataError("no data rows in " + ", ".join(paths))
    return rows


def fit_decay_slope(ns: Sequence[float], ps: Sequence[float]) -> Tuple[float, float, int]:
    """Least-squares slope and intercept of log(p) against log(n), with
    p = 0 rows excluded (their count is the third return value)."""
    kept = [(n, p) for n, p in zip(ns, ps) if p > 0]
    excluded = len(ps) - len(kept)
    if len(kept) < 2:
        raise DataError(
            f"slope fit needs at least 2 positive points, have {len(kept)} "
            f"({excluded} zero rows excluded)"
        )
    xs = np.log([n for n, _ in kept])
    ys = np.log([p for _, p in kept])
    slope, intercept = np.polyfit(xs, ys, 1)
    return float(slope), float(intercept), excluded


def _group(rows: Sequence[Dict]) -> Dict[tuple, List[Dict]]:
    grouped: Dict[tuple, List[Dict]] = {}
    for row in rows:
        key = (row["experiment"], row["rule"], row["axiom"], row["model"], row["phi"])
        grouped.setdefault(key, []).append(row)
    return {key: sorted(value, key=lambda r: r["n"]) for key, value in grouped.items()}


def hoeffding_floor(epsilon: float, n: np.ndarray) -> np.ndarray:
    """Analytic concentration lower bound for the histogram of n ballots
    over m! = 6 outcomes, clipped at zero for display."""
    return np.clip(1.0 - 2.0 * FACTORIAL_M * np.exp(
        -2.0 * epsilon * epsilon * n / FACTORIAL_M), 0.0, None)


def _apply_scales(ax, spec: PlotSpec, default_loglog: bool) -> None:
    logx, logy = spec.logx, spec.logy
    if default_loglog and not (spec.logx or spec.logy):
        logx = logy = True
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")


def _draw_reference(ax, spec: PlotSpec, x0: float, y0: float, xs: np.ndarray) -> None:
    if spec.ref_slope is None:
        return
    ys = y0 * (xs / x0) ** spec.ref_slope
    ax.plot(xs, ys, "k--", linewidth=1,
            label=f"reference slope {spec.ref_slope:g}")


def _render_decay(ax, rows, spec: PlotSpec) -> List[str]:
    messages = []
    anchor = None
    span = []
    for key, group in _group(rows).items():
        ns = [r["n"] for r in group]
        ps = [r["p_hat"] for r in group]
        kept = [(n, p) for n, p in zip(ns, ps) if p > 0]
        if len(kept) < 2:
            # exact margin rows and single-n experiments have no decay curve
            messages.append(
                f"[decay] skipped {key[1]}/{key[2]} phi={key[4]:g}: "
                f"{len(kept)} positive point(s), need 2"
            )
            continue
        slope, _, excluded = fit_decay_slope(ns, ps)
        label = f"{key[1]}/{key[2]} phi={key[4]:g} slope={slope:.3f}"
        ax.plot([n for n, _ in kept], [p for _, p in kept], marker="o", label=label)
        messages.append(
            f"[decay] {key[1]}/{key[2]} phi={key[4]:g}: slope={slope:.6f} "
            f"excluded_zero_rows={excluded}"
        )
        if anchor is None:
            anchor = kept[0]
        span.extend(n for n, _ in kept)
    if anchor is None:
        raise DataError("no group has the two positive (n, p_hat) points a "
                        "decay fit needs")
    _draw_reference(ax, spec, anchor[0], anchor[1],
                    np.geomspace(min(span), max(span), 64))
    _apply_scales(ax, spec, default_loglog=True)
    ax.set_xlabel("electorate size n")
    ax.set_ylabel("violation probability")
    return messages


def _render_onset(ax, rows, spec: PlotSpec) -> List[str]:
    for key, group in _group(rows).items():
        ax.plot([r["n"] for r in group], [r["p_hat"] for r in group],
                marker="o", label=f"{key[1]}/{key[2]} phi={key[4]:g}")
    ax.axhline(0.99, color="gray", linestyle=":", linewidth=1, label="0.99")
    ax.set_ylim(0.0, 1.05)
    _apply_scales(ax, spec, default_loglog=False)
    ax.set_xlabel("electorate size n")
    ax.set_ylabel("violation probability")
    return []


def _render_bound_overlay(ax, rows, spec: PlotSpec) -> List[str]:
    if spec.epsilon is None:
        raise OptionError("bound-overlay needs --epsilon to draw the analytic floor")
    span = []
    for key, group in _group(rows).items():
        ns = [r["n"] for r in group]
        ax.plot(ns, [r["p_hat"] for r in group], marker="o", linestyle="",
                label=f"empirical {key[1]}/{key[2]} phi={key[4]:g}")
        span.extend(ns)
    xs = np.geomspace(min(span), max(span), 256)
    ax.plot(xs, hoeffding_floor(spec.epsilon, xs), "k-", linewidth=1,
            label=f"analytic floor eps={spec.epsilon:g}", zorder=1)
    ax.set_ylim(0.0, 1.05)
    _apply_scales(ax, spec, default_loglog=False)
    ax.set_xlabel("electorate size n")
    ax.set_ylabel("concentration probability")
    return []


def _render_margins(ax, rows, spec: PlotSpec) -> List[str]:
    margin_rows = [r for r in rows if r["axiom"].startswith("margin:")]
    if not margin_rows:
        raise DataError("no margin rows (axiom column 'margin:<label>') in the input")
    by_label: Dict[str, List[Dict]] = {}
    for row in margin_rows:
        by_label.setdefault(row["axiom"], []).append(row)
    for label, group in sorted(by_label.items()):
        group = sorted(group, key=lambda r: r["phi"])
        ax.plot([r["phi"] for r in group], [r["p_hat"] for r in group],
                marker="o", label=label[len("margin:"):])
    _apply_scales(ax, spec, default_loglog=False)
    ax.set_xlabel("dispersion phi")
    ax.set_ylabel("expected margin")
    return []


_RENDERERS = {
    "decay": _render_decay,
    "onset": _render_onset,
    "bound-overlay": _render_bound_overlay,
    "margins": _render_margins,
}


def render(spec: PlotSpec) -> Tuple[Path, List[str]]:
    """Build and save the figure; returns the output path and the fit
    report lines.  Nothing is written if loading or validation fails."""
    rows = load_results(spec.csv_paths)
    plt.rcParams["svg.hashsalt"] = "voteplots"
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    try:
        messages = _RENDERERS[spec.kind](ax, rows, spec)
        ax.legend(fontsize=8)
        ax.set_title(spec.kind)
        fig.tight_layout()
        out = Path(spec.out_path)
        suffix = out.suffix.lower()
        metadata = {"Date": None} if suffix == ".svg" else {"Software": None}
        fig.savefig(out, dpi=100, metadata=metadata)
    finally:
        plt.close(fig)
    return out, messages


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="voteplots",
        description="Render one figure from experiment results CSV files.",
    )
    parser.add_argument("--csv", action="append", required=True,
                        help="results CSV path (repeatable)")
    parser.add_argument("--kind", required=True, choices=PLOT_KINDS)
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--ref-slope", type=float, default=None,
                        help="draw a reference power-law of this slope")
    parser.add_argument("--logx", action="store_true")
    parser.add_argument("--logy", action="store_true")
    parser.add_argument("--epsilon", type=float, default=None,
                        help="concentration radius for bound-overlay")
    args = parser.parse_args(argv)
    spec = PlotSpec(
        csv_paths=tuple(args.csv), kind=args.kind, out_path=args.out,
        ref_slope=args.ref_slope, logx=args.logx, logy=args.logy,
        epsilon=args.epsilon,
    )
    try:
        out, messages = render(spec)
    except (SchemaError, OptionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for message in messages:
        print(message)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
