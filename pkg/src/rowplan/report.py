"""SVG plots and a text table from a metrics CSV."""

from __future__ import annotations

import csv
import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import ReportError  # noqa: E402
from .experiment import CSV_COLUMNS  # noqa: E402
from .field import FieldModel  # noqa: E402
from .planner import Plan  # noqa: E402
from .simulator import RunMetrics, aggregate_metrics  # noqa: E402

_INT_COLS = ("seed", "total_weeds", "accurate", "partial", "missed", "missed_planning", "missed_detection",
             "crop_false_hits")
_FLOAT_COLS = ("lambda", "loss_pct", "axis_dist_mean_m", "axis_dist_std_m")

# Keep SVG output byte-stable across runs.
_SVG_META = {"Date": None, "Creator": None}
plt.rcParams["svg.hashsalt"] = "rowplan"


def read_metrics_csv(path) -> list[dict]:
    """Parse and check a metrics CSV; errors name the offending row (1 = header)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ReportError(f"{path}: empty file, expected header", row=1)
        missing = [c for c in CSV_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise ReportError(f"{path}: header lacks columns {missing}", row=1)
        rows = []
        for n, raw in enumerate(reader, start=2):
            if None in raw or any(raw[c] is None for c in CSV_COLUMNS):
                raise ReportError(f"{path}: row {n} has the wrong number of fields", row=n)
            try:
                row = dict(raw)
                for c in _INT_COLS:
                    row[c] = int(raw[c])
                for c in _FLOAT_COLS:
                    row[c] = float(raw[c])
                row["biodiv"] = raw["biodiv"].strip().lower() in ("1", "true")
            except ValueError as exc:
                raise ReportError(f"{path}: row {n}: {exc}", row=n) from None
            if row["accurate"] + row["partial"] + row["missed"] != row["total_weeds"]:
                raise ReportError(f"{path}: row {n} violates accurate + partial + missed = total", row=n)
            rows.append(row)
    return rows


def row_to_metrics(row: dict) -> RunMetrics:
    """Rebuild the countable part of a run; per-axis distances are not in the CSV."""
    return RunMetrics(
        total_weeds=row["total_weeds"],
        accurate_hits=row["accurate"],
        partial_hits=row["partial"],
        missed=row["missed"],
        missed_planning=row["missed_planning"],
        missed_detection=row["missed_detection"],
        crop_false_hits=row["crop_false_hits"],
        per_axis_distance=[],
        field_model=row["field_model"],
        mode=row["mode"],
        biodiv=row["biodiv"],
        seed=row["seed"],
        lam=row["lambda"],
    )


def _variant(row) -> str:
    return f"{row['mode']}{'+biodiv' if row['biodiv'] else ''}"


def _save(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def plot_loss_vs_density(rows, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    by_variant: dict[str, dict[float, list[float]]] = {}
    for r in rows:
        by_variant.setdefault(_variant(r), {}).setdefault(r["lambda"], []).append(r["loss_pct"])
    for name in sorted(by_variant):
        pts = sorted(by_variant[name].items())
        lam = [p[0] for p in pts]
        mean = [float(np.mean(p[1])) for p in pts]
        std = [float(np.std(p[1])) for p in pts]
        ax.errorbar(lam, mean, yerr=std, marker="o", capsize=3, label=name)
    ax.set_xlabel("weed density (weeds/m²)")
    ax.set_ylabel("loss (%)")
    if by_variant:
        ax.legend()
    fig.tight_layout()
    _save(fig, path)


def plot_axis_distance(rows, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    groups: dict[tuple, list[float]] = {}
    for r in rows:
        groups.setdefault((r["field_model"], _variant(r)), []).append(r["axis_dist_mean_m"])
    keys = sorted(groups)
    if keys:
        pos = np.arange(len(keys))
        ax.bar(pos, [np.mean(groups[k]) for k in keys], yerr=[np.std(groups[k]) for k in keys], capsize=3)
        ax.set_xticks(pos)
        ax.set_xticklabels([f"{f}\n{v}" for f, v in keys], fontsize=7)
    ax.set_ylabel("per-axis travel (m)")
    fig.tight_layout()
    _save(fig, path)


def plot_paired_deltas(summary: dict, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    deltas = summary.get("mode_deltas", [])
    for i, d in enumerate(deltas):
        xs = np.full(len(d["deltas"]), i, dtype=float)
        ax.scatter(xs, d["deltas"], s=10, alpha=0.6)
        ax.hlines(d["loss_delta_mean"], i - 0.3, i + 0.3, colors="k")
    if deltas:
        ax.set_xticks(range(len(deltas)))
        ax.set_xticklabels([f"{d['field_model']}{'+biodiv' if d['biodiv'] else ''}" for d in deltas], fontsize=7)
    ax.axhline(0.0, color="grey", lw=0.5)
    ax.set_ylabel("segment − rolling loss (points)")
    fig.tight_layout()
    _save(fig, path)


def plot_trajectories(field_model: FieldModel, plan: Plan, path, x_range=None) -> None:
    """Field scatter with each axis's planned path drawn in its own color."""
    fig, ax = plt.subplots(figsize=(10, 3))
    weeds = field_model.weeds
    crops = field_model.crops
    lookup = field_model.by_id()
    lo, hi = x_range or field_model.extent()
    ax.scatter([w.x for w in weeds], [w.y for w in weeds], s=6, c="lightgrey", label="weed")
    if crops:
        ax.scatter([c.x for c in crops], [c.y for c in crops], s=14, marker="s", c="forestgreen", label="crop")
    for a in plan.axes:
        pts = [a.start] + [(lookup[i].x, lookup[i].y) for i in a.nodes]
        ax.plot([p[0] for p in pts], [p[1] for p in pts], lw=1, marker=".", ms=4, label=f"axis {a.axis_id}")
    ax.set_xlim(lo, hi)
    ax.set_ylim(0, field_model.width)
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.legend(fontsize=6, loc="upper right")
    fig.tight_layout()
    _save(fig, Path(path))


def text_table(summary: dict) -> str:
    lines = [f"{'field':<14}{'variant':<18}{'runs':>5}{'loss %':>16}{'axis dist m':>16}"]
    for g in summary.get("groups", []):
        variant = g["mode"] + ("+biodiv" if g["biodiv"] else "")
        lines.append(
            f"{g['field_model']:<14}{variant:<18}{g['runs']:>5}"
            f"{g['loss_mean']:>9.2f} ± {g['loss_std']:<5.2f}{g['axis_dist_mean']:>9.2f} ± {g['axis_dist_std']:.2f}"
        )
    for d in summary.get("mode_deltas", []):
        lines.append(f"paired segment-rolling {d['field_model']}: {d['loss_delta_mean']:+.3f} points "
                     f"over {d['pairs']} seeds")
    return "\n".join(lines) + "\n"


def render_report(metrics_csv, out_dir) -> dict:
    """Write loss, distance and paired-delta SVGs plus ``report.txt``; return the summary."""
    rows = read_metrics_csv(metrics_csv)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if rows:
        summary = aggregate_metrics([row_to_metrics(r) for r in rows])
        # distances are only available as CSV aggregates
        for g in summary["groups"]:
            sel = [r for r in rows if (r["field_model"], r["mode"], r["biodiv"]) ==
                   (g["field_model"], g["mode"], g["biodiv"])]
            g["axis_dist_mean"] = float(np.mean([r["axis_dist_mean_m"] for r in sel]))
            g["axis_dist_std"] = float(np.mean([r["axis_dist_std_m"] for r in sel]))
    else:
        warnings.warn(f"{metrics_csv} has no runs; writing empty plots", stacklevel=2)
        summary = {"groups": [], "mode_deltas": [], "biodiv_deltas": []}
    plot_loss_vs_density(rows, out / "loss_vs_density.svg")
    plot_axis_distance(rows, out / "axis_distance.svg")
    plot_paired_deltas(summary, out / "paired_delta.svg")
    (out / "report.txt").write_text(text_table(summary))
    return summary
