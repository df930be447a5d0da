"""Plan execution, treatment classification and run metrics."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError, KinematicViolationError, RowplanError
from .field import FieldModel
from .kinematics import ToolConfig
from .planner import Plan

# Relative slack allowed before a move counts as exceeding the axis speed.
_SPEED_EPS = 1e-9


@dataclass(frozen=True)
class SimConfig:
    noise_sigma: float = 0.0
    accurate_radius: float = 0.01
    partial_radius: float = 0.025
    crop_safety_radius: float = 0.03
    withhold_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be >= 0")
        if not 0 <= self.accurate_radius <= self.partial_radius:
            raise ConfigError("need 0 <= accurate_radius <= partial_radius")
        if self.crop_safety_radius < 0:
            raise ConfigError("crop_safety_radius must be >= 0")
        if not 0 <= self.withhold_prob <= 1:
            raise ConfigError("withhold_prob must lie in [0, 1]")

    def check_tool(self, tool: ToolConfig) -> None:
        if self.partial_radius > tool.footprint:
            raise ConfigError("partial_radius must not exceed the spray footprint")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping) -> "SimConfig":
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(f"sim: {exc}") from None


@dataclass
class RunMetrics:
    total_weeds: int
    accurate_hits: int
    partial_hits: int
    missed: int
    missed_planning: int
    missed_detection: int
    crop_false_hits: int
    per_axis_distance: list[float]
    # treated / total per priority class
    treated_by_priority: dict[str, int] = field(default_factory=dict)
    total_by_priority: dict[str, int] = field(default_factory=dict)
    # run labels, filled in by the experiment runner
    field_model: str = ""
    mode: str = ""
    biodiv: bool = False
    seed: int = 0
    lam: float = float("nan")

    def __post_init__(self):
        if self.accurate_hits + self.partial_hits + self.missed != self.total_weeds:
            raise RowplanError(
                f"conservation violated: {self.accurate_hits} + {self.partial_hits} + {self.missed} "
                f"!= {self.total_weeds}"
            )

    @property
    def loss_pct(self) -> float:
        return 100.0 * self.missed / self.total_weeds if self.total_weeds else 0.0

    @property
    def axis_dist_mean(self) -> float:
        return float(np.mean(self.per_axis_distance)) if self.per_axis_distance else 0.0

    @property
    def axis_dist_std(self) -> float:
        return float(np.std(self.per_axis_distance)) if self.per_axis_distance else 0.0

    def treatment_rate(self, priority: str) -> float:
        """Percent of weeds of ``priority`` that were hit (accurate or partial)."""
        total = self.total_by_priority.get(priority, 0)
        return 100.0 * self.treated_by_priority.get(priority, 0) / total if total else float("nan")


def classify_hit(offset: float, sim: SimConfig) -> str:
    if offset < 0:
        raise ValueError("offset must be >= 0")
    if offset <= sim.accurate_radius:
        return "accurate"
    if offset <= sim.partial_radius:
        return "partial"
    return "missed"


def _withheld(field_model: FieldModel, prob: float, seed: int) -> set[int]:
    if prob <= 0:
        return set()
    rng = np.random.default_rng([seed, 0x5EED])
    weeds = field_model.weeds
    draws = rng.random(len(weeds))
    return {w.id for w, u in zip(weeds, draws.tolist()) if u < prob}


def detected_field(field_model: FieldModel, sim: SimConfig) -> tuple[FieldModel, set[int]]:
    """Field as seen by the planner, with a random share of weeds withheld."""
    hidden = _withheld(field_model, sim.withhold_prob, sim.seed)
    if not hidden:
        return field_model, hidden
    return field_model.subset(p.id for p in field_model.plants if p.id not in hidden), hidden


def simulate_run(field_model: FieldModel, plan: Plan, tool: ToolConfig, sim: SimConfig,
                 withheld: Sequence[int] = ()) -> RunMetrics:
    """Execute ``plan`` on the ground-truth ``field_model``.

    The robot advances at ``gamma``; each axis reaches a planned node's
    lateral position by the time the tool line passes it, and sprays there
    with Gaussian lateral noise. ``withheld`` names weeds that were hidden from
    the planner (counted as detection misses when untreated).
    """
    sim.check_tool(tool)
    lookup = field_model.by_id()
    rng = np.random.default_rng(sim.seed)
    crops = field_model.crops
    crop_tree = cKDTree([(c.x, c.y) for c in crops]) if crops else None

    hit_class: dict[int, str] = {}
    distances = []
    crop_hits = 0
    for a in plan.axes:
        lo, hi = tool.band(a.axis_id)
        px, py = a.start
        travelled = 0.0
        for nid in a.nodes:
            if nid in hit_class:
                raise RowplanError(f"weed {nid} is planned more than once")
            p = lookup.get(nid)
            if p is None or p.kind != "weed":
                raise RowplanError(f"axis {a.axis_id}: planned node {nid} is not a weed of this field")
            if not lo <= p.y < hi:
                raise KinematicViolationError(f"axis {a.axis_id}: node {nid} lies outside the axis band")
            dt = (p.x - px) / tool.gamma - tool.dwell
            dy = abs(p.y - py)
            if dt < 0 or dy > tool.theta * dt * (1 + _SPEED_EPS) + 1e-12:
                raise KinematicViolationError(
                    f"axis {a.axis_id}: reaching node {nid} needs {dy:.4f} m in {dt:.4f} s "
                    f"(limit {tool.theta} m/s)"
                )
            travelled += dy
            px, py = p.x, p.y
            spray_y = p.y + (rng.normal(0.0, sim.noise_sigma) if sim.noise_sigma > 0 else 0.0)
            outcome = classify_hit(abs(spray_y - p.y), sim)
            hit_class[nid] = outcome
            if crop_tree is not None and crop_tree.query_ball_point((p.x, spray_y), sim.crop_safety_radius):
                crop_hits += 1
        distances.append(travelled)

    withheld = set(withheld)
    weeds = field_model.weeds
    acc = sum(1 for w in weeds if hit_class.get(w.id) == "accurate")
    par = sum(1 for w in weeds if hit_class.get(w.id) == "partial")
    missed = len(weeds) - acc - par
    treated = {w.id for w in weeds if hit_class.get(w.id) in ("accurate", "partial")}
    miss_det = sum(1 for w in weeds if w.id in withheld and w.id not in treated)
    miss_plan = sum(1 for w in weeds if w.id not in withheld and w.id not in hit_class)
    by_pri: dict[str, int] = {}
    tot_pri: dict[str, int] = {}
    for w in weeds:
        tot_pri[w.priority] = tot_pri.get(w.priority, 0) + 1
        if w.id in treated:
            by_pri[w.priority] = by_pri.get(w.priority, 0) + 1
    return RunMetrics(
        total_weeds=len(weeds),
        accurate_hits=acc,
        partial_hits=par,
        missed=missed,
        missed_planning=miss_plan,
        missed_detection=miss_det,
        crop_false_hits=crop_hits,
        per_axis_distance=distances,
        treated_by_priority=by_pri,
        total_by_priority=tot_pri,
    )


def trace_axis(field_model: FieldModel, plan: Plan, tool: ToolConfig, axis: int, rate: float = 1000.0):
    """Sampled nozzle motion of one axis at ``rate`` Hz, for plotting.

    The nozzle leaves for the next target right after treating the previous
    one at full speed and then waits. Returns ``(t, robot_x, nozzle_y)``.
    """
    a = plan.axes[axis]
    lookup = field_model.by_id()
    x0, y0 = a.start
    pts = [(x0, y0)] + [(lookup[i].x, lookup[i].y) for i in a.nodes]
    t_end = (pts[-1][0] - x0) / tool.gamma
    t = np.arange(0.0, t_end + 1.0 / rate, 1.0 / rate)
    y = np.full_like(t, y0)
    for (xa, ya), (xb, yb) in zip(pts, pts[1:]):
        ta, tb = (xa - x0) / tool.gamma, (xb - x0) / tool.gamma
        sel = (t >= ta) & (t <= tb)
        move = np.minimum((t[sel] - ta) * tool.theta, abs(yb - ya))
        y[sel] = ya + math.copysign(1.0, yb - ya) * move
    y[t > (pts[-1][0] - x0) / tool.gamma] = pts[-1][1]
    return t, x0 + tool.gamma * t, y


def aggregate_metrics(runs: Sequence[RunMetrics]) -> dict:
    """Per-(field model, mode, biodiv) means and paired deltas.

    Deltas pair runs on the same field model and seed: ``segment - rolling``
    loss for each biodiv setting and ``biodiv - baseline`` priority treatment
    rates for each mode.
    """
    if not runs:
        raise ValueError("aggregate_metrics needs at least one run")
    groups: dict[tuple, list[RunMetrics]] = {}
    for r in runs:
        groups.setdefault((r.field_model, r.mode, r.biodiv), []).append(r)
    summary = []
    for (fm, mode, biodiv), rs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2])):
        losses = np.array([r.loss_pct for r in rs])
        dists = np.array([r.axis_dist_mean for r in rs])
        entry = {
            "field_model": fm,
            "mode": mode,
            "biodiv": biodiv,
            "lambda": rs[0].lam,
            "runs": len(rs),
            "loss_mean": float(losses.mean()),
            "loss_std": float(losses.std()),
            "axis_dist_mean": float(dists.mean()),
            "axis_dist_std": float(np.mean([r.axis_dist_std for r in rs])),
        }
        for pri in ("low", "high"):
            rates = [r.treatment_rate(pri) for r in rs if r.total_by_priority.get(pri)]
            entry[f"treated_{pri}_pct"] = float(np.mean(rates)) if rates else None
        summary.append(entry)

    index = {(r.field_model, r.mode, r.biodiv, r.seed): r for r in runs}
    mode_deltas = []
    for fm, biodiv in sorted({(r.field_model, r.biodiv) for r in runs}):
        seeds = sorted({r.seed for r in runs if r.field_model == fm and r.biodiv == biodiv})
        d = [index[(fm, "segment", biodiv, s)].loss_pct - index[(fm, "rolling", biodiv, s)].loss_pct
             for s in seeds if (fm, "segment", biodiv, s) in index and (fm, "rolling", biodiv, s) in index]
        if d:
            mode_deltas.append({
                "field_model": fm, "biodiv": biodiv, "pairs": len(d),
                "loss_delta_mean": float(np.mean(d)), "loss_delta_std": float(np.std(d)),
                "deltas": [float(v) for v in d],
            })
    biodiv_deltas = []
    for fm, mode in sorted({(r.field_model, r.mode) for r in runs}):
        seeds = sorted({r.seed for r in runs if r.field_model == fm and r.mode == mode})
        pairs = [(index[(fm, mode, True, s)], index[(fm, mode, False, s)]) for s in seeds
                 if (fm, mode, True, s) in index and (fm, mode, False, s) in index]
        if pairs:
            entry = {"field_model": fm, "mode": mode, "pairs": len(pairs)}
            for pri in ("low", "high"):
                d = [b.treatment_rate(pri) - a.treatment_rate(pri) for b, a in pairs
                     if b.total_by_priority.get(pri)]
                entry[f"{pri}_rate_delta_mean"] = float(np.mean(d)) if d else None
            entry["loss_delta_mean"] = float(np.mean([b.loss_pct - a.loss_pct for b, a in pairs]))
            biodiv_deltas.append(entry)
    return {"groups": summary, "mode_deltas": mode_deltas, "biodiv_deltas": biodiv_deltas}
