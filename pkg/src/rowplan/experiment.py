"""Seeded experiment runs: generate or load rows, plan, simulate, write CSV."""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

from .errors import ConfigError, WindowOverflowError
from .field import DEFAULT_SPECIES_MIX, FieldModel, FieldSpec, SpeciesSpec, generate_field, load_field
from .kinematics import ToolConfig
from .planner import HarmfulnessContext, Plan, PlannerConfig, harmfulness_map, plan_field
from .simulator import RunMetrics, SimConfig, aggregate_metrics, detected_field, simulate_run

log = logging.getLogger(__name__)

CSV_COLUMNS = [
    "run_id", "field_model", "mode", "biodiv", "seed", "lambda", "total_weeds", "accurate", "partial",
    "missed", "missed_planning", "missed_detection", "crop_false_hits", "loss_pct", "axis_dist_mean_m",
    "axis_dist_std_m",
]

# Window lengths are halved down to this before giving up on an overflowing row.
MIN_WINDOW = 1.0 / 64

DENSITY_LADDER = [
    ("low", 3.1),
    ("moderate", 8.2),
    ("high-a", 15.4),
    ("high-b", 22.3),
    ("very-high", 81.2),
]

BIODIV_MIX = (
    SpeciesSpec("dicot", 10 / 11, beta=1.0, priority="low"),
    SpeciesSpec("grass", 1 / 11, beta=1.0, priority="high"),
)


@dataclass(frozen=True)
class FieldSource:
    name: str
    spec: FieldSpec | None = None  # seed is replaced per run
    path: str | None = None

    def __post_init__(self):
        if (self.spec is None) == (self.path is None):
            raise ConfigError(f"field {self.name!r}: give exactly one of spec or path")

    @property
    def lam(self) -> float:
        return self.spec.lam if self.spec is not None else float("nan")

    def build(self, seed: int) -> FieldModel:
        if self.spec is not None:
            return generate_field(replace(self.spec, seed=seed))
        return load_field(self.path)


@dataclass(frozen=True)
class ExperimentConfig:
    fields: tuple[FieldSource, ...]
    seeds: tuple[int, ...]
    tool: ToolConfig = ToolConfig()
    planners: tuple[PlannerConfig, ...] = (PlannerConfig(mode="segment"), PlannerConfig(mode="rolling"))
    sim: SimConfig = SimConfig()
    harmfulness: HarmfulnessContext = field(default_factory=HarmfulnessContext)
    out: str | None = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        object.__setattr__(self, "seeds", tuple(self.seeds))
        object.__setattr__(self, "planners", tuple(self.planners))
        if not self.fields:
            raise ConfigError("experiment needs at least one field source")
        if not self.seeds:
            raise ConfigError("experiment needs at least one seed")
        if not self.planners:
            raise ConfigError("experiment needs at least one planner variant")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        self.sim.check_tool(self.tool)
        keys = [(p.mode, p.biodiv) for p in self.planners]
        if len(set(keys)) != len(keys):
            raise ConfigError("planner variants must differ in (mode, biodiv)")


def builtin_suite(name: str, seeds: Sequence[int] = range(20), lambdas: Sequence[float] | None = None,
                  length: float = 100.0) -> ExperimentConfig:
    """Named experiment presets.

    ``densities`` (alias ``paper-densities``): the five-density ladder, segment vs rolling at
    0.5 m/s. ``biodiv``: two priority classes at 1:10 occurrence, robot at
    1.0 m/s, baseline vs bio-diversity-aware selection in both modes.
    """
    if name in ("densities", "paper-densities"):
        ladder = DENSITY_LADDER
        mix = DEFAULT_SPECIES_MIX
        tool = ToolConfig()
        planners = (PlannerConfig(mode="segment"), PlannerConfig(mode="rolling"))
    elif name == "biodiv":
        ladder = DENSITY_LADDER
        mix = BIODIV_MIX
        tool = ToolConfig(gamma=1.0)
        planners = tuple(
            PlannerConfig(mode=m, biodiv=b) for m in ("segment", "rolling") for b in (False, True)
        )
    else:
        raise ConfigError(f"unknown suite {name!r}; choose densities or biodiv")
    if lambdas is not None:
        ladder = [(f"lambda-{lam:g}", lam) for lam in lambdas]
    fields = tuple(
        FieldSource(label, FieldSpec(lam=lam, length=length, species_mix=mix, crop_spacing=0.25))
        for label, lam in ladder
    )
    return ExperimentConfig(fields=fields, seeds=tuple(seeds), tool=tool, planners=planners)


def plan_with_fallback(field_model: FieldModel, tool: ToolConfig, planners: Sequence[PlannerConfig],
                       ctx: HarmfulnessContext | None = None) -> tuple[float, list[Plan]]:
    """Plan with every variant on a common window, halving it on overflow."""
    kappa = harmfulness_map(field_model, ctx) if any(p.biodiv for p in planners) else None
    window = planners[0].window_length
    while True:
        try:
            plans = [plan_field(field_model, tool, replace(p, window_length=window), ctx, kappa)
                     for p in planners]
            return window, plans
        except WindowOverflowError:
            if window / 2 < MIN_WINDOW:
                raise
            window /= 2
            log.info("window overflow; retrying with window_length=%g", window)


def _run_task(args) -> tuple[list[RunMetrics], float]:
    cfg, src, seed = args
    truth = src.build(seed)
    sim = replace(cfg.sim, seed=seed)
    seen, hidden = detected_field(truth, sim)
    window, plans = plan_with_fallback(seen, cfg.tool, cfg.planners, cfg.harmfulness)
    out = []
    for pcfg, plan in zip(cfg.planners, plans):
        m = simulate_run(truth, plan, cfg.tool, sim, withheld=hidden)
        out.append(replace(m, field_model=src.name, mode=pcfg.mode, biodiv=pcfg.biodiv, seed=seed, lam=src.lam))
    return out, window


def run_id(m: RunMetrics) -> str:
    return f"{m.field_model}-s{m.seed}-{m.mode}-{'biodiv' if m.biodiv else 'base'}"


def metrics_row(m: RunMetrics) -> dict:
    if m.accurate_hits + m.partial_hits + m.missed != m.total_weeds:
        raise AssertionError(f"conservation violated in {run_id(m)}")
    return {
        "run_id": run_id(m),
        "field_model": m.field_model,
        "mode": m.mode,
        "biodiv": int(m.biodiv),
        "seed": m.seed,
        "lambda": m.lam,
        "total_weeds": m.total_weeds,
        "accurate": m.accurate_hits,
        "partial": m.partial_hits,
        "missed": m.missed,
        "missed_planning": m.missed_planning,
        "missed_detection": m.missed_detection,
        "crop_false_hits": m.crop_false_hits,
        "loss_pct": m.loss_pct,
        "axis_dist_mean_m": m.axis_dist_mean,
        "axis_dist_std_m": m.axis_dist_std,
    }


def write_metrics_csv(runs: Sequence[RunMetrics], path) -> None:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for m in runs:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in metrics_row(m).items()})
    Path(path).write_text(buf.getvalue())


@dataclass
class ExperimentResult:
    runs: list[RunMetrics]
    windows: dict[str, float]
    summary: dict


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run every (field, seed) task with all planner variants.

    Writes ``metrics.csv`` and ``summary.json`` to ``cfg.out`` when set. Rows
    come out in task order regardless of ``workers``.
    """
    tasks = [(cfg, src, seed) for src in cfg.fields for seed in cfg.seeds]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]
    runs: list[RunMetrics] = []
    windows = {}
    for (_, src, seed), (ms, window) in zip(tasks, results):
        runs.extend(ms)
        windows[f"{src.name}-s{seed}"] = window
    summary = aggregate_metrics(runs)
    summary["window_length"] = windows
    summary["config"] = config_to_dict(cfg)
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        write_metrics_csv(runs, out / "metrics.csv")
        (out / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    return ExperimentResult(runs, windows, summary)


# ----------------------------------------------------------------- config IO


def config_to_dict(cfg: ExperimentConfig) -> dict:
    fields = []
    for f in cfg.fields:
        d: dict[str, Any] = {"name": f.name}
        if f.spec is not None:
            spec = f.spec.to_dict()
            spec.pop("seed")
            d["spec"] = spec
        else:
            d["path"] = f.path
        fields.append(d)
    return {
        "fields": fields,
        "seeds": list(cfg.seeds),
        "tool": cfg.tool.to_dict(),
        "planners": [p.to_dict() for p in cfg.planners],
        "sim": cfg.sim.to_dict(),
        "harmfulness": {
            "reference_distance": cfg.harmfulness.reference_distance,
            "priority_weights": dict(cfg.harmfulness.priority_weights),
            "nominal_crop_area": cfg.harmfulness.nominal_crop_area,
            "max_kappa": cfg.harmfulness.max_kappa,
        },
        "out": cfg.out,
        "workers": cfg.workers,
    }


def config_from_dict(d: dict) -> ExperimentConfig:
    try:
        fields = []
        for f in d["fields"]:
            if "spec" in f:
                spec = dict(f["spec"])
                spec.setdefault("seed", 0)
                fields.append(FieldSource(f["name"], spec=FieldSpec.from_dict(spec)))
            else:
                fields.append(FieldSource(f["name"], path=f["path"]))
        seeds = d.get("seeds", [0])
        if isinstance(seeds, int):
            seeds = list(range(seeds))
        return ExperimentConfig(
            fields=tuple(fields),
            seeds=tuple(seeds),
            tool=ToolConfig.from_dict(d.get("tool", {})),
            planners=tuple(PlannerConfig.from_dict(p) for p in d.get("planners", [{"mode": "segment"},
                                                                              {"mode": "rolling"}])),
            sim=SimConfig.from_dict(d.get("sim", {})),
            harmfulness=HarmfulnessContext(**d.get("harmfulness", {})),
            out=d.get("out"),
            workers=int(d.get("workers", 1)),
        )
    except KeyError as exc:
        raise ConfigError(f"experiment config is missing key {exc}") from None
    except TypeError as exc:
        raise ConfigError(f"experiment config: {exc}") from None
