"""``rowplan`` command line: generate | plan | simulate | experiment | verify | report.

Exit codes: 0 ok, 1 configuration error, 2 runtime error. Errors are also
printed to stderr as a one-line JSON record.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .errors import ConfigError, RowplanError
from .experiment import builtin_suite, config_from_dict, plan_with_fallback, run_experiment, write_metrics_csv
from .field import FieldSpec, generate_field, load_field, save_field
from .kinematics import ToolConfig
from .planner import HarmfulnessContext, Plan, PlannerConfig, harmfulness_map
from .simulator import SimConfig, simulate_run

log = logging.getLogger("rowplan")


def _seeds(text: str) -> list[int]:
    """``"30"`` means seeds 0..29; ``"1,4,9"`` or ``"0-9"`` list them."""
    text = text.strip()
    if "," in text:
        return [int(s) for s in text.split(",") if s.strip()]
    if "-" in text[1:]:
        a, b = text.split("-", 1)
        return list(range(int(a), int(b) + 1))
    return list(range(int(text)))


def _floats(text: str) -> list[float]:
    return [float(s) for s in text.split(",") if s.strip()]


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def _tool(args, cfg: dict) -> ToolConfig:
    d = dict(cfg.get("tool", {}))
    for key in ("gamma", "theta", "heads"):
        if getattr(args, key, None) is not None:
            d[key] = getattr(args, key)
    return ToolConfig.from_dict(d)


def _planner(args, cfg: dict) -> PlannerConfig:
    d = dict(cfg.get("planner", {}))
    for key in ("omega", "rho", "mode"):
        if getattr(args, key, None) is not None:
            d[key] = getattr(args, key)
    if getattr(args, "biodiv", False):
        d["biodiv"] = True
    return PlannerConfig.from_dict(d)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config; flags override its keys")
    p.add_argument("--gamma", type=float, help="robot speed (m/s)")
    p.add_argument("--theta", type=float, help="axis speed limit (m/s)")
    p.add_argument("--heads", type=int, help="number of axes")
    p.add_argument("--omega", type=float, help="logistic steepness (1/s)")
    p.add_argument("--rho", type=float, help="per-edge feasibility cutoff")
    p.add_argument("--mode", choices=["segment", "rolling"])
    p.add_argument("--biodiv", action="store_true", help="bio-diversity-aware selection")


def cmd_generate(args) -> int:
    cfg = _load_config(args.config)
    d = dict(cfg.get("field", {}))
    for flag, key in (("lam", "lambda"), ("width", "width"), ("length", "length"), ("seed", "seed"),
                      ("crop_spacing", "crop_spacing")):
        if getattr(args, flag) is not None:
            d[key] = getattr(args, flag)
    if args.species_mix:
        try:
            d["species_mix"] = json.loads(Path(args.species_mix).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read species mix {args.species_mix}: {exc}") from None
    if "lambda" not in d:
        raise ConfigError("--lambda is required")
    model = generate_field(FieldSpec.from_dict(d))
    save_field(model, args.out)
    print(json.dumps({"out": args.out, "weeds": len(model.weeds), "crops": len(model.crops)}))
    return 0


def cmd_plan(args) -> int:
    cfg = _load_config(args.config)
    model = load_field(args.field)
    tool = _tool(args, cfg)
    pcfg = _planner(args, cfg)
    ctx = HarmfulnessContext(**cfg.get("harmfulness", {}))
    window, (plan,) = plan_with_fallback(model, tool, [pcfg], ctx)
    pcfg = replace(pcfg, window_length=window)
    kappa = harmfulness_map(model, ctx)
    Path(args.out).write_text(json.dumps(plan.to_dict(model, tool, pcfg, kappa), indent=1) + "\n")
    print(json.dumps({"out": args.out, "window_length": window, "planned": len(plan.planned_ids())}))
    return 0


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    model = load_field(args.field)
    doc = json.loads(Path(args.plan).read_text())
    plan = Plan.from_dict(doc)
    tool = ToolConfig.from_dict(doc["tool"]) if "tool" in doc and args.gamma is None else _tool(args, cfg)
    sim = SimConfig.from_dict({**cfg.get("sim", {}),
                               **({"noise_sigma": args.noise} if args.noise is not None else {}),
                               **({"seed": args.seed} if args.seed is not None else {})})
    m = simulate_run(model, plan, tool, sim)
    m = replace(m, field_model=Path(args.field).stem, mode=plan.mode, biodiv=plan.biodiv, seed=sim.seed)
    if args.out:
        write_metrics_csv([m], args.out)
    print(json.dumps({"total_weeds": m.total_weeds, "accurate": m.accurate_hits, "partial": m.partial_hits,
                      "missed": m.missed, "loss_pct": m.loss_pct, "crop_false_hits": m.crop_false_hits,
                      "axis_dist_mean_m": m.axis_dist_mean, "axis_dist_std_m": m.axis_dist_std}))
    return 0


def cmd_experiment(args) -> int:
    seeds = _seeds(args.seeds) if args.seeds else None
    lambdas = _floats(args.lam) if args.lam else None
    if args.config:
        cfg = config_from_dict(_load_config(args.config))
        if seeds is not None:
            cfg = replace(cfg, seeds=tuple(seeds))
        if lambdas is not None:
            if any(f.spec is None for f in cfg.fields):
                raise ConfigError("--lambda only applies to generated fields")
            base = cfg.fields[0]
            cfg = replace(cfg, fields=tuple(replace(base, name=f"lambda-{lam:g}", spec=replace(base.spec, lam=lam))
                                            for lam in lambdas))
    else:
        kw = {"lambdas": lambdas}
        if seeds is not None:
            kw["seeds"] = seeds
        if args.length is not None:
            kw["length"] = args.length
        cfg = builtin_suite(args.suite, **kw)
    tool = cfg.tool.to_dict()
    for key in ("gamma", "theta", "heads"):
        if getattr(args, key) is not None:
            tool[key] = getattr(args, key)
    planners = []
    for p in cfg.planners:
        d = p.to_dict()
        for key in ("omega", "rho"):
            if getattr(args, key) is not None:
                d[key] = getattr(args, key)
        planners.append(PlannerConfig.from_dict(d))
    if args.mode:
        planners = [p for p in planners if p.mode == args.mode]
    if args.biodiv:
        planners = [p for p in planners if p.biodiv]
    if not planners:
        raise ConfigError("no planner variant left after --mode/--biodiv filtering")
    cfg = replace(cfg, tool=ToolConfig.from_dict(tool), planners=tuple(planners),
                  out=args.out or cfg.out or "results", workers=args.workers or cfg.workers)
    result = run_experiment(cfg)
    print(json.dumps({"out": cfg.out, "runs": len(result.runs),
                      "mode_deltas": [{k: v for k, v in d.items() if k != "deltas"}
                                      for d in result.summary["mode_deltas"]]}, indent=1))
    return 0


def cmd_verify(args) -> int:
    from .verify import verify_all

    report = verify_all(instances=args.instances, seed=args.seed)
    print(json.dumps(report, indent=1))
    return 0 if report["ok"] else 2


def cmd_report(args) -> int:
    from .report import plot_trajectories, render_report

    summary = render_report(args.metrics, args.out)
    if args.field and args.plan:
        model = load_field(args.field)
        plan = Plan.from_dict(json.loads(Path(args.plan).read_text()))
        x_range = tuple(_floats(args.x_range)) if args.x_range else None
        plot_trajectories(model, plan, Path(args.out) / "trajectories.svg", x_range=x_range)
    print((Path(args.out) / "report.txt").read_text(), end="")
    return 0 if summary is not None else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rowplan", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="draw a synthetic Poisson row")
    p.add_argument("--config")
    p.add_argument("--lambda", dest="lam", type=float, help="weeds per m²")
    p.add_argument("--width", type=float)
    p.add_argument("--length", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--crop-spacing", type=float)
    p.add_argument("--species-mix", help="JSON list of species entries")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("plan", help="plan all axes over a field file")
    _add_common(p)
    p.add_argument("--field", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="execute a plan dump on a field file")
    _add_common(p)
    p.add_argument("--field", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--noise", type=float, help="lateral actuation noise sigma (m)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="metrics CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="seeded comparison runs")
    _add_common(p)
    p.add_argument("--suite", default="densities", choices=["densities", "paper-densities", "biodiv"])
    p.add_argument("--lambda", dest="lam", help="comma-separated densities")
    p.add_argument("--length", type=float, help="row length (m) for built-in suites")
    p.add_argument("--seeds", help="N, a-b or comma list")
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("verify", help="oracle equivalence and reach-probability checks")
    p.add_argument("--instances", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="plots and table from a metrics CSV")
    p.add_argument("--metrics", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--field", help="field file for a trajectory plot")
    p.add_argument("--plan", help="plan dump for a trajectory plot")
    p.add_argument("--x-range", help="lo,hi along-row range for the trajectory plot")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": 1}), file=sys.stderr)
        return 1
    except (RowplanError, OSError, KeyError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": 2}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
