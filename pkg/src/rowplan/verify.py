"""Planner-vs-oracle sweeps used by ``rowplan verify`` and the acceptance tests."""

from __future__ import annotations

import math

import numpy as np

from .field import Plant, make_field, reach_probability
from .kinematics import ToolConfig
from .oracle import brute_force_plan, monte_carlo_reach
from .planner import (
    HarmfulnessContext,
    PlannerConfig,
    best_trajectory,
    build_graph,
    enumerate_notsp,
    harmfulness_map,
    select_trajectory,
)


def random_instance(rng: np.random.Generator, tool: ToolConfig, max_targets: int = 6):
    """One axis worth of weeds plus a few crops, packed tightly enough that
    roughly half of the candidate edges fall near the feasibility cutoff."""
    axis = int(rng.integers(tool.heads))
    lo, hi = tool.band(axis)
    n = int(rng.integers(0, max_targets + 1))
    span = float(rng.uniform(0.1, 0.6))
    plants = []
    for i in range(n):
        plants.append(Plant(id=i, x=float(rng.uniform(0.0, span)), y=float(rng.uniform(lo, hi)), kind="weed",
                            species="w", area_mm2=float(rng.uniform(50, 800)), beta=float(rng.uniform(0.5, 2)),
                            priority="high" if rng.random() < 0.3 else "low"))
    for j in range(int(rng.integers(0, 3))):
        plants.append(Plant(id=n + j, x=float(rng.uniform(0.0, span)), y=float(rng.uniform(0, tool.width)),
                            kind="crop", species="crop", area_mm2=float(rng.uniform(500, 2000)), beta=0.0,
                            priority="low"))
    start = (0.0, tool.home(axis))
    return axis, plants, start


def _same(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12)


def oracle_sweep(instances: int = 1000, seed: int = 0, max_targets: int = 6,
                 tool: ToolConfig | None = None, cfg: PlannerConfig | None = None) -> dict:
    """Compare both planner search paths with the brute-force oracle.

    Returns per-mode mismatch counts and the first few mismatching instances.
    """
    tool = tool or ToolConfig()
    cfg = cfg or PlannerConfig()
    ctx = HarmfulnessContext()
    rng = np.random.default_rng(seed)
    mismatches = {"baseline": 0, "biodiv": 0}
    examples = []
    for k in range(instances):
        axis, plants, start = random_instance(rng, tool, max_targets)
        model = make_field({"width": tool.width}, plants, warn=False)
        weeds, crops = model.weeds, model.crops
        kappa = harmfulness_map(model, ctx)
        graph = build_graph(weeds, None, tool, cfg, start, axis_id=axis)
        for mode in ("baseline", "biodiv"):
            kap = kappa if mode == "biodiv" else None
            fast = best_trajectory(graph, cfg, mode, kap)
            slow = select_trajectory(enumerate_notsp(graph, cfg), mode, kap)
            ref = brute_force_plan(weeds, tool, cfg, mode, start=start, crops=crops, ctx=ctx)
            ok = all(
                t.nodes == ref.best_nodes and _same(t.c_score, ref.best_c)
                and (mode == "baseline" or _same(t.k_score, ref.best_k))
                for t in (fast, slow)
            )
            if not ok:
                mismatches[mode] += 1
                if len(examples) < 5:
                    examples.append({"instance": k, "mode": mode, "planner": list(fast.nodes),
                                     "enumerated": list(slow.nodes), "oracle": list(ref.best_nodes)})
    return {"instances": instances, "mismatches": mismatches, "examples": examples}


def reach_grid() -> list[tuple[float, float, float, float]]:
    """Twenty ``(delta_y, gamma, theta, eta)`` points spanning p from ~0.05 to 1."""
    pts = []
    for dy in (0.0, 0.1, 0.35, 0.7, 1.39):
        for gamma, theta, eta in ((0.5, 5.0, 4.3), (1.0, 5.0, 21.4), (0.5, 2.0, 31.0), (0.2, 5.0, 112.9)):
            pts.append((dy, gamma, theta, eta))
    return pts


def reach_check(samples: int = 10**5, seed: int = 0) -> list[dict]:
    """Analytic reach probability against a Monte-Carlo estimate, per grid point."""
    rows = []
    for i, (dy, gamma, theta, eta) in enumerate(reach_grid()):
        p = reach_probability(dy, gamma, theta, eta)
        f = monte_carlo_reach(dy, gamma, theta, eta, samples=samples, seed=seed + i)
        bound = 3 * math.sqrt(p * (1 - p) / samples)
        rows.append({"delta_y": dy, "gamma": gamma, "theta": theta, "eta": eta, "analytic": p,
                     "monte_carlo": f, "bound": bound, "ok": abs(p - f) <= bound})
    return rows


def verify_all(instances: int = 1000, seed: int = 0) -> dict:
    sweep = oracle_sweep(instances, seed)
    reach = reach_check(seed=seed)
    ok = not any(sweep["mismatches"].values()) and all(r["ok"] for r in reach)
    return {"ok": ok, "oracle": sweep, "reach": reach}
