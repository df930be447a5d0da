"""Brute-force references for testing the planner.

Nothing here imports the planner's scoring code: slack, feasibility,
trajectory score and harmfulness are recomputed from their definitions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError, OracleSizeError
from .field import FieldModel, Plant
from .kinematics import ToolConfig

MAX_ORACLE_TARGETS = 8


@dataclass(frozen=True)
class OracleResult:
    best_count: int
    best_c: float
    best_k: float
    best_nodes: tuple[int, ...]


def _logistic(z: float) -> float:
    if z < -700:
        return 0.0
    return 1.0 / (1.0 + math.exp(-z))


def _kappa(w: Plant, crops: Sequence[Plant], weights: Mapping[str, float], reference_distance: float,
           nominal_crop_area: float, max_kappa: float) -> float:
    best = None
    for c in crops:
        d = math.sqrt((c.x - w.x) ** 2 + (c.y - w.y) ** 2)
        if best is None or d < best[0] or (d == best[0] and c.id < best[1].id):
            best = (d, c)
    if best is None:
        d, area = reference_distance, nominal_crop_area
    else:
        d, area = best[0], best[1].area_mm2
    if d == 0:
        return max_kappa
    return min(w.area_mm2 * w.beta * weights[w.priority] / (area * d), max_kappa)


def brute_force_plan(
    targets: Sequence[Plant],
    tool: ToolConfig,
    cfg,
    mode: str = "baseline",
    start: tuple[float, float] = (0.0, 0.0),
    crops: Sequence[Plant] = (),
    ctx=None,
) -> OracleResult:
    """Best trajectory by exhaustive enumeration of every ordered subset.

    ``cfg`` supplies ``omega`` and ``rho``; ``ctx`` (a harmfulness context,
    used in ``biodiv`` mode) supplies priority weights and the weed-only
    fallback. The same tie-break chain as the planner applies: score, then
    lateral travel, then lowest first-node id.
    """
    if len(targets) > MAX_ORACLE_TARGETS:
        raise OracleSizeError(f"oracle handles at most {MAX_ORACLE_TARGETS} targets, got {len(targets)}")
    if mode not in ("baseline", "biodiv"):
        raise ValueError(mode)
    weights = dict(ctx.priority_weights) if ctx else {"low": 0.1, "high": 1.0}
    ref = ctx.reference_distance if ctx else 0.5
    nominal = ctx.nominal_crop_area if ctx else 1000.0
    cap = ctx.max_kappa if ctx else 1e6
    kap = {w.id: _kappa(w, crops, weights, ref, nominal, cap) for w in targets}

    best_key = None
    best = OracleResult(0, 0.0, 0.0, ())
    for r in range(len(targets) + 1):
        for perm in itertools.permutations(targets, r):
            prev_x, prev_y = start
            gammas = []
            travel = 0.0
            valid = True
            for i, w in enumerate(perm):
                dx = w.x - prev_x
                if dx < 0 or (i > 0 and dx == 0):
                    valid = False
                    break
                dy = abs(w.y - prev_y)
                slack = dx / tool.gamma - dy / tool.theta - tool.dwell
                gammas.append(_logistic(cfg.omega * slack))
                travel += dy
                prev_x, prev_y = w.x, w.y
            if not valid:
                continue
            if gammas and min(gammas) < cfg.rho:
                continue
            c = sum(gammas) / len(gammas) if gammas else 0.0
            k = sum(kap[w.id] for w in perm)
            first = perm[0].id if perm else math.inf
            cq, tq = round(c, 12), round(travel, 12)
            if mode == "baseline":
                key = (-len(perm), -cq, tq, first)
            else:
                key = (-k, -cq, tq, first)
            if best_key is None or key < best_key:
                best_key = key
                best = OracleResult(len(perm), c, k, tuple(w.id for w in perm))
    return best


def monte_carlo_reach(delta_y: float, gamma: float, theta: float, eta: float, samples: int = 10**5,
                      seed: int = 0) -> float:
    """Fraction of sampled exponential gaps ``dx`` with ``dx / delta_y > gamma / theta``."""
    if samples < 10**4:
        raise DomainError("need at least 1e4 samples")
    if delta_y < 0 or gamma < 0 or eta < 0 or not theta > 0:
        raise DomainError("invalid reach parameters")
    if eta == 0:
        return 1.0
    rng = np.random.default_rng(seed)
    dx = rng.exponential(1.0 / eta, size=samples)
    # dx / dy > gamma / theta, written without dividing by dy
    return float(np.mean(dx * theta > gamma * delta_y))


def max_treatable(field_model: FieldModel, tool: ToolConfig, cfg) -> int:
    """Most weeds any planner could reach on this row under static assignment.

    Per axis this is the longest chain of weeds, starting from the band
    center at the row origin, whose every hop clears the cutoff ``rho``. It
    bounds every observation model from above.
    """
    lo_x = min([0.0] + [p.x for p in field_model.plants])
    total = 0
    for axis in range(tool.heads):
        lo = axis * tool.width / tool.heads
        hi = tool.width if axis == tool.heads - 1 else (axis + 1) * tool.width / tool.heads
        pts = sorted((w.x, w.y) for w in field_model.weeds if lo <= w.y < hi)
        home = (lo + hi) / 2
        longest: list[float] = []
        best_upto: list[float] = []  # running max of longest[0..i]
        for j, (xj, yj) in enumerate(pts):
            slack = (xj - lo_x) / tool.gamma - abs(yj - home) / tool.theta - tool.dwell
            b = 1 if _logistic(cfg.omega * slack) >= cfg.rho else -math.inf
            for i in range(j - 1, -1, -1):
                xi, yi = pts[i]
                if xj <= xi:
                    continue
                worst = (xj - xi) / tool.gamma - tool.width / tool.theta - tool.dwell
                if _logistic(cfg.omega * worst) >= cfg.rho:
                    # every hop from i or anything behind it clears the cutoff
                    b = max(b, best_upto[i] + 1)
                    break
                slack = (xj - xi) / tool.gamma - abs(yj - yi) / tool.theta - tool.dwell
                if _logistic(cfg.omega * slack) >= cfg.rho:
                    b = max(b, longest[i] + 1)
            longest.append(b)
            best_upto.append(max(b, best_upto[-1]) if best_upto else b)
        total += int(max([0.0] + longest))
    return total
