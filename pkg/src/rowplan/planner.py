"""Per-axis route planning over a feasibility graph.

Each axis sees its targets as a directed acyclic graph ordered by ``x``: an
edge ``j -> k`` carries the time slack ``S`` (seconds) the axis has to move
laterally from ``j`` to ``k`` while the robot advances, squashed into a
feasibility score by a logistic. A trajectory is an increasing subsequence of
targets; it scores the mean feasibility of its edges (start edge included)
provided every edge clears the cutoff ``rho``.

Two selection rules are offered: the baseline prefers the most targets and
then the highest score; the bio-diversity mode prefers the largest summed
harmfulness. Two observation models drive the planner along a row:
:func:`plan_segment_view` plans disjoint windows once, while
:class:`RollingPlanner` slides an overlapping window and replans the
uncommitted suffix whenever new weeds show up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .assignment import AxisTargets, assign_static
from .errors import AlreadyPassedError, ConfigError, OrderingError, WindowOverflowError
from .field import FieldModel, Plant
from .kinematics import Displacement, ToolConfig, displacement

MODES = ("segment", "rolling")
START = -1  # id of the virtual start node

# Scores and distances are compared after rounding so that sums built in a
# different order still tie.
_TIE_DECIMALS = 12


@dataclass(frozen=True)
class PlannerConfig:
    omega: float = 30.0
    rho: float = 0.6
    mode: str = "rolling"
    biodiv: bool = False
    window_length: float = 1.0
    stride_fraction: float = 0.5
    max_window_targets: int = 12
    commit_time: float = 0.2

    def __post_init__(self):
        if not self.omega > 0:
            raise ConfigError(f"omega must be > 0, got {self.omega}")
        if not 0.5 < self.rho < 1:
            raise ConfigError(f"rho must lie in (0.5, 1), got {self.rho}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.window_length > 0:
            raise ConfigError(f"window_length must be > 0, got {self.window_length}")
        if not 0 < self.stride_fraction <= 1:
            raise ConfigError(f"stride_fraction must lie in (0, 1], got {self.stride_fraction}")
        m = round(1 / self.stride_fraction)
        if abs(m * self.stride_fraction - 1) > 1e-9:
            raise ConfigError("stride_fraction must be 1/m for an integer m (1, 0.5, 0.25, ...)")
        if int(self.max_window_targets) != self.max_window_targets or self.max_window_targets < 1:
            raise ConfigError("max_window_targets must be a positive integer")
        if self.commit_time < 0:
            raise ConfigError(f"commit_time must be >= 0, got {self.commit_time}")

    @property
    def strides_per_window(self) -> int:
        return round(1 / self.stride_fraction)

    @property
    def stride(self) -> float:
        return self.window_length / self.strides_per_window

    def to_dict(self) -> dict:
        return {
            "omega": self.omega,
            "rho": self.rho,
            "mode": self.mode,
            "biodiv": self.biodiv,
            "window_length": self.window_length,
            "stride_fraction": self.stride_fraction,
            "max_window_targets": self.max_window_targets,
            "commit_time": self.commit_time,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PlannerConfig":
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(f"planner: {exc}") from None


@dataclass(frozen=True)
class HarmfulnessContext:
    reference_distance: float = 0.5
    priority_weights: Mapping[str, float] = field(default_factory=lambda: {"low": 0.1, "high": 1.0})
    nominal_crop_area: float = 1000.0
    max_kappa: float = 1e6

    def __post_init__(self):
        if not self.reference_distance > 0:
            raise ConfigError("reference_distance must be > 0")
        if not self.nominal_crop_area > 0:
            raise ConfigError("nominal_crop_area must be > 0")
        if any(not w > 0 for w in self.priority_weights.values()):
            raise ConfigError("priority weights must be positive")


@dataclass(frozen=True)
class FeasibilityEdge:
    from_id: int
    to_id: int
    s: float
    gamma_score: float


@dataclass(frozen=True)
class TrajectoryCandidate:
    axis_id: int
    nodes: tuple[int, ...]
    c_score: float
    k_score: float = 0.0
    distance: float = 0.0

    @property
    def first_id(self) -> float:
        return self.nodes[0] if self.nodes else math.inf


# ------------------------------------------------------------------ scoring


def favorability(d: Displacement, tool: ToolConfig) -> float:
    """Time slack in seconds for moving ``d.dy`` sideways while covering ``d.dx``."""
    return d.dx / tool.gamma - d.dy / tool.theta - tool.dwell


def feasibility(s, omega: float):
    """Logistic feasibility ``1 / (1 + exp(-omega * s))``; exactly 0.5 at ``s == 0``."""
    if np.ndim(s) == 0:
        z = omega * float(s)
        if z >= 0:
            return 1.0 / (1.0 + math.exp(-z))
        e = math.exp(z)
        return e / (1.0 + e)
    z = omega * np.asarray(s, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def harmfulness(w: Plant, crops: Sequence[Plant], ctx: HarmfulnessContext, *, return_flag: bool = False):
    """Threat ``kappa`` of weed ``w`` on its nearest crop.

    ``kappa = area_w * beta_w / (area_p * dist(w, p))`` where ``beta_w`` is the
    species weight times the priority weight. Without crops a nominal crop at
    ``ctx.reference_distance`` stands in. A weed on a crop center is clamped to
    ``ctx.max_kappa``; pass ``return_flag=True`` to get ``(kappa, degenerate)``.
    """
    if w.kind != "weed":
        raise ValueError(f"plant {w.id} is not a weed")
    beta = w.beta * ctx.priority_weights[w.priority]
    if crops:
        p = min(crops, key=lambda c: (math.hypot(c.x - w.x, c.y - w.y), c.id))
        area_p, dist = p.area_mm2, math.hypot(p.x - w.x, p.y - w.y)
    else:
        area_p, dist = ctx.nominal_crop_area, ctx.reference_distance
    num = w.area_mm2 * beta
    degenerate = dist == 0
    kappa = ctx.max_kappa if degenerate else min(num / (area_p * dist), ctx.max_kappa)
    return (kappa, degenerate) if return_flag else kappa


def harmfulness_map(field_model: FieldModel, ctx: HarmfulnessContext | None = None) -> dict[int, float]:
    """``kappa`` for every weed of a row, using a KD-tree for the nearest crop."""
    ctx = ctx or HarmfulnessContext()
    weeds = field_model.weeds
    crops = field_model.crops
    if not weeds:
        return {}
    if crops:
        tree = cKDTree([(c.x, c.y) for c in crops])
        dist, idx = tree.query([(w.x, w.y) for w in weeds])
        area_p = np.array([crops[i].area_mm2 for i in idx])
    else:
        dist = np.full(len(weeds), ctx.reference_distance)
        area_p = np.full(len(weeds), ctx.nominal_crop_area)
    out = {}
    for w, d, a in zip(weeds, dist.tolist(), area_p.tolist()):
        num = w.area_mm2 * w.beta * ctx.priority_weights[w.priority]
        out[w.id] = ctx.max_kappa if d == 0 else min(num / (a * d), ctx.max_kappa)
    return out


# -------------------------------------------------------------------- graph


@dataclass(frozen=True, eq=False)
class AxisGraph:
    """Start node plus targets; index 0 of the matrices is the start node.

    ``s[i, j]`` and ``gamma[i, j]`` are NaN where no edge ``i -> j`` exists.
    """

    axis_id: int
    start: tuple[float, float]
    node_ids: tuple[int, ...]
    xs: np.ndarray
    ys: np.ndarray
    s: np.ndarray
    gamma: np.ndarray
    dy: np.ndarray

    @property
    def n(self) -> int:
        return len(self.node_ids)

    def index(self, node_id: int) -> int:
        return 0 if node_id == START else self.node_ids.index(node_id) + 1

    def edges(self) -> list[FeasibilityEdge]:
        ids = (START,) + self.node_ids
        out = []
        for i, j in zip(*np.nonzero(~np.isnan(self.s))):
            out.append(FeasibilityEdge(ids[i], ids[j], float(self.s[i, j]), float(self.gamma[i, j])))
        return out


def build_graph(
    targets: AxisTargets | Sequence[Plant],
    field_model: FieldModel | None,
    tool: ToolConfig,
    cfg: PlannerConfig,
    start: tuple[float, float],
    axis_id: int | None = None,
) -> AxisGraph:
    if isinstance(targets, AxisTargets):
        axis_id = targets.axis_id if axis_id is None else axis_id
        if targets.plants:
            plants = list(targets.plants)
        else:
            lookup = field_model.by_id()
            plants = [lookup[i] for i in targets.targets]
    else:
        plants = list(targets)
    plants.sort(key=lambda p: (p.x, p.y, p.id))
    n = len(plants)
    xs = np.array([start[0]] + [p.x for p in plants])
    ys = np.array([start[1]] + [p.y for p in plants])
    if n and xs[1] < start[0]:
        raise OrderingError(f"target {plants[0].id} at x={xs[1]} lies behind the start x={start[0]}")
    dx = xs[None, :] - xs[:, None]
    dy = np.abs(ys[None, :] - ys[:, None])
    mask = dx > 0
    mask[0, 1:] = True
    mask[:, 0] = False
    s = np.where(mask, dx / tool.gamma - dy / tool.theta - tool.dwell, np.nan)
    g = np.full_like(s, np.nan)
    g[mask] = feasibility(s[mask], cfg.omega)
    return AxisGraph(
        axis_id=axis_id if axis_id is not None else 0,
        start=(float(start[0]), float(start[1])),
        node_ids=tuple(p.id for p in plants),
        xs=xs[1:],
        ys=ys[1:],
        s=s,
        gamma=g,
        dy=np.where(mask, dy, np.nan),
    )


# ------------------------------------------------------- enumerate & select


def score_trajectory(t: TrajectoryCandidate | Sequence[int], graph: AxisGraph, rho: float) -> float:
    """Mean edge feasibility along the trajectory, or 0 if any edge is below ``rho``."""
    nodes = t.nodes if isinstance(t, TrajectoryCandidate) else tuple(t)
    if not nodes:
        return 0.0
    idx = [0] + [graph.index(i) for i in nodes]
    total = 0.0
    for a, b in zip(idx, idx[1:]):
        g = graph.gamma[a, b]
        if not g >= rho:  # also catches NaN (missing edge)
            return 0.0
        total += float(g)
    return total / len(nodes)


def _path_distance(graph: AxisGraph, nodes: Sequence[int]) -> float:
    idx = [0] + [graph.index(i) for i in nodes]
    total = 0.0
    for a, b in zip(idx, idx[1:]):
        total += float(graph.dy[a, b])
    return total


def _check_cap(graph: AxisGraph, cfg: PlannerConfig) -> None:
    if graph.n > cfg.max_window_targets:
        raise WindowOverflowError(graph.n, cfg.max_window_targets)


def enumerate_notsp(
    graph: AxisGraph, cfg: PlannerConfig, kappa: Mapping[int, float] | None = None
) -> list[TrajectoryCandidate]:
    """All feasible trajectories through ``graph`` plus the empty one.

    Depth-first over increasing-``x`` extensions; a prefix is abandoned as soon
    as one of its edges falls below ``rho`` since its score is then zero.
    """
    _check_cap(graph, cfg)
    n, rho = graph.n, cfg.rho
    ids = graph.node_ids
    kap = [0.0 if kappa is None else kappa[i] for i in ids]
    out = [TrajectoryCandidate(graph.axis_id, (), 0.0, 0.0, 0.0)]

    def extend(last, path, gsum, ksum, dist):
        for j in range(1, n + 1):
            g = graph.gamma[last, j]
            if not g >= rho:
                continue
            p = path + (j - 1,)
            gs = gsum + float(g)
            ks = ksum + kap[j - 1]
            d = dist + float(graph.dy[last, j])
            out.append(TrajectoryCandidate(graph.axis_id, tuple(ids[k] for k in p), gs / len(p), ks, d))
            extend(j, p, gs, ks, d)

    extend(0, (), 0.0, 0.0, 0.0)
    return out


def _selection_key(t: TrajectoryCandidate, mode: str):
    c = round(t.c_score, _TIE_DECIMALS)
    d = round(t.distance, _TIE_DECIMALS)
    if mode == "baseline":
        return (-len(t.nodes), -c, d, t.first_id)
    return (-t.k_score, -c, d, t.first_id)


def select_trajectory(
    candidates: Iterable[TrajectoryCandidate],
    mode: str = "baseline",
    kappa: Mapping[int, float] | None = None,
) -> TrajectoryCandidate:
    """Pick the executed trajectory.

    ``baseline``: most nodes, then highest score. ``biodiv``: highest summed
    ``kappa`` among feasible candidates. Remaining ties go to the higher score,
    then the shorter lateral travel, then the lowest first-node id. When
    ``kappa`` is given, ``k_score`` is recomputed from it.
    """
    if mode not in ("baseline", "biodiv"):
        raise ValueError(f"mode must be baseline|biodiv, got {mode!r}")
    pool = []
    axis = 0
    for t in candidates:
        axis = t.axis_id
        if t.nodes and t.c_score <= 0:
            continue
        if kappa is not None:
            t = replace(t, k_score=sum(kappa[i] for i in t.nodes))
        pool.append(t)
    if not pool:
        return TrajectoryCandidate(axis, (), 0.0, 0.0, 0.0)
    return min(pool, key=lambda t: _selection_key(t, mode))


def best_trajectory(
    graph: AxisGraph,
    cfg: PlannerConfig,
    mode: str = "baseline",
    kappa: Mapping[int, float] | None = None,
) -> TrajectoryCandidate:
    """Vectorised equivalent of ``select_trajectory(enumerate_notsp(...))``.

    Every trajectory is a subset of the x-sorted targets, so all ``2**n``
    subsets are scored with a bitmask recurrence: adding the highest node
    ``h`` to a subset extends its path by one edge from the subset's last node.
    """
    _check_cap(graph, cfg)
    n = graph.n
    if n == 0:
        return TrajectoryCandidate(graph.axis_id, (), 0.0, 0.0, 0.0)
    size = 1 << n
    gam = np.nan_to_num(graph.gamma, nan=-1.0)
    dyy = np.nan_to_num(graph.dy, nan=0.0)
    kap = np.zeros(n) if kappa is None else np.array([kappa[i] for i in graph.node_ids], dtype=float)

    last = np.zeros(size, dtype=np.intp)
    first = np.zeros(size, dtype=np.intp)
    count = np.zeros(size, dtype=np.intp)
    gsum = np.zeros(size)
    gmin = np.full(size, np.inf)
    dist = np.zeros(size)
    ksum = np.zeros(size)
    for h in range(n):
        lo = 1 << h
        prev = np.arange(lo)
        m = prev + lo
        pl = last[prev]
        g = gam[pl, h + 1]
        gsum[m] = gsum[prev] + g
        gmin[m] = np.minimum(gmin[prev], g)
        dist[m] = dist[prev] + dyy[pl, h + 1]
        ksum[m] = ksum[prev] + kap[h]
        count[m] = count[prev] + 1
        last[m] = h + 1
        first[m] = np.where(prev == 0, h, first[prev])

    ok = gmin >= cfg.rho
    ok[0] = True
    cand = np.nonzero(ok)[0]
    cnt = count[cand]
    c = np.where(cnt > 0, gsum[cand] / np.maximum(cnt, 1), 0.0)
    ids = np.array(graph.node_ids)
    first_id = np.where(cnt > 0, ids[first[cand]], np.iinfo(np.int64).max)
    cq = np.round(c, _TIE_DECIMALS)
    dq = np.round(dist[cand], _TIE_DECIMALS)
    if mode == "baseline":
        order = np.lexsort((first_id, dq, -cq, -cnt))
    elif mode == "biodiv":
        order = np.lexsort((first_id, dq, -cq, -ksum[cand]))
    else:
        raise ValueError(f"mode must be baseline|biodiv, got {mode!r}")
    best = int(cand[order[0]])
    nodes = tuple(graph.node_ids[k] for k in range(n) if best >> k & 1)
    k_score = float(ksum[best]) if kappa is not None else 0.0
    return TrajectoryCandidate(graph.axis_id, nodes, float(c[order[0]]), k_score, float(dist[best]))


# --------------------------------------------------------------------- plans


@dataclass
class AxisPlan:
    axis_id: int
    band: tuple[float, float]
    start: tuple[float, float]
    nodes: list[int] = field(default_factory=list)
    windows: list[TrajectoryCandidate] = field(default_factory=list)


@dataclass
class Plan:
    mode: str
    biodiv: bool
    axes: list[AxisPlan]
    window_length: float

    def planned_ids(self) -> set[int]:
        return {i for a in self.axes for i in a.nodes}

    def nodes(self) -> list[list[int]]:
        return [list(a.nodes) for a in self.axes]

    def to_dict(self, field_model: FieldModel, tool: ToolConfig, cfg: PlannerConfig,
                kappa: Mapping[int, float] | None = None) -> dict:
        """Dump with per-edge slack and feasibility along each axis path."""
        lookup = field_model.by_id()
        axes = []
        for a in self.axes:
            edges = []
            prev_id, prev = START, a.start
            for nid in a.nodes:
                p = lookup[nid]
                s = favorability(displacement(prev, (p.x, p.y)), tool)
                edges.append({"from": prev_id, "to": nid, "s": s, "gamma": feasibility(s, cfg.omega)})
                prev_id, prev = nid, (p.x, p.y)
            gammas = [e["gamma"] for e in edges]
            c = sum(gammas) / len(gammas) if gammas and min(gammas) >= cfg.rho else 0.0
            k = sum(kappa[i] for i in a.nodes) if kappa else 0.0
            axes.append({
                "axis_id": a.axis_id,
                "band": list(a.band),
                "start": list(a.start),
                "nodes": list(a.nodes),
                "edges": edges,
                "c": c,
                "k": k,
            })
        return {
            "mode": self.mode,
            "biodiv": self.biodiv,
            "window_length": self.window_length,
            "tool": tool.to_dict(),
            "planner": cfg.to_dict(),
            "axes": axes,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Plan":
        axes = [
            AxisPlan(a["axis_id"], tuple(a["band"]), tuple(a["start"]), list(a["nodes"]))
            for a in d["axes"]
        ]
        return cls(d["mode"], bool(d["biodiv"]), axes, float(d["window_length"]))


class _Grid:
    """Window/stride boundaries ``origin + t * step`` shared by both observation models."""

    def __init__(self, origin: float, step: float):
        self.origin = origin
        self.step = step

    def edge(self, t: int) -> float:
        return self.origin + t * self.step

    def cell(self, x: float) -> int:
        c = int(math.floor((x - self.origin) / self.step))
        while c > 0 and x < self.edge(c):
            c -= 1
        while x >= self.edge(c + 1):
            c += 1
        return c


def _initial_axes(tool: ToolConfig, origin: float) -> list[AxisPlan]:
    return [AxisPlan(i, tool.band(i), (origin, tool.home(i))) for i in range(tool.heads)]


def _selection_mode(cfg: PlannerConfig) -> str:
    return "biodiv" if cfg.biodiv else "baseline"


def plan_segment_view(field_model: FieldModel, tool: ToolConfig, cfg: PlannerConfig,
                      ctx: HarmfulnessContext | None = None,
                      kappa: Mapping[int, float] | None = None) -> Plan:
    """Cut the row into disjoint windows and plan each one once, in order."""
    if cfg.biodiv and kappa is None:
        kappa = harmfulness_map(field_model, ctx)
    mode = _selection_mode(cfg)
    lo, hi = field_model.extent()
    grid = _Grid(lo, cfg.window_length)
    axes = _initial_axes(tool, lo)
    pos = [a.start for a in axes]
    buckets: dict[int, list[Plant]] = {}
    for p in field_model.weeds:
        buckets.setdefault(grid.cell(p.x), []).append(p)
    for w in sorted(buckets):
        for t in assign_static(buckets[w], tool):
            g = build_graph(t, field_model, tool, cfg, pos[t.axis_id])
            best = best_trajectory(g, cfg, mode, kappa)
            axes[t.axis_id].windows.append(best)
            if best.nodes:
                axes[t.axis_id].nodes.extend(best.nodes)
                last = t.plants[t.targets.index(best.nodes[-1])]
                pos[t.axis_id] = (last.x, last.y)
    return Plan("segment", cfg.biodiv, axes, cfg.window_length)


class RollingPlanner:
    """Receding-horizon planner state for all axes of one tool.

    Each :meth:`update` moves the commit frontier forward, freezes planned
    nodes behind it and, for every axis that received new weeds, replans the
    uncommitted suffix together with all still-reachable known weeds of its
    band. Without new weeds the plan is left untouched.
    """

    def __init__(self, tool: ToolConfig, cfg: PlannerConfig, kappa: Mapping[int, float] | None = None,
                 origin: float = 0.0):
        self.tool = tool
        self.cfg = cfg
        self.kappa = kappa
        self.mode = _selection_mode(cfg)
        self.axes = _initial_axes(tool, origin)
        self.frontier = -math.inf
        self._pos = [a.start for a in self.axes]
        self._committed = [0] * tool.heads  # length of the frozen prefix of axes[i].nodes
        self._known: list[dict[int, Plant]] = [{} for _ in range(tool.heads)]

    def plans(self) -> list[list[int]]:
        return [list(a.nodes) for a in self.axes]

    def _advance(self, frontier: float) -> None:
        if frontier < self.frontier:
            raise OrderingError(f"frontier moved backwards: {frontier} < {self.frontier}")
        self.frontier = frontier
        for i, a in enumerate(self.axes):
            known = self._known[i]
            k = self._committed[i]
            while k < len(a.nodes) and known[a.nodes[k]].x < frontier:
                p = known[a.nodes[k]]
                self._pos[i] = (p.x, p.y)
                k += 1
            self._committed[i] = k
            for pid in [pid for pid, p in known.items() if p.x < frontier]:
                del known[pid]

    def update(self, new_observations: Sequence[Plant], tool_x: float | None = None, *,
               frontier: float | None = None) -> list[list[int]]:
        """Advance the tool and fold ``new_observations`` into the plan.

        The commit frontier is ``tool_x + gamma * commit_time`` unless given
        directly. Observations behind it are rejected.
        """
        if frontier is None:
            if tool_x is None:
                raise ValueError("pass tool_x or frontier")
            frontier = tool_x + self.tool.gamma * self.cfg.commit_time
        for p in new_observations:
            if p.x < frontier:
                raise AlreadyPassedError(f"plant {p.id} at x={p.x} is behind the commit frontier x={frontier}")
        self._advance(frontier)
        weeds = [p for p in new_observations if p.kind == "weed"]
        if not weeds:
            return self.plans()
        for t in assign_static(weeds, self.tool):
            if not t.targets:
                continue
            i = t.axis_id
            a = self.axes[i]
            known = self._known[i]
            for p in t.plants:
                known[p.id] = p
            g = build_graph(list(known.values()), None, self.tool, self.cfg, self._pos[i], axis_id=i)
            best = best_trajectory(g, self.cfg, self.mode, self.kappa)
            a.windows.append(best)
            del a.nodes[self._committed[i]:]
            a.nodes.extend(best.nodes)
        return self.plans()

    def finish(self) -> list[list[int]]:
        self._advance(math.inf)
        return self.plans()


def plan_rolling_update(state: RollingPlanner, new_observations: Sequence[Plant],
                        tool_x: float | None = None, *, frontier: float | None = None) -> list[list[int]]:
    return state.update(new_observations, tool_x, frontier=frontier)


def plan_rolling_view(field_model: FieldModel, tool: ToolConfig, cfg: PlannerConfig,
                      ctx: HarmfulnessContext | None = None,
                      kappa: Mapping[int, float] | None = None) -> Plan:
    """Slide a window of ``window_length`` by ``stride`` along the row.

    Update ``k`` sees ``[origin + k*stride, origin + k*stride + window_length)``;
    its newly observed plants are those of the leading stride.
    """
    if cfg.biodiv and kappa is None:
        kappa = harmfulness_map(field_model, ctx)
    lo, hi = field_model.extent()
    m = cfg.strides_per_window
    grid = _Grid(lo, cfg.stride)
    buckets: dict[int, list[Plant]] = {}
    for p in field_model.plants:
        buckets.setdefault(grid.cell(p.x), []).append(p)
    last_cell = max(buckets, default=0)
    state = RollingPlanner(tool, cfg, kappa, origin=lo)
    first = [p for c in range(m) for p in buckets.get(c, [])]
    state.update(first, frontier=grid.edge(0))
    k = 1
    while k + m - 1 <= last_cell:
        state.update(buckets.get(k + m - 1, []), frontier=grid.edge(k))
        k += 1
    state.finish()
    return Plan("rolling", cfg.biodiv, state.axes, cfg.window_length)


def plan_field(field_model: FieldModel, tool: ToolConfig, cfg: PlannerConfig,
               ctx: HarmfulnessContext | None = None,
               kappa: Mapping[int, float] | None = None) -> Plan:
    if cfg.mode == "segment":
        return plan_segment_view(field_model, tool, cfg, ctx, kappa)
    return plan_rolling_view(field_model, tool, cfg, ctx, kappa)
