"""Distribution of weeds among the intervention heads."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import AssignmentError
from .field import Plant
from .kinematics import ToolConfig


@dataclass(frozen=True)
class AxisTargets:
    axis_id: int
    targets: tuple[int, ...]
    band: tuple[float, float]
    plants: tuple[Plant, ...] = ()


def assign_static(window: Iterable[Plant], tool: ToolConfig) -> list[AxisTargets]:
    """Static work-space division: each axis takes the weeds in its lateral band.

    Bands are ``[i * W / H, (i + 1) * W / H)``; crops are never assigned.
    """
    buckets: list[list[Plant]] = [[] for _ in range(tool.heads)]
    for p in window:
        if not 0 <= p.y < tool.width:
            raise AssignmentError(f"plant {p.id} at y={p.y} lies outside [0, {tool.width})")
        if p.kind != "weed":
            continue
        buckets[tool.axis_of(p.y)].append(p)
    out = []
    for i, b in enumerate(buckets):
        b.sort(key=lambda p: (p.x, p.y, p.id))
        out.append(AxisTargets(i, tuple(p.id for p in b), tool.band(i), tuple(b)))
    return out


def assign_distance(window, tool):
    raise NotImplementedError("distance-based target assignment is not implemented; use assign_static")


def assign_dynamic(window, tool):
    raise NotImplementedError("dynamic work-space division is not implemented; use assign_static")


STRATEGIES = {"static": assign_static, "distance": assign_distance, "dynamic": assign_dynamic}
