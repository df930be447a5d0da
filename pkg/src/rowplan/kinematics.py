"""Tool geometry, axis bands and timing along the row."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import AlreadyPassedError, ConfigError, OrderingError


@dataclass(frozen=True)
class ToolConfig:
    """Weeding tool with ``heads`` lateral axes sharing the width ``width``.

    Defaults: four axes over a 1.39 m lateral span, a 0.36 m deep workspace,
    5 cm spray footprint, robot at 0.5 m/s and axes at 5 m/s. Axes are modelled
    by their velocity limit only.
    """

    heads: int = 4
    width: float = 1.39
    length: float = 0.36
    footprint: float = 0.05
    gamma: float = 0.5
    theta: float = 5.0
    dwell: float = 0.0

    def __post_init__(self):
        if int(self.heads) != self.heads or self.heads < 1:
            raise ConfigError(f"heads must be an integer >= 1, got {self.heads}")
        if not self.width > 0:
            raise ConfigError(f"width must be > 0, got {self.width}")
        if not self.length > 0:
            raise ConfigError(f"length must be > 0, got {self.length}")
        if not self.gamma > 0:
            raise ConfigError(f"gamma must be > 0, got {self.gamma}")
        if not self.theta > 0:
            raise ConfigError(f"theta must be > 0, got {self.theta}")
        if not self.footprint > 0:
            raise ConfigError(f"footprint must be > 0, got {self.footprint}")
        if self.dwell < 0:
            raise ConfigError(f"dwell must be >= 0, got {self.dwell}")

    @property
    def band_width(self) -> float:
        return self.width / self.heads

    def band(self, axis: int) -> tuple[float, float]:
        """Half-open lateral band ``[lo, hi)`` owned by ``axis``."""
        if not 0 <= axis < self.heads:
            raise IndexError(axis)
        lo = axis * self.width / self.heads
        hi = self.width if axis == self.heads - 1 else (axis + 1) * self.width / self.heads
        return lo, hi

    def bands(self) -> list[tuple[float, float]]:
        return [self.band(i) for i in range(self.heads)]

    def axis_of(self, y: float) -> int:
        """Index of the band containing ``y``; boundary points go to the upper band."""
        if not 0 <= y < self.width:
            raise ValueError(f"y={y} outside [0, {self.width})")
        i = min(int(y * self.heads / self.width), self.heads - 1)
        # Float division can land one band off near a boundary.
        while i > 0 and y < self.band(i)[0]:
            i -= 1
        while i < self.heads - 1 and y >= self.band(i + 1)[0]:
            i += 1
        return i

    def home(self, axis: int) -> float:
        lo, hi = self.band(axis)
        return 0.5 * (lo + hi)

    def to_dict(self) -> dict:
        return {
            "heads": self.heads,
            "width": self.width,
            "length": self.length,
            "footprint_m": self.footprint,
            "gamma": self.gamma,
            "theta": self.theta,
            "dwell_s": self.dwell,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ToolConfig":
        d = dict(d)
        if "footprint_m" in d:
            d["footprint"] = d.pop("footprint_m")
        if "dwell_s" in d:
            d["dwell"] = d.pop("dwell_s")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(f"tool: {exc}") from None


@dataclass(frozen=True)
class Displacement:
    dx: float
    dy: float

    def __post_init__(self):
        if self.dx < 0 or self.dy < 0:
            raise OrderingError(f"displacement components must be >= 0, got ({self.dx}, {self.dy})")


def displacement(src, dst) -> Displacement:
    """Along-row and absolute lateral separation from ``src`` to ``dst``."""
    dx = dst[0] - src[0]
    if dx < 0:
        raise OrderingError(f"target at x={dst[0]} lies behind x={src[0]}; sort targets by x")
    return Displacement(dx, abs(dst[1] - src[1]))


def entry_time(plant_x: float, tool_x: float, gamma: float) -> float:
    """Seconds until the tool line reaches ``plant_x``."""
    if plant_x < tool_x:
        raise AlreadyPassedError(f"plant at x={plant_x} already passed the tool at x={tool_x}")
    if not gamma > 0:
        raise ConfigError("gamma must be > 0")
    return (plant_x - tool_x) / gamma
