"""Plants, crop rows and synthetic Poisson weed fields.

Coordinates follow the robot frame: ``x`` runs along the direction of travel
(increasing ahead of the tool) and ``y`` is the lateral offset in ``[0, width)``
measured from the left edge of the weeding workspace.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Sequence

import jsonschema
import numpy as np

from .errors import DomainError, FieldFileError, FieldValidationError

KINDS = ("crop", "weed")
PRIORITIES = ("low", "high")

# Detections closer than this are the same plant.
DEDUP_TOLERANCE = 1e-3


@dataclass(frozen=True)
class Plant:
    id: int
    x: float
    y: float
    kind: str = "weed"
    species: str = "weed"
    area_mm2: float = 400.0
    beta: float = 1.0
    priority: str = "high"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FieldValidationError(f"plant {self.id}: kind must be one of {KINDS}, got {self.kind!r}")
        if self.priority not in PRIORITIES:
            raise FieldValidationError(
                f"plant {self.id}: priority must be one of {PRIORITIES}, got {self.priority!r}"
            )
        if not self.area_mm2 > 0:
            raise FieldValidationError(f"plant {self.id}: area_mm2 must be > 0, got {self.area_mm2}")
        if not self.beta >= 0:
            raise FieldValidationError(f"plant {self.id}: beta must be >= 0, got {self.beta}")
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise FieldValidationError(f"plant {self.id}: coordinates must be finite")

    @property
    def is_weed(self) -> bool:
        return self.kind == "weed"


@dataclass(frozen=True)
class SpeciesSpec:
    """One entry of a species mix; areas are log-normal around ``area_median_mm2``."""

    species: str
    fraction: float
    beta: float = 1.0
    priority: str = "high"
    area_median_mm2: float = 400.0
    area_sigma: float = 0.5

    def __post_init__(self):
        if not 0 <= self.fraction <= 1:
            raise FieldValidationError(f"species_mix[{self.species}].fraction must lie in [0, 1]")
        if self.beta < 0:
            raise FieldValidationError(f"species_mix[{self.species}].beta must be >= 0")
        if self.priority not in PRIORITIES:
            raise FieldValidationError(f"species_mix[{self.species}].priority must be low|high")
        if not self.area_median_mm2 > 0:
            raise FieldValidationError(f"species_mix[{self.species}].area_median_mm2 must be > 0")
        if self.area_sigma < 0:
            raise FieldValidationError(f"species_mix[{self.species}].area_sigma must be >= 0")


DEFAULT_SPECIES_MIX = (SpeciesSpec("weed", 1.0),)


@dataclass(frozen=True)
class FieldSpec:
    """Parameters of a synthetic row.

    ``lam`` is the weed density in weeds per square meter and ``width`` the
    lateral weeding width, so weeds arrive along the row at ``lam * width``
    per meter (see :attr:`arrival_rate`).
    """

    lam: float
    width: float = 1.39
    length: float = 100.0
    species_mix: tuple[SpeciesSpec, ...] = DEFAULT_SPECIES_MIX
    crop_spacing: float = 0.0
    seed: int = 0
    crop_area_mm2: float = 1000.0
    crop_area_sigma: float = 0.3
    crop_jitter: float = 0.01
    crop_species: str = "crop"

    def __post_init__(self):
        object.__setattr__(self, "species_mix", tuple(self.species_mix))
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise FieldValidationError(f"lambda must be a finite value >= 0, got {self.lam}")
        if not self.width > 0:
            raise FieldValidationError(f"width must be > 0, got {self.width}")
        if not self.length > 0:
            raise FieldValidationError(f"length must be > 0, got {self.length}")
        if self.crop_spacing < 0:
            raise FieldValidationError(f"crop_spacing must be >= 0, got {self.crop_spacing}")
        if self.crop_jitter < 0:
            raise FieldValidationError(f"crop_jitter must be >= 0, got {self.crop_jitter}")
        if not self.crop_area_mm2 > 0:
            raise FieldValidationError(f"crop_area_mm2 must be > 0, got {self.crop_area_mm2}")
        if not self.species_mix:
            raise FieldValidationError("species_mix must not be empty")
        total = sum(s.fraction for s in self.species_mix)
        if abs(total - 1.0) > 1e-9:
            raise FieldValidationError(f"species_mix fractions must sum to 1, got {total!r}")

    @property
    def arrival_rate(self) -> float:
        """Weeds per meter of row (``eta``)."""
        return self.lam * self.width

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        d["species_mix"] = [asdict(s) for s in self.species_mix]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FieldSpec":
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        mix = d.pop("species_mix", None)
        if mix is not None:
            d["species_mix"] = tuple(SpeciesSpec(**m) for m in mix)
        try:
            return cls(**d)
        except TypeError as exc:
            raise FieldValidationError(f"spec: {exc}") from None


@dataclass(frozen=True)
class FieldModel:
    """A row of plants sorted by ``(x, y, id)``.

    Use :func:`make_field` to build one from unsorted or noisy input.
    ``spec`` is either the generating :class:`FieldSpec` or a metadata dict
    for ingested rows; either way it carries the weeding width.
    """

    spec: FieldSpec | dict
    plants: tuple[Plant, ...] = field(default_factory=tuple)

    @property
    def width(self) -> float:
        if isinstance(self.spec, FieldSpec):
            return self.spec.width
        return float(self.spec["width"])

    @property
    def weeds(self) -> list[Plant]:
        return [p for p in self.plants if p.kind == "weed"]

    @property
    def crops(self) -> list[Plant]:
        return [p for p in self.plants if p.kind == "crop"]

    def by_id(self) -> dict[int, Plant]:
        return {p.id: p for p in self.plants}

    def extent(self) -> tuple[float, float]:
        """Along-row range covered by the row, starting at the origin or earlier."""
        length = self.spec.length if isinstance(self.spec, FieldSpec) else self.spec.get("length")
        xs = [p.x for p in self.plants]
        lo = min([0.0, *xs])
        hi = max([float(length or 0.0), *xs])
        return lo, hi

    def subset(self, keep: Iterable[int]) -> "FieldModel":
        keep = set(keep)
        return replace(self, plants=tuple(p for p in self.plants if p.id in keep))


def _sort_key(p: Plant):
    return (p.x, p.y, p.id)


def make_field(spec: FieldSpec | dict, plants: Sequence[Plant], *, warn: bool = True) -> FieldModel:
    """Validate, sort and de-duplicate ``plants`` into a :class:`FieldModel`."""
    width = spec.width if isinstance(spec, FieldSpec) else spec.get("width")
    if width is None or not width > 0:
        raise FieldValidationError("spec.width must be given and > 0")
    ids = set()
    for i, p in enumerate(plants):
        if not 0 <= p.y < width:
            raise FieldValidationError(f"plants[{i}].y_m={p.y} outside [0, {width})")
        if p.id in ids:
            raise FieldValidationError(f"plants[{i}].id={p.id} is not unique")
        ids.add(p.id)

    ordered = sorted(plants, key=_sort_key)
    if warn and list(plants) != ordered:
        warnings.warn("plants were not sorted by (x, y, id); re-sorted", stacklevel=2)

    kept: list[Plant] = []
    dropped = 0
    for p in ordered:
        j = len(kept) - 1
        duplicate = False
        while j >= 0 and p.x - kept[j].x < DEDUP_TOLERANCE:
            if math.hypot(p.x - kept[j].x, p.y - kept[j].y) < DEDUP_TOLERANCE:
                duplicate = True
                break
            j -= 1
        if duplicate:
            dropped += 1
        else:
            kept.append(p)
    if dropped and warn:
        warnings.warn(f"dropped {dropped} plant(s) within 1 mm of another plant", stacklevel=2)
    return FieldModel(spec=spec, plants=tuple(kept))


def generate_field(spec: FieldSpec) -> FieldModel:
    """Draw a row from ``spec``.

    Weed gaps along ``x`` are exponential with rate ``lam * width``; lateral
    positions are uniform over the width. Crops, when ``crop_spacing > 0``, sit
    on a jittered lattice along the row center line. The result depends only
    on ``spec`` (including its seed).
    """
    if not isinstance(spec, FieldSpec):
        raise FieldValidationError("generate_field expects a FieldSpec")
    rng = np.random.default_rng(spec.seed)
    eta = spec.arrival_rate

    xs: list[float] = []
    if eta > 0:
        pos = 0.0
        # Draw gaps in blocks until the row is covered.
        block = max(16, int(eta * spec.length * 1.2) + 16)
        while pos < spec.length:
            gaps = rng.exponential(1.0 / eta, size=block)
            cum = pos + np.cumsum(gaps)
            inside = cum[cum < spec.length]
            xs.extend(inside.tolist())
            pos = float(cum[-1])
    n = len(xs)
    ys = rng.uniform(0.0, spec.width, size=n)
    fractions = np.array([s.fraction for s in spec.species_mix])
    which = rng.choice(len(spec.species_mix), size=n, p=fractions / fractions.sum())
    normals = rng.standard_normal(size=n)

    raw: list[tuple] = []
    for x, y, k, z in zip(xs, ys.tolist(), which.tolist(), normals.tolist()):
        s = spec.species_mix[k]
        area = s.area_median_mm2 * math.exp(s.area_sigma * z)
        raw.append((x, y, "weed", s.species, area, s.beta, s.priority))

    if spec.crop_spacing > 0:
        n_crops = int(math.floor(spec.length / spec.crop_spacing))
        centers = spec.crop_spacing * (np.arange(n_crops) + 0.5)
        jx = rng.normal(0.0, spec.crop_jitter, size=n_crops) if spec.crop_jitter else np.zeros(n_crops)
        jy = rng.normal(0.0, spec.crop_jitter, size=n_crops) if spec.crop_jitter else np.zeros(n_crops)
        za = rng.standard_normal(size=n_crops)
        upper = math.nextafter(spec.width, 0.0)
        for cx, dx, dy, z in zip(centers.tolist(), jx.tolist(), jy.tolist(), za.tolist()):
            x = min(max(cx + dx, 0.0), spec.length)
            y = min(max(spec.width / 2 + dy, 0.0), upper)
            area = spec.crop_area_mm2 * math.exp(spec.crop_area_sigma * z)
            raw.append((x, y, "crop", spec.crop_species, area, 0.0, "low"))

    raw.sort(key=lambda r: (r[0], r[1]))
    plants = [
        Plant(id=i, x=r[0], y=r[1], kind=r[2], species=r[3], area_mm2=r[4], beta=r[5], priority=r[6])
        for i, r in enumerate(raw)
    ]
    return make_field(spec, plants, warn=False)


def reach_probability(delta_y, gamma, theta, eta):
    """Probability that the next weed leaves enough time to cover ``delta_y``.

    With along-row gaps ``dx ~ Exponential(eta)`` this is
    ``P(dx / delta_y > gamma / theta) = exp(-eta * gamma / theta * delta_y)``.
    Accepts scalars or numpy arrays.
    """
    dy = np.asarray(delta_y, dtype=float)
    g = np.asarray(gamma, dtype=float)
    th = np.asarray(theta, dtype=float)
    e = np.asarray(eta, dtype=float)
    if np.any(dy < 0) or np.any(g < 0) or np.any(e < 0):
        raise DomainError("delta_y, gamma and eta must be non-negative")
    if np.any(th <= 0):
        raise DomainError("theta must be positive")
    p = np.exp(-e * (g / th) * dy)
    return float(p) if p.ndim == 0 else p


# ---------------------------------------------------------------- file I/O

_PLANT_SCHEMA = {
    "type": "object",
    "required": ["id", "x_m", "y_m", "kind", "species", "area_mm2", "beta", "priority"],
    "properties": {
        "id": {"type": "integer"},
        "x_m": {"type": "number"},
        "y_m": {"type": "number"},
        "kind": {"enum": list(KINDS)},
        "species": {"type": "string"},
        "area_mm2": {"type": "number", "exclusiveMinimum": 0},
        "beta": {"type": "number", "minimum": 0},
        "priority": {"enum": list(PRIORITIES)},
    },
    "additionalProperties": False,
}

FIELD_SCHEMA = {
    "type": "object",
    "required": ["spec", "plants"],
    "properties": {
        "spec": {
            "type": "object",
            "required": ["width"],
            "properties": {"width": {"type": "number", "exclusiveMinimum": 0}},
        },
        "plants": {"type": "array", "items": _PLANT_SCHEMA},
    },
}


def plant_to_dict(p: Plant) -> dict:
    return {
        "id": p.id,
        "x_m": p.x,
        "y_m": p.y,
        "kind": p.kind,
        "species": p.species,
        "area_mm2": p.area_mm2,
        "beta": p.beta,
        "priority": p.priority,
    }


def field_to_dict(model: FieldModel) -> dict:
    spec = model.spec.to_dict() if isinstance(model.spec, FieldSpec) else dict(model.spec)
    return {"spec": spec, "plants": [plant_to_dict(p) for p in model.plants]}


def field_from_dict(doc: Any) -> FieldModel:
    validator = jsonschema.Draft7Validator(FIELD_SCHEMA)
    err = next(iter(sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))), None)
    if err is not None:
        where = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise FieldFileError(f"{where}: {err.message}", field=where)
    raw_spec = doc["spec"]
    spec: FieldSpec | dict
    if "lambda" in raw_spec and "species_mix" in raw_spec:
        spec = FieldSpec.from_dict(raw_spec)
    else:
        spec = dict(raw_spec)
    plants = []
    for i, d in enumerate(doc["plants"]):
        try:
            plants.append(
                Plant(
                    id=d["id"],
                    x=float(d["x_m"]),
                    y=float(d["y_m"]),
                    kind=d["kind"],
                    species=d["species"],
                    area_mm2=float(d["area_mm2"]),
                    beta=float(d["beta"]),
                    priority=d["priority"],
                )
            )
        except FieldValidationError as exc:
            raise FieldFileError(f"plants.{i}: {exc}", field=f"plants.{i}") from None
    return make_field(spec, plants)


def save_field(model: FieldModel, path) -> None:
    Path(path).write_text(json.dumps(field_to_dict(model), indent=1) + "\n")


def load_field(path) -> FieldModel:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FieldFileError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}", line=exc.lineno) from None
    return field_from_dict(doc)
