"""Scene state for the procedural 2-D environments.

Coordinates are pixels with y pointing down; object (x, y) is the sprite
center and (w, h) its bounding extent. Pixel centers sit at half-integer
offsets, so integer centers with even sizes rasterize crisply.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Optional

PALETTE = {
    "red": (0.90, 0.12, 0.12),
    "green": (0.10, 0.75, 0.22),
    "blue": (0.15, 0.35, 0.95),
    "yellow": (0.95, 0.85, 0.10),
    "magenta": (0.85, 0.15, 0.80),
    "cyan": (0.10, 0.80, 0.85),
    "orange": (0.95, 0.55, 0.10),
    "white": (0.92, 0.92, 0.92),
    "slate": (0.45, 0.52, 0.60),
    "brown": (0.60, 0.38, 0.16),
}

BACKGROUND = (0.10, 0.10, 0.12)
FLOOR_COLOR = (0.17, 0.17, 0.19)
INTERIOR_COLOR = (0.045, 0.045, 0.055)
TRIM_COLOR = (0.05, 0.05, 0.06)

BLOCKS = "blocks"
KITCHEN = "kitchen"


@dataclass
class ObjectSpec:
    """One scene object; `kind` is a shape (blocks) or category (kitchen)."""

    id: int
    kind: str
    color: str
    x: int
    y: int
    w: int
    h: int
    z: int
    angle: float = 0.0
    openable: bool = False
    open_fraction: float = 0.0
    contained_in: Optional[int] = None

    @property
    def left(self):
        return self.x - self.w / 2

    @property
    def right(self):
        return self.x + self.w / 2

    @property
    def top(self):
        return self.y - self.h / 2

    @property
    def bottom(self):
        return self.y + self.h / 2

    def to_json(self) -> dict:
        return {
            "id": self.id, "kind": self.kind, "color": self.color,
            "x": self.x, "y": self.y, "w": self.w, "h": self.h, "z": self.z,
            "angle": self.angle, "openable": self.openable,
            "open_fraction": round(self.open_fraction, 6),
            "contained_in": self.contained_in,
        }

    @staticmethod
    def from_json(d: dict) -> "ObjectSpec":
        return ObjectSpec(**d)


@dataclass
class Scene:
    env_kind: str
    canvas: tuple[int, int]  # (H, W)
    objects: list[ObjectSpec] = field(default_factory=list)
    held_object: Optional[int] = None

    def copy(self) -> "Scene":
        return copy.deepcopy(self)

    def get(self, obj_id: int) -> ObjectSpec:
        for o in self.objects:
            if o.id == obj_id:
                return o
        raise KeyError(f"no object with id {obj_id}")

    def find(self, kind: str, color: str) -> Optional[ObjectSpec]:
        for o in self.objects:
            if o.kind == kind and o.color == color:
                return o
        return None

    def validate(self):
        ids = [o.id for o in self.objects]
        if len(set(ids)) != len(ids):
            raise ValueError("object ids must be unique")
        zs = [o.z for o in self.objects]
        if len(set(zs)) != len(zs):
            raise ValueError("z draw order must be unique")
        pairs = [(o.kind, o.color) for o in self.objects]
        if len(set(pairs)) != len(pairs):
            raise ValueError("(kind, color) combinations must be unique")
        if self.held_object is not None:
            self.get(self.held_object)
        for o in self.objects:
            if o.contained_in is not None and not self.get(o.contained_in).openable:
                raise ValueError(f"object {o.id} contained in a non-openable object")

    def to_json(self) -> dict:
        return {
            "env_kind": self.env_kind,
            "canvas": list(self.canvas),
            "objects": [o.to_json() for o in self.objects],
            "held_object": self.held_object,
        }

    @staticmethod
    def from_json(d: dict) -> "Scene":
        return Scene(
            env_kind=d["env_kind"],
            canvas=tuple(d["canvas"]),
            objects=[ObjectSpec.from_json(o) for o in d["objects"]],
            held_object=d.get("held_object"),
        )


def overlaps(a: ObjectSpec, b: ObjectSpec, gap: float = 0.0) -> bool:
    """Axis-aligned extent intersection test with a required clearance gap."""
    return (abs(a.x - b.x) < (a.w + b.w) / 2 + gap) and (abs(a.y - b.y) < (a.h + b.h) / 2 + gap)


def rests_on(a: ObjectSpec, b: ObjectSpec) -> bool:
    """True when a sits directly on top of b (touching, horizontally overlapping)."""
    return abs(a.bottom - b.top) < 0.5 and abs(a.x - b.x) < (a.w + b.w) / 2


def even_scaled(value: float, scale: float) -> int:
    """Scale a base-64 size and round to the nearest even pixel count."""
    return max(2, 2 * round(value * scale / 2))
