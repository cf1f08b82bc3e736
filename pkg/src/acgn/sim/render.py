"""Deterministic rasterizer for scenes.

Painter's algorithm over per-object boolean masks. Appliances paint in two
passes (body+interior, then door) so a contained object can sit between
them; held objects paint above everything. The per-pixel owner map drives
tight bounding boxes: a box spans exactly the pixels an object won.
"""

from __future__ import annotations

import numpy as np

from .world import (
    BACKGROUND, FLOOR_COLOR, INTERIOR_COLOR, KITCHEN, PALETTE, TRIM_COLOR,
    ObjectSpec, Scene,
)

OPENABLE_KINDS = ("oven", "fridge", "dishwasher", "safe")
MOVABLE_KINDS = ("bottle", "kettle", "pot", "dispenser")
DOOR_VISIBLE_THRESHOLD = 0.5  # contents hidden while the door covers more than half


def _grid(h, w):
    yy, xx = np.mgrid[0:h, 0:w]
    return xx + 0.5, yy + 0.5


def _rot(dx, dy, angle):
    if angle == 0.0:
        return dx, dy
    rad = np.deg2rad(angle)
    c, s = np.cos(rad), np.sin(rad)
    return c * dx + s * dy, -s * dx + c * dy


def _rect(dx, dy, cx, cy, w, h):
    return (np.abs(dx - cx) <= w / 2) & (np.abs(dy - cy) <= h / 2)


def _shape_mask(obj: ObjectSpec, h: int, w: int) -> np.ndarray:
    xx, yy = _grid(h, w)
    dx, dy = _rot(xx - obj.x, yy - obj.y, obj.angle)
    hw, hh = obj.w / 2, obj.h / 2
    if obj.kind == "square":
        return _rect(dx, dy, 0, 0, obj.w, obj.h)
    if obj.kind == "circle":
        return (dx / hw) ** 2 + (dy / hh) ** 2 <= 1.0
    if obj.kind == "triangle":
        v = np.array([[0.0, -hh], [hw, hh], [-hw, hh]])
        inside = np.ones_like(dx, dtype=bool)
        for i in range(3):
            ax, ay = v[i]
            bx, by = v[(i + 1) % 3]
            inside &= (bx - ax) * (dy - ay) - (by - ay) * (dx - ax) >= 0
        return inside
    if obj.kind == "diamond":
        return np.abs(dx) / hw + np.abs(dy) / hh <= 1.0
    if obj.kind == "bottle":
        body = _rect(dx, dy, 0, obj.h * 0.19, obj.w, obj.h * 0.62)
        neck = _rect(dx, dy, 0, -obj.h * 0.31, obj.w * 0.4, obj.h * 0.38)
        return body | neck
    if obj.kind == "kettle":
        body = _rect(dx, dy, 0, obj.h * 0.15, obj.w, obj.h * 0.70)
        handle = _rect(dx, dy, 0, -obj.h * 0.38, obj.w * 0.45, obj.h * 0.20)
        return body | handle
    if obj.kind == "pot":
        body = _rect(dx, dy, 0, obj.h * 0.19, obj.w, obj.h * 0.62)
        lid = _rect(dx, dy, 0, -obj.h * 0.20, obj.w, obj.h * 0.16)
        knob = _rect(dx, dy, 0, -obj.h * 0.38, obj.w * 0.2, obj.h * 0.14)
        return body | lid | knob
    if obj.kind == "dispenser":
        body = _rect(dx, dy, -obj.w * 0.1, 0, obj.w * 0.8, obj.h)
        nozzle = _rect(dx, dy, obj.w * 0.35, -obj.h * 0.25, obj.w * 0.3, obj.h * 0.2)
        return body | nozzle
    if obj.kind in OPENABLE_KINDS:
        return _rect(dx, dy, 0, 0, obj.w, obj.h)
    raise ValueError(f"unknown object kind {obj.kind!r}")


def interior_rect(obj: ObjectSpec) -> tuple[float, float, float, float]:
    """(x0, y0, x1, y1) of an appliance's interior cavity."""
    return (obj.left + 3, obj.top + 6, obj.right - 3, obj.bottom - 3)


def interior_slot(obj: ObjectSpec, item_h: int) -> tuple[int, int]:
    """Resting center for an object stored inside an appliance."""
    x0, _, x1, y1 = interior_rect(obj)
    return round((x0 + x1) / 2), round(y1 - item_h / 2)


def _appliance_trim(obj: ObjectSpec, xx, yy) -> np.ndarray:
    dx, dy = xx - obj.x, yy - obj.y
    if obj.kind == "oven":
        return _rect(dx, dy, 0, -obj.h / 2 + 3, obj.w - 6, 2)
    if obj.kind == "fridge":
        return _rect(dx, dy, -obj.w / 2 + 2, 0, 2, obj.h - 4)
    if obj.kind == "dishwasher":
        return _rect(dx, dy, 0, obj.h / 2 - 2, obj.w - 6, 2)
    if obj.kind == "safe":
        return _rect(dx, dy, 0, -obj.h / 2 + 3, 4, 3)
    raise ValueError(obj.kind)


def _door_mask(obj: ObjectSpec, h: int, w: int) -> np.ndarray:
    """Door panel: covers the interior from the top, receding as it opens."""
    x0, y0, x1, y1 = interior_rect(obj)
    door_h = (1.0 - obj.open_fraction) * (y1 - y0)
    if door_h <= 0:
        return np.zeros((h, w), dtype=bool)
    xx, yy = _grid(h, w)
    return (xx >= x0) & (xx <= x1) & (yy >= y0) & (yy <= y0 + door_h)


def _shade(color, factor=0.78):
    return tuple(c * factor for c in color)


def _layers(scene: Scene):
    """(z_key, obj, part) paint order; part in {body, interior, trim, door, plain}."""
    out = []
    for obj in scene.objects:
        if obj.contained_in is not None:
            container = scene.get(obj.contained_in)
            if container.open_fraction < DOOR_VISIBLE_THRESHOLD:
                continue  # fully occluded, contributes no pixels and no box
            out.append(((container.z, 1), obj, "plain"))
        elif scene.held_object == obj.id:
            out.append(((10_000 + obj.z, 0), obj, "plain"))
        elif obj.openable:
            out.append(((obj.z, 0), obj, "appliance"))
            out.append(((obj.z, 2), obj, "door"))
        else:
            out.append(((obj.z, 0), obj, "plain"))
    out.sort(key=lambda item: item[0])
    return out


def render_with_owners(scene: Scene) -> tuple[np.ndarray, np.ndarray]:
    h, w = scene.canvas
    img = np.empty((h, w, 3), dtype=np.float32)
    img[:] = BACKGROUND
    owner = np.full((h, w), -1, dtype=np.int32)
    if scene.env_kind == KITCHEN:
        floor_y = h - 6
        img[floor_y:, :] = FLOOR_COLOR
    for _, obj, part in _layers(scene):
        color = PALETTE[obj.color]
        if part == "plain":
            mask = _shape_mask(obj, h, w)
            img[mask] = color
            owner[mask] = obj.id
        elif part == "appliance":
            body = _shape_mask(obj, h, w)
            img[body] = color
            owner[body] = obj.id
            xx, yy = _grid(h, w)
            x0, y0, x1, y1 = interior_rect(obj)
            cavity = (xx >= x0) & (xx <= x1) & (yy >= y0) & (yy <= y1)
            img[cavity] = INTERIOR_COLOR
            trim = _appliance_trim(obj, xx, yy)
            img[trim] = TRIM_COLOR
        elif part == "door":
            door = _door_mask(obj, h, w)
            img[door] = _shade(PALETTE[obj.color])
            owner[door] = obj.id
    return img, owner


def render(scene: Scene) -> np.ndarray:
    """Rasterize to (H, W, 3) float32 in [0, 1]."""
    return render_with_owners(scene)[0]


def boxes(scene: Scene) -> dict[int, tuple[int, int, int, int]]:
    """Tight per-object boxes (x_min, y_min, x_max, y_max), inclusive pixels.

    Objects that won no pixels (off canvas, behind a closed door) have no box.
    """
    _, owner = render_with_owners(scene)
    out = {}
    for obj in scene.objects:
        ys, xs = np.nonzero(owner == obj.id)
        if ys.size:
            out[obj.id] = (int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))
    return out


def to_u8(frame: np.ndarray) -> np.ndarray:
    return (np.clip(frame, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def from_u8(frame: np.ndarray) -> np.ndarray:
    return frame.astype(np.float32) / 255.0
