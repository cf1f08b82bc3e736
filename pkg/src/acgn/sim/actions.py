"""Kinematic action plans.

An action compiles to a per-frame list of absolute attribute patches for
the objects it touches. Plans from commands with disjoint object sets can
be merged frame-wise, which is how concurrent episodes advance both
actions at once. Moving objects carry a transient z boost on every
non-final frame so they paint in front while in transit.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConflictError
from ..vocab import ActionCommand, NOOP_VERB
from .world import ObjectSpec, Scene

Z_TRANSIT = 10_000

KEEP_HELD = "keep"


@dataclass
class ActionPlan:
    cmd: ActionCommand
    object_ids: frozenset
    frames: list[dict[int, dict]]  # per step: object id -> absolute attribute values
    held_during: object = KEEP_HELD  # id, None, or KEEP_HELD
    held_after: object = KEEP_HELD


def lift_plan(obj: ObjectSpec, speed: int, t_act: int, rotate: bool = False) -> list[dict[int, dict]]:
    frames = []
    for k in range(1, t_act + 1):
        patch = {"y": obj.y - speed * k}
        if rotate:
            patch["angle"] = obj.angle + min(90.0, 90.0 * k / t_act)
        patch["z"] = obj.z if k == t_act else Z_TRANSIT + obj.id
        frames.append({obj.id: patch})
    return frames


def descend_plan(obj: ObjectSpec, tx: int, ty: int, speed: int, t_act: int,
                 final_extra: dict | None = None) -> list[dict[int, dict]]:
    y_start = -(obj.h + 1) // 2
    frames = []
    for k in range(1, t_act + 1):
        patch = {"x": tx, "y": min(y_start + speed * k, ty)}
        patch["z"] = obj.z if k == t_act else Z_TRANSIT + obj.id
        if k == t_act and final_extra:
            patch.update(final_extra)
        frames.append({obj.id: patch})
    return frames


def sweep_plan(obj: ObjectSpec, opening: bool, t_act: int) -> list[dict[int, dict]]:
    frames = []
    for k in range(1, t_act + 1):
        f = k / t_act if opening else 1.0 - k / t_act
        frames.append({obj.id: {"open_fraction": f}})
    return frames


def noop_plan(cmd: ActionCommand, t_act: int) -> ActionPlan:
    return ActionPlan(cmd=cmd, object_ids=frozenset(), frames=[{} for _ in range(t_act)])


def apply_plans(scene: Scene, plans: list[ActionPlan]) -> list[Scene]:
    """Run one or more disjoint plans from `scene`, returning the frame scenes."""
    if len(plans) > 1:
        touched = [p.object_ids for p in plans]
        for i in range(len(touched)):
            for j in range(i + 1, len(touched)):
                common = touched[i] & touched[j]
                if common:
                    raise ConflictError(
                        f"concurrent commands touch the same objects: {sorted(common)}"
                    )
    t_act = len(plans[0].frames)
    if any(len(p.frames) != t_act for p in plans):
        raise ConflictError("concurrent commands must share the same duration")
    scenes = []
    current = scene.copy()
    for k in range(t_act):
        current = current.copy()
        for plan in plans:
            for obj_id, patch in plan.frames[k].items():
                obj = current.get(obj_id)
                for attr, value in patch.items():
                    setattr(obj, attr, value)
        if len(plans) == 1:
            held = plans[0].held_after if k == t_act - 1 else plans[0].held_during
            if held != KEEP_HELD:
                current.held_object = held
        else:
            current.held_object = None
        scenes.append(current)
    return scenes


def command_object_ids(scene: Scene, cmd: ActionCommand) -> frozenset:
    ids = set()
    if cmd.verb == NOOP_VERB:
        return frozenset()
    if cmd.subject:
        obj = scene.find(*cmd.subject)
        if obj is not None:
            ids.add(obj.id)
    if cmd.reference:
        obj = scene.find(*cmd.reference)
        if obj is not None:
            ids.add(obj.id)
    return frozenset(ids)
