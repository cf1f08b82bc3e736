"""Building-blocks environment: flat shapes picked up and put back down.

Atomic actions: pick, pick_rotate (in-plane 90 degrees), and put with one
of five spatial relations. An episode is three consecutive pick/put pairs.
"""

from __future__ import annotations

import numpy as np

from ..errors import PlacementError, PreconditionError
from ..vocab import ActionCommand, NONE_WORD, NOOP_VERB, Vocabulary
from .actions import ActionPlan, descend_plan, lift_plan
from .world import BLOCKS, ObjectSpec, Scene, even_scaled, overlaps, rests_on

SHAPES = ("square", "triangle", "circle")
EXTRA_SHAPES = ("diamond",)  # reserved for vocabulary-extension experiments
COLORS = ("red", "green", "blue", "yellow", "magenta", "cyan", "orange")
RELATIONS = ("on_top", "left_of", "right_of", "above", "below")

T_ACT = 12
BASE_SPEED = 6
BASE_SIZES = (10, 12, 14)
SIDE_MARGIN = 2  # clearance for left_of / right_of / above / below placements
N_OBJECTS_RANGE = (4, 6)
PLACEMENT_ATTEMPTS = 1000


def vocabulary(extra_shapes: tuple[str, ...] = ()) -> Vocabulary:
    shapes = SHAPES + tuple(extra_shapes)
    return Vocabulary.build(BLOCKS, {
        "verb": (NONE_WORD, NOOP_VERB, "pick", "pick_rotate", "put"),
        "subject_shape": (NONE_WORD,) + shapes,
        "subject_color": (NONE_WORD,) + COLORS,
        "relation": (NONE_WORD,) + RELATIONS,
        "reference_shape": (NONE_WORD,) + shapes,
        "reference_color": (NONE_WORD,) + COLORS,
    })


def speed(canvas: int) -> int:
    return max(1, round(BASE_SPEED * canvas / 64))


def init_scene(seed: int, n_objects: int, canvas: int = 64,
               include_shape: str | None = None) -> Scene:
    """Place n_objects visually distinct shapes with clearance, no overlaps.

    include_shape forces one object of that shape into the scene (used when
    generating adaptation data for a new dictionary word).
    """
    lo, hi = N_OBJECTS_RANGE
    if not lo <= n_objects <= hi:
        raise PreconditionError(f"blocks scenes take {lo}-{hi} objects, got {n_objects}")
    rng = np.random.default_rng([seed, 0xB10C])
    scale = canvas / 64
    shapes = SHAPES + (EXTRA_SHAPES if include_shape in EXTRA_SHAPES else ())
    combos = [(s, c) for s in shapes for c in COLORS]
    if include_shape is not None:
        forced = [(s, c) for (s, c) in combos if s == include_shape]
        first = forced[int(rng.integers(len(forced)))]
        rest = [sc for sc in combos if sc != first]
        order = rng.permutation(len(rest))
        chosen = [first] + [rest[i] for i in order[:n_objects - 1]]
    else:
        order = rng.permutation(len(combos))
        chosen = [combos[i] for i in order[:n_objects]]

    scene = Scene(env_kind=BLOCKS, canvas=(canvas, canvas))
    for idx, (shape, color) in enumerate(chosen):
        side = even_scaled(BASE_SIZES[int(rng.integers(len(BASE_SIZES)))], scale)
        placed = False
        for _ in range(PLACEMENT_ATTEMPTS):
            x = int(rng.integers(side // 2 + 1, canvas - side // 2))
            y = int(rng.integers(side // 2 + 1, canvas - side // 2))
            cand = ObjectSpec(id=idx, kind=shape, color=color,
                              x=x, y=y, w=side, h=side, z=idx)
            if all(not overlaps(cand, other, gap=2) for other in scene.objects):
                scene.objects.append(cand)
                placed = True
                break
        if not placed:
            raise PlacementError(f"could not place object {idx} for seed {seed}")
    scene.validate()
    return scene


def _visible(scene: Scene, obj: ObjectSpec) -> bool:
    h, w = scene.canvas
    return (obj.contained_in is None and scene.held_object != obj.id
            and 0 <= obj.left and obj.right <= w and 0 <= obj.top and obj.bottom <= h)


def _pickable(scene: Scene, obj: ObjectSpec) -> bool:
    if not _visible(scene, obj):
        return False
    return not any(o is not obj and rests_on(o, obj) for o in scene.objects)


def put_target(scene: Scene, subject: ObjectSpec, relation: str,
               reference: ObjectSpec) -> tuple[int, int] | None:
    """Landing center for a put, or None when the placement is infeasible."""
    m = SIDE_MARGIN
    bx, by = reference.x, reference.y
    if relation == "on_top":
        tx, ty = bx, round(reference.top - subject.h / 2)
    elif relation == "left_of":
        tx, ty = round(bx - (reference.w + subject.w) / 2 - m), by
    elif relation == "right_of":
        tx, ty = round(bx + (reference.w + subject.w) / 2 + m), by
    elif relation == "above":
        tx, ty = bx, round(by - (reference.h + subject.h) / 2 - m)
    elif relation == "below":
        tx, ty = bx, round(by + (reference.h + subject.h) / 2 + m)
    else:
        raise PreconditionError(f"unknown relation {relation!r}")
    h, w = scene.canvas
    if tx - subject.w / 2 < 1 or tx + subject.w / 2 > w - 1:
        return None
    if ty - subject.h / 2 < 1 or ty + subject.h / 2 > h - 1:
        return None
    landed = ObjectSpec(id=subject.id, kind=subject.kind, color=subject.color,
                        x=tx, y=ty, w=subject.w, h=subject.h, z=subject.z)
    for other in scene.objects:
        if other.id == subject.id or scene.held_object == other.id:
            continue
        if overlaps(landed, other):
            return None
    return tx, ty


def valid_actions(scene: Scene) -> list[ActionCommand]:
    out = []
    if scene.held_object is None:
        for obj in sorted(scene.objects, key=lambda o: o.id):
            if _pickable(scene, obj):
                ident = (obj.kind, obj.color)
                out.append(ActionCommand("pick", subject=ident))
                out.append(ActionCommand("pick_rotate", subject=ident))
    else:
        held = scene.get(scene.held_object)
        ident = (held.kind, held.color)
        for ref in sorted(scene.objects, key=lambda o: o.id):
            if ref.id == held.id or not _visible(scene, ref):
                continue
            for relation in RELATIONS:
                if put_target(scene, held, relation, ref) is not None:
                    out.append(ActionCommand("put", subject=ident,
                                             relation=relation,
                                             reference=(ref.kind, ref.color)))
    return out


def _resolve(scene: Scene, ident: tuple[str, str] | None, role: str) -> ObjectSpec:
    if ident is None:
        raise PreconditionError(f"{role} is required")
    obj = scene.find(*ident)
    if obj is None:
        raise PreconditionError(f"{role} {ident[1]} {ident[0]} is not in the scene")
    return obj


def plan_action(scene: Scene, cmd: ActionCommand) -> ActionPlan:
    spd = speed(scene.canvas[0])
    if cmd.verb in ("pick", "pick_rotate"):
        obj = _resolve(scene, cmd.subject, "subject")
        if scene.held_object is not None:
            raise PreconditionError("pick requires an empty hand")
        if not _pickable(scene, obj):
            raise PreconditionError(f"{obj.color} {obj.kind} cannot be picked up")
        frames = lift_plan(obj, spd, T_ACT, rotate=cmd.verb == "pick_rotate")
        return ActionPlan(cmd=cmd, object_ids=frozenset([obj.id]), frames=frames,
                          held_during=obj.id, held_after=obj.id)
    if cmd.verb == "put":
        obj = _resolve(scene, cmd.subject, "subject")
        if scene.held_object != obj.id:
            raise PreconditionError("put requires the subject to be held")
        ref = _resolve(scene, cmd.reference, "reference")
        if not _visible(scene, ref):
            raise PreconditionError("put reference must be visible")
        if cmd.relation is None:
            raise PreconditionError("put requires a relation")
        target = put_target(scene, obj, cmd.relation, ref)
        if target is None:
            raise PreconditionError(
                f"no room to put {obj.color} {obj.kind} {cmd.relation} "
                f"{ref.color} {ref.kind}")
        frames = descend_plan(obj, target[0], target[1], spd, T_ACT)
        return ActionPlan(cmd=cmd, object_ids=frozenset([obj.id, ref.id]),
                          frames=frames, held_during=obj.id, held_after=None)
    raise PreconditionError(f"unknown blocks verb {cmd.verb!r}")


def sample_script(seed: int, scene: Scene, pairs: int = 3,
                  focus_id: int | None = None) -> list[ActionCommand]:
    """Pick/put pair script following the episode template.

    focus_id forces the first pair to act on that object, so adaptation
    datasets always exercise the newly added word.
    """
    from .actions import apply_plans

    rng = np.random.default_rng([seed, 0x5C17])
    script = []
    current = scene
    for pair in range(pairs):
        picks = [c for c in valid_actions(current) if c.verb in ("pick", "pick_rotate")]
        if pair == 0 and focus_id is not None:
            focus = current.get(focus_id)
            picks = [c for c in picks if c.subject == (focus.kind, focus.color)]
        if not picks:
            raise PlacementError(f"no valid pick available for seed {seed}")
        pick = picks[int(rng.integers(len(picks)))]
        current = apply_plans(current, [plan_action(current, pick)])[-1]
        puts = valid_actions(current)
        if not puts:
            raise PlacementError(f"held object has no valid put for seed {seed}")
        put = puts[int(rng.integers(len(puts)))]
        current = apply_plans(current, [plan_action(current, put)])[-1]
        script.extend([pick, put])
    return script
