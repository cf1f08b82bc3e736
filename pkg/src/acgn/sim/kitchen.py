"""Kitchen environment: openable appliances and small movable objects.

Appliances stand on the floor line; small objects rest on top of them, on
the floor, or inside an open appliance. Atomic actions: take (on/in), put
(on/in), open, close. Episodes follow one of three composite templates.
"""

from __future__ import annotations

import numpy as np

from ..errors import PlacementError, PreconditionError
from ..vocab import ActionCommand, NONE_WORD, NOOP_VERB, Vocabulary
from .actions import ActionPlan, descend_plan, lift_plan, sweep_plan
from .render import interior_rect, interior_slot
from .world import KITCHEN, ObjectSpec, Scene, even_scaled, overlaps

MOVABLE = {"bottle": (6, 12), "kettle": (10, 9), "pot": (12, 8)}
EXTRA_MOVABLE = {"dispenser": (8, 10)}  # reserved for vocabulary extension
OPENABLE = {"oven": (16, 22), "fridge": (14, 26), "dishwasher": (16, 20)}
EXTRA_OPENABLE = {"safe": (12, 16)}
MOVABLE_COLORS = ("red", "green", "blue", "yellow")
OPENABLE_COLORS = ("white", "slate", "brown")

T_ACT = 10
BASE_SPEED = 8
N_LARGE = 2
N_SMALL_RANGE = (1, 3)
PLACEMENT_ATTEMPTS = 1000

TEMPLATES = ("take_on--put_on", "take_on--open--put_in--close", "open--take_in--close")


def vocabulary() -> Vocabulary:
    return Vocabulary.build(KITCHEN, {
        "verb": (NONE_WORD, NOOP_VERB, "take", "put", "open", "close"),
        "preposition": (NONE_WORD, "on", "in"),
        "subject_category": (NONE_WORD,) + tuple(MOVABLE) + tuple(OPENABLE),
        "subject_color": (NONE_WORD,) + MOVABLE_COLORS + OPENABLE_COLORS,
        "reference_category": (NONE_WORD,) + tuple(OPENABLE),
        "reference_color": (NONE_WORD,) + OPENABLE_COLORS,
    })


def floor_y(canvas: int) -> int:
    return canvas - 6


def speed(canvas: int) -> int:
    return max(1, round(BASE_SPEED * canvas / 64))


def fits_interior(small_w: int, small_h: int, appl: ObjectSpec) -> bool:
    x0, y0, x1, y1 = interior_rect(appl)
    return small_w <= x1 - x0 and small_h <= y1 - y0


def init_scene(seed: int, n_objects: int, canvas: int = 64,
               contain_first: bool = False, first_on_top: bool = False,
               rest_on_floor: bool = False) -> Scene:
    """2 appliances along the floor plus 1-3 small objects.

    n_objects counts everything. Small objects rest on appliance tops or
    on the floor line by default; contain_first stores the first one
    inside the first (closed) appliance, first_on_top pins it to the
    first appliance's top, and rest_on_floor keeps the remaining tops
    clear (episode templates need these layouts).
    """
    lo, hi = N_LARGE + N_SMALL_RANGE[0], N_LARGE + N_SMALL_RANGE[1]
    if not lo <= n_objects <= hi:
        raise PreconditionError(f"kitchen scenes take {lo}-{hi} objects, got {n_objects}")
    rng = np.random.default_rng([seed, 0xF00D])
    scale = canvas / 64
    fy = floor_y(canvas)
    scene = Scene(env_kind=KITCHEN, canvas=(canvas, canvas))

    # the two appliances are placed jointly so a feasible pair always exists
    cats = list(OPENABLE)
    cat_order = rng.permutation(len(cats))
    gap = max(4, round(6 * scale))
    dims = []
    for i in range(N_LARGE):
        cat = cats[cat_order[i]]
        color = OPENABLE_COLORS[int(rng.integers(len(OPENABLE_COLORS)))]
        dims.append((cat, color,
                     even_scaled(OPENABLE[cat][0], scale),
                     even_scaled(OPENABLE[cat][1], scale)))
    w0, w1 = dims[0][2], dims[1][2]
    x0_lo = w0 // 2 + 2
    x0_hi = canvas - 3 - w1 - gap - w0 // 2
    if x0_hi < x0_lo:
        raise PlacementError(f"appliances do not fit a {canvas}px canvas")
    x0 = int(rng.integers(x0_lo, x0_hi + 1))
    x1_lo = x0 + (w0 + w1) // 2 + gap
    x1_hi = canvas - w1 // 2 - 2
    x1 = int(rng.integers(x1_lo, x1_hi + 1))
    for i, (cat, color, w, h) in enumerate(dims):
        scene.objects.append(ObjectSpec(
            id=i, kind=cat, color=color, x=(x0, x1)[i], y=fy - h // 2,
            w=w, h=h, z=i, openable=True))

    smalls = [(c, k) for c in MOVABLE for k in MOVABLE_COLORS]
    order = rng.permutation(len(smalls))
    pool = [smalls[i] for i in order]
    appliances = [o for o in scene.objects if o.openable]
    free_tops = list(range(len(appliances)))
    next_id = N_LARGE
    for i in range(n_objects - N_LARGE):
        placed = False
        for cat, color in list(pool):
            w = even_scaled(MOVABLE[cat][0], scale)
            h = even_scaled(MOVABLE[cat][1], scale)
            obj = ObjectSpec(id=next_id, kind=cat, color=color,
                             x=0, y=0, w=w, h=h, z=next_id)
            if i == 0 and contain_first:
                host = appliances[0]
                if not fits_interior(w, h, host):
                    continue
                obj.x, obj.y = interior_slot(host, h)
                obj.contained_in = host.id
            elif i == 0 and first_on_top:
                host = appliances[0]
                obj.x, obj.y = host.x, round(host.top - h / 2)
                free_tops.remove(0)
            else:
                want_top = free_tops and not rest_on_floor and rng.random() < 0.5
                if want_top:
                    slot = free_tops[int(rng.integers(len(free_tops)))]
                    host = appliances[slot]
                    obj.x, obj.y = host.x, round(host.top - h / 2)
                    free_tops.remove(slot)
                else:
                    found = False
                    for _ in range(PLACEMENT_ATTEMPTS):
                        x = int(rng.integers(w // 2 + 2, canvas - w // 2 - 1))
                        obj.x, obj.y = x, fy - h // 2
                        if all(not overlaps(obj, o, gap=2) for o in scene.objects):
                            found = True
                            break
                    if not found:
                        continue  # try another (smaller) object kind
            scene.objects.append(obj)
            pool.remove((cat, color))
            next_id += 1
            placed = True
            break
        if not placed:
            raise PlacementError(f"could not place small object {i} for seed {seed}")
    scene.validate()
    return scene


def _on_top_of(scene: Scene, small: ObjectSpec):
    for appl in scene.objects:
        if appl.openable and abs(small.bottom - appl.top) < 0.5 \
                and abs(small.x - appl.x) < appl.w / 2:
            return appl
    return None


def _top_free(scene: Scene, appl: ObjectSpec) -> bool:
    return all(_on_top_of(scene, o) is not appl
               for o in scene.objects if not o.openable)


def _interior_empty(scene: Scene, appl: ObjectSpec) -> bool:
    return all(o.contained_in != appl.id for o in scene.objects)


def valid_actions(scene: Scene) -> list[ActionCommand]:
    out = []
    appliances = [o for o in sorted(scene.objects, key=lambda o: o.id) if o.openable]
    smalls = [o for o in sorted(scene.objects, key=lambda o: o.id) if not o.openable]
    for appl in appliances:
        ident = (appl.kind, appl.color)
        if appl.open_fraction == 0.0:
            out.append(ActionCommand("open", subject=ident))
        elif appl.open_fraction == 1.0:
            out.append(ActionCommand("close", subject=ident))
    if scene.held_object is None:
        for small in smalls:
            host = _on_top_of(scene, small)
            if host is not None:
                out.append(ActionCommand("take", subject=(small.kind, small.color),
                                         relation="on", reference=(host.kind, host.color)))
            elif small.contained_in is not None:
                host = scene.get(small.contained_in)
                if host.open_fraction == 1.0:
                    out.append(ActionCommand("take", subject=(small.kind, small.color),
                                             relation="in", reference=(host.kind, host.color)))
    else:
        held = scene.get(scene.held_object)
        ident = (held.kind, held.color)
        for appl in appliances:
            if _top_free(scene, appl) and held.w <= appl.w - 2 and appl.top - held.h >= 1:
                out.append(ActionCommand("put", subject=ident, relation="on",
                                         reference=(appl.kind, appl.color)))
            x0, y0, x1, y1 = interior_rect(appl)
            if appl.open_fraction == 1.0 and _interior_empty(scene, appl) \
                    and held.w <= x1 - x0 and held.h <= y1 - y0:
                out.append(ActionCommand("put", subject=ident, relation="in",
                                         reference=(appl.kind, appl.color)))
    return out


def _resolve(scene: Scene, ident, role: str) -> ObjectSpec:
    if ident is None:
        raise PreconditionError(f"{role} is required")
    obj = scene.find(*ident)
    if obj is None:
        raise PreconditionError(f"{role} {ident[1]} {ident[0]} is not in the scene")
    return obj


def plan_action(scene: Scene, cmd: ActionCommand) -> ActionPlan:
    spd = speed(scene.canvas[0])
    if cmd.verb in ("open", "close"):
        appl = _resolve(scene, cmd.subject, "subject")
        if not appl.openable:
            raise PreconditionError(f"{appl.kind} cannot be opened or closed")
        want = 0.0 if cmd.verb == "open" else 1.0
        if appl.open_fraction != want:
            raise PreconditionError(f"{appl.color} {appl.kind} is not fully "
                                    f"{'closed' if cmd.verb == 'open' else 'open'}")
        frames = sweep_plan(appl, opening=cmd.verb == "open", t_act=T_ACT)
        return ActionPlan(cmd=cmd, object_ids=frozenset([appl.id]), frames=frames)
    if cmd.verb == "take":
        small = _resolve(scene, cmd.subject, "subject")
        appl = _resolve(scene, cmd.reference, "reference")
        if scene.held_object is not None:
            raise PreconditionError("take requires an empty hand")
        if cmd.relation == "on":
            if _on_top_of(scene, small) is not appl:
                raise PreconditionError(f"{small.color} {small.kind} is not on "
                                        f"the {appl.color} {appl.kind}")
            frames = lift_plan(small, spd, T_ACT)
        elif cmd.relation == "in":
            if small.contained_in != appl.id:
                raise PreconditionError(f"{small.color} {small.kind} is not in "
                                        f"the {appl.color} {appl.kind}")
            if appl.open_fraction != 1.0:
                raise PreconditionError(f"{appl.color} {appl.kind} is not open")
            frames = lift_plan(small, spd, T_ACT)
            frames[0][small.id]["contained_in"] = None
        else:
            raise PreconditionError("take needs the 'on' or 'in' preposition")
        return ActionPlan(cmd=cmd, object_ids=frozenset([small.id, appl.id]),
                          frames=frames, held_during=small.id, held_after=small.id)
    if cmd.verb == "put":
        small = _resolve(scene, cmd.subject, "subject")
        appl = _resolve(scene, cmd.reference, "reference")
        if scene.held_object != small.id:
            raise PreconditionError("put requires the subject to be held")
        if cmd.relation == "on":
            if not _top_free(scene, appl):
                raise PreconditionError(f"the {appl.color} {appl.kind} top is occupied")
            tx, ty = appl.x, round(appl.top - small.h / 2)
            frames = descend_plan(small, tx, ty, spd, T_ACT)
        elif cmd.relation == "in":
            if appl.open_fraction != 1.0:
                raise PreconditionError(f"{appl.color} {appl.kind} is not open")
            if not _interior_empty(scene, appl):
                raise PreconditionError(f"the {appl.color} {appl.kind} is already full")
            tx, ty = interior_slot(appl, small.h)
            frames = descend_plan(small, tx, ty, spd, T_ACT,
                                  final_extra={"contained_in": appl.id})
        else:
            raise PreconditionError("put needs the 'on' or 'in' preposition")
        return ActionPlan(cmd=cmd, object_ids=frozenset([small.id, appl.id]),
                          frames=frames, held_during=small.id, held_after=None)
    raise PreconditionError(f"unknown kitchen verb {cmd.verb!r}")


def sample_script(seed: int, scene: Scene, template: str) -> list[ActionCommand]:
    """Instantiate one of the composite templates against the scene."""
    from .actions import apply_plans

    rng = np.random.default_rng([seed, 0x5C17])
    if template not in TEMPLATES:
        raise PreconditionError(f"unknown template {template!r}")
    appliances = [o for o in scene.objects if o.openable]

    def take_on_cmd(current):
        takes = [c for c in valid_actions(current) if c.verb == "take" and c.relation == "on"]
        if not takes:
            raise PlacementError(f"template {template} needs an object on an appliance")
        return takes[int(rng.integers(len(takes)))]

    script = []
    current = scene
    if template == "take_on--put_on":
        take = take_on_cmd(current)
        src = current.find(*take.reference)
        targets = [a for a in appliances
                   if a.id != src.id and _top_free(current, a)]
        if not targets:
            raise PlacementError("no free appliance top for put_on")
        dst = targets[int(rng.integers(len(targets)))]
        script = [take, ActionCommand("put", take.subject, "on", (dst.kind, dst.color))]
    elif template == "take_on--open--put_in--close":
        take = take_on_cmd(current)
        src = current.find(*take.reference)
        moved = current.find(*take.subject)
        targets = [a for a in appliances
                   if a.id != src.id and a.open_fraction == 0.0
                   and _interior_empty(current, a)
                   and fits_interior(moved.w, moved.h, a)]
        if not targets:
            raise PlacementError("no closed empty appliance for put_in")
        dst = targets[int(rng.integers(len(targets)))]
        dst_ident = (dst.kind, dst.color)
        script = [take,
                  ActionCommand("open", dst_ident),
                  ActionCommand("put", take.subject, "in", dst_ident),
                  ActionCommand("close", dst_ident)]
    else:  # open--take_in--close
        hosts = [a for a in appliances
                 if a.open_fraction == 0.0 and not _interior_empty(scene, a)]
        if not hosts:
            raise PlacementError("template open--take_in--close needs a stocked appliance")
        host = hosts[int(rng.integers(len(hosts)))]
        stored = next(o for o in scene.objects if o.contained_in == host.id)
        host_ident = (host.kind, host.color)
        script = [ActionCommand("open", host_ident),
                  ActionCommand("take", (stored.kind, stored.color), "in", host_ident),
                  ActionCommand("close", host_ident)]
    # replay to confirm feasibility
    for cmd in script:
        current = apply_plans(current, [plan_action(current, cmd)])[-1]
    return script
