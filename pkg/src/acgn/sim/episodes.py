"""Episode generation and the on-disk dataset container.

Layout:
  <out>/manifest.json
  <out>/episodes/ep_%06d/manifest.json
  <out>/episodes/ep_%06d/frames/%03d.png

Everything is a pure function of the seeds, so regenerating a dataset
reproduces it byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import shutil
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from ..errors import ConflictError, PlacementError, PreconditionError
from ..vocab import ActionCommand, NOOP_VERB, Vocabulary, encode_labels
from . import blocks, kitchen
from .actions import apply_plans, command_object_ids, noop_plan
from .render import boxes as scene_boxes
from .render import from_u8, render, to_u8
from .world import BLOCKS, KITCHEN, Scene


def env_module(env_kind: str):
    if env_kind == BLOCKS:
        return blocks
    if env_kind == KITCHEN:
        return kitchen
    raise PreconditionError(f"unknown environment {env_kind!r}")


def vocabulary_for(env_kind: str, extra_shapes: tuple[str, ...] = ()) -> Vocabulary:
    if env_kind == BLOCKS:
        return blocks.vocabulary(extra_shapes)
    return kitchen.vocabulary()


def init_scene(seed: int, env_kind: str, n_objects: int, canvas: int = 64, **kwargs) -> Scene:
    return env_module(env_kind).init_scene(seed, n_objects, canvas, **kwargs)


def enumerate_valid_actions(scene: Scene) -> list[ActionCommand]:
    return env_module(scene.env_kind).valid_actions(scene)


def step_action(scene: Scene, cmd: ActionCommand) -> tuple[list[Scene], list[ActionCommand]]:
    """Run one atomic action; returns the intermediate scenes and per-frame labels."""
    plan = env_module(scene.env_kind).plan_action(scene, cmd)
    scenes = apply_plans(scene, [plan])
    return scenes, [cmd] * len(scenes)


@dataclass
class Episode:
    env_kind: str
    seed: Optional[int]
    frames: list[np.ndarray]              # (H, W, 3) float32
    labels: list[list[ActionCommand]]     # per frame; one entry unless concurrent
    boxes: list[dict[int, tuple[int, int, int, int]]]
    manifest: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.frames)


def _segment_frames(scene: Scene, cmds: list[ActionCommand], t_act: int):
    """Advance all commands of one segment together (usually just one)."""
    env = env_module(scene.env_kind)
    plans = []
    for cmd in cmds:
        if cmd.verb == NOOP_VERB:
            plans.append(noop_plan(cmd, t_act))
        else:
            plans.append(env.plan_action(scene, cmd))
    return apply_plans(scene, plans)


def _build_episode(seed, env_kind, scene, script, vocab, t_act) -> Episode:
    frames, labels, all_boxes = [], [], []
    current = scene
    for cmds in script:
        scenes = _segment_frames(current, cmds, t_act)
        for s in scenes:
            frames.append(render(s))
            labels.append(list(cmds))
            all_boxes.append(scene_boxes(s))
        current = scenes[-1]
    label_words = []
    clause_indices = []
    for cmds in labels:
        label_words.append([c.to_json() for c in cmds])
        clause_indices.append([
            [encode_labels(c, vocab).local_indices()[cl] for cl in vocab.clauses]
            for c in cmds
        ])
    manifest = {
        "env": env_kind,
        "seed": seed,
        "resolution": scene.canvas[0],
        "t_act": t_act,
        "n_frames": len(frames),
        "objects": [o.to_json() for o in scene.objects],
        "held_object": scene.held_object,
        "initial_boxes": _boxes_json(scene_boxes(scene)),
        "script": [[c.to_json() for c in cmds] for cmds in script],
        "labels": label_words,
        "clause_indices": clause_indices,
        "boxes": [_boxes_json(b) for b in all_boxes],
    }
    return Episode(env_kind=env_kind, seed=seed, frames=frames,
                   labels=labels, boxes=all_boxes, manifest=manifest)


def _boxes_json(b: dict) -> list:
    return [[int(k), *map(int, v)] for k, v in sorted(b.items())]


def generate_episode(seed: int, env_kind: str, script=None, canvas: int = 64,
                     include_shape: str | None = None,
                     vocab: Vocabulary | None = None) -> Episode:
    """One template episode; deterministic given (seed, script)."""
    rng = np.random.default_rng([seed, 0xE915])
    env = env_module(env_kind)
    if env_kind == BLOCKS:
        n = int(rng.integers(blocks.N_OBJECTS_RANGE[0], blocks.N_OBJECTS_RANGE[1] + 1))
        scene = blocks.init_scene(seed, n, canvas, include_shape=include_shape)
        if script is None:
            script = blocks.sample_script(seed, scene,
                                          focus_id=0 if include_shape else None)
    elif script is not None:
        n = int(rng.integers(kitchen.N_LARGE + kitchen.N_SMALL_RANGE[0],
                             kitchen.N_LARGE + kitchen.N_SMALL_RANGE[1] + 1))
        scene = kitchen.init_scene(seed, n, canvas)
    else:
        # floor-only distractors keep every template layout feasible
        n = kitchen.N_LARGE + int(rng.integers(1, 3))
        order = rng.permutation(len(kitchen.TEMPLATES))
        failure = None
        for ti in order:
            template = kitchen.TEMPLATES[int(ti)]
            try:
                scene = kitchen.init_scene(
                    seed, n, canvas,
                    contain_first=template == "open--take_in--close",
                    first_on_top=template.startswith("take_on"),
                    rest_on_floor=True)
                script = kitchen.sample_script(seed, scene, template)
                break
            except PlacementError as exc:
                failure = exc
                script = None
        if script is None:
            raise failure
    vocab = vocab or vocabulary_for(env_kind, (include_shape,) if include_shape else ())
    segments = [[c] if isinstance(c, ActionCommand) else list(c) for c in script]
    return _build_episode(seed, env_kind, scene, segments, vocab, env.T_ACT)


def generate_concurrent_episode(seed: int, env_kind: str, cmds=None,
                                canvas: int = 64,
                                vocab: Vocabulary | None = None) -> Episode:
    """Single segment advancing two object-disjoint commands at once."""
    rng = np.random.default_rng([seed, 0xC0AC])
    env = env_module(env_kind)
    if env_kind == BLOCKS:
        n = int(rng.integers(blocks.N_OBJECTS_RANGE[0], blocks.N_OBJECTS_RANGE[1] + 1))
        scene = blocks.init_scene(seed, n, canvas)
    else:
        n = int(rng.integers(kitchen.N_LARGE + kitchen.N_SMALL_RANGE[0],
                             kitchen.N_LARGE + kitchen.N_SMALL_RANGE[1] + 1))
        scene = kitchen.init_scene(seed, n, canvas)
    if cmds is None:
        valids = enumerate_valid_actions(scene)
        pairs = []
        for i in range(len(valids)):
            for j in range(i + 1, len(valids)):
                a, b = valids[i], valids[j]
                if not (command_object_ids(scene, a) & command_object_ids(scene, b)):
                    pairs.append((a, b))
        if not pairs:
            raise ConflictError(f"no disjoint command pair for seed {seed}")
        cmds = list(pairs[int(rng.integers(len(pairs)))])
    else:
        cmds = list(cmds)
        seen = set()
        for cmd in cmds:
            ids = command_object_ids(scene, cmd)
            if ids & seen:
                raise ConflictError(f"commands share objects: {cmd.words()}")
            seen |= ids
    vocab = vocab or vocabulary_for(env_kind)
    return _build_episode(seed, env_kind, scene, [cmds], vocab, env.T_ACT)


# ---------------------------------------------------------------------------
# dataset container

@dataclass
class GenConfig:
    env: str
    episodes: int
    seed: int
    out: str
    resolution: int = 64
    concurrent: bool = False
    include_shape: Optional[str] = None
    overwrite: bool = False
    split_fractions: tuple[float, float] = (0.8, 0.1)  # train, val; rest is test

    def to_json(self):
        return {
            "env": self.env, "episodes": self.episodes, "seed": self.seed,
            "resolution": self.resolution, "concurrent": self.concurrent,
            "include_shape": self.include_shape,
            "split_fractions": list(self.split_fractions),
        }


def episode_seed(dataset_seed: int, index: int) -> int:
    return (dataset_seed * 1_000_003 + index) & 0x7FFFFFFF


def _dump_json(path: Path, payload):
    path.write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n",
                    encoding="utf-8")


def write_episode(ep: Episode, ep_dir: Path):
    frames_dir = ep_dir / "frames"
    frames_dir.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(ep.frames):
        Image.fromarray(to_u8(frame), "RGB").save(frames_dir / f"{i:03d}.png", format="PNG")
    _dump_json(ep_dir / "manifest.json", ep.manifest)


def generate_dataset(cfg: GenConfig) -> Path:
    out = Path(cfg.out)
    if out.exists():
        if not cfg.overwrite:
            raise FileExistsError(f"{out} exists; pass overwrite to replace it")
        shutil.rmtree(out)
    out.mkdir(parents=True)
    vocab = vocabulary_for(cfg.env, (cfg.include_shape,) if cfg.include_shape else ())
    names = []
    for i in range(cfg.episodes):
        seed_i = episode_seed(cfg.seed, i)
        if cfg.concurrent:
            ep = generate_concurrent_episode(seed_i, cfg.env, canvas=cfg.resolution,
                                             vocab=vocab)
        else:
            ep = generate_episode(seed_i, cfg.env, canvas=cfg.resolution,
                                  include_shape=cfg.include_shape, vocab=vocab)
        name = f"ep_{i:06d}"
        write_episode(ep, out / "episodes" / name)
        names.append(name)
    n = len(names)
    n_train = int(cfg.split_fractions[0] * n)
    n_val = int(cfg.split_fractions[1] * n)
    manifest = {
        "env": cfg.env,
        "seed": cfg.seed,
        "resolution": cfg.resolution,
        "concurrent": cfg.concurrent,
        "include_shape": cfg.include_shape,
        "t_act": env_module(cfg.env).T_ACT,
        "episodes": names,
        "splits": {
            "train": names[:n_train],
            "val": names[n_train:n_train + n_val],
            "test": names[n_train + n_val:],
        },
        "vocabulary": vocab.to_json(),
    }
    _dump_json(out / "manifest.json", manifest)
    return out


def dataset_digest(root: Path) -> str:
    """Stable content hash over every file in a dataset directory."""
    root = Path(root)
    h = hashlib.sha256()
    for path in sorted(root.rglob("*")):
        if path.is_file():
            h.update(str(path.relative_to(root)).encode())
            h.update(path.read_bytes())
    return h.hexdigest()


@dataclass
class EpisodeData:
    name: str
    frames: np.ndarray                    # (T, H, W, 3) uint8
    labels: list[list[ActionCommand]]
    boxes: list[dict[int, tuple[int, int, int, int]]]
    manifest: dict

    def __len__(self):
        return self.frames.shape[0]

    def frames_float(self) -> np.ndarray:
        """(T, 3, H, W) float32 in [0, 1]."""
        return from_u8(self.frames).transpose(0, 3, 1, 2).copy()

    @property
    def t_act(self) -> int:
        return self.manifest["t_act"]

    def segment_bounds(self) -> list[tuple[int, int]]:
        t = self.t_act
        return [(s, s + t - 1) for s in range(0, len(self), t)]

    def initial_boxes(self) -> dict[int, tuple[int, int, int, int]]:
        return {row[0]: tuple(row[1:]) for row in self.manifest["initial_boxes"]}

    def object_id(self, kind: str, color: str) -> Optional[int]:
        for o in self.manifest["objects"]:
            if o["kind"] == kind and o["color"] == color:
                return o["id"]
        return None


class Dataset:
    """Read access to a generated dataset directory."""

    def __init__(self, root):
        self.root = Path(root)
        if not self.root.exists():
            raise FileNotFoundError(f"dataset not found: {self.root}")
        self.manifest = json.loads((self.root / "manifest.json").read_text())
        self.vocabulary = Vocabulary.from_json(self.manifest["vocabulary"])

    @property
    def env_kind(self) -> str:
        return self.manifest["env"]

    @property
    def resolution(self) -> int:
        return self.manifest["resolution"]

    @property
    def t_act(self) -> int:
        return self.manifest["t_act"]

    def split(self, name: str) -> list[str]:
        return list(self.manifest["splits"][name])

    def episode(self, name: str) -> EpisodeData:
        ep_dir = self.root / "episodes" / name
        manifest = json.loads((ep_dir / "manifest.json").read_text())
        frames = []
        for i in range(manifest["n_frames"]):
            with Image.open(ep_dir / "frames" / f"{i:03d}.png") as im:
                frames.append(np.asarray(im.convert("RGB"), dtype=np.uint8))
        labels = [[ActionCommand.from_json(c) for c in row] for row in manifest["labels"]]
        boxes = [{row[0]: tuple(row[1:]) for row in frame_boxes}
                 for frame_boxes in manifest["boxes"]]
        return EpisodeData(name=name, frames=np.stack(frames), labels=labels,
                           boxes=boxes, manifest=manifest)

    def episodes(self, split: str):
        for name in self.split(split):
            yield self.episode(name)
