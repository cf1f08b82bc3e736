"""Procedural 2-D environments: dataset generator and evaluation oracle."""

from ..vocab import ActionCommand, ClauseEncoding, NOOP, Vocabulary, decode_labels, encode_labels
from .episodes import (
    Dataset,
    Episode,
    EpisodeData,
    GenConfig,
    dataset_digest,
    enumerate_valid_actions,
    episode_seed,
    generate_concurrent_episode,
    generate_dataset,
    generate_episode,
    init_scene,
    step_action,
    vocabulary_for,
    write_episode,
)
from .render import boxes, from_u8, render, render_with_owners, to_u8
from .world import BLOCKS, KITCHEN, PALETTE, ObjectSpec, Scene

__all__ = [
    "ActionCommand", "ClauseEncoding", "NOOP", "Vocabulary", "decode_labels",
    "encode_labels", "Dataset", "Episode", "EpisodeData", "GenConfig",
    "dataset_digest", "enumerate_valid_actions", "episode_seed",
    "generate_concurrent_episode", "generate_dataset", "generate_episode",
    "init_scene", "step_action", "vocabulary_for", "write_episode",
    "boxes", "from_u8", "render", "render_with_owners", "to_u8",
    "BLOCKS", "KITCHEN", "PALETTE", "ObjectSpec", "Scene",
]
