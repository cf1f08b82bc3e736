"""Model hyperparameters."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field


@dataclass(frozen=True)
class ModelConfig:
    height: int = 64
    width: int = 64
    enc_channels: tuple[int, int, int] = (32, 64, 128)
    capsule_dim: int = 16          # channels per word capsule
    hidden_channels: int = 64      # recurrent predictor width
    lstm_layers: int = 2
    a_max: int = 2                 # concurrent action slots supported at inference
    transform_per_word: bool = False  # one clause transform per word instead of shared
    dtype: str = "float32"

    def __post_init__(self):
        if self.height % 8 or self.width % 8:
            raise ValueError("resolution must be divisible by 8")
        if self.capsule_dim < 1 or self.a_max < 1:
            raise ValueError("capsule_dim and a_max must be positive")

    @property
    def latent_hw(self) -> tuple[int, int]:
        return self.height // 8, self.width // 8

    @property
    def latent_channels(self) -> int:
        return self.enc_channels[-1]

    def to_json(self) -> dict:
        d = asdict(self)
        d["enc_channels"] = list(self.enc_channels)
        return d

    @staticmethod
    def from_json(d: dict) -> "ModelConfig":
        d = dict(d)
        d["enc_channels"] = tuple(d["enc_channels"])
        return ModelConfig(**d)
