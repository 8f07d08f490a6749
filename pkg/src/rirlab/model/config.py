"""Model configuration and embedding containers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..dsp import DEFAULT_OCTAVE_CENTERS
from ..errors import RirlabError

#: Vector length per embedding role.
ROLE_DIMS = {"audio": 128, "visual": 512, "text": 768, "fused": 128}


@dataclass(frozen=True)
class Embedding:
    """Fixed-length real vector with a declared modality role."""

    values: np.ndarray
    role: str

    def __post_init__(self):
        if self.role not in ROLE_DIMS:
            raise RirlabError(f"unknown embedding role {self.role!r}")
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        expected = ROLE_DIMS[self.role]
        if values.size != expected:
            raise RirlabError(
                f"{self.role} embedding must have {expected} values, got {values.size}"
            )
        if not np.all(np.isfinite(values)):
            raise RirlabError(f"{self.role} embedding contains non-finite values")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class ModelConfig:
    """Shapes and switches for the forward-only network.

    ``activation="identity"``, ``attention_mode="linear"`` and
    ``fuse_mode="audio_bypass"`` exist for linearity checks; production
    forward passes use the defaults.
    """

    sample_rate: int = 44100
    input_len: int = 120000
    rir_len: int = 44160
    early_len: int = 2205
    encoder_blocks: int = 13
    kernel_len: int = 15
    embed_dim: int = 128
    attention_heads: int = 1
    decoder_upsample: tuple = (5, 3, 4, 4, 4, 2)
    dilation_rates: tuple = (1, 2, 4, 8)
    encoder_channels: int = 16
    decoder_channels: int = 16
    decoder_kernel: int = 3
    fusion_kernel_len: int = 15
    band_centers: tuple = DEFAULT_OCTAVE_CENTERS
    activation: str = "relu"
    attention_mode: str = "softmax"
    fuse_mode: str = "attention"

    def __post_init__(self):
        if not (0 < self.early_len < self.rir_len):
            raise RirlabError("need 0 < early_len < rir_len")
        if self.input_len < 1 or self.encoder_blocks < 1:
            raise RirlabError("input_len and encoder_blocks must be positive")
        if self.kernel_len % 2 != 1 or self.decoder_kernel % 2 != 1 or self.fusion_kernel_len % 2 != 1:
            raise RirlabError("convolution kernel lengths must be odd")
        if any(u < 1 for u in self.decoder_upsample):
            raise RirlabError("upsample factors must be >= 1")
        if self.activation not in ("relu", "identity"):
            raise RirlabError(f"unknown activation {self.activation!r}")
        if self.attention_mode not in ("softmax", "linear"):
            raise RirlabError(f"unknown attention mode {self.attention_mode!r}")
        if self.fuse_mode not in ("attention", "audio_bypass"):
            raise RirlabError(f"unknown fuse mode {self.fuse_mode!r}")
        object.__setattr__(self, "decoder_upsample", tuple(int(u) for u in self.decoder_upsample))
        object.__setattr__(self, "dilation_rates", tuple(int(r) for r in self.dilation_rates))
        object.__setattr__(self, "band_centers", tuple(float(c) for c in self.band_centers))

    @property
    def mask_len(self) -> int:
        return self.rir_len - self.early_len

    @property
    def upsample_total(self) -> int:
        return math.prod(self.decoder_upsample)

    @property
    def decoder_init_len(self) -> int:
        # Emit at least rir_len samples; the default config divides exactly
        # (23 * 5*3*4*4*4*2 = 44160).
        return -(-self.rir_len // self.upsample_total)
