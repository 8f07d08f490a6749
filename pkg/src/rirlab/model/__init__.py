"""Forward-only toy RIR estimation network: audio encoder, cross-attention
fusion, conditioned upsampling decoder, and filtered-noise assembly."""

from .config import Embedding, ModelConfig, ROLE_DIMS
from .weights import WeightSet, expected_shapes, init_weights
from .network import (
    DecoderOutput,
    attend,
    audio_encode,
    cross_attention,
    decode,
    forward,
    fuse,
    render_rir,
)

__all__ = [
    "Embedding",
    "ModelConfig",
    "ROLE_DIMS",
    "WeightSet",
    "expected_shapes",
    "init_weights",
    "DecoderOutput",
    "attend",
    "audio_encode",
    "cross_attention",
    "decode",
    "forward",
    "fuse",
    "render_rir",
]
