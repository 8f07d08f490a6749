"""Named weight tensors: seeded initialization, shape checking, disk format."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..data.tensorio import read_tensor, write_tensor
from ..errors import RirlabError
from .config import ModelConfig, ROLE_DIMS

MANIFEST_NAME = "manifest.json"

#: (query dim, key/value dim) per fusion stage.
ATTENTION_STAGES = {
    "at": (ROLE_DIMS["audio"], ROLE_DIMS["text"]),
    "av": (ROLE_DIMS["audio"], ROLE_DIMS["visual"]),
    "final": (ROLE_DIMS["fused"], ROLE_DIMS["fused"]),
}


def expected_shapes(cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    """Every tensor name and shape the forward pass needs, in a fixed order."""
    c = cfg.encoder_channels
    d = cfg.decoder_channels
    e = cfg.embed_dim
    shapes: dict[str, tuple[int, ...]] = {}

    in_ch = 1
    for i in range(cfg.encoder_blocks):
        shapes[f"enc{i}.conv.w"] = (c, in_ch, cfg.kernel_len)
        shapes[f"enc{i}.conv.b"] = (c,)
        shapes[f"enc{i}.res.w"] = (c, in_ch, 1)
        shapes[f"enc{i}.res.b"] = (c,)
        in_ch = c
    shapes["enc.fc.w"] = (e, c)
    shapes["enc.fc.b"] = (e,)

    for stage, (dq, dkv) in ATTENTION_STAGES.items():
        shapes[f"attn.{stage}.wq"] = (dq, e)
        shapes[f"attn.{stage}.wk"] = (dkv, e)
        shapes[f"attn.{stage}.wv"] = (dkv, e)
        shapes[f"attn.{stage}.wo"] = (e, ROLE_DIMS["fused"])

    shapes["dec.seed.w"] = (d * cfg.decoder_init_len, ROLE_DIMS["fused"])
    shapes["dec.seed.b"] = (d * cfg.decoder_init_len,)
    for j, u in enumerate(cfg.decoder_upsample):
        shapes[f"dec{j}.norm.gw"] = (d, ROLE_DIMS["fused"])
        shapes[f"dec{j}.norm.gb"] = (d,)
        shapes[f"dec{j}.norm.bw"] = (d, ROLE_DIMS["fused"])
        shapes[f"dec{j}.norm.bb"] = (d,)
        shapes[f"dec{j}.up.w"] = (d, d, u)
        shapes[f"dec{j}.up.b"] = (d,)
        shapes[f"dec{j}.conv.w"] = (d, d, cfg.decoder_kernel)
        shapes[f"dec{j}.conv.b"] = (d,)
        shapes[f"dec{j}.res.w"] = (d, d, 1)
        shapes[f"dec{j}.res.b"] = (d,)
        for i in range(len(cfg.dilation_rates)):
            shapes[f"dec{j}.dil{i}.norm.gw"] = (d, ROLE_DIMS["fused"])
            shapes[f"dec{j}.dil{i}.norm.gb"] = (d,)
            shapes[f"dec{j}.dil{i}.norm.bw"] = (d, ROLE_DIMS["fused"])
            shapes[f"dec{j}.dil{i}.norm.bb"] = (d,)
            shapes[f"dec{j}.dil{i}.conv.w"] = (d, d, cfg.decoder_kernel)
            shapes[f"dec{j}.dil{i}.conv.b"] = (d,)
    shapes["dec.out.w"] = (2, d, 1)
    shapes["dec.out.b"] = (2,)

    shapes["fuse_conv.w"] = (cfg.fusion_kernel_len,)
    shapes["fuse_conv.b"] = (1,)
    shapes["noise.gains"] = (len(cfg.band_centers),)
    return shapes


class WeightSet:
    """Immutable mapping of tensor names to float64 arrays."""

    def __init__(self, tensors: dict[str, np.ndarray]):
        self._tensors = {
            name: np.asarray(t, dtype=np.float64) for name, t in tensors.items()
        }

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self._tensors[name]
        except KeyError:
            raise RirlabError(f"weight set is missing tensor {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def names(self) -> list[str]:
        return list(self._tensors)

    def validate(self, cfg: ModelConfig) -> None:
        """Check every expected tensor exists with the derivable shape."""
        for name, shape in expected_shapes(cfg).items():
            if name not in self._tensors:
                raise RirlabError(f"weight set is missing tensor {name!r}")
            got = self._tensors[name].shape
            if got != shape:
                raise RirlabError(
                    f"weight shape mismatch at {name!r}: expected {shape}, got {got}"
                )

    def save(self, directory) -> None:
        """Write one tensor file per entry plus a manifest of names/shapes.

        Tensors are stored as float32, so low mantissa bits beyond single
        precision are dropped.
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        manifest = {}
        for name, tensor in self._tensors.items():
            write_tensor(directory / f"{name}.mrt", tensor)
            manifest[name] = list(tensor.shape)
        (directory / MANIFEST_NAME).write_text(
            json.dumps({"schema": 1, "tensors": manifest}, indent=1, sort_keys=True)
        )

    @classmethod
    def load(cls, directory) -> "WeightSet":
        directory = Path(directory)
        manifest_path = directory / MANIFEST_NAME
        if not manifest_path.is_file():
            raise RirlabError(f"no weight manifest at {manifest_path}")
        manifest = json.loads(manifest_path.read_text())
        tensors = {}
        for name, shape in manifest["tensors"].items():
            tensor = read_tensor(directory / f"{name}.mrt")
            if list(tensor.shape) != list(shape):
                raise RirlabError(
                    f"weight shape mismatch at {name!r}: manifest says {shape}, "
                    f"file has {list(tensor.shape)}"
                )
            tensors[name] = tensor
        return cls(tensors)


def init_weights(cfg: ModelConfig, seed: int, zero_bias: bool = False) -> WeightSet:
    """Seeded random weights; biases are zero except the conditional-norm
    gain offset, which defaults to one (``zero_bias=True`` zeroes that too,
    for linearity checks)."""
    rng = np.random.Generator(np.random.Philox(seed))
    tensors = {}
    for name, shape in expected_shapes(cfg).items():
        if name == "noise.gains":
            tensors[name] = rng.uniform(0.05, 0.3, size=shape)
        elif name.endswith(".b") or name.endswith(".bb"):
            tensors[name] = np.zeros(shape)
        elif name.endswith(".gb"):
            tensors[name] = np.zeros(shape) if zero_bias else np.ones(shape)
        else:
            fan_in = int(np.prod(shape[1:])) if len(shape) > 1 else shape[0]
            scale = 1.0 / np.sqrt(fan_in)
            if name == "dec.out.w":
                # Keep the output head small so the mask sigmoid stays
                # comfortably unsaturated under random weights.
                scale *= 0.1
            tensors[name] = rng.standard_normal(shape) * scale
    return WeightSet(tensors)
