"""Forward-pass operations: encoder, cross-attention fusion, decoder, assembly."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..dsp import OctaveBands, Signal, octave_noise
from ..errors import RirlabError
from .config import Embedding, ModelConfig, ROLE_DIMS
from .weights import ATTENTION_STAGES, WeightSet

NORM_EPS = 1e-12


def _conv1d(x, w, b, stride=1, dilation=1, pad=0):
    """1-D convolution over (channels, time) with (out, in, k) weights."""
    if pad:
        x = np.pad(x, ((0, 0), (pad, pad)))
    k = w.shape[2]
    span = (k - 1) * dilation + 1
    windows = sliding_window_view(x, span, axis=1)[:, ::stride, ::dilation]
    return np.tensordot(w, windows, axes=([1, 2], [0, 2])) + b[:, None]


def _activate(x, cfg: ModelConfig):
    if cfg.activation == "relu":
        return np.maximum(x, 0.0)
    return x


def _instance_norm(x):
    """Per-channel normalization over the time axis."""
    mean = x.mean(axis=1, keepdims=True)
    var = x.var(axis=1, keepdims=True)
    return (x - mean) / np.sqrt(var + NORM_EPS)


def audio_encode(reverberant: Signal, cfg: ModelConfig, w: WeightSet) -> Embedding:
    """Residual strided conv stack, mean-pooled over time, mapped to 128 dims."""
    if len(reverberant) != cfg.input_len:
        raise RirlabError(
            f"encoder expects {cfg.input_len} samples, got {len(reverberant)}"
        )
    x = reverberant.samples[None, :]
    pad = (cfg.kernel_len - 1) // 2
    for i in range(cfg.encoder_blocks):
        main = _conv1d(x, w[f"enc{i}.conv.w"], w[f"enc{i}.conv.b"], stride=2, pad=pad)
        skip = _conv1d(x, w[f"enc{i}.res.w"], w[f"enc{i}.res.b"], stride=2)
        x = _activate(main, cfg) + skip
    pooled = x.mean(axis=1)
    values = w["enc.fc.w"] @ pooled + w["enc.fc.b"]
    return Embedding(values=values, role="audio")


def attend(q, k, v, wq, wk, wv, wo, mode: str = "softmax"):
    """Scaled dot-product attention over row vectors.

    ``q`` is (1, dq); ``k`` and ``v`` are (n, dkv). Returns the (1, out)
    result and the (1, n) attention weights. ``mode="linear"`` replaces the
    softmax with the raw scores (a linearity-test configuration).
    """
    q = np.atleast_2d(np.asarray(q, dtype=np.float64))
    k = np.atleast_2d(np.asarray(k, dtype=np.float64))
    v = np.atleast_2d(np.asarray(v, dtype=np.float64))
    if k.shape[0] != v.shape[0]:
        raise RirlabError(f"key/value row mismatch: {k.shape[0]} vs {v.shape[0]}")
    if q.shape[1] != wq.shape[0] or k.shape[1] != wk.shape[0] or v.shape[1] != wv.shape[0]:
        raise RirlabError(
            "attention projection shape mismatch: "
            f"q{q.shape} k{k.shape} v{v.shape} vs wq{wq.shape} wk{wk.shape} wv{wv.shape}"
        )
    d = wq.shape[1]
    scores = (q @ wq) @ (k @ wk).T / np.sqrt(d)
    if mode == "softmax":
        shifted = scores - scores.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        weights = e / e.sum(axis=1, keepdims=True)
    else:
        weights = scores
    out = (weights @ (v @ wv)) @ wo
    return out, weights


def cross_attention(
    q: Embedding, k: Embedding, v: Embedding, w: WeightSet, stage: str,
    mode: str = "softmax",
) -> Embedding:
    """Single-query cross-modal attention; with one key/value row the
    softmax weight is exactly 1."""
    if k.role != v.role or len(k) != len(v):
        raise RirlabError(
            f"key and value must share a role, got {k.role}/{v.role}"
        )
    if stage not in ATTENTION_STAGES:
        raise RirlabError(f"unknown attention stage {stage!r}")
    out, _ = attend(
        q.values[None, :], k.values[None, :], v.values[None, :],
        w[f"attn.{stage}.wq"], w[f"attn.{stage}.wk"],
        w[f"attn.{stage}.wv"], w[f"attn.{stage}.wo"],
        mode=mode,
    )
    return Embedding(values=out[0], role="fused")


def fuse(a: Embedding, v: Embedding, t: Embedding, w: WeightSet,
         cfg: ModelConfig = ModelConfig()) -> Embedding:
    """Two-step fusion: audio attends to text and to vision, then the
    audio-visual result attends to the audio-textual one."""
    if a.role != "audio" or v.role != "visual" or t.role != "text":
        raise RirlabError(
            f"fuse expects audio/visual/text embeddings, got {a.role}/{v.role}/{t.role}"
        )
    mode = cfg.attention_mode
    f_at = cross_attention(a, t, t, w, "at", mode=mode)
    f_av = cross_attention(a, v, v, w, "av", mode=mode)
    return cross_attention(f_av, f_at, f_at, w, "final", mode=mode)


class DecoderOutput(NamedTuple):
    early: Signal
    mask: np.ndarray
    mask_logits: np.ndarray


def _cond_norm(x, f, w: WeightSet, prefix: str):
    gain = w[f"{prefix}.gw"] @ f + w[f"{prefix}.gb"]
    bias = w[f"{prefix}.bw"] @ f + w[f"{prefix}.bb"]
    return _instance_norm(x) * gain[:, None] + bias[:, None]


def decode(f: Embedding, cfg: ModelConfig, w: WeightSet) -> DecoderOutput:
    """Expand the fused vector into the early clip and the late-tail mask.

    A seed sequence derived from ``f`` grows through the upsample stages;
    each stage applies conditional instance normalization, a learnable
    transposed-conv upsampler, a convolution with an upsample-projection
    residual, then dilated convolutions. The two output channels are
    truncated to early_len and rir_len - early_len; the mask channel goes
    through a sigmoid.
    """
    if f.role != "fused":
        raise RirlabError(f"decoder expects a fused embedding, got role {f.role!r}")
    fv = f.values
    d = cfg.decoder_channels
    x = (w["dec.seed.w"] @ fv + w["dec.seed.b"]).reshape(d, cfg.decoder_init_len)
    pad = (cfg.decoder_kernel - 1) // 2
    for j, u in enumerate(cfg.decoder_upsample):
        normed = _activate(_cond_norm(x, fv, w, f"dec{j}.norm"), cfg)
        up_w = w[f"dec{j}.up.w"]
        up = np.einsum("oij,il->olj", up_w, normed).reshape(d, -1)
        up = up + w[f"dec{j}.up.b"][:, None]
        main = _conv1d(up, w[f"dec{j}.conv.w"], w[f"dec{j}.conv.b"], pad=pad)
        skip = _conv1d(np.repeat(x, u, axis=1), w[f"dec{j}.res.w"], w[f"dec{j}.res.b"])
        x = main + skip
        for i, rate in enumerate(cfg.dilation_rates):
            z = _activate(_cond_norm(x, fv, w, f"dec{j}.dil{i}.norm"), cfg)
            x = x + _conv1d(
                z, w[f"dec{j}.dil{i}.conv.w"], w[f"dec{j}.dil{i}.conv.b"],
                dilation=rate, pad=rate * pad,
            )
    out = _conv1d(x, w["dec.out.w"], w["dec.out.b"])
    if out.shape[1] < cfg.rir_len:
        raise RirlabError(
            f"decoder emitted {out.shape[1]} samples, needs >= {cfg.rir_len}"
        )
    early = Signal(samples=out[0, : cfg.early_len], sample_rate=cfg.sample_rate)
    mask_logits = out[1, : cfg.mask_len]
    # Keep the mask strictly inside (0, 1) even where float64 would round
    # the sigmoid to exactly 0 or 1.
    mask = np.clip(
        1.0 / (1.0 + np.exp(-mask_logits)),
        np.nextafter(0.0, 1.0),
        np.nextafter(1.0, 0.0),
    )
    return DecoderOutput(early=early, mask=mask, mask_logits=mask_logits)


def render_rir(early: Signal, mask, noise: Signal, fusion_kernel, bias: float = 0.0) -> Signal:
    """Concatenate the early clip with mask-shaped noise and smooth with a
    length-preserving 1-D convolution."""
    mask = np.asarray(mask, dtype=np.float64)
    if mask.size != len(noise):
        raise RirlabError(
            f"mask/noise length mismatch: {mask.size} vs {len(noise)}"
        )
    kernel = np.asarray(fusion_kernel, dtype=np.float64).reshape(-1)
    if kernel.size % 2 != 1:
        raise RirlabError("fusion kernel length must be odd")
    assembled = np.concatenate([early.samples, mask * noise.samples])
    pad = (kernel.size - 1) // 2
    padded = np.pad(assembled, pad)
    smoothed = np.convolve(padded, kernel[::-1], mode="valid") + bias
    return Signal(samples=smoothed, sample_rate=early.sample_rate)


def _fit_length(samples: np.ndarray, length: int) -> np.ndarray:
    if samples.size >= length:
        return samples[:length]
    return np.pad(samples, (0, length - samples.size))


def forward(
    reverberant: Signal,
    v: Embedding,
    t: Embedding,
    cfg: ModelConfig,
    w: WeightSet,
    noise_seed: int,
) -> Signal:
    """Full pipeline: encode, fuse, decode, draw shaped noise, assemble.

    The input is head-cropped or zero-padded to ``cfg.input_len``; the
    output has exactly ``cfg.rir_len`` samples and is deterministic given
    (weights, noise_seed).
    """
    sized = Signal(
        samples=_fit_length(reverberant.samples, cfg.input_len),
        sample_rate=reverberant.sample_rate,
    )
    a = audio_encode(sized, cfg, w)
    if cfg.fuse_mode == "audio_bypass":
        fused = Embedding(values=a.values, role="fused")
    else:
        fused = fuse(a, v, t, w, cfg)
    early, mask, _ = decode(fused, cfg, w)
    noise = octave_noise(
        noise_seed, cfg.mask_len, OctaveBands(cfg.band_centers),
        w["noise.gains"], sample_rate=cfg.sample_rate,
    )
    return render_rir(early, mask, noise, w["fuse_conv.w"], bias=float(w["fuse_conv.b"][0]))
