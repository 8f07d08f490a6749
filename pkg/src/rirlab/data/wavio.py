"""Mono WAV reading and writing (PCM16 and float32)."""
from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.io import wavfile

from ..dsp import Signal
from ..errors import RirlabError

PCM16_SCALE = 32768.0


def read_wav(path) -> Signal:
    """Read a mono PCM16 or float32 WAV file.

    PCM16 samples are scaled by 1/32768; float32 samples are passed
    through unchanged.
    """
    path = Path(path)
    if not path.is_file():
        raise RirlabError(f"no such file: {path}")
    try:
        rate, data = wavfile.read(str(path))
    except Exception as exc:
        raise RirlabError(f"malformed WAV file {path}: {exc}") from exc
    if data.ndim != 1:
        raise RirlabError(
            f"{path}: expected mono audio, got {data.shape[1]} channels"
        )
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / PCM16_SCALE
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise RirlabError(f"{path}: unsupported WAV sample format {data.dtype}")
    if data.size == 0:
        raise RirlabError(f"{path}: empty WAV file")
    return Signal(samples=samples, sample_rate=int(rate))


def write_wav(path, signal: Signal, fmt: str = "float32") -> None:
    """Write a mono WAV file as float32 (default) or PCM16.

    Float32 roundtrips bit-exactly; PCM16 quantizes to 1/32768 steps
    (values are clipped to [-1, 32767/32768]).
    """
    path = Path(path)
    if fmt == "float32":
        data = signal.samples.astype(np.float32)
    elif fmt == "pcm16":
        scaled = np.clip(signal.samples * PCM16_SCALE, -32768, 32767)
        data = np.round(scaled).astype(np.int16)
    else:
        raise RirlabError(f"unsupported WAV format {fmt!r}")
    wavfile.write(str(path), signal.sample_rate, data)
