"""Pydantic request and response models for the HTTP API.

Paths in requests are interpreted on the machine the service runs on; the
bundled CLI runs the app in-process by default, so they are ordinary local
paths there.
"""
from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class LossSettings(BaseModel):
    """Optional overrides for the combined objective."""

    lambda_mse: float = 100.0
    lambda_edc: float = 0.1
    stft_resolutions: list[tuple[int, int, int]] | None = Field(
        default=None, description="(fft_size, hop, win_length) triples"
    )
    band_centers: list[float] | None = None


class AnalyzeRequest(BaseModel):
    path: str
    decay_range: str = Field(default="t20", pattern="^(t20|t30)$")


class AcousticParamsModel(BaseModel):
    t60_s: float
    drr_db: float
    edt_s: float


class AnalyzeResponse(BaseModel):
    path: str
    params: AcousticParamsModel


class SynthRequest(BaseModel):
    out_path: str
    t60: list[float] = Field(min_length=1, description="flat value or one per band")
    drr: float = 10.0
    seed: int = 0
    early_taps: int = 6
    length: int = 44160
    sample_rate: int = 44100
    band_centers: list[float] | None = None
    wav_format: str = Field(default="float32", pattern="^(float32|pcm16)$")


class SynthResponse(BaseModel):
    out_path: str
    achieved: AcousticParamsModel
    params: dict


class NoiseShapeParamsModel(BaseModel):
    band_gains: list[float]
    band_decays: list[float]
    direct_delay: float
    direct_gain: float
    early_taps: list[tuple[float, float]] = Field(default_factory=list)


class FitRequest(BaseModel):
    target_path: str
    dry_path: str | None = None
    report_path: str | None = None
    estimate_path: str | None = None
    seed: int = 0
    max_iters: int = 2000
    max_evals: int | None = None
    rir_len: int | None = Field(
        default=None, description="RIR length for the speech path; default infers it"
    )
    early_tap_delays: list[float] = Field(default_factory=list)
    init: NoiseShapeParamsModel | None = None
    loss: LossSettings = Field(default_factory=LossSettings)


class FitResponse(BaseModel):
    report: dict
    report_path: str | None = None
    estimate_path: str | None = None


class ReverbRequest(BaseModel):
    dry_path: str
    rir_path: str
    out_path: str
    crop: int = 120000
    wav_format: str = Field(default="float32", pattern="^(float32|pcm16)$")


class ReverbResponse(BaseModel):
    out_path: str
    length: int
    sample_rate: int


class ForwardRequest(BaseModel):
    reverberant_path: str
    out_path: str
    visual_path: str | None = None
    text_path: str | None = None
    weights_dir: str | None = None
    seed: int = 0
    init_seed: int = 0
    wav_format: str = Field(default="float32", pattern="^(float32|pcm16)$")


class ForwardResponse(BaseModel):
    out_path: str
    length: int
    sample_rate: int


class GenRequest(BaseModel):
    out_dir: str
    rooms: int = Field(ge=1)
    seed: int = 0
    t60_range: tuple[float, float] = (0.3, 1.2)
    drr_range: tuple[float, float] = (0.0, 12.0)
    early_taps: int = 6
    length: int = 44160
    sample_rate: int = 44100
    band_centers: list[float] | None = None
    workers: int | None = None


class GenResponse(BaseModel):
    out_dir: str
    rooms: list[str]


class EvalRequest(BaseModel):
    manifest_path: str
    out_path: str | None = None
    hist_path: str | None = None
    bins: int = 20
    t60_range: tuple[float, float] = (0.0, 2.0)
    drr_range: tuple[float, float] = (-30.0, 30.0)
    edt_range: tuple[float, float] = (0.0, 2.0)
    workers: int | None = None


class EvalResponse(BaseModel):
    report: dict
    out_path: str | None = None
    hist_path: str | None = None
