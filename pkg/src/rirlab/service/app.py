"""FastAPI application exposing the toolkit operations."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..acoustics import T20_RANGE, T30_RANGE, analyze
from ..data.rooms import RoomSpec, gen_room, gen_rooms, make_reverberant, pseudo_embedding
from ..data.tensorio import read_tensor, write_tensor
from ..data.wavio import read_wav, write_wav
from ..dsp import OctaveBands, StftConfig
from ..errors import RirlabError
from ..evaluation import HistogramConfig, evaluate_pairs, histograms_to_csv, read_manifest
from ..fit import (
    FitConfig,
    LossConfig,
    NoiseShapeParams,
    default_init,
    fit_from_speech,
    fit_rir,
    synth_param_rir,
)
from ..losses import LossWeights, MultiResConfig
from ..model import Embedding, ModelConfig, WeightSet, forward, init_weights
from . import schemas


def _loss_config(settings: schemas.LossSettings) -> LossConfig:
    stft_cfg = (
        MultiResConfig(tuple(StftConfig(f, h, w) for f, h, w in settings.stft_resolutions))
        if settings.stft_resolutions
        else MultiResConfig()
    )
    bands = OctaveBands(tuple(settings.band_centers)) if settings.band_centers else OctaveBands()
    weights = LossWeights(lambda_mse=settings.lambda_mse, lambda_edc=settings.lambda_edc)
    return LossConfig(stft=stft_cfg, bands=bands, weights=weights)


def _params_model(model: schemas.NoiseShapeParamsModel) -> NoiseShapeParams:
    return NoiseShapeParams(
        band_gains=np.asarray(model.band_gains),
        band_decays=np.asarray(model.band_decays),
        direct_delay=model.direct_delay,
        direct_gain=model.direct_gain,
        early_taps=tuple(model.early_taps),
    )


def _acoustic_model(params) -> schemas.AcousticParamsModel:
    return schemas.AcousticParamsModel(t60_s=params.t60, drr_db=params.drr, edt_s=params.edt)


def create_app() -> FastAPI:
    app = FastAPI(title="rirlab", version=__version__)

    @app.exception_handler(RirlabError)
    async def _domain_error(request, exc: RirlabError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/analyze", response_model=schemas.AnalyzeResponse)
    def analyze_rir(req: schemas.AnalyzeRequest):
        decay_range = T20_RANGE if req.decay_range == "t20" else T30_RANGE
        params = analyze(read_wav(req.path), decay_range)
        return schemas.AnalyzeResponse(path=req.path, params=_acoustic_model(params))

    @app.post("/synth", response_model=schemas.SynthResponse)
    def synth(req: schemas.SynthRequest):
        bands = OctaveBands(tuple(req.band_centers)) if req.band_centers else OctaveBands()
        t60 = list(req.t60) * len(bands) if len(req.t60) == 1 else list(req.t60)
        spec = RoomSpec(
            t60_per_band=tuple(t60),
            drr_target=req.drr,
            early_tap_count=req.early_taps,
            seed=req.seed,
        )
        rir, _v, _t, meta = gen_room(spec, req.sample_rate, req.length, bands)
        write_wav(req.out_path, rir, req.wav_format)
        achieved = meta["achieved"]
        return schemas.SynthResponse(
            out_path=req.out_path,
            achieved=schemas.AcousticParamsModel(
                t60_s=achieved["t60"], drr_db=achieved["drr"], edt_s=achieved["edt"]
            ),
            params=meta["params"],
        )

    @app.post("/fit", response_model=schemas.FitResponse)
    def fit(req: schemas.FitRequest):
        loss_cfg = _loss_config(req.loss)
        fit_cfg = FitConfig(
            noise_seed=req.seed, max_iters=req.max_iters, max_evals=req.max_evals
        )
        target = read_wav(req.target_path)
        tap_delays = tuple(req.early_tap_delays)
        if req.dry_path is None:
            init = (
                _params_model(req.init)
                if req.init is not None
                else default_init(
                    target, loss_cfg.bands,
                    early_tap_delays=tap_delays, seed=req.seed,
                )
            )
            result = fit_rir(target, init, fit_cfg, loss_cfg)
            rir_len = len(target)
            rate = target.sample_rate
        else:
            dry = read_wav(req.dry_path)
            rir_len = req.rir_len or (len(target) - len(dry) + 1)
            energy_hint = target.energy() / max(dry.energy(), 1e-12)
            init = (
                _params_model(req.init)
                if req.init is not None
                else default_init(
                    target, loss_cfg.bands,
                    energy=energy_hint, direct_delay=0.0,
                    early_tap_delays=tap_delays, seed=req.seed,
                )
            )
            result = fit_from_speech(target, dry, init, fit_cfg, loss_cfg, rir_len=rir_len)
            rate = target.sample_rate
        report = result.as_dict()
        if req.report_path:
            Path(req.report_path).write_text(json.dumps(report, indent=1))
        if req.estimate_path:
            estimate = synth_param_rir(result.params, req.seed, rir_len, rate, loss_cfg.bands)
            write_wav(req.estimate_path, estimate)
        return schemas.FitResponse(
            report=report, report_path=req.report_path, estimate_path=req.estimate_path
        )

    @app.post("/reverb", response_model=schemas.ReverbResponse)
    def reverb(req: schemas.ReverbRequest):
        wet = make_reverberant(read_wav(req.dry_path), read_wav(req.rir_path), req.crop)
        write_wav(req.out_path, wet, req.wav_format)
        return schemas.ReverbResponse(
            out_path=req.out_path, length=len(wet), sample_rate=wet.sample_rate
        )

    @app.post("/forward", response_model=schemas.ForwardResponse)
    def forward_pass(req: schemas.ForwardRequest):
        cfg = ModelConfig()
        reverberant = read_wav(req.reverberant_path)
        if req.visual_path:
            v = Embedding(values=read_tensor(req.visual_path), role="visual")
        else:
            v = pseudo_embedding(req.seed, "visual")
        if req.text_path:
            t = Embedding(values=read_tensor(req.text_path), role="text")
        else:
            t = pseudo_embedding(req.seed, "text")
        if req.weights_dir:
            weights = WeightSet.load(req.weights_dir)
            weights.validate(cfg)
        else:
            weights = init_weights(cfg, req.init_seed)
        rir = forward(reverberant, v, t, cfg, weights, noise_seed=req.seed)
        write_wav(req.out_path, rir, req.wav_format)
        return schemas.ForwardResponse(
            out_path=req.out_path, length=len(rir), sample_rate=rir.sample_rate
        )

    @app.post("/gen", response_model=schemas.GenResponse)
    def gen(req: schemas.GenRequest):
        bands = OctaveBands(tuple(req.band_centers)) if req.band_centers else OctaveBands()
        rng = np.random.Generator(np.random.Philox([req.seed, 11]))
        specs = []
        for i in range(req.rooms):
            t60 = float(rng.uniform(*req.t60_range))
            drr = float(rng.uniform(*req.drr_range))
            specs.append(
                RoomSpec(
                    t60_per_band=(t60,) * len(bands),
                    drr_target=drr,
                    early_tap_count=req.early_taps,
                    seed=req.seed + i,
                )
            )
        rooms = gen_rooms(specs, req.sample_rate, req.length, bands, workers=req.workers)
        out_dir = Path(req.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        room_dirs = []
        for i, (rir, v_emb, t_emb, meta) in enumerate(rooms):
            room_dir = out_dir / f"room_{i:04d}"
            room_dir.mkdir(exist_ok=True)
            write_wav(room_dir / "rir.wav", rir)
            write_tensor(room_dir / "visual.mrt", v_emb.values.reshape(1, -1))
            write_tensor(room_dir / "text.mrt", t_emb.values.reshape(1, -1))
            (room_dir / "meta.json").write_text(json.dumps(meta, indent=1))
            room_dirs.append(str(room_dir))
        return schemas.GenResponse(out_dir=str(out_dir), rooms=room_dirs)

    @app.post("/eval", response_model=schemas.EvalResponse)
    def eval_pairs(req: schemas.EvalRequest):
        pairs = read_manifest(req.manifest_path)
        hist_cfg = HistogramConfig(
            bins=req.bins,
            t60_range=req.t60_range,
            drr_range=req.drr_range,
            edt_range=req.edt_range,
        )
        report = evaluate_pairs(pairs, hist_cfg, workers=req.workers)
        payload = report.as_dict()
        if req.out_path:
            Path(req.out_path).write_text(json.dumps(payload, indent=1))
        if req.hist_path:
            histograms_to_csv(report, req.hist_path)
        return schemas.EvalResponse(
            report=payload, out_path=req.out_path, hist_path=req.hist_path
        )

    return app


app = create_app()
