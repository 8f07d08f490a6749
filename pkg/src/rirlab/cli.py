"""Command-line client for the rirlab service.

Every subcommand is a thin HTTP call. Without --server the app is mounted
in-process over an ASGI transport, so no server needs to be running; with
--server the same requests go to a remote instance (paths are then resolved
on the server's filesystem).
"""
from __future__ import annotations

import argparse
import json
import sys

import httpx


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _parse_stft(text: str) -> list[tuple[int, int, int]]:
    out = []
    for chunk in text.split(";"):
        parts = [p for p in chunk.split(",") if p.strip() != ""]
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(
                f"expected fft,hop,win triples separated by ';', got {text!r}"
            )
        out.append(tuple(int(p) for p in parts))
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rirlab",
        description="Room impulse response toolkit client",
    )
    parser.add_argument(
        "--server",
        default=None,
        metavar="URL",
        help="base URL of a running rirlab service; default runs in-process",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="print T60/DRR/EDT of an RIR as JSON")
    p.add_argument("rir", help="path to the RIR WAV file")
    p.add_argument("--decay-range", choices=["t20", "t30"], default="t20")

    p = sub.add_parser("synth", help="synthesize a room RIR with target parameters")
    p.add_argument("out", help="output WAV path")
    p.add_argument("--t60", type=_parse_floats, required=True,
                   metavar="SECONDS[,..]", help="flat T60 or one value per band")
    p.add_argument("--drr", type=float, default=10.0, help="target DRR in dB")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--early-taps", type=int, default=6)
    p.add_argument("--length", type=int, default=44160)
    p.add_argument("--rate", type=int, default=44100)
    p.add_argument("--bands", type=_parse_floats, default=None,
                   metavar="HZ,..", help="octave band centers")

    p = sub.add_parser("fit", help="fit the parametric RIR model to a target")
    p.add_argument("target", help="target RIR WAV, or reverberant speech with --dry")
    p.add_argument("--dry", default=None, help="dry source WAV for the speech path")
    p.add_argument("--report", default=None, help="write the fit report JSON here")
    p.add_argument("--estimate-out", default=None, help="write the fitted RIR WAV here")
    p.add_argument("--seed", type=int, default=0, help="noise seed held fixed during the fit")
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--max-evals", type=int, default=None)
    p.add_argument("--rir-len", type=int, default=None)
    p.add_argument("--tap-delays", type=_parse_floats, default=None,
                   metavar="S,..", help="fixed early-tap delays the fit may weight")
    p.add_argument("--bands", type=_parse_floats, default=None, metavar="HZ,..")
    p.add_argument("--loss-weights", type=_parse_floats, default=None,
                   metavar="L1,L2", help="lambda_mse,lambda_edc")
    p.add_argument("--stft-config", type=_parse_stft, default=None,
                   metavar="F,H,W[;..]", help="STFT resolutions")

    p = sub.add_parser("reverb", help="convolve dry audio with an RIR")
    p.add_argument("dry")
    p.add_argument("rir")
    p.add_argument("out")
    p.add_argument("--crop", type=int, default=120000)

    p = sub.add_parser("forward", help="run the toy model forward pass")
    p.add_argument("reverberant", help="reverberant speech WAV")
    p.add_argument("out", help="output RIR WAV (44160 samples)")
    p.add_argument("--visual", default=None, help="visual embedding tensor file")
    p.add_argument("--text", default=None, help="text embedding tensor file")
    p.add_argument("--weights", default=None, help="weight directory with manifest.json")
    p.add_argument("--seed", type=int, default=0, help="noise seed")
    p.add_argument("--init-seed", type=int, default=0,
                   help="weight init seed when no --weights is given")

    p = sub.add_parser("gen", help="generate synthetic rooms")
    p.add_argument("outdir")
    p.add_argument("--rooms", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t60-range", type=_parse_floats, default=[0.3, 1.2], metavar="LO,HI")
    p.add_argument("--drr-range", type=_parse_floats, default=[0.0, 12.0], metavar="LO,HI")
    p.add_argument("--early-taps", type=int, default=6)
    p.add_argument("--length", type=int, default=44160)
    p.add_argument("--rate", type=int, default=44100)
    p.add_argument("--bands", type=_parse_floats, default=None, metavar="HZ,..")
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("eval", help="MAE evaluation over an estimate/truth manifest")
    p.add_argument("--pairs", required=True, help="CSV manifest (estimate_path,truth_path)")
    p.add_argument("--out", default=None, help="write the report JSON here")
    p.add_argument("--hist-out", default=None, help="write histogram CSV here")
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--t60-range", type=_parse_floats, default=[0.0, 2.0], metavar="LO,HI")
    p.add_argument("--drr-range", type=_parse_floats, default=[-30.0, 30.0], metavar="LO,HI")
    p.add_argument("--edt-range", type=_parse_floats, default=[0.0, 2.0], metavar="LO,HI")
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8400)

    return parser


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    from .service.app import create_app

    transport = httpx.ASGITransport(app=create_app())
    return httpx.Client(transport=transport, base_url="http://rirlab.local", timeout=None)


def _loss_settings(args) -> dict:
    settings = {}
    if getattr(args, "loss_weights", None):
        if len(args.loss_weights) != 2:
            raise SystemExit("--loss-weights expects exactly two values: l1,l2")
        settings["lambda_mse"] = args.loss_weights[0]
        settings["lambda_edc"] = args.loss_weights[1]
    if getattr(args, "stft_config", None):
        settings["stft_resolutions"] = args.stft_config
    if getattr(args, "bands", None):
        settings["band_centers"] = args.bands
    return settings


def _request_body(args) -> tuple[str, dict]:
    if args.command == "analyze":
        return "/analyze", {"path": args.rir, "decay_range": args.decay_range}
    if args.command == "synth":
        body = {
            "out_path": args.out,
            "t60": args.t60,
            "drr": args.drr,
            "seed": args.seed,
            "early_taps": args.early_taps,
            "length": args.length,
            "sample_rate": args.rate,
        }
        if args.bands:
            body["band_centers"] = args.bands
        return "/synth", body
    if args.command == "fit":
        body = {
            "target_path": args.target,
            "dry_path": args.dry,
            "report_path": args.report,
            "estimate_path": args.estimate_out,
            "seed": args.seed,
            "max_iters": args.max_iters,
            "max_evals": args.max_evals,
            "rir_len": args.rir_len,
            "loss": _loss_settings(args),
        }
        if args.tap_delays:
            body["early_tap_delays"] = args.tap_delays
        return "/fit", body
    if args.command == "reverb":
        return "/reverb", {
            "dry_path": args.dry,
            "rir_path": args.rir,
            "out_path": args.out,
            "crop": args.crop,
        }
    if args.command == "forward":
        return "/forward", {
            "reverberant_path": args.reverberant,
            "out_path": args.out,
            "visual_path": args.visual,
            "text_path": args.text,
            "weights_dir": args.weights,
            "seed": args.seed,
            "init_seed": args.init_seed,
        }
    if args.command == "gen":
        return "/gen", {
            "out_dir": args.outdir,
            "rooms": args.rooms,
            "seed": args.seed,
            "t60_range": args.t60_range,
            "drr_range": args.drr_range,
            "early_taps": args.early_taps,
            "length": args.length,
            "sample_rate": args.rate,
            "band_centers": args.bands,
            "workers": args.workers,
        }
    if args.command == "eval":
        return "/eval", {
            "manifest_path": args.pairs,
            "out_path": args.out,
            "hist_path": args.hist_out,
            "bins": args.bins,
            "t60_range": args.t60_range,
            "drr_range": args.drr_range,
            "edt_range": args.edt_range,
            "workers": args.workers,
        }
    raise SystemExit(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service.app import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    endpoint, body = _request_body(args)
    try:
        with _client(args.server) as client:
            response = client.post(endpoint, json=body)
    except httpx.HTTPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        print(f"error: {detail}", file=sys.stderr)
        return 1
    payload = response.json()
    print(json.dumps(payload, indent=1))
    return 0


if __name__ == "__main__":
    sys.exit(main())
