"""Command-line surface: gen, train, eval, bench, encode, serve, replay.

Machine-readable output goes to stdout, diagnostics to stderr; every
command exits nonzero on contract violations.
"""

from __future__ import annotations

import argparse
import asyncio
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .baseline import AdcConfig, compare_pipelines
from .dataset import (
    DEFAULT_PER_CLASS,
    DEFAULT_SEED,
    DEFAULT_TRAIN_PER_CLASS,
    center_window_features,
    gen_dataset,
    read_manifest,
    synthesize_sample,
)
from .encoder import DEFAULT_DELTA, EncoderConfig, EncoderMode, encode
from .errors import NeuroradarError
from .evaluation import compute_metrics, evaluate_split, gated_predictions
from .eventfile import write_stream
from .gestures import (
    GESTURE_BY_NAME,
    GESTURE_NAMES,
    GestureClass,
    GestureParams,
    RadarConfig,
    SampledSignal,
    default_params,
    gesture_trajectory,
    synthesize_if,
)
from .model import TrainConfig, accuracy, init_model, load_model, quantize, save_model, train
from .pipeline import GateConfig
from .service import GestureSession, ServiceConfig, UartMirror


def _eprint(*args) -> None:
    print(*args, file=sys.stderr)


def _enc_config(args) -> EncoderConfig:
    mode = (
        EncoderMode.INTERPOLATED_CROSSING
        if getattr(args, "mode", "sample-and-update") == "interpolated-crossing"
        else EncoderMode.SAMPLE_AND_UPDATE
    )
    return EncoderConfig(delta=args.delta, mode=mode, tick_rate=args.tick_rate)


def cmd_gen(args) -> int:
    records = gen_dataset(
        args.out,
        per_class=args.per_class,
        train_per_class=args.train_per_class,
        seed=args.seed,
        enc_cfg=_enc_config(args),
    )
    n_train = sum(1 for r in records if r.split == "train")
    print(f"manifest {Path(args.out) / 'manifest.jsonl'}")
    print(f"samples {len(records)} train {n_train} test {len(records) - n_train}")
    return 0


def cmd_train(args) -> int:
    manifest = Path(args.manifest)
    records = read_manifest(manifest)
    base = manifest.parent
    gate = GateConfig(min_events=args.gate_threshold)

    if args.holdout_profile is not None:
        # cross-profile generalization probe: hold one synthetic user out
        train_recs = [r for r in records if r.profile != args.holdout_profile]
        test_recs = [r for r in records if r.profile == args.holdout_profile]
        if not test_recs:
            _eprint(f"error: no samples with profile {args.holdout_profile}")
            return 2
        x_tr, y_tr, _, _ = center_window_features(train_recs, base)
        x_te, y_te, c_te, _ = center_window_features(test_recs, base)
    else:
        x_tr, y_tr, _, _ = center_window_features(records, base, split="train")
        x_te, y_te, c_te, _ = center_window_features(records, base, split="test")
    _eprint(f"training on {len(x_tr)} samples")
    cfg = TrainConfig(lr=args.lr, epochs=args.epochs, batch=args.batch, seed=args.seed)
    model = train(init_model(seed=args.seed), x_tr, y_tr, cfg)
    qmodel = quantize(model, x_te, y_te)
    n_bytes = save_model(qmodel, args.model_out)

    train_acc = accuracy(model, x_tr, y_tr)
    pred_f = gated_predictions(model, x_te, c_te, gate)
    pred_q = gated_predictions(qmodel.dequantize(), x_te, c_te, gate)
    m_f = compute_metrics(y_te, pred_f)
    m_q = compute_metrics(y_te, pred_q)
    print(f"model {args.model_out} bytes {n_bytes}")
    print(f"train accuracy {train_acc:.4f}")
    print(f"test accuracy float {m_f.accuracy:.4f}")
    print(f"test accuracy quant {m_q.accuracy:.4f}")
    print(m_q.format_text())
    return 0


def cmd_eval(args) -> int:
    manifest = Path(args.manifest)
    records = read_manifest(manifest)
    qmodel = load_model(args.model)
    gate = GateConfig(min_events=args.gate_threshold)
    metrics = evaluate_split(records, manifest.parent, qmodel, split=args.split, gate=gate)
    print(metrics.format_text())
    return 0 if metrics.accuracy >= args.threshold else 1


def cmd_bench(args) -> int:
    manifest = Path(args.manifest)
    records = read_manifest(manifest)
    enc_cfg = _enc_config(args)
    adc_cfg = AdcConfig(fs=args.adc_fs, bits=args.adc_bits)

    signals: list[tuple[SampledSignal, GestureClass]] = []
    for rec in records:
        if rec.split != "test":
            continue
        signals.append((synthesize_sample(rec), GestureClass(rec.label)))
    # fresh idle traffic at operating defaults
    for k in range(args.idle_seeds):
        params = GestureParams(r0=0.45, amplitude=0.0, freq=0.0, snr_db=20.0)
        traj = gesture_trajectory(GestureClass.NO_ACTIVITY, params, 900_000 + k)
        sig = synthesize_if(traj, RadarConfig(), 20.0, 910_000 + k)
        signals.append((sig, GestureClass.NO_ACTIVITY))
    _eprint(f"benchmarking {len(signals)} signals")

    report = compare_pipelines(signals, enc_cfg, adc_cfg)
    print(f"adc_bytes {report.adc_bytes}")
    print(f"event_bytes {report.event_bytes}")
    print(f"reduction_ratio {report.reduction_ratio:.4f}")
    print(f"gesture_byte_ratio {report.gesture_byte_ratio:.4f}")
    print(f"idle_byte_ratio {report.idle_byte_ratio:.4f}")
    print(f"dense_mult_adds {report.dense_mult_adds}")
    print(f"event_mult_adds {report.event_mult_adds}")
    print(f"idle_dense_mult_adds {report.idle_dense_mult_adds}")
    print(f"idle_event_mult_adds {report.idle_event_mult_adds}")

    lines = ["class,adc_bytes,event_bytes,ratio,dense_ops,event_ops"]
    for code in sorted(report.per_class):
        row = report.per_class[code]
        ratio = row["event_bytes"] / row["adc_bytes"] if row["adc_bytes"] else 0.0
        lines.append(
            f"{GESTURE_NAMES[GestureClass(code)]},{row['adc_bytes']},"
            f"{row['event_bytes']},{ratio:.4f},{row['dense_ops']},{row['event_ops']}"
        )
    table = "\n".join(lines)
    if args.csv:
        Path(args.csv).write_text(table + "\n", encoding="utf-8")
        _eprint(f"wrote {args.csv}")
    else:
        print(table)
    return 0


def cmd_encode(args) -> int:
    enc_cfg = _enc_config(args)
    if args.synth is not None:
        gesture = GESTURE_BY_NAME[args.synth]
        rng = np.random.default_rng([args.seed, int(gesture), 0xC1])
        params = default_params(gesture, rng)
        params = GestureParams(**{**asdict(params), "duration": args.duration, "snr_db": args.snr})
        traj = gesture_trajectory(gesture, params, args.seed)
        signal = synthesize_if(traj, RadarConfig(), args.snr, args.seed + 1)
    elif args.infile is not None:
        samples = np.load(args.infile)
        signal = SampledSignal(sample_rate=args.rate, samples=np.asarray(samples, dtype=np.float64))
    else:
        _eprint("encode: need --synth CLASS or --in FILE")
        return 2
    stream = encode(signal, enc_cfg)
    n = write_stream(stream, args.out)
    print(f"{args.out} events {stream.count} bytes {n}")
    return 0


def cmd_serve(args) -> int:
    from .server import run_server  # imported lazily: needs websockets

    model = load_model(args.model) if args.model else None
    if model is None:
        _eprint("serve: no model given; gate-open windows will label NO_ACTIVITY")
    cfg = _service_config(args)
    uart_sink = open(args.uart_mirror, "ab") if args.uart_mirror else None
    try:
        asyncio.run(
            run_server(
                args.host,
                args.port,
                model,
                cfg,
                max_sessions=args.max_sessions,
                uart_sink=uart_sink,
            )
        )
    except KeyboardInterrupt:
        _eprint("stopped")
    finally:
        if uart_sink is not None:
            uart_sink.close()
    return 0


def cmd_replay(args) -> int:
    """Offline replay: run a session on a logical clock, print frames."""
    model = load_model(args.model) if args.model else None
    cfg = _service_config(args)
    uart = None
    sink = None
    if args.uart_mirror:
        sink = open(args.uart_mirror, "ab")
        uart = UartMirror(sink)
    session = GestureSession("replay", model, cfg, uart)
    gesture = GESTURE_BY_NAME[args.gesture]
    now = 0.0
    for frame in (f"HELLO {__version__}", "MODE replay", f"REPLAY {int(gesture)} {args.seed}"):
        for out in session.handle_frame(frame, now):
            print(out)
    n_ticks = math.ceil(args.duration * 1000.0 / cfg.tick_ms)
    for _ in range(n_ticks):
        now += cfg.tick_ms
        for out in session.tick(now):
            print(out)
    _eprint(
        f"classifier_calls {session.classifier_calls} "
        f"dropped_frames {session.dropped_frames} player {session.player}"
    )
    if sink is not None:
        sink.close()
    return 0


def _service_config(args) -> ServiceConfig:
    return ServiceConfig(
        gate=GateConfig(min_events=args.gate_threshold),
        debounce_k=args.debounce_k,
        cooldown_s=args.cooldown,
        idle_mute_s=args.idle_mute,
        encoder=EncoderConfig(delta=args.delta),
        snr_db=args.snr,
    )


def _add_encoder_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="encoder threshold, volts")
    p.add_argument(
        "--mode",
        choices=["sample-and-update", "interpolated-crossing"],
        default="sample-and-update",
    )
    p.add_argument("--tick-rate", type=float, default=125e6, dest="tick_rate")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neuroradar",
        description="Event-driven radar gesture recognition harness",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate the synthetic event dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--per-class", type=int, default=DEFAULT_PER_CLASS, dest="per_class")
    p.add_argument(
        "--train-per-class", type=int, default=DEFAULT_TRAIN_PER_CLASS, dest="train_per_class"
    )
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    _add_encoder_flags(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train, quantize, and write the NRNM model")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model-out", required=True, dest="model_out")
    p.add_argument("--lr", type=float, default=TrainConfig.lr)
    p.add_argument("--epochs", type=int, default=TrainConfig.epochs)
    p.add_argument("--batch", type=int, default=TrainConfig.batch)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gate-threshold", type=int, default=30, dest="gate_threshold")
    p.add_argument(
        "--holdout-profile",
        type=int,
        default=None,
        dest="holdout_profile",
        help="train on all but this user profile, test on it (ignores splits)",
    )
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate an NRNM model on a manifest split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--split", default="test", choices=["train", "test"])
    p.add_argument("--threshold", type=float, default=0.85)
    p.add_argument("--gate-threshold", type=int, default=30, dest="gate_threshold")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="dense vs event pipeline accounting")
    p.add_argument("--manifest", required=True)
    p.add_argument("--idle-seeds", type=int, default=24, dest="idle_seeds")
    p.add_argument("--adc-fs", type=float, default=2048.0, dest="adc_fs")
    p.add_argument("--adc-bits", type=int, default=12, dest="adc_bits")
    p.add_argument("--csv", default=None)
    _add_encoder_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("encode", help="encode a signal (or synthesize one) to NRAD")
    p.add_argument("--synth", choices=sorted(GESTURE_BY_NAME), default=None)
    p.add_argument("--in", dest="infile", default=None, help=".npy voltage samples")
    p.add_argument("--rate", type=float, default=8192.0, help="sample rate for --in")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--duration", type=float, default=1.5)
    p.add_argument("--snr", type=float, default=20.0)
    p.add_argument("--out", required=True)
    _add_encoder_flags(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("serve", help="run the live demo WebSocket service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--model", default=None)
    p.add_argument("--max-sessions", type=int, default=16, dest="max_sessions")
    p.add_argument("--uart-mirror", default=None, dest="uart_mirror")
    _add_service_flags(p)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("replay", help="offline replay session, frames to stdout")
    p.add_argument("--gesture", choices=sorted(GESTURE_BY_NAME), required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--model", default=None)
    p.add_argument("--duration", type=float, default=5.0, help="session seconds")
    p.add_argument("--uart-mirror", default=None, dest="uart_mirror")
    _add_service_flags(p)
    p.set_defaults(func=cmd_replay)

    return parser


def _add_service_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--snr", type=float, default=20.0)
    p.add_argument("--gate-threshold", type=int, default=30, dest="gate_threshold")
    p.add_argument("--debounce-k", type=int, default=3, dest="debounce_k")
    p.add_argument("--cooldown", type=float, default=1.0)
    p.add_argument("--idle-mute", type=float, default=30.0, dest="idle_mute")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NeuroradarError as exc:
        _eprint(f"error: {exc}")
        return 2
    except FileNotFoundError as exc:
        _eprint(f"error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
