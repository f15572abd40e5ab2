"""Command-line entry points (installed as `tutor`).

Subcommands: serve (live session + UI event stream), analyze (report a
persisted session), compare (breathing improvement between two takes),
validate (song difficulty checks), sim (synthesize a virtual singer's
audio + sensor streams).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import threading

from singtutor import breath, score as score_mod, session as session_mod, sources
from singtutor.metrics import compare_takes, compute_take_metrics
from singtutor.simulate import SingerScript, load_script, synth_calibration, synth_voice

log = logging.getLogger(__name__)


def _resolve_song(spec: str):
    if spec.strip().lower() in ("a", "b"):
        return score_mod.bundled_song(spec)
    return score_mod.load_score(spec)


def _script_from_args(args) -> SingerScript:
    if args.script:
        return load_script(args.script)
    pipe_score = _resolve_song(args.song)
    kwargs = {}
    if args.pitch_error_cents is not None:
        kwargs["pitch_error_cents"] = (args.pitch_error_cents,) * len(pipe_score.notes)
    if args.breath_depth is not None:
        kwargs["breath_depth"] = (args.breath_depth,) * len(pipe_score.hints)
    return SingerScript(
        score=pipe_score,
        breath_style=args.breath_style,
        sensor_noise_rms_n=args.sensor_noise,
        audio_noise_dbfs=args.audio_noise,
        seed=args.seed,
        **kwargs,
    )


def _take_report(record) -> tuple[dict, str]:
    if record.score is not None:
        thresholds = (breath.BreathThresholds.from_calibration(record.calibration)
                      if record.calibration is not None else None)
        metrics = compute_take_metrics(record.score, record.pitch_frames(),
                                       record.breath_samples(), thresholds)
    elif record.metrics is not None:
        metrics = record.metrics
    else:
        raise SystemExit("session carries neither a score nor stored metrics")
    lines = [
        f"session: {record.song_id} ({record.mode}), {len(record.frames)} frames",
        f"pitch accuracy: {metrics.accuracy_pct:.2f}% "
        f"({metrics.correct_notes}/{metrics.total_notes} notes correct)",
    ]
    if metrics.bdr is not None:
        lines.append(
            "breathing dynamic range (N): "
            f"la {metrics.bdr.la:.3f}, bw {metrics.bdr.bw:.3f}, rb {metrics.bdr.rb:.3f}"
        )
    if metrics.pattern_by_hint:
        lines.append("hints:")
        for i, (p, achieved) in enumerate(zip(metrics.pattern_by_hint,
                                              metrics.hint_compliance)):
            target = record.score.hints[i].target_fraction if record.score else float("nan")
            lines.append(f"  {i + 1}: {p.label:<13} achieved {achieved:.3f}"
                         f" / target {target:.2f}")
    return metrics.to_dict(), "\n".join(lines)


def cmd_analyze(args) -> int:
    record = session_mod.load(args.session)
    metrics_dict, text = _take_report(record)
    print(json.dumps(metrics_dict, indent=2) if args.json else text)
    return 0


def cmd_compare(args) -> int:
    takes = []
    for path in (args.before, args.after):
        record = session_mod.load(path)
        metrics_dict, _ = _take_report(record)
        from singtutor.metrics import TakeMetrics

        takes.append(TakeMetrics.from_dict(metrics_dict))
    result = compare_takes(takes[0], takes[1])
    if args.json:
        print(json.dumps(vars(result), indent=2))
        return 0
    print(f"abdominal BDR change: {result.delta_bdr_la:+.3f} N "
          f"({'improved' if result.abdomen_support_improved else 'not improved'})")
    print(f"rib BDR change:       {result.delta_bdr_rb:+.3f} N "
          f"({'reduced' if result.ribs_portion_reduced else 'not reduced'})")
    print(f"both: {'yes' if result.both else 'no'}")
    return 0


def cmd_validate(args) -> int:
    try:
        pipe_score = _resolve_song(args.song)
    except score_mod.ScoreError as e:
        print(f"invalid score: {e}", file=sys.stderr)
        return 1
    report = score_mod.validate_difficulty(pipe_score)
    print(report.summary())
    return 0 if report.passed else 1


def cmd_sim(args) -> int:
    script = _script_from_args(args)
    voice = synth_voice(script, sample_rate=args.sample_rate)
    sources.write_wav(args.out_wav, voice, sample_rate=args.sample_rate)
    from singtutor.simulate import synth_breath

    lines = synth_breath(script, rate_hz=args.sensor_rate)
    with open(args.out_sensor, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    print(f"wrote {args.out_wav} ({len(voice)} samples) and "
          f"{args.out_sensor} ({len(lines)} lines)")
    if args.out_calibration:
        exhale, deep = synth_calibration(script, rate_hz=args.sensor_rate)
        cal = breath.calibrate(
            [session_mod.parse_sensor_line(l) for l in exhale],
            [session_mod.parse_sensor_line(l) for l in deep],
        )
        session_mod.save_calibration(cal, args.out_calibration)
        print(f"wrote {args.out_calibration}")
    return 0


def _wait_until_playing(engine, poll_s: float = 0.05) -> None:
    import time

    while engine.transport.state != "playing":
        time.sleep(poll_s)


def _pump_sensor(engine, lines, pace: bool) -> None:
    try:
        _wait_until_playing(engine)
        stream = sources.paced(lines, lambda l: int(l.split(",", 1)[0])) if pace else lines
        for line in stream:
            engine.feed_sensor_line(line)
    except Exception as e:  # noqa: BLE001 - source failure pauses the session
        log.warning("sensor source stopped: %s", e)
        try:
            engine.command("pause")
        except session_mod.CommandRejected:
            pass


def _pump_audio(engine, frames, pace: bool) -> None:
    try:
        _wait_until_playing(engine)
        stream = sources.paced(frames, lambda f: f[0]) if pace else frames
        for t_ms, samples in stream:
            engine.feed_audio(t_ms, samples)
    except Exception as e:  # noqa: BLE001
        log.warning("audio source stopped: %s", e)
        try:
            engine.command("pause")
        except session_mod.CommandRejected:
            pass


def cmd_serve(args) -> int:
    import uvicorn

    from singtutor.pitch import PitchConfig
    from singtutor.server import create_app
    from singtutor.session import SessionEngine

    pipe_score = _resolve_song(args.song)
    calibration = (session_mod.load_calibration(args.calibration)
                   if args.calibration else None)
    cfg = PitchConfig()

    sensor_lines = None
    audio_frames = None
    pace = True
    if args.sensor == "sim" or args.audio == "sim":
        script = _script_from_args(args)
    if args.sensor == "sim":
        from singtutor.simulate import synth_breath

        sensor_lines = synth_breath(script, rate_hz=args.sensor_rate)
        if calibration is None and args.mode == session_mod.MODE_PITCH_BREATH:
            exhale, deep = synth_calibration(script, rate_hz=args.sensor_rate)
            calibration = breath.calibrate(
                [session_mod.parse_sensor_line(l) for l in exhale],
                [session_mod.parse_sensor_line(l) for l in deep],
            )
    elif args.sensor.startswith("file:"):
        sensor_lines = sources.file_lines(args.sensor[5:])
    elif args.sensor.startswith("serial:"):
        sensor_lines = sources.serial_lines(args.sensor[7:])
        pace = True
    elif args.sensor.startswith("tcp:"):
        host, _, port = args.sensor[4:].rpartition(":")
        sensor_lines = sources.tcp_lines(host, int(port))
    elif args.sensor != "none":
        raise SystemExit(f"unknown sensor source {args.sensor!r}")

    if args.audio == "sim":
        audio_frames = sources.frames_from_samples(
            synth_voice(script, sample_rate=cfg.sample_rate_hz), cfg)
    elif args.audio.startswith("wav:"):
        cfg, audio_frames = sources.wav_frames(args.audio[4:], cfg)
    elif args.audio == "device":
        audio_frames = sources.device_frames(cfg)
        pace = False  # the device itself paces delivery
    elif args.audio != "none":
        raise SystemExit(f"unknown audio source {args.audio!r}")

    engine = SessionEngine(pipe_score, mode=args.mode, pitch_config=cfg,
                           calibration=calibration, song_id=args.song)
    app = create_app(engine, ui_dir=args.ui_dir)

    if sensor_lines is not None and args.mode == session_mod.MODE_PITCH_BREATH:
        threading.Thread(target=_pump_sensor, args=(engine, sensor_lines, pace),
                         daemon=True).start()
    if audio_frames is not None:
        threading.Thread(target=_pump_audio, args=(engine, audio_frames, pace),
                         daemon=True).start()

    host, _, port = args.listen.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def _add_sim_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--script", help="singer script JSON")
    p.add_argument("--song", default="A", help="bundled song (A/B) or score path")
    p.add_argument("--pitch-error-cents", type=float, default=None)
    p.add_argument("--breath-style", default="abdominal",
                   choices=["abdominal", "chest", "mixed"])
    p.add_argument("--breath-depth", type=float, default=None)
    p.add_argument("--sensor-noise", type=float, default=0.0,
                   help="sensor noise rms (N)")
    p.add_argument("--audio-noise", type=float, default=None,
                   help="audio noise level (dBFS)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sensor-rate", type=float, default=100.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tutor",
                                     description="singing tutor engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run a live session with the browser UI")
    _add_sim_args(p)
    p.add_argument("--sensor", default="sim",
                   help="sim | file:PATH | serial:PATH | tcp:HOST:PORT | none")
    p.add_argument("--audio", default="sim", help="sim | wav:PATH | device | none")
    p.add_argument("--mode", default=session_mod.MODE_PITCH_BREATH,
                   choices=[session_mod.MODE_PITCH, session_mod.MODE_PITCH_BREATH])
    p.add_argument("--listen", default="127.0.0.1:8765")
    p.add_argument("--calibration", help="calibration JSON from `tutor sim`")
    p.add_argument("--ui-dir", help="built frontend directory to serve at /")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("analyze", help="report metrics of a persisted session")
    p.add_argument("session")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compare", help="breathing improvement between two takes")
    p.add_argument("before")
    p.add_argument("after")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate", help="check a song's difficulty constraints")
    p.add_argument("song")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sim", help="synthesize a virtual singer's streams")
    _add_sim_args(p)
    p.add_argument("--out-wav", required=True)
    p.add_argument("--out-sensor", required=True)
    p.add_argument("--out-calibration")
    p.add_argument("--sample-rate", type=int, default=44100)
    p.set_defaults(func=cmd_sim)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
