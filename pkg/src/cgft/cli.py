"""Command-line harness: fixtures, experiments, bundle export, serving, simulation.

Exit codes: 0 success, 2 config error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .cgm.protocol import parse_frame, parse_timestamp
from .cgm.simulator import DEFAULT_START, SensorProfile, iter_relay_frames, simulate_sensor
from .data.binfmt import BinaryFormatError, write_features, write_labels
from .data.manifest import ManifestError, write_manifest
from .experiment import (
    ConfigError,
    DataError,
    export_model_bundle,
    load_config,
    load_experiment_state,
    parse_config,
    run_experiment,
)
from .service.bundle import BundleError
from .service.httpapi import TrackerHTTPServer
from .service.tracker import TrackerService

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def cmd_gen(args) -> int:
    config = load_config(args.config)
    if config.synth is None:
        raise ConfigError("gen needs a config with a data.synthetic section")
    from .data.synthetic import generate_synthetic

    matrices, labels, manifest = generate_synthetic(config.synth)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for fm in matrices:
        write_features(out / f"{fm.model_id}.feat", fm)
    write_labels(out / "labels.lbl", labels)
    write_manifest(manifest, out / "manifest.json")
    print(f"wrote {len(matrices)} feature files, labels and manifest to {out}")
    return EXIT_OK


def cmd_train_eval(args) -> int:
    config = load_config(args.config)
    result = run_experiment(config)
    out_dir = args.out or config.output_dir
    if out_dir is None:
        raise ConfigError("no output directory: pass --out or set output.dir in the config")
    from .report import write_report_dir

    paths = write_report_dir(result, out_dir)
    print((Path(paths["txt"])).read_text(encoding="utf-8"))
    print(f"report artifacts in {out_dir}")
    return EXIT_OK


def cmd_export(args) -> int:
    result = load_experiment_state(args.experiment)
    export_model_bundle(result, args.method, args.out)
    print(f"wrote {args.method} bundle to {args.out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    service = TrackerService(
        args.data_dir,
        bundle=args.bundle,
        very_high_threshold=args.very_high,
    )
    host, port = _host_port(args.listen, env="CGFT_HTTP_ADDR", default=("127.0.0.1", 8080))
    server = TrackerHTTPServer((host, port), service, static_dir=args.ui)
    ingest_server = None
    if args.cgm_listen:
        ihost, iport = _host_port(args.cgm_listen, env="CGFT_CGM_ADDR", default=("127.0.0.1", 9009))
        from .cgm.listener import IngestServer

        # route TCP frames through the service so alerts fire on ingest
        ingest_server = IngestServer((ihost, iport), _BridgeStore(service))
        ingest_server.start()
        print(f"cgm listener on {ingest_server.address[0]}:{ingest_server.address[1]}")
    print(f"tracker service on http://{server.address[0]}:{server.address[1]}")
    try:
        server.start()
        server._thread.join()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
        if ingest_server is not None:
            ingest_server.stop()
    return EXIT_OK


class _BridgeStore:
    """Adapter: the TCP listener's store interface backed by the full service."""

    def __init__(self, service: TrackerService):
        self._service = service

    def ingest(self, reading):
        result, _ = self._service.ingest_reading(reading)
        return result


def cmd_simulate(args) -> int:
    meals = tuple(float(m) for m in args.meals.split(",") if m) if args.meals else ()
    profile = SensorProfile(
        device_id=args.device,
        baseline=args.baseline,
        meal_amplitude=args.amplitude,
        meal_times_min=meals,
        noise_std=args.noise,
        seed=args.seed,
    )
    start = parse_timestamp(args.start) if args.start else DEFAULT_START
    frames = [
        frame
        for _, frame in iter_relay_frames(
            profile, args.duration_min, start, backlog=args.backlog
        )
    ]
    if args.connect:
        host, port = _host_port(args.connect, env=None, default=None)
        from .cgm.listener import send_frames

        acks = send_frames(host, port, frames, pace_seconds=args.pace)
        rejected = sum(1 for a in acks if a.startswith("ERR"))
        print(f"sent {len(frames)} frames ({rejected} rejected)")
    elif args.out:
        Path(args.out).write_text("\n".join(frames) + "\n", encoding="utf-8")
        print(f"wrote {len(frames)} frames to {args.out}")
    else:
        for frame in frames:
            print(frame)
    if args.plot:
        from .report import plot_cgm_trace

        readings = simulate_sensor(profile, args.duration_min, start)
        from datetime import timedelta

        markers = [(start + timedelta(minutes=m), "meal") for m in meals]
        plot_cgm_trace(readings, markers, args.plot, title=f"Simulated CGM ({args.device})")
        print(f"wrote figure to {args.plot}")
    return EXIT_OK


def _host_port(text, env, default):
    value = text or (os.environ.get(env) if env else None)
    if value is None:
        if default is None:
            raise ConfigError("address required (host:port)")
        return default
    if ":" not in value:
        raise ConfigError(f"address must be host:port, got {value!r}")
    host, _, port = value.rpartition(":")
    try:
        return host, int(port)
    except ValueError as exc:
        raise ConfigError(f"bad port in {value!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cgft",
        description="Continuous glucose and food tracker: experiments, service, simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic multi-model fixture")
    p.add_argument("--config", required=True, help="experiment config with a data.synthetic section")
    p.add_argument("--out", required=True, help="output directory for .feat/.lbl/manifest files")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train-eval", help="run the full experiment and write the report")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="report directory (defaults to output.dir from the config)")
    p.set_defaults(func=cmd_train_eval)

    p = sub.add_parser("export", help="export a deployable recognizer bundle")
    p.add_argument("--experiment", required=True, help="experiment.json from train-eval")
    p.add_argument("--method", required=True, choices=("pso", "ga", "early", "equal"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("serve", help="run the tracker service")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--bundle", help="recognizer bundle to deploy")
    p.add_argument("--listen", help="HTTP host:port (or CGFT_HTTP_ADDR)")
    p.add_argument("--cgm-listen", help="also run the TCP ingest listener on host:port")
    p.add_argument("--ui", help="serve a built dashboard from this directory under /ui/")
    p.add_argument("--very-high", type=float, default=300.0, help="very-high alert threshold (mg/dl)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("simulate", help="simulate a sensor and emit relay frames")
    p.add_argument("--device", default="S1")
    p.add_argument("--baseline", type=float, default=110.0)
    p.add_argument("--amplitude", type=float, default=80.0)
    p.add_argument("--meals", default="", help="comma-separated meal offsets in minutes")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration-min", type=float, default=600.0)
    p.add_argument("--start", help="RFC3339 UTC session start")
    p.add_argument("--backlog", action="store_true", help="replay buffered history at connect")
    p.add_argument("--connect", help="stream frames to a TCP listener host:port")
    p.add_argument("--out", help="write frames to a file instead")
    p.add_argument("--pace", type=float, default=0.0, help="seconds between frames when streaming")
    p.add_argument("--plot", help="also render the trace figure to this PNG path")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, BinaryFormatError, ManifestError, BundleError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
