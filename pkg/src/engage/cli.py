"""``engage`` command line: run, simulate, check.

Exit codes: 0 success, 1 validation failure, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import signal
import socket
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .core import ConfigError, EngineConfig, ValidationError, load_config, validate_config
from .engine import DecisionEngine
from .protocol import ProtocolError, emit_command, parse_event
from .simulator import ScenarioError, load_scenario, run_scenario

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2
_CONFIG_PORT = -1  # --tcp given without a value


@dataclass
class RunSummary:
    events: int = 0
    commands: int = 0
    errors: int = 0
    parse_us: list = field(default_factory=list, repr=False)
    decide_us: list = field(default_factory=list, repr=False)
    emit_us: list = field(default_factory=list, repr=False)

    def percentiles(self) -> dict:
        out = {}
        stages = {"parse": self.parse_us, "decide": self.decide_us, "emit": self.emit_us}
        total = [a + b + c for a, b, c in zip(self.parse_us, self.decide_us, self.emit_us)]
        stages["total"] = total
        for name, xs in stages.items():
            if xs:
                p50, p99 = np.percentile(xs, [50, 99])
                out[name] = {"p50_us": float(p50), "p99_us": float(p99)}
            else:
                out[name] = {"p50_us": 0.0, "p99_us": 0.0}
        return out

    def to_dict(self) -> dict:
        return {
            "events": self.events,
            "commands": self.commands,
            "errors": self.errors,
            "latency": self.percentiles(),
        }


def run_stream(
    lines: Iterable[str],
    out: TextIO,
    cfg: EngineConfig,
    err: TextIO | None = None,
    summary: RunSummary | None = None,
) -> RunSummary:
    """Consume event lines in order and write one command batch per event.

    Pass ``summary`` to keep the counts when the stream is interrupted.
    """
    engine = DecisionEngine(cfg)
    summary = summary if summary is not None else RunSummary()
    clock = time.perf_counter_ns
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        t0 = clock()
        try:
            obs = parse_event(line, lineno)
            t1 = clock()
            cmds = engine.process(obs)
        except (ProtocolError, ValidationError) as exc:
            summary.errors += 1
            if err is not None:
                where = "" if isinstance(exc, ProtocolError) else f"line {lineno}: "
                print(f"error: {where}{exc}", file=err)
            continue
        t2 = clock()
        text = "".join(emit_command(c) + "\n" for c in cmds)
        t3 = clock()
        out.write(text)
        # count before flushing so an interrupt never loses a delivered batch
        summary.events += 1
        summary.commands += len(cmds)
        summary.parse_us.append((t1 - t0) / 1000)
        summary.decide_us.append((t2 - t1) / 1000)
        summary.emit_us.append((t3 - t2) / 1000)
        out.flush()  # a controller downstream must see each batch as soon as it exists
    return summary


def _config_path(arg: str | None) -> str | None:
    return arg or os.environ.get("ENGAGE_CONFIG")


def _load_cfg(arg: str | None) -> EngineConfig:
    path = _config_path(arg)
    return load_config(path) if path else validate_config(EngineConfig())


def _report_config_error(exc: ConfigError) -> None:
    for v in exc.violations:
        print(f"config: {v}", file=sys.stderr)


def _interrupt(signum, frame):
    raise KeyboardInterrupt


def cmd_run(args) -> int:
    try:
        cfg = _load_cfg(args.config)
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        _report_config_error(exc)
        return EXIT_INVALID

    out = sys.stdout
    summary = RunSummary()
    # SIGTERM ends the run like Ctrl-C: stop reading, still print the summary
    previous = signal.signal(signal.SIGTERM, _interrupt)
    try:
        if args.tcp is None:
            run_stream(sys.stdin, out, cfg, sys.stderr, summary)
        else:
            port = cfg.port if args.tcp == _CONFIG_PORT else args.tcp
            try:
                srv = socket.create_server(("127.0.0.1", port))
            except OSError as exc:
                print(f"cannot bind port {port}: {exc}", file=sys.stderr)
                return EXIT_IO
            with srv:
                print(f"listening on 127.0.0.1:{srv.getsockname()[1]}", file=sys.stderr, flush=True)
                conn, _ = srv.accept()
                with conn, conn.makefile("r", encoding="utf-8", newline="\n") as stream:
                    run_stream(stream, out, cfg, sys.stderr, summary)
    except KeyboardInterrupt:
        pass
    finally:
        signal.signal(signal.SIGTERM, previous)
    out.write(json.dumps({"summary": summary.to_dict()}, sort_keys=True) + "\n")
    out.flush()
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        cfg = _load_cfg(args.config)
        sc = load_scenario(args.scenario)
    except OSError as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        _report_config_error(exc)
        return EXIT_INVALID
    except ScenarioError as exc:
        for p in exc.problems:
            print(f"scenario: {p}", file=sys.stderr)
        return EXIT_INVALID
    if args.seed is not None:
        sc = replace(sc, seed=args.seed)
    report = run_scenario(sc, cfg)
    text = report.to_json()
    try:
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        if args.timeline:
            Path(args.timeline).write_text(report.timeline_csv(), encoding="utf-8")
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_check(args) -> int:
    path = _config_path(args.config)
    try:
        _load_cfg(args.config)
    except OSError as exc:
        print(f"cannot read config {path}: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        for v in exc.violations:
            print(v)
        return EXIT_INVALID
    print("ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="engage", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="process perception events from stdin or TCP")
    p.add_argument("--config", help="config file (falls back to $ENGAGE_CONFIG, then defaults)")
    p.add_argument(
        "--tcp", nargs="?", type=int, const=_CONFIG_PORT, metavar="PORT",
        help="listen on 127.0.0.1:PORT instead of reading stdin (PORT defaults to the config's port)",
    )
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("simulate", help="run a scripted scenario and write a report")
    p.add_argument("--scenario", required=True)
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="report path (stdout when omitted)")
    p.add_argument("--timeline", help="also write a per-frame CSV table here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check", help="validate a config file")
    p.add_argument("--config")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
