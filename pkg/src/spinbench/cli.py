"""Command line entry point: ``bench run`` and ``bench compile``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .arch import Variant, build_cg, load_custom_cg
from .compiler import PlacementError, RoutingError, compile_circuit
from .experiment import ConfigError, ExperimentConfig, run_experiment
from .ir import DEFAULT_PROFILE, parse_circuit

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bench", description="Spin-qubit architecture benchmarks")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte Carlo experiment from a JSON config")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--out", type=Path, default=None, help="output directory (overrides the config)")
    run.add_argument("--threads", type=int, default=1)
    run.add_argument("--dump-events", action="store_true", help="write every injected error to events.csv")

    comp = sub.add_parser("compile", help="place and route one circuit")
    comp.add_argument("--cg", required=True, choices=["1", "2", "3", "custom"])
    comp.add_argument("--cols", type=int, default=4)
    comp.add_argument("--trials", type=int, default=10, help="SABRE placement trials")
    comp.add_argument("--seed", type=int, default=0)
    comp.add_argument("--circuit", required=True, type=Path)
    comp.add_argument("--edges", type=Path, default=None, help="JSON edge list for --cg custom")
    return p


def _run(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    out = args.out or Path(cfg.out_dir)
    rows = run_experiment(cfg, out, threads=args.threads, dump_events=args.dump_events)
    print(f"wrote {len(rows)} rows to {out / 'results.csv'}")
    return EXIT_OK


def _compile(args) -> int:
    if args.cg == "custom":
        if args.edges is None:
            raise ConfigError("--cg custom needs --edges FILE")
        cg = load_custom_cg(args.edges)
    else:
        cg = build_cg(Variant.parse(args.cg), args.cols)
    try:
        text = args.circuit.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read circuit: {exc}") from None
    circuit = parse_circuit(text)
    if args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    cc = compile_circuit(circuit, cg, trials=args.trials, seed=args.seed)
    sys.stdout.write(cc.to_text())
    print(json.dumps({"shuttles": cc.shuttle_count, "duration_ns": cc.duration(DEFAULT_PROFILE)}))
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return _run(args) if args.command == "run" else _compile(args)
    except (ConfigError, PlacementError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RoutingError as exc:
        print(f"routing failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
