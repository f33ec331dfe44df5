import argparse
import logging
import os
import sys
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from . import config, results, simulation
from .channel import UserLocation, beam_gain_pattern, synthesize_channel
from .codebooks import CodebookFormatError, PolarCodebook, build_far_codebook, build_polar_codebook
from .logging import print_progress, set_logging_config, set_up_logging
from .training_schemes import SCHEMES, create_scheme, dominant_region_summary, oracle_best_codeword

APP_NAME = "xl-beam-training"

DEFAULT_BEAMGAIN_POINTS = "-0.8:1,-0.4:1,0.4:1,0.8:1,-0.8:100,-0.4:100,0.4:100,0.8:100"


def _float_list(text: str) -> List[float]:
    """Comma separated numbers; a token start:stop:step expands to an inclusive range."""

    values: List[float] = []
    try:
        for token in text.split(","):
            token = token.strip()
            if token.count(":") == 2:
                start, stop, step = (float(part) for part in token.split(":"))
                if step <= 0:
                    raise ValueError("step must be positive")
                values.extend(float(v) for v in np.arange(start, stop + step / 2, step))
            elif token:
                values.append(float(token))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid number list '{text}': {e}")

    if not values:
        raise argparse.ArgumentTypeError("empty number list")
    return values

def _point_list(text: str) -> List[Tuple[float, float]]:
    """Comma separated theta:r pairs."""

    points = []
    for token in text.split(","):
        try:
            theta, r = (float(part) for part in token.split(":"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected theta:r pairs, got '{token}'")
        points.append((theta, r))
    return points

def _name_list(text: str) -> List[str]:
    return [name.strip() for name in text.split(",") if name.strip()]

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Flat TOML config file (defaults are used for omitted keys)")
    common.add_argument("--seed", type=int, help="Master RNG seed")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per sweep point")
    common.add_argument("--schemes", type=_name_list, help="Comma separated scheme names")

    parser = argparse.ArgumentParser(prog=APP_NAME, description="Near-field beam training simulator for XL-arrays")
    commands = parser.add_subparsers(dest="command", required=True)

    codebook = commands.add_parser("codebook", parents=[common], help="Build and export a codebook")
    codebook.add_argument("--kind", choices=("polar", "far"), default="polar")

    snr = commands.add_parser("sweep-snr", parents=[common], help="Success rate and rate versus reference SNR")
    snr.add_argument("--snr-points", type=_float_list, help="SNR points in dB, e.g. -10:20:5")
    snr.add_argument("--snr-distance", type=float, help="User distance in meters")

    distance = commands.add_parser("sweep-distance", parents=[common], help="Success rate and rate versus distance")
    distance.add_argument("--distances", type=_float_list, help="Distances in meters, e.g. 3:103:10")

    single = commands.add_parser("single", parents=[common], help="One user location, all schemes, pilot trace")
    single.add_argument("--theta", type=float, help="Spatial angle in [-1, 1]")
    single.add_argument("--r", type=float, help="User distance in meters")

    commands.add_parser("run", parents=[common], help="Run what the config's sweep key selects")

    beamgain = commands.add_parser("beamgain", parents=[common], help="Far-field beam gain against near-field users")
    beamgain.add_argument("--points", type=_point_list, default=_point_list(DEFAULT_BEAMGAIN_POINTS),
                          help="Comma separated theta:r pairs")
    beamgain.add_argument("--resolution", type=int, default=2048, help="Number of swept far-field angles")

    return parser

def _codebooks(conf: config.ExperimentConfig):
    cfg = conf.system_config()
    far_codebook = build_far_codebook(cfg)

    if conf["codebook_import"]:
        polar_codebook = PolarCodebook.from_csv(conf["codebook_import"], cfg)
        logging.info(f"Using imported codebook {conf['codebook_import']} ({len(polar_codebook)} codewords)")
    else:
        polar_codebook = build_polar_codebook(cfg)

    if conf["codebook_export"]:
        polar_codebook.to_csv(conf["codebook_export"], _header(conf, "codebook"))

    return far_codebook, polar_codebook

def _header(conf: config.ExperimentConfig, command: str) -> str:
    return results.artifact_header({"config_hash": conf.config_hash(), "seed": conf["seed"], "command": command})

def cmd_codebook(conf: config.ExperimentConfig, args: argparse.Namespace) -> int:
    cfg = conf.system_config()
    os.makedirs(conf["output_dir"], exist_ok=True)
    path = os.path.join(conf["output_dir"], f"codebook_{args.kind}.csv")

    header = _header(conf, "codebook")
    if args.kind == "far":
        build_far_codebook(cfg).to_csv(path, header)
    else:
        build_polar_codebook(cfg).to_csv(path, header)
    return 0

def _run_sweep(conf: config.ExperimentConfig, kind: str) -> int:
    far_codebook, polar_codebook = _codebooks(conf)
    simulator = simulation.Simulator(
        conf.system_config(),
        conf["schemes"],
        far_codebook,
        polar_codebook,
        progress=print_progress
    )

    if kind == "snr":
        report = simulator.run_snr_sweep(conf["snr_points_db"], conf["trials"], conf["seed"], conf["snr_distance_m"])
    else:
        report = simulator.run_distance_sweep(conf["distances_m"], conf["trials"], conf["seed"])
    report.metadata["config_hash"] = conf.config_hash()

    results.emit_results(report, results.ResultTable.from_report(report), conf["output_dir"])
    return 0

def cmd_sweep_snr(conf: config.ExperimentConfig, args: argparse.Namespace) -> int:
    return _run_sweep(conf, "snr")

def cmd_sweep_distance(conf: config.ExperimentConfig, args: argparse.Namespace) -> int:
    return _run_sweep(conf, "distance")

def cmd_single(conf: config.ExperimentConfig, args: argparse.Namespace) -> int:
    cfg = conf.system_config()
    far_codebook, polar_codebook = _codebooks(conf)
    loc = UserLocation(conf["single_theta"], conf["single_distance_m"])
    channel = synthesize_channel(loc, cfg)
    oracle = oracle_best_codeword(channel, polar_codebook)

    logging.info(f"User at theta={loc.theta}, r={loc.distance} m, reference SNR {simulation.linear_to_db(simulation.reference_snr(cfg, loc.distance)):.2f} dB")
    logging.info(f"Best codeword {tuple(oracle)} at {polar_codebook.location(oracle)}")

    # Explicit --schemes wins, otherwise every registered scheme
    names = conf["schemes"] if args.schemes else list(SCHEMES)
    rows = []
    trace_rows = []
    for name in names:
        scheme = create_scheme(name, cfg, far_codebook, polar_codebook)
        outcome = scheme.train(channel, simulation.trial_rng(conf["seed"], 0, 0, simulation.scheme_role(name)))
        rate = simulation.achievable_rate(loc, outcome.beamformer, cfg)

        if outcome.dominant is not None:
            logging.info(f"{name}: dominant region {outcome.dominant.indices}")
        if outcome.candidates is not None:
            logging.info(f"{name}: candidate angles {outcome.candidates.indices}")
        logging.info(f"{name}: selected {outcome.selected}, {outcome.pilots_used} pilots, {rate:.4f} bits/s/Hz")

        theta, distance = polar_codebook.location(outcome.selected) if outcome.selected else (float("nan"), float("nan"))
        rows.append({
            "scheme": name,
            "angle_index": outcome.selected.angle_index if outcome.selected else 0,
            "distance_index": outcome.selected.distance_index if outcome.selected else 0,
            "theta": theta,
            "distance_m": distance,
            "pilots": outcome.pilots_used,
            "rate_bps_hz": rate,
            "success": outcome.selected == oracle,
        })
        for sweep in outcome.trace:
            for step, (cid, power) in enumerate(zip(sweep.ids, sweep.powers)):
                logging.debug(f"{name} {sweep.phase} #{step}: {tuple(cid)} power {power:.6g} W")
                trace_rows.append({
                    "scheme": name,
                    "phase": sweep.phase,
                    "step": step,
                    "angle_index": cid.angle_index,
                    "distance_index": cid.distance_index,
                    "power": power,
                })

    outdir = conf["output_dir"]
    os.makedirs(outdir, exist_ok=True)
    header = _header(conf, "single")
    results.write_csv(os.path.join(outdir, "single.csv"), pd.DataFrame(rows), header)
    results.write_csv(os.path.join(outdir, "pilots.csv"), pd.DataFrame(trace_rows), header)
    logging.info(f"Wrote results to {outdir}")
    return 0

def cmd_beamgain(conf: config.ExperimentConfig, args: argparse.Namespace) -> int:
    cfg = conf.system_config()
    if args.resolution < 2:
        raise ValueError("--resolution must be at least 2")
    omegas = np.linspace(-1.0, 1.0, args.resolution)

    curves: Dict[str, np.ndarray] = {}
    for theta, r in args.points:
        loc = UserLocation(theta, r)
        label = f"theta{theta:g}_r{r:g}m"
        curves[label] = beam_gain_pattern(loc, omegas, cfg)

        summary = dominant_region_summary(loc, cfg)
        logging.info(
            f"{label}: dominant region spans {summary.width} grid steps "
            f"({len(summary.region)} codewords), floor(Med) = {summary.median_index}, "
            f"true index {summary.true_index}, deviation {summary.deviation}"
        )

    results.emit_beamgain(conf["output_dir"], omegas, curves, _header(conf, "beamgain"))
    logging.info(f"Wrote results to {conf['output_dir']}")
    return 0

def cmd_run(conf: config.ExperimentConfig, args: argparse.Namespace) -> int:
    if conf["sweep"] == "single":
        return cmd_single(conf, args)
    return _run_sweep(conf, conf["sweep"])

COMMANDS: Dict[str, Callable[[config.ExperimentConfig, argparse.Namespace], int]] = {
    "codebook": cmd_codebook,
    "sweep-snr": cmd_sweep_snr,
    "sweep-distance": cmd_sweep_distance,
    "single": cmd_single,
    "beamgain": cmd_beamgain,
    "run": cmd_run,
}

def _apply_flags(conf: config.ExperimentConfig, args: argparse.Namespace) -> config.ExperimentConfig:
    return conf.override(
        seed=args.seed,
        trials=args.trials,
        output_dir=args.out,
        schemes=args.schemes,
        snr_points_db=getattr(args, "snr_points", None),
        snr_distance_m=getattr(args, "snr_distance", None),
        distances_m=getattr(args, "distances", None),
        single_theta=getattr(args, "theta", None),
        single_distance_m=getattr(args, "r", None),
    )

def run_cli(argv: Optional[List[str]] = None) -> int:
    """Parse argv, run one subcommand and return the process exit code."""

    set_up_logging(APP_NAME)

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e: # usage errors (2) and --help (0)
        return e.code if isinstance(e.code, int) else 2

    try:
        conf = _apply_flags(config.load_config(args.config), args)
        set_logging_config(conf.logging_options())
        return COMMANDS[args.command](conf, args)
    except (config.ConfigError, CodebookFormatError, OSError, ValueError) as e:
        logging.error(str(e))
        return 1
    except KeyboardInterrupt:
        logging.info("Caught KeyboardInterrupt, shutting down")
        return 130

def main():
    sys.exit(run_cli(sys.argv[1:]))

if __name__ == "__main__":
    main()
