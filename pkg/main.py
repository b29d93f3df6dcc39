#!/usr/bin/env python3
"""
Command-line entry point for the Vlasov-Poisson particle simulator

    python main.py run --preset desk --output-dir out/desk
    python main.py converge --config steady.cfg --levels 3
    python main.py fit --input out/desk/diagnostics.csv --window 2,8
"""
import argparse
import json
import sys
import time
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import structlog

from config.settings import PRESETS, Config, SimConfig, configure_logging, load_config
from utils.diagnostics import fit_decay, fit_power_law
from utils.errors import ConfigError, OutputError, ScenarioError, SimulationError
from utils.harness import (
    emit_convergence, emit_outputs, read_diagnostics, read_snapshots, run_convergence_study, run_simulation,
)

logger = structlog.get_logger()


def _parse_window(text: str) -> Tuple[float, float]:
    try:
        lo, hi = (float(part) for part in text.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must be 'a,b', got {text!r}") from None
    if not lo < hi:
        raise argparse.ArgumentTypeError(f"window start must precede its end, got {text!r}")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Particle method for 1D Vlasov-Poisson with a neutralizing background")
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('run', help="run one simulation and write diagnostics")
    source = run.add_mutually_exclusive_group()
    source.add_argument('--config', help="flat 'key = value' config file")
    source.add_argument('--preset', choices=sorted(PRESETS), help="named configuration")
    run.add_argument('--output-dir', help="overrides the config's output_dir")

    converge = commands.add_parser('converge', help="steady-state error at successively halved meshes")
    converge.add_argument('--config', help="base mesh config (the steady preset if omitted)")
    converge.add_argument('--levels', type=int, default=3)
    converge.add_argument('--output-dir')

    fit = commands.add_parser('fit', help="fit C*t^p to the field envelope of a finished run")
    fit.add_argument('--input', required=True, help="diagnostics.csv of a finished run")
    fit.add_argument('--window', required=True, type=_parse_window, help="time window 'a,b'")
    fit.add_argument('--half-width', type=float, help="refit sup |E| over |x| <= I from the field snapshots")
    fit.add_argument('--min-separation', type=float, default=0.0,
                     help="only fit envelope peaks at least this far apart in time")
    return parser


def _load(args) -> SimConfig:
    if getattr(args, 'config', None):
        return load_config(args.config)
    return PRESETS[getattr(args, 'preset', None) or 'desk']


def cmd_run(args, settings: Config) -> int:
    cfg = _load(args)
    directory = cfg.resolve_output_dir(args.output_dir)
    series, manifest = run_simulation(cfg, settings=settings)
    emit_outputs(series, manifest, directory)
    logger.info("Run complete", steps=manifest.total_steps, exhaustion_step=manifest.exhaustion_step,
                energy_drift=manifest.energy_drift, directory=str(directory),
                seconds=round(manifest.wall_clock_seconds, 3))
    return 0


def cmd_converge(args, settings: Config) -> int:
    cfg = load_config(args.config) if args.config else PRESETS['steady']
    directory = cfg.resolve_output_dir(args.output_dir)
    start_time = time.time()
    table = run_convergence_study(cfg, args.levels, settings=settings)
    emit_convergence(table, cfg, directory, wall_clock_seconds=time.time() - start_time)
    json.dump({str(t): rate for t, rate in table.rates.items()}, sys.stdout, indent=2)
    sys.stdout.write('\n')
    return 0


def _window_series(input_path: Path, half_width: float) -> Tuple[np.ndarray, np.ndarray]:
    series = read_diagnostics(input_path)
    times = dict(zip(series.step, series.time))
    snapshots = read_snapshots(input_path.parent)
    if not snapshots:
        raise OutputError(f"no field snapshots next to {input_path}")
    t, sup = [], []
    for snap in snapshots:
        if snap.step not in times:
            continue
        mask = np.abs(snap.x) <= half_width * (1 + 1e-12)
        t.append(times[snap.step])
        sup.append(float(np.max(np.abs(snap.field[mask]))) if np.any(mask) else 0.0)
    return np.asarray(t), np.asarray(sup)


def cmd_fit(args, settings: Config) -> int:
    input_path = Path(args.input)
    if args.half_width is not None:
        times, values = _window_series(input_path, args.half_width)
        fit = fit_power_law(times, values, args.window, args.min_separation)
    else:
        fit = fit_decay(read_diagnostics(input_path), args.window, min_separation=args.min_separation)
    json.dump(fit.as_dict(), sys.stdout, indent=2)
    sys.stdout.write('\n')
    return 0


def _fail(command: str, error: Exception, code: int) -> int:
    logger.error(f"{command} failed: {error}", exit_code=code)
    print(f"error: {error}", file=sys.stderr)
    return code


COMMANDS = {'run': cmd_run, 'converge': cmd_converge, 'fit': cmd_fit}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = Config()
    configure_logging(settings.log_level, settings.log_format)
    try:
        return COMMANDS[args.command](args, settings)
    except (ConfigError, ScenarioError) as e:
        return _fail(args.command, e, 2)
    except (OutputError, OSError) as e:
        return _fail(args.command, e, 3)
    except SimulationError as e:
        return _fail(args.command, e, 1)


if __name__ == '__main__':
    sys.exit(main())
