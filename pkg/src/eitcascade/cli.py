"""Command-line driver: ``eitcascade simulate|cascade|scan|budget|validate``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io
from .config import ConfigSchemaError, ConfigSyntaxError, ExperimentConfig, load_config
from .errors import EITError
from .optimize import config_axes, optimize, scan
from .pipeline import Experiment, arm_seeds, cascade_metrics

COMMANDS = ("simulate", "cascade", "scan", "budget", "validate")


def _simulate(exp: Experiment, out: Path) -> list[Path]:
    res = exp.interface()
    summary = {
        "command": "simulate",
        "seed": exp.config.seed,
        "eta_leak": res.eta_leak,
        "eta_store": res.eta_store,
        "input_photons": res.field.input_energy,
        "output_photons": res.field.output_energy,
        "transmission": res.transmission,
        "rois": {"leak": list(res.leak_roi), "retrieval": list(res.retrieval_roi)},
    }
    return [io.write_interface_csv(out / "interface.csv", res, exp.control2),
            io.write_summary(out / "summary.json", "summary", summary)]


def _cascade(exp: Experiment, out: Path) -> list[Path]:
    res = exp.cascade()
    det = exp.config.detection
    metrics = cascade_metrics(exp, res, measured=True)
    files = [io.write_cascade_csv(out / "cascade.csv", res)]
    for i, (arm, seed) in enumerate(zip(exp.arms(res), arm_seeds(exp.config.seed)), start=1):
        sig, bkg = arm.histograms(det.bins, det.trials, seed)
        files.append(io.write_histogram_csv(out / f"histogram_spcm{i}.csv", sig, bkg))
    summary = {"command": "cascade", "seed": exp.config.seed, **res.summary(), **metrics,
               "detection": {"bins": det.bins, "trials": det.trials}}
    files.append(io.write_summary(out / "summary.json", "summary", summary))
    return files


def _scan(cfg: ExperimentConfig, out: Path, workers: int) -> list[Path]:
    axes = config_axes(cfg)
    sc = cfg.scan
    result = scan(cfg, axes, sc.metrics, workers)
    summary = {"command": "scan", "seed": cfg.seed,
               "axes": [{"path": p, "values": list(v)} for p, v in result.axes],
               "argmax": result.summary(),
               "holes": [{"index": list(i), "error": e} for i, e in result.holes]}
    if sc.objective is not None:
        # the scan grid drives the optimizer; reuse the metric when it was scanned
        if sc.objective in result.metrics:
            params, value = result.best(sc.objective)
        else:
            params, value, _ = optimize(cfg, axes, sc.objective, workers)
        summary["optimum"] = {"objective": sc.objective, "params": params, "value": value}
    return [io.write_scan_csv(out / "scan.csv", result, sc.power_label_uw_per_rabi2),
            io.write_summary(out / "scan.json", "scan", summary)]


def _budget(exp: Experiment, out: Path) -> list[Path]:
    summary = {"command": "budget", **exp.budget()}
    return [io.write_summary(out / "budget.json", "budget", summary)]


def run_command(command: str, config: str | Path | ExperimentConfig, output_dir,
                seed: int | None = None, workers: int = 1) -> int:
    """Run one command and write its artifacts to ``output_dir``.

    Returns 0 on success.  Errors print a diagnostic to stderr and return 2
    for configuration problems, 1 otherwise.
    """
    if command not in COMMANDS:
        print(f"error: unknown command {command!r}", file=sys.stderr)
        return 2
    try:
        cfg = config if isinstance(config, ExperimentConfig) else load_config(config)
        if seed is not None:
            cfg = cfg.with_value("seed", int(seed))
    except (ConfigSyntaxError, ConfigSchemaError) as err:
        print(f"error: {config}: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: cannot read config: {err}", file=sys.stderr)
        return 2

    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if command == "validate":
            files = [io.write_summary(out / "validation.json", "validation",
                                      {"command": "validate", "valid": True, "violations": []})]
        elif command == "scan":
            files = _scan(cfg, out, workers)
        else:
            exp = Experiment(cfg)
            files = {"simulate": _simulate, "cascade": _cascade, "budget": _budget}[command](exp, out)
    except OSError as err:
        print(f"error: cannot write output: {err}", file=sys.stderr)
        return 1
    except (EITError, ValueError, ZeroDivisionError) as err:
        print(f"error: {command} failed: {type(err).__name__}: {err}", file=sys.stderr)
        return 1
    for f in files:
        print(f)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="eitcascade",
                                     description="Cascaded EIT quantum-memory simulator.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON experiment config")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--workers", type=int, default=1, help="processes for scan points")
    args = parser.parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        parser.error("--seed must be an unsigned 64-bit integer")
    return run_command(args.command, args.config, args.out, args.seed, args.workers)


if __name__ == "__main__":
    sys.exit(main())
