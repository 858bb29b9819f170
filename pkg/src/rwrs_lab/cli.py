"""Batch front end: ``rwrs-lab SUBCOMMAND --config FILE --out DIR``.

Writes manifest.json (before any rows), rows.csv and summary.json.  The exit
status is 0 iff every acceptance rule of the run passed, 1 if any failed and
2 for configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime as _dt
import hashlib
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, parse_config, serialize
from .dependence import covariance_bound_check
from .experiments import (ROW_FIELDS, ExperimentConfig, ExperimentReport, run_slln, run_theorem3,
                          scaling_alpha, scaling_occupancy, subsequence_diagnostic,
                          variance_bound_check)

SUBCOMMANDS = ("slln", "theorem3", "scaling-alpha", "scaling-occupancy", "subseq", "varbound",
               "covbound")
THREADS_ENV = "RWRS_LAB_THREADS"


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def config_hash(config: ExperimentConfig) -> str:
    blob = json.dumps(serialize(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _clean(x):
    """JSON-safe copy: NaN/inf become null, dict keys become strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if hasattr(x, "item"):
        return _clean(x.item())
    return x


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rows(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ROW_FIELDS)
        for r in rows:
            w.writerow([_fmt(v) for v in r.csv_values()])


def _covbound(config: ExperimentConfig) -> ExperimentReport:
    if not math.isfinite(config.scenery.sup_variance):
        raise ConfigError("scenery", "covbound needs a finite-variance scenery")
    rep = ExperimentReport(config)
    slack = config.rules.get("se_slack", 3.0)
    for tr in (None, "plus", "minus"):
        rows = covariance_bound_check(config.scenery, config.lags, config.samples, config.base_seed,
                                      transform=tr, slack=slack)
        for r in rows:
            rep.table.append({"transform": tr or "identity", **dataclasses.asdict(r)})
        rep.checks[f"covariance_bound_{tr or 'identity'}"] = all(r.ok for r in rows)
    return rep


def dispatch(subcommand: str, config: ExperimentConfig, threads: int = 1) -> ExperimentReport:
    if subcommand == "slln":
        return run_slln(config, threads)
    if subcommand == "theorem3":
        return run_theorem3(config, threads)
    if subcommand == "scaling-alpha":
        return scaling_alpha(config, threads)
    if subcommand == "scaling-occupancy":
        return scaling_occupancy(config, threads)
    if subcommand == "subseq":
        return subsequence_diagnostic(config, threads=threads)
    if subcommand == "varbound":
        return variance_bound_check(config, threads)
    if subcommand == "covbound":
        return _covbound(config)
    raise ValueError(f"unknown subcommand {subcommand!r}")


def run(subcommand: str, config: ExperimentConfig, output_dir, threads: int = 1,
        config_path: str | None = None) -> int:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "tool_version": __version__,
        "subcommand": subcommand,
        "config_path": None if config_path is None else str(config_path),
        "config": serialize(config),
        "config_sha256": config_hash(config),
        "base_seed": config.base_seed,
        "output_dir": str(out),
        "threads": threads,
        "started": _now(),
        "finished": None,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    rep = dispatch(subcommand, config, threads)
    write_rows(out / "rows.csv", rep.rows)
    failures = sorted(k for k, ok in rep.checks.items() if not ok)
    summary = {
        "subcommand": subcommand,
        "config_sha256": manifest["config_sha256"],
        "slopes": rep.slopes,
        "per_n": rep.per_n,
        "bc_sums": rep.bc_sums,
        "table": rep.table,
        "checks": rep.checks,
        "notes": rep.notes,
        "passed": not failures,
        "failures": failures,
    }
    (out / "summary.json").write_text(json.dumps(_clean(summary), indent=2) + "\n")
    manifest["finished"] = _now()
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    if failures:
        print(json.dumps({"failures": failures}), file=sys.stderr)
        return 1
    return 0


def _threads(arg: int | None) -> int:
    if arg is not None:
        return max(1, arg)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rwrs-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="JSON config (or a previous manifest.json)")
        s.add_argument("--out", required=True, help="output directory")
        s.add_argument("--threads", type=int, default=None,
                       help=f"replica worker threads (default ${THREADS_ENV} or all cores)")
        s.add_argument("--seed", type=int, default=None, help="override the config seed")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = parse_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed", "must be a non-negative integer")
            config = dataclasses.replace(config, base_seed=args.seed)
        return run(args.subcommand, config, args.out, _threads(args.threads), args.config)
    except ConfigError as e:
        print(json.dumps({"error": "config", "key": e.key, "message": e.message}), file=sys.stderr)
        return 2
    except ValueError as e:
        print(json.dumps({"error": "run", "message": str(e)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
