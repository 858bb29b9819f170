"""Run every shipped config through the CLI and print one status line per run.

    python scripts/run_all.py [--out results] [--threads N]

Each run lands in OUT/<config name>/ (manifest.json, rows.csv, summary.json).
"""
import argparse
import json
import time
from pathlib import Path

from rwrs_lab import cli
from rwrs_lab.config import parse_config

ROOT = Path(__file__).resolve().parent.parent

RUNS = [
    ("scaling-alpha", "alpha_scaling"),
    ("scaling-occupancy", "occupancy_h075"),
    ("scaling-occupancy", "occupancy_h050"),
    ("slln", "slln_degenerate"),
    ("slln", "slln_rademacher_ma"),
    ("slln", "slln_fgn_ma"),
    ("theorem3", "heavy_tail_tau08"),
    ("theorem3", "heavy_tail_tau07_divergent"),
    ("varbound", "varbound_iid"),
    ("varbound", "varbound_ma"),
    ("subseq", "subseq_iid"),
    ("covbound", "covbound_iid_gaussian"),
    ("covbound", "covbound_iid_rademacher"),
    ("covbound", "covbound_iid_centered_exp"),
    ("covbound", "covbound_ma"),
    ("covbound", "covbound_ma_polynomial"),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()
    threads = cli._threads(args.threads)
    worst = 0
    for sub, name in RUNS:
        path = ROOT / "configs" / f"{name}.json"
        out = Path(args.out) / name
        t0 = time.perf_counter()
        status = cli.run(sub, parse_config(path), out, threads, str(path))
        summary = json.loads((out / "summary.json").read_text())
        worst = max(worst, status)
        print(f"{'PASS' if status == 0 else 'FAIL'}  {sub:18s} {name:28s} "
              f"{time.perf_counter() - t0:6.1f}s  failures={summary['failures']}")
    return worst


if __name__ == "__main__":
    raise SystemExit(main())
