"""Run every theorem check with a config and write the report plus a short table.

    python scripts/run_all_theorems.py [--config configs/default.json] [--out reports] [--workers N]
"""

import argparse
import sys
import time
import warnings
from collections import defaultdict

from bphi_lab.harness import RunConfig, emit_report, run_verification


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default="configs/default.json")
    ap.add_argument("--out", default=None)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    cfg = RunConfig.load(args.config)
    if args.out:
        cfg.out_dir = args.out
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        records, extras = run_verification(cfg, workers=args.workers)
    path = emit_report(records, cfg.out_dir, cfg.format, extras=extras)

    worst = defaultdict(float)
    failed = defaultdict(int)
    for rec in records:
        key = (rec.theorem, rec.fn, rec.weight)
        worst[key] = max(worst[key], rec.ratio)
        failed[key] += not rec.passed
    print(f"{'theorem':18s} {'fn':12s} {'weight':14s} {'max ratio':>10s} {'fails':>5s}")
    for key in sorted(worst):
        print(f"{key[0]:18s} {key[1]:12s} {key[2]:14s} {worst[key]:10.4f} {failed[key]:5d}")
    if "M_emp" in extras:
        print("M_emp:", {k: round(v, 6) for k, v in extras["M_emp"].items()})
    n_fail = sum(failed.values())
    print(f"{len(records)} records, {n_fail} failed, {time.perf_counter() - t0:.0f}s -> {path}")
    return 1 if n_fail else 0


if __name__ == "__main__":
    sys.exit(main())
