#!/usr/bin/env python3
"""Sweep the translation-path sizing knobs on the burst workload.

Covers walker count, merge-buffer depth, TLB reach, and the three
translation-cache design points, writing one CSV per axis.
"""

import argparse
import pathlib

from npusim import config as cfgmod
from npusim import harness


AXES = {
    "walkers": [("mmu.num_ptws", [8, 16, 32, 64, 128, 256])],
    "merge": [("mmu.prmb_slots", [0, 1, 2, 4, 8, 16, 32])],
    "tlb": [("mmu.tlb_entries", [128, 256, 512, 1024, 2048])],
    "cache": [("mmu.translation_cache", ["none", "tpr", "tpc", "uptc"]),
              ("mmu.cache_entries", [1, 8, 64])],
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results", help="CSV output directory")
    ap.add_argument("--config", help="base YAML config")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    cfg = cfgmod.apply_env_overrides(cfgmod.load_config(args.config))
    cfg["workload"]["suite"] = "burst"
    cfg["npu"]["spm_weight_bytes"] = 1024 * 1024  # keep tiles translation-bound
    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    for name, items in AXES.items():
        rows = harness.sweep(cfg, items, seed=args.seed, jobs=args.jobs)
        path = outdir / f"sensitivity_{name}.csv"
        with open(path, "w", newline="") as fh:
            harness.write_csv(rows, fh)
        print(f"wrote {path} ({len(rows)} rows)")
    print(harness.report([str(outdir / f"sensitivity_{n}.csv") for n in AXES]))


if __name__ == "__main__":
    main()
