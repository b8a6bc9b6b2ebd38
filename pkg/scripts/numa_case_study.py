#!/usr/bin/env python3
"""Compare remote-embedding strategies across link speeds and batch sizes.

Emits one CSV with all five strategies (bounce copy, NUMA over PCIe and
NVLink, demand paging at both page sizes) for each batch size, then prints
the reduction-vs-baseline report.
"""

import argparse
import pathlib

from npusim import config as cfgmod
from npusim import harness


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/numa_case_study.csv")
    ap.add_argument("--config", help="base YAML config")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--batches", default="64,256,1024",
                    help="comma-separated batch sizes")
    args = ap.parse_args()

    cfg = cfgmod.apply_env_overrides(cfgmod.load_config(args.config))
    cfg["workload"]["kind"] = "embedding"
    cfg["workload"]["strategy"] = "all"
    cfg["workload"]["num_npus"] = 8
    cfg["workload"]["tables"] = 8
    cfg["mmu"].update(num_ptws=128, prmb_slots=32, translation_cache="tpr")

    batches = [int(b) for b in args.batches.split(",")]
    rows = harness.sweep(cfg, [("workload.batch_samples", batches)],
                         seed=args.seed)
    path = pathlib.Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        harness.write_csv(rows, fh)
    print(f"wrote {path} ({len(rows)} rows)")
    print(harness.report([str(path)]))


if __name__ == "__main__":
    main()
