"""Experiment runner: single runs, parameter sweeps, CSV emission, reports.

Every run produces one CSV row per layer (dense workloads) or per strategy
(embedding workloads) against a versioned, order-stable column set. Oracle
cycles are always computed alongside modeled dense runs so rows carry their
own normalization baseline.
"""

from __future__ import annotations

import copy
import csv
import io
import itertools
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from . import config as cfgmod
from .address_space import check_disjoint
from .energy import account
from .memory import Dram
from .mmu import MmuConfig, TranslationEngine
from .npu import run_layer
from .numa import (
    LatencyBreakdown,
    run_baseline_copy,
    run_demand_paging,
    run_numa,
)
from .address_space import PageSize
from .page_table import build
from .workloads import (
    EmbeddingModel,
    EmbeddingTableSpec,
    Placement,
    dense_suite,
    gather_trace,
)

CSV_SCHEMA_VERSION = 1

CSV_COLUMNS = [
    "csv_schema", "config_id", "seed", "workload", "mode", "strategy",
    "total_cycles", "oracle_cycles", "mmu_overhead_pct", "tlb_hit_rate",
    "walks_started", "walk_mem_txns", "pts_merges", "blocked_cycles",
    "tpr_hit_l4", "tpr_hit_l3", "tpr_hit_l2", "energy_pj_total",
    "local_cycles", "remote_leg1", "staging", "remote_leg2",
    "translation_cycles", "numa_transfer_cycles", "fault_handling_cycles",
    "migration_cycles", "migration_bytes", "payload_bytes", "faults",
]


def _blank_row(cfg: Dict[str, Any], seed: int) -> Dict[str, Any]:
    row = {c: "" for c in CSV_COLUMNS}
    row["csv_schema"] = CSV_SCHEMA_VERSION
    row["config_id"] = cfg["config_id"]
    row["seed"] = seed
    return row


def _layer_segments(layer, mirror_writes: bool):
    segs = [layer.ia_segment, layer.w_segment]
    if mirror_writes and layer.out_segment is not None:
        segs.append(layer.out_segment)
    check_disjoint(segs)
    return segs


def _run_dense(cfg: Dict[str, Any], seed: int) -> List[Dict[str, Any]]:
    wl = cfg["workload"]
    npu = cfgmod.npu_config(cfg)
    mmu = cfgmod.mmu_config(cfg)
    ps = cfgmod.page_size_of(cfg)
    etable = cfgmod.energy_table(cfg)
    layers = dense_suite(wl["suite"], cfg["npu"]["element_bytes"])[wl["batch"]]

    rows = []
    for layer in layers:
        pt = build(_layer_segments(layer, npu.mirror_write_traffic), ps)
        oracle_engine = TranslationEngine(MmuConfig(mode="oracle"), pt, ps)
        oracle = run_layer(layer, npu, oracle_engine, Dram(cfgmod.dram_config(cfg)))
        dram = Dram(cfgmod.dram_config(cfg))
        engine = TranslationEngine(mmu, pt, ps, dram=dram)
        stats = run_layer(layer, npu, engine, dram)

        energy = account(stats.mmu_stats, etable)
        overhead = 0.0
        if oracle.total_cycles:
            overhead = 100.0 * (stats.total_cycles - oracle.total_cycles) \
                / oracle.total_cycles
        row = _blank_row(cfg, seed)
        row.update({
            "workload": f"{wl['suite']}/{wl['batch']}/{layer.name}",
            "mode": mmu.mode,
            "total_cycles": stats.total_cycles,
            "oracle_cycles": oracle.total_cycles,
            "mmu_overhead_pct": overhead,
            "tlb_hit_rate": stats.mmu_stats.tlb_hit_rate,
            "walks_started": stats.mmu_stats.walks_started,
            "walk_mem_txns": stats.mmu_stats.walk_memory_transactions,
            "pts_merges": stats.mmu_stats.scoreboard_merges,
            "blocked_cycles": stats.mmu_stats.blocked_cycles,
            "tpr_hit_l4": stats.mmu_stats.cache_hit_l4,
            "tpr_hit_l3": stats.mmu_stats.cache_hit_l3,
            "tpr_hit_l2": stats.mmu_stats.cache_hit_l2,
            "energy_pj_total": energy.total_pj,
        })
        rows.append(row)
    return rows


def _embedding_model(cfg: Dict[str, Any], seed: int) -> Tuple[EmbeddingModel, Placement]:
    wl = cfg["workload"]
    tables = tuple(EmbeddingTableSpec(wl["rows"], wl["embedding_bytes"])
                   for _ in range(wl["tables"]))
    model = EmbeddingModel(
        tables=tables,
        batch=wl["batch_samples"],
        lookups_per_sample=wl["lookups_per_sample"],
        index_distribution=wl["distribution"],
        zipf_s=wl["zipf_s"],
        seed=cfgmod.seed_for(seed, "gather"),
    )
    return model, Placement.round_robin(wl["tables"], wl["num_npus"])


def _run_embedding(cfg: Dict[str, Any], seed: int) -> List[Dict[str, Any]]:
    wl = cfg["workload"]
    model, placement = _embedding_model(cfg, seed)
    trace = gather_trace(model, placement)[0]
    dram = cfgmod.dram_config(cfg)
    pcie = cfgmod.link_config(cfg, "pcie")
    nvlink = cfgmod.link_config(cfg, "nvlink")
    mmu = cfgmod.mmu_config(cfg)
    if mmu.mode == "oracle":
        mmu = MmuConfig(mode="oracle")

    wanted = wl["strategy"]
    strategies = (["baseline_copy", "numa_slow", "numa_fast",
                   "demand_4k", "demand_2m"] if wanted == "all" else [wanted])
    breakdowns: List[LatencyBreakdown] = []
    for strat in strategies:
        if strat == "baseline_copy":
            breakdowns.append(run_baseline_copy(trace, model, cpu_link=pcie, dram=dram))
        elif strat in ("numa_slow", "numa_fast"):
            kind = strat.split("_")[1]
            link = nvlink if kind == "fast" else pcie
            bd = run_numa(trace, model, link_kind=kind, mmu=mmu, dram=dram)
            breakdowns.append(bd)
        else:
            ps = PageSize.SMALL_4K if strat == "demand_4k" else PageSize.LARGE_2M
            bd, _ = run_demand_paging(trace, model, ps, link=nvlink,
                                      dram=dram, mmu=mmu)
            breakdowns.append(bd)

    rows = []
    wl_name = (f"embedding/{wl['tables']}x{wl['rows']}"
               f"/{wl['distribution']}/b{wl['batch_samples']}")
    for bd in breakdowns:
        row = _blank_row(cfg, seed)
        row.update({
            "workload": wl_name,
            "mode": mmu.mode,
            "strategy": bd.strategy,
            "total_cycles": bd.total_cycles,
            "local_cycles": bd.local_cycles,
            "remote_leg1": bd.remote_leg1,
            "staging": bd.staging,
            "remote_leg2": bd.remote_leg2,
            "translation_cycles": bd.translation_cycles,
            "numa_transfer_cycles": bd.numa_transfer_cycles,
            "fault_handling_cycles": bd.fault_handling_cycles,
            "migration_cycles": bd.migration_cycles,
            "migration_bytes": bd.migration_bytes,
            "payload_bytes": bd.payload_bytes,
            "faults": bd.faults,
        })
        rows.append(row)
    return rows


def run_single(cfg: Dict[str, Any], seed: Optional[int] = None) -> List[Dict[str, Any]]:
    errors = cfgmod.validate(cfg)
    if errors:
        raise cfgmod.ConfigError(errors)
    if seed is None:
        seed = cfg["seeds"]["master"]
    if cfg["workload"]["kind"] == "dense":
        return _run_dense(cfg, seed)
    return _run_embedding(cfg, seed)


def _sweep_one(args) -> List[Dict[str, Any]]:
    cfg, seed = args
    return run_single(cfg, seed)


def sweep(
    cfg: Dict[str, Any],
    items: Sequence[Tuple[str, Sequence[Any]]],
    seed: Optional[int] = None,
    jobs: int = 1,
) -> List[Dict[str, Any]]:
    """Cross-product sweep; rows are independent and declaration-ordered."""
    for key, _ in items:
        cfgmod.resolve_key(cfg, key)  # fail fast on unknown keys
    combos = list(itertools.product(*[vals for _, vals in items]))
    tasks = []
    for combo in combos:
        sub = copy.deepcopy(cfg)
        suffix = []
        for (key, _), value in zip(items, combo):
            cfgmod.set_by_path(sub, key, value)
            suffix.append(f"{key.split('.')[-1]}={value}")
        sub["config_id"] = cfg["config_id"] + "+" + ",".join(suffix)
        tasks.append((sub, seed))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_one, tasks))
    else:
        results = [_sweep_one(t) for t in tasks]
    return [row for rows in results for row in rows]


def _format_cell(v: Any) -> str:
    if isinstance(v, float):
        return format(v, ".6g")
    return str(v)


def write_csv(rows: List[Dict[str, Any]], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_format_cell(row.get(c, "")) for c in CSV_COLUMNS])


def rows_to_csv(rows: List[Dict[str, Any]]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def read_csv(path: str) -> List[Dict[str, str]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_COLUMNS:
            raise ValueError(f"{path}: column set does not match schema "
                             f"v{CSV_SCHEMA_VERSION}")
        return [dict(zip(header, line)) for line in reader]


def report(csv_paths: Sequence[str]) -> str:
    """Summaries: oracle-normalized performance, NUMA reductions, energy."""
    if not csv_paths:
        raise ValueError("report needs at least one CSV")
    rows: List[Dict[str, str]] = []
    for path in csv_paths:
        rows.extend(read_csv(path))
    if not rows:
        raise ValueError("no data rows in input CSVs")

    lines: List[str] = []
    dense = [r for r in rows if not r["strategy"]]
    if dense:
        lines.append("== performance (normalized to oracle) ==")
        lines.append(f"{'workload':40s} {'config':30s} {'cycles':>12s} "
                     f"{'norm':>7s} {'overhead%':>10s}")
        for r in dense:
            total = int(r["total_cycles"])
            oracle = int(r["oracle_cycles"])
            norm = oracle / total if total else 0.0
            lines.append(f"{r['workload']:40s} {r['config_id'][:30]:30s} "
                         f"{total:12d} {norm:7.3f} {float(r['mmu_overhead_pct']):10.2f}")

    numa_rows = [r for r in rows if r["strategy"]]
    if numa_rows:
        lines.append("")
        lines.append("== embedding gather latency (reduction vs baseline copy) ==")
        by_wl: Dict[str, List[Dict[str, str]]] = {}
        for r in numa_rows:
            by_wl.setdefault((r["workload"], r["config_id"]), []).append(r)
        for (wl, cid), group in by_wl.items():
            base = next((int(r["total_cycles"]) for r in group
                         if r["strategy"] == "baseline_copy"), None)
            for r in group:
                total = int(r["total_cycles"])
                red = ""
                if base and r["strategy"] != "baseline_copy":
                    red = f"{100.0 * (base - total) / base:8.1f}%"
                lines.append(f"{wl:40s} {r['strategy']:15s} {total:12d} {red:>9s}")

    energetic = [r for r in dense if r["energy_pj_total"]]
    if energetic:
        lines.append("")
        lines.append("== translation energy ==")
        for r in energetic:
            lines.append(f"{r['workload']:40s} {r['config_id'][:30]:30s} "
                         f"{float(r['energy_pj_total']):14.6g} pJ")
    return "\n".join(lines) + "\n"
