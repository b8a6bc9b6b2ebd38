"""Systolic-array NPU timing model with a double-buffered scratchpad.

No tensor arithmetic happens here: layers are GEMMs whose operands live in
virtual-address segments, and the model tracks only address and timing
behavior. The DMA blocks input activations (IA) and weights (W) into tiles
that each fit half of the corresponding scratchpad partition, linearizes a
tile into fixed-size memory transactions, and submits one translation per
cycle to the MMU while fetching. Compute for tile n overlaps the fetch of
tile n+1; a tile's compute starts only after its fetch fully lands
(barrier), and a buffer is reusable only after the compute reading it ends.

Weight-stationary compute timing for a (m, k, n) sub-GEMM on a PxP array:
load a PxP weight block, stream m rows, drain the pipeline, repeated per
weight block:  ceil(k/P) * ceil(n/P) * (m + 2P) cycles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .address_space import PageSize, Segment, vpn as vpn_of
from .memory import Dram
from .mmu import TranslationEngine

MB = 1024 * 1024


class SimulationFault(Exception):
    """A fetch touched an unmapped page with demand paging disabled."""

    def __init__(self, vpn: int, level: int):
        super().__init__(f"unmapped page vpn={vpn:#x} (fault at L{level})")
        self.vpn = vpn
        self.level = level


@dataclass(frozen=True)
class NpuConfig:
    array_dim: int = 128
    spm_activation_bytes: int = 15 * MB
    spm_weight_bytes: int = 10 * MB
    dma_txn_bytes: int = 64
    element_bytes: int = 1
    reuse_last_translation: bool = False   # DMA-side reuse window of size 1
    mirror_write_traffic: bool = False     # extrapolation: OA write-back traffic

    def __post_init__(self):
        if self.array_dim < 1 or self.dma_txn_bytes < 1:
            raise ValueError("array_dim and dma_txn_bytes must be positive")
        if self.spm_activation_bytes <= 0 or self.spm_weight_bytes <= 0:
            raise ValueError("SPM partitions must be positive")


@dataclass(frozen=True)
class LayerConfig:
    name: str
    m: int
    k: int
    n: int
    ia_segment: Segment
    w_segment: Segment
    batch: int = 1
    out_segment: Optional[Segment] = None

    def __post_init__(self):
        if min(self.m, self.k, self.n, self.batch) < 1:
            raise ValueError("layer dimensions must be >= 1")

    @property
    def m_eff(self) -> int:
        """Batching maps onto extra GEMM rows."""
        return self.m * self.batch


@dataclass(frozen=True)
class TileFetch:
    tensor: str                       # "ia" | "w" | "out"
    spans: Tuple[Tuple[int, int], ...]  # (start va, length), ascending
    total_bytes: int
    tile_id: int


@dataclass(frozen=True)
class TileStep:
    tile_id: int
    fetches: Tuple[TileFetch, ...]    # IA then W, never interleaved
    gemm: Tuple[int, int, int]        # (m, k, n) of this sub-GEMM
    out_bytes: int


@dataclass(frozen=True)
class MemoryTransaction:
    va: int
    nbytes: int
    tile_id: int
    seq: int


@dataclass
class TilePhase:
    tile_id: int
    fetch_start: int
    fetch_end: int
    compute_start: int
    compute_end: int


@dataclass
class RunStats:
    total_cycles: int
    tile_phases: List[TilePhase]
    translations_submitted: int
    dram_bytes: int
    mmu_stats: object = None          # TranslationStats snapshot


def _row_spans(base: int, rows: int, row_stride: int, row_bytes: int):
    """Spans for `rows` rows of `row_bytes`, merging contiguous neighbors."""
    spans: List[Tuple[int, int]] = []
    for r in range(rows):
        start = base + r * row_stride
        if spans and spans[-1][0] + spans[-1][1] == start:
            spans[-1] = (spans[-1][0], spans[-1][1] + row_bytes)
        else:
            spans.append((start, row_bytes))
    return tuple(spans)


def tile_steps(layer: LayerConfig, npu: NpuConfig) -> List[TileStep]:
    """Block the layer into double-bufferable tile steps.

    K is tiled to fit the IA half-partition with all m_eff rows resident,
    then N is tiled to fit the W half-partition. IA and W are both row-major
    inside their segments (IA: m_eff x k, W: k x n).
    """
    eb = npu.element_bytes
    m, k, n = layer.m_eff, layer.k, layer.n
    half_a = npu.spm_activation_bytes // 2
    half_w = npu.spm_weight_bytes // 2
    if layer.ia_segment.length < m * k * eb or layer.w_segment.length < k * n * eb:
        raise ValueError(f"layer {layer.name}: segments smaller than operands")

    k_t = min(k, half_a // (m * eb))
    if k_t < 1:
        raise ValueError(f"layer {layer.name}: one IA row set exceeds half the SPM")
    n_t = min(n, half_w // (k_t * eb))
    if n_t < 1:
        # shrink K further so at least one W column strip fits
        k_t = min(k_t, half_w // eb)
        n_t = min(n, half_w // (k_t * eb))
        if n_t < 1:
            raise ValueError(f"layer {layer.name}: W tile cannot fit half the SPM")

    steps: List[TileStep] = []
    tile_id = 0
    for k0 in range(0, k, k_t):
        kt = min(k_t, k - k0)
        for n0 in range(0, n, n_t):
            nt = min(n_t, n - n0)
            ia = _row_spans(layer.ia_segment.base + k0 * eb, m, k * eb, kt * eb)
            w = _row_spans(layer.w_segment.base + k0 * n * eb + n0 * eb,
                           kt, n * eb, nt * eb)
            fetches = (
                TileFetch("ia", ia, sum(s[1] for s in ia), tile_id),
                TileFetch("w", w, sum(s[1] for s in w), tile_id),
            )
            steps.append(TileStep(tile_id, fetches, (m, kt, nt), m * nt * eb))
            tile_id += 1
    return steps


def plan_tiles(layer: LayerConfig, npu: NpuConfig) -> List[TileFetch]:
    """All tile fetches of the layer, in DMA issue order."""
    return [f for step in tile_steps(layer, npu) for f in step.fetches]


def linearize(tile: TileFetch, npu: NpuConfig) -> List[MemoryTransaction]:
    """Decompose a tile's spans into fixed-size transactions, ascending."""
    txns: List[MemoryTransaction] = []
    seq = 0
    chunk = npu.dma_txn_bytes
    for start, length in tile.spans:
        off = 0
        while off < length:
            txns.append(MemoryTransaction(start + off, min(chunk, length - off),
                                          tile.tile_id, seq))
            seq += 1
            off += chunk
    return txns


def compute_cycles(m: int, k: int, n: int, npu: NpuConfig) -> int:
    p = npu.array_dim
    return math.ceil(k / p) * math.ceil(n / p) * (m + 2 * p)


def simulate_fetch(
    txns: List[MemoryTransaction],
    engine: TranslationEngine,
    dram: Dram,
    start: int,
    ps: PageSize,
    npu: NpuConfig,
    write: bool = False,
) -> int:
    """Run one tile fetch through the MMU and DRAM; return last data cycle.

    Submits one translation per cycle (retrying while blocked); each
    completed translation releases its data transaction(s) to DRAM. With the
    reuse window enabled, consecutive transactions to the same page share
    one translation.
    """
    # Group consecutive same-VPN transactions when the reuse window is on.
    groups: List[Tuple[int, List[MemoryTransaction]]] = []
    for t in txns:
        page = vpn_of(t.va, ps)
        if npu.reuse_last_translation and groups and groups[-1][0] == page:
            groups[-1][1].append(t)
        else:
            groups.append((page, [t]))

    pending: dict[int, List[MemoryTransaction]] = {}
    cycle = start
    i = 0
    end = start
    while i < len(groups) or engine.in_flight > 0:
        if i < len(groups):
            page, members = groups[i]
            res = engine.submit(page, cycle)
            if res.accepted:
                pending[res.request_id] = members
                i += 1
        for comp in engine.tick(cycle):
            if comp.fault:
                raise SimulationFault(comp.vpn, comp.fault_level)
            for t in pending.pop(comp.request_id, ()):
                done = dram.issue(t.nbytes, comp.done_cycle)
                if done > end:
                    end = done
        cycle += 1
    return end


def run_layer(
    layer: LayerConfig,
    npu: NpuConfig,
    engine: TranslationEngine,
    dram: Dram,
) -> RunStats:
    """Execute the double-buffered tile pipeline for one layer."""
    steps = tile_steps(layer, npu)
    ps = engine.ps
    phases: List[TilePhase] = []
    fetch_end_prev = 0
    compute_ends: List[int] = []
    submitted0 = engine.stats.submitted

    for i, step in enumerate(steps):
        buffer_free = compute_ends[i - 2] if i >= 2 else 0
        fetch_start = max(fetch_end_prev, buffer_free)
        if npu.mirror_write_traffic and i >= 1:
            # the DMA was busy mirroring writes until the previous compute end
            fetch_start = max(fetch_start, compute_ends[i - 1])
        cursor = fetch_start
        for fetch in step.fetches:
            cursor = simulate_fetch(linearize(fetch, npu), engine, dram,
                                    cursor, ps, npu)
        fetch_end = cursor
        compute_start = max(fetch_end, compute_ends[i - 1] if i >= 1 else 0)
        compute_end = compute_start + compute_cycles(*step.gemm, npu)
        if npu.mirror_write_traffic:
            if layer.out_segment is None:
                raise ValueError("mirror_write_traffic requires an output segment")
            out_spans = ((layer.out_segment.base, step.out_bytes),)
            out = TileFetch("out", out_spans, step.out_bytes, step.tile_id)
            compute_end = simulate_fetch(linearize(out, npu), engine, dram,
                                         compute_end, ps, npu, write=True)
        phases.append(TilePhase(step.tile_id, fetch_start, fetch_end,
                                compute_start, compute_end))
        fetch_end_prev = fetch_end
        compute_ends.append(compute_end)

    total = compute_ends[-1] if compute_ends else 0
    return RunStats(
        total_cycles=total,
        tile_phases=phases,
        translations_submitted=engine.stats.submitted - submitted0,
        dram_bytes=dram.bytes_issued,
        mmu_stats=engine.stats.copy(),
    )
