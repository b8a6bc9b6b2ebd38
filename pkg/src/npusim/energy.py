"""Event-count energy accounting for translation activity.

Energy is a pure linear function of finalized event counts: page-walk DRAM
reads, merge-buffer accesses, TLB probes, and path-register/cache probes.
The default per-event constants are implementer placeholders that keep the
DRAM:SRAM ratio at >= 100x; only ratios between configurations are
meaningful, not absolute joules.
"""

from __future__ import annotations

from dataclasses import dataclass

from .mmu import TranslationStats


@dataclass(frozen=True)
class EnergyTable:
    pj_per_walk_dram_access: float = 100.0
    pj_per_merge_buffer_access: float = 0.5
    pj_per_tlb_access: float = 0.8
    pj_per_path_register_access: float = 0.1

    def __post_init__(self):
        entries = (self.pj_per_walk_dram_access, self.pj_per_merge_buffer_access,
                   self.pj_per_tlb_access, self.pj_per_path_register_access)
        if any(v <= 0 for v in entries):
            raise ValueError("energy table entries must be positive")


@dataclass(frozen=True)
class EnergyBreakdown:
    walk_dram_pj: float
    merge_buffer_pj: float
    tlb_pj: float
    path_register_pj: float

    @property
    def total_pj(self) -> float:
        return (self.walk_dram_pj + self.merge_buffer_pj
                + self.tlb_pj + self.path_register_pj)


def account(stats: TranslationStats, table: EnergyTable = EnergyTable()) -> EnergyBreakdown:
    """Itemized energy = sum(event count x per-event energy). No hidden terms."""
    return EnergyBreakdown(
        walk_dram_pj=stats.walk_memory_transactions * table.pj_per_walk_dram_access,
        merge_buffer_pj=stats.merge_buffer_accesses * table.pj_per_merge_buffer_access,
        tlb_pj=stats.tlb_accesses * table.pj_per_tlb_access,
        path_register_pj=stats.cache_probes * table.pj_per_path_register_access,
    )
