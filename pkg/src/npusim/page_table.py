"""4-level radix page table with a reference walker.

The table maps virtual page numbers of a set of segments to physical frames.
`walk` is the authoritative translation oracle: every other translation path
in the simulator must agree with it, and its per-walk node-read list is the
source of page-walk memory transaction counts.

Page-table nodes live in a dedicated physical region disjoint from data
frames, so node addresses (used as tags by the unified translation cache)
never collide with data addresses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Optional

from .address_space import (
    PageSize,
    Segment,
    check_disjoint,
    indices_of_vpn,
)

# Physical region reserved for page-table nodes (one 4KB node per id).
PT_NODE_REGION_BASE = 1 << 47
ENTRY_BYTES = 8
FRAME_BITS = 36


class PageFaultError(Exception):
    """Translation failed: an entry was absent at `level`."""

    def __init__(self, vpn: int, level: int, levels_touched: int):
        super().__init__(f"page fault for vpn {vpn:#x} at level L{level}")
        self.vpn = vpn
        self.level = level
        self.levels_touched = levels_touched


class MappingError(Exception):
    """Double-map or unmap of an absent page."""


@dataclass(frozen=True)
class WalkStep:
    """One node read of a radix walk."""

    level: int          # 4 (root) down to the leaf level
    node_addr: int      # physical address of the node being read
    entry_addr: int     # physical address of the selected entry
    present: bool
    is_leaf: bool
    value: int          # frame number (leaf) or child node id (interior)


@dataclass(frozen=True)
class WalkResult:
    pa: int
    frame: int
    levels_touched: int
    touched_node_addrs: List[int]


class FrameAllocator:
    """Deterministic data-frame allocator.

    "sequential" hands out 0, 1, 2, ...; "shuffled" applies a seeded,
    bijective bit-mix to the same counter so frame numbers are scattered but
    reproducible and never reused.
    """

    def __init__(self, policy: str = "sequential", seed: int = 0):
        if policy not in ("sequential", "shuffled"):
            raise ValueError(f"unknown frame policy {policy!r}")
        self.policy = policy
        self.seed = seed
        self._next = 0

    def alloc(self) -> int:
        n = self._next
        self._next += 1
        if self.policy == "sequential":
            return n
        return self._scramble(n)

    def _scramble(self, n: int) -> int:
        # 4-round Feistel on 36 bits (18|18 split): a permutation, so
        # distinct counters give distinct frames for any seed.
        half = FRAME_BITS // 2
        mask = (1 << half) - 1
        left, right = n >> half, n & mask
        for round_no in range(4):
            key = (self.seed * 0x9E3779B1 + round_no * 0x85EBCA77) & 0xFFFFFFFF
            f = ((right * 0x27D4EB2F + key) ^ (right >> 7)) & mask
            left, right = right, left ^ f
        return (left << half) | right


class PageTable:
    """Sparse radix tree of 512-entry nodes."""

    def __init__(self, frame_allocator: Optional[FrameAllocator] = None):
        self.frames = frame_allocator or FrameAllocator()
        # node id -> {index: (is_leaf, value)}
        self.nodes: dict[int, dict[int, tuple[bool, int]]] = {0: {}}
        self.root = 0
        self._next_node = 1
        self.mapped_pages = 0

    def node_addr(self, node_id: int) -> int:
        return PT_NODE_REGION_BASE + node_id * 4096

    def _alloc_node(self) -> int:
        nid = self._next_node
        self._next_node += 1
        self.nodes[nid] = {}
        return nid

    def _indices(self, vpn: int, ps: PageSize) -> List[int]:
        idx = indices_of_vpn(vpn, ps)
        if ps is PageSize.SMALL_4K:
            return [idx.l4, idx.l3, idx.l2, idx.l1]
        return [idx.l4, idx.l3, idx.l2]

    # -- mutation -----------------------------------------------------------

    def map_page(self, vpn: int, ps: PageSize, frame: Optional[int] = None) -> int:
        indices = self._indices(vpn, ps)
        node = self.root
        for index in indices[:-1]:
            entry = self.nodes[node].get(index)
            if entry is None:
                child = self._alloc_node()
                self.nodes[node][index] = (False, child)
                node = child
            else:
                is_leaf, value = entry
                if is_leaf:
                    raise MappingError(
                        f"vpn {vpn:#x}: interior slot already holds a leaf"
                    )
                node = value
        leaf_index = indices[-1]
        if leaf_index in self.nodes[node]:
            raise MappingError(f"vpn {vpn:#x} already mapped")
        if frame is None:
            frame = self.frames.alloc()
        self.nodes[node][leaf_index] = (True, frame)
        self.mapped_pages += 1
        return frame

    def unmap_page(self, vpn: int, ps: PageSize) -> None:
        indices = self._indices(vpn, ps)
        node = self.root
        for index in indices[:-1]:
            entry = self.nodes[node].get(index)
            if entry is None or entry[0]:
                raise MappingError(f"vpn {vpn:#x} not mapped")
            node = entry[1]
        if indices[-1] not in self.nodes[node]:
            raise MappingError(f"vpn {vpn:#x} not mapped")
        del self.nodes[node][indices[-1]]
        self.mapped_pages -= 1

    def is_mapped(self, vpn: int, ps: PageSize) -> bool:
        last = self.walk_path(vpn, ps)[-1]
        return last.present and last.is_leaf

    # -- walking ------------------------------------------------------------

    def walk_path(self, vpn: int, ps: PageSize) -> List[WalkStep]:
        """Node reads of a walk, top-down, stopping at the first absent entry.

        The final step either carries the leaf entry (present, is_leaf) or
        records the read of the absent entry that faults the walk.
        """
        indices = self._indices(vpn, ps)
        steps: List[WalkStep] = []
        node = self.root
        level = 4
        for depth, index in enumerate(indices):
            naddr = self.node_addr(node)
            eaddr = naddr + index * ENTRY_BYTES
            entry = self.nodes[node].get(index)
            if entry is None:
                steps.append(WalkStep(level, naddr, eaddr, False, False, 0))
                return steps
            is_leaf, value = entry
            steps.append(WalkStep(level, naddr, eaddr, True, is_leaf, value))
            if depth == len(indices) - 1:
                return steps
            node = value
            level -= 1
        return steps

    def walk(self, va: int, ps: PageSize) -> WalkResult:
        """Reference walk. Raises PageFaultError on an absent entry."""
        page = va >> ps.offset_bits
        path = self.walk_path(page, ps)
        last = path[-1]
        if not (last.present and last.is_leaf):
            raise PageFaultError(page, last.level, len(path))
        offset = va & ((1 << ps.offset_bits) - 1)
        pa = (last.value << ps.offset_bits) | offset
        return WalkResult(
            pa=pa,
            frame=last.value,
            levels_touched=len(path),
            touched_node_addrs=[s.node_addr for s in path],
        )

    def frame_of(self, vpn: int, ps: PageSize) -> int:
        return self.walk(vpn << ps.offset_bits, ps).frame


def build(
    segments: Iterable[Segment],
    ps: PageSize,
    frame_policy: str = "sequential",
    seed: int = 0,
) -> PageTable:
    """Map every page covered by the segments; all other VPNs stay absent."""
    segments = list(segments)
    check_disjoint(segments)
    pt = PageTable(FrameAllocator(frame_policy, seed))
    for seg in segments:
        for page in seg.vpn_range(ps):
            pt.map_page(page, ps)
    return pt
