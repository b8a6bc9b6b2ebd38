"""Fixed-latency, bandwidth-capped DRAM model and NUMA interconnect links.

DRAM is modeled as a per-cycle token bucket: every cycle offers
`bandwidth_bytes_per_cycle` bytes of issue capacity and each transaction
completes a fixed access latency after its last byte is accepted. No
bank/row timing is modeled. Links add a fixed NUMA latency plus a
bandwidth-proportional transfer term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class DramConfig:
    channels: int = 8
    bandwidth_bytes_per_cycle: int = 600   # 600 GB/s at 1GHz
    access_latency: int = 100

    def __post_init__(self):
        if self.bandwidth_bytes_per_cycle <= 0:
            raise ValueError("bandwidth must be positive")


@dataclass(frozen=True)
class LinkConfig:
    kind: str  # "pcie" (CPU<->NPU) or "nvlink" (NPU<->NPU)
    bandwidth_bytes_per_cycle: int
    numa_latency: int = 150

    def __post_init__(self):
        if self.bandwidth_bytes_per_cycle <= 0:
            raise ValueError("bandwidth must be positive")


PCIE_LINK = LinkConfig(kind="pcie", bandwidth_bytes_per_cycle=16)
NVLINK_LINK = LinkConfig(kind="nvlink", bandwidth_bytes_per_cycle=160)


class Dram:
    """Work-conserving token-bucket DRAM.

    Transactions are accepted in call order; the issue cursor never moves
    backwards, so same-channel completions are FIFO.
    """

    def __init__(self, cfg: DramConfig):
        self.cfg = cfg
        self._cursor = 0                # cycle currently accepting bytes
        self._tokens = cfg.bandwidth_bytes_per_cycle
        self.bytes_issued = 0
        self.txns = 0

    def channel_of(self, vpn: int) -> int:
        return vpn % self.cfg.channels

    def issue(self, nbytes: int, now: int) -> int:
        """Accept a transaction at `now`; return its completion cycle."""
        if nbytes <= 0:
            raise ValueError("transaction must carry at least one byte")
        if now > self._cursor:
            self._cursor = now
            self._tokens = self.cfg.bandwidth_bytes_per_cycle
        remaining = nbytes
        while remaining > 0:
            take = min(remaining, self._tokens)
            remaining -= take
            self._tokens -= take
            if self._tokens == 0 and remaining > 0:
                self._cursor += 1
                self._tokens = self.cfg.bandwidth_bytes_per_cycle
        self.bytes_issued += nbytes
        self.txns += 1
        return self._cursor + self.cfg.access_latency

    def consume(self, nbytes: int, now: int) -> None:
        """Debit bandwidth without a data transaction (page-walk reads).

        Walk latency is charged separately by the walker timing, so only the
        token bucket is touched here.
        """
        if nbytes <= 0:
            return
        if now > self._cursor:
            self._cursor = now
            self._tokens = self.cfg.bandwidth_bytes_per_cycle
        remaining = nbytes
        while remaining > 0:
            take = min(remaining, self._tokens)
            remaining -= take
            self._tokens -= take
            if self._tokens == 0 and remaining > 0:
                self._cursor += 1
                self._tokens = self.cfg.bandwidth_bytes_per_cycle


def link_transfer_cycles(nbytes: int, link: LinkConfig) -> int:
    """Cycles for one transfer: fixed NUMA latency + bandwidth term."""
    if nbytes <= 0:
        raise ValueError("transfer must carry at least one byte")
    return link.numa_latency + math.ceil(nbytes / link.bandwidth_bytes_per_cycle)


class Link:
    """Stateful link with a serializing bandwidth cursor (per direction)."""

    def __init__(self, cfg: LinkConfig):
        self.cfg = cfg
        self._free = 0
        self.bytes_moved = 0

    def transfer(self, nbytes: int, now: int) -> int:
        if nbytes <= 0:
            raise ValueError("transfer must carry at least one byte")
        start = max(now, self._free)
        busy = math.ceil(nbytes / self.cfg.bandwidth_bytes_per_cycle)
        self._free = start + busy
        self.bytes_moved += nbytes
        return start + self.cfg.numa_latency + busy
