"""Cycle-level simulator for a scratchpad NPU with virtual address translation.

Modules:
  address_space  -- virtual address layout, segments, page geometry
  page_table     -- sparse multi-level radix page tables and reference walks
  memory         -- DRAM bandwidth/latency model and inter-node links
  mmu            -- translation engine: TLB, walkers, merge buffers, caches
  npu            -- tiled GEMM pipeline with double-buffered scratchpads
  workloads      -- dense layer suites and embedding gather traces
  numa           -- remote-memory strategies for embedding gathers
  energy         -- per-event energy accounting for the translation path
  config         -- defaults, validation, env overrides, seed derivation
  harness        -- runs, sweeps, CSV emission, reports
"""

__version__ = "0.1.0"
