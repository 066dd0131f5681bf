"""Brute-force path enumerator used as an oracle, kept separate from the
package implementation."""

from __future__ import annotations

from ponzitrace.cfg import FALLTHROUGH, HALTING
from ponzitrace.paths import Bounds


def oracle_paths(cfg, bounds: Bounds) -> list[tuple[int, ...]]:
    back = set(cfg.back_edges)
    out: list[tuple[int, ...]] = []
    block_count = len(cfg.blocks)

    def ends_here(block_id: int) -> bool:
        block = cfg.blocks[block_id]
        if block.terminator in HALTING:
            return True
        return (
            block.terminator == FALLTHROUGH
            and block_id == block_count - 1
            and not cfg.successors(block_id)
        )

    def rec(path: list[int], counts: dict) -> None:
        if len(out) >= bounds.max_paths:
            return
        cur = path[-1]
        if ends_here(cur):
            out.append(tuple(path))
            return
        for target in cfg.successors(cur):
            edge = (cur, target)
            if target in path and edge not in back:
                continue  # irreducible cycle re-entry
            if edge in back and counts.get(edge, 0) >= bounds.loop_unroll:
                continue
            if len(path) >= bounds.max_blocks_per_path:
                continue
            if edge in back:
                counts[edge] = counts.get(edge, 0) + 1
            rec(path + [target], counts)
            if edge in back:
                counts[edge] -= 1

    rec([cfg.entry], {})
    return sorted(out)
