"""
Recovering the control-flow graph
=================================

Blocks split at JUMPDESTs and after terminators; jump targets are recovered
by propagating abstract stacks with constant folding (no solver). Whatever
stays symbolic is reported, not guessed.
"""

from ponzitrace import build_cfg, disassemble, find_back_edges, partition_blocks
from ponzitrace.ingest import load_fixture

ref, code = load_fixture("scenario1")
cfg = build_cfg(partition_blocks(disassemble(code)))

print(f"{len(cfg.blocks)} blocks, {len(cfg.edges)} edges, entry = block {cfg.entry}")
for block in cfg.blocks:
    heads = ", ".join(str(i) for i in block.instructions[:3])
    print(f"  B{block.id} @{block.start_offset:<4} ends {block.terminator:<16} [{heads} ...]")

print("\nedges:")
for edge in cfg.edges:
    print(f"  B{edge.from_id} -> B{edge.to_id}  ({edge.kind})")

# the payout loop shows up as a back edge whose body holds a CALL
print("\nback edges (tail -> header):", find_back_edges(cfg))
print("unresolved jumps:", cfg.unresolved_jumps or "none")
