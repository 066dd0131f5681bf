"""
Enumerating and aggregating execution paths
===========================================

Every entry-to-terminator block sequence is enumerated (loops re-entered a
bounded number of times), stack-executed, classified, and then merged with
the other paths that performed the same critical effects. Path0/Path1/...
below are what the flow view draws as colored hulls.
"""

from ponzitrace import (
    aggregate_paths,
    build_cfg,
    detect_call_loops,
    disassemble,
    enumerate_paths,
    partition_blocks,
)
from ponzitrace.ingest import load_fixture

ref, code = load_fixture("scenario1")
cfg = build_cfg(partition_blocks(disassemble(code)))

paths = enumerate_paths(cfg)
print(f"{len(paths)} feasible paths enumerated")
for p in paths:
    flags = ("invest" if p.is_investing else "") + ("+reward" if p.is_rewarding else "")
    print(f"  {p.blocks}  {flags or 'plain'}")
    p.loop_annotations = tuple(a for a in detect_call_loops(cfg, p) if a.contains_call)

print()
for agg in aggregate_paths(paths):
    kinds = []
    if agg.is_investing:
        kinds.append("investing")
    if agg.is_rewarding:
        kinds.append("rewarding")
    print(f"{agg.name}: {len(agg.member_paths)} member paths, {' and '.join(kinds)}")
    print(f"  blocks {sorted(agg.union_blocks)}")
    print(f"  writes {sorted(agg.slots_written) or '-'} / reads {sorted(agg.slots_read) or '-'}")
    for loop in agg.loop_annotations:
        print(f"  loop at B{loop.header} containing CALL")
