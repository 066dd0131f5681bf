"""End-to-end analysis: bytecode in, report out."""

from __future__ import annotations

from .bytecode import Bytecode, disassemble
from .cfg import build_cfg, partition_blocks
from .detect import AnalysisReport, build_report, evaluate_c1, evaluate_c2
from .paths import Bounds, aggregate_paths, detect_call_loops, enumerate_paths, natural_loops
from .symexec import SlotCanonicalizer, StorageSlot

TOOL_VERSION = "0.1.0"

# the executor explores both branch arms and never prunes by conditions,
# so evidence can only over-approximate; stated once in every report
_OVERAPPROX_NOTE = (
    "symexec: no constraint solving; both JUMPI arms explored, "
    "paths and slot evidence may over-approximate"
)


def analyze_bytecode(
    code: Bytecode,
    contract_ref: dict | None = None,
    bounds: Bounds = Bounds(),
) -> AnalysisReport:
    instructions = disassemble(code)
    blocks = partition_blocks(instructions)
    cfg = build_cfg(blocks)

    diagnostics = list(cfg.diagnostics)
    diagnostics.append(_OVERAPPROX_NOTE)
    for block_id, reason in cfg.unresolved_jumps:
        diagnostics.append(f"cfg: unresolved jump at block {block_id}: {reason}")

    canon = SlotCanonicalizer()
    paths = enumerate_paths(cfg, bounds, canon, diagnostics)

    loops = natural_loops(cfg)
    plain_loop_headers: set[int] = set()
    for path in paths:
        annotations = detect_call_loops(cfg, path, loops)
        path.loop_annotations = tuple(a for a in annotations if a.contains_call)
        plain_loop_headers.update(a.header for a in annotations if not a.contains_call)
    for header in sorted(plain_loop_headers):
        diagnostics.append(f"paths: loop at block {header} has no CALL (not C2 evidence)")

    flagless = sum(1 for p in paths if not (p.is_investing or p.is_rewarding))
    if flagless:
        diagnostics.append(f"paths: {flagless} feasible paths carry no invest/reward events")

    aggregates = aggregate_paths(paths)
    c1 = evaluate_c1(aggregates)
    c2 = evaluate_c2(aggregates)

    slots: dict[str, StorageSlot] = {}
    for agg in aggregates:
        for member in agg.member_paths:
            for slot in member.effects.touched_slots_read | member.effects.touched_slots_written:
                slots.setdefault(slot.canonical_key, slot)

    if contract_ref is None:
        contract_ref = {"name": "inline", "address": None, "chain": None, "code_hash": None}

    return build_report(
        contract_ref,
        cfg,
        aggregates,
        list(slots.values()),
        c1,
        c2,
        bounds={
            "max_paths": bounds.max_paths,
            "max_blocks_per_path": bounds.max_blocks_per_path,
            "loop_unroll": bounds.loop_unroll,
        },
        diagnostics=diagnostics,
        tool_version=TOOL_VERSION,
    )


def opcode_listing(code: Bytecode) -> dict:
    """The opcode-list payload: the full disassembly grouped by block id."""
    blocks = partition_blocks(disassemble(code))
    return {
        "blocks": [
            {
                "id": b.id,
                "start_offset": b.start_offset,
                "instructions": [
                    {
                        "offset": ins.offset,
                        "mnemonic": ins.mnemonic,
                        **(
                            {"immediate_hex": ins.immediate_hex()}
                            if ins.immediate is not None
                            else {}
                        ),
                    }
                    for ins in b.instructions
                ],
            }
            for b in blocks
        ]
    }
