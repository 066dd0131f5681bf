"""
Stack execution with provenance
===============================

Execution paths run on a symbolic stack machine. Values remember where they
came from: CALLER-derived data flowing into an SSTORE makes an investing
event, a CALL whose target was read back from storage makes a rewarding one,
and slot operands are canonicalized (state variable, mapping, array).
"""

from ponzitrace import build_cfg, disassemble, execute_path, partition_blocks
from ponzitrace.asm import assemble

# register the caller at slot 0, then pay out whatever address slot 0 holds
items = [
    "CALLER", ("PUSH1", 0x00), "SSTORE",
    ("PUSH1", 0x00), ("PUSH1", 0x00), ("PUSH1", 0x00), ("PUSH1", 0x00),
    ("PUSH1", 0x01),
    ("PUSH1", 0x00), "SLOAD",
    ("PUSH2", 0x8FC), "CALL", "POP",
    "STOP",
]
cfg = build_cfg(partition_blocks(disassemble(assemble(items))))
effects = execute_path(cfg, [0])

for ev in effects.invest_events:
    print(f"invest  @{ev.offset:<3} slot {ev.slot} value={ev.stored_value} via {ev.via}")
for ev in effects.reward_events:
    slots = ", ".join(str(s) for s in ev.target_slots)
    print(f"reward  @{ev.offset:<3} target={ev.target} reads slot(s) {slots}")
print("slots written:", {str(s) for s in effects.touched_slots_written})
print("slots read:   ", {str(s) for s in effects.touched_slots_read})
