"""Basic blocks, bounded jump-target resolution, and the control-flow graph.

Jump targets are recovered by propagating abstract stacks (constant folding
only, no solver) through a worklist; whatever stays symbolic is surfaced in
unresolved_jumps instead of guessed at. Condition feasibility is deliberately
not decided here: both JUMPI arms stay in the graph even when the condition
folds to a constant.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .bytecode import Instruction
from .symexec import (
    DepthOverflow,
    MachineState,
    StackUnderflow,
    SymValue,
    step,
)

# terminator kinds
JUMP = "jump"
CONDITIONAL_JUMP = "conditional_jump"
STOP = "stop"
RETURN = "return"
REVERT = "revert"
SELF_DESTRUCT = "selfdestruct"
INVALID = "invalid"
FALLTHROUGH = "fallthrough"

HALTING = frozenset({STOP, RETURN, REVERT, SELF_DESTRUCT, INVALID})

# edge kinds
EDGE_JUMP = "jump"
EDGE_BRANCH_TAKEN = "branch_taken"
EDGE_BRANCH_FALLTHROUGH = "branch_fallthrough"
EDGE_FALLTHROUGH = "fallthrough"

MAX_ENTRY_STACKS_PER_BLOCK = 16

_TERMINATOR_OF = {
    "JUMP": JUMP,
    "JUMPI": CONDITIONAL_JUMP,
    "STOP": STOP,
    "RETURN": RETURN,
    "REVERT": REVERT,
    "SELFDESTRUCT": SELF_DESTRUCT,
    "INVALID": INVALID,
}


@dataclass(frozen=True)
class BasicBlock:
    id: int
    start_offset: int
    instructions: tuple[Instruction, ...]
    terminator: str

    @property
    def starts_with_jumpdest(self) -> bool:
        return self.instructions[0].mnemonic == "JUMPDEST"

    def contains_mnemonic(self, mnemonic: str) -> bool:
        return any(i.mnemonic == mnemonic for i in self.instructions)


@dataclass(frozen=True)
class CfgEdge:
    from_id: int
    to_id: int
    kind: str


@dataclass
class Cfg:
    blocks: list[BasicBlock]
    edges: list[CfgEdge]
    entry: int
    unresolved_jumps: list[tuple[int, str]] = field(default_factory=list)
    back_edges: list[tuple[int, int]] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    def successors(self, block_id: int) -> list[int]:
        return sorted({e.to_id for e in self.edges if e.from_id == block_id})

    def predecessors(self, block_id: int) -> list[int]:
        return sorted({e.from_id for e in self.edges if e.to_id == block_id})


def partition_blocks(instructions: list[Instruction]) -> list[BasicBlock]:
    """Split at offset 0, every JUMPDEST, and after terminators/JUMPIs."""
    if not instructions:
        raise ValueError("no instructions to partition")
    leaders = {instructions[0].offset}
    for i, ins in enumerate(instructions):
        if ins.mnemonic == "JUMPDEST":
            leaders.add(ins.offset)
        if (ins.spec.is_terminator or ins.spec.is_conditional_jump) and i + 1 < len(instructions):
            leaders.add(instructions[i + 1].offset)

    blocks: list[BasicBlock] = []
    current: list[Instruction] = []
    for ins in instructions:
        if ins.offset in leaders and current:
            blocks.append(_close_block(len(blocks), current))
            current = []
        current.append(ins)
    blocks.append(_close_block(len(blocks), current))
    return blocks


def _close_block(block_id: int, instructions: list[Instruction]) -> BasicBlock:
    last = instructions[-1]
    terminator = _TERMINATOR_OF.get(last.mnemonic, FALLTHROUGH)
    return BasicBlock(
        id=block_id,
        start_offset=instructions[0].offset,
        instructions=tuple(instructions),
        terminator=terminator,
    )


def _stack_key(stack: list[SymValue]) -> tuple:
    # opaque ids are normalized away so revisits with fresh opaques dedupe
    def key(v: SymValue):
        if v.is_concrete:
            return ("c", v.value)
        return ("s", v.kind, v.op)

    return tuple(key(v) for v in stack)


def build_cfg(blocks: list[BasicBlock]) -> Cfg:
    """Add edges per terminator kind, resolving jump targets by bounded
    abstract execution; compute dominator-checked back edges."""
    start_to_id = {b.start_offset: b.id for b in blocks}
    jumpdest_blocks = {b.id for b in blocks if b.starts_with_jumpdest}
    entry = blocks[0].id

    edges: set[tuple[int, int, str]] = set()
    unresolved: dict[tuple[int, str], None] = {}
    diagnostics: list[str] = []
    taken_target: dict[int, int] = {}  # JUMPI block -> resolved target

    # static fallthrough edges
    for b in blocks:
        nxt = b.id + 1 if b.id + 1 < len(blocks) else None
        if b.terminator == FALLTHROUGH and nxt is not None:
            edges.add((b.id, nxt, EDGE_FALLTHROUGH))
        elif b.terminator == CONDITIONAL_JUMP and nxt is not None:
            edges.add((b.id, nxt, EDGE_BRANCH_FALLTHROUGH))

    seen_stacks: dict[int, list[tuple]] = {b.id: [] for b in blocks}
    bound_hit: set[int] = set()
    work: deque[tuple[int, tuple[SymValue, ...]]] = deque()
    work.append((entry, ()))
    seen_stacks[entry].append(_stack_key([]))

    def enqueue(block_id: int, stack: list[SymValue]) -> None:
        key = _stack_key(stack)
        if key in seen_stacks[block_id]:
            return
        if len(seen_stacks[block_id]) >= MAX_ENTRY_STACKS_PER_BLOCK:
            if block_id not in bound_hit:
                bound_hit.add(block_id)
                diagnostics.append(
                    f"cfg: entry-stack bound ({MAX_ENTRY_STACKS_PER_BLOCK}) reached at block {block_id}"
                )
            return
        seen_stacks[block_id].append(key)
        work.append((block_id, tuple(stack)))

    while work:
        block_id, entry_stack = work.popleft()
        block = blocks[block_id]
        state = MachineState(stack=list(entry_stack))
        target: SymValue | None = None
        died = False
        try:
            for ins in block.instructions[:-1]:
                step(state, ins)
            last = block.instructions[-1]
            if block.terminator in (JUMP, CONDITIONAL_JUMP) and state.stack:
                target = state.stack[-1]
            step(state, last)
        except (StackUnderflow, DepthOverflow) as exc:
            died = True
            if block.terminator in (JUMP, CONDITIONAL_JUMP):
                unresolved.setdefault((block_id, f"abstract execution failed: {exc}"), None)
        if died:
            continue

        exit_stack = state.stack
        nxt = block_id + 1 if block_id + 1 < len(blocks) else None

        if block.terminator == JUMP:
            if target is None:
                unresolved.setdefault((block_id, "stack underflow at JUMP"), None)
            elif not target.is_concrete:
                unresolved.setdefault((block_id, f"symbolic jump target {target}"), None)
            else:
                dest = start_to_id.get(target.value)
                if dest is None or dest not in jumpdest_blocks:
                    unresolved.setdefault(
                        (block_id, f"target {target.value:#x} is not a JUMPDEST"), None
                    )
                else:
                    edges.add((block_id, dest, EDGE_JUMP))
                    enqueue(dest, exit_stack)
        elif block.terminator == CONDITIONAL_JUMP:
            if target is None:
                unresolved.setdefault((block_id, "stack underflow at JUMPI"), None)
            elif not target.is_concrete:
                unresolved.setdefault((block_id, f"symbolic branch target {target}"), None)
            else:
                dest = start_to_id.get(target.value)
                if dest is None or dest not in jumpdest_blocks:
                    unresolved.setdefault(
                        (block_id, f"target {target.value:#x} is not a JUMPDEST"), None
                    )
                elif block_id in taken_target and taken_target[block_id] != dest:
                    unresolved.setdefault(
                        (block_id, f"multiple branch targets resolved ({taken_target[block_id]}, {dest})"),
                        None,
                    )
                else:
                    taken_target[block_id] = dest
                    edges.add((block_id, dest, EDGE_BRANCH_TAKEN))
                    enqueue(dest, exit_stack)
            if nxt is not None:
                enqueue(nxt, exit_stack)
        elif block.terminator == FALLTHROUGH and nxt is not None:
            enqueue(nxt, exit_stack)

    edge_list = [CfgEdge(f, t, k) for f, t, k in sorted(edges)]
    cfg = Cfg(
        blocks=blocks,
        edges=edge_list,
        entry=entry,
        unresolved_jumps=sorted(unresolved),
        diagnostics=diagnostics,
    )
    cfg.back_edges = _compute_back_edges(cfg)
    return cfg


def _adjacency(cfg: Cfg) -> dict[int, list[int]]:
    adj: dict[int, list[int]] = {b.id: [] for b in cfg.blocks}
    for e in cfg.edges:
        if e.to_id not in adj[e.from_id]:
            adj[e.from_id].append(e.to_id)
    for targets in adj.values():
        targets.sort()
    return adj


def reachable_blocks(cfg: Cfg) -> set[int]:
    adj = _adjacency(cfg)
    seen = {cfg.entry}
    work = [cfg.entry]
    while work:
        for t in adj[work.pop()]:
            if t not in seen:
                seen.add(t)
                work.append(t)
    return seen


def _dominators(cfg: Cfg, reachable: set[int]) -> dict[int, set[int]]:
    adj = _adjacency(cfg)
    preds: dict[int, set[int]] = {n: set() for n in reachable}
    for n in reachable:
        for t in adj[n]:
            if t in reachable:
                preds[t].add(n)
    dom: dict[int, set[int]] = {n: set(reachable) for n in reachable}
    dom[cfg.entry] = {cfg.entry}
    changed = True
    order = sorted(reachable)
    while changed:
        changed = False
        for n in order:
            if n == cfg.entry:
                continue
            if preds[n]:
                new = set.intersection(*(dom[p] for p in preds[n])) | {n}
            else:
                new = {n}
            if new != dom[n]:
                dom[n] = new
                changed = True
    return dom


def _compute_back_edges(cfg: Cfg) -> list[tuple[int, int]]:
    adj = _adjacency(cfg)
    candidates: set[tuple[int, int]] = set()
    color: dict[int, int] = {}  # 0 unseen, 1 on stack, 2 done

    stack: list[tuple[int, int]] = [(cfg.entry, 0)]
    color[cfg.entry] = 1
    while stack:
        node, idx = stack.pop()
        targets = adj[node]
        if idx < len(targets):
            stack.append((node, idx + 1))
            t = targets[idx]
            c = color.get(t, 0)
            if c == 1:
                candidates.add((node, t))
            elif c == 0:
                color[t] = 1
                stack.append((t, 0))
        else:
            color[node] = 2

    reachable = reachable_blocks(cfg)
    dom = _dominators(cfg, reachable)
    back: list[tuple[int, int]] = []
    for u, v in sorted(candidates):
        if v in dom.get(u, set()):
            back.append((u, v))
        else:
            cfg.diagnostics.append(f"cfg: irreducible cycle edge {u} -> {v} excluded from loops")
    return back


def find_back_edges(cfg: Cfg) -> list[tuple[int, int]]:
    """Back edges (tail, header) sorted by tail then header."""
    return sorted(cfg.back_edges)


def natural_loop_body(cfg: Cfg, tail: int, header: int) -> frozenset[int]:
    """Blocks of the natural loop for back edge tail->header."""
    preds: dict[int, set[int]] = {}
    for e in cfg.edges:
        preds.setdefault(e.to_id, set()).add(e.from_id)
    body = {header, tail}
    work = [tail]
    while work:
        n = work.pop()
        if n == header:
            continue
        for p in preds.get(n, ()):
            if p not in body:
                body.add(p)
                work.append(p)
    return frozenset(body)
