import random

import pytest

import reference_disasm
from graphgen import random_program
from ponzitrace.asm import assemble
from ponzitrace.bytecode import disassemble, parse_hex
from ponzitrace.cfg import (
    CONDITIONAL_JUMP,
    EDGE_BRANCH_TAKEN,
    EDGE_JUMP,
    build_cfg,
    find_back_edges,
    natural_loop_body,
    partition_blocks,
    reachable_blocks,
)


def cfg_of(hex_text: str):
    return build_cfg(partition_blocks(disassemble(parse_hex(hex_text))))


def cfg_of_items(items):
    return build_cfg(partition_blocks(disassemble(assemble(items))))


class TestPartition:
    def test_jump_then_dead_stop_then_dest(self):
        blocks = partition_blocks(disassemble(parse_hex("600456005b00")))
        assert [(b.id, b.start_offset, b.terminator) for b in blocks] == [
            (0, 0, "jump"),
            (1, 3, "stop"),
            (2, 4, "stop"),
        ]
        assert [i.mnemonic for i in blocks[2].instructions] == ["JUMPDEST", "STOP"]

    def test_single_stop(self):
        blocks = partition_blocks(disassemble(parse_hex("00")))
        assert len(blocks) == 1
        assert blocks[0].terminator == "stop"

    def test_conditional_boundaries(self):
        blocks = partition_blocks(disassemble(parse_hex("6001600657005b00")))
        assert [(b.id, b.start_offset, b.terminator) for b in blocks] == [
            (0, 0, CONDITIONAL_JUMP),
            (1, 5, "stop"),
            (2, 6, "stop"),
        ]

    def test_partition_reproduces_disassembly(self, fixture_code):
        _, _, code = fixture_code
        ins = disassemble(code)
        blocks = partition_blocks(ins)
        rejoined = [i for b in blocks for i in b.instructions]
        assert rejoined == ins

    def test_jumpdest_only_first(self, fixture_code):
        _, _, code = fixture_code
        for block in partition_blocks(disassemble(code)):
            for ins in block.instructions[1:]:
                assert ins.mnemonic != "JUMPDEST"


class TestBuildCfg:
    def test_resolved_jump(self):
        cfg = cfg_of("600456005b00")
        assert [(e.from_id, e.to_id, e.kind) for e in cfg.edges] == [(0, 2, EDGE_JUMP)]
        assert cfg.unresolved_jumps == []
        assert 1 not in reachable_blocks(cfg)

    def test_branch_edges(self):
        cfg = cfg_of("6001600657005b00")
        kinds = {(e.from_id, e.to_id): e.kind for e in cfg.edges}
        assert kinds == {(0, 2): EDGE_BRANCH_TAKEN, (0, 1): "branch_fallthrough"}

    def test_single_block(self):
        cfg = cfg_of("00")
        assert cfg.edges == []
        assert cfg.entry == 0

    def test_symbolic_target_is_unresolved(self):
        # CALLDATALOAD value jumped to: surfaced, not guessed
        cfg = cfg_of("60003556")
        assert cfg.edges == []
        assert len(cfg.unresolved_jumps) == 1
        assert "symbolic" in cfg.unresolved_jumps[0][1]

    def test_non_jumpdest_target_is_unresolved(self):
        cfg = cfg_of("600356005b00")  # target 3 is not a JUMPDEST
        assert cfg.edges == []
        assert len(cfg.unresolved_jumps) == 1

    def test_jump_to_push_immediate_is_unresolved(self):
        # jumping into the middle of a PUSH's data cannot be a JUMPDEST
        cfg = cfg_of("600156005b00")
        assert cfg.edges == []
        assert len(cfg.unresolved_jumps) == 1

    def test_edges_target_jumpdest_blocks(self, fixture_code):
        _, _, code = fixture_code
        cfg = cfg_of(code.hex())
        for e in cfg.edges:
            if e.kind in (EDGE_JUMP, EDGE_BRANCH_TAKEN):
                assert cfg.blocks[e.to_id].starts_with_jumpdest


class TestBackEdges:
    def test_acyclic_diamond(self):
        items = [
            ("PUSH1", 0x00), "CALLDATALOAD", ("PUSH2", "@right"), "JUMPI",
            ("PUSH2", "@join"), "JUMP",
            "right:", "JUMPDEST", ("PUSH2", "@join"), "JUMP",
            "join:", "JUMPDEST", "STOP",
        ]
        cfg = cfg_of_items(items)
        assert find_back_edges(cfg) == []

    def test_self_loop(self):
        items = [
            "loop:", "JUMPDEST",
            ("PUSH1", 0x00), "CALLDATALOAD", ("PUSH2", "@loop"), "JUMPI",
            "STOP",
        ]
        cfg = cfg_of_items(items)
        assert find_back_edges(cfg) == [(0, 0)]

    def test_dominated_loop(self):
        # entry -> header -> body -> header: body->header is the back edge
        items = [
            ("PUSH1", 0x00),
            "header:", "JUMPDEST",
            ("PUSH1", 0x00), "CALLDATALOAD", ("PUSH2", "@exit"), "JUMPI",
            ("PUSH2", "@header"), "JUMP",
            "exit:", "JUMPDEST", "STOP",
        ]
        cfg = cfg_of_items(items)
        header = next(b.id for b in cfg.blocks if b.start_offset == 2)
        back = find_back_edges(cfg)
        assert back == [(header + 1, header)]
        assert header in natural_loop_body(cfg, header + 1, header)

    def test_irreducible_cycle_excluded(self):
        # two blocks jumping at each other, both entered from the dispatcher:
        # neither dominates the other
        items = [
            ("PUSH1", 0x00), "CALLDATALOAD", ("PUSH2", "@b"), "JUMPI",
            "a:", "JUMPDEST", ("PUSH2", "@b"), "JUMP",
            "b:", "JUMPDEST", ("PUSH2", "@a"), "JUMP",
        ]
        cfg = cfg_of_items(items)
        assert find_back_edges(cfg) == []
        assert any("irreducible" in d for d in cfg.diagnostics)

    def test_scenario1_has_call_loop(self, scenario1_code):
        cfg = cfg_of(scenario1_code.hex())
        back = find_back_edges(cfg)
        assert back, "the payout region must contain a loop"
        assert any(
            any(
                cfg.blocks[b].contains_mnemonic("CALL")
                for b in natural_loop_body(cfg, tail, header)
            )
            for tail, header in back
        )


# frozen reachable-block sets: resolver changes must not lose reachability
GOLDEN_REACHABLE = {
    "scenario1": set(range(9)),
    "scenario2": set(range(5)),
    "micro_ponzi": set(range(3)),
}


class TestReachabilityRegression:
    def test_reachable_blocks_frozen(self, fixture_code):
        name, _, code = fixture_code
        cfg = cfg_of(code.hex())
        assert reachable_blocks(cfg) == GOLDEN_REACHABLE[name]


def _oracle_edges(code: bytes) -> set[tuple[int, int]]:
    """Brute force: concretely execute every instruction path (forking at
    JUMPI), recording block transitions. Independent of the package: uses the
    reference disassembler and its own block-boundary derivation."""
    import bisect

    ins = reference_disasm.disassemble(code)
    by_offset = {i.offset: i for i in ins}
    sizes = {
        i.offset: 1
        + (int(i.mnemonic[4:]) if i.mnemonic.startswith("PUSH") and i.mnemonic != "PUSH0" else 0)
        for i in ins
    }
    leaders = {0}
    halting = {"STOP", "RETURN", "REVERT", "INVALID", "SELFDESTRUCT"}
    for i in ins:
        if i.mnemonic == "JUMPDEST":
            leaders.add(i.offset)
        if i.mnemonic in halting or i.mnemonic in ("JUMP", "JUMPI"):
            nxt = i.offset + sizes[i.offset]
            if nxt in by_offset:
                leaders.add(nxt)
    ordered = sorted(leaders)

    def block_of(offset: int) -> int:
        return bisect.bisect_right(ordered, offset) - 1

    edges: set[tuple[int, int]] = set()
    seen_states: set = set()
    UNKNOWN = "?"  # calldata-derived value

    def goto(pc: int, next_pc: int, stack: tuple, steps: int) -> None:
        if next_pc not in by_offset:
            return  # ran off the end: implicit stop
        if block_of(next_pc) != block_of(pc):
            edges.add((block_of(pc), block_of(next_pc)))
        run(next_pc, stack, steps)

    def run(pc: int, stack: tuple, steps: int) -> None:
        if steps >= 64 or pc not in by_offset:
            return
        key = (pc, stack)
        if key in seen_states:
            return
        seen_states.add(key)
        i = by_offset[pc]
        name = i.mnemonic
        steps += 1
        if name in halting:
            return
        if name.startswith("PUSH") and name != "PUSH0":
            goto(pc, pc + sizes[pc], stack + (i.immediate,), steps)
        elif name == "POP":
            if stack:
                goto(pc, pc + 1, stack[:-1], steps)
        elif name == "CALLDATALOAD":
            if stack:
                goto(pc, pc + 1, stack[:-1] + (UNKNOWN,), steps)
        elif name == "JUMPDEST":
            goto(pc, pc + 1, stack, steps)
        elif name == "JUMP":
            if stack:
                target, rest = stack[-1], stack[:-1]
                if (
                    target != UNKNOWN
                    and target in by_offset
                    and by_offset[target].mnemonic == "JUMPDEST"
                ):
                    goto(pc, target, rest, steps)
        elif name == "JUMPI":
            if len(stack) >= 2:
                target, rest = stack[-1], stack[:-2]
                if (
                    target != UNKNOWN
                    and target in by_offset
                    and by_offset[target].mnemonic == "JUMPDEST"
                ):
                    goto(pc, target, rest, steps)
                goto(pc, pc + 1, rest, steps)
        # any other opcode: outside the generator's vocabulary, halt

    run(0, (), 0)
    return edges


@pytest.mark.parametrize("seed", range(120))
def test_edges_match_concrete_execution_oracle(seed):
    rng = random.Random(seed)
    items = random_program(rng)
    code = assemble(items)
    cfg = build_cfg(partition_blocks(disassemble(parse_hex(code.hex()))))
    reach = reachable_blocks(cfg)
    mine = {(e.from_id, e.to_id) for e in cfg.edges if e.from_id in reach}
    assert mine == _oracle_edges(code)


@pytest.mark.parametrize("seed", range(200))
def test_partition_and_edge_invariants_random_corpus(seed):
    rng = random.Random(10_000 + seed)
    raw = bytes(rng.randrange(256) for _ in range(rng.randint(1, 300)))
    ins = disassemble(raw)
    blocks = partition_blocks(ins)
    # lossless partition
    assert [i for b in blocks for i in b.instructions] == ins
    # dense ids in offset order
    assert [b.id for b in blocks] == list(range(len(blocks)))
    assert all(a.start_offset < b.start_offset for a, b in zip(blocks, blocks[1:]))
    # JUMPDEST never mid-block
    for b in blocks:
        assert all(i.mnemonic != "JUMPDEST" for i in b.instructions[1:])
    cfg = build_cfg(blocks)
    for e in cfg.edges:
        if e.kind in (EDGE_JUMP, EDGE_BRANCH_TAKEN):
            assert cfg.blocks[e.to_id].starts_with_jumpdest
    # at most one branch-taken edge per block
    taken_counts = {}
    for e in cfg.edges:
        if e.kind == EDGE_BRANCH_TAKEN:
            taken_counts[e.from_id] = taken_counts.get(e.from_id, 0) + 1
    assert all(c == 1 for c in taken_counts.values())
    # back edges are a subset of edges and dominator-positive by construction
    pairs = {(e.from_id, e.to_id) for e in cfg.edges}
    assert set(cfg.back_edges) <= pairs
