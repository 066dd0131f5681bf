import pytest
from hypothesis import given, strategies as st

from ponzitrace.asm import assemble
from ponzitrace.bytecode import Instruction, disassemble
from ponzitrace.cfg import build_cfg, partition_blocks
from ponzitrace.opcodes import mnemonic_to_byte, opcode_spec
from ponzitrace.symexec import (
    DisconnectedSequence,
    MachineState,
    SlotCanonicalizer,
    SymValue,
    TAINT_CALLER,
    TAINT_STORAGE,
    WORD_MASK,
    caller,
    canonical_slot,
    concrete,
    execute_path,
    step,
)

NO_TAINT = frozenset()
CALLER_TAINT = frozenset({TAINT_CALLER})


def instr(mnemonic: str, immediate: int | None = None) -> Instruction:
    spec = opcode_spec(mnemonic_to_byte(mnemonic))
    return Instruction(
        offset=0,
        spec=spec,
        immediate=immediate,
        immediate_bytes_present=spec.immediate_len,
    )


def run(state: MachineState, *ops) -> MachineState:
    for op in ops:
        if isinstance(op, tuple):
            step(state, instr(op[0], op[1]))
        else:
            step(state, instr(op))
    return state


def cfg_of_items(items):
    return build_cfg(partition_blocks(disassemble(assemble(items))))


class TestStep:
    def test_constant_folding_add(self):
        state = MachineState(stack=[concrete(2), concrete(3)])
        run(state, "ADD")
        assert state.stack == [concrete(5)]

    def test_address_mask_keeps_caller_taint(self):
        state = MachineState(stack=[caller()])
        run(state, ("PUSH20", (1 << 160) - 1), "AND")
        (top,) = state.stack
        assert top.kind == "binop" and top.op == "AND"
        assert TAINT_CALLER in top.taint

    def test_sload_canonicalizes_and_records(self):
        state = MachineState(stack=[concrete(0)])
        run(state, "SLOAD")
        (top,) = state.stack
        assert top.kind == "sload"
        assert top.args[0].canonical_key == "0"
        assert TAINT_STORAGE in top.taint
        assert [slot.canonical_key for _, slot in state.sload_journal] == ["0"]

    def test_dup_swap_preserve_taint(self):
        state = MachineState(stack=[caller(), concrete(7)])
        run(state, "DUP2")
        assert state.stack[-1].taint == CALLER_TAINT
        run(state, "SWAP2")
        assert state.stack[0].taint == CALLER_TAINT

    def test_call_success_flag_is_opaque(self):
        state = MachineState(stack=[concrete(0)] * 6 + [concrete(1)])
        run(state, "CALL")
        (flag,) = state.stack
        assert flag.kind == "opaque"
        assert len(state.call_journal) == 1

    def test_folding_stays_tainted(self):
        # a concrete result computed from a tainted operand keeps the taint
        state = MachineState(stack=[concrete(1, CALLER_TAINT), concrete(2)])
        run(state, "ADD")
        (top,) = state.stack
        assert top.is_concrete and top.value == 3
        assert top.taint == CALLER_TAINT

    def test_sha3_of_known_memory(self):
        state = MachineState()
        run(
            state,
            "CALLER", ("PUSH1", 0x00), "MSTORE",
            ("PUSH1", 0x01), ("PUSH1", 0x20), "MSTORE",
            ("PUSH1", 0x40), ("PUSH1", 0x00), "SHA3",
        )
        (top,) = state.stack
        assert top.kind == "sha3"
        assert [w.kind for w in top.args] == ["caller", "concrete"]
        assert TAINT_CALLER in top.taint

    def test_sha3_after_symbolic_store_is_opaque(self):
        state = MachineState()
        run(
            state,
            ("PUSH1", 0x05), ("PUSH1", 0x00), "CALLDATALOAD", "MSTORE",  # symbolic offset
            ("PUSH1", 0x20), ("PUSH1", 0x00), "SHA3",
        )
        (top,) = state.stack
        assert top.kind == "opaque"
        assert state.memory_havoc


class TestCanonicalSlot:
    def test_state_variable(self):
        slot = canonical_slot(concrete(5))
        assert slot.kind == "state_variable"
        assert slot.canonical_key == "5"

    def test_mapping_layout(self):
        key = SymValue(kind="calldataload", args=(concrete(4),))
        v = SymValue(kind="sha3", args=(key, concrete(0)))
        slot = canonical_slot(v)
        assert slot.kind == "hashed"
        assert slot.key_shape == "mapping_key"
        assert slot.canonical_key == "h(·,0)"

    def test_dynamic_array_layout(self):
        sha = SymValue(kind="sha3", args=(concrete(2),))
        opaque = SymValue(kind="opaque", value=1, op="MLOAD")
        v = SymValue(kind="binop", op="ADD", args=(sha, opaque))
        slot = canonical_slot(v)
        assert slot.kind == "hashed"
        assert slot.key_shape == "array_index"
        assert slot.canonical_key == "h(2)+i"

    def test_index_folds_into_same_slot(self):
        canon = SlotCanonicalizer()
        sha = SymValue(kind="sha3", args=(concrete(2),))
        indexed = SymValue(kind="binop", op="ADD", args=(sha, concrete(3)))
        assert canon.canonical(sha) == canon.canonical(indexed)

    def test_unknown_ids_are_stable(self):
        canon = SlotCanonicalizer()
        a = SymValue(kind="opaque", value=1, op="MLOAD")
        b = SymValue(kind="opaque", value=2, op="MLOAD")
        assert canon.canonical(a) == canon.canonical(a)
        assert canon.canonical(a) != canon.canonical(b)
        assert canon.canonical(a).kind == "unknown"

    @given(st.integers(min_value=0, max_value=WORD_MASK))
    def test_total_and_deterministic(self, n):
        assert canonical_slot(concrete(n)).canonical_key == str(n)


MICRO_INVEST = ["CALLER", ("PUSH1", 0x00), "SSTORE", "STOP"]
MICRO_REWARD = (
    [("PUSH1", 0x00)] * 5
    + [("PUSH1", 0x00), "SLOAD", ("PUSH2", 0x8FC), "CALL", "POP", "STOP"]
)


class TestExecutePath:
    def test_micro_invest(self):
        cfg = cfg_of_items(MICRO_INVEST)
        effects = execute_path(cfg, [0])
        assert len(effects.invest_events) == 1
        ev = effects.invest_events[0]
        assert ev.slot.canonical_key == "0"
        assert ev.stored_value.kind == "caller"
        assert ev.via == "value"
        assert effects.reward_events == ()

    def test_micro_reward(self):
        cfg = cfg_of_items(MICRO_REWARD)
        effects = execute_path(cfg, [0])
        assert len(effects.reward_events) == 1
        ev = effects.reward_events[0]
        assert {s.canonical_key for s in ev.target_slots} == {"0"}
        assert effects.invest_events == ()

    def test_no_critical_instructions(self):
        cfg = cfg_of_items([("PUSH1", 1), ("PUSH1", 2), "ADD", "STOP"])
        effects = execute_path(cfg, [0])
        assert effects.invest_events == () and effects.reward_events == ()
        assert effects.feasible_shape

    def test_untainted_sstore_is_not_investing(self):
        cfg = cfg_of_items([("PUSH1", 7), ("PUSH1", 0), "SSTORE", "STOP"])
        effects = execute_path(cfg, [0])
        assert effects.invest_events == ()
        assert {s.canonical_key for s in effects.touched_slots_written} == {"0"}

    def test_caller_keyed_mapping_store_is_investing_via_key(self):
        items = [
            "CALLER", ("PUSH1", 0x00), "MSTORE",
            ("PUSH1", 0x01), ("PUSH1", 0x20), "MSTORE",
            "CALLVALUE",
            ("PUSH1", 0x40), ("PUSH1", 0x00), "SHA3",
            "SSTORE", "STOP",
        ]
        cfg = cfg_of_items(items)
        effects = execute_path(cfg, [0])
        assert len(effects.invest_events) == 1
        ev = effects.invest_events[0]
        assert ev.via == "key"
        assert ev.slot.canonical_key == "h(·,1)"

    def test_underflow_marks_shape_infeasible(self):
        cfg = cfg_of_items(["POP", "STOP"])
        effects = execute_path(cfg, [0])
        assert not effects.feasible_shape

    def test_depth_overflow_marks_shape_infeasible(self):
        cfg = cfg_of_items([("PUSH1", 0x01)] * 1025 + ["STOP"])
        effects = execute_path(cfg, [0])
        assert not effects.feasible_shape

    def test_disconnected_sequence_rejected(self):
        cfg = cfg_of_items(
            [("PUSH1", 0x00), "CALLDATALOAD", ("PUSH2", "@b"), "JUMPI", "STOP",
             "b:", "JUMPDEST", "STOP"]
        )
        with pytest.raises(DisconnectedSequence):
            execute_path(cfg, [1, 2])
        with pytest.raises(DisconnectedSequence):
            execute_path(cfg, [0, 0])


class TestStackDepthBookkeeping:
    def test_block_deltas_match_arity_sums(self, fixture_code):
        _, _, code = fixture_code
        cfg = build_cfg(partition_blocks(disassemble(code)))
        for block in cfg.blocks:
            state = MachineState(pad_on_underflow=True)
            state.stack = [state.fresh_opaque("SEED") for _ in range(64)]
            before = len(state.stack)
            for ins in block.instructions:
                step(state, ins)
            expected = sum(i.spec.pushes - i.spec.pops for i in block.instructions)
            assert len(state.stack) - before == expected


# independent re-statement of 256-bit wraparound semantics for the folding
# property; kept deliberately separate from the package implementation
def _reference_fold(op: str, a: int, b: int) -> int:
    m = 1 << 256
    if op == "ADD":
        return (a + b) % m
    if op == "MUL":
        return (a * b) % m
    if op == "SUB":
        return (a - b) % m
    if op == "DIV":
        return a // b if b else 0
    if op == "AND":
        return a & b
    if op == "OR":
        return a | b
    if op == "XOR":
        return a ^ b
    if op == "LT":
        return 1 if a < b else 0
    if op == "GT":
        return 1 if a > b else 0
    if op == "EQ":
        return 1 if a == b else 0
    raise AssertionError(op)


FOLD_OPS = ["ADD", "MUL", "SUB", "DIV", "AND", "OR", "XOR", "LT", "GT", "EQ"]


class TestFoldingProperties:
    @given(
        st.sampled_from(FOLD_OPS),
        st.integers(min_value=0, max_value=(1 << 64) - 1),
        st.integers(min_value=0, max_value=(1 << 64) - 1),
    )
    def test_binary_folding_matches_reference(self, op, a, b):
        state = MachineState(stack=[concrete(b), concrete(a)])  # a on top
        run(state, op)
        (top,) = state.stack
        assert top.is_concrete
        assert top.value == _reference_fold(op, a, b)

    @given(st.integers(min_value=0, max_value=(1 << 64) - 1))
    def test_iszero(self, a):
        state = MachineState(stack=[concrete(a)])
        run(state, "ISZERO")
        assert state.stack[0].value == (1 if a == 0 else 0)

    @given(
        st.integers(min_value=0, max_value=WORD_MASK),
        st.integers(min_value=0, max_value=WORD_MASK),
    )
    def test_wraparound_at_word_boundary(self, a, b):
        state = MachineState(stack=[concrete(b), concrete(a)])
        run(state, "ADD")
        assert state.stack[0].value == (a + b) % (1 << 256)


class TestOperandOrder:
    """Known-value checks pinning yellow-paper operand order for the ops
    where swapping arguments would still satisfy the generic properties."""

    def top_after(self, *ops):
        state = MachineState()
        run(state, *ops)
        (top,) = state.stack
        assert top.is_concrete
        return top.value

    def test_sub_subtracts_second_popped_from_first(self):
        # PUSH 10, PUSH 1, SUB computes 1 - 10
        assert self.top_after(("PUSH1", 0x0A), ("PUSH1", 0x01), "SUB") == (1 - 10) % (1 << 256)

    def test_div_divides_top_by_second(self):
        assert self.top_after(("PUSH1", 0x02), ("PUSH1", 0x0A), "DIV") == 5

    def test_shl_shift_amount_is_on_top(self):
        assert self.top_after(("PUSH1", 0x01), ("PUSH1", 0x04), "SHL") == 0x10

    def test_shr_shift_amount_is_on_top(self):
        assert self.top_after(("PUSH1", 0x10), ("PUSH1", 0x02), "SHR") == 0x04

    def test_sar_is_arithmetic(self):
        minus_16 = (1 << 256) - 16
        assert self.top_after(("PUSH32", minus_16), ("PUSH1", 0x02), "SAR") == (1 << 256) - 4

    def test_byte_index_is_on_top(self):
        # byte 31 is the least significant
        assert self.top_after(("PUSH1", 0xFF), ("PUSH1", 0x1F), "BYTE") == 0xFF
        assert self.top_after(("PUSH1", 0xFF), ("PUSH1", 0x00), "BYTE") == 0x00

    def test_signextend_size_is_on_top(self):
        assert self.top_after(("PUSH1", 0xFF), ("PUSH1", 0x00), "SIGNEXTEND") == WORD_MASK

    def test_sdiv_truncates_toward_zero(self):
        minus_8 = (1 << 256) - 8
        assert self.top_after(("PUSH1", 0x02), ("PUSH32", minus_8), "SDIV") == (1 << 256) - 4
        minus_7 = (1 << 256) - 7
        assert self.top_after(("PUSH1", 0x02), ("PUSH32", minus_7), "SDIV") == (1 << 256) - 3

    def test_exp_base_is_on_top(self):
        assert self.top_after(("PUSH1", 0x08), ("PUSH1", 0x02), "EXP") == 256

    def test_lt_compares_top_against_second(self):
        # PUSH 2, PUSH 1, LT asks 1 < 2
        assert self.top_after(("PUSH1", 0x02), ("PUSH1", 0x01), "LT") == 1
        assert self.top_after(("PUSH1", 0x01), ("PUSH1", 0x02), "LT") == 0


_taints = st.sampled_from(
    [NO_TAINT, CALLER_TAINT, frozenset({TAINT_STORAGE}), frozenset({TAINT_CALLER, TAINT_STORAGE})]
)
_binops = st.sampled_from(["ADD", "MUL", "SUB", "DIV", "AND", "OR", "XOR", "LT", "GT", "EQ"])


class TestTaintProperties:
    @given(st.lists(st.tuples(_binops, _taints), min_size=1, max_size=8), _taints)
    def test_left_deep_tree_unions_taints(self, ops, seed_taint):
        # fold a random expression tree; the result must carry exactly the
        # union of every consumed leaf's taint
        state = MachineState(stack=[concrete(3, seed_taint)])
        expected = set(seed_taint)
        for i, (op, taint) in enumerate(ops):
            state.push(concrete(i + 1, taint))
            expected |= taint
            run(state, op)
        (top,) = state.stack
        assert top.taint == frozenset(expected)

    @given(_taints, _taints)
    def test_binop_taint_is_exact_union(self, ta, tb):
        state = MachineState(stack=[concrete(2, tb), concrete(9, ta)])
        run(state, "ADD")
        assert state.stack[0].taint == ta | tb
