"""Symbolic stack machine with provenance (taint) tracking.

Values are 256-bit words; concrete ones fold, everything else becomes a small
expression tree tagged with where it came from (caller, storage). Storage slot
operands are canonicalized into stable identities so paths touching the same
state variable / mapping / array agree on what they touched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .bytecode import Instruction

WORD = 1 << 256
WORD_MASK = WORD - 1
MAX_STACK_DEPTH = 1024

TAINT_CALLER = "caller_derived"
TAINT_STORAGE = "storage_derived"

_NO_TAINT: frozenset[str] = frozenset()


class SymExecError(Exception):
    pass


class StackUnderflow(SymExecError):
    pass


class DepthOverflow(SymExecError):
    pass


class DisconnectedSequence(SymExecError):
    pass


@dataclass(frozen=True)
class SymValue:
    """One symbolic 256-bit word.

    kind: concrete | caller | callvalue | calldataload | sload | sha3 |
          binop | opaque
    value: the integer for concrete, a fresh id for opaque
    op:    operator mnemonic for binop, origin mnemonic for opaque
    args:  operands (binop), preimage words (sha3), offset (calldataload),
           or the canonical StorageSlot (sload)
    """

    kind: str
    taint: frozenset[str] = _NO_TAINT
    value: int | None = None
    op: str | None = None
    args: tuple = ()

    @property
    def is_concrete(self) -> bool:
        return self.kind == "concrete"

    def __str__(self) -> str:
        if self.kind == "concrete":
            return str(self.value)
        if self.kind == "binop":
            return f"{self.op}({', '.join(map(str, self.args))})"
        if self.kind == "sha3":
            return f"sha3({', '.join(map(str, self.args))})"
        if self.kind == "sload":
            return f"sload[{self.args[0].canonical_key}]"
        if self.kind == "calldataload":
            return f"calldata[{self.args[0]}]"
        if self.kind == "opaque":
            return f"?{self.op}#{self.value}"
        return self.kind


def concrete(n: int, taint: frozenset[str] = _NO_TAINT) -> SymValue:
    return SymValue(kind="concrete", value=n & WORD_MASK, taint=taint)


def caller() -> SymValue:
    return SymValue(kind="caller", taint=frozenset({TAINT_CALLER}))


def callvalue() -> SymValue:
    return SymValue(kind="callvalue")


def union_taint(*values: SymValue) -> frozenset[str]:
    out: frozenset[str] = _NO_TAINT
    for v in values:
        out |= v.taint
    return out


@dataclass(frozen=True, eq=False)
class StorageSlot:
    """Canonical identity of a persistent storage location.

    Equality and hashing go through canonical_key only: all elements of one
    array (or one mapping) are the same slot for analysis purposes.
    """

    kind: str  # state_variable | hashed | unknown
    canonical_key: str
    slot_number: int | None = None
    base: int | None = None
    key_shape: str | None = None  # mapping_key | array_index | opaque
    unknown_id: int | None = None

    def __eq__(self, other: object) -> bool:
        return isinstance(other, StorageSlot) and self.canonical_key == other.canonical_key

    def __hash__(self) -> int:
        return hash(self.canonical_key)

    def __str__(self) -> str:
        return self.canonical_key


def _state_variable(n: int) -> StorageSlot:
    return StorageSlot(kind="state_variable", canonical_key=str(n), slot_number=n)


def _hashed(base: int, shape: str) -> StorageSlot:
    key = f"h(·,{base})" if shape == "mapping_key" else f"h({base})+i"
    return StorageSlot(kind="hashed", canonical_key=key, base=base, key_shape=shape)


class SlotCanonicalizer:
    """Maps slot-operand expressions to canonical slots.

    Unknown (unrecognized) expressions get a stable id per structurally
    distinct expression within one analysis, so keep one instance per
    contract run.
    """

    def __init__(self) -> None:
        self._unknown: dict[SymValue, StorageSlot] = {}

    def canonical(self, v: SymValue) -> StorageSlot:
        slot = self._match(v)
        if slot is not None:
            return slot
        if v not in self._unknown:
            uid = len(self._unknown)
            self._unknown[v] = StorageSlot(
                kind="unknown", canonical_key=f"u{uid}", unknown_id=uid
            )
        return self._unknown[v]

    def _match(self, v: SymValue) -> StorageSlot | None:
        if v.is_concrete:
            return _state_variable(v.value)  # type: ignore[arg-type]
        sha = self._strip_offsets(v)
        if sha is None:
            return None
        words = sha.args
        # one-word preimage with a concrete base: dynamic-array data region;
        # any additive index was stripped above, so every element collapses
        # into the same canonical slot
        if len(words) == 1 and words[0].is_concrete:
            return _hashed(words[0].value, "array_index")
        # two-word preimage ending in a concrete slot: mapping layout; the
        # key value never ends up in the canonical key
        if len(words) == 2 and words[1].is_concrete:
            return _hashed(words[1].value, "mapping_key")
        return None

    @staticmethod
    def _strip_offsets(v: SymValue) -> SymValue | None:
        # peel ADD chains (array indexing / struct member offsets) down to
        # the sha3 node that fixes the data region
        seen = 0
        while v.kind == "binop" and v.op == "ADD" and seen < 16:
            seen += 1
            left, right = v.args
            if left.kind == "sha3" or (left.kind == "binop" and left.op == "ADD"):
                v = left
            else:
                v = right
        return v if v.kind == "sha3" else None


def canonical_slot(v: SymValue, canon: SlotCanonicalizer | None = None) -> StorageSlot:
    """Canonicalize one slot operand; total, never raises."""
    return (canon or SlotCanonicalizer()).canonical(v)


@dataclass(frozen=True)
class SStoreOp:
    offset: int
    slot: StorageSlot
    slot_expr: SymValue
    value: SymValue


@dataclass(frozen=True)
class CallOp:
    offset: int
    target: SymValue
    value: SymValue


@dataclass
class MachineState:
    """Mutable execution state, exclusively owned by one path execution."""

    slots: SlotCanonicalizer = field(default_factory=SlotCanonicalizer)
    stack: list[SymValue] = field(default_factory=list)
    memory: dict[int, SymValue] = field(default_factory=dict)
    memory_havoc: bool = False
    transient_storage_writes: list[tuple[StorageSlot, SymValue]] = field(default_factory=list)
    sstore_journal: list[SStoreOp] = field(default_factory=list)
    call_journal: list[CallOp] = field(default_factory=list)
    sload_journal: list[tuple[int, StorageSlot]] = field(default_factory=list)
    pad_on_underflow: bool = False
    _opaque_seq: int = 0

    def push(self, v: SymValue) -> None:
        if len(self.stack) >= MAX_STACK_DEPTH:
            raise DepthOverflow(f"stack depth would exceed {MAX_STACK_DEPTH}")
        self.stack.append(v)

    def pop(self) -> SymValue:
        if not self.stack:
            if self.pad_on_underflow:
                return self.fresh_opaque("UNDERFLOW")
            raise StackUnderflow("pop from empty stack")
        return self.stack.pop()

    def fresh_opaque(self, origin: str, taint: frozenset[str] = _NO_TAINT) -> SymValue:
        self._opaque_seq += 1
        return SymValue(kind="opaque", value=self._opaque_seq, op=origin, taint=taint)


def _signed(x: int) -> int:
    return x - WORD if x >= 1 << 255 else x


def _fold2(op: str, a: int, b: int) -> int | None:
    """a is the first-popped (top) operand, per yellow-paper ordering."""
    if op == "ADD":
        return (a + b) & WORD_MASK
    if op == "MUL":
        return (a * b) & WORD_MASK
    if op == "SUB":
        return (a - b) & WORD_MASK
    if op == "DIV":
        return 0 if b == 0 else (a // b) & WORD_MASK
    if op == "SDIV":
        if b == 0:
            return 0
        sa, sb = _signed(a), _signed(b)
        q = abs(sa) // abs(sb)
        return (-q if (sa < 0) != (sb < 0) else q) & WORD_MASK
    if op == "MOD":
        return 0 if b == 0 else a % b
    if op == "SMOD":
        if b == 0:
            return 0
        sa, sb = _signed(a), _signed(b)
        r = abs(sa) % abs(sb)
        return (-r if sa < 0 else r) & WORD_MASK
    if op == "EXP":
        return pow(a, b, WORD)
    if op == "SIGNEXTEND":
        if a > 31:
            return b
        bit = 8 * a + 7
        if b & (1 << bit):
            return (b | (WORD_MASK ^ ((1 << (bit + 1)) - 1))) & WORD_MASK
        return b & ((1 << (bit + 1)) - 1)
    if op == "LT":
        return int(a < b)
    if op == "GT":
        return int(a > b)
    if op == "SLT":
        return int(_signed(a) < _signed(b))
    if op == "SGT":
        return int(_signed(a) > _signed(b))
    if op == "EQ":
        return int(a == b)
    if op == "AND":
        return a & b
    if op == "OR":
        return a | b
    if op == "XOR":
        return a ^ b
    if op == "BYTE":
        return 0 if a > 31 else (b >> (8 * (31 - a))) & 0xFF
    if op == "SHL":
        return 0 if a >= 256 else (b << a) & WORD_MASK
    if op == "SHR":
        return 0 if a >= 256 else b >> a
    if op == "SAR":
        if a >= 256:
            return 0 if _signed(b) >= 0 else WORD_MASK
        return (_signed(b) >> a) & WORD_MASK
    return None


_BINARY_OPS = frozenset(
    {
        "ADD", "MUL", "SUB", "DIV", "SDIV", "MOD", "SMOD", "EXP", "SIGNEXTEND",
        "LT", "GT", "SLT", "SGT", "EQ", "AND", "OR", "XOR", "BYTE",
        "SHL", "SHR", "SAR",
    }
)


def _apply_op(op: str, args: list[SymValue]) -> SymValue:
    taint = union_taint(*args)
    if all(a.is_concrete for a in args):
        vals = [a.value for a in args]
        if op in _BINARY_OPS:
            folded = _fold2(op, *vals)  # type: ignore[arg-type]
        elif op == "ISZERO":
            folded = int(vals[0] == 0)
        elif op == "NOT":
            folded = vals[0] ^ WORD_MASK  # type: ignore[operator]
        elif op == "ADDMOD":
            folded = 0 if vals[2] == 0 else (vals[0] + vals[1]) % vals[2]  # type: ignore[operator]
        elif op == "MULMOD":
            folded = 0 if vals[2] == 0 else (vals[0] * vals[1]) % vals[2]  # type: ignore[operator]
        else:
            folded = None
        if folded is not None:
            return concrete(folded, taint)
    return SymValue(kind="binop", op=op, args=tuple(args), taint=taint)


_MEMORY_WRITERS = {"CALLDATACOPY", "CODECOPY", "EXTCODECOPY", "RETURNDATACOPY", "MCOPY"}


def _invalidate_memory(state: MachineState, dest: SymValue, length: SymValue) -> None:
    if dest.is_concrete and length.is_concrete:
        lo, hi = dest.value, dest.value + length.value  # type: ignore[operator]
        for off in [o for o in state.memory if o + 32 > lo and o < hi]:
            del state.memory[off]
    else:
        state.memory.clear()
        state.memory_havoc = True


def step(state: MachineState, instr: Instruction) -> MachineState:
    """Execute one instruction against the symbolic state (mutates in place).

    Raises StackUnderflow / DepthOverflow; the caller records the path as
    shape-infeasible and stops.
    """
    spec = instr.spec
    name = spec.mnemonic

    if spec.immediate_len > 0:  # PUSH1..PUSH32
        state.push(concrete(instr.immediate or 0))
        return state
    if name == "PUSH0":
        state.push(concrete(0))
        return state
    if name.startswith("DUP"):
        n = int(name[3:])
        if len(state.stack) < n and not state.pad_on_underflow:
            raise StackUnderflow(f"{name} on stack of {len(state.stack)}")
        while len(state.stack) < n:
            state.stack.insert(0, state.fresh_opaque("UNDERFLOW"))
        state.push(state.stack[-n])
        return state
    if name.startswith("SWAP"):
        n = int(name[4:])
        if len(state.stack) < n + 1 and not state.pad_on_underflow:
            raise StackUnderflow(f"{name} on stack of {len(state.stack)}")
        while len(state.stack) < n + 1:
            state.stack.insert(0, state.fresh_opaque("UNDERFLOW"))
        state.stack[-1], state.stack[-(n + 1)] = state.stack[-(n + 1)], state.stack[-1]
        return state

    if name in _BINARY_OPS:
        a, b = state.pop(), state.pop()
        state.push(_apply_op(name, [a, b]))
        return state
    if name in ("ISZERO", "NOT"):
        state.push(_apply_op(name, [state.pop()]))
        return state
    if name in ("ADDMOD", "MULMOD"):
        args = [state.pop(), state.pop(), state.pop()]
        state.push(_apply_op(name, args))
        return state

    if name == "CALLER":
        state.push(caller())
        return state
    if name == "CALLVALUE":
        state.push(callvalue())
        return state
    if name == "CALLDATALOAD":
        off = state.pop()
        state.push(SymValue(kind="calldataload", args=(off,), taint=off.taint))
        return state

    if name == "SHA3":
        off, length = state.pop(), state.pop()
        words: list[SymValue] | None = []
        if off.is_concrete and length.is_concrete and length.value and length.value % 32 == 0:
            for i in range(0, length.value, 32):  # type: ignore[arg-type]
                word = state.memory.get(off.value + i)  # type: ignore[operator]
                if word is None:
                    words = None
                    break
                words.append(word)
        else:
            words = None
        if words:
            state.push(SymValue(kind="sha3", args=tuple(words), taint=union_taint(*words)))
        else:
            state.push(state.fresh_opaque("SHA3", union_taint(off, length)))
        return state

    if name == "MLOAD":
        off = state.pop()
        if off.is_concrete and off.value in state.memory:
            state.push(state.memory[off.value])
        else:
            state.push(state.fresh_opaque("MLOAD", off.taint))
        return state
    if name == "MSTORE":
        off, value = state.pop(), state.pop()
        if off.is_concrete:
            for stale in [o for o in state.memory if o != off.value and abs(o - off.value) < 32]:  # type: ignore[operator]
                del state.memory[stale]
            state.memory[off.value] = value  # type: ignore[index]
        else:
            state.memory.clear()
            state.memory_havoc = True
        return state
    if name == "MSTORE8":
        off, _value = state.pop(), state.pop()
        if off.is_concrete:
            for stale in [o for o in state.memory if o <= off.value < o + 32]:  # type: ignore[operator]
                del state.memory[stale]
        else:
            state.memory.clear()
            state.memory_havoc = True
        return state
    if name in _MEMORY_WRITERS:
        args = [state.pop() for _ in range(spec.pops)]
        _invalidate_memory(state, args[0], args[-1])
        return state

    if name == "SLOAD":
        slot_expr = state.pop()
        slot = state.slots.canonical(slot_expr)
        state.sload_journal.append((instr.offset, slot))
        state.push(
            SymValue(kind="sload", args=(slot,), taint=frozenset({TAINT_STORAGE}))
        )
        return state
    if name == "SSTORE":
        slot_expr, value = state.pop(), state.pop()
        slot = state.slots.canonical(slot_expr)
        state.transient_storage_writes.append((slot, value))
        state.sstore_journal.append(
            SStoreOp(offset=instr.offset, slot=slot, slot_expr=slot_expr, value=value)
        )
        return state

    if name == "CALL":
        _gas, target, value = state.pop(), state.pop(), state.pop()
        for _ in range(4):  # in/out memory ranges
            state.pop()
        state.call_journal.append(CallOp(offset=instr.offset, target=target, value=value))
        state.push(state.fresh_opaque("CALL"))  # success flag stays symbolic
        return state

    # everything else follows its table arity with opaque results
    args = [state.pop() for _ in range(spec.pops)]
    for _ in range(spec.pushes):
        state.push(state.fresh_opaque(name, union_taint(*args)))
    return state


def collect_sload_slots(v: SymValue) -> frozenset[StorageSlot]:
    """Slots appearing inside sload sub-terms of an expression."""
    out: set[StorageSlot] = set()
    stack = [v]
    while stack:
        cur = stack.pop()
        if cur.kind == "sload":
            out.add(cur.args[0])
        elif cur.kind in ("binop", "sha3", "calldataload"):
            stack.extend(a for a in cur.args if isinstance(a, SymValue))
    return frozenset(out)


@dataclass(frozen=True)
class InvestEvent:
    """Caller-derived data persisted to storage."""

    block_id: int
    offset: int
    slot: StorageSlot
    stored_value: SymValue
    via: str  # value | key | both


@dataclass(frozen=True)
class RewardEvent:
    """Ether transfer whose target was read from storage."""

    block_id: int
    offset: int
    target: SymValue
    value: SymValue
    target_slots: frozenset[StorageSlot]
    value_taint: frozenset[str]


@dataclass(frozen=True)
class PathEffects:
    invest_events: tuple[InvestEvent, ...]
    reward_events: tuple[RewardEvent, ...]
    touched_slots_read: frozenset[StorageSlot]
    touched_slots_written: frozenset[StorageSlot]
    feasible_shape: bool


def execute_path(
    cfg,
    block_sequence: list[int],
    canon: SlotCanonicalizer | None = None,
) -> PathEffects:
    """Run one entry-to-terminator block sequence and extract its effects.

    An SSTORE is an invest event iff caller taint reaches the stored value or
    the slot's hash preimage; a CALL is a reward event iff its target is
    storage-derived. Stack-shape violations yield feasible_shape=False rather
    than an error.
    """
    if not block_sequence:
        raise DisconnectedSequence("empty block sequence")
    if block_sequence[0] != cfg.entry:
        raise DisconnectedSequence(f"sequence starts at {block_sequence[0]}, not entry")
    edge_pairs = {(e.from_id, e.to_id) for e in cfg.edges}
    for a, b in zip(block_sequence, block_sequence[1:]):
        if (a, b) not in edge_pairs:
            raise DisconnectedSequence(f"no edge {a} -> {b}")

    state = MachineState(slots=canon or SlotCanonicalizer())
    offset_to_block = {
        ins.offset: block.id for block in cfg.blocks for ins in block.instructions
    }
    feasible = True
    for block_id in block_sequence:
        block = cfg.blocks[block_id]
        try:
            for ins in block.instructions:
                step(state, ins)
        except (StackUnderflow, DepthOverflow):
            feasible = False
            break

    invest = []
    for op in state.sstore_journal:
        via_value = TAINT_CALLER in op.value.taint
        via_key = TAINT_CALLER in op.slot_expr.taint
        if via_value or via_key:
            invest.append(
                InvestEvent(
                    block_id=offset_to_block[op.offset],
                    offset=op.offset,
                    slot=op.slot,
                    stored_value=op.value,
                    via="both" if via_value and via_key else ("value" if via_value else "key"),
                )
            )
    reward = []
    for op in state.call_journal:
        if TAINT_STORAGE in op.target.taint:
            reward.append(
                RewardEvent(
                    block_id=offset_to_block[op.offset],
                    offset=op.offset,
                    target=op.target,
                    value=op.value,
                    target_slots=collect_sload_slots(op.target),
                    value_taint=op.value.taint,
                )
            )
    return PathEffects(
        invest_events=tuple(invest),
        reward_events=tuple(reward),
        touched_slots_read=frozenset(s for _, s in state.sload_journal),
        touched_slots_written=frozenset(op.slot for op in state.sstore_journal),
        feasible_shape=feasible,
    )
