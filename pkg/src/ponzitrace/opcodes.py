"""EVM instruction table: mnemonics, stack arity, immediates, control-flow roles."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

# byte: (mnemonic, immediate_len, pops, pushes), per the yellow paper /
# current mainnet instruction set.  Unassigned bytes decode as INVALID.
_TABLE: dict[int, tuple[str, int, int, int]] = {
    0x00: ("STOP", 0, 0, 0),
    0x01: ("ADD", 0, 2, 1),
    0x02: ("MUL", 0, 2, 1),
    0x03: ("SUB", 0, 2, 1),
    0x04: ("DIV", 0, 2, 1),
    0x05: ("SDIV", 0, 2, 1),
    0x06: ("MOD", 0, 2, 1),
    0x07: ("SMOD", 0, 2, 1),
    0x08: ("ADDMOD", 0, 3, 1),
    0x09: ("MULMOD", 0, 3, 1),
    0x0A: ("EXP", 0, 2, 1),
    0x0B: ("SIGNEXTEND", 0, 2, 1),
    0x10: ("LT", 0, 2, 1),
    0x11: ("GT", 0, 2, 1),
    0x12: ("SLT", 0, 2, 1),
    0x13: ("SGT", 0, 2, 1),
    0x14: ("EQ", 0, 2, 1),
    0x15: ("ISZERO", 0, 1, 1),
    0x16: ("AND", 0, 2, 1),
    0x17: ("OR", 0, 2, 1),
    0x18: ("XOR", 0, 2, 1),
    0x19: ("NOT", 0, 1, 1),
    0x1A: ("BYTE", 0, 2, 1),
    0x1B: ("SHL", 0, 2, 1),
    0x1C: ("SHR", 0, 2, 1),
    0x1D: ("SAR", 0, 2, 1),
    0x20: ("SHA3", 0, 2, 1),
    0x30: ("ADDRESS", 0, 0, 1),
    0x31: ("BALANCE", 0, 1, 1),
    0x32: ("ORIGIN", 0, 0, 1),
    0x33: ("CALLER", 0, 0, 1),
    0x34: ("CALLVALUE", 0, 0, 1),
    0x35: ("CALLDATALOAD", 0, 1, 1),
    0x36: ("CALLDATASIZE", 0, 0, 1),
    0x37: ("CALLDATACOPY", 0, 3, 0),
    0x38: ("CODESIZE", 0, 0, 1),
    0x39: ("CODECOPY", 0, 3, 0),
    0x3A: ("GASPRICE", 0, 0, 1),
    0x3B: ("EXTCODESIZE", 0, 1, 1),
    0x3C: ("EXTCODECOPY", 0, 4, 0),
    0x3D: ("RETURNDATASIZE", 0, 0, 1),
    0x3E: ("RETURNDATACOPY", 0, 3, 0),
    0x3F: ("EXTCODEHASH", 0, 1, 1),
    0x40: ("BLOCKHASH", 0, 1, 1),
    0x41: ("COINBASE", 0, 0, 1),
    0x42: ("TIMESTAMP", 0, 0, 1),
    0x43: ("NUMBER", 0, 0, 1),
    0x44: ("PREVRANDAO", 0, 0, 1),
    0x45: ("GASLIMIT", 0, 0, 1),
    0x46: ("CHAINID", 0, 0, 1),
    0x47: ("SELFBALANCE", 0, 0, 1),
    0x48: ("BASEFEE", 0, 0, 1),
    0x49: ("BLOBHASH", 0, 1, 1),
    0x4A: ("BLOBBASEFEE", 0, 0, 1),
    0x50: ("POP", 0, 1, 0),
    0x51: ("MLOAD", 0, 1, 1),
    0x52: ("MSTORE", 0, 2, 0),
    0x53: ("MSTORE8", 0, 2, 0),
    0x54: ("SLOAD", 0, 1, 1),
    0x55: ("SSTORE", 0, 2, 0),
    0x56: ("JUMP", 0, 1, 0),
    0x57: ("JUMPI", 0, 2, 0),
    0x58: ("PC", 0, 0, 1),
    0x59: ("MSIZE", 0, 0, 1),
    0x5A: ("GAS", 0, 0, 1),
    0x5B: ("JUMPDEST", 0, 0, 0),
    0x5C: ("TLOAD", 0, 1, 1),
    0x5D: ("TSTORE", 0, 2, 0),
    0x5E: ("MCOPY", 0, 3, 0),
    0x5F: ("PUSH0", 0, 0, 1),
    0xF0: ("CREATE", 0, 3, 1),
    0xF1: ("CALL", 0, 7, 1),
    0xF2: ("CALLCODE", 0, 7, 1),
    0xF3: ("RETURN", 0, 2, 0),
    0xF4: ("DELEGATECALL", 0, 6, 1),
    0xF5: ("CREATE2", 0, 4, 1),
    0xFA: ("STATICCALL", 0, 6, 1),
    0xFD: ("REVERT", 0, 2, 0),
    0xFE: ("INVALID", 0, 0, 0),
    0xFF: ("SELFDESTRUCT", 0, 1, 0),
}

for _n in range(1, 33):  # PUSH1..PUSH32
    _TABLE[0x5F + _n] = (f"PUSH{_n}", _n, 0, 1)
for _n in range(1, 17):  # DUP1..DUP16, SWAP1..SWAP16
    _TABLE[0x7F + _n] = (f"DUP{_n}", 0, _n, _n + 1)
    _TABLE[0x8F + _n] = (f"SWAP{_n}", 0, _n + 1, _n + 1)
for _n in range(0, 5):  # LOG0..LOG4
    _TABLE[0xA0 + _n] = (f"LOG{_n}", 0, _n + 2, 0)

# Instructions that end a basic block with no fallthrough successor.
TERMINATORS = frozenset(
    {"STOP", "RETURN", "REVERT", "SELFDESTRUCT", "INVALID", "JUMP"}
)


@dataclass(frozen=True)
class OpcodeSpec:
    """Static description of one opcode byte."""

    byte_value: int
    mnemonic: str
    pops: int
    pushes: int
    immediate_len: int
    is_terminator: bool
    is_jump: bool
    is_conditional_jump: bool

    @property
    def is_push(self) -> bool:
        return self.immediate_len > 0 or self.mnemonic == "PUSH0"


@lru_cache(maxsize=256)
def opcode_spec(byte_value: int) -> OpcodeSpec:
    """Total lookup: unassigned byte values decode as INVALID terminators."""
    if not 0 <= byte_value <= 255:
        raise ValueError(f"opcode byte out of range: {byte_value}")
    mnemonic, imm, pops, pushes = _TABLE.get(byte_value, ("INVALID", 0, 0, 0))
    return OpcodeSpec(
        byte_value=byte_value,
        mnemonic=mnemonic,
        pops=pops,
        pushes=pushes,
        immediate_len=imm,
        is_terminator=mnemonic in TERMINATORS,
        is_jump=mnemonic == "JUMP",
        is_conditional_jump=mnemonic == "JUMPI",
    )


def mnemonic_to_byte(mnemonic: str) -> int:
    """Reverse lookup used by the assembler; raises KeyError for unknown names."""
    for byte_value, (name, _, _, _) in _TABLE.items():
        if name == mnemonic:
            return byte_value
    raise KeyError(mnemonic)
