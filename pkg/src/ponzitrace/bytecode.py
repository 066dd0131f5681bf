"""Hex parsing and linear-sweep disassembly of EVM contract code."""

from __future__ import annotations

from dataclasses import dataclass, field

from .opcodes import OpcodeSpec, opcode_spec


class BytecodeError(ValueError):
    """Base class for parse/disassembly failures."""


class EmptyBytecode(BytecodeError):
    pass


class OddLength(BytecodeError):
    pass


class NonHexCharacter(BytecodeError):
    def __init__(self, char: str, position: int):
        super().__init__(f"non-hex character {char!r} at position {position}")
        self.char = char
        self.position = position


@dataclass(frozen=True)
class Bytecode:
    """Raw contract code plus where it came from."""

    code: bytes
    source: str = "inline"  # fixture | explorer | inline

    def __len__(self) -> int:
        return len(self.code)

    def hex(self) -> str:
        return self.code.hex()


@dataclass(frozen=True)
class Instruction:
    """One decoded instruction.

    `immediate` is zero-padded on the low side when the PUSH data runs past
    the end of code; `immediate_bytes_present` records how many immediate
    bytes actually existed so re-encoding is exact.
    """

    offset: int
    spec: OpcodeSpec
    immediate: int | None = None
    truncated: bool = False
    immediate_bytes_present: int = field(default=0)

    @property
    def size(self) -> int:
        return 1 + self.spec.immediate_len

    @property
    def mnemonic(self) -> str:
        return self.spec.mnemonic

    def immediate_hex(self) -> str | None:
        if self.immediate is None:
            return None
        return "0x" + format(self.immediate, f"0{self.spec.immediate_len * 2}x")

    def __str__(self) -> str:
        if self.immediate is not None:
            return f"{self.mnemonic} {self.immediate_hex()}"
        return self.mnemonic


def parse_hex(text: str, source: str = "inline") -> Bytecode:
    """Parse hex text ("0x" prefix optional, case-insensitive, whitespace ignored)."""
    stripped = "".join(text.split())
    if stripped[:2].lower() == "0x":
        stripped = stripped[2:]
    if not stripped:
        raise EmptyBytecode("no hex digits in input")
    if len(stripped) % 2 != 0:
        raise OddLength(f"odd number of hex digits: {len(stripped)}")
    for i, ch in enumerate(stripped):
        if ch not in "0123456789abcdefABCDEF":
            raise NonHexCharacter(ch, i)
    return Bytecode(code=bytes.fromhex(stripped), source=source)


def disassemble(code: Bytecode | bytes) -> list[Instruction]:
    """Linear sweep from offset 0; PUSH immediates are consumed as data.

    Total on non-empty input: unassigned bytes decode as INVALID, and a PUSH
    whose immediate runs past end-of-code is emitted zero-padded with
    truncated=True, ending the sweep.
    """
    raw = code.code if isinstance(code, Bytecode) else bytes(code)
    if not raw:
        raise EmptyBytecode("cannot disassemble empty code")
    out: list[Instruction] = []
    offset = 0
    while offset < len(raw):
        spec = opcode_spec(raw[offset])
        if spec.immediate_len == 0:
            out.append(Instruction(offset=offset, spec=spec))
            offset += 1
            continue
        data = raw[offset + 1 : offset + 1 + spec.immediate_len]
        padded = data + b"\x00" * (spec.immediate_len - len(data))
        out.append(
            Instruction(
                offset=offset,
                spec=spec,
                immediate=int.from_bytes(padded, "big"),
                truncated=len(data) < spec.immediate_len,
                immediate_bytes_present=len(data),
            )
        )
        offset += 1 + spec.immediate_len
    return out


def reencode(instructions: list[Instruction]) -> bytes:
    """Inverse of disassemble; truncation padding is dropped, not emitted."""
    parts = []
    for ins in instructions:
        parts.append(bytes([ins.spec.byte_value]))
        if ins.spec.immediate_len:
            assert ins.immediate is not None
            full = ins.immediate.to_bytes(ins.spec.immediate_len, "big")
            parts.append(full[: ins.immediate_bytes_present] if ins.truncated else full)
    return b"".join(parts)
