"""Tiny two-pass EVM assembler used to build fixtures and test programs.

A program is a list of items:
  "MNEMONIC"             plain instruction
  "name:"                label definition (emits nothing)
  ("PUSHn", value)       push with an integer immediate
  ("PUSHn", "@name")     push a label's byte offset (size must fit)
"""

from __future__ import annotations

from .opcodes import mnemonic_to_byte, opcode_spec

Item = str | tuple[str, int | str]


def _encode(mnemonic: str, value: int) -> bytes:
    byte = mnemonic_to_byte(mnemonic)
    width = opcode_spec(byte).immediate_len
    if width == 0:
        raise ValueError(f"{mnemonic} takes no immediate")
    if value < 0 or value >= 1 << (8 * width):
        raise ValueError(f"immediate {value:#x} does not fit {mnemonic}")
    return bytes([byte]) + value.to_bytes(width, "big")


def assemble(items: list[Item]) -> bytes:
    labels: dict[str, int] = {}
    offset = 0
    for item in items:
        if isinstance(item, str):
            if item.endswith(":"):
                name = item[:-1]
                if name in labels:
                    raise ValueError(f"duplicate label {name}")
                labels[name] = offset
            else:
                offset += 1
        else:
            mnemonic, _ = item
            offset += 1 + opcode_spec(mnemonic_to_byte(mnemonic)).immediate_len

    out = bytearray()
    for item in items:
        if isinstance(item, str):
            if item.endswith(":"):
                continue
            out.append(mnemonic_to_byte(item))
        else:
            mnemonic, value = item
            if isinstance(value, str):
                if not value.startswith("@"):
                    raise ValueError(f"bad label reference {value!r}")
                value = labels[value[1:]]
            out += _encode(mnemonic, value)
    return bytes(out)
