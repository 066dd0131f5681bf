#!/usr/bin/env python3
"""Regenerate the bundled contract fixtures.

The two scenario contracts are hand-assembled offline reconstructions of the
invest/reward flow structure of well-known on-chain contracts (a confirmed
pyramid-payout scheme and a donation-forwarding charity); this sandbox has no
chain access, so the bytecode is rebuilt rather than captured, and the
fixture headers say so. Deterministic: run twice, same bytes.

Usage: python tools/make_fixtures.py [dest_dir]
"""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ponzitrace.asm import assemble
from ponzitrace.ingest import CacheEntry

# Precomputed storage constants (keccak images, computed offline):
#   PARTICIPANT_SLOT = keccak256(bytes32(0)) + 47   -> element 47 of the
#     dynamic array rooted at slot 0; decimal renders 185...94
#   CAMPAIGN_BASE    = keccak256(bytes32(689)) + 56 -> base of a nested
#     dynamic region; decimal renders 146...97
PARTICIPANT_SLOT = 0x290DECD9548B62A8D60345A988386FC84BA6BC95484008F6362F93160EF3E592
CAMPAIGN_BASE = 0x2047E5D37AEEF620CF449C11B79C459F3B5978EA25B26ACE404EC64929A22621

SELECTOR_SHIFT = 1 << 224  # DIV by 2^224 extracts the 4-byte selector

SEL_DEPOSIT = 0xD0E30DB0
SEL_REINVEST = 0x05B1137B
SEL_COLLECT = 0x06F5B4BA
SEL_DONATE = 0xED88C68E
SEL_PLEDGE = 0x63852CBC

SEND_GAS = 0x8FC


def _dispatch(selectors: list[tuple[int, str]]) -> list:
    """Classic pre-0.4.22 dispatcher: selector = calldata[0] / 2**224."""
    items: list = [
        ("PUSH1", 0x00),
        "CALLDATALOAD",
        ("PUSH29", SELECTOR_SHIFT),  # 0x01 followed by 28 zero bytes
        "SWAP1",
        "DIV",
    ]
    for selector, label in selectors:
        items += ["DUP1", ("PUSH4", selector), "EQ", ("PUSH2", f"@{label}"), "JUMPI"]
    items += ["STOP"]  # no match: accept and do nothing
    return items


def _call(value_items: list, target_items: list) -> list:
    """CALL argument setup: out/in ranges are empty, gas is the send stipend."""
    return (
        [("PUSH1", 0x00)] * 4
        + value_items
        + target_items
        + [("PUSH2", SEND_GAS), "CALL", "POP"]
    )


def scenario1() -> bytes:
    """Pyramid payout: every entry point registers the caller and then pays
    prior participants out of the same slot in a CALL loop."""
    items: list = _dispatch(
        [(SEL_DEPOSIT, "deposit"), (SEL_REINVEST, "reinvest"), (SEL_COLLECT, "collect")]
    )
    # deposit(n): participants[47] = caller; loop paying from the same slot
    items += [
        "deposit:",
        "JUMPDEST",
        "POP",
        "CALLER",
        ("PUSH32", PARTICIPANT_SLOT),
        "SSTORE",
        ("PUSH1", 0x00),  # payout counter
    ]
    items += [
        "payout:",
        "JUMPDEST",
    ]
    items += _call(
        [("PUSH1", 0x01)],
        [("PUSH32", PARTICIPANT_SLOT), "SLOAD"],
    )
    items += [
        ("PUSH1", 0x01),
        "ADD",
        "DUP1",
        ("PUSH1", 0x04),
        "CALLDATALOAD",
        "GT",
        ("PUSH2", "@payout"),
        "JUMPI",
        "POP",
        "STOP",
    ]
    # reinvest(n): also records the caller as last depositor, then shares the
    # payout loop
    items += [
        "reinvest:",
        "JUMPDEST",
        "POP",
        "CALLER",
        ("PUSH1", 0x02),
        "SSTORE",
        "CALLER",
        ("PUSH32", PARTICIPANT_SLOT),
        "SSTORE",
        ("PUSH1", 0x00),
        ("PUSH2", "@payout"),
        "JUMP",
    ]
    # collect(): records the caller, pays the owner address at slot 3 once
    items += [
        "collect:",
        "JUMPDEST",
        "POP",
        "CALLER",
        ("PUSH1", 0x04),
        "SSTORE",
    ]
    items += _call(["CALLVALUE"], [("PUSH1", 0x03), "SLOAD"])
    items += ["STOP"]
    return assemble(items)


def scenario2() -> bytes:
    """Donation forwarder: donors are recorded in a mapping keyed by caller,
    funds go straight to the campaign address held in one array region;
    no payout loop, no shared slot."""
    items: list = _dispatch([(SEL_DONATE, "donate"), (SEL_PLEDGE, "pledge")])
    items += [
        "donate:",
        "JUMPDEST",
        "POP",
        # donations[caller] = callvalue
        "CALLER",
        ("PUSH1", 0x00),
        "MSTORE",
        ("PUSH1", 0x01),
        ("PUSH1", 0x20),
        "MSTORE",
        "CALLVALUE",
        ("PUSH1", 0x40),
        ("PUSH1", 0x00),
        "SHA3",
        "SSTORE",
    ]
    # forward the donation to campaigns[i].beneficiary
    items += (
        [("PUSH1", 0x00)] * 4
        + [
            "CALLVALUE",
            ("PUSH32", CAMPAIGN_BASE),
            ("PUSH1", 0x00),
            "MSTORE",
            ("PUSH1", 0x20),
            ("PUSH1", 0x00),
            "SHA3",
            ("PUSH1", 0x04),
            "CALLDATALOAD",
            "ADD",
            "SLOAD",
            ("PUSH2", SEND_GAS),
            "CALL",
            "POP",
        ]
    )
    items += ["STOP"]
    items += [
        "pledge:",
        "JUMPDEST",
        "POP",
        "CALLER",
        ("PUSH1", 0x05),
        "SSTORE",
        "STOP",
    ]
    return assemble(items)


def micro_ponzi() -> bytes:
    """Minimal positive control: register caller at slot 0, then a CALL loop
    paying the address read back from slot 0."""
    items: list = [
        "CALLER",
        ("PUSH1", 0x00),
        "SSTORE",
        ("PUSH1", 0x00),
        "pay:",
        "JUMPDEST",
    ]
    items += _call([("PUSH1", 0x01)], [("PUSH1", 0x00), "SLOAD"])
    items += [
        ("PUSH1", 0x01),
        "ADD",
        "DUP1",
        ("PUSH1", 0x00),
        "CALLDATALOAD",
        "GT",
        ("PUSH2", "@pay"),
        "JUMPI",
        "POP",
        "STOP",
    ]
    return assemble(items)


FIXTURES = {
    "scenario1": (
        scenario1,
        "0x0b230b071008bbb145b5bff27db01c9248f486b9",
        "hand-assembled offline reconstruction of the on-chain contract's invest/reward flow structure",
    ),
    "scenario2": (
        scenario2,
        "0x10ec03b714a2660581040c1a0329d88e381ca603",
        "hand-assembled offline reconstruction of the on-chain contract's invest/reward flow structure",
    ),
    "micro_ponzi": (
        micro_ponzi,
        "0x00000000000000000000000000000000000000a1",
        "hand-assembled positive control, never deployed",
    ),
}


def write_fixtures(dest: Path) -> None:
    dest.mkdir(parents=True, exist_ok=True)
    for name, (build, address, note) in FIXTURES.items():
        code = build()
        body = code.hex()
        wrapped = "\n".join(body[i : i + 64] for i in range(0, len(body), 64))
        text = (
            f"address: {address}\n"
            f"chain: ethereum-mainnet\n"
            f"fetched_at: 2026-08-10T00:00:00Z\n"
            f"code_hash: {CacheEntry.digest(code)}\n"
            f"note: {note}\n"
            f"\n{wrapped}\n"
        )
        (dest / f"{name}.hex").write_text(text)
        print(f"{name}: {len(code)} bytes, {CacheEntry.digest(code)}")


if __name__ == "__main__":
    dest = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        Path(__file__).resolve().parent.parent / "src" / "ponzitrace" / "fixtures"
    )
    write_fixtures(dest)
