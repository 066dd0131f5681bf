"""The two Ponzi characteristics, their evidence, and report assembly.

C1: some aggregated path both persists caller-derived data and pays out, on
the same storage slot. C2: some rewarding aggregate runs a loop containing an
Ether transfer. The combined three-level verdict is a tool extension (the
characteristics themselves stay the primary output) and is flagged as such in
the report.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cfg import Cfg
from .paths import AggregatedPath
from .symexec import StorageSlot

PONZI_CANDIDATE = "ponzi_candidate"
SUSPICIOUS = "suspicious"
NO_PONZI_EVIDENCE = "no_ponzi_evidence"

_SLOT_KIND_LABEL = {
    "state_variable": "state_variable",
    "hashed": "array_or_mapping",
    "unknown": "unknown",
}


@dataclass(frozen=True)
class C1Evidence:
    aggregate_index: int
    shared_slot: str  # canonical key
    invest_ref: tuple[int, int]  # (block id, instruction offset)
    reward_ref: tuple[int, int]


@dataclass(frozen=True)
class C1Verdict:
    satisfied: bool
    evidence: tuple[C1Evidence, ...]


@dataclass(frozen=True)
class C2Evidence:
    aggregate_index: int
    loop_header: int


@dataclass(frozen=True)
class C2Verdict:
    satisfied: bool
    evidence: tuple[C2Evidence, ...]


def evaluate_c1(aggregates: list[AggregatedPath]) -> C1Verdict:
    """Shared-slot check over aggregates that both invest and reward.

    Unknown-kind slots never match: equating two opaque slot expressions
    would manufacture evidence.
    """
    evidence: list[C1Evidence] = []
    for agg in aggregates:
        if not (agg.is_investing and agg.is_rewarding):
            continue
        invest_slots: dict[StorageSlot, tuple[int, int]] = {}
        reward_slots: dict[StorageSlot, tuple[int, int]] = {}
        for member in agg.member_paths:
            for iev in member.effects.invest_events:
                if iev.slot.kind != "unknown":
                    invest_slots.setdefault(iev.slot, (iev.block_id, iev.offset))
            for rev in member.effects.reward_events:
                for slot in rev.target_slots:
                    if slot.kind != "unknown":
                        reward_slots.setdefault(slot, (rev.block_id, rev.offset))
        shared = set(invest_slots) & set(reward_slots)
        for slot in sorted(shared, key=lambda s: s.canonical_key):
            evidence.append(
                C1Evidence(
                    aggregate_index=agg.index,
                    shared_slot=slot.canonical_key,
                    invest_ref=invest_slots[slot],
                    reward_ref=reward_slots[slot],
                )
            )
    evidence.sort(key=lambda e: (e.aggregate_index, e.shared_slot))
    return C1Verdict(satisfied=bool(evidence), evidence=tuple(evidence))


def evaluate_c2(aggregates: list[AggregatedPath]) -> C2Verdict:
    """A rewarding aggregate carrying a CALL-bearing loop annotation."""
    evidence: list[C2Evidence] = []
    for agg in aggregates:
        if not agg.is_rewarding:
            continue
        for ann in agg.loop_annotations:
            if ann.contains_call:
                evidence.append(C2Evidence(aggregate_index=agg.index, loop_header=ann.header))
    evidence = sorted(set(evidence), key=lambda e: (e.aggregate_index, e.loop_header))
    return C2Verdict(satisfied=bool(evidence), evidence=tuple(evidence))


def verdict_of(c1: C1Verdict, c2: C2Verdict) -> str:
    if c1.satisfied and c2.satisfied:
        return PONZI_CANDIDATE
    if c1.satisfied or c2.satisfied:
        return SUSPICIOUS
    return NO_PONZI_EVIDENCE


def abbreviate_key(key: str) -> str:
    """Display form of a canonical slot key: long keys render first-3 digits
    + "..." + last-2 digits (matching how huge hash-derived slot numbers are
    usually quoted); short keys render verbatim."""
    if len(key) <= 8:
        return key
    digits = [c for c in key if c.isdigit()]
    if len(digits) >= 6:
        return "".join(digits[:3]) + "..." + "".join(digits[-2:])
    return key[:3] + "..." + key[-2:]


@dataclass
class AnalysisReport:
    """Everything the flow view renders, plus the verdict and diagnostics."""

    schema_version: str
    tool: dict
    contract: dict
    code_kind: str
    bounds: dict
    cfg_summary: dict
    aggregates: list[dict]
    storage_slots: list[dict]
    c1: C1Verdict
    c2: C2Verdict
    verdict: str
    verdict_is_extension: bool
    diagnostics: list[str]


def build_report(
    contract_ref: dict,
    cfg: Cfg,
    aggregates: list[AggregatedPath],
    slots: list[StorageSlot],
    c1: C1Verdict,
    c2: C2Verdict,
    *,
    bounds: dict,
    diagnostics: list[str],
    tool_version: str,
) -> AnalysisReport:
    """Assemble the deterministic report: aggregates by index, slots by
    canonical key, diagnostics lexicographic."""
    slot_rows = []
    for slot in sorted({s.canonical_key: s for s in slots}.values(), key=lambda s: s.canonical_key):
        read_by = sorted(a.index for a in aggregates if slot.canonical_key in a.slots_read)
        written_by = sorted(a.index for a in aggregates if slot.canonical_key in a.slots_written)
        slot_rows.append(
            {
                "canonical_key": slot.canonical_key,
                "display_key": abbreviate_key(slot.canonical_key),
                "kind": _SLOT_KIND_LABEL[slot.kind],
                "read_by": read_by,
                "written_by": written_by,
            }
        )

    agg_rows = []
    for agg in sorted(aggregates, key=lambda a: a.index):
        agg_rows.append(
            {
                "index": agg.index,
                "name": agg.name,
                "is_investing": agg.is_investing,
                "is_rewarding": agg.is_rewarding,
                "member_count": len(agg.member_paths),
                "blocks": sorted(agg.union_blocks),
                "edges": [list(e) for e in sorted(agg.union_edges)],
                "slots_written": sorted(agg.slots_written),
                "slots_read": sorted(agg.slots_read),
                "loops": [
                    {
                        "header": ann.header,
                        "body": sorted(ann.body),
                        "contains_call": ann.contains_call,
                        "unroll_count_used": ann.unroll_count_used,
                    }
                    for ann in agg.loop_annotations
                ],
                "signature": [list(_jsonable_sig(d)) for d in agg.signature],
            }
        )

    return AnalysisReport(
        schema_version="1",
        tool={"name": "ponzitrace", "version": tool_version},
        contract=dict(contract_ref),
        code_kind="deployed-runtime",
        bounds=dict(bounds),
        cfg_summary={
            "block_count": len(cfg.blocks),
            "edge_count": len(cfg.edges),
            "unresolved_jump_count": len(cfg.unresolved_jumps),
        },
        aggregates=agg_rows,
        storage_slots=slot_rows,
        c1=c1,
        c2=c2,
        verdict=verdict_of(c1, c2),
        verdict_is_extension=True,
        diagnostics=sorted(diagnostics),
    )


def _jsonable_sig(descriptor: tuple) -> tuple:
    return tuple(list(x) if isinstance(x, tuple) else x for x in descriptor)
