"""Deterministic JSON form of the analysis report.

One canonical rendering: keys sorted, two-space indent, trailing newline,
integers at or above 2**53 emitted as decimal strings so the document
survives lossy numeric parsers.
"""

from __future__ import annotations

import json
from typing import Any

from .detect import AnalysisReport, abbreviate_key

SAFE_INT_LIMIT = 1 << 53


def report_to_dict(report: AnalysisReport) -> dict:
    return {
        "schema_version": report.schema_version,
        "tool": report.tool,
        "contract": report.contract,
        "code_kind": report.code_kind,
        "bounds": report.bounds,
        "cfg_summary": report.cfg_summary,
        "aggregates": report.aggregates,
        "storage_slots": report.storage_slots,
        "c1": {
            "satisfied": report.c1.satisfied,
            "evidence": [
                {
                    "aggregate_index": e.aggregate_index,
                    "shared_slot": e.shared_slot,
                    "shared_slot_display": abbreviate_key(e.shared_slot),
                    "invest_ref": {"block": e.invest_ref[0], "offset": e.invest_ref[1]},
                    "reward_ref": {"block": e.reward_ref[0], "offset": e.reward_ref[1]},
                }
                for e in report.c1.evidence
            ],
        },
        "c2": {
            "satisfied": report.c2.satisfied,
            "evidence": [
                {"aggregate_index": e.aggregate_index, "loop_header": e.loop_header}
                for e in report.c2.evidence
            ],
        },
        "verdict": report.verdict,
        "verdict_is_extension": report.verdict_is_extension,
        "diagnostics": report.diagnostics,
    }


def _portable(value: Any) -> Any:
    if isinstance(value, bool):
        return value
    if isinstance(value, int) and abs(value) >= SAFE_INT_LIMIT:
        return str(value)
    if isinstance(value, dict):
        return {k: _portable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_portable(v) for v in value]
    return value


def dumps(document: dict) -> str:
    return json.dumps(_portable(document), indent=2, sort_keys=True) + "\n"


def to_json(report: AnalysisReport) -> str:
    return dumps(report_to_dict(report))


def from_json(text: str) -> dict:
    return json.loads(text)
