"""
The two structural characteristics, end to end
==============================================

C1: some aggregated path both stores caller-derived data and sends Ether,
    on the same storage slot.
C2: a rewarding aggregate contains a loop with a CALL inside.

Both satisfied -> ponzi_candidate; one -> suspicious; neither ->
no_ponzi_evidence. Compare the confirmed pyramid-payout fixture with the
donation-forwarding charity fixture.
"""

from ponzitrace import analyze_bytecode
from ponzitrace.detect import abbreviate_key
from ponzitrace.ingest import load_fixture

for name in ("scenario1", "scenario2"):
    ref, code = load_fixture(name)
    contract = {"name": name, "address": ref.address, "chain": ref.chain, "code_hash": None}
    report = analyze_bytecode(code, contract)

    print(f"== {name} ({ref.address})")
    print(f"   aggregates: {len(report.aggregates)}")
    print(f"   C1 shared invest/reward slot: {report.c1.satisfied}")
    for e in report.c1.evidence:
        print(f"     Path{e.aggregate_index} on slot {abbreviate_key(e.shared_slot)}")
    print(f"   C2 payout loop with CALL:     {report.c2.satisfied}")
    for e in report.c2.evidence:
        print(f"     Path{e.aggregate_index} loops at block {e.loop_header}")
    print(f"   verdict: {report.verdict}\n")
