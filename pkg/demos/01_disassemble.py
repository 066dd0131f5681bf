"""
Disassembling contract code
===========================

Hex text in, typed instruction stream out. Unknown bytes decode as INVALID
and a PUSH running past the end of code is zero-padded and flagged, so the
sweep never aborts on real-world code with metadata trailers.
"""

from ponzitrace import disassemble, parse_hex

# a tiny program: PUSH1 0x01, PUSH1 0x02, ADD, STOP
code = parse_hex("0x60016002 0100")
for ins in disassemble(code):
    print(f"{ins.offset:4d}  {ins}")

# the same API handles a bundled real fixture
from ponzitrace.ingest import load_fixture

ref, code = load_fixture("scenario1")
listing = disassemble(code)
print(f"\n{ref.address}: {len(code.code)} bytes, {len(listing)} instructions")
print("first five:", ", ".join(str(i) for i in listing[:5]))
