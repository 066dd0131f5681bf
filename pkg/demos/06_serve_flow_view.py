"""
Serving reports and the interactive flow view
=============================================

Starts the read-only HTTP surface on an ephemeral port, fetches the two API
payloads the UI consumes, and prints where to point a browser. Build the
frontend first (see frontend/README.md) to get the interactive view at /;
the API works without it.
"""

import json
import threading
import urllib.request
from pathlib import Path

from ponzitrace.server import AnalysisService, make_server

dist = Path(__file__).resolve().parent.parent / "frontend" / "dist"
service = AnalysisService()
server = make_server(service, port=0, static_dir=dist if dist.is_dir() else None)
threading.Thread(target=server.serve_forever, daemon=True).start()
base = f"http://127.0.0.1:{server.server_address[1]}"

with urllib.request.urlopen(f"{base}/api/report?fixture=scenario1") as response:
    report = json.loads(response.read())
with urllib.request.urlopen(f"{base}/api/opcodes?fixture=scenario1") as response:
    opcodes = json.loads(response.read())

print(f"report: verdict={report['verdict']}, {len(report['aggregates'])} aggregated paths")
print(f"opcode list: {len(opcodes['blocks'])} blocks")
if dist.is_dir():
    print(f"\nflow view is up: {base}/?fixture=scenario1  (Ctrl-C to stop)")
    try:
        threading.Event().wait()
    except KeyboardInterrupt:
        pass
else:
    print("\nfrontend/dist not built; API demonstrated, skipping the browser part")
server.shutdown()
