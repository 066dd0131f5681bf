"""Command-line entry point: analyze, serve, fetch.

Exit status of `analyze` encodes the verdict: 0 no_ponzi_evidence,
2 suspicious, 3 ponzi_candidate; 1 is an operational error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bytecode import BytecodeError, parse_hex
from .detect import NO_PONZI_EVIDENCE, PONZI_CANDIDATE, SUSPICIOUS
from .ingest import (
    CacheEntry,
    ContractRef,
    IngestError,
    ProviderConfig,
    fetch_bytecode,
    load_cache_entry,
    load_fixture,
)
from .paths import Bounds
from .pipeline import analyze_bytecode
from .report import to_json
from .server import AnalysisService, serve_forever

VERDICT_EXIT = {NO_PONZI_EVIDENCE: 0, SUSPICIOUS: 2, PONZI_CANDIDATE: 3}


def _add_bounds_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max-paths", type=int, default=4096)
    parser.add_argument("--max-blocks", type=int, default=256)
    parser.add_argument("--loop-unroll", type=int, default=1)


def _add_provider_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--endpoint", help="node JSON-RPC or explorer API endpoint")
    parser.add_argument(
        "--provider-kind", choices=("jsonrpc", "explorer"), default="jsonrpc"
    )
    parser.add_argument("--timeout-ms", type=int, default=10_000)
    parser.add_argument("--retries", type=int, default=2)
    parser.add_argument("--cache-dir", type=Path)
    parser.add_argument("--no-network", action="store_true", help="fixtures/cache only")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ponzitrace",
        description="Static invest/reward flow analysis of EVM bytecode",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="analyze one contract and emit a report")
    selector = analyze.add_mutually_exclusive_group(required=True)
    selector.add_argument("--address", help="contract address (requires --endpoint or cache)")
    selector.add_argument("--fixture", help="bundled or local fixture name")
    selector.add_argument("--hex-file", type=Path, help="file containing hex bytecode")
    analyze.add_argument("--fixtures-dir", type=Path)
    analyze.add_argument("--out", type=Path, help="write the report here instead of stdout")
    _add_bounds_flags(analyze)
    _add_provider_flags(analyze)

    serve = sub.add_parser("serve", help="serve reports and the flow-view UI over HTTP")
    serve.add_argument("--port", type=int, default=8350)
    serve.add_argument("--fixtures-dir", type=Path)
    serve.add_argument("--static-dir", type=Path, help="UI bundle to host at /")
    _add_bounds_flags(serve)
    _add_provider_flags(serve)

    fetch = sub.add_parser("fetch", help="fetch bytecode into the cache and print its hash")
    fetch.add_argument("--address", required=True)
    _add_provider_flags(fetch)

    return parser


def _provider(args: argparse.Namespace) -> ProviderConfig | None:
    if getattr(args, "no_network", False) or not getattr(args, "endpoint", None):
        return None
    return ProviderConfig(
        endpoint=args.endpoint,
        kind=args.provider_kind,
        timeout_ms=args.timeout_ms,
        retries=args.retries,
        cache_dir=args.cache_dir,
    )


def _bounds(args: argparse.Namespace) -> Bounds:
    return Bounds(
        max_paths=args.max_paths,
        max_blocks_per_path=args.max_blocks,
        loop_unroll=args.loop_unroll,
    )


def cmd_analyze(args: argparse.Namespace) -> int:
    try:
        if args.fixture:
            ref, code = load_fixture(args.fixture, args.fixtures_dir)
            contract = {"name": args.fixture, "address": ref.address, "chain": ref.chain}
        elif args.hex_file:
            code = parse_hex(args.hex_file.read_text())
            contract = {"name": str(args.hex_file), "address": None, "chain": None}
        else:
            ref = ContractRef(address=args.address)
            provider = _provider(args)
            if provider is not None:
                code = fetch_bytecode(ref, provider)
            else:
                cached = load_cache_entry(args.cache_dir, ref.address) if args.cache_dir else None
                if cached is None:
                    print(
                        "analyze --address needs --endpoint or a warm --cache-dir",
                        file=sys.stderr,
                    )
                    return 1
                code = cached
            contract = {"name": ref.address, "address": ref.address, "chain": ref.chain}
        contract["code_hash"] = CacheEntry.digest(code.code)
        report = analyze_bytecode(code, contract, _bounds(args))
    except (BytecodeError, IngestError, OSError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    document = to_json(report)
    if args.out:
        args.out.write_text(document)
    else:
        sys.stdout.write(document)
    print(f"verdict: {report.verdict}", file=sys.stderr)
    return VERDICT_EXIT[report.verdict]


def cmd_serve(args: argparse.Namespace) -> int:
    service = AnalysisService(
        fixtures_dir=args.fixtures_dir,
        cache_dir=args.cache_dir,
        provider=_provider(args),
        bounds=_bounds(args),
    )
    serve_forever(service, args.port, args.static_dir)
    return 0


def cmd_fetch(args: argparse.Namespace) -> int:
    try:
        ref = ContractRef(address=args.address)
        provider = _provider(args)
        if provider is None:
            print("fetch needs --endpoint", file=sys.stderr)
            return 1
        code = fetch_bytecode(ref, provider)
    except IngestError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(CacheEntry.digest(code.code))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"analyze": cmd_analyze, "serve": cmd_serve, "fetch": cmd_fetch}
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
