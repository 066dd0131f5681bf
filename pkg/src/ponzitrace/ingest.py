"""Obtaining contract code: block-explorer / node APIs, fixtures, file cache.

Fixtures and cache entries share one on-disk format: "key: value" header
lines, a blank line, then the hex body. Every load re-verifies the recorded
code hash. Live fetching is never exercised by the test suite; fixtures are
the source of truth there.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

from .bytecode import Bytecode, BytecodeError, parse_hex

API_KEY_ENV = "PONZITRACE_API_KEY"

_ADDRESS_RE = re.compile(r"^0x[0-9a-fA-F]{40}$")


class IngestError(Exception):
    pass


class InvalidAddress(IngestError):
    pass


class EmptyCode(IngestError):
    pass


class ProviderError(IngestError):
    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class ProviderTimeout(IngestError):
    pass


class FixtureNotFound(IngestError):
    pass


class HashMismatch(IngestError):
    pass


@dataclass(frozen=True)
class ContractRef:
    address: str  # 0x + 40 hex digits, stored lowercase
    chain: str = "ethereum-mainnet"
    name: str | None = None

    def __post_init__(self) -> None:
        if not _ADDRESS_RE.match(self.address):
            raise InvalidAddress(f"not a 20-byte hex address: {self.address!r}")
        object.__setattr__(self, "address", self.address.lower())


@dataclass
class ProviderConfig:
    endpoint: str
    kind: str = "jsonrpc"  # jsonrpc | explorer
    api_key: str | None = None
    timeout_ms: int = 10_000
    retries: int = 2
    cache_dir: Path | None = None

    def __post_init__(self) -> None:
        if self.timeout_ms <= 0:
            raise ValueError("timeout must be positive")
        if not 0 <= self.retries <= 5:
            raise ValueError("retries must be between 0 and 5")
        if self.api_key is None:
            self.api_key = os.environ.get(API_KEY_ENV)


@dataclass(frozen=True)
class CacheEntry:
    address: str
    code_hash: str  # "sha256:" + hex digest of the raw bytes
    code: bytes
    fetched_at: str

    @staticmethod
    def digest(code: bytes) -> str:
        return "sha256:" + hashlib.sha256(code).hexdigest()


def _render_entry(headers: dict[str, str], code: bytes) -> str:
    lines = [f"{k}: {v}" for k, v in headers.items()]
    body = code.hex()
    wrapped = "\n".join(body[i : i + 64] for i in range(0, len(body), 64))
    return "\n".join(lines) + "\n\n" + wrapped + "\n"


def _parse_entry(text: str) -> tuple[dict[str, str], Bytecode]:
    head, _, body = text.partition("\n\n")
    headers: dict[str, str] = {}
    for line in head.splitlines():
        if not line.strip():
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise IngestError(f"malformed header line: {line!r}")
        headers[key.strip()] = value.strip()
    try:
        code = parse_hex(body, source="fixture")
    except BytecodeError as exc:
        raise IngestError(f"bad hex body: {exc}") from exc
    return headers, code


def _verify_hash(headers: dict[str, str], code: bytes, origin: str) -> None:
    recorded = headers.get("code_hash")
    if recorded and recorded != CacheEntry.digest(code):
        raise HashMismatch(f"{origin}: recorded {recorded}, computed {CacheEntry.digest(code)}")


def default_fixtures_dir() -> Path:
    return Path(str(resources.files("ponzitrace") / "fixtures"))


def load_fixture(name: str, fixtures_dir: Path | None = None) -> tuple[ContractRef, Bytecode]:
    """Load a named fixture, verifying its recorded code hash."""
    directory = Path(fixtures_dir) if fixtures_dir else default_fixtures_dir()
    path = directory / f"{name}.hex"
    if not path.is_file():
        raise FixtureNotFound(f"no fixture {name!r} in {directory}")
    headers, code = _parse_entry(path.read_text())
    _verify_hash(headers, code.code, f"fixture {name}")
    ref = ContractRef(
        address=headers.get("address", "0x" + "0" * 40),
        chain=headers.get("chain", "ethereum-mainnet"),
        name=name,
    )
    return ref, code


def list_fixtures(fixtures_dir: Path | None = None) -> list[str]:
    directory = Path(fixtures_dir) if fixtures_dir else default_fixtures_dir()
    if not directory.is_dir():
        return []
    return sorted(p.stem for p in directory.glob("*.hex"))


def _cache_path(cache_dir: Path, address: str) -> Path:
    return Path(cache_dir) / f"{address.lower()}.hex"


def write_cache_entry(cache_dir: Path, ref: ContractRef, code: bytes) -> CacheEntry:
    """Atomic write (temp file + rename) of one per-address cache file."""
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    entry = CacheEntry(
        address=ref.address,
        code_hash=CacheEntry.digest(code),
        code=code,
        fetched_at=datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    )
    headers = {
        "address": entry.address,
        "chain": ref.chain,
        "fetched_at": entry.fetched_at,
        "code_hash": entry.code_hash,
    }
    path = _cache_path(cache_dir, ref.address)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(_render_entry(headers, code))
    tmp.replace(path)
    return entry


def load_cache_entry(cache_dir: Path, address: str) -> Bytecode | None:
    path = _cache_path(Path(cache_dir), address)
    if not path.is_file():
        return None
    headers, code = _parse_entry(path.read_text())
    _verify_hash(headers, code.code, f"cache {address}")
    return code


def _http_get_code(ref: ContractRef, cfg: ProviderConfig) -> str:
    timeout = cfg.timeout_ms / 1000.0
    if cfg.kind == "explorer":
        params = {
            "module": "proxy",
            "action": "eth_getCode",
            "address": ref.address,
            "tag": "latest",
        }
        if cfg.api_key:
            params["apikey"] = cfg.api_key
        url = cfg.endpoint.rstrip("?") + "?" + urllib.parse.urlencode(params)
        request = urllib.request.Request(url)
    else:
        payload = json.dumps(
            {
                "jsonrpc": "2.0",
                "id": 1,
                "method": "eth_getCode",
                "params": [ref.address, "latest"],
            }
        ).encode()
        request = urllib.request.Request(
            cfg.endpoint, data=payload, headers={"Content-Type": "application/json"}
        )

    last_error: Exception | None = None
    for attempt in range(cfg.retries + 1):
        if attempt:
            time.sleep(min(0.05 * (2 ** (attempt - 1)), 2.0))
        try:
            with urllib.request.urlopen(request, timeout=timeout) as response:
                body = response.read().decode()
            document = json.loads(body)
            if "error" in document and document["error"]:
                raise ProviderError(f"provider error: {document['error']}")
            result = document.get("result")
            if not isinstance(result, str):
                raise ProviderError(f"unexpected provider response: {body[:200]}")
            return result
        except urllib.error.HTTPError as exc:
            if 400 <= exc.code < 500:
                raise ProviderError(f"HTTP {exc.code}: {exc.read()[:200]!r}", status=exc.code)
            last_error = ProviderError(f"HTTP {exc.code}", status=exc.code)
        except (urllib.error.URLError, TimeoutError, OSError) as exc:
            last_error = ProviderTimeout(f"provider unreachable: {exc}")
        except json.JSONDecodeError as exc:
            raise ProviderError(f"non-JSON provider response: {exc}")
    assert last_error is not None
    raise last_error


def fetch_bytecode(ref: ContractRef, cfg: ProviderConfig) -> Bytecode:
    """Deployed runtime code for an address, via cache or provider."""
    if cfg.cache_dir is not None:
        cached = load_cache_entry(cfg.cache_dir, ref.address)
        if cached is not None:
            return cached
    result = _http_get_code(ref, cfg)
    stripped = result[2:] if result.lower().startswith("0x") else result
    if stripped == "":
        raise EmptyCode(f"no contract code at {ref.address} (externally owned account?)")
    try:
        code = parse_hex(result, source="explorer")
    except BytecodeError as exc:
        raise ProviderError(f"provider returned bad hex: {exc}") from exc
    if cfg.cache_dir is not None:
        write_cache_entry(cfg.cache_dir, ref, code.code)
    return code
