"""Path enumeration, invest/reward classification, loop detection, aggregation.

Paths are entry-to-terminator block sequences enumerated depth-first with
bounded re-entry over back edges (enough to witness loop bodies). Paths whose
critical effects match are merged into aggregated paths; the signature is the
ordered list of per-instruction-site effect descriptors, so loop unrollings
and dispatcher variants of the same behaviour collapse together.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cfg import Cfg, FALLTHROUGH, HALTING, natural_loop_body
from .symexec import PathEffects, SlotCanonicalizer, execute_path


@dataclass(frozen=True)
class Bounds:
    max_paths: int = 4096
    max_blocks_per_path: int = 256
    loop_unroll: int = 1

    def __post_init__(self) -> None:
        if min(self.max_paths, self.max_blocks_per_path, self.loop_unroll) < 1:
            raise ValueError("bounds must be positive")


@dataclass(frozen=True)
class LoopAnnotation:
    header: int
    body: frozenset[int]
    contains_call: bool
    unroll_count_used: int


@dataclass
class ExecutionPath:
    blocks: tuple[int, ...]
    effects: PathEffects
    is_investing: bool
    is_rewarding: bool
    loop_annotations: tuple[LoopAnnotation, ...] = ()

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(zip(self.blocks, self.blocks[1:]))


# A path signature is a tuple of critical-effect descriptors, one per
# distinct critical instruction site, ordered by instruction offset.
# Descriptors deliberately carry no block ids or offsets.
PathSignature = tuple[tuple, ...]


def path_signature(path: ExecutionPath) -> PathSignature:
    by_site: dict[int, tuple] = {}
    for ev in path.effects.invest_events:
        by_site.setdefault(
            ev.offset, ("SSTORE", ev.slot.canonical_key, tuple(sorted(ev.stored_value.taint)))
        )
    for ev in path.effects.reward_events:
        by_site.setdefault(
            ev.offset,
            (
                "CALL",
                tuple(sorted(s.canonical_key for s in ev.target_slots)),
                tuple(sorted(ev.target.taint)),
            ),
        )
    return tuple(by_site[off] for off in sorted(by_site))


def classify_path(path: ExecutionPath) -> tuple[bool, bool]:
    """(is_investing, is_rewarding) from the path's critical events."""
    return bool(path.effects.invest_events), bool(path.effects.reward_events)


def enumerate_paths(
    cfg: Cfg,
    bounds: Bounds = Bounds(),
    canon: SlotCanonicalizer | None = None,
    diagnostics: list[str] | None = None,
) -> list[ExecutionPath]:
    """Depth-first entry-to-terminator enumeration, stack-executing each path.

    Each back edge is traversed at most bounds.loop_unroll times per path;
    shape-infeasible paths are dropped. Bound hits are reported through
    `diagnostics`, never as errors.
    """
    diags = diagnostics if diagnostics is not None else []
    canon = canon or SlotCanonicalizer()
    back_edges = set(cfg.back_edges)
    succ = {b.id: cfg.successors(b.id) for b in cfg.blocks}
    block_count = len(cfg.blocks)
    step_budget = bounds.max_paths * bounds.max_blocks_per_path

    raw_paths: list[tuple[int, ...]] = []
    truncated_by_paths = False
    truncated_by_length = 0
    dead_ends = 0
    cycle_skips = 0
    steps = 0

    path: list[int] = [cfg.entry]
    on_path: dict[int, int] = {cfg.entry: 1}
    counts: dict[tuple[int, int], int] = {}
    iters = [iter(succ[cfg.entry])]

    def is_path_end(block_id: int) -> bool:
        block = cfg.blocks[block_id]
        if block.terminator in HALTING:
            return True
        # running off the end of code is an implicit stop
        return block.terminator == FALLTHROUGH and block_id == block_count - 1 and not succ[block_id]

    if is_path_end(cfg.entry):
        raw_paths.append(tuple(path))

    while iters and len(raw_paths) < bounds.max_paths and steps < step_budget:
        nxt = next(iters[-1], None)
        if nxt is None:
            iters.pop()
            last = path.pop()
            on_path[last] -= 1
            if path:
                edge = (path[-1], last)
                if edge in back_edges:
                    counts[edge] -= 1
            continue
        edge = (path[-1], nxt)
        if on_path.get(nxt, 0) and edge not in back_edges:
            # a cycle closed by a non-back edge is an irreducible artifact of
            # resolver failure; paths stay DAG-like apart from budgeted loops
            cycle_skips += 1
            continue
        if edge in back_edges and counts.get(edge, 0) >= bounds.loop_unroll:
            continue
        if len(path) >= bounds.max_blocks_per_path:
            truncated_by_length += 1
            continue
        if edge in back_edges:
            counts[edge] = counts.get(edge, 0) + 1
        steps += 1
        path.append(nxt)
        on_path[nxt] = on_path.get(nxt, 0) + 1
        if is_path_end(nxt):
            raw_paths.append(tuple(path))
            # terminators have no successors; backtrack via empty iterator
            iters.append(iter(()))
        elif not succ[nxt]:
            dead_ends += 1
            iters.append(iter(()))
        else:
            iters.append(iter(succ[nxt]))
    if iters and len(raw_paths) >= bounds.max_paths:
        truncated_by_paths = True

    if truncated_by_paths:
        diags.append(f"paths: enumeration truncated at max_paths={bounds.max_paths}")
    if iters and steps >= step_budget:
        diags.append(f"paths: enumeration stopped at step budget {step_budget}")
    if truncated_by_length:
        diags.append(
            f"paths: {truncated_by_length} walks exceeded max_blocks_per_path={bounds.max_blocks_per_path}"
        )
    if dead_ends:
        diags.append(f"paths: {dead_ends} walks ended at blocks with no resolved successor")
    if cycle_skips:
        diags.append(f"paths: {cycle_skips} irreducible cycle re-entries skipped")

    out: list[ExecutionPath] = []
    infeasible = 0
    for blocks in raw_paths:
        effects = execute_path(cfg, list(blocks), canon)
        if not effects.feasible_shape:
            infeasible += 1
            continue
        p = ExecutionPath(blocks=blocks, effects=effects, is_investing=False, is_rewarding=False)
        p.is_investing, p.is_rewarding = classify_path(p)
        out.append(p)
    if infeasible:
        diags.append(f"paths: {infeasible} paths discarded as stack-shape infeasible")
    return out


def natural_loops(cfg: Cfg) -> list[tuple[int, int, frozenset[int], bool]]:
    """(tail, header, body, contains_call) per back edge; compute once per
    contract when annotating many paths."""
    out = []
    for tail, header in cfg.back_edges:
        body = natural_loop_body(cfg, tail, header)
        contains_call = any(cfg.blocks[b].contains_mnemonic("CALL") for b in sorted(body))
        out.append((tail, header, body, contains_call))
    return out


def detect_call_loops(
    cfg: Cfg,
    path: ExecutionPath,
    loops: list[tuple[int, int, frozenset[int], bool]] | None = None,
) -> list[LoopAnnotation]:
    """Annotate every natural loop the path touches; callers keep the
    CALL-bearing ones on the path and route the rest to diagnostics."""
    annotations = []
    for tail, header, body, contains_call in loops if loops is not None else natural_loops(cfg):
        if not body.intersection(path.blocks):
            continue
        used = sum(1 for e in path.edges if e == (tail, header))
        annotations.append(
            LoopAnnotation(
                header=header, body=body, contains_call=contains_call, unroll_count_used=used
            )
        )
    return annotations


@dataclass
class AggregatedPath:
    index: int
    signature: PathSignature
    member_paths: list[ExecutionPath]
    union_blocks: frozenset[int]
    union_edges: frozenset[tuple[int, int]]
    is_investing: bool
    is_rewarding: bool
    slots_written: frozenset[str]
    slots_read: frozenset[str]
    loop_annotations: tuple[LoopAnnotation, ...]

    @property
    def name(self) -> str:
        return f"Path{self.index}"


def aggregate_paths(paths: list[ExecutionPath]) -> list[AggregatedPath]:
    """Partition flagged paths by signature, first-appearance order."""
    groups: dict[PathSignature, list[ExecutionPath]] = {}
    for p in paths:
        if not (p.is_investing or p.is_rewarding):
            continue
        groups.setdefault(path_signature(p), []).append(p)

    out = []
    for index, (sig, members) in enumerate(groups.items()):
        loops: dict[tuple[int, frozenset[int]], LoopAnnotation] = {}
        for m in members:
            for ann in m.loop_annotations:
                key = (ann.header, ann.body)
                prev = loops.get(key)
                if prev is None or ann.unroll_count_used > prev.unroll_count_used:
                    loops[key] = ann
        out.append(
            AggregatedPath(
                index=index,
                signature=sig,
                member_paths=members,
                union_blocks=frozenset(b for m in members for b in m.blocks),
                union_edges=frozenset(e for m in members for e in m.edges),
                is_investing=any(d[0] == "SSTORE" for d in sig),
                is_rewarding=any(d[0] == "CALL" for d in sig),
                slots_written=frozenset(
                    s.canonical_key for m in members for s in m.effects.touched_slots_written
                ),
                slots_read=frozenset(
                    s.canonical_key for m in members for s in m.effects.touched_slots_read
                ),
                loop_annotations=tuple(
                    sorted(loops.values(), key=lambda a: (a.header, sorted(a.body)))
                ),
            )
        )
    return out
