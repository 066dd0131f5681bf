/**
 * Pure view-model construction: (report, opcodes, selection) -> everything
 * the renderer draws. No DOM, no fetch, no mutation; replaying the same
 * selection events always reproduces an identical model.
 */

import { aggregateColor, needsPatternOverlay } from "./palette.js";
import type {
  AggregateRow,
  AnalysisReport,
  OpcodeInstruction,
  OpcodesPayload,
} from "./types.js";
import { SUPPORTED_SCHEMA_VERSION } from "./types.js";

export const CRITICAL_OPCODES = new Set(["CALLER", "CALL", "SSTORE", "SLOAD"]);

export type LaneKind = "investing" | "rewarding";

export interface SelectionState {
  hoveredAggregate: number | null;
  /** insertion order; the last entry is the opcode-list scroll anchor */
  unfoldedBlocks: number[];
}

export const INITIAL_SELECTION: SelectionState = {
  hoveredAggregate: null,
  unfoldedBlocks: [],
};

export type SelectionEvent =
  | { kind: "hover"; aggregate: number }
  | { kind: "unhover" }
  | { kind: "toggle-unfold"; block: number };

export interface FlowNode {
  block: number;
  label: string;
  hasCriticalOpcode: boolean;
  critical: OpcodeInstruction[];
  unfolded: boolean;
  emphasized: boolean;
  dimmed: boolean;
  x: number;
  y: number;
}

export interface FlowLink {
  from: number;
  to: number;
  aggregates: number[];
  emphasized: boolean;
  dimmed: boolean;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  bend: number;
}

export interface Hull {
  aggregate: number;
  color: string;
  patternOverlay: boolean;
  blocks: number[];
  emphasized: boolean;
  dimmed: boolean;
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface LoopRegion {
  aggregate: number;
  header: number;
  color: string;
  x: number;
  y: number;
  radius: number;
}

export interface Lane {
  kind: LaneKind;
  nodes: FlowNode[];
  links: FlowLink[];
  hulls: Hull[];
  loops: LoopRegion[];
  width: number;
}

export interface SlotGlyph {
  key: string;
  display: string;
  kind: "state_variable" | "array_or_mapping" | "unknown";
  shape: "circle" | "rect";
  x: number;
  y: number;
}

export interface InteractionLine {
  lane: LaneKind;
  aggregate: number;
  slotKey: string;
  color: string;
  emphasized: boolean;
  dimmed: boolean;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface OpcodeRow {
  block: number;
  startOffset: number;
  highlighted: boolean;
  instructions: OpcodeInstruction[];
}

export interface LegendEntry {
  swatch:
    | "path"
    | "state-variable"
    | "array-or-mapping"
    | "critical-block"
    | "loop-region"
    | "note";
  label: string;
  color?: string;
}

export interface FlowViewModel {
  verdict: string;
  contractLabel: string;
  lanes: Record<LaneKind, Lane>;
  slots: SlotGlyph[];
  lines: InteractionLine[];
  opcodeList: { rows: OpcodeRow[]; scrollAnchor: number | null };
  legend: LegendEntry[];
}

export class SchemaMismatch extends Error {}

const NODE_SPACING = 92;
const NODE_RADIUS = 16;
const LANE_Y = 84;
const SLOT_X = 120;
const SLOT_SPACING = 58;

/** Blocks holding at least one of CALLER / CALL / SSTORE / SLOAD. */
export function criticalInstructionsByBlock(
  opcodes: OpcodesPayload,
): Map<number, OpcodeInstruction[]> {
  const out = new Map<number, OpcodeInstruction[]>();
  for (const block of opcodes.blocks) {
    const critical = block.instructions.filter((i) => CRITICAL_OPCODES.has(i.mnemonic));
    if (critical.length > 0) out.set(block.id, critical);
  }
  return out;
}

export function applySelection(
  selection: SelectionState,
  event: SelectionEvent,
  criticalBlocks: Set<number>,
  aggregateCount: number,
): SelectionState {
  switch (event.kind) {
    case "hover":
      if (event.aggregate < 0 || event.aggregate >= aggregateCount) return selection;
      return { ...selection, hoveredAggregate: event.aggregate };
    case "unhover":
      return { ...selection, hoveredAggregate: null };
    case "toggle-unfold": {
      if (!criticalBlocks.has(event.block)) return selection; // non-critical: ignore
      const unfolded = selection.unfoldedBlocks.includes(event.block)
        ? selection.unfoldedBlocks.filter((b) => b !== event.block)
        : [...selection.unfoldedBlocks, event.block];
      return { ...selection, unfoldedBlocks: unfolded };
    }
  }
}

/** First-visit order from the entry block over the lane's edges. */
function laneBlockOrder(laneAggregates: AggregateRow[]): number[] {
  const blocks = new Set<number>();
  const successors = new Map<number, Set<number>>();
  for (const agg of laneAggregates) {
    for (const b of agg.blocks) blocks.add(b);
    for (const [from, to] of agg.edges) {
      if (!successors.has(from)) successors.set(from, new Set());
      successors.get(from)!.add(to);
    }
  }
  const order: number[] = [];
  const seen = new Set<number>();
  const visit = (block: number): void => {
    if (seen.has(block) || !blocks.has(block)) return;
    seen.add(block);
    order.push(block);
    for (const next of [...(successors.get(block) ?? [])].sort((a, b) => a - b)) {
      visit(next);
    }
  };
  for (const start of [...blocks].sort((a, b) => a - b)) visit(start);
  return order;
}

function buildLane(
  kind: LaneKind,
  report: AnalysisReport,
  criticalByBlock: Map<number, OpcodeInstruction[]>,
  selection: SelectionState,
): Lane {
  const laneAggregates = report.aggregates.filter((a) =>
    kind === "investing" ? a.is_investing : a.is_rewarding,
  );
  const order = laneBlockOrder(laneAggregates);
  const position = new Map<number, number>();
  order.forEach((block, i) => position.set(block, i));
  const hovered = selection.hoveredAggregate;
  const hoveredBlocks =
    hovered === null
      ? null
      : new Set(laneAggregates.find((a) => a.index === hovered)?.blocks ?? []);

  const nodes: FlowNode[] = order.map((block) => ({
    block,
    label: `B${block}`,
    hasCriticalOpcode: criticalByBlock.has(block),
    critical: criticalByBlock.get(block) ?? [],
    unfolded: selection.unfoldedBlocks.includes(block),
    emphasized: hoveredBlocks !== null && hoveredBlocks.has(block),
    dimmed: hoveredBlocks !== null && !hoveredBlocks.has(block),
    x: 40 + position.get(block)! * NODE_SPACING,
    y: LANE_Y,
  }));

  const linkAggregates = new Map<string, number[]>();
  for (const agg of laneAggregates) {
    for (const [from, to] of agg.edges) {
      const key = `${from}->${to}`;
      if (!linkAggregates.has(key)) linkAggregates.set(key, []);
      linkAggregates.get(key)!.push(agg.index);
    }
  }
  const links: FlowLink[] = [...linkAggregates.entries()]
    .map(([key, aggregates]) => {
      const [from, to] = key.split("->").map(Number);
      return { key, from, to, aggregates };
    })
    .sort((a, b) => a.from - b.from || a.to - b.to)
    .map(({ from, to, aggregates }) => ({
      from,
      to,
      aggregates,
      emphasized: hovered !== null && aggregates.includes(hovered),
      dimmed: hovered !== null && !aggregates.includes(hovered),
      x1: 40 + position.get(from)! * NODE_SPACING,
      y1: LANE_Y,
      x2: 40 + position.get(to)! * NODE_SPACING,
      y2: LANE_Y,
      // back links arc below the lane, forward links above
      bend: position.get(to)! > position.get(from)! ? -1 : 1,
    }));

  const hulls: Hull[] = laneAggregates.map((agg, laneRank) => {
    const xs = agg.blocks.map((b) => 40 + position.get(b)! * NODE_SPACING);
    const pad = NODE_RADIUS + 8 + laneRank * 5;
    return {
      aggregate: agg.index,
      color: aggregateColor(agg.index),
      patternOverlay: needsPatternOverlay(agg.index),
      blocks: [...agg.blocks],
      emphasized: hovered === agg.index,
      dimmed: hovered !== null && hovered !== agg.index,
      x: Math.min(...xs) - pad,
      y: LANE_Y - pad,
      width: Math.max(...xs) - Math.min(...xs) + 2 * pad,
      height: 2 * pad,
    };
  });

  const loops: LoopRegion[] = [];
  for (const agg of laneAggregates) {
    for (const loop of agg.loops) {
      if (!loop.contains_call || !position.has(loop.header)) continue;
      loops.push({
        aggregate: agg.index,
        header: loop.header,
        color: aggregateColor(agg.index),
        x: 40 + position.get(loop.header)! * NODE_SPACING,
        y: LANE_Y,
        radius: NODE_RADIUS + 11,
      });
    }
  }

  return {
    kind,
    nodes,
    links,
    hulls,
    loops,
    width: Math.max(order.length, 1) * NODE_SPACING + 60,
  };
}

/**
 * Assemble the full view model. Pure: identical inputs give a deeply equal
 * result, so a replayed selection log reproduces the identical model.
 */
export function buildViewModel(
  report: AnalysisReport,
  opcodes: OpcodesPayload,
  selection: SelectionState = INITIAL_SELECTION,
): FlowViewModel {
  if (report.schema_version !== SUPPORTED_SCHEMA_VERSION) {
    throw new SchemaMismatch(
      `report schema ${report.schema_version} unsupported (want ${SUPPORTED_SCHEMA_VERSION})`,
    );
  }
  const criticalByBlock = criticalInstructionsByBlock(opcodes);
  const lanes: Record<LaneKind, Lane> = {
    investing: buildLane("investing", report, criticalByBlock, selection),
    rewarding: buildLane("rewarding", report, criticalByBlock, selection),
  };

  const slots: SlotGlyph[] = report.storage_slots.map((row, i) => ({
    key: row.canonical_key,
    display: row.display_key,
    kind: row.kind,
    shape: row.kind === "state_variable" ? "circle" : "rect",
    x: SLOT_X,
    y: 44 + i * SLOT_SPACING,
  }));
  const slotPosition = new Map(slots.map((s) => [s.key, s]));

  const hovered = selection.hoveredAggregate;
  const lines: InteractionLine[] = [];
  for (const laneKind of ["investing", "rewarding"] as LaneKind[]) {
    const flag = laneKind === "investing" ? "is_investing" : "is_rewarding";
    const slotsField = laneKind === "investing" ? "slots_written" : "slots_read";
    for (const agg of report.aggregates) {
      if (!agg[flag]) continue;
      const hull = lanes[laneKind].hulls.find((h) => h.aggregate === agg.index)!;
      for (const key of agg[slotsField]) {
        const glyph = slotPosition.get(key);
        if (!glyph) continue;
        lines.push({
          lane: laneKind,
          aggregate: agg.index,
          slotKey: key,
          color: aggregateColor(agg.index),
          emphasized: hovered === agg.index,
          dimmed: hovered !== null && hovered !== agg.index,
          x1: hull.x + hull.width,
          y1: LANE_Y,
          x2: glyph.x,
          y2: glyph.y,
        });
      }
    }
  }

  const unfolded = new Set(selection.unfoldedBlocks);
  const rows: OpcodeRow[] = opcodes.blocks.map((block) => ({
    block: block.id,
    startOffset: block.start_offset,
    highlighted: unfolded.has(block.id),
    instructions: block.instructions,
  }));
  const scrollAnchor =
    selection.unfoldedBlocks.length > 0
      ? selection.unfoldedBlocks[selection.unfoldedBlocks.length - 1]
      : null;

  const legend: LegendEntry[] = [
    ...report.aggregates.map((agg) => ({
      swatch: "path" as const,
      label: agg.name,
      color: aggregateColor(agg.index),
    })),
    { swatch: "state-variable", label: "state variable slot" },
    { swatch: "array-or-mapping", label: "array / mapping slot" },
    { swatch: "critical-block", label: "block with critical opcode" },
    { swatch: "loop-region", label: "payout loop (CALL inside)" },
    {
      swatch: "note",
      label: "a block on both flows is drawn once per lane with the same label",
    },
  ];

  return {
    verdict: report.verdict,
    contractLabel: report.contract.name ?? report.contract.address ?? "contract",
    lanes,
    slots,
    lines,
    opcodeList: { rows, scrollAnchor },
    legend,
  };
}
