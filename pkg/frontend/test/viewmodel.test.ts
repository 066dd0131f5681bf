import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import type { AnalysisReport, OpcodesPayload } from "../src/types.js";
import {
  applySelection,
  buildViewModel,
  criticalInstructionsByBlock,
  INITIAL_SELECTION,
  SchemaMismatch,
  type SelectionEvent,
  type SelectionState,
} from "../src/viewmodel.js";
import { aggregateColor } from "../src/palette.js";

const here = dirname(fileURLToPath(import.meta.url));

function golden<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, "golden", name), "utf8")) as T;
}

const report = golden<AnalysisReport>("scenario1.report.json");
const opcodes = golden<OpcodesPayload>("scenario1.opcodes.json");
const criticalBlocks = new Set(criticalInstructionsByBlock(opcodes).keys());

function replay(events: SelectionEvent[]): SelectionState {
  let selection = INITIAL_SELECTION;
  for (const event of events) {
    selection = applySelection(selection, event, criticalBlocks, report.aggregates.length);
  }
  return selection;
}

describe("view model construction", () => {
  it("renders three distinct hull colors in both lanes", () => {
    const vm = buildViewModel(report, opcodes);
    for (const lane of [vm.lanes.investing, vm.lanes.rewarding]) {
      const colors = new Set(lane.hulls.map((h) => h.color));
      expect(lane.hulls).toHaveLength(3);
      expect(colors.size).toBe(3);
    }
  });

  it("hull block sets equal the aggregates' blocks", () => {
    const vm = buildViewModel(report, opcodes);
    for (const laneKind of ["investing", "rewarding"] as const) {
      for (const hull of vm.lanes[laneKind].hulls) {
        const aggregate = report.aggregates.find((a) => a.index === hull.aggregate)!;
        expect([...hull.blocks].sort((a, b) => a - b)).toEqual(aggregate.blocks);
      }
    }
  });

  it("a block appears in a lane iff a lane-flagged aggregate contains it", () => {
    const vm = buildViewModel(report, opcodes);
    for (const laneKind of ["investing", "rewarding"] as const) {
      const flag = laneKind === "investing" ? "is_investing" : "is_rewarding";
      const expected = new Set(
        report.aggregates.filter((a) => a[flag]).flatMap((a) => a.blocks),
      );
      const got = new Set(vm.lanes[laneKind].nodes.map((n) => n.block));
      expect(got).toEqual(expected);
    }
  });

  it("interaction line count is the sum of per-lane slot touches", () => {
    const vm = buildViewModel(report, opcodes);
    let expected = 0;
    for (const a of report.aggregates) {
      if (a.is_investing) expected += a.slots_written.length;
      if (a.is_rewarding) expected += a.slots_read.length;
    }
    expect(vm.lines).toHaveLength(expected);
  });

  it("colors are a pure function of the aggregate index", () => {
    const first = buildViewModel(report, opcodes);
    const second = buildViewModel(report, opcodes);
    expect(first.lanes.investing.hulls.map((h) => h.color)).toEqual(
      second.lanes.investing.hulls.map((h) => h.color),
    );
    for (const hull of first.lanes.rewarding.hulls) {
      expect(hull.color).toBe(aggregateColor(hull.aggregate));
    }
  });

  it("rejects unsupported schema versions", () => {
    expect(() =>
      buildViewModel({ ...report, schema_version: "99" }, opcodes),
    ).toThrow(SchemaMismatch);
  });

  it("critical blocks carry their critical instructions", () => {
    const vm = buildViewModel(report, opcodes);
    const critical = vm.lanes.rewarding.nodes.filter((n) => n.hasCriticalOpcode);
    expect(critical.length).toBeGreaterThan(0);
    for (const node of critical) {
      expect(node.critical.length).toBeGreaterThan(0);
      for (const ins of node.critical) {
        expect(["CALLER", "CALL", "SSTORE", "SLOAD"]).toContain(ins.mnemonic);
      }
    }
  });

  it("marks CALL-bearing loop regions with the owning aggregate's color", () => {
    const vm = buildViewModel(report, opcodes);
    const loops = vm.lanes.rewarding.loops;
    expect(loops.length).toBeGreaterThan(0);
    for (const loop of loops) {
      expect(loop.color).toBe(aggregateColor(loop.aggregate));
    }
  });
});

describe("hover behaviour", () => {
  it("emphasizes exactly the hovered aggregate's hulls and lines", () => {
    const selection = replay([{ kind: "hover", aggregate: 1 }]);
    const vm = buildViewModel(report, opcodes, selection);
    for (const lane of [vm.lanes.investing, vm.lanes.rewarding]) {
      for (const hull of lane.hulls) {
        expect(hull.emphasized).toBe(hull.aggregate === 1);
        expect(hull.dimmed).toBe(hull.aggregate !== 1);
      }
    }
    for (const line of vm.lines) {
      expect(line.emphasized).toBe(line.aggregate === 1);
      expect(line.dimmed).toBe(line.aggregate !== 1);
    }
  });

  it("unhover restores the pre-hover model exactly", () => {
    const before = buildViewModel(report, opcodes, INITIAL_SELECTION);
    const after = buildViewModel(
      report,
      opcodes,
      replay([{ kind: "hover", aggregate: 1 }, { kind: "unhover" }]),
    );
    expect(after).toEqual(before);
  });

  it("hovering a nonexistent aggregate is a no-op", () => {
    const selection = replay([{ kind: "hover", aggregate: 99 }]);
    expect(selection).toEqual(INITIAL_SELECTION);
  });
});

describe("unfolding blocks", () => {
  const callBlock = opcodes.blocks.find((b) =>
    b.instructions.some((i) => i.mnemonic === "CALL"),
  )!.id;

  it("unfolding the CALL block highlights and anchors the opcode list", () => {
    const selection = replay([{ kind: "toggle-unfold", block: callBlock }]);
    const vm = buildViewModel(report, opcodes, selection);
    const row = vm.opcodeList.rows.find((r) => r.block === callBlock)!;
    expect(row.highlighted).toBe(true);
    expect(vm.opcodeList.scrollAnchor).toBe(callBlock);
    const node = vm.lanes.rewarding.nodes.find((n) => n.block === callBlock)!;
    expect(node.unfolded).toBe(true);
    expect(node.critical.some((i) => i.mnemonic === "CALL")).toBe(true);
  });

  it("a second click folds the block back", () => {
    const selection = replay([
      { kind: "toggle-unfold", block: callBlock },
      { kind: "toggle-unfold", block: callBlock },
    ]);
    expect(buildViewModel(report, opcodes, selection)).toEqual(
      buildViewModel(report, opcodes, INITIAL_SELECTION),
    );
  });

  it("clicking a non-critical block changes nothing", () => {
    const plain = opcodes.blocks.find(
      (b) => !b.instructions.some((i) => ["CALLER", "CALL", "SSTORE", "SLOAD"].includes(i.mnemonic)),
    )!.id;
    const selection = replay([{ kind: "toggle-unfold", block: plain }]);
    expect(selection).toEqual(INITIAL_SELECTION);
  });

  it("the anchor follows the last block clicked", () => {
    const criticalIds = [...criticalBlocks].sort((a, b) => a - b);
    expect(criticalIds.length).toBeGreaterThan(1);
    const [first, second] = criticalIds;
    const selection = replay([
      { kind: "toggle-unfold", block: first },
      { kind: "toggle-unfold", block: second },
    ]);
    const vm = buildViewModel(report, opcodes, selection);
    expect(vm.opcodeList.scrollAnchor).toBe(second);
    expect(vm.opcodeList.rows.filter((r) => r.highlighted).map((r) => r.block)).toEqual(
      [first, second].sort((a, b) => a - b),
    );
  });
});

describe("charity contract storage panel", () => {
  const report2 = golden<AnalysisReport>("scenario2.report.json");
  const opcodes2 = golden<OpcodesPayload>("scenario2.opcodes.json");

  it("rewarding-lane interaction lines all terminate at one rectangle glyph", () => {
    const vm = buildViewModel(report2, opcodes2);
    const rewardingLines = vm.lines.filter((l) => l.lane === "rewarding");
    expect(rewardingLines.length).toBeGreaterThan(0);
    const targets = new Set(rewardingLines.map((l) => l.slotKey));
    expect(targets.size).toBe(1);
    const [key] = targets;
    const glyph = vm.slots.find((s) => s.key === key)!;
    expect(glyph.shape).toBe("rect");
    expect(glyph.display).toBe("146...97");
  });
});

describe("selection replay", () => {
  const log: SelectionEvent[] = [
    { kind: "hover", aggregate: 0 },
    { kind: "unhover" },
    { kind: "toggle-unfold", block: [...criticalBlocks][0] },
    { kind: "hover", aggregate: 1 },
  ];

  it("replaying a recorded log reproduces an identical view model", () => {
    const first = buildViewModel(report, opcodes, replay(log));
    const second = buildViewModel(report, opcodes, replay(log));
    expect(second).toEqual(first);
    expect(JSON.stringify(second)).toBe(JSON.stringify(first));
  });

  it("the view model is a pure function of report and selection", () => {
    const selection = replay(log);
    const once = buildViewModel(report, opcodes, selection);
    const again = buildViewModel(report, opcodes, { ...selection });
    expect(again).toEqual(once);
  });
});
