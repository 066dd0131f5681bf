/**
 * View model -> markup strings. Pure string building so the behavioral
 * suite can assert on rendered output without a DOM.
 */

import { CRITICAL_BLOCK_FILL, PLAIN_BLOCK_FILL } from "./palette.js";
import type {
  FlowViewModel,
  InteractionLine,
  Lane,
  SlotGlyph,
} from "./viewmodel.js";

const LANE_HEIGHT = 190;

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function opacity(emphasized: boolean, dimmed: boolean): string {
  if (emphasized) return "1";
  if (dimmed) return "0.18";
  return "0.85";
}

export function renderLane(lane: Lane): string {
  const parts: string[] = [];
  parts.push(
    `<svg class="lane lane-${lane.kind}" data-lane="${lane.kind}" ` +
      `width="${lane.width}" height="${LANE_HEIGHT}" viewBox="0 0 ${lane.width} ${LANE_HEIGHT}">`,
  );
  if (lane.nodes.length === 0) {
    parts.push(
      `<text class="empty-state" x="20" y="40">no ${lane.kind} paths in this contract</text>`,
    );
    parts.push("</svg>");
    return parts.join("");
  }

  for (const hull of lane.hulls) {
    parts.push(
      `<rect class="hull${hull.emphasized ? " emphasized" : ""}${hull.dimmed ? " dimmed" : ""}" ` +
        `data-aggregate="${hull.aggregate}" x="${hull.x}" y="${hull.y}" ` +
        `width="${hull.width}" height="${hull.height}" rx="18" ` +
        `fill="none" stroke="${hull.color}" ` +
        `stroke-width="${hull.emphasized ? 5 : 3}" stroke-opacity="${opacity(hull.emphasized, hull.dimmed)}"/>`,
    );
    if (hull.patternOverlay) {
      parts.push(
        `<rect class="hull-pattern" data-aggregate="${hull.aggregate}" x="${hull.x}" y="${hull.y}" ` +
          `width="${hull.width}" height="${hull.height}" rx="18" fill="none" ` +
          `stroke="${hull.color}" stroke-width="1" stroke-dasharray="4 3"/>`,
      );
    }
  }

  for (const loop of lane.loops) {
    parts.push(
      `<circle class="loop-region" data-aggregate="${loop.aggregate}" ` +
        `cx="${loop.x}" cy="${loop.y}" r="${loop.radius}" ` +
        `fill="${loop.color}" fill-opacity="0.25" stroke="${loop.color}"/>`,
    );
  }

  for (const link of lane.links) {
    const midX = (link.x1 + link.x2) / 2;
    const controlY = link.y1 + link.bend * (28 + Math.abs(link.x2 - link.x1) / 6);
    parts.push(
      `<path class="link${link.emphasized ? " emphasized" : ""}${link.dimmed ? " dimmed" : ""}" ` +
        `d="M ${link.x1} ${link.y1} Q ${midX} ${controlY} ${link.x2} ${link.y2}" ` +
        `fill="none" stroke="#222" stroke-width="${link.emphasized ? 2.4 : 1.4}" ` +
        `stroke-opacity="${opacity(link.emphasized, link.dimmed)}" marker-end="url(#arrow)"/>`,
    );
  }

  for (const node of lane.nodes) {
    const fill = node.hasCriticalOpcode ? CRITICAL_BLOCK_FILL : PLAIN_BLOCK_FILL;
    parts.push(
      `<g class="node${node.unfolded ? " unfolded" : ""}" data-block="${node.block}" ` +
        `data-critical="${node.hasCriticalOpcode}" opacity="${opacity(node.emphasized, node.dimmed)}">` +
        `<circle cx="${node.x}" cy="${node.y}" r="16" fill="${fill}" stroke="#333"/>` +
        `<text x="${node.x}" y="${node.y + 4}" text-anchor="middle" class="node-label">${node.label}</text>`,
    );
    if (node.unfolded) {
      const items = node.critical
        .map(
          (ins, i) =>
            `<text class="critical-op" x="${node.x}" y="${node.y + 34 + i * 13}" ` +
            `text-anchor="middle">${escapeHtml(ins.mnemonic)} @${ins.offset}</text>`,
        )
        .join("");
      parts.push(items);
    }
    parts.push("</g>");
  }
  parts.push("</svg>");
  return parts.join("");
}

export function renderStoragePanel(slots: SlotGlyph[], lines: InteractionLine[]): string {
  const height = Math.max(slots.length * 58 + 40, 120);
  const parts: string[] = [
    `<svg class="storage-panel" width="260" height="${height}" viewBox="0 0 260 ${height}">`,
  ];
  for (const line of lines) {
    parts.push(
      `<line class="interaction${line.emphasized ? " emphasized" : ""}${line.dimmed ? " dimmed" : ""}" ` +
        `data-aggregate="${line.aggregate}" data-lane="${line.lane}" data-slot="${escapeHtml(line.slotKey)}" ` +
        `x1="10" y1="${line.lane === "investing" ? 12 : height - 12}" x2="${line.x2}" y2="${line.y2}" ` +
        `stroke="${line.color}" stroke-width="${line.emphasized ? 3.4 : 2}" ` +
        `stroke-opacity="${opacity(line.emphasized, line.dimmed)}"/>`,
    );
  }
  for (const slot of slots) {
    if (slot.shape === "circle") {
      parts.push(
        `<circle class="slot slot-${slot.kind}" data-slot="${escapeHtml(slot.key)}" ` +
          `cx="${slot.x}" cy="${slot.y}" r="14" fill="#f5f5f5" stroke="#333"/>`,
      );
    } else {
      parts.push(
        `<rect class="slot slot-${slot.kind}" data-slot="${escapeHtml(slot.key)}" ` +
          `x="${slot.x - 18}" y="${slot.y - 12}" width="36" height="24" fill="#f5f5f5" ` +
          `stroke="#333"${slot.kind === "unknown" ? ' stroke-dasharray="3 2"' : ""}/>`,
      );
    }
    parts.push(
      `<text class="slot-label" x="${slot.x + 26}" y="${slot.y + 4}">${escapeHtml(slot.display)}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}

export function renderOpcodeList(model: FlowViewModel): string {
  const rows = model.opcodeList.rows
    .map((row) => {
      const instructions = row.instructions
        .map(
          (ins) =>
            `<li>${String(ins.offset).padStart(4, "0")} ${escapeHtml(ins.mnemonic)}` +
            `${ins.immediate_hex ? " " + escapeHtml(ins.immediate_hex) : ""}</li>`,
        )
        .join("");
      return (
        `<section class="opcode-block${row.highlighted ? " highlighted" : ""}" ` +
        `id="opcode-block-${row.block}" data-block="${row.block}">` +
        `<h4>block ${row.block} @${row.startOffset}</h4><ol>${instructions}</ol></section>`
      );
    })
    .join("");
  const anchor =
    model.opcodeList.scrollAnchor === null
      ? ""
      : ` data-scroll-anchor="opcode-block-${model.opcodeList.scrollAnchor}"`;
  return `<div class="opcode-list"${anchor}>${rows}</div>`;
}

export function renderLegend(model: FlowViewModel): string {
  const entries = model.legend
    .map((entry) => {
      if (entry.swatch === "note") {
        return `<li class="legend-note">${escapeHtml(entry.label)}</li>`;
      }
      const swatch =
        entry.swatch === "path"
          ? `<span class="swatch" style="background:${entry.color}"></span>`
          : `<span class="swatch swatch-${entry.swatch}"></span>`;
      return `<li>${swatch}${escapeHtml(entry.label)}</li>`;
    })
    .join("");
  return `<ul class="legend">${entries}</ul>`;
}

export function renderApp(model: FlowViewModel): string {
  return (
    `<header><h1>${escapeHtml(model.contractLabel)}</h1>` +
    `<span class="verdict verdict-${model.verdict}">${model.verdict}</span></header>` +
    `<svg width="0" height="0"><defs><marker id="arrow" viewBox="0 0 6 6" refX="6" refY="3" ` +
    `markerWidth="5" markerHeight="5" orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="#222"/>` +
    `</marker></defs></svg>` +
    `<main><div class="flows">` +
    `<h3>investing flow</h3>${renderLane(model.lanes.investing)}` +
    `<h3>rewarding flow</h3>${renderLane(model.lanes.rewarding)}` +
    `</div><div class="storage"><h3>storage interactions</h3>` +
    renderStoragePanel(model.slots, model.lines) +
    renderLegend(model) +
    `</div><div class="opcodes"><h3>opcode list</h3>${renderOpcodeList(model)}</div></main>`
  );
}
