/**
 * Browser shell: fetch the two payloads, hold the selection state, re-render
 * on interaction, and keep the opcode list scrolled to the last unfolded
 * block. All logic lives in the pure modules; this file only wires events.
 */

import { renderApp } from "./render.js";
import type { AnalysisReport, OpcodesPayload } from "./types.js";
import {
  applySelection,
  buildViewModel,
  criticalInstructionsByBlock,
  INITIAL_SELECTION,
  SchemaMismatch,
  type SelectionEvent,
  type SelectionState,
} from "./viewmodel.js";

function banner(message: string, retry: boolean): void {
  const root = document.getElementById("app")!;
  root.innerHTML =
    `<div class="banner">${message}` +
    (retry ? ' <button id="retry">retry</button>' : "") +
    `</div>`;
  document.getElementById("retry")?.addEventListener("click", () => void start());
}

async function fetchJson<T>(url: string): Promise<T> {
  const response = await fetch(url);
  if (!response.ok) throw new Error(`${url}: HTTP ${response.status}`);
  return (await response.json()) as T;
}

async function start(): Promise<void> {
  const query = new URLSearchParams(window.location.search);
  const selector = query.has("address")
    ? `address=${encodeURIComponent(query.get("address")!)}`
    : `fixture=${encodeURIComponent(query.get("fixture") ?? "scenario1")}`;

  let report: AnalysisReport;
  let opcodes: OpcodesPayload;
  try {
    [report, opcodes] = await Promise.all([
      fetchJson<AnalysisReport>(`/api/report?${selector}`),
      fetchJson<OpcodesPayload>(`/api/opcodes?${selector}`),
    ]);
  } catch (error) {
    banner(`could not load the report: ${String(error)}`, true);
    return;
  }

  const criticalBlocks = new Set(criticalInstructionsByBlock(opcodes).keys());
  let selection: SelectionState = INITIAL_SELECTION;

  const root = document.getElementById("app")!;
  const render = (): void => {
    try {
      root.innerHTML = renderApp(buildViewModel(report, opcodes, selection));
    } catch (error) {
      if (error instanceof SchemaMismatch) {
        banner(String(error), false);
        return;
      }
      throw error;
    }
    const list = root.querySelector<HTMLElement>(".opcode-list");
    const anchor = list?.dataset.scrollAnchor;
    if (list && anchor) {
      document.getElementById(anchor)?.scrollIntoView({ block: "nearest" });
    }
  };

  const dispatch = (event: SelectionEvent): void => {
    const next = applySelection(selection, event, criticalBlocks, report.aggregates.length);
    if (next !== selection) {
      selection = next;
      render();
    }
  };

  root.addEventListener("click", (event) => {
    const node = (event.target as Element).closest<SVGElement>(".node");
    if (node?.dataset.block !== undefined) {
      dispatch({ kind: "toggle-unfold", block: Number(node.dataset.block) });
    }
  });
  root.addEventListener("mouseover", (event) => {
    const target = (event.target as Element).closest<SVGElement>("[data-aggregate]");
    if (target?.dataset.aggregate !== undefined) {
      dispatch({ kind: "hover", aggregate: Number(target.dataset.aggregate) });
    }
  });
  root.addEventListener("mouseout", (event) => {
    const target = (event.target as Element).closest<SVGElement>("[data-aggregate]");
    if (target) dispatch({ kind: "unhover" });
  });

  render();
}

void start();
