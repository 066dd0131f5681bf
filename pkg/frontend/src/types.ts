/**
 * Wire types for the two API payloads the app consumes. Field names stay in
 * snake_case to match the served JSON exactly.
 */

export interface LoopInfo {
  header: number;
  body: number[];
  contains_call: boolean;
  unroll_count_used: number;
}

export interface AggregateRow {
  index: number;
  name: string;
  is_investing: boolean;
  is_rewarding: boolean;
  member_count: number;
  blocks: number[];
  edges: [number, number][];
  slots_written: string[];
  slots_read: string[];
  loops: LoopInfo[];
  signature: unknown[];
}

export interface SlotRow {
  canonical_key: string;
  display_key: string;
  kind: "state_variable" | "array_or_mapping" | "unknown";
  read_by: number[];
  written_by: number[];
}

export interface EvidenceRef {
  block: number;
  offset: number;
}

export interface AnalysisReport {
  schema_version: string;
  tool: { name: string; version: string };
  contract: { name?: string | null; address?: string | null; chain?: string | null };
  verdict: "ponzi_candidate" | "suspicious" | "no_ponzi_evidence";
  aggregates: AggregateRow[];
  storage_slots: SlotRow[];
  c1: {
    satisfied: boolean;
    evidence: {
      aggregate_index: number;
      shared_slot: string;
      shared_slot_display: string;
      invest_ref: EvidenceRef;
      reward_ref: EvidenceRef;
    }[];
  };
  c2: { satisfied: boolean; evidence: { aggregate_index: number; loop_header: number }[] };
  cfg_summary: { block_count: number; edge_count: number; unresolved_jump_count: number };
  diagnostics: string[];
}

export interface OpcodeInstruction {
  offset: number;
  mnemonic: string;
  immediate_hex?: string;
}

export interface OpcodeBlock {
  id: number;
  start_offset: number;
  instructions: OpcodeInstruction[];
}

export interface OpcodesPayload {
  blocks: OpcodeBlock[];
}

export const SUPPORTED_SCHEMA_VERSION = "1";
