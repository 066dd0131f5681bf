/**
 * Fixed categorical palette (colorblind-safe, Okabe-Ito order). Aggregate
 * index -> color is a pure function so reloading a report always reproduces
 * identical colors; beyond 8 aggregates the colors cycle and a pattern
 * overlay disambiguates.
 */

const PALETTE = [
  "#d55e00", // vermilion
  "#0072b2", // blue
  "#009e73", // green
  "#cc79a7", // purple-pink
  "#e69f00", // orange
  "#56b4e9", // sky
  "#f0e442", // yellow
  "#000000", // black
] as const;

export function aggregateColor(index: number): string {
  return PALETTE[index % PALETTE.length];
}

export function needsPatternOverlay(index: number): boolean {
  return index >= PALETTE.length;
}

export const CRITICAL_BLOCK_FILL = "#fff3b0"; // yellow background
export const PLAIN_BLOCK_FILL = "#ffffff";
