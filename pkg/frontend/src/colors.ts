/** Committed design tokens: stable color maps for golden tests. */

export const CATEGORY_PALETTE = [
  "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
  "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
] as const;

/** Five-step diverging scale, Democrat (blue) to Republican (red). */
export const LEAN_COLORS: Record<string, string> = {
  "Democrat": "#1f4e9c",
  "Neutral Leaning Democrat": "#7da7d9",
  "Neutral": "#bdbdbd",
  "Neutral Leaning Republican": "#e8938c",
  "Republican": "#b31b1b",
};

/** Five-step diverging scale, Very Negative (purple) to Very Positive (green). */
export const TONE_COLORS: Record<string, string> = {
  "Very Negative": "#5e3c99",
  "Negative": "#b2abd2",
  "Neutral": "#bdbdbd",
  "Positive": "#a6dba0",
  "Very Positive": "#008837",
};

export const COVERED_CELL_COLOR = "#40c4c4"; // events coverage matrix fill
export const EMPTY_CELL_COLOR = "#f4f4f4";

export function segmentColor(colorBy: string, key: string, index: number): string {
  if (colorBy === "lean" && key in LEAN_COLORS) return LEAN_COLORS[key] as string;
  if (colorBy === "tone" && key in TONE_COLORS) return TONE_COLORS[key] as string;
  return CATEGORY_PALETTE[index % CATEGORY_PALETTE.length] as string;
}

/** Cell shading for grid means on the ordinal -2..+2 scale. */
export function meanColor(colorBy: "lean" | "tone", mean: number): string {
  const scale = colorBy === "lean" ? LEAN_COLORS : TONE_COLORS;
  const keys = Object.keys(scale);
  const idx = Math.min(4, Math.max(0, Math.round(mean + 2)));
  return scale[keys[idx] as string] as string;
}
