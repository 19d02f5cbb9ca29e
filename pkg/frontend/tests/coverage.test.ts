import { describe, expect, it } from "vitest";

import { gridModel, stackedBarModel, BAR_WIDTH_PX } from "../src/coverage.js";
import type { CoverageBody, GridBody } from "../src/coverage.js";
import { LEAN_COLORS, TONE_COLORS } from "../src/colors.js";

import { fixture } from "./helpers.js";

const root = fixture<CoverageBody>("coverage_root");
const rootNormalized = fixture<CoverageBody>("coverage_root_normalized");
const lean = fixture<CoverageBody>("coverage_lean");
const grid = fixture<GridBody>("grid_root_lean");

function syntheticBody(counts: number[]): CoverageBody {
  return {
    keys: counts.map((_, i) => `k${i}`),
    key_names: Object.fromEntries(counts.map((_, i) => [`k${i}`, `K${i}`])),
    normalized: false,
    publishers: {
      ap: {
        total: counts.reduce((a, b) => a + b, 0),
        empty: counts.every((c) => c === 0),
        segments: counts.map((count, i) =>
          ({ key: `k${i}`, count, proportion: null })),
      },
    },
  };
}

describe("stacked bars", () => {
  it("a 50-of-100 segment renders at half the bar length ± 1 px", () => {
    const rows = stackedBarModel(syntheticBody([50, 50]), "category");
    const seg = rows[0]!.segments[0]!;
    expect(Math.abs(seg.lengthPx - BAR_WIDTH_PX / 2)).toBeLessThanOrEqual(1);
  });

  it("segment lengths are proportional to API counts", () => {
    const rows = stackedBarModel(root, "category");
    for (const row of rows) {
      const apiEntry = root.publishers[row.publisher]!;
      const maxTotal = Math.max(
        ...Object.values(root.publishers).map((p) => p.total));
      for (const seg of row.segments) {
        const apiSeg = apiEntry.segments.find((s) => s.key === seg.key)!;
        expect(seg.count).toBe(apiSeg.count);
        expect(seg.lengthPx).toBeCloseTo(
          (apiSeg.count / maxTotal) * BAR_WIDTH_PX, 6);
      }
    }
  });

  it("normalized toggle changes lengths but never segment keys", () => {
    const absolute = stackedBarModel(root, "category");
    const normalized = stackedBarModel(rootNormalized, "category");
    for (let i = 0; i < absolute.length; i += 1) {
      const a = absolute[i]!;
      const n = normalized[i]!;
      expect(n.segments.map((s) => s.key)).toEqual(a.segments.map((s) => s.key));
      if (!n.empty) {
        const filled = n.segments.reduce((acc, s) => acc + s.lengthPx, 0);
        expect(filled).toBeCloseTo(BAR_WIDTH_PX, 3); // proportions fill the bar
      }
    }
  });

  it("tooltip numbers equal API body values", () => {
    const rows = stackedBarModel(rootNormalized, "category");
    for (const row of rows) {
      const apiEntry = rootNormalized.publishers[row.publisher]!;
      for (const seg of row.segments) {
        const apiSeg = apiEntry.segments.find((s) => s.key === seg.key)!;
        expect(seg.tooltip).toContain(`${apiSeg.count} articles`);
        if (apiSeg.proportion !== null && apiSeg.count > 0) {
          expect(seg.tooltip).toContain(
            `${(apiSeg.proportion * 100).toFixed(1)}%`);
        }
      }
    }
  });

  it("lean segments use the committed five-color scale", () => {
    const rows = stackedBarModel(lean, "lean");
    for (const row of rows) {
      for (const seg of row.segments) {
        expect(seg.color).toBe(LEAN_COLORS[seg.key]);
      }
    }
    expect(Object.keys(LEAN_COLORS)).toHaveLength(5);
    expect(Object.keys(TONE_COLORS)).toHaveLength(5);
  });
});

describe("grid", () => {
  it("cells carry API counts with the row-max label on the argmax cell", () => {
    const rows = gridModel(grid);
    for (let i = 0; i < rows.length; i += 1) {
      const row = rows[i]!;
      const apiRow = grid.rows[i]!;
      for (const cell of row.cells) {
        expect(cell.count).toBe(apiRow.cells[cell.publisher]!.count);
        if (cell.publisher === apiRow.max_publisher) {
          expect(cell.maxLabel).toBe(String(apiRow.max_count));
        } else {
          expect(cell.maxLabel).toBeNull();
        }
      }
    }
  });

  it("cell bars are proportional to the row maximum", () => {
    const rows = gridModel(grid, 100);
    for (const row of rows) {
      for (const cell of row.cells) {
        const expected = row.maxCount > 0
          ? (cell.count / row.maxCount) * 100 : 0;
        expect(cell.lengthPx).toBeCloseTo(expected, 6);
      }
    }
  });

  it("empty cells are distinct from zero-mean cells", () => {
    const body: GridBody = {
      rows: [{
        key: "k",
        name: "K",
        cells: {
          ap: { count: 0, mean: null },
          cnn: { count: 4, mean: 0.0 },
        },
        max_publisher: "cnn",
        max_count: 4,
      }],
      publishers: ["ap", "cnn"],
      color_by: "lean",
    };
    const [row] = gridModel(body);
    const ap = row!.cells.find((c) => c.publisher === "ap")!;
    const cnn = row!.cells.find((c) => c.publisher === "cnn")!;
    expect(ap.empty).toBe(true);
    expect(ap.mean).toBeNull();
    expect(cnn.empty).toBe(false);
    expect(cnn.mean).toBe(0);
    expect(cnn.color).toBe(LEAN_COLORS["Neutral"]);
    expect(ap.color).not.toBe(cnn.color);
  });
});
