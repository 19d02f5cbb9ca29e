/** Pure view-model builders for the Coverage view (stacked bar and grid).
 *
 * Every number shown comes from an API body; this module only converts
 * counts and proportions into pixel lengths and formatted strings.
 */

import { segmentColor, meanColor, EMPTY_CELL_COLOR } from "./colors.js";
import type { ColorBy } from "./state.js";

export interface ApiSegment {
  key: string;
  count: number;
  proportion: number | null;
}

export interface CoverageBody {
  keys: string[];
  key_names: Record<string, string>;
  normalized: boolean;
  publishers: Record<string, {
    total: number;
    empty: boolean;
    segments: ApiSegment[];
  }>;
}

export interface BarSegment {
  key: string;
  name: string;
  count: number;
  proportion: number | null;
  color: string;
  lengthPx: number;
  tooltip: string;
}

export interface BarRow {
  publisher: string;
  total: number;
  empty: boolean;
  segments: BarSegment[];
}

export const BAR_WIDTH_PX = 600;

function formatTooltip(name: string, count: number, share: number | null): string {
  const pct = share === null ? "–" : `${(share * 100).toFixed(1)}%`;
  return `${name}: ${count} articles (${pct})`;
}

/**
 * Stacked bars: absolute mode scales counts against the largest publisher
 * total so lengths stay comparable across rows; normalized mode uses the
 * API-supplied proportions directly.
 */
export function stackedBarModel(body: CoverageBody, colorBy: ColorBy,
                                widthPx: number = BAR_WIDTH_PX): BarRow[] {
  const publishers = Object.keys(body.publishers).sort();
  const maxTotal = Math.max(
    1, ...publishers.map((p) => body.publishers[p]!.total));
  return publishers.map((publisher) => {
    const entry = body.publishers[publisher]!;
    const segments = entry.segments.map((seg, index) => {
      const name = body.key_names[seg.key] ?? seg.key;
      const share = body.normalized
        ? seg.proportion
        : entry.total > 0 ? seg.count / entry.total : null;
      const fraction = body.normalized
        ? (seg.proportion ?? 0)
        : seg.count / maxTotal;
      return {
        key: seg.key,
        name,
        count: seg.count,
        proportion: seg.proportion,
        color: segmentColor(colorBy, seg.key, index),
        lengthPx: fraction * widthPx,
        tooltip: formatTooltip(name, seg.count, share),
      };
    });
    return { publisher, total: entry.total, empty: entry.empty, segments };
  });
}

export interface GridBodyCell {
  count: number;
  mean?: number | null;
}

export interface GridBody {
  rows: {
    key: string;
    name: string;
    cells: Record<string, GridBodyCell>;
    max_publisher: string;
    max_count: number;
  }[];
  publishers: string[];
  color_by: string;
}

export interface GridCell {
  publisher: string;
  count: number;
  /** Bar inside the cell, relative to the row maximum. */
  lengthPx: number;
  mean: number | null;
  /** No matching articles at all — visually distinct from a zero mean. */
  empty: boolean;
  color: string;
  /** Set only on the row's highest-publishing cell. */
  maxLabel: string | null;
  tooltip: string;
}

export interface GridRow {
  key: string;
  name: string;
  maxPublisher: string;
  maxCount: number;
  cells: GridCell[];
}

export const GRID_CELL_WIDTH_PX = 80;

export function gridModel(body: GridBody,
                          cellWidthPx: number = GRID_CELL_WIDTH_PX): GridRow[] {
  const colorBy = body.color_by;
  return body.rows.map((row) => {
    const denominator = Math.max(1, row.max_count);
    const cells = body.publishers.map((publisher) => {
      const cell = row.cells[publisher] ?? { count: 0 };
      const mean = cell.mean ?? null;
      const empty = cell.count === 0;
      let color = EMPTY_CELL_COLOR;
      if (!empty && (colorBy === "lean" || colorBy === "tone") && mean !== null) {
        color = meanColor(colorBy, mean);
      }
      return {
        publisher,
        count: cell.count,
        lengthPx: (cell.count / denominator) * cellWidthPx,
        mean,
        empty,
        color,
        maxLabel: publisher === row.max_publisher ? String(row.max_count) : null,
        tooltip: `${row.name} – ${publisher}: ${cell.count} articles` +
          (mean === null ? "" : `, mean ${mean.toFixed(2)}`),
      };
    });
    return {
      key: row.key,
      name: row.name,
      maxPublisher: row.max_publisher,
      maxCount: row.max_count,
      cells,
    };
  });
}
