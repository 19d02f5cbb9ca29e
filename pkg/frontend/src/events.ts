/** View-models for the Events view: coverage matrix rows, detail expansion,
 * and fact phrasings with links back to the original articles. */

import { COVERED_CELL_COLOR, EMPTY_CELL_COLOR } from "./colors.js";

export interface EventsBody {
  from: string;
  to: string;
  publishers: string[];
  events: {
    id: string;
    window_date: string;
    short_title: string;
    importance: number;
    cells: Record<string, boolean>;
  }[];
}

export interface MatrixCell {
  publisher: string;
  covered: boolean;
  color: string;
}

export interface EventRow {
  id: string;
  windowDate: string;
  shortTitle: string;
  importance: number;
  cells: MatrixCell[];
}

/**
 * Matrix rows in API order (already descending by importance). A publisher
 * selection removes columns only; rows and importances are untouched.
 */
export function eventRows(body: EventsBody,
                          publishers?: string[]): EventRow[] {
  const columns = publishers && publishers.length
    ? body.publishers.filter((p) => publishers.includes(p))
    : body.publishers;
  return body.events.map((ev) => ({
    id: ev.id,
    windowDate: ev.window_date,
    shortTitle: ev.short_title,
    importance: ev.importance,
    cells: columns.map((publisher) => ({
      publisher,
      covered: ev.cells[publisher] === true,
      color: ev.cells[publisher] ? COVERED_CELL_COLOR : EMPTY_CELL_COLOR,
    })),
  }));
}

export interface EventDetailBody {
  id: string;
  window_date: string;
  short_title: string;
  description: string;
  importance: number;
  degraded_summary: boolean;
  sentence_stats: {
    counts: Record<string, number>;
    proportions: Record<string, number>;
    total: number;
  } | null;
  publishers: string[];
  article_ids: string[];
  top_facts: {
    id: string;
    canonical_text: string;
    variation_count: number;
    publisher_mentions: Record<string, boolean>;
  }[];
}

export interface CompositionSlice {
  sentenceType: string;
  count: number;
  proportion: number;
  label: string;
}

export interface DetailModel {
  id: string;
  title: string;
  description: string;
  importance: number;
  degraded: boolean;
  composition: CompositionSlice[];
  publishers: string[];
  facts: {
    id: string;
    canonicalText: string;
    variationCount: number;
    mentions: Record<string, boolean>;
  }[];
}

export function eventDetailModel(body: EventDetailBody): DetailModel {
  const composition: CompositionSlice[] = [];
  if (body.sentence_stats) {
    for (const sentenceType of Object.keys(body.sentence_stats.counts).sort()) {
      const count = body.sentence_stats.counts[sentenceType] ?? 0;
      const proportion = body.sentence_stats.proportions[sentenceType] ?? 0;
      composition.push({
        sentenceType,
        count,
        proportion,
        label: `${sentenceType}: ${(proportion * 100).toFixed(0)}%`,
      });
    }
  }
  return {
    id: body.id,
    title: body.short_title,
    description: body.description,
    importance: body.importance,
    degraded: body.degraded_summary,
    composition,
    publishers: body.publishers,
    facts: body.top_facts.map((f) => ({
      id: f.id,
      canonicalText: f.canonical_text,
      variationCount: f.variation_count,
      mentions: f.publisher_mentions,
    })),
  };
}

export interface FactBody {
  id: string;
  event_id: string;
  canonical_text: string;
  publisher_mentions: Record<string, boolean>;
  variations: {
    article_id: string;
    sentence_index: number;
    text: string;
    url: string | null;
    publisher_id: string | null;
  }[];
}

export interface FactLink {
  text: string;
  publisher: string | null;
  href: string | null;
  target: "_blank";
}

/** Each phrasing links to the original article in a new tab. */
export function factLinks(body: FactBody): FactLink[] {
  return body.variations.map((v) => ({
    text: v.text,
    publisher: v.publisher_id,
    href: v.url,
    target: "_blank",
  }));
}
