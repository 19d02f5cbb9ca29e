/** URL construction from view state plus a stale-response-safe dispatcher. */

import type { ViewState } from "./state.js";
import { canonicalize } from "./state.js";

export type FetchJson = (url: string) => Promise<unknown>;

function commonParams(state: ViewState): URLSearchParams {
  const params = new URLSearchParams();
  if (state.publishers.length) params.set("publishers", state.publishers.join(","));
  params.set("from", state.dateFrom);
  params.set("to", state.dateTo);
  if (state.articleTypes.length) {
    params.set("article_types", state.articleTypes.join(","));
  }
  return params;
}

/** The single API request implied by a state; one control change, one request. */
export function requestUrl(state: ViewState): string {
  const s = canonicalize(state);
  if (s.view === "events") {
    const params = commonParams(s);
    return `/api/v1/events?${params.toString()}`;
  }
  const params = commonParams(s);
  const node = s.path[s.path.length - 1];
  if (node) params.set("node", node);
  params.set("color_by", s.colorBy);
  if (s.normalized) params.set("normalized", "true");
  const route = s.chart === "grid" ? "/api/v1/coverage/grid" : "/api/v1/coverage";
  return `${route}?${params.toString()}`;
}

export function eventDetailUrl(eventId: string): string {
  return `/api/v1/events/${encodeURIComponent(eventId)}`;
}

export function factUrl(eventId: string, factId: string): string {
  return `/api/v1/events/${encodeURIComponent(eventId)}/facts/${encodeURIComponent(factId)}`;
}

export function taxonomyUrl(): string {
  return "/api/v1/taxonomy";
}

export interface LoadResult {
  url: string;
  body: unknown;
  /** False when a newer load superseded this one before it resolved. */
  current: boolean;
}

/**
 * Serializes view loads: each call stamps a monotonically increasing version;
 * responses for superseded versions are flagged stale so the caller renders
 * last-write-wins. Identical in-flight URLs share one request.
 */
export class Dispatcher {
  private version = 0;
  private inFlight = new Map<string, Promise<unknown>>();
  requestsIssued = 0;

  constructor(private fetchJson: FetchJson) {}

  async load(url: string): Promise<LoadResult> {
    const myVersion = ++this.version;
    let pending = this.inFlight.get(url);
    if (!pending) {
      this.requestsIssued += 1;
      pending = this.fetchJson(url).finally(() => this.inFlight.delete(url));
      this.inFlight.set(url, pending);
    }
    const body = await pending;
    return { url, body, current: myVersion === this.version };
  }
}
