/** Shareable dashboard state, fully serializable to the URL query string. */

export type View = "coverage" | "events";
export type Chart = "stacked" | "grid";
export type ColorBy = "category" | "lean" | "tone";
export type ArticleTypeToken = "news_report" | "news_analysis" | "opinion";

export const PUBLISHERS = [
  "ap", "breitbart", "cnn", "fox", "guardian",
  "huffpost", "nyt", "usatoday", "washpost", "wsj",
] as const;

export const ARTICLE_TYPE_TOKENS: ArticleTypeToken[] = [
  "news_report", "news_analysis", "opinion",
];

export interface ViewState {
  view: View;
  chart: Chart;
  colorBy: ColorBy;
  /** Drill-down path, up to three node ids: category, topic, subtopic. */
  path: string[];
  /** Sorted subset of PUBLISHERS; empty means all ten. */
  publishers: string[];
  dateFrom: string;
  dateTo: string;
  /** Sorted subset of ARTICLE_TYPE_TOKENS; empty means all. */
  articleTypes: ArticleTypeToken[];
  normalized: boolean;
  expandedEvent: string | null;
  expandedFact: string | null;
}

export const DEFAULT_STATE: ViewState = Object.freeze({
  view: "coverage",
  chart: "stacked",
  colorBy: "category",
  path: [],
  publishers: [],
  dateFrom: "2024-08-19",
  dateTo: "2024-08-21",
  articleTypes: [],
  normalized: false,
  expandedEvent: null,
  expandedFact: null,
});

const MAX_DEPTH = 3;
const DATE_RE = /^\d{4}-\d{2}-\d{2}$/;

function oneOf<T extends string>(value: string | null, allowed: readonly T[],
                                 fallback: T): T {
  return allowed.includes(value as T) ? (value as T) : fallback;
}

/** Canonical form: sorted unique selections, path capped at three segments. */
export function canonicalize(state: ViewState): ViewState {
  return {
    ...state,
    path: state.path.filter((p) => p.length > 0).slice(0, MAX_DEPTH),
    publishers: [...new Set(state.publishers)]
      .filter((p) => (PUBLISHERS as readonly string[]).includes(p))
      .sort(),
    articleTypes: [...new Set(state.articleTypes)]
      .filter((t) => ARTICLE_TYPE_TOKENS.includes(t))
      .sort() as ArticleTypeToken[],
  };
}

export function serializeState(state: ViewState): string {
  const s = canonicalize(state);
  const params = new URLSearchParams();
  if (s.view !== DEFAULT_STATE.view) params.set("view", s.view);
  if (s.chart !== DEFAULT_STATE.chart) params.set("chart", s.chart);
  if (s.colorBy !== DEFAULT_STATE.colorBy) params.set("color_by", s.colorBy);
  if (s.path.length) params.set("node", s.path.join("/"));
  if (s.publishers.length) params.set("publishers", s.publishers.join(","));
  if (s.dateFrom !== DEFAULT_STATE.dateFrom) params.set("from", s.dateFrom);
  if (s.dateTo !== DEFAULT_STATE.dateTo) params.set("to", s.dateTo);
  if (s.articleTypes.length) params.set("types", s.articleTypes.join(","));
  if (s.normalized) params.set("normalized", "1");
  if (s.expandedEvent) params.set("event", s.expandedEvent);
  if (s.expandedFact) params.set("fact", s.expandedFact);
  return params.toString();
}

export function deserializeState(query: string): ViewState {
  const params = new URLSearchParams(query);
  const date = (name: string, fallback: string) => {
    const value = params.get(name);
    return value && DATE_RE.test(value) ? value : fallback;
  };
  return canonicalize({
    view: oneOf(params.get("view"), ["coverage", "events"], DEFAULT_STATE.view),
    chart: oneOf(params.get("chart"), ["stacked", "grid"], DEFAULT_STATE.chart),
    colorBy: oneOf(params.get("color_by"), ["category", "lean", "tone"],
                   DEFAULT_STATE.colorBy),
    path: (params.get("node") ?? "").split("/").filter(Boolean),
    publishers: (params.get("publishers") ?? "").split(",").filter(Boolean),
    dateFrom: date("from", DEFAULT_STATE.dateFrom),
    dateTo: date("to", DEFAULT_STATE.dateTo),
    articleTypes: (params.get("types") ?? "")
      .split(",").filter(Boolean) as ArticleTypeToken[],
    normalized: params.get("normalized") === "1",
    expandedEvent: params.get("event"),
    expandedFact: params.get("fact"),
  });
}

/** Deepen the drill-down path by one level; a no-op at subtopic depth. */
export function drillDown(state: ViewState, nodeId: string): ViewState {
  if (state.path.length >= MAX_DEPTH) return state;
  return canonicalize({ ...state, path: [...state.path, nodeId] });
}

/** Truncate the path to `depth` segments (breadcrumb click). */
export function drillTo(state: ViewState, depth: number): ViewState {
  return canonicalize({ ...state, path: state.path.slice(0, depth) });
}

export interface TaxonomyNode {
  id: string;
  name: string;
  level: string;
  parent_id: string | null;
}

export interface TaxonomyBody {
  version: number;
  nodes: TaxonomyNode[];
  tombstones: string[];
}

/** Breadcrumb labels for the current path: always starts at "All categories". */
export function breadcrumb(state: ViewState, taxonomy: TaxonomyBody):
    { id: string | null; name: string }[] {
  const byId = new Map(taxonomy.nodes.map((n) => [n.id, n.name]));
  const crumbs: { id: string | null; name: string }[] =
    [{ id: null, name: "All categories" }];
  for (const id of state.path) {
    crumbs.push({ id, name: byId.get(id) ?? id });
  }
  return crumbs;
}
