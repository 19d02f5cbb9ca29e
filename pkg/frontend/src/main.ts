/** Browser bootstrap: wires controls to state, state to the URL, and API
 * responses to the pure view-model renderers. */

import { Dispatcher, eventDetailUrl, factUrl, requestUrl, taxonomyUrl } from "./api.js";
import { gridModel, stackedBarModel } from "./coverage.js";
import type { CoverageBody, GridBody } from "./coverage.js";
import { eventDetailModel, eventRows, factLinks } from "./events.js";
import type { EventDetailBody, EventsBody, FactBody } from "./events.js";
import {
  ARTICLE_TYPE_TOKENS,
  DEFAULT_STATE,
  PUBLISHERS,
  breadcrumb,
  deserializeState,
  drillDown,
  drillTo,
  serializeState,
} from "./state.js";
import type { ArticleTypeToken, TaxonomyBody, ViewState } from "./state.js";

const fetchJson = async (url: string): Promise<unknown> => {
  const response = await fetch(url);
  if (!response.ok) {
    throw new Error(`${response.status} from ${url}`);
  }
  return response.json();
};

const dispatcher = new Dispatcher(fetchJson);
let state: ViewState = deserializeState(window.location.search.slice(1));
let taxonomy: TaxonomyBody | null = null;

function esc(text: string): string {
  return text.replace(/[&<>"']/g, (c) => `&#${c.charCodeAt(0)};`);
}

function setState(next: ViewState, push = true): void {
  state = next;
  const query = serializeState(state);
  if (push) {
    history.pushState(null, "", query ? `?${query}` : location.pathname);
  }
  void render();
}

window.addEventListener("popstate", () => {
  state = deserializeState(window.location.search.slice(1));
  void render();
});

function controlBar(): string {
  const pubOptions = PUBLISHERS.map((p) => {
    const on = !state.publishers.length || state.publishers.includes(p);
    return `<label><input type="checkbox" data-pub="${p}" ${on ? "checked" : ""}>${p}</label>`;
  }).join(" ");
  const typeOptions = ARTICLE_TYPE_TOKENS.map((t) => {
    const on = !state.articleTypes.length || state.articleTypes.includes(t);
    return `<label><input type="checkbox" data-type="${t}" ${on ? "checked" : ""}>${t.replace("_", " ")}</label>`;
  }).join(" ");
  return `
  <div class="controls">
    <select id="view">
      <option value="coverage" ${state.view === "coverage" ? "selected" : ""}>Coverage</option>
      <option value="events" ${state.view === "events" ? "selected" : ""}>Events</option>
    </select>
    <select id="chart" ${state.view === "events" ? "disabled" : ""}>
      <option value="stacked" ${state.chart === "stacked" ? "selected" : ""}>Stacked bars</option>
      <option value="grid" ${state.chart === "grid" ? "selected" : ""}>Grid</option>
    </select>
    <select id="color_by" ${state.view === "events" ? "disabled" : ""}>
      <option value="category" ${state.colorBy === "category" ? "selected" : ""}>Color: topic</option>
      <option value="lean" ${state.colorBy === "lean" ? "selected" : ""}>Color: lean</option>
      <option value="tone" ${state.colorBy === "tone" ? "selected" : ""}>Color: tone</option>
    </select>
    <input id="from" type="date" value="${state.dateFrom}">
    <input id="to" type="date" value="${state.dateTo}">
    <label><input id="normalized" type="checkbox" ${state.normalized ? "checked" : ""}>normalized</label>
    <span class="facet">${pubOptions}</span>
    <span class="facet">${typeOptions}</span>
  </div>`;
}

function breadcrumbHtml(): string {
  if (!taxonomy) return "";
  const crumbs = breadcrumb(state, taxonomy);
  return `<nav class="breadcrumb">${crumbs
    .map((c, depth) =>
      `<a href="#" data-depth="${depth}">${esc(c.name)}</a>`)
    .join(" › ")}</nav>`;
}

function renderError(err: unknown): void {
  const banner = document.getElementById("error")!;
  banner.innerHTML =
    `API request failed (${esc(String(err))}) <button id="retry">Retry</button>`;
  banner.hidden = false;
  document.getElementById("retry")?.addEventListener("click", () => void render());
}

async function render(): Promise<void> {
  const root = document.getElementById("app")!;
  document.getElementById("error")!.hidden = true;
  try {
    if (!taxonomy) {
      taxonomy = (await fetchJson(taxonomyUrl())) as TaxonomyBody;
    }
    const result = await dispatcher.load(requestUrl(state));
    if (!result.current) return; // a newer state already rendered
    let main = "";
    if (state.view === "events") {
      main = await renderEvents(result.body as EventsBody);
    } else if (state.chart === "grid") {
      main = renderGrid(result.body as GridBody);
    } else {
      main = renderStacked(result.body as CoverageBody);
    }
    root.innerHTML = controlBar() + breadcrumbHtml() + main;
    wireControls(root);
  } catch (err) {
    renderError(err); // state preserved; banner offers retry
  }
}

function renderStacked(body: CoverageBody): string {
  const rows = stackedBarModel(body, state.colorBy);
  const bars = rows.map((row) => {
    const segments = row.segments
      .filter((s) => s.lengthPx > 0)
      .map((s) =>
        `<div class="seg" data-key="${s.key}" title="${esc(s.tooltip)}"` +
        ` style="width:${s.lengthPx}px;background:${s.color}"></div>`)
      .join("");
    return `<div class="bar-row"><span class="pub">${row.publisher}</span>` +
      `<div class="bar">${segments}</div><span class="total">${row.total}</span></div>`;
  }).join("");
  return `<section class="stacked">${bars}</section>`;
}

function renderGrid(body: GridBody): string {
  const rows = gridModel(body);
  const header = `<tr><th></th>${body.publishers
    .map((p) => `<th>${p}</th>`).join("")}</tr>`;
  const trs = rows.map((row) => {
    const tds = row.cells.map((cell) =>
      `<td class="${cell.empty ? "empty" : "filled"}" title="${esc(cell.tooltip)}">` +
      `<div class="cellbar" style="width:${cell.lengthPx}px;background:${cell.color}"></div>` +
      `${cell.maxLabel ? `<span class="max">${cell.maxLabel}</span>` : ""}</td>`)
      .join("");
    return `<tr><th class="rowname" data-key="${row.key}">${esc(row.name)}</th>${tds}</tr>`;
  }).join("");
  return `<table class="grid">${header}${trs}</table>`;
}

async function renderEvents(body: EventsBody): Promise<string> {
  const rows = eventRows(body, state.publishers);
  let expandedHtml = "";
  if (state.expandedEvent) {
    try {
      const detailBody =
        (await fetchJson(eventDetailUrl(state.expandedEvent))) as EventDetailBody;
      expandedHtml = await renderDetail(detailBody);
    } catch {
      expandedHtml = `<div class="detail">event detail unavailable</div>`;
    }
  }
  const header = rows.length && rows[0]
    ? `<tr><th>event</th><th>#</th>${rows[0].cells
        .map((c) => `<th>${c.publisher}</th>`).join("")}</tr>`
    : "";
  const trs = rows.map((row) => {
    const cells = row.cells.map((cell) =>
      `<td style="background:${cell.color}"></td>`).join("");
    const expanded = state.expandedEvent === row.id
      ? `<tr><td colspan="${2 + row.cells.length}">${expandedHtml}</td></tr>`
      : "";
    return `<tr class="event-row" data-event="${row.id}">` +
      `<td>${esc(row.shortTitle)}</td><td>${row.importance}</td>${cells}</tr>${expanded}`;
  }).join("");
  return `<table class="events">${header}${trs}</table>`;
}

async function renderDetail(body: EventDetailBody): Promise<string> {
  const model = eventDetailModel(body);
  const composition = model.composition
    .map((slice) => `<span class="slice">${esc(slice.label)}</span>`).join(" ");
  const facts = await Promise.all(model.facts.map(async (fact) => {
    let variations = "";
    if (state.expandedFact === fact.id) {
      const factBody =
        (await fetchJson(factUrl(model.id, fact.id))) as FactBody;
      variations = `<ul>${factLinks(factBody).map((link) =>
        `<li>${link.href
          ? `<a href="${link.href}" target="${link.target}" rel="noopener">${esc(link.text)}</a>`
          : esc(link.text)} <em>${link.publisher ?? ""}</em></li>`).join("")}</ul>`;
    }
    return `<div class="fact" data-fact="${fact.id}">` +
      `${esc(fact.canonicalText)} (${fact.variationCount} phrasings)${variations}</div>`;
  }));
  return `<div class="detail"><p>${esc(model.description)}</p>` +
    `<div class="composition">${composition}</div>${facts.join("")}</div>`;
}

function wireControls(root: HTMLElement): void {
  root.querySelector("#view")?.addEventListener("change", (e) => {
    const view = (e.target as HTMLSelectElement).value as ViewState["view"];
    setState({ ...state, view });
  });
  root.querySelector("#chart")?.addEventListener("change", (e) => {
    setState({ ...state, chart: (e.target as HTMLSelectElement).value as ViewState["chart"] });
  });
  root.querySelector("#color_by")?.addEventListener("change", (e) => {
    setState({ ...state, colorBy: (e.target as HTMLSelectElement).value as ViewState["colorBy"] });
  });
  root.querySelector("#from")?.addEventListener("change", (e) => {
    setState({ ...state, dateFrom: (e.target as HTMLInputElement).value });
  });
  root.querySelector("#to")?.addEventListener("change", (e) => {
    setState({ ...state, dateTo: (e.target as HTMLInputElement).value });
  });
  root.querySelector("#normalized")?.addEventListener("change", (e) => {
    setState({ ...state, normalized: (e.target as HTMLInputElement).checked });
  });
  root.querySelectorAll("input[data-pub]").forEach((el) => {
    el.addEventListener("change", () => {
      const checked = [...root.querySelectorAll<HTMLInputElement>("input[data-pub]")]
        .filter((box) => box.checked).map((box) => box.dataset.pub!);
      setState({ ...state, publishers: checked.length === PUBLISHERS.length ? [] : checked });
    });
  });
  root.querySelectorAll("input[data-type]").forEach((el) => {
    el.addEventListener("change", () => {
      const checked = [...root.querySelectorAll<HTMLInputElement>("input[data-type]")]
        .filter((box) => box.checked).map((box) => box.dataset.type as ArticleTypeToken);
      setState({
        ...state,
        articleTypes: checked.length === ARTICLE_TYPE_TOKENS.length ? [] : checked,
      });
    });
  });
  root.querySelectorAll(".seg, .rowname").forEach((el) => {
    el.addEventListener("click", () => {
      const key = (el as HTMLElement).dataset.key;
      if (key) setState(drillDown(state, key));
    });
  });
  root.querySelectorAll(".breadcrumb a").forEach((el) => {
    el.addEventListener("click", (e) => {
      e.preventDefault();
      setState(drillTo(state, Number((el as HTMLElement).dataset.depth)));
    });
  });
  root.querySelectorAll(".event-row").forEach((el) => {
    el.addEventListener("click", () => {
      const id = (el as HTMLElement).dataset.event!;
      setState({
        ...state,
        expandedEvent: state.expandedEvent === id ? null : id,
        expandedFact: null,
      });
    });
  });
  root.querySelectorAll(".fact").forEach((el) => {
    el.addEventListener("click", (e) => {
      e.stopPropagation();
      if ((e.target as HTMLElement).tagName === "A") return;
      const id = (el as HTMLElement).dataset.fact!;
      setState({ ...state, expandedFact: state.expandedFact === id ? null : id });
    });
  });
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void render();
}

export { setState, render, DEFAULT_STATE };
