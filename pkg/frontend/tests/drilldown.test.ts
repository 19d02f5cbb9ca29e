/** End-to-end drill-down against recorded API bodies: the three-click path
 * Politics → 2024 Election → Presidential Horse Race, with tooltip values
 * equal to the API values at every step. */

import { describe, expect, it } from "vitest";

import { Dispatcher, requestUrl } from "../src/api.js";
import { stackedBarModel } from "../src/coverage.js";
import type { CoverageBody } from "../src/coverage.js";
import { DEFAULT_STATE, deserializeState, drillDown, serializeState } from "../src/state.js";
import type { ViewState } from "../src/state.js";
import { fixture } from "./helpers.js";

const BODIES: Record<string, CoverageBody> = {
  root: fixture<CoverageBody>("coverage_root"),
  politics: fixture<CoverageBody>("coverage_politics"),
  "pol-election": fixture<CoverageBody>("coverage_election"),
  "pol-election-horserace": fixture<CoverageBody>("coverage_horserace"),
};

/** Fake fetch that answers like the recorded fixture API. */
function fakeFetch(url: string): Promise<unknown> {
  const node = new URL(url, "http://x").searchParams.get("node") ?? "root";
  const body = BODIES[node];
  if (!body) return Promise.reject(new Error(`no fixture for node ${node}`));
  return Promise.resolve(body);
}

const FIXTURE_RANGE = { dateFrom: "2024-08-19", dateTo: "2024-08-20" };

describe("three-click drill-down", () => {
  it("renders each level with tooltip values equal to the API body", async () => {
    const dispatcher = new Dispatcher(fakeFetch);
    let state: ViewState = { ...DEFAULT_STATE, ...FIXTURE_RANGE };
    const clicks = ["politics", "pol-election", "pol-election-horserace"];
    const seenUrls: string[] = [];

    // initial render at the root
    let result = await dispatcher.load(requestUrl(state));
    seenUrls.push(result.url);
    let body = result.body as CoverageBody;
    expect(body.keys).toContain("politics");

    for (const nodeId of clicks) {
      // the clicked segment must exist in the current chart
      expect(body.keys).toContain(nodeId);
      state = drillDown(state, nodeId);
      result = await dispatcher.load(requestUrl(state));
      seenUrls.push(result.url);
      body = result.body as CoverageBody;

      const rows = stackedBarModel(body, state.colorBy);
      for (const row of rows) {
        const apiEntry = body.publishers[row.publisher]!;
        for (const seg of row.segments) {
          const apiSeg = apiEntry.segments.find((s) => s.key === seg.key)!;
          expect(seg.count).toBe(apiSeg.count);
          expect(seg.tooltip).toContain(`${apiSeg.count} articles`);
        }
      }
    }

    expect(state.path).toEqual(clicks);
    // exactly one API request per state change
    expect(dispatcher.requestsIssued).toBe(1 + clicks.length);
    expect(new Set(seenUrls).size).toBe(seenUrls.length);

    // subtopic view shows the single-segment slice from the API
    expect(body.keys).toEqual(["pol-election-horserace"]);
  });

  it("browser back restores the previous view via the URL", async () => {
    let state: ViewState = { ...DEFAULT_STATE, ...FIXTURE_RANGE };
    const history: string[] = [serializeState(state)];
    for (const nodeId of ["politics", "pol-election"]) {
      state = drillDown(state, nodeId);
      history.push(serializeState(state));
    }
    // pop one history entry, as the browser would on Back
    history.pop();
    const restored = deserializeState(history[history.length - 1] as string);
    expect(restored.path).toEqual(["politics"]);
    expect(requestUrl(restored)).toContain("node=politics");
  });
});
