/** Acceptance-level tests: one debounced explain per control change, rendered
 * numbers equal to the response body, distinct pinned fingerprints. */

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { getPath } from "../src/paths.js";
import { DEBOUNCE_MS, Workbench, type WorkbenchElements } from "../src/workbench.js";
import type { ConfigDoc } from "../src/types.js";
import { defaultsPayload, explainResponse, fingerprintOf, stabilityResponse,
         stubFetch } from "./fixtures.js";

function mountElements(): WorkbenchElements {
  document.body.innerHTML = `
    <div id="controls"></div><div id="explanation"></div>
    <div id="comparison"></div><div id="stability"></div>
    <div id="toasts"></div><div id="status"></div>`;
  const byId = (id: string) => document.getElementById(id) as HTMLElement;
  return {
    controls: byId("controls"),
    explanation: byId("explanation"),
    comparison: byId("comparison"),
    stability: byId("stability"),
    toasts: byId("toasts"),
    status: byId("status"),
  };
}

function serviceHandler() {
  return (url: string, body: unknown) => {
    if (url.endsWith("/api/explain")) {
      const request = body as { config: ConfigDoc; seed: number };
      const width = Number(getPath(request.config, "kernel.width"));
      // attribution values depend on the config so tests can tell runs apart
      return explainResponse(fingerprintOf(request.config), request.seed,
                             [0.9 - width / 10, -0.2, 0.05]);
    }
    if (url.endsWith("/api/stability")) {
      const request = body as { config: ConfigDoc };
      return stabilityResponse(fingerprintOf(request.config));
    }
    throw new Error(`unexpected ${url}`);
  };
}

function build() {
  const { impl, calls } = stubFetch(serviceHandler());
  const api = new ApiClient("", impl);
  const elements = mountElements();
  const workbench = new Workbench(api, defaultsPayload(), elements);
  return { workbench, calls, elements };
}

beforeEach(() => vi.useFakeTimers());
afterEach(() => vi.useRealTimers());

describe("debounced explain loop", () => {
  it("one slider change burst triggers exactly one /api/explain call whose "
     + "rendered values and fingerprint equal the response body", async () => {
    const { workbench, calls, elements } = build();
    const slider = elements.controls.querySelector(
      '[data-path="kernel.width"] input[type="range"]') as HTMLInputElement;

    // user drags the slider through several values in quick succession
    for (const value of ["0.30", "0.40", "0.50"]) {
      slider.value = value;
      slider.dispatchEvent(new Event("input"));
      await vi.advanceTimersByTimeAsync(50);  // within the debounce window
    }
    expect(calls.length).toBe(0);
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS);
    expect(calls.length).toBe(1);

    const sent = calls[0].body as { config: ConfigDoc; seed: number };
    expect(getPath(sent.config, "kernel.width")).toBe(0.5);

    // rendered attribution values are exactly the response body's values
    const response = workbench.store.current!.response;
    const rendered = [...elements.explanation.querySelectorAll(".bar-value")]
      .map((node) => Number((node as HTMLElement).dataset.value));
    const expected = (response.report.explanation.items as
      { value: number }[]).map((item) => item.value);
    expect(rendered).toEqual(expected);

    // displayed fingerprint equals the fingerprint in the response
    const fp = elements.explanation.querySelector(
      ".fingerprint") as HTMLElement;
    expect(fp.dataset.fingerprint).toBe(response.fingerprint);
    expect(response.fingerprint).toBe(
      response.report.config_fingerprint);
  });

  it("identical config+seed resubmission renders from cache with a badge "
     + "and no new network call", async () => {
    const { workbench, calls, elements } = build();
    await workbench.explainNow();
    expect(calls.length).toBe(1);
    expect(elements.explanation.querySelector(".badge.cached")).toBeNull();

    await workbench.explainNow();
    expect(calls.length).toBe(1);  // cache hit: no network
    expect(elements.explanation.querySelector(".badge.cached")).not.toBeNull();
    expect(workbench.store.current!.fromCache).toBe(true);
  });

  it("a stale response never overwrites the latest render", async () => {
    const gate: { release?: () => void } = {};
    const handler = serviceHandler();
    const { impl, calls } = stubFetch(async (url, body) => {
      const request = body as { config: ConfigDoc };
      if (url.endsWith("/api/explain") &&
          getPath(request.config, "kernel.width") === 0.25) {
        // first request (default width) hangs until released
        await new Promise<void>((resolve) => { gate.release = resolve; });
      }
      return handler(url, body);
    });
    const elements = mountElements();
    const workbench = new Workbench(new ApiClient("", impl),
                                    defaultsPayload(), elements);

    const slow = workbench.explainNow();          // width 0.25, will hang
    await vi.advanceTimersByTimeAsync(1);
    workbench.onEdit("kernel.width", 0.75);       // supersedes it
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS);
    expect(calls.length).toBe(2);

    gate.release!();                              // slow response lands last
    await slow;
    const shown = workbench.store.current!.response;
    expect(getPath(shown.report as never, "") ?? true).toBeTruthy();
    const fp = elements.explanation.querySelector(
      ".fingerprint") as HTMLElement;
    expect(fp.dataset.fingerprint).toBe(shown.fingerprint);
    // the rendered report corresponds to the final control state (width 0.75)
    const sentLast = calls[1].body as { config: ConfigDoc };
    expect(fingerprintOf(sentLast.config)).toBe(shown.fingerprint);
  });
});

describe("pinned comparison", () => {
  it("two pinned configs show two distinct fingerprints side by side",
     async () => {
    const { workbench, elements } = build();
    await workbench.explainNow();
    workbench.pinCurrent();
    workbench.onEdit("kernel.width", 0.9);
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS);
    workbench.pinCurrent();

    const cells = elements.comparison.querySelectorAll(".compare-cell");
    expect(cells.length).toBe(2);
    const fingerprints = [...elements.comparison.querySelectorAll(
      ".fingerprint")].map((n) => (n as HTMLElement).dataset.fingerprint);
    expect(fingerprints.length).toBe(2);
    expect(new Set(fingerprints).size).toBe(2);
    // bars in both cells share one axis scale (widths comparable)
    const bars = elements.comparison.querySelectorAll(".bar");
    expect(bars.length).toBeGreaterThan(0);
  });
});

describe("stability panel", () => {
  it("renders jaccard badge and per-feature error bars", async () => {
    const { workbench, elements } = build();
    await workbench.runStability(20, 1);
    const badge = elements.stability.querySelector(
      ".badge.jaccard") as HTMLElement;
    expect(badge).not.toBeNull();
    expect(Number(badge.dataset.value)).toBeGreaterThanOrEqual(0.9);
    expect(elements.stability.querySelectorAll(".bar-row").length).toBe(3);
    expect(elements.stability.querySelectorAll(".whisker").length).toBe(3);
  });

  it("blocks seed counts below 2 client-side", async () => {
    const { workbench, calls, elements } = build();
    await workbench.runStability(1);
    expect(calls.length).toBe(0);
    expect(elements.toasts.textContent).toContain("at least 2 seeds");
  });
});

describe("error handling", () => {
  it("shows a stage-named toast on API errors", async () => {
    const { impl } = stubFetch(() => ({
      version: 1, error: { stage: "validate",
                           message: "kernel.width must be > 0" },
    }));
    const elements = mountElements();
    const workbench = new Workbench(new ApiClient("", impl),
                                    defaultsPayload(), elements);
    await workbench.explainNow();
    expect(elements.toasts.textContent).toContain("validate");
    expect(elements.toasts.textContent).toContain("kernel.width");
    expect(workbench.store.pending).toBe(false);
  });
});
