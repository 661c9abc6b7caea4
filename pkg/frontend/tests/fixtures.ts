import { stableStringify } from "../src/paths.js";
import type { ConfigDoc, DefaultsPayload, ExplainResponse, Report,
              StabilityResponse } from "../src/types.js";

export function defaultsPayload(): DefaultsPayload {
  return {
    version: 1,
    defaults: {
      representation: { kind: "quartile" },
      sampler: { kind: "gaussian", n_samples: 1000, scale: 1.0,
                 center: "anchor" },
      kernel: { width: 0.25, metric: "gower_mixed",
                distance_domain: "original" },
      selection: { method: "none", k: 5 },
      surrogate: { kind: "linear", ridge_lambda: 0.01, target_class: null },
      evaluation: { stability_k: 3, stability_seeds: 5 },
    },
    fields: [
      { path: "representation.kind", type: "enum", default: "quartile",
        label: "Representation", options: ["quartile", "tree"] },
      { path: "representation.max_depth", type: "int", default: 3,
        label: "Partition tree depth limit", min: 0, exclusive_min: false,
        max: 10, when: { path: "representation.kind", equals: "tree" } },
      { path: "sampler.kind", type: "enum", default: "gaussian",
        label: "Sampler", options: ["gaussian", "mixup"] },
      { path: "sampler.n_samples", type: "int", default: 1000,
        label: "Neighbourhood size", min: 1, exclusive_min: false,
        max: 100000 },
      { path: "sampler.scale", type: "float", default: 1.0,
        label: "Gaussian scale multiplier", min: 0, exclusive_min: true,
        max: 100, step: 0.05,
        when: { path: "sampler.kind", equals: "gaussian" } },
      { path: "sampler.center", type: "enum", default: "anchor",
        label: "Gaussian center", options: ["anchor", "global_mean"],
        when: { path: "sampler.kind", equals: "gaussian" } },
      { path: "sampler.alpha", type: "float", default: 1.0,
        label: "Mixup Beta concentration", min: 0, exclusive_min: true,
        max: 100, step: 0.05,
        when: { path: "sampler.kind", equals: "mixup" } },
      { path: "kernel.width", type: "float", default: 0.25,
        label: "Kernel width", min: 0, exclusive_min: true, max: 100,
        step: 0.01 },
      { path: "selection.method", type: "enum", default: "none",
        label: "Feature selection",
        options: ["none", "highest_weight", "forward_selection"] },
      { path: "selection.k", type: "int", default: 5,
        label: "Selected feature count", min: 1, exclusive_min: false,
        max: 1000 },
      { path: "surrogate.kind", type: "enum", default: "linear",
        label: "Surrogate model", options: ["linear", "tree"] },
      { path: "surrogate.ridge_lambda", type: "float", default: 0.01,
        label: "Ridge penalty", min: 0, exclusive_min: false, max: 1000,
        step: 0.001, when: { path: "surrogate.kind", equals: "linear" } },
      { path: "surrogate.target_class", type: "class_ref", default: null,
        label: "Target class",
        when: { path: "surrogate.kind", equals: "linear" } },
      { path: "surrogate.max_depth", type: "int", default: 3,
        label: "Surrogate tree depth limit", min: 0, exclusive_min: false,
        max: 10, when: { path: "surrogate.kind", equals: "tree" } },
    ],
    class_names: ["above", "below"],
    schema: [
      { name: "x0", kind: "numeric" },
      { name: "x1", kind: "numeric" },
      { name: "color", kind: "categorical", categories: ["red", "green"] },
    ],
    row_count: 200,
  };
}

export function makeReport(fingerprint: string, seed: number,
                           values: number[]): Report {
  return {
    report_version: 1,
    config_fingerprint: fingerprint,
    seed,
    class_names: ["above", "below"],
    target_class: 0,
    anchor: { values: [0.9, 2.0, "red"], row_ref: 5,
              probability: [1.0, 0.0] },
    explanation: {
      kind: "attribution",
      target_class: 0,
      intercept: 0.01,
      items: values.map((value, index) => ({
        feature_index: index,
        description: ["x0 > 0", "x1 ≤ 3.1", "color = red"][index] ?? `f${index}`,
        value,
      })).sort((a, b) => Math.abs(b.value) - Math.abs(a.value)),
    },
    fidelity: { weighted_r2: 0.9721, weighted_accuracy: 0.9913,
                n_samples: 1000, target_class: 0, degenerate: false },
    diagnostics: {
      kind: "quartile",
      features: [
        { name: "x0", occupancy: [0.1, 0.15, 0.0, 0.75], anchor_bin: 3,
          empty_bins: 1 },
        { name: "x1", occupancy: [0.25, 0.25, 0.25, 0.25], anchor_bin: 1,
          empty_bins: 0 },
        { name: "color", occupancy: [0.6, 0.4], anchor_bin: 0,
          empty_bins: 0 },
      ],
      empty_bin_count: 1,
    },
    interpretable_features: ["x0 > 0", "x1 ≤ 3.1", "color = red"],
  };
}

export function explainResponse(fingerprint: string, seed: number,
                                values: number[]): ExplainResponse {
  return { version: 1, fingerprint,
           report: makeReport(fingerprint, seed, values) };
}

export function stabilityResponse(fingerprint: string): StabilityResponse {
  return {
    version: 1,
    fingerprint,
    stability: {
      feature_descriptions: ["x0 > 0", "x1 ≤ 3.1", "color = red"],
      attribution_mean: [0.91, -0.02, 0.005],
      attribution_std: [0.03, 0.01, 0.004],
      jaccard_mean: 0.95,
      top_k: 1,
      seeds: Array.from({ length: 20 }, (_, i) => i),
      n_runs: 20,
    },
  };
}

/** fetch stub recording calls; responses keyed by URL path. */
export function stubFetch(handler: (url: string, body: unknown) =>
    unknown | Promise<unknown>) {
  const calls: { url: string; body: unknown }[] = [];
  const impl = async (url: string, init?: RequestInit): Promise<Response> => {
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    calls.push({ url, body });
    const result = await handler(url, body);
    return new Response(JSON.stringify(result), {
      status: 200, headers: { "Content-Type": "application/json" },
    });
  };
  return { impl, calls };
}

export function fingerprintOf(config: ConfigDoc): string {
  // test-only stand-in: any stable distinct string per config works
  let hash = 0;
  const text = stableStringify(config);
  for (let i = 0; i < text.length; i++) {
    hash = (hash * 31 + text.charCodeAt(i)) >>> 0;
  }
  return hash.toString(16).padStart(8, "0").repeat(8);
}
