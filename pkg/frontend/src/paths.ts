/** Dotted-path access into config documents plus stable stringification. */

import type { ConfigDoc, FieldSpec } from "./types.js";

export function getPath(doc: ConfigDoc, path: string): unknown {
  const [section, key] = path.split(".");
  return doc[section]?.[key];
}

export function setPath(doc: ConfigDoc, path: string, value: unknown): void {
  const [section, key] = path.split(".");
  if (!doc[section]) doc[section] = {};
  doc[section][key] = value;
}

export function clonePaths(doc: ConfigDoc): ConfigDoc {
  return JSON.parse(JSON.stringify(doc)) as ConfigDoc;
}

/** A field applies only when its `when` condition matches the document. */
export function fieldVisible(field: FieldSpec, doc: ConfigDoc): boolean {
  if (!field.when) return true;
  return getPath(doc, field.when.path) === field.when.equals;
}

/**
 * Drop section fields whose `when` condition no longer holds (e.g. mixup's
 * alpha after switching to the gaussian sampler), mirroring the server rule
 * that inapplicable fields are violations.
 */
export function pruneInapplicable(doc: ConfigDoc, fields: FieldSpec[]): ConfigDoc {
  const pruned = clonePaths(doc);
  for (const field of fields) {
    if (!field.when) continue;
    const [section, key] = field.path.split(".");
    if (pruned[section] && key in pruned[section] &&
        !fieldVisible(field, pruned)) {
      delete pruned[section][key];
    }
  }
  return pruned;
}

/** Deterministic request key: JSON with lexicographically sorted keys. */
export function stableStringify(value: unknown): string {
  if (value === null || typeof value !== "object") {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return "[" + value.map(stableStringify).join(",") + "]";
  }
  const entries = Object.keys(value as Record<string, unknown>).sort()
    .map((key) => JSON.stringify(key) + ":" +
         stableStringify((value as Record<string, unknown>)[key]));
  return "{" + entries.join(",") + "}";
}
