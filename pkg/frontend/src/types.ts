/** Wire types for the workbench HTTP API (all numbers come from the server). */

export interface FieldSpec {
  path: string;
  type: "int" | "float" | "enum" | "class_ref";
  default: unknown;
  label: string;
  options?: string[];
  min?: number;
  exclusive_min?: boolean;
  max?: number;
  step?: number;
  when?: { path: string; equals: string };
}

export interface DefaultsPayload {
  version: number;
  defaults: ConfigDoc;
  fields: FieldSpec[];
  class_names: string[];
  schema: { name: string; kind: string; categories?: string[] }[];
  row_count: number;
}

export type ConfigDoc = Record<string, Record<string, unknown>>;

export interface AttributionItem {
  feature_index: number;
  description: string;
  value: number;
}

export interface RuleItem {
  leaf_id: number;
  rule: string;
  value: number[];
  weight: number;
  anchor_leaf: boolean;
}

export interface Explanation {
  kind: "attribution" | "rules";
  target_class: number;
  items: AttributionItem[] | RuleItem[];
  intercept?: number;
}

export interface Fidelity {
  weighted_r2: number | null;
  weighted_accuracy: number;
  n_samples: number;
  target_class: number;
  degenerate: boolean;
}

export interface QuartileDiagnostics {
  kind: "quartile";
  features: { name: string; occupancy: number[]; anchor_bin: number;
              empty_bins: number }[];
  empty_bin_count: number;
}

export interface TreeDiagnostics {
  kind: "tree";
  occupancy: number[];
  anchor_leaf: number;
  empty_leaf_count: number;
}

export interface Report {
  report_version: number;
  config_fingerprint: string;
  seed: number;
  class_names: string[];
  target_class: number;
  anchor: { values: (number | string)[]; row_ref: number | null;
            probability: number[] };
  explanation: Explanation;
  fidelity: Fidelity;
  diagnostics: QuartileDiagnostics | TreeDiagnostics | null;
  interpretable_features: string[];
}

export interface ExplainResponse {
  version: number;
  fingerprint: string;
  report: Report;
}

export interface StabilityDoc {
  feature_descriptions: string[];
  attribution_mean: number[];
  attribution_std: number[];
  jaccard_mean: number;
  top_k: number;
  seeds: number[];
  n_runs: number;
}

export interface StabilityResponse {
  version: number;
  fingerprint: string;
  stability: StabilityDoc;
}

export interface ApiErrorBody {
  version: number;
  error: { stage: string; message: string };
}
