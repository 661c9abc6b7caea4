/** DOM rendering. Every number shown here is read from a server response. */

import type { AttributionItem, Explanation, Fidelity, QuartileDiagnostics,
              Report, RuleItem, StabilityDoc, TreeDiagnostics } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K, className?: string, text?: string): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function shortFingerprint(fingerprint: string): string {
  return fingerprint.slice(0, 12);
}

function attributionBars(items: AttributionItem[], scale: number): HTMLElement {
  const list = el("div", "bars");
  for (const item of items) {
    const row = el("div", "bar-row");
    row.appendChild(el("span", "bar-label", item.description));
    const track = el("div", "bar-track");
    const bar = el("div", "bar " + (item.value >= 0 ? "positive" : "negative"));
    const width = scale > 0 ? Math.abs(item.value) / scale * 100 : 0;
    bar.style.width = `${width.toFixed(2)}%`;
    track.appendChild(bar);
    row.appendChild(track);
    const value = el("span", "bar-value", item.value.toFixed(4));
    value.dataset.value = String(item.value);
    row.appendChild(value);
    list.appendChild(row);
  }
  return list;
}

function ruleList(items: RuleItem[], classNames: string[]): HTMLElement {
  const list = el("div", "rules");
  for (const item of items) {
    const row = el("div", "rule-row" + (item.anchor_leaf ? " anchor" : ""));
    row.appendChild(el("span", "rule-text",
                       (item.anchor_leaf ? "▶ " : "") + item.rule));
    const probs = item.value
      .map((v, i) => `${classNames[i] ?? i}: ${v.toFixed(3)}`).join("  ");
    row.appendChild(el("span", "rule-probs", probs));
    list.appendChild(row);
  }
  return list;
}

export function explanationScale(explanation: Explanation): number {
  if (explanation.kind !== "attribution") return 0;
  const items = explanation.items as AttributionItem[];
  return items.reduce((acc, item) => Math.max(acc, Math.abs(item.value)), 0);
}

export function renderExplanation(container: HTMLElement, report: Report,
                                  fromCache: boolean,
                                  sharedScale?: number): void {
  container.replaceChildren();
  const header = el("div", "panel-header");
  header.appendChild(el("span", "panel-title",
                        `target: ${report.class_names[report.target_class]}`));
  const fp = el("code", "fingerprint",
                shortFingerprint(report.config_fingerprint));
  fp.dataset.fingerprint = report.config_fingerprint;
  fp.title = report.config_fingerprint;
  header.appendChild(fp);
  if (fromCache) header.appendChild(el("span", "badge cached", "cached"));
  container.appendChild(header);

  if (report.explanation.kind === "attribution") {
    const items = report.explanation.items as AttributionItem[];
    const scale = sharedScale ?? explanationScale(report.explanation);
    container.appendChild(attributionBars(items, scale));
  } else {
    container.appendChild(ruleList(report.explanation.items as RuleItem[],
                                   report.class_names));
  }
  container.appendChild(renderFidelity(report.fidelity));
  if (report.diagnostics) {
    container.appendChild(renderDiagnostics(report.diagnostics));
  }
}

export function renderFidelity(fidelity: Fidelity): HTMLElement {
  const box = el("div", "fidelity");
  const r2 = fidelity.degenerate ? "degenerate"
    : fidelity.weighted_r2 === null ? "—"
    : fidelity.weighted_r2.toFixed(4);
  const r2Badge = el("span", "metric", `R² ${r2}`);
  r2Badge.dataset.value = String(fidelity.weighted_r2);
  box.appendChild(r2Badge);
  const acc = el("span", "metric",
                 `agreement ${fidelity.weighted_accuracy.toFixed(4)}`);
  acc.dataset.value = String(fidelity.weighted_accuracy);
  box.appendChild(acc);
  box.appendChild(el("span", "metric muted", `n=${fidelity.n_samples}`));
  return box;
}

function occupancyStrip(fractions: number[], highlight: number): HTMLElement {
  const strip = el("div", "occupancy");
  fractions.forEach((fraction, index) => {
    const cell = el("div", "occ-cell" +
                    (index === highlight ? " anchor" : "") +
                    (fraction === 0 ? " empty" : ""));
    cell.style.flexGrow = String(Math.max(fraction, 0.02));
    cell.title = `${(fraction * 100).toFixed(1)}%`;
    strip.appendChild(cell);
  });
  return strip;
}

export function renderDiagnostics(
    diagnostics: QuartileDiagnostics | TreeDiagnostics): HTMLElement {
  const box = el("div", "diagnostics");
  if (diagnostics.kind === "quartile") {
    box.appendChild(el("div", "diag-title",
                       `bin occupancy (${diagnostics.empty_bin_count} empty)`));
    for (const feature of diagnostics.features) {
      const row = el("div", "diag-row");
      row.appendChild(el("span", "diag-label", feature.name));
      row.appendChild(occupancyStrip(feature.occupancy, feature.anchor_bin));
      box.appendChild(row);
    }
  } else {
    box.appendChild(el("div", "diag-title",
                       `leaf occupancy (${diagnostics.empty_leaf_count} empty)`));
    const row = el("div", "diag-row");
    row.appendChild(el("span", "diag-label", "leaves"));
    row.appendChild(occupancyStrip(diagnostics.occupancy,
                                   diagnostics.anchor_leaf));
    box.appendChild(row);
  }
  return box;
}

export function renderComparison(container: HTMLElement,
                                 pinned: Map<string, Report>,
                                 onUnpin: (fingerprint: string) => void): void {
  container.replaceChildren();
  if (pinned.size === 0) {
    container.appendChild(el("p", "muted",
                             "Pin explanations to compare them side by side."));
    return;
  }
  // shared axis: the largest |attribution| across all pinned reports
  let scale = 0;
  for (const report of pinned.values()) {
    scale = Math.max(scale, explanationScale(report.explanation));
  }
  const grid = el("div", "compare-grid");
  for (const [fingerprint, report] of pinned) {
    const cell = el("div", "compare-cell");
    const head = el("div", "panel-header");
    const fp = el("code", "fingerprint", shortFingerprint(fingerprint));
    fp.dataset.fingerprint = fingerprint;
    head.appendChild(fp);
    const unpin = el("button", "unpin", "unpin");
    unpin.addEventListener("click", () => onUnpin(fingerprint));
    head.appendChild(unpin);
    cell.appendChild(head);
    if (report.explanation.kind === "attribution") {
      cell.appendChild(attributionBars(
        report.explanation.items as AttributionItem[], scale));
    } else {
      cell.appendChild(ruleList(report.explanation.items as RuleItem[],
                                report.class_names));
    }
    cell.appendChild(renderFidelity(report.fidelity));
    grid.appendChild(cell);
  }
  container.appendChild(grid);
}

export function renderStability(container: HTMLElement,
                                doc: StabilityDoc): void {
  container.replaceChildren();
  const header = el("div", "panel-header");
  const jaccard = el("span", "badge jaccard",
                     `top-${doc.top_k} Jaccard ${doc.jaccard_mean.toFixed(3)}`);
  jaccard.dataset.value = String(doc.jaccard_mean);
  header.appendChild(jaccard);
  header.appendChild(el("span", "muted", `${doc.n_runs} runs`));
  container.appendChild(header);

  const scale = doc.attribution_mean.reduce(
    (acc, mean, i) => Math.max(acc, Math.abs(mean) + doc.attribution_std[i]), 0);
  const list = el("div", "bars");
  doc.feature_descriptions.forEach((description, i) => {
    const mean = doc.attribution_mean[i];
    const std = doc.attribution_std[i];
    const row = el("div", "bar-row");
    row.appendChild(el("span", "bar-label", description));
    const track = el("div", "bar-track");
    const bar = el("div", "bar " + (mean >= 0 ? "positive" : "negative"));
    bar.style.width = scale > 0
      ? `${(Math.abs(mean) / scale * 100).toFixed(2)}%` : "0%";
    track.appendChild(bar);
    const whisker = el("div", "whisker");
    whisker.style.width = scale > 0
      ? `${(2 * std / scale * 100).toFixed(2)}%` : "0%";
    whisker.style.left = scale > 0
      ? `${(Math.max(0, Math.abs(mean) - std) / scale * 100).toFixed(2)}%` : "0%";
    track.appendChild(whisker);
    row.appendChild(track);
    row.appendChild(el("span", "bar-value",
                       `${mean.toFixed(4)} ± ${std.toFixed(4)}`));
    list.appendChild(row);
  });
  container.appendChild(list);
}

export function renderErrorToast(container: HTMLElement, stage: string,
                                 message: string): void {
  const toast = el("div", "toast error");
  toast.appendChild(el("strong", undefined, `${stage}: `));
  toast.appendChild(el("span", undefined, message));
  container.appendChild(toast);
  setTimeout(() => toast.remove(), 6000);
}
