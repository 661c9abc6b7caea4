/** Schema-driven config controls, one group per pipeline block.
 *
 * Controls are generated from the /api/defaults field metadata, so the panel
 * stays in sync with the server by contract: ranges come from the field
 * specs (the kernel width slider cannot reach 0), enum fields become
 * selects, and `when` conditions drive visibility (switching the surrogate
 * from linear to tree hides ridge_lambda and reveals max_depth).
 */

import { fieldVisible, getPath } from "./paths.js";
import type { ConfigDoc, DefaultsPayload, FieldSpec } from "./types.js";

const GROUPS: [string, string][] = [
  ["representation", "Representation"],
  ["sampler", "Sampler"],
  ["kernel", "Kernel & weighting"],
  ["selection", "Feature selection"],
  ["surrogate", "Surrogate"],
  ["evaluation", "Evaluation"],
];

// slider ceilings for usability; the server-side maxima stay authoritative
const SLIDER_MAX: Record<string, number> = {
  "sampler.scale": 4.0,
  "sampler.alpha": 5.0,
  "kernel.width": 2.0,
  "surrogate.ridge_lambda": 1.0,
};

export interface ControlPanel {
  root: HTMLElement;
  refresh: () => void;
  setDisabled: (disabled: boolean) => void;
}

function sliderBounds(field: FieldSpec): { min: number; max: number } {
  const step = field.step ?? 1;
  let min = field.min ?? 0;
  if (field.exclusive_min) min += step; // the slider can never reach the open bound
  const max = Math.min(field.max ?? Infinity,
                       SLIDER_MAX[field.path] ?? field.max ?? 100);
  return { min, max };
}

function numericControl(field: FieldSpec, config: ConfigDoc,
                        onEdit: (path: string, value: unknown) => void): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "control-input";
  const current = Number(getPath(config, field.path) ?? field.default);

  if (field.step !== undefined) {
    const slider = document.createElement("input");
    slider.type = "range";
    const { min, max } = sliderBounds(field);
    slider.min = String(min);
    slider.max = String(max);
    slider.step = String(field.step);
    slider.value = String(current);
    const readout = document.createElement("span");
    readout.className = "readout";
    readout.textContent = String(current);
    slider.addEventListener("input", () => {
      const value = Number(slider.value);
      readout.textContent = String(value);
      onEdit(field.path, value);
    });
    wrap.append(slider, readout);
    return wrap;
  }

  const input = document.createElement("input");
  input.type = "number";
  if (field.min !== undefined) {
    input.min = String(field.exclusive_min ? field.min + 1 : field.min);
  }
  if (field.max !== undefined) input.max = String(field.max);
  input.step = field.type === "int" ? "1" : "any";
  input.value = String(current);
  const message = document.createElement("span");
  message.className = "invalid-message";
  input.addEventListener("input", () => {
    const value = field.type === "int"
      ? parseInt(input.value, 10) : Number(input.value);
    const minOk = field.min === undefined ||
      (field.exclusive_min ? value > field.min : value >= field.min);
    const maxOk = field.max === undefined || value <= field.max;
    if (Number.isNaN(value) || !minOk || !maxOk) {
      message.textContent = field.exclusive_min
        ? `${field.path} must be > ${field.min}`
        : `${field.path} out of range`;
      input.classList.add("invalid");
      return; // invalid edits never produce a config document
    }
    message.textContent = "";
    input.classList.remove("invalid");
    onEdit(field.path, value);
  });
  wrap.append(input, message);
  return wrap;
}

function enumControl(field: FieldSpec, config: ConfigDoc,
                     onEdit: (path: string, value: unknown) => void,
                     classNames: string[]): HTMLElement {
  const select = document.createElement("select");
  const options = field.type === "class_ref"
    ? ["(anchor argmax)", ...classNames]
    : field.options ?? [];
  for (const option of options) {
    const node = document.createElement("option");
    node.value = option;
    node.textContent = option;
    select.appendChild(node);
  }
  const current = getPath(config, field.path) ?? field.default;
  select.value = field.type === "class_ref"
    ? (current === null || current === undefined
       ? "(anchor argmax)" : String(current))
    : String(current);
  select.addEventListener("change", () => {
    const value = field.type === "class_ref"
      ? (select.value === "(anchor argmax)" ? null : select.value)
      : select.value;
    onEdit(field.path, value);
  });
  return select;
}

export function buildControlPanel(
    payload: DefaultsPayload,
    getConfig: () => ConfigDoc,
    onEdit: (path: string, value: unknown) => void): ControlPanel {
  const root = document.createElement("div");
  root.className = "controls";
  const rows: { field: FieldSpec; row: HTMLElement }[] = [];

  for (const [section, title] of GROUPS) {
    const fields = payload.fields.filter((f) => f.path.startsWith(section + "."));
    if (fields.length === 0) continue;
    const group = document.createElement("fieldset");
    group.className = "control-group";
    group.dataset.section = section;
    const legend = document.createElement("legend");
    legend.textContent = title;
    group.appendChild(legend);
    for (const field of fields) {
      const row = document.createElement("label");
      row.className = "control-row";
      row.dataset.path = field.path;
      const caption = document.createElement("span");
      caption.className = "control-label";
      caption.textContent = field.label;
      row.appendChild(caption);
      row.appendChild(
        field.type === "enum" || field.type === "class_ref"
          ? enumControl(field, getConfig(), onEdit, payload.class_names)
          : numericControl(field, getConfig(), onEdit));
      group.appendChild(row);
      rows.push({ field, row });
    }
    root.appendChild(group);
  }

  const refresh = () => {
    const config = getConfig();
    for (const { field, row } of rows) {
      row.style.display = fieldVisible(field, config) ? "" : "none";
    }
  };
  refresh();

  return {
    root,
    refresh,
    setDisabled(disabled: boolean) {
      root.querySelectorAll("input, select, button").forEach((node) => {
        (node as HTMLInputElement).disabled = disabled;
      });
    },
  };
}
