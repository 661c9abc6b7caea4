/** Boot: fetch the server defaults, build the workbench, wire page chrome. */

import { ApiClient } from "./api.js";
import { Workbench, type WorkbenchElements } from "./workbench.js";

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

async function boot(): Promise<void> {
  const api = new ApiClient("");
  const banner = byId("banner");
  const elements: WorkbenchElements = {
    controls: byId("controls"),
    explanation: byId("explanation"),
    comparison: byId("comparison"),
    stability: byId("stability"),
    toasts: byId("toasts"),
    status: byId("status"),
  };

  let payload;
  try {
    payload = await api.defaults();
  } catch {
    banner.replaceChildren();
    banner.appendChild(Object.assign(document.createElement("span"), {
      textContent: "service unreachable — is `surrobench serve` running?",
    }));
    const retry = document.createElement("button");
    retry.textContent = "retry";
    retry.addEventListener("click", () => { void boot(); });
    banner.appendChild(retry);
    banner.hidden = false;
    return;
  }
  banner.hidden = true;

  const workbench = new Workbench(api, payload, elements);

  const instance = byId("instance") as HTMLInputElement;
  instance.max = String(payload.row_count - 1);
  instance.addEventListener("change", () =>
    workbench.setInstance(parseInt(instance.value, 10) || 0));

  const seed = byId("seed") as HTMLInputElement;
  seed.addEventListener("change", () =>
    workbench.setSeed(parseInt(seed.value, 10) || 0));

  byId("pin").addEventListener("click", () => workbench.pinCurrent());

  const seedCount = byId("stability-seeds") as HTMLInputElement;
  byId("run-stability").addEventListener("click", () => {
    void workbench.runStability(parseInt(seedCount.value, 10) || 0);
  });

  void workbench.explainNow();
}

void boot();
