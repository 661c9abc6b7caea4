/** Controller wiring the store, API client, debounce and renderers.
 *
 * Config edits schedule one debounced explain; identical requests are served
 * from the fingerprint-keyed cache with a "cached" badge and no network
 * call; responses that arrive for superseded requests are discarded, so the
 * rendered report always matches the final control state.
 */

import { ApiClient, ApiError } from "./api.js";
import { buildControlPanel, type ControlPanel } from "./controls.js";
import { debounce, type Debounced } from "./debounce.js";
import { renderComparison, renderErrorToast, renderExplanation,
         renderStability } from "./render.js";
import { SessionStore } from "./store.js";
import type { DefaultsPayload } from "./types.js";

export interface WorkbenchElements {
  controls: HTMLElement;
  explanation: HTMLElement;
  comparison: HTMLElement;
  stability: HTMLElement;
  toasts: HTMLElement;
  status: HTMLElement;
}

export const DEBOUNCE_MS = 250;

export class Workbench {
  readonly store: SessionStore;
  readonly panel: ControlPanel;
  private api: ApiClient;
  private elements: WorkbenchElements;
  private debounced: Debounced;
  private inflight = 0;

  constructor(api: ApiClient, payload: DefaultsPayload,
              elements: WorkbenchElements, debounceMs = DEBOUNCE_MS) {
    this.api = api;
    this.elements = elements;
    this.store = new SessionStore(payload.defaults, payload.fields);
    this.debounced = debounce(() => { void this.explainNow(); }, debounceMs);
    this.panel = buildControlPanel(payload, () => this.store.config,
                                   (path, value) => this.onEdit(path, value));
    elements.controls.replaceChildren(this.panel.root);
    renderComparison(elements.comparison, this.store.pinned,
                     (fp) => this.unpin(fp));
  }

  onEdit(path: string, value: unknown): void {
    this.store.setField(path, value);
    this.panel.refresh();
    this.debounced.trigger();
  }

  setInstance(instance: number): void {
    this.store.instance = instance;
    this.debounced.trigger();
  }

  setSeed(seed: number): void {
    this.store.seed = seed;
    this.debounced.trigger();
  }

  /** One explain round trip; cache hits render immediately with a badge. */
  async explainNow(): Promise<void> {
    const cached = this.store.cached();
    if (cached) {
      this.store.showCached(cached);
      renderExplanation(this.elements.explanation, cached.report, true);
      this.setStatus("");
      return;
    }
    const { token, key, seed } = this.store.begin();
    this.setStatus("explaining…");
    this.inflight += 1;
    try {
      const response = await this.api.explain(this.store.config,
                                              this.store.instance, seed);
      if (this.store.settle(token, key, seed, response)) {
        renderExplanation(this.elements.explanation, response.report, false);
        this.setStatus("");
      }
      // stale responses are cached but never rendered
    } catch (error) {
      if (this.store.fail(token)) {
        this.setStatus("");
        const apiError = error instanceof ApiError
          ? error : new ApiError("transport", String(error));
        renderErrorToast(this.elements.toasts, apiError.stage,
                         apiError.message);
      }
    } finally {
      this.inflight -= 1;
    }
  }

  pinCurrent(): void {
    if (this.store.pinCurrent()) {
      renderComparison(this.elements.comparison, this.store.pinned,
                       (fp) => this.unpin(fp));
    }
  }

  unpin(fingerprint: string): void {
    this.store.unpin(fingerprint);
    renderComparison(this.elements.comparison, this.store.pinned,
                     (fp) => this.unpin(fp));
  }

  async runStability(seedCount: number, topK?: number): Promise<void> {
    if (seedCount < 2) {
      renderErrorToast(this.elements.toasts, "validate",
                       "stability needs at least 2 seeds");
      return;
    }
    this.setStatus("running stability…");
    try {
      const response = await this.api.stability(
        this.store.config, this.store.instance, seedCount, this.store.seed,
        topK);
      renderStability(this.elements.stability, response.stability);
    } catch (error) {
      const apiError = error instanceof ApiError
        ? error : new ApiError("transport", String(error));
      renderErrorToast(this.elements.toasts, apiError.stage, apiError.message);
    } finally {
      this.setStatus("");
    }
  }

  get busy(): boolean {
    return this.inflight > 0;
  }

  private setStatus(text: string): void {
    this.elements.status.textContent = text;
  }
}
