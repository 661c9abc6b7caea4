/** Session state: config document, explain lifecycle, cache, pinned reports.
 *
 * Invariants enforced here:
 *  - at most one explain request is "current"; responses to superseded
 *    requests are discarded (latest wins), and a response only lands if its
 *    report matches the request's seed (fingerprint + seed mismatch guard);
 *  - the cache is keyed by the full request (config, instance, seed), so an
 *    identical re-submission renders from cache without a network call;
 *  - pinned comparisons are keyed by the server's config fingerprint.
 */

import { clonePaths, pruneInapplicable, setPath, stableStringify } from "./paths.js";
import type { ConfigDoc, ExplainResponse, FieldSpec, Report } from "./types.js";

export interface CurrentView {
  response: ExplainResponse;
  fromCache: boolean;
}

export class SessionStore {
  config: ConfigDoc;
  instance = 0;
  seed = 0;
  pendingToken: number | null = null;
  current: CurrentView | null = null;
  readonly pinned = new Map<string, Report>();
  private fields: FieldSpec[];
  private cache = new Map<string, ExplainResponse>();
  private nextToken = 1;
  private maxPinned: number;

  constructor(defaults: ConfigDoc, fields: FieldSpec[], maxPinned = 2) {
    this.config = clonePaths(defaults);
    this.fields = fields;
    this.maxPinned = maxPinned;
  }

  setField(path: string, value: unknown): void {
    setPath(this.config, path, value);
    this.config = pruneInapplicable(this.config, this.fields);
  }

  requestKey(): string {
    return stableStringify({
      config: this.config,
      instance: this.instance,
      seed: this.seed,
    });
  }

  cached(): ExplainResponse | undefined {
    return this.cache.get(this.requestKey());
  }

  /** Start a request; the returned token must accompany the settlement. */
  begin(): { token: number; key: string; seed: number } {
    const token = this.nextToken++;
    this.pendingToken = token;
    return { token, key: this.requestKey(), seed: this.seed };
  }

  get pending(): boolean {
    return this.pendingToken !== null;
  }

  /** Apply a response; returns false (and changes nothing) when stale. */
  settle(token: number, key: string, expectedSeed: number,
         response: ExplainResponse): boolean {
    this.cache.set(key, response);  // correct answer for that request either way
    if (this.pendingToken !== token) return false;           // superseded
    if (response.report.seed !== expectedSeed) return false; // seed mismatch
    if (response.fingerprint !== response.report.config_fingerprint) {
      return false;  // envelope/report disagree: never display it
    }
    this.pendingToken = null;
    this.current = { response, fromCache: false };
    return true;
  }

  fail(token: number): boolean {
    if (this.pendingToken !== token) return false;
    this.pendingToken = null;
    return true;
  }

  showCached(response: ExplainResponse): void {
    this.current = { response, fromCache: true };
  }

  pinCurrent(): boolean {
    if (!this.current) return false;
    const report = this.current.response.report;
    if (this.pinned.has(report.config_fingerprint)) return false;
    this.pinned.set(report.config_fingerprint, report);
    while (this.pinned.size > this.maxPinned) {
      const oldest = this.pinned.keys().next().value as string;
      this.pinned.delete(oldest);
    }
    return true;
  }

  unpin(fingerprint: string): void {
    this.pinned.delete(fingerprint);
  }
}
