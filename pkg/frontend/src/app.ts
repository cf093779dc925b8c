/** Page entry point: wire client, store, view, and the stats poll.

Query parameters tune the page without a rebuild: ``?api=`` points at
a service on another origin path, ``?poll=`` adjusts the stats poll
interval in milliseconds.
*/

import { ReviewClient } from "./client.js";
import { mountApp } from "./dom.js";
import { DEFAULT_POLL_INTERVAL_MS, ReviewStore } from "./store.js";

function intParam(params: URLSearchParams, name: string, fallback: number): number {
  const raw = params.get(name);
  if (raw === null) return fallback;
  const value = Number.parseInt(raw, 10);
  return Number.isFinite(value) && value > 0 ? value : fallback;
}

export function boot(root: HTMLElement): ReviewStore {
  const params = new URLSearchParams(root.ownerDocument.location?.search ?? "");
  const client = new ReviewClient({ baseUrl: params.get("api") ?? "" });
  const store = new ReviewStore(client);
  mountApp(root, store);
  void store.refresh();
  void store.pollStatsOnce();
  store.startPolling(intParam(params, "poll", DEFAULT_POLL_INTERVAL_MS));
  return store;
}

const rootEl = typeof document !== "undefined" ? document.getElementById("app") : null;
if (rootEl !== null) {
  boot(rootEl);
}
