/** Thin DOM layer: renders the store and binds triage shortcuts.

Rendering is a full redraw on every store change; the queue is
human-paced, so simplicity beats incremental updates. Nodes are built
with createElement/textContent, never markup strings, so labels render
verbatim. Shortcuts: a accept, r reject, s skip, j/k or arrows move,
enter resends a held verdict.
*/

import type { ReviewStore, Row } from "./store.js";
import type { NodeContext } from "./types.js";

const CONTEXT_NEIGHBORS_SHOWN = 3;

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function contextLine(doc: Document, context: NodeContext): HTMLElement {
  const parts = context.neighbors
    .slice(0, CONTEXT_NEIGHBORS_SHOWN)
    .map((n) => (n.direction === "out" ? `${n.relation} ${n.label}` : `${n.label} ${n.relation}`));
  const text = parts.length > 0 ? parts.join(" · ") : "no neighbors";
  return el(doc, "div", "context-line", `${context.label}: ${text}`);
}

function renderRow(doc: Document, store: ReviewStore, row: Row): HTMLLIElement {
  const li = el(doc, "li", "row");
  li.dataset.id = row.candidate.id;
  if (row.candidate.id === store.selectedId) li.classList.add("selected");

  const edge = el(doc, "div", "edge");
  const head = el(doc, "span", "head", row.item.head_context.label);
  head.title = row.item.head_context.node_type;
  const rel = el(doc, "span", "rel", row.candidate.relation);
  const tail = el(doc, "span", "tail", row.item.tail_context.label);
  tail.title = row.item.tail_context.node_type;
  edge.append(head, rel, tail);
  li.appendChild(edge);

  const prob = el(doc, "div", "prob");
  const bar = el(doc, "div", "prob-bar");
  const fill = el(doc, "div", "fill");
  fill.style.width = `${Math.round(row.candidate.probability * 100)}%`;
  bar.appendChild(fill);
  prob.append(bar, el(doc, "span", "prob-num", row.candidate.probability.toFixed(3)));
  li.appendChild(prob);

  const markers = el(doc, "div", "markers");
  if (row.optimistic !== null) {
    markers.appendChild(el(doc, "span", "optimistic", `${row.optimistic}ing…`));
  }
  if (row.conflict !== null) {
    markers.appendChild(
      el(
        doc,
        "span",
        "conflict-marker",
        `version conflict (sent ${row.conflict.submitted}, now ${row.conflict.current}): ` +
          `${row.heldVerdict ?? "verdict"} held, enter resends`,
      ),
    );
  } else if (row.error !== null) {
    const note = row.heldVerdict !== null ? ": verdict held, enter resends" : "";
    markers.appendChild(el(doc, "span", "error-marker", row.error + note));
  }
  if (markers.childNodes.length > 0) li.appendChild(markers);

  li.appendChild(contextLine(doc, row.item.head_context));
  li.appendChild(contextLine(doc, row.item.tail_context));

  const actions = el(doc, "div", "actions");
  const accept = el(doc, "button", "accept", "accept");
  const reject = el(doc, "button", "reject", "reject");
  const skip = el(doc, "button", "skip", "skip");
  accept.addEventListener("click", () => void store.submit(row.candidate.id, "accept"));
  reject.addEventListener("click", () => void store.submit(row.candidate.id, "reject"));
  skip.addEventListener("click", () => store.skip(row.candidate.id));
  actions.append(accept, reject, skip);
  li.appendChild(actions);
  return li;
}

function renderTrayRow(doc: Document, row: Row): HTMLLIElement {
  const li = el(doc, "li", "row tray-row");
  li.dataset.id = row.candidate.id;
  li.append(
    el(doc, "span", "head", row.item.head_context.label),
    el(doc, "span", "rel", row.candidate.relation),
    el(doc, "span", "tail", row.item.tail_context.label),
    el(doc, "span", "status", row.candidate.status),
    el(doc, "span", "prob-num", row.candidate.probability.toFixed(3)),
  );
  return li;
}

const STAT_KEYS = ["pending", "accepted", "rejected", "removed"] as const;

function renderStats(doc: Document, store: ReviewStore, panel: HTMLElement): void {
  panel.replaceChildren();
  const data = store.stats.data;
  if (store.stats.stale) {
    panel.appendChild(el(doc, "span", "stale-badge", "stale"));
  }
  if (data === null) {
    panel.appendChild(el(doc, "span", "stat", "no stats yet"));
    return;
  }
  const cell = (key: string, label: string, value: number) => {
    const span = el(doc, "span", "stat");
    span.dataset.k = key;
    span.append(el(doc, "span", "stat-label", label), el(doc, "span", "stat-value", String(value)));
    return span;
  };
  panel.appendChild(cell("iteration", "iteration", data.iteration));
  panel.appendChild(cell("nodes", "nodes", data.node_count));
  panel.appendChild(cell("edges", "edges", data.edge_count));
  for (const key of STAT_KEYS) {
    panel.appendChild(cell(key, key, data.status_counts[key] ?? 0));
  }
}

export interface MountHandle {
  render: () => void;
  unmount: () => void;
}

export function mountApp(root: HTMLElement, store: ReviewStore): MountHandle {
  const doc = root.ownerDocument;
  root.replaceChildren();
  root.classList.add("review-app");

  const banner = el(doc, "div", "banner");
  banner.id = "banner";
  banner.hidden = true;
  banner.addEventListener("click", () => store.dismissBanner());

  const header = el(doc, "header");
  header.appendChild(el(doc, "h1", undefined, "candidate review"));
  const statsPanel = el(doc, "section", "stats");
  statsPanel.id = "stats";
  header.appendChild(statsPanel);

  const queue = el(doc, "ul", "queue");
  queue.id = "queue";

  const traySection = el(doc, "section", "tray");
  traySection.id = "tray";
  traySection.appendChild(el(doc, "h2", undefined, "removed this session"));
  const trayList = el(doc, "ul", "tray-list");
  traySection.appendChild(trayList);

  const help = el(
    doc,
    "footer",
    "help",
    "a accept · r reject · s skip · j/k move · enter resend held verdict",
  );

  root.append(banner, header, queue, traySection, help);

  const render = () => {
    banner.hidden = store.banner === null;
    banner.textContent = store.banner ?? "";

    renderStats(doc, store, statsPanel);

    queue.replaceChildren();
    if (store.loadError !== null) {
      queue.appendChild(el(doc, "li", "load-error", `queue unavailable: ${store.loadError}`));
    }
    if (store.queue.length === 0) {
      queue.appendChild(el(doc, "li", "empty", "no pending candidates"));
    } else {
      for (const row of store.queue) queue.appendChild(renderRow(doc, store, row));
    }

    trayList.replaceChildren();
    traySection.hidden = store.tray.length === 0;
    for (const row of store.tray) trayList.appendChild(renderTrayRow(doc, row));
  };

  const onKey = (event: KeyboardEvent) => {
    if (event.ctrlKey || event.metaKey || event.altKey) return;
    const target = event.target as HTMLElement | null;
    if (target && (target.tagName === "INPUT" || target.tagName === "TEXTAREA")) return;
    const selected = store.selectedRow();
    switch (event.key) {
      case "a":
        if (selected) void store.submit(selected.candidate.id, "accept");
        break;
      case "r":
        if (selected) void store.submit(selected.candidate.id, "reject");
        break;
      case "s":
        if (selected) store.skip(selected.candidate.id);
        break;
      case "j":
      case "ArrowDown":
        store.selectNext();
        break;
      case "k":
      case "ArrowUp":
        store.selectPrev();
        break;
      case "Enter":
        if (selected && selected.heldVerdict !== null) void store.retry(selected.candidate.id);
        break;
      default:
        return;
    }
    event.preventDefault();
  };

  doc.addEventListener("keydown", onKey);
  const unsubscribe = store.subscribe(render);
  render();

  return {
    render,
    unmount: () => {
      unsubscribe();
      doc.removeEventListener("keydown", onKey);
      root.replaceChildren();
    },
  };
}
