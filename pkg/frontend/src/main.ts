import { ReviewApi } from "./api.js";
import { ReviewQueueStore, type QueueState } from "./state.js";
import { titleText, type ChannelStatus, type ChannelView } from "./types.js";

// All product/topic text is rendered through textContent, never innerHTML,
// so CJK and arbitrary merchant text display verbatim.

const FILTERS: ChannelStatus[] = ["pending", "published", "rejected"];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderStats(state: QueueState): HTMLElement {
  const box = el("div", "stats");
  if (!state.stats) return box;
  const { pending, published, rejected, acceptance_rate } = state.stats;
  for (const [label, value] of [
    ["pending", String(pending)],
    ["published", String(published)],
    ["rejected", String(rejected)],
    ["acceptance rate", acceptance_rate === null ? "–" : `${acceptance_rate.toFixed(1)}%`],
  ]) {
    const cell = el("div", "stats-cell");
    cell.append(el("div", "stats-value", value), el("div", "stats-label", label));
    box.append(cell);
  }
  return box;
}

function renderChannel(channel: ChannelView, store: ReviewQueueStore,
                       state: QueueState): HTMLElement {
  const card = el("article", "channel");
  const header = el("header");
  header.append(
    el("h3", "channel-title", titleText(channel.title)),
    el("span", `badge badge-${channel.status}`, channel.status),
  );
  card.append(header);
  card.append(el("div", "channel-meta",
    `${channel.products.length} products · created ` +
    new Date(channel.created_at * 1000).toLocaleString()));

  const candidates = el("ul", "candidates");
  for (const candidate of channel.title_candidates) {
    candidates.append(
      el("li", "candidate", `${titleText(candidate)} (${candidate.score.toFixed(2)})`));
  }
  card.append(candidates);

  const marked = state.removals.get(channel.channel_id) ?? new Set<string>();
  const products = el("ul", "products");
  for (const product of channel.products) {
    const item = el("li", "product");
    const label = el("label");
    const checkbox = el("input") as HTMLInputElement;
    checkbox.type = "checkbox";
    checkbox.checked = marked.has(product.id);
    checkbox.disabled = channel.status !== "pending";
    checkbox.addEventListener("change", () =>
      store.toggleRemoval(channel.channel_id, product.id));
    label.append(checkbox,
      el("span", "product-id", product.id),
      el("span", "product-score", product.score.toFixed(2)));
    item.append(label);
    products.append(item);
  }
  card.append(products);

  if (channel.status === "pending") {
    const validation = store.validateRemovals(channel);
    if (validation) card.append(el("div", "inline-error", validation));
    const actions = el("div", "actions");
    const accept = el("button", "accept", "accept");
    accept.disabled = validation !== null;
    accept.addEventListener("click", () => void store.decide(channel.channel_id, "accept"));
    const reject = el("button", "reject", "reject");
    reject.addEventListener("click", () => void store.decide(channel.channel_id, "reject"));
    actions.append(accept, reject);
    card.append(actions);
  }
  return card;
}

function render(root: HTMLElement, store: ReviewQueueStore): void {
  const state = store.getState();
  root.replaceChildren();

  root.append(el("h1", "app-title", "channel review"));
  root.append(renderStats(state));

  const tabs = el("nav", "tabs");
  for (const filter of FILTERS) {
    const tab = el("button", state.filter === filter ? "tab active" : "tab", filter);
    tab.addEventListener("click", () => void store.setFilter(filter));
    tabs.append(tab);
  }
  root.append(tabs);

  if (state.error) {
    const banner = el("div", "banner banner-error");
    banner.append(el("span", undefined, state.error));
    const retry = el("button", "retry", "retry");
    retry.addEventListener("click", () => void store.retry());
    banner.append(retry);
    root.append(banner);
  }
  if (state.notice) {
    root.append(el("div", "banner banner-notice", state.notice));
  }

  if (state.loading) {
    root.append(el("div", "empty", "loading…"));
    return;
  }
  if (state.channels.length === 0) {
    root.append(el("div", "empty", `no ${state.filter} channels`));
  } else {
    const list = el("section", "channel-list");
    for (const channel of state.channels) {
      list.append(renderChannel(channel, store, state));
    }
    root.append(list);
  }

  if (state.pages > 1) {
    const pager = el("div", "pager");
    const prev = el("button", undefined, "‹ prev");
    prev.disabled = state.page <= 1;
    prev.addEventListener("click", () => void store.setPage(state.page - 1));
    const next = el("button", undefined, "next ›");
    next.disabled = state.page >= state.pages;
    next.addEventListener("click", () => void store.setPage(state.page + 1));
    pager.append(prev, el("span", "page-info", `page ${state.page} / ${state.pages}`), next);
    root.append(pager);
  }
}

export function mount(root: HTMLElement, reviewer: string): ReviewQueueStore {
  const store = new ReviewQueueStore(new ReviewApi(), reviewer);
  store.subscribe(() => render(root, store));
  void store.load();
  return store;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const reviewer = new URLSearchParams(location.search).get("reviewer") ?? "reviewer";
  mount(document.getElementById("app")!, reviewer);
}
