// DOM rendering. All data shown comes straight from store state; the only
// local state is the inline label editor's draft text.

import type { ReviewStore, ReviewState } from "./state.js";
import type { ClusterCard } from "./types.js";

const CHAR_ID = /CHAR\d+/g;

export function highlightCharacters(
  text: string,
  aliases: Record<string, { canonical: string }>,
): DocumentFragment {
  const fragment = document.createDocumentFragment();
  let cursor = 0;
  for (const match of text.matchAll(CHAR_ID)) {
    const start = match.index ?? 0;
    if (start > cursor) fragment.append(text.slice(cursor, start));
    const span = document.createElement("span");
    span.className = "char-id";
    span.textContent = match[0];
    const canonical = aliases[match[0]]?.canonical;
    if (canonical) span.title = canonical;
    fragment.append(span);
    cursor = start + match[0].length;
  }
  if (cursor < text.length) fragment.append(text.slice(cursor));
  return fragment;
}

function statusBadge(card: ClusterCard): HTMLElement {
  const badge = document.createElement("span");
  badge.className = `badge badge-${card.status}`;
  badge.textContent = card.status;
  return badge;
}

function renderCard(store: ReviewStore, state: ReviewState, card: ClusterCard): HTMLElement {
  const root = document.createElement("article");
  root.className = "card" + (state.selected === card.cluster_id ? " selected" : "");
  root.dataset.clusterId = String(card.cluster_id);
  root.addEventListener("click", () => store.select(card.cluster_id));

  const head = document.createElement("header");
  const title = document.createElement("h3");
  title.textContent = `#${card.cluster_id} ${card.final_label ?? card.label}`;
  const size = document.createElement("span");
  size.className = "size";
  size.textContent = `${card.size} sentences`;
  head.append(title, statusBadge(card), size);
  root.append(head);

  const summary = document.createElement("p");
  summary.className = "summary";
  summary.append(highlightCharacters(card.summary, state.aliases));
  root.append(summary);

  if (card.members.length > 0) {
    const list = document.createElement("ul");
    list.className = "members";
    for (const member of card.members) {
      const item = document.createElement("li");
      item.append(highlightCharacters(member.text, state.aliases));
      list.append(item);
    }
    root.append(list);
  }

  const actions = document.createElement("div");
  actions.className = "actions";

  const validate = document.createElement("button");
  validate.textContent = "validate";
  validate.addEventListener("click", (ev) => {
    ev.stopPropagation();
    void store.decide(card.cluster_id, "validate");
  });

  const edit = document.createElement("button");
  edit.textContent = "edit";
  edit.addEventListener("click", (ev) => {
    ev.stopPropagation();
    openEditor(root, store, card);
  });

  const reject = document.createElement("button");
  reject.textContent = "reject";
  reject.addEventListener("click", (ev) => {
    ev.stopPropagation();
    void store.decide(card.cluster_id, "reject");
  });

  actions.append(validate, edit, reject);
  root.append(actions);
  return root;
}

function openEditor(root: HTMLElement, store: ReviewStore, card: ClusterCard): void {
  if (root.querySelector(".editor")) return;
  const editor = document.createElement("div");
  editor.className = "editor";
  const input = document.createElement("input");
  input.value = card.final_label ?? card.label; // prefilled with the automatic label
  const save = document.createElement("button");
  save.textContent = "save";
  save.addEventListener("click", (ev) => {
    ev.stopPropagation();
    void store.decide(card.cluster_id, "edit", input.value.trim());
    editor.remove();
  });
  editor.append(input, save);
  editor.addEventListener("click", (ev) => ev.stopPropagation());
  root.append(editor);
  input.focus();
}

export function render(container: HTMLElement, store: ReviewStore, state: ReviewState): void {
  container.replaceChildren();

  if (state.banner) {
    const banner = document.createElement("div");
    banner.className = "banner";
    banner.textContent = state.banner;
    const retry = document.createElement("button");
    retry.textContent = "retry";
    retry.addEventListener("click", () => void store.load());
    banner.append(retry);
    container.append(banner);
  }
  if (state.notice) {
    const notice = document.createElement("div");
    notice.className = "notice";
    notice.textContent = state.notice;
    container.append(notice);
  }

  const toolbar = document.createElement("div");
  toolbar.className = "toolbar";

  const filter = document.createElement("select");
  for (const value of ["", "pending", "validated", "edited", "rejected"]) {
    const option = document.createElement("option");
    option.value = value;
    option.textContent = value || "all statuses";
    if ((state.filter ?? "") === value) option.selected = true;
    filter.append(option);
  }
  filter.addEventListener("change", () => {
    const status = filter.value || undefined;
    void store.load({ status: status as never, page: 1 });
  });

  const sort = document.createElement("select");
  for (const value of ["cluster_id", "size"]) {
    const option = document.createElement("option");
    option.value = value;
    option.textContent = `sort: ${value}`;
    if (state.sort === value) option.selected = true;
    sort.append(option);
  }
  sort.addEventListener("change", () => {
    void store.load({ sort: sort.value as "size" | "cluster_id", page: 1 });
  });

  const pager = document.createElement("span");
  pager.className = "pager";
  const prev = document.createElement("button");
  prev.textContent = "prev";
  prev.disabled = state.page <= 1;
  prev.addEventListener("click", () => void store.load({ page: state.page - 1 }));
  const next = document.createElement("button");
  next.textContent = "next";
  next.disabled = state.page >= state.pages;
  next.addEventListener("click", () => void store.load({ page: state.page + 1 }));
  pager.append(prev, ` ${state.page}/${state.pages} `, next);

  const runId = document.createElement("span");
  runId.className = "run-id";
  runId.textContent = state.runId ? `run ${state.runId}` : "";

  toolbar.append(filter, sort, pager, runId);
  container.append(toolbar);

  const probe = document.createElement("div");
  probe.className = "probe";
  const probeInput = document.createElement("input");
  probeInput.placeholder = "probe the classifier with a sentence";
  const probeButton = document.createElement("button");
  probeButton.textContent = "classify";
  probeButton.addEventListener("click", () => void store.probeText(probeInput.value));
  probe.append(probeInput, probeButton);
  if (state.probe) {
    const result = document.createElement("span");
    result.className = `probe-result probe-${state.probe.source}`;
    result.textContent =
      `${state.probe.label} (${state.probe.source}, ` +
      `distance ${state.probe.distance.toFixed(3)})`;
    probe.append(result);
  }
  container.append(probe);

  const cards = document.createElement("main");
  cards.className = "cards";
  for (const card of state.clusters) {
    cards.append(renderCard(store, state, card));
  }
  container.append(cards);
}

/** j/k keyboard navigation over pending cards. */
export function bindKeyboard(store: ReviewStore): (ev: KeyboardEvent) => void {
  const handler = (ev: KeyboardEvent) => {
    if (ev.target instanceof HTMLInputElement) return;
    if (ev.key === "j" || ev.key === "ArrowDown") {
      store.selectNextPending(1);
      ev.preventDefault();
    } else if (ev.key === "k" || ev.key === "ArrowUp") {
      store.selectNextPending(-1);
      ev.preventDefault();
    }
  };
  document.addEventListener("keydown", handler);
  return handler;
}
