/**
 * Controller: wires the query bar, the panel area, and navigation.
 *
 * One user action means at most one in-flight request; a newer action
 * supersedes older responses through the state's sequence numbers.
 * The back button only pops already-fetched panels.
 */

import { ApiClient, ApiError } from "./api.js";
import {
  beginRequest,
  canGoBack,
  goBack,
  initialState,
  localError,
  receiveDocument,
  receiveError,
  receiveSearch,
  selectReading,
  setOptions,
  type ViewState,
} from "./state.js";
import { renderView } from "./render.js";

export interface Controller {
  state(): ViewState;
  /** Resolves when the most recent action has settled. */
  idle(): Promise<void>;
  root: HTMLElement;
}

function errorText(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  return `unexpected failure: ${String(err)}`;
}

export function init(root: HTMLElement, api: ApiClient): Controller {
  const dom = root.ownerDocument;
  let state = initialState();
  let settled: Promise<void> = Promise.resolve();

  root.innerHTML = "";
  const form = dom.createElement("form");
  form.className = "query-bar";

  const input = dom.createElement("input");
  input.name = "q";
  input.placeholder = "keywords";
  input.autocomplete = "off";
  form.appendChild(input);

  const rank = dom.createElement("select");
  rank.name = "rank";
  for (const [value, label] of [
    ["fk_count", "rank by related rows"],
    ["app_sort", "application sort order"],
    ["none", "unranked"],
  ]) {
    const option = dom.createElement("option");
    option.value = value;
    option.textContent = label;
    rank.appendChild(option);
  }
  form.appendChild(rank);

  const interp = dom.createElement("select");
  interp.name = "interp";
  for (const [value, label] of [
    ["best", "best reading"],
    ["all", "all readings"],
  ]) {
    const option = dom.createElement("option");
    option.value = value;
    option.textContent = label;
    interp.appendChild(option);
  }
  form.appendChild(interp);

  const submit = dom.createElement("button");
  submit.type = "submit";
  submit.textContent = "search";
  form.appendChild(submit);

  const back = dom.createElement("button");
  back.type = "button";
  back.className = "back";
  back.textContent = "back";
  form.appendChild(back);

  const viewHost = dom.createElement("div");
  viewHost.className = "view-host";

  root.appendChild(form);
  root.appendChild(viewHost);

  function redraw(): void {
    back.disabled = !canGoBack(state);
    root.classList.toggle("loading", state.pending !== null);
    viewHost.innerHTML = "";
    viewHost.appendChild(renderView(state, dom));
  }

  function run(action: Promise<void>): void {
    settled = settled.then(() => action);
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = input.value.trim();
    if (!text) {
      state = localError(state, "type one or more keywords first");
      redraw();
      return;
    }
    state = setOptions(state, { query: text, rank: rank.value, interp: interp.value });
    const ticket = beginRequest(state);
    state = ticket.state;
    redraw();
    run(
      api
        .search(text, { rank: rank.value, interp: interp.value })
        .then((envelope) => {
          state = receiveSearch(state, ticket.seq, envelope);
        })
        .catch((err) => {
          state = receiveError(state, ticket.seq, errorText(err));
        })
        .then(redraw),
    );
  });

  viewHost.addEventListener("click", (event) => {
    const target = event.target as HTMLElement | null;
    if (!target) return;

    const tab = target.closest("button[data-reading]") as HTMLElement | null;
    if (tab && tab.dataset.reading !== undefined) {
      state = selectReading(state, Number(tab.dataset.reading));
      redraw();
      return;
    }

    const anchor = target.closest("a[data-href]") as HTMLElement | null;
    if (anchor && anchor.dataset.href) {
      event.preventDefault();
      const href = anchor.dataset.href;
      const ticket = beginRequest(state);
      state = ticket.state;
      redraw();
      run(
        api
          .document(href)
          .then((doc) => {
            state = receiveDocument(state, ticket.seq, doc);
          })
          .catch((err) => {
            state = receiveError(state, ticket.seq, errorText(err));
          })
          .then(redraw),
      );
    }
  });

  back.addEventListener("click", () => {
    state = goBack(state);
    redraw();
  });

  redraw();
  return {
    state: () => state,
    idle: () => settled,
    root,
  };
}

if (typeof document !== "undefined") {
  const mount = document.getElementById("app");
  if (mount) {
    init(mount, new ApiClient());
  }
}
