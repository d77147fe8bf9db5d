/**
 * Pure DOM construction from server documents.
 *
 * Every text value goes through textContent, so nothing from the
 * database can inject markup. Navigation targets are carried on
 * data-href attributes; the controller decides what a click does.
 */

import type { Cell, DocumentInfo, FrameInfo, SearchEnvelope } from "./api.js";
import { currentPanel, type ViewState } from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  dom: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = dom.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function cellText(value: Cell): string {
  return value === null ? "(null)" : String(value);
}

export function renderFrame(frame: FrameInfo, dom: Document): HTMLElement {
  const section = el(dom, "section", "frame");
  section.dataset.relation = frame.relation;
  section.appendChild(el(dom, "h2", "frame-caption", frame.description));

  const table = el(dom, "table", "frame-table");
  const thead = el(dom, "thead");
  const headRow = el(dom, "tr");
  for (const column of frame.columns) {
    headRow.appendChild(el(dom, "th", undefined, column.description));
  }
  if (frame.rank_counts !== null) {
    headRow.appendChild(el(dom, "th", "count-head", "count"));
  }
  thead.appendChild(headRow);
  table.appendChild(thead);

  const tbody = el(dom, "tbody");
  frame.rows.forEach((row, rowIndex) => {
    const tr = el(dom, "tr");
    row.forEach((value, columnIndex) => {
      const td = el(dom, "td");
      const columnName = frame.columns[columnIndex].name;
      const link = frame.links.find(
        (l) => l.kind === "fk_cell" && l.row === rowIndex && l.column === columnName,
      );
      if (link && value !== null) {
        const anchor = el(dom, "a", "cell-link", cellText(value));
        anchor.dataset.href = link.href;
        anchor.setAttribute("href", "#");
        td.appendChild(anchor);
      } else {
        td.textContent = cellText(value);
        if (value === null) td.className = "null-cell";
      }
      tr.appendChild(td);
    });
    if (frame.rank_counts !== null) {
      const td = el(dom, "td", "count-cell");
      td.appendChild(el(dom, "span", "badge", String(frame.rank_counts[rowIndex])));
      tr.appendChild(td);
    }
    tbody.appendChild(tr);
  });
  table.appendChild(tbody);
  section.appendChild(table);

  const drills = frame.links.filter((l) => l.kind === "drill_line");
  if (drills.length) {
    const list = el(dom, "ul", "drill-lines");
    for (const link of drills) {
      const item = el(dom, "li");
      item.appendChild(el(dom, "span", "drill-row", `row ${link.row + 1}: `));
      const anchor = el(dom, "a", "drill-link", link.label);
      anchor.dataset.href = link.href;
      anchor.setAttribute("href", "#");
      item.appendChild(anchor);
      list.appendChild(item);
    }
    section.appendChild(list);
  }

  if (frame.rows.length < frame.total) {
    section.appendChild(
      el(dom, "p", "frame-note", `${frame.rows.length} of ${frame.total} rows shown`),
    );
  }
  return section;
}

export function renderDocument(doc: DocumentInfo, dom: Document): HTMLElement {
  const panel = el(dom, "article", "panel");
  if (doc.interpretation) {
    panel.appendChild(el(dom, "p", "interpretation", doc.interpretation));
  }
  for (const frame of doc.frames) {
    panel.appendChild(renderFrame(frame, dom));
  }
  for (const note of doc.diagnostics) {
    panel.appendChild(el(dom, "p", "diagnostic", note));
  }
  return panel;
}

export function renderEnvelope(
  envelope: SearchEnvelope,
  active: number,
  dom: Document,
): HTMLElement {
  const panel = el(dom, "article", "panel");
  if (envelope.groups.length > 1) {
    const tabs = el(dom, "nav", "reading-tabs");
    envelope.groups.forEach((_group, index) => {
      const tab = el(dom, "button", "reading-tab", `reading ${index + 1}`);
      tab.type = "button";
      tab.dataset.reading = String(index);
      tab.title = envelope.groups[index].interpretation;
      if (index === active) tab.classList.add("active");
      tabs.appendChild(tab);
    });
    panel.appendChild(tabs);
  }
  if (envelope.groups.length === 0) {
    panel.appendChild(el(dom, "p", "diagnostic", "no results"));
    return panel;
  }
  panel.appendChild(renderDocument(envelope.groups[active], dom));
  return panel;
}

export function renderError(message: string, dom: Document): HTMLElement {
  return el(dom, "p", "error", message);
}

/** Everything below the query bar for one state. */
export function renderView(state: ViewState, dom: Document): HTMLElement {
  const host = el(dom, "div", "view");
  if (state.error !== null) {
    host.appendChild(renderError(state.error, dom));
  }
  const panel = currentPanel(state);
  if (panel === null) {
    if (state.error === null) {
      host.appendChild(el(dom, "p", "placeholder", "type keywords to search the database"));
    }
    return host;
  }
  host.appendChild(
    panel.kind === "search"
      ? renderEnvelope(panel.envelope, panel.active, dom)
      : renderDocument(panel.doc, dom),
  );
  return host;
}
