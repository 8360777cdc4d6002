import { clear, el } from "./dom.js";
import type { XrefResult } from "./types.js";

export interface XrefHandlers {
  onLookup: (cell: string) => void;
  onSelectProcedure: (id: string) => void;
}

/** Cell lookup form; results and validation errors render inline. */
export function renderXrefView(container: HTMLElement, handlers: XrefHandlers): void {
  clear(container);
  const form = el("form", { class: "xref-form" });
  const input = el("input", {
    type: "text",
    name: "cell",
    placeholder: "Sheet!A1",
    "aria-label": "cell reference",
  }) as HTMLInputElement;
  const button = el("button", { type: "submit" }, "Look up");
  form.append(input, button);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    handlers.onLookup(input.value.trim());
  });
  container.append(el("h2", {}, "Cell cross-reference"));
  container.append(form);
  container.append(el("div", { class: "xref-error", role: "alert" }));
  container.append(el("div", { class: "xref-results" }));
}

export function renderXrefError(container: HTMLElement, message: string): void {
  const box = container.querySelector(".xref-error") as HTMLElement;
  box.textContent = message;
  const results = container.querySelector(".xref-results") as HTMLElement;
  clear(results);
}

export function renderXrefResult(
  container: HTMLElement,
  result: XrefResult,
  handlers: XrefHandlers,
): void {
  const box = container.querySelector(".xref-error") as HTMLElement;
  box.textContent = "";
  const results = container.querySelector(".xref-results") as HTMLElement;
  clear(results);

  if (result.readers.length === 0 && result.writers.length === 0) {
    results.append(el("p", { class: "empty" }, "no references to this cell"));
    return;
  }

  const section = (title: string, ids: string[], cls: string) => {
    const block = el("section", {});
    block.append(el("h3", {}, `${title} (${ids.length})`));
    const list = el("ul", { class: cls });
    if (ids.length === 0) {
      list.append(el("li", { class: "empty" }, "none"));
    }
    for (const id of ids) {
      const link = el("a", { href: "#", "data-proc-id": id }, id);
      link.addEventListener("click", (event) => {
        event.preventDefault();
        handlers.onSelectProcedure(id);
      });
      list.append(el("li", {}, link));
    }
    block.append(list);
    return block;
  };

  results.append(section("Readers", result.readers, "xref-readers"));
  results.append(section("Writers", result.writers, "xref-writers"));
}
