import { clear, el } from "./dom.js";
import { renderGraph } from "./graph.js";
import type { GraphNode, ProcedureDetail } from "./types.js";

export interface ProcedureHandlers {
  onSelectProcedure: (id: string) => void;
}

function groupSection(title: string, groups: ProcedureDetail["readGroups"]): HTMLElement {
  const section = el("section", { class: "group-section" });
  section.append(el("h3", {}, `${title} (${groups.length})`));
  const list = el("ul", { class: "group-list" });
  if (groups.length === 0) {
    list.append(el("li", { class: "empty" }, "none"));
  }
  for (const group of groups) {
    list.append(el("li", { "data-group-id": group.id }, group.label));
  }
  section.append(list);
  return section;
}

/** Detail pane for one procedure plus its neighborhood graph. */
export function renderProcedurePane(
  container: HTMLElement,
  detail: ProcedureDetail,
  handlers: ProcedureHandlers,
): void {
  clear(container);
  const info = detail.procedure;
  container.append(el("h2", { class: "proc-title" }, info.id));
  container.append(
    el(
      "p",
      { class: "proc-meta" },
      `${info.signature} — ${info.moduleKind} module ${info.module}, lines ${info.span[0]}–${info.span[1]}`,
    ),
  );

  const bindings = el("section", {});
  bindings.append(el("h3", {}, `Event bindings (${detail.eventBindings.length})`));
  const bindingList = el("ul", {});
  if (detail.eventBindings.length === 0) {
    bindingList.append(el("li", { class: "empty" }, "not an event handler"));
  }
  for (const binding of detail.eventBindings) {
    bindingList.append(
      el("li", {}, `${binding.sourceKind} ${binding.sourceName} → ${binding.eventName}`),
    );
  }
  bindings.append(bindingList);
  container.append(bindings);

  container.append(groupSection("Writes", detail.writeGroups));
  container.append(groupSection("Reads", detail.readGroups));

  const calls = el("section", {});
  calls.append(el("h3", {}, `Calls (${detail.callees.length})`));
  const calleeList = el("ul", { class: "callee-list" });
  if (detail.callees.length === 0) {
    calleeList.append(el("li", { class: "empty" }, "none"));
  }
  for (const callee of detail.callees) {
    if (callee.resolved && callee.id) {
      const link = el("a", { href: "#", class: "callee-link", "data-proc-id": callee.id }, callee.id);
      link.addEventListener("click", (event) => {
        event.preventDefault();
        handlers.onSelectProcedure(callee.id as string);
      });
      calleeList.append(el("li", {}, link));
    } else {
      calleeList.append(el("li", { class: "unresolved" }, `? ${callee.name} (${callee.reason})`));
    }
  }
  calls.append(calleeList);
  container.append(calls);

  const callers = el("section", {});
  callers.append(el("h3", {}, `Called by (${detail.callers.length})`));
  const callerList = el("ul", { class: "caller-list" });
  if (detail.callers.length === 0) {
    callerList.append(el("li", { class: "empty" }, "none"));
  }
  for (const caller of detail.callers) {
    const link = el("a", { href: "#", class: "caller-link", "data-proc-id": caller }, caller);
    link.addEventListener("click", (event) => {
      event.preventDefault();
      handlers.onSelectProcedure(caller);
    });
    callerList.append(el("li", {}, link));
  }
  callers.append(callerList);
  container.append(callers);

  const graphHost = el("div", { class: "graph-host" });
  container.append(el("h3", {}, "Dependency neighborhood"));
  container.append(graphHost);
  renderGraph(graphHost, detail.graph, {
    onNodeClick: (node: GraphNode) => {
      if (node.kind === "procedure" && node.id !== `proc:${info.id}`) {
        handlers.onSelectProcedure(node.id.slice("proc:".length));
      }
    },
  });
}
