import { clear, el } from "./dom.js";
import type { StructureTree } from "./types.js";

export interface TreeHandlers {
  onSelectProcedure: (id: string) => void;
}

/**
 * Render the workbook structure tree.  Every count shown comes verbatim
 * from the service response; nothing is recomputed here.
 */
export function renderStructureTree(
  container: HTMLElement,
  tree: StructureTree,
  handlers: TreeHandlers,
): void {
  clear(container);
  const root = el("ul", { class: "tree" });

  const sheets = el(
    "li",
    {},
    el("span", { class: "tree-label", "data-node": "worksheets" }, `Worksheets (${tree.worksheets.count})`),
  );
  const sheetList = el("ul", {});
  for (const sheet of tree.worksheets.items) {
    const range = sheet.usedRange === null ? "empty" : sheet.usedRange;
    sheetList.append(
      el(
        "li",
        { "data-sheet": sheet.name },
        `${sheet.name} — ${range}, ${sheet.blockCount} block${sheet.blockCount === 1 ? "" : "s"}`,
      ),
    );
  }
  sheets.append(sheetList);
  root.append(sheets);

  const project = el(
    "li",
    {},
    el(
      "span",
      { class: "tree-label", "data-node": "vbproject" },
      `VB project — ${tree.vbProject.moduleCount} modules, ${tree.vbProject.procedureCount} procedures`,
    ),
  );
  const moduleList = el("ul", {});
  for (const module of tree.vbProject.modules) {
    const item = el(
      "li",
      { "data-module": module.name },
      el("span", {}, `${module.name} [${module.kind}] (${module.procedures.count})`),
    );
    const procedures = el("ul", {});
    for (const proc of module.procedures.items) {
      const id = `${module.name}.${proc.name}`;
      const link = el(
        "a",
        { href: "#", class: "proc-link", "data-proc-id": id },
        proc.signature,
      );
      link.addEventListener("click", (event) => {
        event.preventDefault();
        handlers.onSelectProcedure(id);
      });
      procedures.append(el("li", {}, link));
    }
    item.append(procedures);
    moduleList.append(item);
  }
  project.append(moduleList);
  root.append(project);

  const forms = el(
    "li",
    {},
    el("span", { class: "tree-label", "data-node": "userforms" }, `User forms (${tree.userForms.count})`),
  );
  const formList = el("ul", {});
  for (const form of tree.userForms.items) {
    const item = el(
      "li",
      { "data-form": form.name },
      el("span", {}, `${form.name} (${form.controls.count} controls)`),
    );
    const controls = el("ul", {});
    for (const control of form.controls.items) {
      const caption = control.caption === null ? "" : ` — “${control.caption}”`;
      controls.append(el("li", {}, `${control.name} [${control.type}]${caption}`));
    }
    item.append(controls);
    formList.append(item);
  }
  forms.append(formList);
  root.append(forms);

  container.append(root);
}
