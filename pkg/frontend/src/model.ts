import { clear, el } from "./dom.js";
import type { ConceptualModel } from "./types.js";

/** Conceptual-model view: class boxes plus a relationship list. */
export function renderModelView(container: HTMLElement, model: ConceptualModel): void {
  clear(container);
  container.append(el("h2", {}, `Conceptual model (${model.classes.length} classes)`));
  const byId = new Map(model.classes.map((c) => [c.id, c.name]));

  const grid = el("div", { class: "class-grid" });
  for (const cls of model.classes) {
    const card = el("div", { class: `class-card stereo-${cls.stereotype}`, "data-class-id": cls.id });
    card.append(el("h3", {}, cls.name));
    card.append(el("p", { class: "stereo" }, `«${cls.stereotype}»`));
    const list = el("ul", {});
    if (cls.stereotype === "enumeration") {
      for (const literal of cls.literals) {
        list.append(el("li", { class: "literal" }, literal));
      }
    } else {
      for (const attr of cls.attributes) {
        list.append(el("li", {}, `${attr.name} : ${attr.type}${attr.optional ? "?" : ""}`));
      }
    }
    card.append(list);
    grid.append(card);
  }
  container.append(grid);

  const relations = el("section", {});
  relations.append(el("h3", {}, `Relationships (${model.relationships.length})`));
  const list = el("ul", { class: "relationship-list" });
  for (const rel of model.relationships) {
    const source = byId.get(rel.source) ?? rel.source;
    const target = byId.get(rel.target) ?? rel.target;
    const arrow = rel.kind === "composition" ? "◆—" : "—▷";
    list.append(
      el(
        "li",
        {},
        `${source} "${rel.sourceCard}" ${arrow} "${rel.targetCard}" ${target} [${rel.ruleId}]`,
      ),
    );
  }
  relations.append(list);
  container.append(relations);
}
