import { ApiClient, ApiError } from "./api.js";
import { clear, el } from "./dom.js";
import { renderModelView } from "./model.js";
import { renderProcedurePane } from "./procedure.js";
import { ViewStateStore } from "./state.js";
import { renderStructureTree } from "./tree.js";
import type { ConceptualModel, Metrics, StructureTree } from "./types.js";
import { renderXrefError, renderXrefResult, renderXrefView } from "./xref.js";

export class ExplorerApp {
  readonly store: ViewStateStore;
  private structure: StructureTree | null = null;
  private metrics: Metrics | null = null;
  private model: ConceptualModel | null = null;

  private banner!: HTMLElement;
  private treeHost!: HTMLElement;
  private detailHost!: HTMLElement;
  private statusBar!: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    store?: ViewStateStore,
  ) {
    this.store = store ?? new ViewStateStore();
  }

  /** Fetch everything and render the initial two-pane layout. */
  async start(): Promise<void> {
    this.scaffold();
    try {
      const [structure, metrics, model, _deps] = await Promise.all([
        this.api.structure(),
        this.api.metrics(),
        this.api.model(),
        this.api.dependencies(),
      ]);
      this.structure = structure;
      this.metrics = metrics;
      this.model = model;
    } catch (err) {
      this.showBanner(err instanceof Error ? err.message : String(err));
      return;
    }
    this.hideBanner();
    renderStructureTree(this.treeHost, this.structure, {
      onSelectProcedure: (id) => this.store.navigate("procedure", id),
    });
    this.renderStatus();
    this.store.subscribe(() => void this.renderDetail());
    await this.renderDetail();
  }

  private scaffold(): void {
    clear(this.root);
    this.banner = el("div", { class: "error-banner", role: "alert", hidden: "hidden" });
    const retry = el("button", { class: "retry" }, "Retry");
    retry.addEventListener("click", () => void this.start());
    this.banner.append(retry);

    const nav = el("nav", { class: "top-nav" });
    for (const [label, view] of [
      ["Structure", "structure"],
      ["Data model", "model"],
      ["Cell xref", "xref"],
    ] as const) {
      const button = el("button", { class: "nav-button", "data-view": view }, label);
      button.addEventListener("click", () => this.store.navigate(view));
      nav.append(button);
    }
    const backButton = el("button", { class: "back-button" }, "← Back");
    backButton.addEventListener("click", () => this.store.back());
    nav.append(backButton);

    this.statusBar = el("div", { class: "status-bar" });
    this.treeHost = el("aside", { class: "tree-pane" });
    this.detailHost = el("main", { class: "detail-pane" });
    const split = el("div", { class: "split" }, this.treeHost, this.detailHost);
    this.root.append(this.banner, nav, this.statusBar, split);
  }

  private renderStatus(): void {
    if (!this.structure || !this.metrics) return;
    this.statusBar.textContent =
      `${this.structure.workbook}: ${this.metrics.worksheets} worksheets, ` +
      `${this.metrics.codeModules} modules, ${this.metrics.procedures} procedures, ` +
      `${this.metrics.userForms} forms, ${this.metrics.controls} controls`;
  }

  private showBanner(message: string): void {
    this.banner.hidden = false;
    const existing = this.banner.querySelector(".message");
    if (existing) existing.remove();
    this.banner.prepend(el("span", { class: "message" }, `cannot load analysis: ${message}`));
  }

  private hideBanner(): void {
    this.banner.hidden = true;
  }

  private async renderDetail(): Promise<void> {
    const { view, id } = this.store.state;
    if (view === "procedure" && id !== null) {
      await this.showProcedure(id);
      return;
    }
    if (view === "model") {
      if (this.model) renderModelView(this.detailHost, this.model);
      return;
    }
    if (view === "xref") {
      this.showXref();
      return;
    }
    clear(this.detailHost);
    this.detailHost.append(
      el("p", { class: "hint" }, "Select a procedure in the tree, or switch views above."),
    );
  }

  private async showProcedure(id: string): Promise<void> {
    let detail;
    try {
      detail = await this.api.procedureDeps(id);
    } catch (err) {
      // stale or unknown id: fall back to the structure view with a notice
      clear(this.detailHost);
      const message = err instanceof ApiError ? err.message : String(err);
      this.detailHost.append(el("p", { class: "notice" }, `procedure unavailable: ${message}`));
      this.store.reset("structure");
      return;
    }
    renderProcedurePane(this.detailHost, detail, {
      onSelectProcedure: (next) => this.store.navigate("procedure", next),
    });
  }

  private showXref(): void {
    renderXrefView(this.detailHost, {
      onLookup: (cell) => void this.lookupCell(cell),
      onSelectProcedure: (id) => this.store.navigate("procedure", id),
    });
  }

  private async lookupCell(cell: string): Promise<void> {
    if (!cell) {
      renderXrefError(this.detailHost, "enter a sheet-qualified cell like Data!B2");
      return;
    }
    try {
      const result = await this.api.xref(cell);
      renderXrefResult(this.detailHost, result, {
        onLookup: (next) => void this.lookupCell(next),
        onSelectProcedure: (id) => this.store.navigate("procedure", id),
      });
    } catch (err) {
      const message = err instanceof ApiError ? err.message : String(err);
      renderXrefError(this.detailHost, message);
    }
  }
}

export function mount(root: HTMLElement, serviceUrl = ""): ExplorerApp {
  const app = new ExplorerApp(root, new ApiClient(serviceUrl));
  void app.start();
  return app;
}

declare global {
  interface Window {
    explorerApp?: ExplorerApp;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  window.explorerApp = mount(document.getElementById("app") as HTMLElement);
}
