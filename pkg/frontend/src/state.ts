export type ActiveView = "structure" | "procedure" | "model" | "xref";

export interface Selection {
  view: ActiveView;
  /** Procedure id for the procedure view; null elsewhere. */
  id: string | null;
}

type Listener = (selection: Selection) => void;

/**
 * Single navigation store: current selection plus a back-stack.
 * Every view change goes through navigate()/back() so history stays exact.
 */
export class ViewStateStore {
  private current: Selection = { view: "structure", id: null };
  private history: Selection[] = [];
  private listeners: Listener[] = [];

  get state(): Selection {
    return this.current;
  }

  get historyDepth(): number {
    return this.history.length;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((fn) => fn !== listener);
    };
  }

  navigate(view: ActiveView, id: string | null = null): void {
    if (view === this.current.view && id === this.current.id) {
      return;
    }
    this.history.push(this.current);
    this.current = { view, id };
    this.emit();
  }

  /** Pops exactly one history entry; no-op on an empty stack. */
  back(): boolean {
    const previous = this.history.pop();
    if (previous === undefined) {
      return false;
    }
    this.current = previous;
    this.emit();
    return true;
  }

  /** Replace the current selection without growing history (error fallbacks). */
  reset(view: ActiveView, id: string | null = null): void {
    this.current = { view, id };
    this.history = [];
    this.emit();
  }

  private emit(): void {
    for (const listener of [...this.listeners]) {
      listener(this.current);
    }
  }
}
