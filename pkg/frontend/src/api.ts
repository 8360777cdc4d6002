import type {
  ConceptualModel,
  Metrics,
  ProcedureDetail,
  StructureTree,
  XrefResult,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** Thin typed client over the analysis service; performs no computation. */
export class ApiClient {
  constructor(private readonly baseUrl: string) {}

  private async get<T>(path: string): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    if (!response.ok) {
      let message = `${response.status} ${response.statusText}`;
      try {
        const body = (await response.json()) as { error?: string };
        if (body && typeof body.error === "string") message = body.error;
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new ApiError(response.status, message);
    }
    return (await response.json()) as T;
  }

  structure(): Promise<StructureTree> {
    return this.get("/api/structure");
  }

  metrics(): Promise<Metrics> {
    return this.get("/api/metrics");
  }

  model(): Promise<ConceptualModel> {
    return this.get("/api/model");
  }

  dependencies(): Promise<{ procedures: unknown[]; callEdges: unknown[] }> {
    return this.get("/api/dependencies");
  }

  procedureDeps(id: string): Promise<ProcedureDetail> {
    return this.get(`/api/procedures/${encodeURIComponent(id)}/deps`);
  }

  xref(cell: string): Promise<XrefResult> {
    return this.get(`/api/xref?cell=${encodeURIComponent(cell)}`);
  }
}
