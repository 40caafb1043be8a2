import type {
  CatalogMatch,
  CellValueJson,
  ConstraintsResponse,
  DocResponse,
  RowOp,
} from "./types.js";

/** Server rejected a mutation because the client's revision is stale. */
export class StaleRevisionError extends Error {
  constructor(public readonly currentRevision: number) {
    super(`stale revision; server is at ${currentRevision}`);
  }
}

/** Any 4xx/5xx answer that is not a stale-revision conflict. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function raise(resp: Response): Promise<never> {
  let code = "error";
  let message = resp.statusText;
  let revision = -1;
  try {
    const body = (await resp.json()) as { error?: string; message?: string; revision?: number };
    code = body.error ?? code;
    message = body.message ?? message;
    revision = body.revision ?? -1;
  } catch {
    // non-JSON error body
  }
  if (resp.status === 409) throw new StaleRevisionError(revision);
  throw new ApiError(resp.status, code, message);
}

/** Thin typed client over the document service. */
export class ApiClient {
  constructor(private readonly baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      method,
      headers: body !== undefined ? { "content-type": "application/json" } : undefined,
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    if (!resp.ok) await raise(resp);
    return (await resp.json()) as T;
  }

  private async requestText(path: string): Promise<string> {
    const resp = await fetch(this.baseUrl + path);
    if (!resp.ok) await raise(resp);
    return await resp.text();
  }

  openDocument(kind: "tks" | "tkm", text: string): Promise<DocResponse> {
    return this.request("POST", "/doc", { kind, text });
  }

  getDocument(id: number): Promise<DocResponse> {
    return this.request("GET", `/doc/${id}`);
  }

  getSaveText(id: number): Promise<string> {
    return this.requestText(`/doc/${id}/tkm`);
  }

  renderSvg(id: number): Promise<string> {
    return this.requestText(`/doc/${id}/render?fmt=svg`);
  }

  setCell(id: number, revision: number, record: number, steps: number[], value: CellValueJson): Promise<DocResponse> {
    return this.request("POST", `/doc/${id}/cell`, { revision, record, steps, value });
  }

  insertAtPoint(id: number, revision: number, x: number, y: number): Promise<DocResponse> {
    return this.request("POST", `/doc/${id}/insert-at-point`, { revision, x, y });
  }

  rowOp(id: number, revision: number, op: RowOp): Promise<DocResponse> {
    return this.request("POST", `/doc/${id}/op`, { revision, ...op });
  }

  undo(id: number, revision: number): Promise<DocResponse> {
    return this.request("POST", `/doc/${id}/undo`, { revision });
  }

  constraints(id: number, record: number, steps: number[]): Promise<ConstraintsResponse> {
    return this.request("GET", `/doc/${id}/constraints?record=${record}&steps=${steps.join("/")}`);
  }

  queryCatalog(
    objectClass: string,
    constraints: ConstraintsResponse | null,
  ): Promise<{ matches: CatalogMatch[] }> {
    const params = new URLSearchParams({ object_class: objectClass });
    if (constraints?.pressure) {
      params.set("p", String(constraints.pressure.value));
      params.set("p_unit", constraints.pressure.unit);
    }
    if (constraints?.temperature) {
      params.set("t", String(constraints.temperature.value));
      params.set("t_unit", constraints.temperature.unit);
    }
    if (constraints?.dn != null) params.set("dn", String(constraints.dn));
    return this.request("GET", `/catalogs/query?${params.toString()}`);
  }

  pickItem(id: number, revision: number, objectClass: string, itemIndex: number, record: number): Promise<DocResponse> {
    return this.request("POST", `/doc/${id}/pick-item`, {
      revision,
      object_class: objectClass,
      item_index: itemIndex,
      record,
    });
  }

  copyToBuffer(id: number, start: number, stop: number): Promise<{ rows: number }> {
    return this.request("POST", `/doc/${id}/copy-to-buffer`, { start, stop });
  }

  pasteBuffer(id: number, revision: number, atIndex: number): Promise<DocResponse> {
    return this.request("POST", `/doc/${id}/paste-buffer`, { revision, at_index: atIndex });
  }

  getBufferText(): Promise<string> {
    return this.requestText("/buffer");
  }

  putBufferText(text: string): Promise<{ rows: number }> {
    return this.request("PUT", "/buffer", { text });
  }
}
