import { ApiClient, StaleRevisionError } from "./api.js";
import type { CellRef, DocResponse, LayoutCell, LayoutGeometry } from "./types.js";

export type Selection =
  | { kind: "cell"; cell: LayoutCell }
  | { kind: "rows"; start: number; stop: number }
  | null;

export interface DocState {
  id: number;
  revision: number;
  layout: LayoutGeometry;
  svg: string;
}

type Listener = () => void;

/**
 * Single source of truth for one open document.
 *
 * The store never mutates document state locally: every visible change comes from a
 * server response (revision + layout + re-fetched SVG). A stale-revision conflict
 * triggers an automatic refetch of the current server state; the rejected edit is
 * dropped and reported, never silently re-applied.
 */
export class DocumentStore {
  doc: DocState | null = null;
  selection: Selection = null;
  notice = "";

  private listeners: Listener[] = [];

  constructor(private readonly api: ApiClient) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  private async accept(response: DocResponse): Promise<DocResponse> {
    const svg = await this.api.renderSvg(response.id);
    this.doc = { id: response.id, revision: response.revision, layout: response.layout, svg };
    if (!this.selectionValid()) this.selection = null;
    this.emit();
    return response;
  }

  private selectionValid(): boolean {
    if (!this.doc || !this.selection) return this.selection === null;
    if (this.selection.kind === "rows") {
      return this.selection.stop <= this.doc.layout.records.length;
    }
    const sel = this.selection.cell;
    return this.doc.layout.cells.some(
      (c) => c.record === sel.record && c.steps.join("/") === sel.steps.join("/"),
    );
  }

  /** Run a mutation; on a stale revision, refetch and surface a notice. */
  async mutate(action: (revision: number) => Promise<DocResponse>): Promise<DocResponse | null> {
    if (!this.doc) throw new Error("no open document");
    try {
      const response = await action(this.doc.revision);
      this.notice = "";
      return await this.accept(response);
    } catch (err) {
      if (err instanceof StaleRevisionError) {
        const fresh = await this.api.getDocument(this.doc.id);
        await this.accept(fresh);
        this.notice = "document changed on the server; the edit was not applied";
        this.emit();
        return null;
      }
      throw err;
    }
  }

  async open(kind: "tks" | "tkm", text: string): Promise<DocResponse> {
    const response = await this.api.openDocument(kind, text);
    return await this.accept(response);
  }

  async refresh(): Promise<void> {
    if (!this.doc) return;
    await this.accept(await this.api.getDocument(this.doc.id));
  }

  selectCell(cell: LayoutCell): void {
    this.selection = { kind: "cell", cell };
    this.emit();
  }

  selectRows(start: number, stop: number): void {
    this.selection = { kind: "rows", start, stop };
    this.emit();
  }

  clearSelection(): void {
    this.selection = null;
    this.emit();
  }

  setNotice(text: string): void {
    this.notice = text;
    this.emit();
  }

  /** Geometric lookup against the latest server layout; edges are exclusive. */
  cellAt(xMm: number, yMm: number): LayoutCell | null {
    if (!this.doc) return null;
    for (const cell of this.doc.layout.cells) {
      if (xMm >= cell.x && xMm < cell.x + cell.w && yMm >= cell.y && yMm < cell.y + cell.h) {
        return cell;
      }
    }
    return null;
  }

  selectedRowRange(): { start: number; stop: number } | null {
    if (!this.selection) return null;
    if (this.selection.kind === "rows") return { start: this.selection.start, stop: this.selection.stop };
    const record = this.selection.cell.record;
    return record >= 1 ? { start: record, stop: record + 1 } : null;
  }

  selectedCellRef(): CellRef | null {
    return this.selection?.kind === "cell"
      ? { record: this.selection.cell.record, steps: this.selection.cell.steps }
      : null;
  }
}
