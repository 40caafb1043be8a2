import { ApiClient, ApiError } from "./api.js";
import { BufferPanel } from "./buffer-panel.js";
import { CatalogPanel } from "./catalog-panel.js";
import { GridView } from "./grid.js";
import { DocumentStore } from "./state.js";
import { Toolbar } from "./toolbar.js";
import type { CatalogMatch } from "./types.js";

/**
 * One editor session over one document. Clicking a cell highlights it; when the
 * cell carries an object class, the catalog panel opens pre-filtered by the
 * constraints gathered from the record's source cells. All mutations round-trip
 * through the server; the grid always shows the last server render.
 */
export class Editor {
  readonly store: DocumentStore;
  readonly grid: GridView;
  readonly catalog: CatalogPanel;
  readonly buffer: BufferPanel;
  readonly toolbar: Toolbar;
  readonly noticeBox: HTMLElement;

  constructor(
    readonly root: HTMLElement,
    private readonly api: ApiClient,
    pxPerMm = 4,
  ) {
    this.store = new DocumentStore(api);
    this.grid = new GridView(this.store, pxPerMm, (x, y) => void this.clickCell(x, y));
    this.catalog = new CatalogPanel((match) => void this.pickCatalogItem(match));
    this.buffer = new BufferPanel();
    this.toolbar = new Toolbar({
      appendRow: () => void this.rowOp({ op: "append_row" }),
      deleteRows: () => void this.withRows((start, stop) => this.rowOp({ op: "delete_rows", start, stop })),
      clearRows: () => void this.withRows((start, stop) => this.rowOp({ op: "clear_rows", start, stop })),
      copyRows: () =>
        void this.withRows((start, stop) => this.rowOp({ op: "copy_rows", start, stop, to: stop })),
      moveRows: () =>
        void this.withRows((start, stop) => this.rowOp({ op: "move_rows", start, stop, to: 1 })),
      toBuffer: () => void this.toBuffer(),
      fromBuffer: () => void this.fromBuffer(),
      mergeRows: () => void this.withRows((start, stop) => this.rowOp({ op: "merge", start, stop })),
      packRows: () => void this.withRows((start, stop) => this.rowOp({ op: "pack", start, stop })),
      undo: () => void this.undo(),
    });
    this.noticeBox = document.createElement("div");
    this.noticeBox.className = "tkd-notice";
    this.store.subscribe(() => {
      this.noticeBox.textContent = this.store.notice;
    });
    root.appendChild(this.toolbar.root);
    root.appendChild(this.noticeBox);
    root.appendChild(this.grid.root);
    root.appendChild(this.catalog.root);
    root.appendChild(this.buffer.root);
  }

  async open(kind: "tks" | "tkm", text: string): Promise<void> {
    await this.store.open(kind, text);
  }

  /** Click handler: select the cell; open the catalog panel for subject cells. */
  async clickCell(xMm: number, yMm: number): Promise<void> {
    const cell = this.store.cellAt(xMm, yMm);
    if (!cell) {
      this.store.clearSelection();
      this.catalog.hide();
      return;
    }
    this.store.selectCell(cell);
    if (cell.record === 0) {
      this.store.setNotice("шапка формируется структурой таблицы и не редактируется");
      this.catalog.hide();
      return;
    }
    this.store.setNotice("");
    if (cell.object_class) {
      await this.openCatalogFor(cell.record, cell.steps, cell.object_class);
    } else {
      this.catalog.hide();
    }
  }

  private async openCatalogFor(record: number, steps: number[], objectClass: string): Promise<void> {
    const doc = this.store.doc;
    if (!doc) return;
    const constraints = await this.api.constraints(doc.id, record, steps);
    try {
      const result = await this.api.queryCatalog(objectClass, constraints);
      this.catalog.show(objectClass, constraints, result.matches);
    } catch (err) {
      if (err instanceof ApiError) {
        this.catalog.hide();
        this.store.setNotice(`каталог: ${err.message}`);
        return;
      }
      throw err;
    }
  }

  /** Apply the picked item server-side (rules → cells) and re-render. */
  async pickCatalogItem(match: CatalogMatch): Promise<void> {
    const target = this.store.selectedCellRef();
    if (!target) return;
    try {
      await this.store.mutate((revision) =>
        this.api.pickItem(this.store.doc!.id, revision, match.object_class, match.item_index, target.record),
      );
    } catch (err) {
      if (err instanceof ApiError) {
        this.store.setNotice(`не удалось заполнить: ${err.message}`);
        return;
      }
      throw err;
    }
  }

  async setSelectedCell(text: string, numeric?: number, unit?: string): Promise<void> {
    const target = this.store.selectedCellRef();
    if (!target) return;
    try {
      await this.store.mutate((revision) =>
        this.api.setCell(this.store.doc!.id, revision, target.record, target.steps, {
          text,
          numeric: numeric ?? null,
          unit: unit ?? null,
        }),
      );
    } catch (err) {
      if (err instanceof ApiError) {
        this.store.setNotice(err.message);
        return;
      }
      throw err;
    }
  }

  async insertAt(xMm: number, yMm: number): Promise<void> {
    try {
      await this.store.mutate((revision) => this.api.insertAtPoint(this.store.doc!.id, revision, xMm, yMm));
    } catch (err) {
      if (err instanceof ApiError) {
        this.store.setNotice(err.message);
        return;
      }
      throw err;
    }
  }

  private async withRows(action: (start: number, stop: number) => Promise<void>): Promise<void> {
    const range = this.store.selectedRowRange();
    if (!range) {
      this.store.setNotice("отметьте строки");
      return;
    }
    await action(range.start, range.stop);
  }

  private async rowOp(op: Parameters<ApiClient["rowOp"]>[2]): Promise<void> {
    try {
      await this.store.mutate((revision) => this.api.rowOp(this.store.doc!.id, revision, op));
    } catch (err) {
      if (err instanceof ApiError) {
        this.store.setNotice(err.message);
        return;
      }
      throw err;
    }
  }

  async toBuffer(): Promise<void> {
    const doc = this.store.doc;
    const range = this.store.selectedRowRange();
    if (!doc || !range) {
      this.store.setNotice("отметьте строки");
      return;
    }
    await this.api.copyToBuffer(doc.id, range.start, range.stop);
    this.buffer.update(await this.api.getBufferText());
  }

  async fromBuffer(): Promise<void> {
    const doc = this.store.doc;
    if (!doc) return;
    const at = this.store.selectedRowRange()?.stop ?? doc.layout.records.length;
    try {
      const response = await this.store.mutate((revision) =>
        this.api.pasteBuffer(doc.id, revision, at - 1),
      );
      const dropped = response?.dropped_properties ?? [];
      if (dropped.length) {
        this.store.setNotice(`свойства без графы отброшены: ${dropped.join(", ")}`);
      }
    } catch (err) {
      if (err instanceof ApiError) {
        this.store.setNotice(err.message);
        return;
      }
      throw err;
    }
  }

  async undo(): Promise<void> {
    try {
      await this.store.mutate((revision) => this.api.undo(this.store.doc!.id, revision));
    } catch (err) {
      if (err instanceof ApiError) {
        this.store.setNotice(err.message);
        return;
      }
      throw err;
    }
  }

  async saveText(): Promise<string> {
    const doc = this.store.doc;
    if (!doc) throw new Error("no open document");
    return await this.api.getSaveText(doc.id);
  }
}

export function createEditor(root: HTMLElement, baseUrl: string, pxPerMm = 4): Editor {
  return new Editor(root, new ApiClient(baseUrl), pxPerMm);
}
