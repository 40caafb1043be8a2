import type { DocumentStore } from "./state.js";

/**
 * Displays the server-rendered SVG and overlays the selection rectangle using the
 * layout geometry JSON, so no layout logic lives in the client. Clicks are mapped
 * from pixels to millimetres through the fixed scale.
 */
export class GridView {
  readonly root: HTMLElement;
  private readonly svgHost: HTMLElement;
  private readonly highlight: HTMLElement;
  private lastSvg = "";

  constructor(
    private readonly store: DocumentStore,
    private readonly pxPerMm = 4,
    private readonly onCellClick?: (xMm: number, yMm: number) => void,
  ) {
    this.root = document.createElement("div");
    this.root.className = "tkd-grid";
    this.root.style.position = "relative";
    this.svgHost = document.createElement("div");
    this.svgHost.className = "tkd-grid-svg";
    this.highlight = document.createElement("div");
    this.highlight.className = "tkd-grid-selection";
    this.highlight.style.position = "absolute";
    this.highlight.style.pointerEvents = "none";
    this.highlight.style.outline = "2px solid #2266cc";
    this.highlight.style.display = "none";
    this.root.appendChild(this.svgHost);
    this.root.appendChild(this.highlight);
    this.root.addEventListener("click", (event) => this.handleClick(event as MouseEvent));
    store.subscribe(() => this.render());
  }

  private handleClick(event: MouseEvent): void {
    const rect = this.root.getBoundingClientRect();
    const xMm = (event.clientX - rect.left) / this.pxPerMm;
    const yMm = (event.clientY - rect.top) / this.pxPerMm;
    this.onCellClick?.(xMm, yMm);
  }

  private render(): void {
    const doc = this.store.doc;
    if (!doc) {
      this.svgHost.innerHTML = "";
      this.lastSvg = "";
      this.highlight.style.display = "none";
      return;
    }
    // the displayed SVG is always the last server render, never a local redraw
    if (this.lastSvg !== doc.svg) {
      this.svgHost.innerHTML = doc.svg;
      this.lastSvg = doc.svg;
    }
    this.root.style.width = `${doc.layout.width_mm * this.pxPerMm}px`;
    this.root.style.height = `${doc.layout.height_mm * this.pxPerMm}px`;
    const selection = this.store.selection;
    if (selection?.kind === "cell") {
      const c = selection.cell;
      this.highlight.style.display = "block";
      this.highlight.style.left = `${c.x * this.pxPerMm}px`;
      this.highlight.style.top = `${c.y * this.pxPerMm}px`;
      this.highlight.style.width = `${c.w * this.pxPerMm}px`;
      this.highlight.style.height = `${c.h * this.pxPerMm}px`;
    } else if (selection?.kind === "rows") {
      const bands = doc.layout.records.filter(
        (r) => r.index >= selection.start && r.index < selection.stop,
      );
      if (bands.length) {
        const top = Math.min(...bands.map((b) => b.y));
        const bottom = Math.max(...bands.map((b) => b.y + b.h));
        this.highlight.style.display = "block";
        this.highlight.style.left = "0px";
        this.highlight.style.top = `${top * this.pxPerMm}px`;
        this.highlight.style.width = `${doc.layout.width_mm * this.pxPerMm}px`;
        this.highlight.style.height = `${(bottom - top) * this.pxPerMm}px`;
      } else {
        this.highlight.style.display = "none";
      }
    } else {
      this.highlight.style.display = "none";
    }
  }

  /** SVG markup last written to the DOM (for the no-local-mutation invariant). */
  displayedSvg(): string {
    return this.lastSvg;
  }
}
