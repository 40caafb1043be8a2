/** Shows the shared item buffer as raw `.tkb` text plus a row count. */
export class BufferPanel {
  readonly root: HTMLElement;
  private readonly count: HTMLElement;
  private readonly preview: HTMLElement;

  constructor() {
    this.root = document.createElement("div");
    this.root.className = "tkd-buffer-panel";
    this.count = document.createElement("div");
    this.count.className = "tkd-buffer-count";
    this.count.textContent = "буфер пуст";
    this.preview = document.createElement("pre");
    this.preview.className = "tkd-buffer-preview";
    this.root.appendChild(this.count);
    this.root.appendChild(this.preview);
  }

  update(tkbText: string): void {
    const rows = tkbText.split("\n").filter((line) => line === "row").length;
    this.count.textContent = rows === 0 ? "буфер пуст" : `строк в буфере: ${rows}`;
    this.preview.textContent = tkbText;
  }
}
