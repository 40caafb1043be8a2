import type { CatalogMatch, ConstraintsResponse } from "./types.js";

/**
 * Catalog browser, auto-filtered by the clicked cell's object class and the
 * constraints gathered from its record's source cells.
 */
export class CatalogPanel {
  readonly root: HTMLElement;
  private readonly title: HTMLElement;
  private readonly list: HTMLElement;
  matches: CatalogMatch[] = [];

  constructor(private readonly onPick: (match: CatalogMatch) => void) {
    this.root = document.createElement("div");
    this.root.className = "tkd-catalog-panel";
    this.root.style.display = "none";
    this.title = document.createElement("div");
    this.title.className = "tkd-catalog-title";
    this.list = document.createElement("ul");
    this.list.className = "tkd-catalog-list";
    this.root.appendChild(this.title);
    this.root.appendChild(this.list);
  }

  show(objectClass: string, constraints: ConstraintsResponse | null, matches: CatalogMatch[]): void {
    this.matches = matches;
    const parts = [objectClass];
    if (constraints?.pressure) parts.push(`P ${constraints.pressure.value} ${constraints.pressure.unit}`);
    if (constraints?.temperature) parts.push(`T ${constraints.temperature.value} ${constraints.temperature.unit}`);
    if (constraints?.dn != null) parts.push(`DN ${constraints.dn}`);
    this.title.textContent = parts.join(" · ");
    this.list.innerHTML = "";
    matches.forEach((match, index) => {
      const item = document.createElement("li");
      const label = document.createElement("span");
      label.textContent = Object.values(match.fields).join(" | ");
      const pick = document.createElement("button");
      pick.textContent = "выбрать";
      pick.className = "tkd-catalog-pick";
      pick.dataset.index = String(index);
      pick.addEventListener("click", () => this.onPick(match));
      item.appendChild(label);
      item.appendChild(pick);
      this.list.appendChild(item);
    });
    this.root.style.display = "block";
  }

  hide(): void {
    this.root.style.display = "none";
    this.matches = [];
    this.list.innerHTML = "";
  }

  pickButtons(): HTMLButtonElement[] {
    return Array.from(this.list.querySelectorAll("button.tkd-catalog-pick"));
  }
}
