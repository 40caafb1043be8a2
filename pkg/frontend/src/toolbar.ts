/** Row-operation toolbar; actions are plain callbacks wired by the editor. */
export interface ToolbarActions {
  appendRow(): void;
  deleteRows(): void;
  clearRows(): void;
  copyRows(): void;
  moveRows(): void;
  toBuffer(): void;
  fromBuffer(): void;
  mergeRows(): void;
  packRows(): void;
  undo(): void;
}

const BUTTONS: [keyof ToolbarActions, string][] = [
  ["appendRow", "Добавить строку"],
  ["copyRows", "Копирование"],
  ["moveRows", "Перенос"],
  ["deleteRows", "Удаление"],
  ["clearRows", "Очистка"],
  ["toBuffer", "В буфер изделий"],
  ["fromBuffer", "Из буфера изделий"],
  ["mergeRows", "Слить одинаковые"],
  ["packRows", "Фасовка"],
  ["undo", "Возврат"],
];

export class Toolbar {
  readonly root: HTMLElement;
  private readonly buttons = new Map<string, HTMLButtonElement>();

  constructor(actions: ToolbarActions) {
    this.root = document.createElement("div");
    this.root.className = "tkd-toolbar";
    for (const [name, label] of BUTTONS) {
      const button = document.createElement("button");
      button.textContent = label;
      button.dataset.action = name;
      button.addEventListener("click", () => actions[name]());
      this.buttons.set(name, button);
      this.root.appendChild(button);
    }
  }

  button(action: keyof ToolbarActions): HTMLButtonElement {
    const button = this.buttons.get(action);
    if (!button) throw new Error(`no toolbar button ${action}`);
    return button;
  }
}
