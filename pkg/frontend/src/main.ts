import { createEditor } from "./editor.js";

// Browser entry: ?doc=<path> is fetched from the server's static dir in a real
// deployment; here the page starts empty and documents are opened via the picker.

function boot(): void {
  const root = document.getElementById("app");
  if (!root) return;
  const baseUrl = (document.body.dataset.api ?? "http://127.0.0.1:8123").replace(/\/$/, "");
  const editor = createEditor(root, baseUrl);

  const picker = document.createElement("input");
  picker.type = "file";
  picker.accept = ".tks,.tkm";
  picker.addEventListener("change", async () => {
    const file = picker.files?.[0];
    if (!file) return;
    const text = await file.text();
    await editor.open(file.name.endsWith(".tks") ? "tks" : "tkm", text);
  });
  root.prepend(picker);
}

boot();
