import { mount } from "./ui.js";

declare global {
  interface Window {
    FITPICK_API?: string;
  }
}

const base = window.FITPICK_API ?? "";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}

mount(root, base).catch((error: unknown) => {
  root.textContent = `failed to start: ${String(error)}`;
});
