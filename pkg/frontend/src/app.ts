// Entry point: hash routing between the queue and document screens, plus
// global keyboard dispatch to the active document view.

import { ApiClient } from "./api.js";
import { DocView } from "./docview.js";
import { QueueView } from "./queue.js";

export class App {
  private docView: DocView | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ApiClient = new ApiClient(),
  ) {}

  start(): void {
    const win = this.root.ownerDocument.defaultView;
    win?.addEventListener("hashchange", () => void this.route());
    this.root.ownerDocument.addEventListener("keydown", (event) => {
      if (event.defaultPrevented) return;
      const target = event.target as HTMLElement | null;
      if (target && ["INPUT", "TEXTAREA"].includes(target.tagName)) return;
      this.docView?.handleKey(event.key);
    });
    void this.route();
  }

  async route(): Promise<void> {
    const hash = this.root.ownerDocument.defaultView?.location.hash ?? "";
    const match = /^#\/doc\/([^?]+)(?:\?ann=(.+))?$/.exec(hash);
    if (match) {
      const docId = decodeURIComponent(match[1]!);
      const annId = match[2] ? decodeURIComponent(match[2]) : undefined;
      this.docView = new DocView(this.root, this.client, docId);
      await this.docView.refresh(annId);
    } else {
      this.docView = null;
      const queue = new QueueView(this.root, this.client, (docId, annId) => {
        const suffix = annId ? `?ann=${encodeURIComponent(annId)}` : "";
        const win = this.root.ownerDocument.defaultView;
        if (win) win.location.hash = `#/doc/${encodeURIComponent(docId)}${suffix}`;
      });
      await queue.refresh();
    }
  }
}

declare global {
  interface Window {
    __clinprojApp?: App;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const app = new App(document.getElementById("app")!);
  window.__clinprojApp = app;
  app.start();
}
