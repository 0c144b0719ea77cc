import { beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { DocView } from "../src/docview.js";
import { QueueView } from "../src/queue.js";
import { FakeServer, flush, selectText } from "./helpers.js";

let server: FakeServer;
let root: HTMLElement;

beforeEach(() => {
  server = new FakeServer();
  vi.stubGlobal("fetch", server.fetch);
  document.body.innerHTML = '<div id="app"></div><div id="toasts"></div>';
  root = document.getElementById("app")!;
});

describe("queue view", () => {
  it("renders the exact pending counts from /api/documents", async () => {
    const queue = new QueueView(root, new ApiClient(), () => {});
    await queue.refresh();
    const rows = [...root.querySelectorAll<HTMLElement>("tr[data-doc-id]")];
    expect(rows.map((r) => r.dataset.docId)).toEqual(["EN001", "EN002"]);
    const counts = rows.map((r) => [
      r.querySelector(".pending-mismatches")!.textContent,
      r.querySelector(".pending-missing")!.textContent,
    ]);
    expect(counts).toEqual([["0", "2"], ["1", "1"]]);
    expect(root.querySelector("#progress")!.textContent)
      .toBe("4 items pending review");
    expect(root.querySelectorAll("li[data-ann-id]")).toHaveLength(4);
  });

  it("accepting and resolving all flags drives pending to zero", async () => {
    const client = new ApiClient();

    // EN002: accept the mismatch candidate, add the missing item
    const en002 = new DocView(root, client, "EN002");
    await en002.refresh("CL9");
    await en002.accept();
    await flush();
    await en002.refresh("CL10");
    selectText(en002.targetContainer()!, "della lente");
    await en002.addFromSelection();
    await flush();

    // EN001: reject both missing items
    const en001 = new DocView(root, client, "EN001");
    await en001.refresh();
    await en001.reject();
    await flush();
    await en001.refresh();
    await en001.reject();
    await flush();

    const queue = new QueueView(root, client, () => {});
    await queue.refresh();
    const rows = [...root.querySelectorAll<HTMLElement>("tr[data-doc-id]")];
    for (const row of rows) {
      expect(row.querySelector(".pending-mismatches")!.textContent).toBe("0");
      expect(row.querySelector(".pending-missing")!.textContent).toBe("0");
    }
    expect(root.querySelector("#progress")!.textContent)
      .toBe("All flags reviewed.");
    expect(root.querySelectorAll("li[data-ann-id]")).toHaveLength(0);
  });

  it("failed loads surface a retry toast", async () => {
    vi.stubGlobal("fetch", () => Promise.reject(new Error("offline")));
    const queue = new QueueView(root, new ApiClient(), () => {});
    await queue.refresh();
    const toast = document.querySelector("#toasts .toast");
    expect(toast).not.toBeNull();
    expect(toast!.querySelector("button.retry")).not.toBeNull();
  });
});
