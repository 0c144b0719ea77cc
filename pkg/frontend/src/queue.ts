// Work-queue screen: per-document pending counts and the flat list of
// flagged items still awaiting a decision.

import { ApiClient } from "./api.js";
import { showToast } from "./toast.js";
import type { AnnotationView, DocumentSummary } from "./types.js";

export type OpenDocument = (docId: string, annId?: string) => void;

export class QueueView {
  constructor(
    private readonly root: HTMLElement,
    private readonly client: ApiClient,
    private readonly openDocument: OpenDocument,
  ) {}

  async refresh(): Promise<void> {
    let documents: DocumentSummary[];
    let items: AnnotationView[];
    try {
      [documents, items] = await Promise.all([
        this.client.documents(),
        this.client.queue(),
      ]);
    } catch (err) {
      showToast(this.root.ownerDocument, `failed to load queue: ${String(err)}`,
                () => void this.refresh());
      return;
    }
    this.render(documents, items);
  }

  private render(documents: DocumentSummary[], items: AnnotationView[]): void {
    const doc = this.root.ownerDocument;
    this.root.textContent = "";

    const pending = documents.reduce(
      (n, d) => n + d.pending_mismatches + d.pending_missing, 0);
    const header = doc.createElement("header");
    header.className = "queue-header";
    const progress = doc.createElement("span");
    progress.id = "progress";
    progress.textContent = pending === 0
      ? "All flags reviewed."
      : `${pending} item${pending === 1 ? "" : "s"} pending review`;
    header.appendChild(progress);
    this.root.appendChild(header);

    const table = doc.createElement("table");
    table.className = "documents";
    const head = doc.createElement("tr");
    for (const label of ["document", "language", "pending mismatches",
                         "pending missing"]) {
      const th = doc.createElement("th");
      th.textContent = label;
      head.appendChild(th);
    }
    table.appendChild(head);
    for (const summary of documents) {
      const row = doc.createElement("tr");
      row.dataset.docId = summary.doc_id;
      const link = doc.createElement("a");
      link.href = `#/doc/${encodeURIComponent(summary.doc_id)}`;
      link.textContent = summary.doc_id;
      const docCell = doc.createElement("td");
      docCell.appendChild(link);
      row.appendChild(docCell);
      const language = doc.createElement("td");
      language.textContent = summary.language;
      row.appendChild(language);
      const mismatches = doc.createElement("td");
      mismatches.className = "pending-mismatches";
      mismatches.textContent = String(summary.pending_mismatches);
      row.appendChild(mismatches);
      const missing = doc.createElement("td");
      missing.className = "pending-missing";
      missing.textContent = String(summary.pending_missing);
      row.appendChild(missing);
      table.appendChild(row);
    }
    this.root.appendChild(table);

    const list = doc.createElement("ul");
    list.className = "work-list";
    for (const item of items) {
      const li = doc.createElement("li");
      li.dataset.annId = item.id;
      li.dataset.docId = item.doc_id;
      const open = doc.createElement("button");
      open.className = "open-item";
      const surface = item.source?.text ?? "";
      open.textContent =
        `${item.doc_id} ${item.id} [${item.category}] ` +
        `${item.original_status}${surface ? ` — “${surface}”` : ""}`;
      open.addEventListener("click", () =>
        this.openDocument(item.doc_id, item.id));
      li.appendChild(open);
      list.appendChild(li);
    }
    this.root.appendChild(list);
  }
}
