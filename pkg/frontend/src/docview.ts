// Side-by-side document screen: target text with highlighted spans on the
// left, the source-language original on the right, and a decision toolbar
// for the flagged item under review.
//
// Decisions are optimistic: the item leaves the local pending list
// immediately, the POST follows, and on failure the item is restored and
// an error toast with a retry affordance appears. After a server ack the
// whole document is refetched; the server stays the source of truth.

import { ApiClient } from "./api.js";
import { renderText, segmentsFor, type HighlightSpan } from "./highlight.js";
import { selectionScalarOffsets } from "./selection.js";
import { showToast } from "./toast.js";
import type {
  AnnotationView,
  DecisionAction,
  DecisionBody,
  DocumentView,
} from "./types.js";

const FLAGGED = new Set(["MISMATCH_CANDIDATE", "MISSING"]);

export class DocView {
  private view: DocumentView | null = null;
  private pending: AnnotationView[] = [];
  private cursor = 0;
  reviewer = "";

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ApiClient,
    readonly docId: string,
    private readonly onChange: () => void = () => {},
  ) {}

  async refresh(focusAnn?: string): Promise<void> {
    try {
      this.view = await this.client.document(this.docId);
    } catch (err) {
      showToast(this.root.ownerDocument,
                `failed to load ${this.docId}: ${String(err)}`,
                () => void this.refresh(focusAnn));
      return;
    }
    this.pending = this.view.annotations.filter(
      (a) => FLAGGED.has(a.original_status) && !a.decided);
    if (focusAnn) {
      const i = this.pending.findIndex((a) => a.id === focusAnn);
      this.cursor = i >= 0 ? i : 0;
    } else {
      this.cursor = Math.min(this.cursor, Math.max(0, this.pending.length - 1));
    }
    this.render();
  }

  current(): AnnotationView | null {
    return this.pending[this.cursor] ?? null;
  }

  move(delta: number): void {
    if (this.pending.length === 0) return;
    const n = this.pending.length;
    this.cursor = (this.cursor + delta + n) % n;
    this.render();
  }

  /** One-keystroke bindings: a=accept, c=correct selection, n=add at
   * selection, x=reject, j/k=next/previous. */
  handleKey(key: string): void {
    if (key === "a") void this.accept();
    else if (key === "c") void this.correctFromSelection();
    else if (key === "n") void this.addFromSelection();
    else if (key === "x") void this.reject();
    else if (key === "j") this.move(1);
    else if (key === "k") this.move(-1);
  }

  async accept(): Promise<void> {
    const item = this.current();
    if (!item) return;
    if (item.original_status !== "MISMATCH_CANDIDATE") {
      showToast(this.root.ownerDocument,
                "only mismatch candidates can be accepted as-is");
      return;
    }
    await this.decide({ doc_id: this.docId, ann_id: item.id,
                        action: "ACCEPT", reviewer: this.reviewer });
  }

  async reject(): Promise<void> {
    const item = this.current();
    if (!item) return;
    await this.decide({ doc_id: this.docId, ann_id: item.id,
                        action: "REJECT", reviewer: this.reviewer });
  }

  async correctFromSelection(): Promise<void> {
    await this.decideWithSelection("CORRECT", "MISMATCH_CANDIDATE",
                                   "select the corrected span first");
  }

  async addFromSelection(): Promise<void> {
    await this.decideWithSelection("ADD", "MISSING",
                                   "select the span for the missing item first");
  }

  private async decideWithSelection(
    action: DecisionAction,
    requiredStatus: string,
    hint: string,
  ): Promise<void> {
    const item = this.current();
    if (!item) return;
    const doc = this.root.ownerDocument;
    if (item.original_status !== requiredStatus) {
      showToast(doc, `${action} applies to ${requiredStatus} items`);
      return;
    }
    const container = this.targetContainer();
    const selected = container
      ? selectionScalarOffsets(container, doc.defaultView?.getSelection() ?? null)
      : null;
    if (!selected) {
      showToast(doc, hint);
      return;
    }
    await this.decide({
      doc_id: this.docId, ann_id: item.id, action,
      begin: selected.begin, end: selected.end, reviewer: this.reviewer,
    });
  }

  /** Optimistically advance, POST, roll back on failure. */
  private async decide(body: DecisionBody): Promise<void> {
    const index = this.pending.findIndex((a) => a.id === body.ann_id);
    if (index < 0) return;
    const [removed] = this.pending.splice(index, 1);
    if (this.cursor >= this.pending.length) this.cursor = 0;
    this.render();
    try {
      await this.client.decide(body);
    } catch (err) {
      this.pending.splice(index, 0, removed!);
      this.cursor = index;
      this.render();
      showToast(this.root.ownerDocument,
                `decision failed: ${String(err)}`,
                () => void this.decide(body));
      return;
    }
    await this.refresh();
    this.onChange();
  }

  targetContainer(): HTMLElement | null {
    return this.root.querySelector<HTMLElement>(".target-pane .doc-text");
  }

  private render(): void {
    const view = this.view;
    if (!view) return;
    const doc = this.root.ownerDocument;
    this.root.textContent = "";
    const current = this.current();

    const header = doc.createElement("header");
    header.className = "doc-header";
    const back = doc.createElement("a");
    back.href = "#/";
    back.textContent = "← queue";
    header.appendChild(back);
    const title = doc.createElement("h2");
    title.textContent = `${view.doc_id} (${view.language})`;
    header.appendChild(title);
    const progress = doc.createElement("span");
    progress.id = "doc-progress";
    progress.textContent = this.pending.length === 0
      ? "no pending flags"
      : `${this.pending.length} pending · reviewing ` +
        `${this.cursor + 1}/${this.pending.length}`;
    header.appendChild(progress);
    this.root.appendChild(header);

    const panes = doc.createElement("div");
    panes.className = "panes";

    const targetPane = doc.createElement("section");
    targetPane.className = "target-pane";
    const targetTitle = doc.createElement("h3");
    targetTitle.textContent = "target";
    targetPane.appendChild(targetTitle);
    const targetText = doc.createElement("div");
    const targetSpans: HighlightSpan[] = view.annotations
      .filter((a) => a.begin !== null && a.end !== null && !a.rejected)
      .map((a) => ({
        id: a.id,
        category: a.category,
        begin: a.begin!,
        end: a.end!,
        flagged: FLAGGED.has(a.original_status) && !a.decided,
      }));
    renderText(targetText, view.text, targetSpans);
    targetPane.appendChild(targetText);
    panes.appendChild(targetPane);

    const sourcePane = doc.createElement("section");
    sourcePane.className = "source-pane";
    const sourceTitle = doc.createElement("h3");
    sourceTitle.textContent = "source";
    sourcePane.appendChild(sourceTitle);
    const sourceText = doc.createElement("div");
    if (view.source) {
      const sourceSpans: HighlightSpan[] = view.source.annotations
        .filter((a) => a.begin !== null && a.end !== null)
        .map((a) => ({ id: a.id, category: a.category,
                       begin: a.begin!, end: a.end! }));
      renderText(sourceText, view.source.text, sourceSpans);
    } else {
      sourceText.textContent = "(no source corpus configured)";
    }
    sourcePane.appendChild(sourceText);
    panes.appendChild(sourcePane);
    this.root.appendChild(panes);

    if (current) {
      for (const el of segmentsFor(targetText, current.id)) {
        el.classList.add("focus");
      }
      const sourceId = current.source?.id ?? current.source_id;
      if (sourceId) {
        for (const el of segmentsFor(sourceText, sourceId)) {
          el.classList.add("focus");
          if (typeof el.scrollIntoView === "function") {
            el.scrollIntoView({ block: "center" });
          }
        }
      }
    }

    this.root.appendChild(this.renderItemPanel(current));
  }

  private renderItemPanel(current: AnnotationView | null): HTMLElement {
    const doc = this.root.ownerDocument;
    const panel = doc.createElement("aside");
    panel.className = "item-panel";
    if (!current) {
      panel.textContent = "Nothing left to review in this document.";
      return panel;
    }
    const title = doc.createElement("h3");
    title.id = "current-item";
    title.dataset.annId = current.id;
    title.textContent =
      `${current.id} [${current.category}] ${current.original_status}`;
    panel.appendChild(title);

    // the paired source-language annotation is always shown
    const source = doc.createElement("dl");
    source.className = "source-info";
    const addRow = (label: string, value: string) => {
      const dt = doc.createElement("dt");
      dt.textContent = label;
      const dd = doc.createElement("dd");
      dd.textContent = value;
      source.appendChild(dt);
      source.appendChild(dd);
    };
    if (current.source) {
      addRow("source span", current.source.text ?? "(no span)");
      for (const [key, value] of Object.entries(current.source.attributes)) {
        addRow(key, value);
      }
      for (const relation of current.source.relations ?? []) {
        addRow(relation.rel_type,
               `${relation.source} → ${relation.target}`);
      }
    } else {
      addRow("source span", "(unavailable)");
      for (const [key, value] of Object.entries(current.attributes)) {
        addRow(key, value);
      }
    }
    panel.appendChild(source);

    const toolbar = doc.createElement("div");
    toolbar.className = "toolbar";
    const buttons: Array<[string, string, () => void]> = [
      ["accept", "Accept (a)", () => void this.accept()],
      ["correct", "Correct selection (c)",
       () => void this.correctFromSelection()],
      ["add", "Add at selection (n)", () => void this.addFromSelection()],
      ["reject", "Reject (x)", () => void this.reject()],
      ["next", "Next (j)", () => this.move(1)],
    ];
    for (const [cls, label, handler] of buttons) {
      const button = doc.createElement("button");
      button.className = cls;
      button.textContent = label;
      button.addEventListener("click", handler);
      toolbar.appendChild(button);
    }
    panel.appendChild(toolbar);
    return panel;
  }
}
