// In-memory stand-in for the review service, mirroring its payload shapes
// and decision semantics closely enough for UI tests. Mirrors the Python
// fixture corpus: EN001 has two missing items, EN002 one mismatch
// candidate, EN003 one missing item.

import type {
  AnnotationView,
  DecisionBody,
  DocumentSummary,
  DocumentView,
} from "../src/types.js";

interface AnnState {
  id: string;
  category: string;
  original_status: string;
  begin: number | null;
  end: number | null;
  source_id: string | null;
  attributes: Record<string, string>;
  source_text: string | null;
  decided: boolean;
  effective_action: string | null;
  rejected: boolean;
  status: string | null;
}

interface DocState {
  doc_id: string;
  language: string;
  text: string;
  source_text: string;
  annotations: AnnState[];
}

function ann(partial: Partial<AnnState> & { id: string; category: string;
             original_status: string }): AnnState {
  return {
    begin: null, end: null, source_id: partial.id, attributes: {},
    source_text: null, decided: false, effective_action: null,
    rejected: false,
    status: partial.original_status === "MISSING" ? null
                                                  : partial.original_status,
    ...partial,
  };
}

// The target text carries an astral character before the reviewed phrase
// so scalar and UTF-16 offsets disagree.
export const EN002_TEXT =
  "Nota 𝜇: rottura capsulare anteriore e posteriore della lente.";
export const CORRECT_EXPECTED = { begin: 8, end: 35 }; // "rottura capsulare anteriore"
export const ADD_EXPECTED = { begin: 49, end: 60 };    // "della lente"

export function fixtureState(): DocState[] {
  return [
    {
      doc_id: "EN001",
      language: "it",
      text: "Una donna presentava vomito.",
      source_text: "A woman presented vomiting.",
      annotations: [
        ann({ id: "CL2", category: "CLINICAL_ENTITY", original_status: "OK",
              begin: 21, end: 27 }),
        ann({ id: "EV1", category: "EVENT", original_status: "MISSING",
              source_text: "presented" }),
        ann({ id: "CL1", category: "CLINICAL_ENTITY",
              original_status: "MISSING", source_text: "nausea" }),
      ],
    },
    {
      doc_id: "EN002",
      language: "it",
      text: EN002_TEXT,
      source_text: "Note: anterior and posterior capsular rupture of the lens.",
      annotations: [
        ann({ id: "CL9", category: "CLINICAL_ENTITY",
              original_status: "MISMATCH_CANDIDATE", begin: 8, end: 48,
              attributes: { discontinuous: "true" },
              source_text: "anterior and posterior capsular rupture" }),
        ann({ id: "CL10", category: "CLINICAL_ENTITY",
              original_status: "MISSING",
              source_text: "the lens" }),
      ],
    },
  ];
}

export class FakeServer {
  state: DocState[];
  posts: DecisionBody[] = [];
  failNextPost = false;

  constructor(state: DocState[] = fixtureState()) {
    this.state = state;
  }

  private annotationView(doc: DocState, a: AnnState): AnnotationView {
    return {
      doc_id: doc.doc_id,
      id: a.id,
      category: a.category,
      original_status: a.original_status,
      source_id: a.source_id,
      attributes: a.attributes,
      decided: a.decided,
      effective_action: a.effective_action,
      rejected: a.rejected,
      begin: a.rejected ? null : a.begin,
      end: a.rejected ? null : a.end,
      status: a.rejected ? null : a.status,
      source: a.source_text === null ? null : {
        id: a.source_id ?? a.id,
        category: a.category,
        begin: 0,
        end: a.source_text.length,
        text: a.source_text,
        attributes: a.attributes,
        relations: [],
      },
    };
  }

  private pending(doc: DocState): AnnState[] {
    return doc.annotations.filter(
      (a) => !a.decided &&
        (a.original_status === "MISMATCH_CANDIDATE" ||
         a.original_status === "MISSING"));
  }

  summaries(): DocumentSummary[] {
    return this.state.map((doc) => ({
      doc_id: doc.doc_id,
      language: doc.language,
      pending_mismatches: this.pending(doc).filter(
        (a) => a.original_status === "MISMATCH_CANDIDATE").length,
      pending_missing: this.pending(doc).filter(
        (a) => a.original_status === "MISSING").length,
    }));
  }

  documentView(docId: string): DocumentView | null {
    const doc = this.state.find((d) => d.doc_id === docId);
    if (!doc) return null;
    return {
      doc_id: doc.doc_id,
      language: doc.language,
      text: doc.text,
      annotations: doc.annotations.map((a) => this.annotationView(doc, a)),
      relations: [],
      source: {
        text: doc.source_text,
        annotations: doc.annotations
          .filter((a) => a.source_text !== null)
          .map((a) => ({
            id: a.source_id ?? a.id,
            category: a.category,
            begin: doc.source_text.indexOf(a.source_text!),
            end: doc.source_text.indexOf(a.source_text!) +
                 a.source_text!.length,
            status: "OK",
            attributes: a.attributes,
          }))
          .filter((a) => a.begin >= 0),
        relations: [],
      },
    };
  }

  applyDecision(body: DecisionBody): AnnotationView | { error: string } {
    const doc = this.state.find((d) => d.doc_id === body.doc_id);
    const a = doc?.annotations.find((x) => x.id === body.ann_id);
    if (!doc || !a) return { error: "unknown annotation" };
    a.decided = true;
    a.effective_action = body.action;
    if (body.action === "REJECT") {
      a.rejected = true;
    } else if (body.action === "ACCEPT") {
      a.status = "OK";
    } else {
      a.status = "OK";
      a.begin = body.begin ?? null;
      a.end = body.end ?? null;
    }
    return this.annotationView(doc, a);
  }

  /** Install a fetch stub routing API calls into this fake. */
  fetch = async (input: RequestInfo | URL, init?: RequestInit):
      Promise<Response> => {
    const url = String(input);
    const json = (body: unknown, status = 200) =>
      new Response(JSON.stringify(body), {
        status,
        headers: { "Content-Type": "application/json" },
      });
    if (url.endsWith("/api/documents")) return json(this.summaries());
    const docMatch = /\/api\/documents\/([^/?]+)$/.exec(url);
    if (docMatch) {
      const view = this.documentView(decodeURIComponent(docMatch[1]!));
      return view ? json(view) : json({ detail: "not found" }, 404);
    }
    if (url.includes("/api/queue")) {
      const items: AnnotationView[] = [];
      for (const doc of this.state) {
        for (const a of this.pending(doc)) {
          items.push(this.annotationView(doc, a));
        }
      }
      return json(items);
    }
    if (url.endsWith("/api/decisions") && init?.method === "POST") {
      if (this.failNextPost) {
        this.failNextPost = false;
        return json({ detail: "injected failure" }, 500);
      }
      const body = JSON.parse(String(init.body)) as DecisionBody;
      this.posts.push(body);
      const result = this.applyDecision(body);
      if ("error" in result) return json({ detail: result.error }, 404);
      return json(result);
    }
    return json({ detail: `unhandled ${url}` }, 500);
  };
}

export function selectText(container: HTMLElement, needle: string): void {
  const doc = container.ownerDocument;
  const win = doc.defaultView!;
  const walker = doc.createTreeWalker(container, 4 /* text nodes */);
  for (let node = walker.nextNode(); node; node = walker.nextNode()) {
    const index = (node.textContent ?? "").indexOf(needle);
    if (index < 0) continue;
    const range = doc.createRange();
    range.setStart(node, index);
    range.setEnd(node, index + needle.length);
    const selection = win.getSelection()!;
    selection.removeAllRanges();
    selection.addRange(range);
    return;
  }
  throw new Error(`text not found in a single node: ${needle}`);
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
