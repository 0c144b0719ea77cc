// Span highlighting over document text. The text is split at every
// annotation boundary; a segment covered by exactly one annotation gets its
// category background, while segments under overlapping (nested or
// crossing) annotations render as stacked underlines so both extents stay
// legible. Every highlighted segment carries its scalar offsets and the
// covering annotation ids as data attributes, which keeps rendering
// assertions pixel-independent.

import { scalarToUtf16 } from "./offsets.js";

export interface HighlightSpan {
  id: string;
  category: string;
  begin: number; // scalar offsets
  end: number;
  flagged?: boolean;
}

export const CATEGORY_CLASSES: Record<string, string> = {
  CLINICAL_ENTITY: "cat-clinical-entity",
  RML: "cat-rml",
  EVENT: "cat-event",
  TIMEX3: "cat-timex3",
  ACTOR: "cat-actor",
  BODYPART: "cat-bodypart",
};

export function renderText(
  container: HTMLElement,
  text: string,
  spans: HighlightSpan[],
): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  container.classList.add("doc-text");

  const scalarLength = [...text].length; // code points, not UTF-16 units
  const boundaries = new Set<number>([0, scalarLength]);
  for (const span of spans) {
    boundaries.add(span.begin);
    boundaries.add(span.end);
  }
  const points = [...boundaries].sort((a, b) => a - b);

  for (let i = 0; i + 1 < points.length; i++) {
    const begin = points[i]!;
    const end = points[i + 1]!;
    if (begin === end) continue;
    const piece = text.slice(scalarToUtf16(text, begin), scalarToUtf16(text, end));
    const covering = spans
      .filter((s) => s.begin <= begin && end <= s.end)
      .sort((a, b) => a.begin - b.begin || b.end - a.end ||
                      (a.id < b.id ? -1 : 1));
    if (covering.length === 0) {
      container.appendChild(doc.createTextNode(piece));
      continue;
    }
    const segment = doc.createElement("span");
    segment.className = "hl";
    segment.dataset.begin = String(begin);
    segment.dataset.end = String(end);
    segment.dataset.ids = covering.map((s) => s.id).join(" ");
    if (covering.some((s) => s.flagged)) segment.classList.add("flagged");
    if (covering.length === 1) {
      const only = covering[0]!;
      segment.classList.add(CATEGORY_CLASSES[only.category] ?? "cat-other");
      segment.textContent = piece;
    } else {
      segment.classList.add("overlap");
      // stacked underlines: one nested layer per covering annotation
      let parent: HTMLElement = segment;
      for (const span of covering) {
        const layer = doc.createElement("span");
        layer.className =
          `ul ${CATEGORY_CLASSES[span.category] ?? "cat-other"}-ul`;
        layer.dataset.ulId = span.id;
        parent.appendChild(layer);
        parent = layer;
      }
      parent.textContent = piece;
    }
    container.appendChild(segment);
  }
}

/** Reconstruct each annotation's rendered extent from the DOM (scalar
 * offsets), for assertions and for scrolling a span into view. */
export function renderedExtents(
  container: HTMLElement,
): Map<string, { begin: number; end: number }> {
  const extents = new Map<string, { begin: number; end: number }>();
  for (const segment of container.querySelectorAll<HTMLElement>("span.hl")) {
    const begin = Number(segment.dataset.begin);
    const end = Number(segment.dataset.end);
    for (const id of (segment.dataset.ids ?? "").split(" ").filter(Boolean)) {
      const current = extents.get(id);
      if (current === undefined) {
        extents.set(id, { begin, end });
      } else {
        current.begin = Math.min(current.begin, begin);
        current.end = Math.max(current.end, end);
      }
    }
  }
  return extents;
}

export function segmentsFor(
  container: HTMLElement,
  annId: string,
): HTMLElement[] {
  return [...container.querySelectorAll<HTMLElement>("span.hl")].filter(
    (el) => (el.dataset.ids ?? "").split(" ").includes(annId),
  );
}
