// Turning a browser drag-selection inside a rendered text container into
// scalar offsets for the API. DOM ranges address (node, UTF-16 offset)
// pairs; we flatten them against the container's text content first, then
// convert to scalar offsets.

import { utf16ToScalar } from "./offsets.js";

function utf16PositionIn(
  container: HTMLElement,
  node: Node,
  offsetInNode: number,
): number | null {
  let position = 0;
  const doc = container.ownerDocument;
  const walker = doc.createTreeWalker(container, 4 /* NodeFilter.SHOW_TEXT */);
  for (let current = walker.nextNode(); current; current = walker.nextNode()) {
    if (current === node) {
      return position + offsetInNode;
    }
    position += (current.textContent ?? "").length;
  }
  // The endpoint may be an element (e.g. triple-click selects the
  // container itself); resolve it to the boundary of its child text.
  if (node === container || container.contains(node)) {
    if (node.nodeType === 1 /* element */) {
      let before = 0;
      const children = node.childNodes;
      for (let i = 0; i < Math.min(offsetInNode, children.length); i++) {
        before += (children[i]?.textContent ?? "").length;
      }
      let base = 0;
      const walker2 = doc.createTreeWalker(container, 4);
      for (let cur = walker2.nextNode(); cur; cur = walker2.nextNode()) {
        if (node.contains(cur)) break;
        base += (cur.textContent ?? "").length;
      }
      return base + before;
    }
  }
  return null;
}

export interface SelectedSpan {
  begin: number; // scalar offsets into the container text
  end: number;
  text: string;
}

/** Scalar offsets of the current selection inside `container`, or null
 * when the selection is empty or outside it. */
export function selectionScalarOffsets(
  container: HTMLElement,
  selection: Selection | null,
): SelectedSpan | null {
  if (!selection || selection.rangeCount === 0) return null;
  const range = selection.getRangeAt(0);
  if (range.collapsed) return null;
  const text = container.textContent ?? "";
  const startU16 = utf16PositionIn(container, range.startContainer,
                                   range.startOffset);
  const endU16 = utf16PositionIn(container, range.endContainer,
                                 range.endOffset);
  if (startU16 === null || endU16 === null) return null;
  const [lo, hi] = startU16 <= endU16 ? [startU16, endU16]
                                      : [endU16, startU16];
  if (lo === hi) return null;
  return {
    begin: utf16ToScalar(text, lo),
    end: utf16ToScalar(text, hi),
    text: text.slice(lo, hi),
  };
}
