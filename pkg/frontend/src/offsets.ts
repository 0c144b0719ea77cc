// JavaScript string indices count UTF-16 code units, but the review API
// speaks Unicode scalar offsets; documents may contain astral characters,
// so the two disagree. Conversions live here and nowhere else.

/** Scalar offset of the given UTF-16 index into `text`. */
export function utf16ToScalar(text: string, utf16: number): number {
  if (utf16 < 0 || utf16 > text.length) {
    throw new RangeError(`UTF-16 index ${utf16} out of range`);
  }
  let scalar = 0;
  let i = 0;
  while (i < utf16) {
    const code = text.codePointAt(i);
    if (code === undefined) break;
    const width = code > 0xffff ? 2 : 1;
    if (i + width > utf16) {
      throw new RangeError(`UTF-16 index ${utf16} splits a surrogate pair`);
    }
    i += width;
    scalar += 1;
  }
  return scalar;
}

/** UTF-16 index of the given scalar offset into `text`. */
export function scalarToUtf16(text: string, scalar: number): number {
  if (scalar < 0) throw new RangeError(`scalar offset ${scalar} out of range`);
  let remaining = scalar;
  let i = 0;
  while (remaining > 0) {
    const code = text.codePointAt(i);
    if (code === undefined) {
      throw new RangeError(`scalar offset ${scalar} out of range`);
    }
    i += code > 0xffff ? 2 : 1;
    remaining -= 1;
  }
  return i;
}

/** Slice `text` by scalar offsets. */
export function scalarSlice(text: string, begin: number, end: number): string {
  return text.slice(scalarToUtf16(text, begin), scalarToUtf16(text, end));
}
