import { describe, expect, it } from "vitest";

import { scalarSlice, scalarToUtf16, utf16ToScalar } from "../src/offsets.js";

const ASTRAL = "A\u{1D707}B"; // "A𝜇B": 3 scalars, 4 UTF-16 units

describe("offset conversions", () => {
  it("are identity for BMP-only text", () => {
    const text = "rottura capsulare";
    for (const i of [0, 1, 8, text.length]) {
      expect(scalarToUtf16(text, i)).toBe(i);
      expect(utf16ToScalar(text, i)).toBe(i);
    }
  });

  it("count astral characters as one scalar, two units", () => {
    expect(scalarToUtf16(ASTRAL, 0)).toBe(0);
    expect(scalarToUtf16(ASTRAL, 1)).toBe(1);
    expect(scalarToUtf16(ASTRAL, 2)).toBe(3);
    expect(scalarToUtf16(ASTRAL, 3)).toBe(4);
    expect(utf16ToScalar(ASTRAL, 3)).toBe(2);
    expect(utf16ToScalar(ASTRAL, 4)).toBe(3);
  });

  it("round trip on every boundary", () => {
    const text = "x𝜇y𝜅𝜆 z";
    const scalars = [...text].length;
    for (let i = 0; i <= scalars; i++) {
      expect(utf16ToScalar(text, scalarToUtf16(text, i))).toBe(i);
    }
  });

  it("reject indices splitting a surrogate pair", () => {
    expect(() => utf16ToScalar(ASTRAL, 2)).toThrow(/surrogate/);
  });

  it("reject out-of-range offsets", () => {
    expect(() => utf16ToScalar("ab", 5)).toThrow(RangeError);
    expect(() => scalarToUtf16("ab", 5)).toThrow(RangeError);
  });

  it("slice by scalar offsets", () => {
    expect(scalarSlice(ASTRAL, 2, 3)).toBe("B");
    expect(scalarSlice("Nota 𝜇: rottura", 8, 15)).toBe("rottura");
  });
});
