import { describe, expect, it } from "vitest";

import { patternFor, swatchStyle } from "../src/swatch.js";

describe("swatchStyle", () => {
  it("is deterministic for a given digest", () => {
    const digest = "a3f19c04be72";
    expect(swatchStyle(digest)).toEqual(swatchStyle(digest));
    expect(patternFor(digest)).toBe(patternFor(digest));
  });

  it("distinguishes digests that differ in one nibble", () => {
    const a = swatchStyle("a3f19c04be72");
    const b = swatchStyle("b3f19c04be72");
    expect(a.background).not.toBe(b.background);
  });

  it("spreads digests across all patterns", () => {
    const seen = new Set<string>();
    for (let i = 0; i < 64; i++) {
      const digest = i.toString(16).padStart(2, "0").repeat(6);
      seen.add(patternFor(digest));
    }
    expect(seen.size).toBeGreaterThanOrEqual(3);
  });

  it("survives malformed digests", () => {
    expect(swatchStyle("").background).toBeTruthy();
    expect(swatchStyle("zz").background).toBeTruthy();
  });
});
