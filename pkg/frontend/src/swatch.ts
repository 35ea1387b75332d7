/** Deterministic placeholder art for garments without images.
 *
 * The service ships a short hex digest of each garment's feature vector;
 * this module turns that digest into a stable two-color CSS pattern so
 * distinct garments stay visually distinguishable across reloads.
 */

export interface SwatchStyle {
  background: string;
  label: string;
}

const PATTERNS = ["solid", "stripes", "diagonal", "dots"] as const;
export type PatternName = (typeof PATTERNS)[number];

function slice(digest: string, start: number, width: number): number {
  const part = digest.slice(start, start + width);
  const value = Number.parseInt(part, 16);
  return Number.isNaN(value) ? 0 : value;
}

export function patternFor(digest: string): PatternName {
  return PATTERNS[slice(digest, 8, 2) % PATTERNS.length] ?? "solid";
}

export function swatchStyle(digest: string): SwatchStyle {
  const hueA = slice(digest, 0, 4) % 360;
  const hueB = (hueA + 60 + (slice(digest, 4, 4) % 240)) % 360;
  const colorA = `hsl(${hueA} 55% 55%)`;
  const colorB = `hsl(${hueB} 45% 40%)`;
  const pattern = patternFor(digest);
  switch (pattern) {
    case "stripes":
      return {
        background: `repeating-linear-gradient(90deg, ${colorA} 0 12px, ${colorB} 12px 24px)`,
        label: `stripes ${hueA}/${hueB}`,
      };
    case "diagonal":
      return {
        background: `repeating-linear-gradient(45deg, ${colorA} 0 10px, ${colorB} 10px 20px)`,
        label: `diagonal ${hueA}/${hueB}`,
      };
    case "dots":
      return {
        background: `radial-gradient(${colorB} 20%, transparent 21%) 0 0 / 16px 16px, ${colorA}`,
        label: `dots ${hueA}/${hueB}`,
      };
    default:
      return { background: colorA, label: `solid ${hueA}` };
  }
}
