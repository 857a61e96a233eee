/**
 * Tiny single-stroke vector font for the raster backend.
 *
 * Glyphs live on a 4-wide, 6-tall grid (y down); each is a list of
 * polylines.  Coverage is exactly the characters the figure builders emit:
 * lowercase letters, digits, and basic punctuation.  Uppercase input is
 * folded to lowercase; unknown characters draw a hollow box, which keeps
 * rendering total without hiding charset drift.
 */

type Stroke = [number, number][];

const G: Record<string, Stroke[]> = {
  "0": [[[0, 1], [0, 5], [1, 6], [3, 6], [4, 5], [4, 1], [3, 0], [1, 0], [0, 1]], [[0, 5], [4, 1]]],
  "1": [[[1, 1], [2, 0], [2, 6]], [[1, 6], [3, 6]]],
  "2": [[[0, 1], [1, 0], [3, 0], [4, 1], [4, 2], [0, 6], [4, 6]]],
  "3": [[[0, 0], [4, 0], [2, 2], [4, 4], [4, 5], [3, 6], [1, 6], [0, 5]]],
  "4": [[[3, 6], [3, 0], [0, 4], [4, 4]]],
  "5": [[[4, 0], [0, 0], [0, 3], [3, 3], [4, 4], [4, 5], [3, 6], [0, 6]]],
  "6": [[[4, 0], [1, 0], [0, 1], [0, 5], [1, 6], [3, 6], [4, 5], [4, 4], [3, 3], [0, 3]]],
  "7": [[[0, 0], [4, 0], [1, 6]]],
  "8": [[[1, 0], [3, 0], [4, 1], [4, 2], [3, 3], [1, 3], [0, 4], [0, 5], [1, 6], [3, 6], [4, 5], [4, 4], [3, 3]], [[1, 3], [0, 2], [0, 1], [1, 0]]],
  "9": [[[0, 6], [3, 6], [4, 5], [4, 1], [3, 0], [1, 0], [0, 1], [0, 2], [1, 3], [4, 3]]],
  a: [[[1, 2], [3, 2], [4, 3], [4, 6]], [[4, 4], [1, 4], [0, 5], [1, 6], [4, 6]]],
  b: [[[0, 0], [0, 6], [3, 6], [4, 5], [4, 3], [3, 2], [0, 2]]],
  c: [[[4, 2], [1, 2], [0, 3], [0, 5], [1, 6], [4, 6]]],
  d: [[[4, 0], [4, 6], [1, 6], [0, 5], [0, 3], [1, 2], [4, 2]]],
  e: [[[0, 4], [4, 4], [4, 3], [3, 2], [1, 2], [0, 3], [0, 5], [1, 6], [4, 6]]],
  f: [[[3, 0], [2, 0], [1, 1], [1, 6]], [[0, 3], [3, 3]]],
  g: [[[4, 2], [1, 2], [0, 3], [0, 5], [1, 6], [4, 6], [4, 7], [3, 8], [1, 8]]],
  h: [[[0, 0], [0, 6]], [[0, 3], [3, 2], [4, 3], [4, 6]]],
  i: [[[2, 2], [2, 6]], [[2, 0], [2, 0.5]]],
  j: [[[3, 2], [3, 7], [2, 8], [1, 8]], [[3, 0], [3, 0.5]]],
  k: [[[0, 0], [0, 6]], [[3, 2], [0, 4], [3, 6]]],
  l: [[[2, 0], [2, 6]]],
  m: [[[0, 6], [0, 2], [1, 2], [2, 3], [3, 2], [4, 2], [4, 6]], [[2, 3], [2, 6]]],
  n: [[[0, 6], [0, 2], [3, 2], [4, 3], [4, 6]]],
  o: [[[1, 2], [3, 2], [4, 3], [4, 5], [3, 6], [1, 6], [0, 5], [0, 3], [1, 2]]],
  p: [[[0, 8], [0, 2], [3, 2], [4, 3], [4, 4], [3, 5], [0, 5]]],
  q: [[[4, 8], [4, 2], [1, 2], [0, 3], [0, 4], [1, 5], [4, 5]]],
  r: [[[0, 6], [0, 2], [2, 2], [3, 3]]],
  s: [[[4, 2], [1, 2], [0, 3], [1, 4], [3, 4], [4, 5], [3, 6], [0, 6]]],
  t: [[[2, 0], [2, 5], [3, 6]], [[1, 2], [3, 2]]],
  u: [[[0, 2], [0, 5], [1, 6], [3, 6], [4, 5], [4, 2]], [[4, 5], [4, 6]]],
  v: [[[0, 2], [2, 6], [4, 2]]],
  w: [[[0, 2], [1, 6], [2, 4], [3, 6], [4, 2]]],
  x: [[[0, 2], [4, 6]], [[4, 2], [0, 6]]],
  y: [[[0, 2], [2, 5]], [[4, 2], [1, 8], [0, 8]]],
  z: [[[0, 2], [4, 2], [0, 6], [4, 6]]],
  ".": [[[2, 5.5], [2, 6]]],
  ",": [[[2, 5.5], [1.5, 7]]],
  "-": [[[1, 4], [3, 4]]],
  "+": [[[2, 2.5], [2, 5.5]], [[0.5, 4], [3.5, 4]]],
  "=": [[[0.5, 3], [3.5, 3]], [[0.5, 5], [3.5, 5]]],
  "_": [[[0, 6.5], [4, 6.5]]],
  "^": [[[1, 1.5], [2, 0.5], [3, 1.5]]],
  "(": [[[3, 0], [2, 1.5], [2, 4.5], [3, 6]]],
  ")": [[[1, 0], [2, 1.5], [2, 4.5], [1, 6]]],
  "/": [[[0, 6], [4, 0]]],
  ":": [[[2, 2.5], [2, 3]], [[2, 5], [2, 5.5]]],
  " ": [],
};

const BOX: Stroke[] = [[[0, 0], [4, 0], [4, 6], [0, 6], [0, 0]]];

export const GLYPH_WIDTH = 6; // grid cells incl. spacing
export const GLYPH_HEIGHT = 8;

export function glyphStrokes(ch: string): Stroke[] {
  const c = ch.toLowerCase();
  if (c in G) return G[c];
  return BOX;
}

/** Approximate rendered width of a string at a given font size. */
export function textWidth(text: string, size: number): number {
  return (text.length * GLYPH_WIDTH * size) / 8;
}
