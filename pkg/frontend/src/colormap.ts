/**
 * Colormaps: a blue-white-red diverging map for phase-space densities
 * (always anchored symmetrically about zero) and a perceptual sequential
 * map for fidelity surfaces.
 */

export type Rgb = [number, number, number];

const DIVERGING_STOPS: Rgb[] = [
  [5, 48, 97],
  [33, 102, 172],
  [67, 147, 195],
  [146, 197, 222],
  [209, 229, 240],
  [247, 247, 247],
  [253, 219, 199],
  [244, 165, 130],
  [214, 96, 77],
  [178, 24, 43],
  [103, 0, 31],
];

const SEQUENTIAL_STOPS: Rgb[] = [
  [68, 1, 84],
  [71, 44, 122],
  [59, 81, 139],
  [44, 113, 142],
  [33, 144, 141],
  [39, 173, 129],
  [92, 200, 99],
  [170, 220, 50],
  [253, 231, 37],
];

function interp(stops: Rgb[], t: number): Rgb {
  const x = Math.min(1, Math.max(0, t)) * (stops.length - 1);
  const i = Math.min(stops.length - 2, Math.floor(x));
  const f = x - i;
  return [0, 1, 2].map((k) => Math.round(stops[i][k] * (1 - f) + stops[i + 1][k] * f)) as Rgb;
}

/** Map value in [-limit, +limit] to the diverging map; 0 maps to the center. */
export function diverging(value: number, limit: number): Rgb {
  if (!(limit > 0)) return interp(DIVERGING_STOPS, 0.5);
  return interp(DIVERGING_STOPS, 0.5 + 0.5 * (value / limit));
}

/** Map value in [lo, hi] to the sequential map. */
export function sequential(value: number, lo: number, hi: number): Rgb {
  return interp(SEQUENTIAL_STOPS, hi > lo ? (value - lo) / (hi - lo) : 0.5);
}

/** Symmetric color limit for a matrix: max |value|. */
export function symmetricLimit(values: number[][]): number {
  let m = 0;
  for (const row of values) {
    for (const v of row) m = Math.max(m, Math.abs(v));
  }
  return m;
}

export const LINE_COLORS: Rgb[] = [
  [31, 119, 180],
  [214, 39, 40],
  [44, 160, 44],
  [255, 127, 14],
  [148, 103, 189],
  [23, 190, 207],
];
