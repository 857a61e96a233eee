/** Linear and log axis scales with 1-2-5 tick generation. */

export interface Scale {
  domain: [number, number];
  range: [number, number];
  log: boolean;
  map(x: number): number;
  ticks(): number[];
}

function niceTicks(lo: number, hi: number, target = 6): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = Math.pow(10, Math.floor(Math.log10(span / target)));
  let step = step0;
  for (const m of [1, 2, 5, 10]) {
    if (span / (step0 * m) <= target) {
      step = step0 * m;
      break;
    }
  }
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += step) {
    out.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return out;
}

function logTicks(lo: number, hi: number): number[] {
  const out: number[] = [];
  const e0 = Math.ceil(Math.log10(lo) - 1e-9);
  const e1 = Math.floor(Math.log10(hi) + 1e-9);
  // decimal parse gives the closest double to the printed power of ten,
  // unlike Math.pow(10, e) which drifts for negative exponents
  for (let e = e0; e <= e1; e++) out.push(Number(`1e${e}`));
  if (out.length === 0) out.push(lo, hi);
  return out;
}

export function makeScale(
  domain: [number, number],
  range: [number, number],
  log: boolean
): Scale {
  let [lo, hi] = domain;
  if (log && !(lo > 0 && hi > 0)) {
    throw new Error(`log scale needs a positive domain, got [${lo}, ${hi}]`);
  }
  if (lo === hi) {
    // degenerate data (e.g. an identically zero gap series): widen around it
    if (log) {
      lo /= 10;
      hi *= 10;
    } else {
      lo -= 1;
      hi += 1;
    }
  }
  const [r0, r1] = range;
  const t0 = log ? Math.log10(lo) : lo;
  const t1 = log ? Math.log10(hi) : hi;
  return {
    domain: [lo, hi],
    range,
    log,
    map(x: number): number {
      const t = log ? Math.log10(x) : x;
      return r0 + ((t - t0) / (t1 - t0)) * (r1 - r0);
    },
    ticks(): number[] {
      return log ? logTicks(lo, hi) : niceTicks(lo, hi);
    },
  };
}

export function formatTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    return v.toExponential(0).replace("+", "");
  }
  const s = v.toPrecision(4);
  return s.includes(".") ? s.replace(/\.?0+$/, "") : s;
}

export function dataExtent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (!Number.isFinite(v)) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo === Infinity) return [0, 1];
  return [lo, hi];
}
