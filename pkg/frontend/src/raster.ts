/** Scene -> RGBA framebuffer for the PNG backend.
 *
 * Anti-aliased strokes via per-pixel distance coverage; text is drawn with
 * the built-in stroke font (folded to lowercase).  Everything is pure
 * integer/float math on a Uint8Array, so output bytes are deterministic.
 */

import { Scene, Primitive, Polyline } from "./scene.js";
import { glyphStrokes, GLYPH_WIDTH } from "./font.js";

function parseColor(c: string): [number, number, number] {
  if (c.startsWith("#")) {
    const hex = c.slice(1);
    return [
      parseInt(hex.slice(0, 2), 16),
      parseInt(hex.slice(2, 4), 16),
      parseInt(hex.slice(4, 6), 16),
    ];
  }
  if (c === "white") return [255, 255, 255];
  if (c === "black") return [0, 0, 0];
  throw new Error(`unsupported color ${c}`);
}

class Canvas {
  readonly buf: Uint8Array;

  constructor(readonly width: number, readonly height: number, background: string) {
    this.buf = new Uint8Array(width * height * 4);
    const [r, g, b] = parseColor(background);
    for (let i = 0; i < width * height; i++) {
      this.buf[4 * i] = r;
      this.buf[4 * i + 1] = g;
      this.buf[4 * i + 2] = b;
      this.buf[4 * i + 3] = 255;
    }
  }

  blend(x: number, y: number, rgb: [number, number, number], alpha: number) {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height || alpha <= 0) return;
    const i = 4 * (y * this.width + x);
    const a = Math.min(1, alpha);
    this.buf[i] = Math.round(this.buf[i] * (1 - a) + rgb[0] * a);
    this.buf[i + 1] = Math.round(this.buf[i + 1] * (1 - a) + rgb[1] * a);
    this.buf[i + 2] = Math.round(this.buf[i + 2] * (1 - a) + rgb[2] * a);
  }

  segment(x0: number, y0: number, x1: number, y1: number, width: number, rgb: [number, number, number]) {
    const half = width / 2;
    const pad = half + 1;
    const lo = [Math.floor(Math.min(x0, x1) - pad), Math.floor(Math.min(y0, y1) - pad)];
    const hi = [Math.ceil(Math.max(x0, x1) + pad), Math.ceil(Math.max(y0, y1) + pad)];
    const dx = x1 - x0;
    const dy = y1 - y0;
    const len2 = dx * dx + dy * dy;
    for (let y = lo[1]; y <= hi[1]; y++) {
      for (let x = lo[0]; x <= hi[0]; x++) {
        const px = x + 0.5;
        const py = y + 0.5;
        let t = len2 > 0 ? ((px - x0) * dx + (py - y0) * dy) / len2 : 0;
        t = Math.max(0, Math.min(1, t));
        const qx = x0 + t * dx;
        const qy = y0 + t * dy;
        const d = Math.hypot(px - qx, py - qy);
        this.blend(x, y, rgb, half + 0.5 - d);
      }
    }
  }

  disc(cx: number, cy: number, r: number, rgb: [number, number, number], fill: boolean) {
    const pad = r + 1.5;
    for (let y = Math.floor(cy - pad); y <= Math.ceil(cy + pad); y++) {
      for (let x = Math.floor(cx - pad); x <= Math.ceil(cx + pad); x++) {
        const d = Math.hypot(x + 0.5 - cx, y + 0.5 - cy);
        const alpha = fill ? r + 0.5 - d : 1 - Math.abs(d - r);
        this.blend(x, y, rgb, alpha);
      }
    }
  }
}

function drawDashed(cv: Canvas, p: Polyline, rgb: [number, number, number]) {
  const dash = p.dash!;
  let dashIdx = 0;
  let remaining = dash[0];
  let drawing = true;
  for (let s = 0; s + 1 < p.points.length; s++) {
    let [x0, y0] = p.points[s];
    const [x1, y1] = p.points[s + 1];
    let segLen = Math.hypot(x1 - x0, y1 - y0);
    while (segLen > 1e-9) {
      const take = Math.min(segLen, remaining);
      const t = take / segLen;
      const xm = x0 + (x1 - x0) * t;
      const ym = y0 + (y1 - y0) * t;
      if (drawing) cv.segment(x0, y0, xm, ym, p.width, rgb);
      x0 = xm;
      y0 = ym;
      segLen -= take;
      remaining -= take;
      if (remaining <= 1e-9) {
        dashIdx = (dashIdx + 1) % dash.length;
        remaining = dash[dashIdx];
        drawing = !drawing;
      }
    }
  }
}

function drawText(cv: Canvas, x: number, y: number, text: string, size: number, rgb: [number, number, number], anchor: string) {
  const scale = size / 8;
  const advance = GLYPH_WIDTH * scale;
  const total = text.length * advance;
  let cx = anchor === "middle" ? x - total / 2 : anchor === "end" ? x - total : x;
  const baseY = y - 6 * scale; // scene text y is the baseline
  for (const ch of text) {
    for (const stroke of glyphStrokes(ch)) {
      for (let i = 0; i + 1 < stroke.length; i++) {
        cv.segment(
          cx + stroke[i][0] * scale,
          baseY + stroke[i][1] * scale,
          cx + stroke[i + 1][0] * scale,
          baseY + stroke[i + 1][1] * scale,
          Math.max(1, scale),
          rgb
        );
      }
    }
    cx += advance;
  }
}

function draw(cv: Canvas, p: Primitive) {
  switch (p.kind) {
    case "polyline": {
      const rgb = parseColor(p.color);
      if (p.dash) {
        drawDashed(cv, p, rgb);
      } else {
        for (let i = 0; i + 1 < p.points.length; i++) {
          cv.segment(
            p.points[i][0], p.points[i][1],
            p.points[i + 1][0], p.points[i + 1][1],
            p.width, rgb
          );
        }
      }
      break;
    }
    case "circle":
      cv.disc(p.x, p.y, p.r, parseColor(p.color), p.fill);
      break;
    case "rect": {
      const rgb = parseColor(p.color);
      if (p.fill) {
        for (let y = Math.round(p.y); y < Math.round(p.y + p.h); y++) {
          for (let x = Math.round(p.x); x < Math.round(p.x + p.w); x++) {
            cv.blend(x, y, rgb, 1);
          }
        }
      } else {
        cv.segment(p.x, p.y, p.x + p.w, p.y, 1, rgb);
        cv.segment(p.x + p.w, p.y, p.x + p.w, p.y + p.h, 1, rgb);
        cv.segment(p.x + p.w, p.y + p.h, p.x, p.y + p.h, 1, rgb);
        cv.segment(p.x, p.y + p.h, p.x, p.y, 1, rgb);
      }
      break;
    }
    case "text":
      drawText(cv, p.x, p.y, p.text, p.size, parseColor(p.color), p.anchor);
      break;
  }
}

export function sceneToRgba(scene: Scene): Uint8Array {
  const cv = new Canvas(scene.width, scene.height, scene.background);
  for (const p of scene.primitives) draw(cv, p);
  return cv.buf;
}
