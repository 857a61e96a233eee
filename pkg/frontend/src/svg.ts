/** Scene -> SVG string.  Fixed precision and attribute order keep the
 * output byte-stable for identical inputs. */

import { Scene, Primitive } from "./scene.js";

function fmt(x: number): string {
  const r = Math.round(x * 100) / 100;
  return Object.is(r, -0) ? "0" : String(r);
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function emit(p: Primitive): string {
  switch (p.kind) {
    case "polyline": {
      const pts = p.points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
      const dash = p.dash ? ` stroke-dasharray="${p.dash.join(" ")}"` : "";
      return (
        `<polyline points="${pts}" fill="none" stroke="${p.color}"` +
        ` stroke-width="${fmt(p.width)}"${dash}/>`
      );
    }
    case "circle":
      return (
        `<circle cx="${fmt(p.x)}" cy="${fmt(p.y)}" r="${fmt(p.r)}"` +
        (p.fill
          ? ` fill="${p.color}" stroke="none"/>`
          : ` fill="none" stroke="${p.color}" stroke-width="1"/>`)
      );
    case "rect":
      return (
        `<rect x="${fmt(p.x)}" y="${fmt(p.y)}" width="${fmt(p.w)}" height="${fmt(p.h)}"` +
        (p.fill
          ? ` fill="${p.color}" stroke="none"/>`
          : ` fill="none" stroke="${p.color}" stroke-width="1"/>`)
      );
    case "text": {
      const anchor =
        p.anchor === "start" ? "start" : p.anchor === "end" ? "end" : "middle";
      return (
        `<text x="${fmt(p.x)}" y="${fmt(p.y)}" font-family="monospace"` +
        ` font-size="${fmt(p.size)}" fill="${p.color}" text-anchor="${anchor}">` +
        `${esc(p.text)}</text>`
      );
    }
  }
}

export function sceneToSvg(scene: Scene): string {
  const head =
    `<svg xmlns="http://www.w3.org/2000/svg" width="${scene.width}"` +
    ` height="${scene.height}" viewBox="0 0 ${scene.width} ${scene.height}">`;
  const bg = `<rect x="0" y="0" width="${scene.width}" height="${scene.height}" fill="${scene.background}" stroke="none"/>`;
  const body = scene.primitives.map(emit).join("\n");
  return `${head}\n${bg}\n${body}\n</svg>\n`;
}
