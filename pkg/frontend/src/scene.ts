/**
 * Backend-neutral scene model: figures are built once as primitive lists
 * and serialized by either the SVG writer or the raster/PNG painter, which
 * keeps the two formats in visual lockstep and the output deterministic.
 */

export interface Polyline {
  kind: "polyline";
  points: [number, number][];
  color: string;
  width: number;
  dash?: number[];
}

export interface Circle {
  kind: "circle";
  x: number;
  y: number;
  r: number;
  color: string;
  fill: boolean;
}

export interface Rect {
  kind: "rect";
  x: number;
  y: number;
  w: number;
  h: number;
  color: string;
  fill: boolean;
}

export interface Text {
  kind: "text";
  x: number;
  y: number;
  text: string;
  size: number;
  color: string;
  anchor: "start" | "middle" | "end";
}

export type Primitive = Polyline | Circle | Rect | Text;

export interface Scene {
  width: number;
  height: number;
  background: string;
  primitives: Primitive[];
}

export const PALETTE = [
  "#1f6fb2",
  "#d1495b",
  "#3a7d44",
  "#8e5ba6",
  "#c77d2c",
  "#4a4a4a",
  "#17a2a2",
  "#a0a424",
];
