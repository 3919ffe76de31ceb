// Top-down 2D layout overlay. Geometry mapping is a pure function so the
// tests can check it without a canvas; drawing is a thin wrapper. Colors
// follow the service's raster palette: buildings blue, greenspace green.

import {
  isGreenspace,
  programElements,
  programRegion,
  type ProgramJson,
} from "./types";

export const BUILDING_COLOR = "#1f4fd8";
export const GREENSPACE_COLOR = "#2e9e44";
export const BACKGROUND_COLOR = "#ffffff";
export const HIGHLIGHT_COLOR = "#ff8800";

export interface DrawOp {
  elementId: string;
  color: string;
  points: [number, number][]; // pixel coordinates, y down
}

export function layoutDrawOps(
  program: ProgramJson,
  widthPx: number,
  heightPx: number,
): DrawOp[] {
  const region = programRegion(program);
  const scale = Math.min(widthPx / region.width, heightPx / region.height);
  const yMax = region.y_min + region.height;
  return programElements(program).map((el) => ({
    elementId: el.id,
    color: isGreenspace(el) ? GREENSPACE_COLOR : BUILDING_COLOR,
    points: el.polygon.map(([x, y]) => [
      (x - region.x_min) * scale,
      (yMax - y) * scale,
    ]),
  }));
}

export function drawOverlay(
  canvas: HTMLCanvasElement,
  program: ProgramJson,
  selectedId: string | null,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.fillStyle = BACKGROUND_COLOR;
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  for (const op of layoutDrawOps(program, canvas.width, canvas.height)) {
    ctx.beginPath();
    for (const [i, [x, y]] of op.points.entries()) {
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    }
    ctx.closePath();
    ctx.fillStyle = op.color;
    ctx.fill();
    if (op.elementId === selectedId) {
      ctx.lineWidth = 3;
      ctx.strokeStyle = HIGHLIGHT_COLOR;
      ctx.stroke();
    }
  }
}

/** Element under a pixel (topmost wins), for click-to-select. */
export function pickElement(
  program: ProgramJson,
  widthPx: number,
  heightPx: number,
  px: number,
  py: number,
): string | null {
  const ops = layoutDrawOps(program, widthPx, heightPx);
  for (let i = ops.length - 1; i >= 0; i--) {
    if (pointInPolygon(px, py, ops[i].points)) return ops[i].elementId;
  }
  return null;
}

function pointInPolygon(x: number, y: number, points: [number, number][]): boolean {
  let inside = false;
  for (let i = 0, j = points.length - 1; i < points.length; j = i++) {
    const [xi, yi] = points[i];
    const [xj, yj] = points[j];
    if (yi > y !== yj > y && x < ((xj - xi) * (y - yi)) / (yj - yi) + xi) {
      inside = !inside;
    }
  }
  return inside;
}
