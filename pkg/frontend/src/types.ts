// Payload shapes of the session service.

export interface ElementJson {
  id: string;
  type: string;
  polygon: [number, number][];
  floor_count?: number;
  facade?: string;
}

export interface RegionJson {
  x_min: number;
  y_min: number;
  width: number;
  height: number;
}

// The service serializes a program either as a bare element array or as a
// wrapper carrying description/region.
export type ProgramJson =
  | ElementJson[]
  | { description?: string; region?: RegionJson; elements: ElementJson[] };

export interface ComponentJson {
  type: string;
  description: string;
}

export type BuildingProgramJson =
  | ComponentJson[]
  | { facade?: string; components: ComponentJson[] };

export interface SessionPayload {
  session_id: string;
  revision: number;
  program: ProgramJson;
  buildings: Record<string, BuildingProgramJson>;
  diff?: unknown;
  warnings?: string[];
}

export interface ScoreJson {
  s_align: number;
  s_plau: number;
  s_overlap: number;
  s_density: number;
  s_spatial: number;
  semantic_source: string;
  revision?: number;
}

export interface DiffEntryJson {
  path: string;
  before: unknown;
  after: unknown;
}

export function programElements(program: ProgramJson): ElementJson[] {
  return Array.isArray(program) ? program : program.elements;
}

export function programRegion(program: ProgramJson): RegionJson {
  if (!Array.isArray(program) && program.region) return program.region;
  // Mirror the service's inference: tight bounds snapped out to 10 m.
  const elements = programElements(program);
  if (elements.length === 0) return { x_min: 0, y_min: 0, width: 10, height: 10 };
  let xMin = Infinity, yMin = Infinity, xMax = -Infinity, yMax = -Infinity;
  for (const el of elements) {
    for (const [x, y] of el.polygon) {
      xMin = Math.min(xMin, x);
      yMin = Math.min(yMin, y);
      xMax = Math.max(xMax, x);
      yMax = Math.max(yMax, y);
    }
  }
  const snapDown = (v: number) => Math.floor(v / 10) * 10;
  const snapUp = (v: number) => Math.ceil(v / 10) * 10;
  const x0 = snapDown(xMin);
  const y0 = snapDown(yMin);
  return {
    x_min: x0,
    y_min: y0,
    width: Math.max(snapUp(xMax) - x0, 10),
    height: Math.max(snapUp(yMax) - y0, 10),
  };
}

export function isGreenspace(el: ElementJson): boolean {
  return el.type === "greenspace";
}
