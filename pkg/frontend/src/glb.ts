// Minimal binary glTF reader for the scenes the service exports: one root
// node carrying a rotation, flat children with a mesh and an optional
// translation, float32 positions and uint32/uint16 indices. Shared by the
// viewer and the tests so both measure the same geometry.

const GLB_MAGIC = 0x46546c67;
const CHUNK_JSON = 0x4e4f534a;
const CHUNK_BIN = 0x004e4942;

export interface GlbPrimitive {
  indices: Uint32Array;
  materialIndex: number;
}

export interface GlbNode {
  name: string;
  translation: [number, number, number];
  positions: Float32Array; // interleaved xyz, shared by all primitives
  primitives: GlbPrimitive[];
}

export interface GlbMaterial {
  name: string;
  baseColor: [number, number, number, number];
}

export interface GlbScene {
  nodes: Map<string, GlbNode>;
  materials: GlbMaterial[];
  rootRotation: [number, number, number, number]; // quaternion xyzw
  metadata: Record<string, unknown>;
}

interface Aabb {
  min: [number, number, number];
  max: [number, number, number];
}

export function parseGlb(buffer: ArrayBuffer): GlbScene {
  const view = new DataView(buffer);
  if (view.getUint32(0, true) !== GLB_MAGIC || view.getUint32(4, true) !== 2) {
    throw new Error("not a glTF 2.0 binary");
  }
  let offset = 12;
  let doc: any = null;
  let bin: ArrayBuffer | null = null;
  while (offset < buffer.byteLength) {
    const length = view.getUint32(offset, true);
    const type = view.getUint32(offset + 4, true);
    const chunk = buffer.slice(offset + 8, offset + 8 + length);
    offset += 8 + length;
    if (type === CHUNK_JSON) {
      doc = JSON.parse(new TextDecoder().decode(chunk));
    } else if (type === CHUNK_BIN) {
      bin = chunk;
    }
  }
  if (!doc || !bin) throw new Error("glb missing JSON or BIN chunk");
  const binBuffer = bin;

  function accessorArray(index: number): Float32Array | Uint32Array | Uint16Array {
    const accessor = doc.accessors[index];
    const bufferView = doc.bufferViews[accessor.bufferView];
    const start = (bufferView.byteOffset ?? 0) + (accessor.byteOffset ?? 0);
    const per = accessor.type === "VEC3" ? 3 : 1;
    const count = accessor.count * per;
    switch (accessor.componentType) {
      case 5126:
        return new Float32Array(binBuffer, start, count);
      case 5125:
        return new Uint32Array(binBuffer, start, count);
      case 5123:
        return new Uint16Array(binBuffer, start, count);
      default:
        throw new Error(`unsupported componentType ${accessor.componentType}`);
    }
  }

  const materials: GlbMaterial[] = (doc.materials ?? []).map((m: any, i: number) => ({
    name: m.name ?? `material_${i}`,
    baseColor: m.pbrMetallicRoughness?.baseColorFactor ?? [1, 1, 1, 1],
  }));

  const nodes = new Map<string, GlbNode>();
  let rootRotation: [number, number, number, number] = [0, 0, 0, 1];
  for (const node of doc.nodes ?? []) {
    if (node.mesh === undefined) {
      if (node.rotation) rootRotation = node.rotation;
      continue;
    }
    const meshDoc = doc.meshes[node.mesh];
    let positions: Float32Array = new Float32Array(0);
    const primitives: GlbPrimitive[] = [];
    for (const prim of meshDoc.primitives) {
      positions = accessorArray(prim.attributes.POSITION) as Float32Array;
      const raw = accessorArray(prim.indices);
      const indices =
        raw instanceof Uint32Array ? raw : Uint32Array.from(raw as Uint16Array);
      primitives.push({ indices, materialIndex: prim.material ?? 0 });
    }
    nodes.set(node.name, {
      name: node.name,
      translation: node.translation ?? [0, 0, 0],
      positions,
      primitives,
    });
  }
  return {
    nodes,
    materials,
    rootRotation,
    metadata: doc.extras?.metadata ?? {},
  };
}

function rotateByQuaternion(
  q: [number, number, number, number],
  v: [number, number, number],
): [number, number, number] {
  const [qx, qy, qz, qw] = q;
  // v' = v + 2w (q x v) + 2 (q x (q x v))
  const cx = qy * v[2] - qz * v[1];
  const cy = qz * v[0] - qx * v[2];
  const cz = qx * v[1] - qy * v[0];
  const dx = qy * cz - qz * cy;
  const dy = qz * cx - qx * cz;
  const dz = qx * cy - qy * cx;
  return [
    v[0] + 2 * (qw * cx + dx),
    v[1] + 2 * (qw * cy + dy),
    v[2] + 2 * (qw * cz + dz),
  ];
}

/** Node bounds in viewer space (root rotation and node translation applied). */
export function nodeWorldAabb(scene: GlbScene, name: string): Aabb {
  const node = scene.nodes.get(name);
  if (!node) throw new Error(`no node named ${name}`);
  const min: [number, number, number] = [Infinity, Infinity, Infinity];
  const max: [number, number, number] = [-Infinity, -Infinity, -Infinity];
  const p = node.positions;
  for (let i = 0; i < p.length; i += 3) {
    const local: [number, number, number] = [
      p[i] + node.translation[0],
      p[i + 1] + node.translation[1],
      p[i + 2] + node.translation[2],
    ];
    const world = rotateByQuaternion(scene.rootRotation, local);
    for (let axis = 0; axis < 3; axis++) {
      min[axis] = Math.min(min[axis], world[axis]);
      max[axis] = Math.max(max[axis], world[axis]);
    }
  }
  return { min, max };
}

/** Vertical extent of a node in viewer space (y is up after the root rotation). */
export function nodeHeight(scene: GlbScene, name: string): number {
  const box = nodeWorldAabb(scene, name);
  return box.max[1] - box.min[1];
}
