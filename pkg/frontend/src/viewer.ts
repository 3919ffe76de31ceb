// three.js viewport building meshes straight from the parsed glb, so the
// viewer shows exactly the bytes the tests measure. Click to select an
// element; the selected node glows.

import * as THREE from "three";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";
import type { GlbScene } from "./glb";

export class SceneViewer {
  private renderer: THREE.WebGLRenderer;
  private scene: THREE.Scene;
  private camera: THREE.PerspectiveCamera;
  private controls: OrbitControls;
  private cityGroup: THREE.Group | null = null;
  private raycaster = new THREE.Raycaster();
  private selected: string | null = null;
  onSelect: ((elementId: string | null) => void) | null = null;

  constructor(private canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.renderer.setPixelRatio(window.devicePixelRatio);
    this.scene = new THREE.Scene();
    this.scene.background = new THREE.Color(0x10141c);
    this.camera = new THREE.PerspectiveCamera(50, 1, 0.1, 5000);
    this.camera.position.set(90, 110, 150);
    this.controls = new OrbitControls(this.camera, canvas);
    this.controls.target.set(40, 0, -40);

    const sun = new THREE.DirectionalLight(0xffffff, 2.2);
    sun.position.set(120, 200, 80);
    this.scene.add(sun);
    this.scene.add(new THREE.AmbientLight(0xaab4cc, 0.9));

    canvas.addEventListener("click", (event) => this.handleClick(event));
    const animate = () => {
      requestAnimationFrame(animate);
      this.resize();
      this.controls.update();
      this.renderer.render(this.scene, this.camera);
    };
    animate();
  }

  private resize(): void {
    const w = this.canvas.clientWidth;
    const h = this.canvas.clientHeight;
    if (this.canvas.width !== w || this.canvas.height !== h) {
      this.renderer.setSize(w, h, false);
      this.camera.aspect = w / Math.max(h, 1);
      this.camera.updateProjectionMatrix();
    }
  }

  setScene(glb: GlbScene): void {
    if (this.cityGroup) this.scene.remove(this.cityGroup);
    const group = new THREE.Group();
    group.quaternion.set(...glb.rootRotation);
    for (const node of glb.nodes.values()) {
      const holder = new THREE.Group();
      holder.position.set(...node.translation);
      holder.name = node.name;
      for (const prim of node.primitives) {
        const geometry = new THREE.BufferGeometry();
        geometry.setAttribute(
          "position",
          new THREE.BufferAttribute(node.positions.slice(), 3),
        );
        geometry.setIndex(new THREE.BufferAttribute(prim.indices.slice(), 1));
        geometry.computeVertexNormals();
        const base = glb.materials[prim.materialIndex]?.baseColor ?? [0.8, 0.8, 0.8, 1];
        const material = new THREE.MeshLambertMaterial({
          color: new THREE.Color(base[0], base[1], base[2]),
        });
        const mesh = new THREE.Mesh(geometry, material);
        mesh.userData.elementId = node.name;
        holder.add(mesh);
      }
      group.add(holder);
    }
    this.cityGroup = group;
    this.scene.add(group);
    this.applyHighlight();
  }

  select(elementId: string | null): void {
    this.selected = elementId;
    this.applyHighlight();
  }

  private applyHighlight(): void {
    if (!this.cityGroup) return;
    for (const holder of this.cityGroup.children) {
      const active = holder.name === this.selected;
      for (const child of holder.children) {
        const mesh = child as THREE.Mesh;
        const material = mesh.material as THREE.MeshLambertMaterial;
        material.emissive.set(active ? 0x995500 : 0x000000);
      }
    }
  }

  private handleClick(event: MouseEvent): void {
    if (!this.cityGroup) return;
    const rect = this.canvas.getBoundingClientRect();
    const pointer = new THREE.Vector2(
      ((event.clientX - rect.left) / rect.width) * 2 - 1,
      -((event.clientY - rect.top) / rect.height) * 2 + 1,
    );
    this.raycaster.setFromCamera(pointer, this.camera);
    const hits = this.raycaster.intersectObjects(this.cityGroup.children, true);
    const id = hits.length
      ? (hits[0].object.userData.elementId as string) ?? null
      : null;
    this.onSelect?.(id);
  }
}
