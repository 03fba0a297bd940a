// three.js realization of the scene-node stream: one Object3D per node,
// a ground grid on z=0, and a z-up orbit camera.

import * as THREE from "three";

import type { StoreDelta } from "./scenestore.js";
import type { RayPayload, WireNode } from "./protocol.js";

const GRID_EXTENT = 12;

function material(color: [number, number, number, number]): THREE.MeshLambertMaterial {
  const mat = new THREE.MeshLambertMaterial({
    color: new THREE.Color(color[0], color[1], color[2]),
  });
  if (color[3] < 0.999) {
    mat.transparent = true;
    mat.opacity = color[3];
  }
  return mat;
}

function labelSprite(text: string, heightMeters: number): THREE.Sprite {
  const canvas = document.createElement("canvas");
  const ctx = canvas.getContext("2d")!;
  const fontPx = 48;
  ctx.font = `${fontPx}px sans-serif`;
  const w = Math.max(2, Math.ceil(ctx.measureText(text).width) + 16);
  canvas.width = w;
  canvas.height = fontPx + 16;
  const ctx2 = canvas.getContext("2d")!;
  ctx2.font = `${fontPx}px sans-serif`;
  ctx2.fillStyle = "rgba(10,10,14,0.55)";
  ctx2.fillRect(0, 0, canvas.width, canvas.height);
  ctx2.fillStyle = "#ffffff";
  ctx2.textBaseline = "middle";
  ctx2.fillText(text, 8, canvas.height / 2);
  const texture = new THREE.CanvasTexture(canvas);
  const sprite = new THREE.Sprite(new THREE.SpriteMaterial({ map: texture, depthTest: false }));
  const h = Math.max(heightMeters, 0.02);
  sprite.scale.set((h * canvas.width) / canvas.height, h, 1);
  return sprite;
}

function meshPlaceholder(name: string, scale: [number, number, number],
                         mat: THREE.Material): THREE.Object3D {
  const group = new THREE.Group();
  const [sx, sy, sz] = scale;
  if (name === "mobile_robot") {
    const base = new THREE.Mesh(new THREE.CylinderGeometry(sx / 2, sx / 2, sz * 0.35, 24), mat);
    base.rotation.x = Math.PI / 2;
    base.position.z = sz * 0.175;
    const mast = new THREE.Mesh(new THREE.BoxGeometry(sx * 0.2, sy * 0.2, sz * 0.6), mat);
    mast.position.z = sz * 0.65;
    group.add(base, mast);
  } else if (name === "gripper") {
    const palm = new THREE.Mesh(new THREE.BoxGeometry(sx * 0.4, sy, sz), mat);
    const left = new THREE.Mesh(new THREE.BoxGeometry(sx * 0.6, sy * 0.25, sz), mat);
    const right = left.clone();
    left.position.set(sx * 0.5, sy * 0.35, 0);
    right.position.set(sx * 0.5, -sy * 0.35, 0);
    group.add(palm, left, right);
  } else {
    const box = new THREE.Mesh(new THREE.BoxGeometry(sx, sy, sz), mat);
    group.add(box);
  }
  const tag = labelSprite(name, 0.05);
  tag.position.z = sz + 0.08;
  group.add(tag);
  return group;
}

function buildObject(node: WireNode): THREE.Object3D {
  const mat = material(node.color);
  const [sx, sy, sz] = node.scale;
  let obj: THREE.Object3D;
  switch (node.primitive) {
    case "segment": {
      const mesh = new THREE.Mesh(new THREE.BoxGeometry(1, 1, 1), mat);
      mesh.scale.set(Math.max(sx, 1e-4), Math.max(sy, 1e-3), Math.max(sz, 1e-3));
      mesh.position.x = sx / 2;
      const group = new THREE.Group();
      group.add(mesh);
      obj = group;
      break;
    }
    case "arrow": {
      const group = new THREE.Group();
      const len = Math.max(sx, 1e-3);
      const thick = Math.max(sy, 0.01);
      const shaftLen = len * 0.8;
      const shaft = new THREE.Mesh(new THREE.BoxGeometry(shaftLen, thick, thick), mat);
      shaft.position.x = shaftLen / 2;
      const head = new THREE.Mesh(new THREE.ConeGeometry(thick * 1.8, len * 0.2, 12), mat);
      head.rotation.z = -Math.PI / 2;
      head.position.x = shaftLen + len * 0.1;
      group.add(shaft, head);
      obj = group;
      break;
    }
    case "cube": {
      const mesh = new THREE.Mesh(new THREE.BoxGeometry(1, 1, 1), mat);
      mesh.scale.set(sx, sy, sz);
      obj = mesh;
      break;
    }
    case "sphere": {
      const mesh = new THREE.Mesh(new THREE.SphereGeometry(0.5, 20, 14), mat);
      mesh.scale.set(sx, sy, sz);
      obj = mesh;
      break;
    }
    case "cylinder": {
      // Local cylinder axis is y; rotate so the node's z is the height axis.
      const mesh = new THREE.Mesh(new THREE.CylinderGeometry(0.5, 0.5, 1, 20), mat);
      mesh.rotation.x = Math.PI / 2;
      mesh.scale.set(sx, sz, sy);
      obj = mesh;
      break;
    }
    case "label":
      obj = labelSprite(node.text, sz);
      break;
    case "mesh":
      obj = meshPlaceholder(node.text, node.scale, mat);
      break;
  }
  obj.position.set(node.pose.t[0], node.pose.t[1], node.pose.t[2]);
  obj.quaternion.set(node.pose.q[0], node.pose.q[1], node.pose.q[2], node.pose.q[3]);
  obj.visible = node.visible;
  return obj;
}

class OrbitControls {
  theta = -Math.PI / 4;
  phi = Math.PI / 4.5;
  radius = 9;
  target = new THREE.Vector3(0, 0, 0.4);
  private dragging = false;
  private panning = false;
  private lastX = 0;
  private lastY = 0;

  constructor(private readonly camera: THREE.PerspectiveCamera, el: HTMLElement) {
    el.addEventListener("pointerdown", (ev) => {
      if (ev.button === 0 && !ev.shiftKey) this.dragging = true;
      if (ev.button === 2 || (ev.button === 0 && ev.shiftKey)) this.panning = true;
      this.lastX = ev.clientX;
      this.lastY = ev.clientY;
    });
    window.addEventListener("pointerup", () => {
      this.dragging = this.panning = false;
    });
    window.addEventListener("pointermove", (ev) => {
      const dx = ev.clientX - this.lastX;
      const dy = ev.clientY - this.lastY;
      if (this.dragging) {
        this.theta -= dx * 0.007;
        this.phi = Math.min(Math.max(this.phi - dy * 0.007, 0.05), Math.PI / 2 - 0.02);
      } else if (this.panning) {
        const right = new THREE.Vector3(Math.sin(this.theta), -Math.cos(this.theta), 0);
        const fwd = new THREE.Vector3(Math.cos(this.theta), Math.sin(this.theta), 0);
        const k = this.radius * 0.0015;
        this.target.addScaledVector(right, -dx * k);
        this.target.addScaledVector(fwd, dy * k);
      } else {
        return;
      }
      this.lastX = ev.clientX;
      this.lastY = ev.clientY;
      this.update();
    });
    el.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      this.radius = Math.min(Math.max(this.radius * (1 + ev.deltaY * 0.001), 1.5), 60);
      this.update();
    }, { passive: false });
    el.addEventListener("contextmenu", (ev) => ev.preventDefault());
    this.update();
  }

  update(): void {
    const sp = Math.sin(this.phi);
    this.camera.position.set(
      this.target.x + this.radius * sp * Math.cos(this.theta),
      this.target.y + this.radius * sp * Math.sin(this.theta),
      this.target.z + this.radius * Math.cos(this.phi),
    );
    this.camera.up.set(0, 0, 1);
    this.camera.lookAt(this.target);
  }
}

export class Viewer {
  readonly scene = new THREE.Scene();
  readonly camera: THREE.PerspectiveCamera;
  private readonly renderer: THREE.WebGLRenderer;
  private readonly objects = new Map<string, THREE.Object3D>();
  private readonly raycaster = new THREE.Raycaster();

  constructor(private readonly canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.camera = new THREE.PerspectiveCamera(55, 1, 0.05, 200);
    new OrbitControls(this.camera, canvas);
    this.scene.background = new THREE.Color(0x0d1016);
    const hemi = new THREE.HemisphereLight(0xffffff, 0x303540, 1.1);
    hemi.position.set(0, 0, 1);
    const sun = new THREE.DirectionalLight(0xffffff, 1.2);
    sun.position.set(3, 2, 6);
    this.scene.add(hemi, sun);
    const grid = new THREE.GridHelper(GRID_EXTENT * 2, GRID_EXTENT * 2, 0x33415c, 0x1d2535);
    grid.rotation.x = Math.PI / 2; // GridHelper lies in xz; our ground is xy
    this.scene.add(grid);
    const axes = new THREE.AxesHelper(0.5);
    this.scene.add(axes);
    this.resize();
    window.addEventListener("resize", () => this.resize());
    const loop = () => {
      this.renderer.render(this.scene, this.camera);
      requestAnimationFrame(loop);
    };
    requestAnimationFrame(loop);
  }

  private resize(): void {
    const w = this.canvas.clientWidth || this.canvas.parentElement?.clientWidth || 800;
    const h = this.canvas.clientHeight || this.canvas.parentElement?.clientHeight || 600;
    this.renderer.setSize(w, h, false);
    this.camera.aspect = w / h;
    this.camera.updateProjectionMatrix();
  }

  applyDelta(delta: StoreDelta): void {
    if (delta.reset) {
      for (const obj of this.objects.values()) this.scene.remove(obj);
      this.objects.clear();
    }
    for (const id of delta.deleted) {
      const obj = this.objects.get(id);
      if (obj) {
        this.scene.remove(obj);
        this.objects.delete(id);
      }
    }
    for (const node of delta.upserted) {
      const old = this.objects.get(node.id);
      if (old) this.scene.remove(old);
      const obj = buildObject(node);
      this.objects.set(node.id, obj);
      this.scene.add(obj);
    }
  }

  objectCount(): number {
    return this.objects.size;
  }

  /** World-frame ray under the given client coordinates. */
  rayAt(clientX: number, clientY: number): RayPayload {
    const rect = this.canvas.getBoundingClientRect();
    const ndc = new THREE.Vector2(
      ((clientX - rect.left) / rect.width) * 2 - 1,
      -((clientY - rect.top) / rect.height) * 2 + 1,
    );
    this.raycaster.setFromCamera(ndc, this.camera);
    const o = this.raycaster.ray.origin;
    const d = this.raycaster.ray.direction;
    return { origin: [o.x, o.y, o.z], direction: [d.x, d.y, d.z] };
  }
}
