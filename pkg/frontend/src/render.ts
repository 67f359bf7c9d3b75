// Scene drawing: directrix polyline, decimated translucent disks, the
// end-effector, objects, and HUD arrows taken verbatim from the snapshot.
// The pure helpers (stride, ring geometry, HUD arrows) are unit-tested.

import type { Camera } from "./camera.js";
import { project } from "./camera.js";
import type { CanalGeometry, Snapshot, Vec3 } from "./protocol.js";

export const MAX_DISKS = 60;
const RING_SEGMENTS = 28;
const ARROW_DRAW_SCALE = 0.25; // display scaling of the unit HUD arrows

export function diskStride(nStates: number): number {
  return Math.max(1, Math.ceil(nStates / MAX_DISKS));
}

export function drawnDiskIndices(nStates: number): number[] {
  const stride = diskStride(nStates);
  const indices: number[] = [];
  for (let s = 0; s < nStates; s += stride) indices.push(s);
  return indices;
}

/** World-space ring of the disk at state s. */
export function diskRing(canal: CanalGeometry, s: number,
                         segments = RING_SEGMENTS): Vec3[] {
  const [cx, cy, cz] = canal.d[s];
  const r = canal.r[s];
  const x = canal.x_axis[s];
  const y = canal.y_axis[s];
  const points: Vec3[] = [];
  for (let k = 0; k <= segments; k++) {
    const a = (2 * Math.PI * k) / segments;
    const c = Math.cos(a) * r;
    const sn = Math.sin(a) * r;
    points.push([
      cx + c * x[0] + sn * y[0],
      cy + c * x[1] + sn * y[1],
      cz + c * x[2] + sn * y[2],
    ]);
  }
  return points;
}

export interface HudArrow {
  label: "x" | "y";
  origin: Vec3;
  dir: Vec3; // unit length, world scale, already sign-corrected
}

/** Arrows for A_x*D_x and A_y*D_y at the snapshot pose; null when the
 *  mapper reported no classification. */
export function hudArrows(snap: Snapshot): HudArrow[] | null {
  if (snap.disk_class === null || snap.a_x === null || snap.a_y === null ||
      snap.d_x === null || snap.d_y === null) {
    return null;
  }
  const mk = (axis: Vec3, sign: number): Vec3 =>
    [axis[0] * sign, axis[1] * sign, axis[2] * sign];
  return [
    { label: "x", origin: snap.pose, dir: mk(snap.a_x, snap.d_x) },
    { label: "y", origin: snap.pose, dir: mk(snap.a_y, snap.d_y) },
  ];
}

function polyline(ctx: CanvasRenderingContext2D, cam: Camera,
                  points: Vec3[], width: number, height: number): void {
  let pen = false;
  ctx.beginPath();
  for (const p of points) {
    const proj = project(cam, p, width, height);
    if (!proj) {
      pen = false;
      continue;
    }
    if (pen) ctx.lineTo(proj[0], proj[1]);
    else ctx.moveTo(proj[0], proj[1]);
    pen = true;
  }
  ctx.stroke();
}

function marker(ctx: CanvasRenderingContext2D, cam: Camera, p: Vec3,
                width: number, height: number, radius: number, fill: string): void {
  const proj = project(cam, p, width, height);
  if (!proj) return;
  ctx.fillStyle = fill;
  ctx.beginPath();
  ctx.arc(proj[0], proj[1], radius, 0, 2 * Math.PI);
  ctx.fill();
}

export function renderFrame(ctx: CanvasRenderingContext2D, cam: Camera,
                            canal: CanalGeometry | null, snap: Snapshot | null,
                            width: number, height: number): void {
  ctx.clearRect(0, 0, width, height);
  ctx.lineWidth = 1;

  if (canal) {
    ctx.strokeStyle = "rgba(70,130,180,0.30)";
    for (const s of drawnDiskIndices(canal.n_states)) {
      polyline(ctx, cam, diskRing(canal, s), width, height);
    }
    ctx.strokeStyle = "#c2185b";
    ctx.lineWidth = 2;
    polyline(ctx, cam, canal.d, width, height);
    ctx.lineWidth = 1;
  }

  if (snap) {
    for (const obj of snap.objects) {
      marker(ctx, cam, obj.p, width, height, 5,
             obj.state === "placed" ? "#2e7d32" :
             obj.state === "grasped" ? "#ef6c00" : "#f9a825");
    }
    marker(ctx, cam, snap.pose, width, height, 6, "#1565c0");

    const arrows = hudArrows(snap);
    if (arrows) {
      for (const arrow of arrows) {
        const tip: Vec3 = [
          arrow.origin[0] + arrow.dir[0] * ARROW_DRAW_SCALE,
          arrow.origin[1] + arrow.dir[1] * ARROW_DRAW_SCALE,
          arrow.origin[2] + arrow.dir[2] * ARROW_DRAW_SCALE,
        ];
        ctx.strokeStyle = arrow.label === "x" ? "#d32f2f" : "#388e3c";
        ctx.lineWidth = 2;
        polyline(ctx, cam, [arrow.origin, tip], width, height);
        marker(ctx, cam, tip, width, height, 3,
               arrow.label === "x" ? "#d32f2f" : "#388e3c");
      }
      ctx.lineWidth = 1;
    }
  }
}
