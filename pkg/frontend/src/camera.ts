// Minimal orbit camera with perspective projection onto a 2D canvas.
// Pure math; pointer wiring lives in main.ts and never produces robot input.

import type { Vec3 } from "./protocol.js";

export interface Camera {
  target: Vec3;
  yaw: number;      // radians about world z
  pitch: number;    // radians above the horizon
  distance: number; // meters from target
  fov: number;      // vertical field of view, radians
}

export function defaultCamera(target: Vec3 = [0.5, 0, 0.2]): Camera {
  return { target, yaw: -2.2, pitch: 0.45, distance: 2.2, fov: 0.9 };
}

export function cameraPosition(cam: Camera): Vec3 {
  const ch = Math.cos(cam.pitch);
  return [
    cam.target[0] + cam.distance * ch * Math.cos(cam.yaw),
    cam.target[1] + cam.distance * ch * Math.sin(cam.yaw),
    cam.target[2] + cam.distance * Math.sin(cam.pitch),
  ];
}

function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

function normalize(a: Vec3): Vec3 {
  const n = Math.hypot(a[0], a[1], a[2]) || 1;
  return [a[0] / n, a[1] / n, a[2] / n];
}

/** World point -> [canvas x, canvas y, depth]; null when behind the camera. */
export function project(
  cam: Camera, p: Vec3, width: number, height: number,
): [number, number, number] | null {
  const eye = cameraPosition(cam);
  const forward = normalize(sub(cam.target, eye));
  const right = normalize(cross(forward, [0, 0, 1]));
  const up = cross(right, forward);

  const rel = sub(p, eye);
  const depth = dot(rel, forward);
  if (depth < 1e-3) return null;
  const fscale = height / (2 * Math.tan(cam.fov / 2));
  const x = width / 2 + (dot(rel, right) / depth) * fscale;
  const y = height / 2 - (dot(rel, up) / depth) * fscale;
  return [x, y, depth];
}

export function orbit(cam: Camera, dYaw: number, dPitch: number): void {
  cam.yaw += dYaw;
  cam.pitch = Math.min(1.45, Math.max(-1.45, cam.pitch + dPitch));
}

export function zoom(cam: Camera, factor: number): void {
  cam.distance = Math.min(20, Math.max(0.2, cam.distance * factor));
}
