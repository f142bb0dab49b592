/** Camera math and screen-space anchor picking.
 *
 * All pure: matrices are column-major 4x4 (WebGL layout), screen
 * coordinates are CSS pixels with the origin at the canvas top-left.
 */

export type Mat4 = Float32Array;
export type Vec3 = [number, number, number];

export function perspective(fovyRad: number, aspect: number, near: number, far: number): Mat4 {
  const f = 1 / Math.tan(fovyRad / 2);
  const m = new Float32Array(16);
  m[0] = f / aspect;
  m[5] = f;
  m[10] = (far + near) / (near - far);
  m[11] = -1;
  m[14] = (2 * far * near) / (near - far);
  return m;
}

export function lookAt(eye: Vec3, center: Vec3, up: Vec3): Mat4 {
  const zx = eye[0] - center[0];
  const zy = eye[1] - center[1];
  const zz = eye[2] - center[2];
  let zl = Math.hypot(zx, zy, zz) || 1;
  const z: Vec3 = [zx / zl, zy / zl, zz / zl];
  const x: Vec3 = [
    up[1] * z[2] - up[2] * z[1],
    up[2] * z[0] - up[0] * z[2],
    up[0] * z[1] - up[1] * z[0],
  ];
  const xl = Math.hypot(x[0], x[1], x[2]) || 1;
  x[0] /= xl;
  x[1] /= xl;
  x[2] /= xl;
  const y: Vec3 = [
    z[1] * x[2] - z[2] * x[1],
    z[2] * x[0] - z[0] * x[2],
    z[0] * x[1] - z[1] * x[0],
  ];
  const m = new Float32Array(16);
  m[0] = x[0]; m[4] = x[1]; m[8] = x[2];
  m[1] = y[0]; m[5] = y[1]; m[9] = y[2];
  m[2] = z[0]; m[6] = z[1]; m[10] = z[2];
  m[12] = -(x[0] * eye[0] + x[1] * eye[1] + x[2] * eye[2]);
  m[13] = -(y[0] * eye[0] + y[1] * eye[1] + y[2] * eye[2]);
  m[14] = -(z[0] * eye[0] + z[1] * eye[1] + z[2] * eye[2]);
  m[15] = 1;
  return m;
}

export function multiply(a: Mat4, b: Mat4): Mat4 {
  const out = new Float32Array(16);
  for (let c = 0; c < 4; c++) {
    for (let r = 0; r < 4; r++) {
      let s = 0;
      for (let k = 0; k < 4; k++) s += a[k * 4 + r] * b[c * 4 + k];
      out[c * 4 + r] = s;
    }
  }
  return out;
}

/** Orbit camera around a target; phi clamped off the poles so `up` stays
 * well defined. */
export interface Orbit {
  theta: number;
  phi: number;
  dist: number;
  target: Vec3;
}

export function orbitEye(o: Orbit): Vec3 {
  const cp = Math.cos(o.phi);
  return [
    o.target[0] + o.dist * cp * Math.cos(o.theta),
    o.target[1] + o.dist * Math.sin(o.phi),
    o.target[2] + o.dist * cp * Math.sin(o.theta),
  ];
}

export function rotateOrbit(o: Orbit, dTheta: number, dPhi: number): Orbit {
  const lim = Math.PI / 2 - 0.05;
  return {
    ...o,
    theta: o.theta + dTheta,
    phi: Math.min(lim, Math.max(-lim, o.phi + dPhi)),
  };
}

export function zoomOrbit(o: Orbit, factor: number): Orbit {
  return { ...o, dist: Math.min(50, Math.max(0.2, o.dist * factor)) };
}

export function viewProjection(o: Orbit, width: number, height: number): Mat4 {
  const proj = perspective(Math.PI / 4, width / Math.max(1, height), 0.01, 100);
  const view = lookAt(orbitEye(o), o.target, [0, 1, 0]);
  return multiply(proj, view);
}

export interface ScreenPoint {
  x: number;
  y: number;
  depth: number;
}

/** Project one point to CSS-pixel screen space; null when behind the
 * camera or outside clip. */
export function projectToScreen(
  m: Mat4,
  p: ArrayLike<number>,
  width: number,
  height: number,
): ScreenPoint | null {
  const x = p[0];
  const y = p[1];
  const z = p[2];
  const cx = m[0] * x + m[4] * y + m[8] * z + m[12];
  const cy = m[1] * x + m[5] * y + m[9] * z + m[13];
  const cz = m[2] * x + m[6] * y + m[10] * z + m[14];
  const cw = m[3] * x + m[7] * y + m[11] * z + m[15];
  if (cw <= 1e-9) return null;
  const nx = cx / cw;
  const ny = cy / cw;
  const nz = cz / cw;
  if (nz < -1 || nz > 1) return null;
  return {
    x: (nx * 0.5 + 0.5) * width,
    y: (1 - (ny * 0.5 + 0.5)) * height,
    depth: nz,
  };
}

export interface PickHit {
  /** Row into the preview arrays (positions / source_indices). */
  index: number;
  distPx: number;
}

export const PICK_TOLERANCE_PX = 8;

/** Nearest projected point within the pixel tolerance; ties in screen
 * distance break toward the point closer to the camera. */
export function pickNearest(
  positions: ArrayLike<number>[] | number[][],
  m: Mat4,
  width: number,
  height: number,
  px: number,
  py: number,
  tolPx: number = PICK_TOLERANCE_PX,
): PickHit | null {
  let best: PickHit | null = null;
  let bestDepth = Infinity;
  for (let i = 0; i < positions.length; i++) {
    const sp = projectToScreen(m, positions[i], width, height);
    if (!sp) continue;
    const d = Math.hypot(sp.x - px, sp.y - py);
    if (d > tolPx) continue;
    if (!best || d < best.distPx - 1e-9 || (Math.abs(d - best.distPx) <= 1e-9 && sp.depth < bestDepth)) {
      best = { index: i, distPx: d };
      bestDepth = sp.depth;
    }
  }
  return best;
}
