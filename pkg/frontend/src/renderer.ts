/** Point-cloud rendering: a pure color-buffer builder plus a thin WebGL
 * wrapper. Only the wrapper touches the GPU, so everything above it can
 * run under node.
 */

import type { Mat4 } from "./picking.js";

export const BASE_COLOR: [number, number, number] = [0.42, 0.56, 0.72];
export const MASK_COLOR: [number, number, number] = [0.95, 0.45, 0.12];
export const ANCHOR_COLOR: [number, number, number] = [0.15, 0.9, 0.35];

/** Per-point RGB for the preview: base everywhere, warm where the synth
 * mask is set, anchor green on picked rows (anchors win over mask). */
export function buildColorBuffer(
  count: number,
  mask: ArrayLike<number> | null,
  anchorRows: Iterable<number>,
): Float32Array {
  const out = new Float32Array(count * 3);
  for (let i = 0; i < count; i++) {
    const masked = mask !== null && i < mask.length && mask[i] !== 0;
    const c = masked ? MASK_COLOR : BASE_COLOR;
    out[i * 3] = c[0];
    out[i * 3 + 1] = c[1];
    out[i * 3 + 2] = c[2];
  }
  for (const row of anchorRows) {
    if (row < 0 || row >= count) continue;
    out[row * 3] = ANCHOR_COLOR[0];
    out[row * 3 + 1] = ANCHOR_COLOR[1];
    out[row * 3 + 2] = ANCHOR_COLOR[2];
  }
  return out;
}

/** Flatten the service's list-of-triples into a GL-ready buffer. */
export function flattenPositions(positions: number[][]): Float32Array {
  const out = new Float32Array(positions.length * 3);
  for (let i = 0; i < positions.length; i++) {
    out[i * 3] = positions[i][0];
    out[i * 3 + 1] = positions[i][1];
    out[i * 3 + 2] = positions[i][2];
  }
  return out;
}

const VERT = `
attribute vec3 aPos;
attribute vec3 aColor;
uniform mat4 uMvp;
uniform float uSize;
varying vec3 vColor;
void main() {
  gl_Position = uMvp * vec4(aPos, 1.0);
  gl_PointSize = uSize;
  vColor = aColor;
}
`;

const FRAG = `
precision mediump float;
varying vec3 vColor;
void main() {
  vec2 d = gl_PointCoord - vec2(0.5);
  if (dot(d, d) > 0.25) discard;
  gl_FragColor = vec4(vColor, 1.0);
}
`;

export class PointRenderer {
  private gl: WebGLRenderingContext;
  private program: WebGLProgram;
  private posBuf: WebGLBuffer;
  private colBuf: WebGLBuffer;
  private uMvp: WebGLUniformLocation;
  private uSize: WebGLUniformLocation;
  private aPos: number;
  private aColor: number;
  private count = 0;

  constructor(canvas: HTMLCanvasElement) {
    const gl = canvas.getContext("webgl");
    if (!gl) throw new Error("WebGL unavailable");
    this.gl = gl;
    this.program = this.link(VERT, FRAG);
    this.posBuf = this.mustBuffer();
    this.colBuf = this.mustBuffer();
    this.aPos = gl.getAttribLocation(this.program, "aPos");
    this.aColor = gl.getAttribLocation(this.program, "aColor");
    this.uMvp = this.mustUniform("uMvp");
    this.uSize = this.mustUniform("uSize");
    gl.enable(gl.DEPTH_TEST);
    gl.clearColor(0.08, 0.09, 0.11, 1.0);
  }

  private mustBuffer(): WebGLBuffer {
    const b = this.gl.createBuffer();
    if (!b) throw new Error("buffer allocation failed");
    return b;
  }

  private mustUniform(name: string): WebGLUniformLocation {
    const u = this.gl.getUniformLocation(this.program, name);
    if (!u) throw new Error(`uniform ${name} missing`);
    return u;
  }

  private link(vsrc: string, fsrc: string): WebGLProgram {
    const gl = this.gl;
    const compile = (kind: number, src: string): WebGLShader => {
      const sh = gl.createShader(kind);
      if (!sh) throw new Error("shader allocation failed");
      gl.shaderSource(sh, src);
      gl.compileShader(sh);
      if (!gl.getShaderParameter(sh, gl.COMPILE_STATUS)) {
        throw new Error(String(gl.getShaderInfoLog(sh)));
      }
      return sh;
    };
    const prog = gl.createProgram();
    if (!prog) throw new Error("program allocation failed");
    gl.attachShader(prog, compile(gl.VERTEX_SHADER, VERT === vsrc ? VERT : vsrc));
    gl.attachShader(prog, compile(gl.FRAGMENT_SHADER, fsrc));
    gl.linkProgram(prog);
    if (!gl.getProgramParameter(prog, gl.LINK_STATUS)) {
      throw new Error(String(gl.getProgramInfoLog(prog)));
    }
    return prog;
  }

  setPositions(flat: Float32Array): void {
    const gl = this.gl;
    gl.bindBuffer(gl.ARRAY_BUFFER, this.posBuf);
    gl.bufferData(gl.ARRAY_BUFFER, flat, gl.STATIC_DRAW);
    this.count = flat.length / 3;
  }

  setColors(flat: Float32Array): void {
    const gl = this.gl;
    gl.bindBuffer(gl.ARRAY_BUFFER, this.colBuf);
    gl.bufferData(gl.ARRAY_BUFFER, flat, gl.DYNAMIC_DRAW);
  }

  draw(mvp: Mat4, pointSize: number): void {
    const gl = this.gl;
    gl.viewport(0, 0, gl.drawingBufferWidth, gl.drawingBufferHeight);
    gl.clear(gl.COLOR_BUFFER_BIT | gl.DEPTH_BUFFER_BIT);
    if (this.count === 0) return;
    gl.useProgram(this.program);
    gl.uniformMatrix4fv(this.uMvp, false, mvp);
    gl.uniform1f(this.uSize, pointSize);
    gl.bindBuffer(gl.ARRAY_BUFFER, this.posBuf);
    gl.enableVertexAttribArray(this.aPos);
    gl.vertexAttribPointer(this.aPos, 3, gl.FLOAT, false, 0, 0);
    gl.bindBuffer(gl.ARRAY_BUFFER, this.colBuf);
    gl.enableVertexAttribArray(this.aColor);
    gl.vertexAttribPointer(this.aColor, 3, gl.FLOAT, false, 0, 0);
    gl.drawArrays(gl.POINTS, 0, this.count);
  }
}
