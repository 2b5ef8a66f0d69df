/**
 * Dual WebGL viewports with one shared orbit camera.
 *
 * Both canvases render with identical camera, framing and light
 * constants; only the mesh buffers and the per-stimulus shading mode
 * differ, so any visible difference between the two panes comes from
 * the stimuli themselves.  Interaction is orbit + dolly only.
 */

import { boundingSphere, framingDistance, vertexNormals, type Vec3 } from "./geometry.js";
import type { ParsedMesh } from "./objparse.js";
import { AMBIENT, FRAGMENT_SHADER, LIGHT_DIRECTION, VERTEX_SHADER } from "./shading.js";
import type { ShadingMode } from "./types.js";

const FOV_Y = Math.PI / 5;
const NEAR = 0.01;
const FAR = 1000;

export interface OrbitState {
  yaw: number;
  pitch: number;
  dolly: number; // multiplier on the framing distance
}

export function defaultOrbit(): OrbitState {
  return { yaw: 0, pitch: 0, dolly: 1 };
}

export function applyDrag(state: OrbitState, dxPixels: number, dyPixels: number): OrbitState {
  const yaw = state.yaw + dxPixels * 0.01;
  const pitch = Math.min(
    Math.PI / 2 - 0.01,
    Math.max(-Math.PI / 2 + 0.01, state.pitch + dyPixels * 0.01),
  );
  return { yaw, pitch, dolly: state.dolly };
}

export function applyWheel(state: OrbitState, deltaY: number): OrbitState {
  const dolly = Math.min(5, Math.max(0.2, state.dolly * Math.exp(deltaY * 0.001)));
  return { yaw: state.yaw, pitch: state.pitch, dolly };
}

function perspective(fovY: number, aspect: number, near: number, far: number): Float32Array {
  const f = 1 / Math.tan(fovY / 2);
  const out = new Float32Array(16);
  out[0] = f / aspect;
  out[5] = f;
  out[10] = (far + near) / (near - far);
  out[11] = -1;
  out[14] = (2 * far * near) / (near - far);
  return out;
}

function orbitModelView(center: Vec3, distance: number, orbit: OrbitState): Float32Array {
  // translate(-center) then rotate yaw/pitch then translate(0,0,-distance)
  const cy = Math.cos(orbit.yaw);
  const sy = Math.sin(orbit.yaw);
  const cp = Math.cos(orbit.pitch);
  const sp = Math.sin(orbit.pitch);
  // rotation rows (pitch about x after yaw about y)
  const r = [
    cy, 0, -sy,
    sy * sp, cp, cy * sp,
    sy * cp, -sp, cy * cp,
  ];
  const out = new Float32Array(16);
  out[0] = r[0];
  out[4] = r[1];
  out[8] = r[2];
  out[1] = r[3];
  out[5] = r[4];
  out[9] = r[5];
  out[2] = r[6];
  out[6] = r[7];
  out[10] = r[8];
  out[12] = -(r[0] * center[0] + r[1] * center[1] + r[2] * center[2]);
  out[13] = -(r[3] * center[0] + r[4] * center[1] + r[5] * center[2]);
  out[14] = -(r[6] * center[0] + r[7] * center[1] + r[8] * center[2]) - distance;
  out[15] = 1;
  return out;
}

function compile(gl: WebGLRenderingContext, type: number, source: string): WebGLShader {
  const shader = gl.createShader(type);
  if (!shader) throw new Error("cannot allocate shader");
  gl.shaderSource(shader, source);
  gl.compileShader(shader);
  if (!gl.getShaderParameter(shader, gl.COMPILE_STATUS)) {
    throw new Error(gl.getShaderInfoLog(shader) ?? "shader compile failed");
  }
  return shader;
}

const WHITE_PIXEL = new Uint8Array([255, 255, 255, 255]);

export class MeshViewport {
  private gl: WebGLRenderingContext;
  private program: WebGLProgram;
  private indexCount = 0;
  private center: Vec3 = [0, 0, 0];
  private frameDistance = 1;
  private shadingMode: ShadingMode = "unlit";
  private textureLoaded = false;

  constructor(private canvas: HTMLCanvasElement) {
    const gl = canvas.getContext("webgl");
    if (!gl) throw new Error("WebGL unavailable");
    this.gl = gl;
    const program = gl.createProgram();
    if (!program) throw new Error("cannot allocate program");
    gl.attachShader(program, compile(gl, gl.VERTEX_SHADER, VERTEX_SHADER));
    gl.attachShader(program, compile(gl, gl.FRAGMENT_SHADER, FRAGMENT_SHADER));
    gl.linkProgram(program);
    if (!gl.getProgramParameter(program, gl.LINK_STATUS)) {
      throw new Error(gl.getProgramInfoLog(program) ?? "link failed");
    }
    this.program = program;
    gl.enable(gl.DEPTH_TEST);
    gl.clearColor(0.13, 0.13, 0.13, 1); // fixed neutral background
    this.bindTexture(null);
  }

  private buffer(name: string, data: Float32Array, size: number): void {
    const gl = this.gl;
    const buf = gl.createBuffer();
    gl.bindBuffer(gl.ARRAY_BUFFER, buf);
    gl.bufferData(gl.ARRAY_BUFFER, data, gl.STATIC_DRAW);
    const loc = gl.getAttribLocation(this.program, name);
    gl.enableVertexAttribArray(loc);
    gl.vertexAttribPointer(loc, size, gl.FLOAT, false, 0, 0);
  }

  setMesh(mesh: ParsedMesh, shading: ShadingMode): void {
    const gl = this.gl;
    gl.useProgram(this.program);
    this.buffer("aPosition", mesh.positions, 3);
    this.buffer("aNormal", vertexNormals(mesh), 3);
    this.buffer("aUv", mesh.uvs, 2);
    const index = gl.createBuffer();
    gl.bindBuffer(gl.ELEMENT_ARRAY_BUFFER, index);
    const needs32 = mesh.positions.length / 3 > 65535;
    gl.bufferData(
      gl.ELEMENT_ARRAY_BUFFER,
      needs32 ? mesh.indices : new Uint16Array(mesh.indices),
      gl.STATIC_DRAW,
    );
    if (needs32 && !gl.getExtension("OES_element_index_uint")) {
      throw new Error("mesh too large for this WebGL context");
    }
    this.indexCount = mesh.indices.length;
    this.use32 = needs32;
    const sphere = boundingSphere(mesh.positions);
    this.center = sphere.center;
    this.frameDistance = framingDistance(sphere, FOV_Y);
    this.shadingMode = shading;
  }

  private use32 = false;

  bindTexture(image: TexImageSource | null): void {
    const gl = this.gl;
    const texture = gl.createTexture();
    gl.bindTexture(gl.TEXTURE_2D, texture);
    if (image === null) {
      gl.texImage2D(gl.TEXTURE_2D, 0, gl.RGBA, 1, 1, 0, gl.RGBA, gl.UNSIGNED_BYTE, WHITE_PIXEL);
    } else {
      gl.texImage2D(gl.TEXTURE_2D, 0, gl.RGBA, gl.RGBA, gl.UNSIGNED_BYTE, image);
      gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MIN_FILTER, gl.LINEAR);
      gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_WRAP_S, gl.CLAMP_TO_EDGE);
      gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_WRAP_T, gl.CLAMP_TO_EDGE);
      this.textureLoaded = true;
    }
  }

  render(orbit: OrbitState): void {
    const gl = this.gl;
    const canvas = this.canvas;
    if (canvas.width !== canvas.clientWidth || canvas.height !== canvas.clientHeight) {
      canvas.width = canvas.clientWidth;
      canvas.height = canvas.clientHeight;
    }
    gl.viewport(0, 0, canvas.width, canvas.height);
    gl.clear(gl.COLOR_BUFFER_BIT | gl.DEPTH_BUFFER_BIT);
    if (this.indexCount === 0) return;
    gl.useProgram(this.program);

    const uniform = (name: string) => gl.getUniformLocation(this.program, name);
    const aspect = canvas.width / Math.max(1, canvas.height);
    const modelView = orbitModelView(this.center, this.frameDistance * orbit.dolly, orbit);
    gl.uniformMatrix4fv(uniform("uProjection"), false, perspective(FOV_Y, aspect, NEAR, FAR));
    gl.uniformMatrix4fv(uniform("uModelView"), false, modelView);
    // the model-view is rigid, so its upper 3x3 is its own normal matrix
    const normalMatrix = new Float32Array([
      modelView[0], modelView[1], modelView[2],
      modelView[4], modelView[5], modelView[6],
      modelView[8], modelView[9], modelView[10],
    ]);
    gl.uniformMatrix3fv(uniform("uNormalMatrix"), false, normalMatrix);
    gl.uniform3fv(uniform("uLightDirection"), LIGHT_DIRECTION);
    gl.uniform1f(uniform("uAmbient"), AMBIENT);
    gl.uniform1i(uniform("uShadingMode"), this.shadingMode === "lambert" ? 1 : 0);
    gl.drawElements(
      gl.TRIANGLES, this.indexCount,
      this.use32 ? gl.UNSIGNED_INT : gl.UNSIGNED_SHORT, 0,
    );
  }
}
