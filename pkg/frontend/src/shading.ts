/**
 * The two rendering modes of the study, as pure pixel math plus the GLSL
 * that implements the same formulas on the GPU.
 *
 * unlit:   color = texture color, no lighting term at all.
 * lambert: color = texture color * (AMBIENT + (1 - AMBIENT) * max(0, n.l))
 *          with one fixed directional light.
 *
 * The light direction and ambient floor are constants of the apparatus,
 * identical in both viewports and across all sessions (configurable per
 * deployment, never per stimulus).
 */

import { dot, normalize, type Vec3 } from "./geometry.js";

/** Fixed directional light (unit vector), shared by every Lambert render. */
export const LIGHT_DIRECTION: Vec3 = normalize([0.45, 0.75, 0.55]);

/** Small ambient floor so unlit-side silhouettes stay comparable. */
export const AMBIENT = 0.15;

export type Rgb = [number, number, number];

export function shadeUnlit(baseColor: Rgb, _normal: Vec3, _lightDir: Vec3): Rgb {
  // By definition identical pixels regardless of any light parameter.
  return [baseColor[0], baseColor[1], baseColor[2]];
}

export function shadeLambert(baseColor: Rgb, normal: Vec3, lightDir: Vec3): Rgb {
  const n = normalize(normal);
  const lambert = Math.max(0, dot(n, lightDir));
  const intensity = AMBIENT + (1 - AMBIENT) * lambert;
  return [baseColor[0] * intensity, baseColor[1] * intensity, baseColor[2] * intensity];
}

export const VERTEX_SHADER = `
attribute vec3 aPosition;
attribute vec3 aNormal;
attribute vec2 aUv;
uniform mat4 uModelView;
uniform mat4 uProjection;
uniform mat3 uNormalMatrix;
varying vec3 vNormal;
varying vec2 vUv;
void main() {
  vNormal = uNormalMatrix * aNormal;
  vUv = aUv;
  gl_Position = uProjection * uModelView * vec4(aPosition, 1.0);
}
`;

/** uShadingMode: 0 = unlit, 1 = lambert; formulas mirror shadeUnlit/shadeLambert. */
export const FRAGMENT_SHADER = `
precision mediump float;
uniform sampler2D uTexture;
uniform vec3 uLightDirection;
uniform float uAmbient;
uniform int uShadingMode;
varying vec3 vNormal;
varying vec2 vUv;
void main() {
  vec3 base = texture2D(uTexture, vUv).rgb;
  if (uShadingMode == 0) {
    gl_FragColor = vec4(base, 1.0);
  } else {
    float lambert = max(dot(normalize(vNormal), uLightDirection), 0.0);
    float intensity = uAmbient + (1.0 - uAmbient) * lambert;
    gl_FragColor = vec4(base * intensity, 1.0);
  }
}
`;
