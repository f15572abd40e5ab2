// Breathing-triangle construction. The constants mirror the engine's
// feedback geometry (ribs on top at 90 deg, abdomen at 210, waist at
// 330, radius = base * (1 + gain * channel)), so what the learner sees
// is what the classifier reasons about.

export const ANGLE_RB_DEG = 90;
export const ANGLE_LA_DEG = 210;
export const ANGLE_BW_DEG = 330;
export const BASE_RADIUS = 1.0;
export const GAIN = 1.0;

export interface Point {
  x: number;
  y: number;
}

/** Vertices in (rb, la, bw) order on a unit-ish scale; the renderer
 * multiplies by pixels. Canvas y grows downward, so y is negated. */
export function triangleVertices(laN: number, bwN: number, rbN: number): [Point, Point, Point] {
  const mk = (deg: number, n: number): Point => {
    const r = BASE_RADIUS * (1 + GAIN * n);
    const rad = (deg * Math.PI) / 180;
    return { x: r * Math.cos(rad), y: -r * Math.sin(rad) };
  };
  return [mk(ANGLE_RB_DEG, rbN), mk(ANGLE_LA_DEG, laN), mk(ANGLE_BW_DEG, bwN)];
}

function dist(p: Point, q: Point): number {
  return Math.hypot(p.x - q.x, p.y - q.y);
}

/** Internal angle-bisector lengths (abdomen, rib, waist) from side
 * lengths; same formula as the engine's. */
export function bisectorLengths(laN: number, bwN: number, rbN: number): [number, number, number] {
  const [vRb, vLa, vBw] = triangleVertices(laN, bwN, rbN);
  const sideRb = dist(vLa, vBw); // opposite the rib vertex
  const sideLa = dist(vRb, vBw);
  const sideBw = dist(vRb, vLa);
  const bisector = (adj1: number, adj2: number, opposite: number): number => {
    const s = adj1 + adj2;
    return Math.sqrt(adj1 * adj2 * (s * s - opposite * opposite)) / s;
  };
  return [
    bisector(sideRb, sideBw, sideLa),
    bisector(sideLa, sideBw, sideRb),
    bisector(sideRb, sideLa, sideBw),
  ];
}
