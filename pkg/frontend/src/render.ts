/** View-model helpers and canvas drawing for the graph + accuracy chart.
 *
 * The pure helpers (colors, radii, projection, prediction) are kept free of
 * DOM access so they can be tested under Node; the draw functions take a 2D
 * context and only touch what they are given.
 */

import type { ClassLabel, Snapshot } from "./types.js";

export const UNLABELED: ClassLabel = "unlabeled";
export const UNLABELED_COLOR = "#8a8a8a";

/** Distinct hues for class identities; cycles past the palette length. */
export const PALETTE = [
  "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
  "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#1b9e77", "#d95f02",
];

export function colorForClass(label: ClassLabel, classes: ClassLabel[]): string {
  if (label === UNLABELED) return UNLABELED_COLOR;
  const idx = classes.indexOf(label);
  if (idx < 0) return UNLABELED_COLOR;
  return PALETTE[idx % PALETTE.length];
}

/** Mirror of the server's node prediction: argmax of label mass, ties to the
 * lowest class index, uniform when mass is zero, sentinel when classless. */
export function predictedFromQ(q: number[], classes: ClassLabel[]): ClassLabel {
  if (q.length === 0 || classes.length === 0) return UNLABELED;
  let best = 0;
  for (let i = 1; i < q.length; i++) if (q[i] > q[best]) best = i;
  return classes[best] ?? UNLABELED;
}

/** Node radius grows with degree d but sub-linearly, clamped to a range. */
export function nodeRadius(d: number, minR = 3, maxR = 14): number {
  return Math.min(maxR, minR + 1.5 * Math.sqrt(Math.max(0, d)));
}

/** Edge opacity follows the edge weight e in [0, 1], kept faintly visible. */
export function edgeAlpha(e: number): number {
  return Math.min(1, Math.max(0.08, e));
}

/** Map a position in the unit square (first two feature dims) to pixels. */
export function project(
  pos: number[],
  width: number,
  height: number,
  pad = 20,
): [number, number] {
  const x = pos.length > 0 ? pos[0] : 0.5;
  const y = pos.length > 1 ? pos[1] : 0.5;
  return [
    pad + x * (width - 2 * pad),
    // y grows upward in feature space, downward in canvas space
    height - pad - y * (height - 2 * pad),
  ];
}

export function drawGraph(
  ctx: CanvasRenderingContext2D,
  snapshot: Snapshot,
  width: number,
  height: number,
  highlightNodeId: number | null = null,
  queryFeatures: number[] | null = null,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#141820";
  ctx.fillRect(0, 0, width, height);

  const positions = new Map<number, [number, number]>();
  for (const node of snapshot.nodes) {
    positions.set(node.id, project(node.pos, width, height));
  }

  for (const [i, j, e] of snapshot.edges) {
    const a = positions.get(i);
    const b = positions.get(j);
    if (!a || !b) continue;
    ctx.strokeStyle = `rgba(170, 190, 220, ${edgeAlpha(e).toFixed(3)})`;
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(a[0], a[1]);
    ctx.lineTo(b[0], b[1]);
    ctx.stroke();
  }

  for (const node of snapshot.nodes) {
    const [x, y] = positions.get(node.id)!;
    const r = nodeRadius(node.d);
    ctx.fillStyle = colorForClass(node.predicted, snapshot.classes);
    ctx.beginPath();
    ctx.arc(x, y, r, 0, 2 * Math.PI);
    ctx.fill();
    if (node.id === highlightNodeId) {
      ctx.strokeStyle = "#ffffff";
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.arc(x, y, r + 3, 0, 2 * Math.PI);
      ctx.stroke();
    }
  }

  if (queryFeatures) {
    const [x, y] = project(queryFeatures, width, height);
    ctx.strokeStyle = "#ffd166";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(x - 8, y);
    ctx.lineTo(x + 8, y);
    ctx.moveTo(x, y - 8);
    ctx.lineTo(x, y + 8);
    ctx.stroke();
    ctx.beginPath();
    ctx.arc(x, y, 6, 0, 2 * Math.PI);
    ctx.stroke();
  }
}

export function drawAccuracyChart(
  ctx: CanvasRenderingContext2D,
  curve: Array<[number, number]>,
  queryMarks: number[],
  totalSamples: number,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#141820";
  ctx.fillRect(0, 0, width, height);
  const pad = 24;
  const spanT = Math.max(1, totalSamples);
  const px = (t: number) => pad + (t / spanT) * (width - 2 * pad);
  const py = (a: number) => height - pad - a * (height - 2 * pad);

  // axes and gridlines at 0, 0.5, 1
  ctx.strokeStyle = "#3a4150";
  ctx.lineWidth = 1;
  for (const a of [0, 0.5, 1]) {
    ctx.beginPath();
    ctx.moveTo(pad, py(a));
    ctx.lineTo(width - pad, py(a));
    ctx.stroke();
  }
  ctx.fillStyle = "#8a93a5";
  ctx.font = "10px sans-serif";
  ctx.fillText("1.0", 2, py(1) + 3);
  ctx.fillText("0.5", 2, py(0.5) + 3);
  ctx.fillText("0.0", 2, py(0) + 3);

  // query marks: thin vertical ticks where labels were requested
  ctx.strokeStyle = "rgba(255, 209, 102, 0.45)";
  for (const t of queryMarks) {
    ctx.beginPath();
    ctx.moveTo(px(t), height - pad);
    ctx.lineTo(px(t), height - pad - 8);
    ctx.stroke();
  }

  if (curve.length > 0) {
    ctx.strokeStyle = "#59a14f";
    ctx.lineWidth = 2;
    ctx.beginPath();
    curve.forEach(([t, a], i) => {
      if (i === 0) ctx.moveTo(px(t), py(a));
      else ctx.lineTo(px(t), py(a));
    });
    ctx.stroke();
    const [lastT, lastA] = curve[curve.length - 1];
    ctx.fillStyle = "#59a14f";
    ctx.beginPath();
    ctx.arc(px(lastT), py(lastA), 3, 0, 2 * Math.PI);
    ctx.fill();
    ctx.fillText(lastA.toFixed(3), px(lastT) + 6, py(lastA) - 4);
  }
}
