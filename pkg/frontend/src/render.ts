import type { QueryView } from "./types.js";
import { toBox } from "./types.js";

/** Link opacity tracks the model's confidence, floored for visibility. */
export function linkOpacity(confidence: number): number {
  return Math.max(0.15, Math.min(1, confidence));
}

/** Node indices ranked by solicitation value, highest first. */
export function rankByValue(valueScores: number[]): number[] {
  return valueScores
    .map((v, i) => [v, i] as [number, number])
    .sort((a, b) => b[0] - a[0] || a[1] - b[1])
    .map(([, i]) => i);
}

export type PairKind = "match" | "leave" | "enter" | "none";

/** How to badge an assignment given which slots hold real detections. */
export function pairKind(
  left: number,
  right: number,
  realLeft: number,
  realRight: number,
): PairKind {
  const l = left < realLeft;
  const r = right < realRight;
  if (l && r) return "match";
  if (l && !r) return "leave";
  if (!l && r) return "enter";
  return "none";
}

export interface NodeLayout {
  x: number;
  y: number;
  w: number;
  h: number;
  real: boolean;
}

/**
 * Box geometry for one side; invisible slots become small squares in a row
 * under the frame so they stay clickable.
 */
export function sideLayout(
  boxes: number[][],
  n: number,
  frameW: number,
  frameH: number,
  slotSize = 26,
): NodeLayout[] {
  const out: NodeLayout[] = [];
  for (let i = 0; i < n; i++) {
    if (i < boxes.length) {
      const b = toBox(boxes[i]);
      out.push({ x: b.left, y: b.top, w: b.width, h: b.height, real: true });
    } else {
      const k = i - boxes.length;
      out.push({
        x: 8 + k * (slotSize + 6),
        y: frameH + 12,
        w: slotSize,
        h: slotSize,
        real: false,
      });
    }
  }
  return out;
}

export function center(node: NodeLayout): { x: number; y: number } {
  return { x: node.x + node.w / 2, y: node.y + node.h / 2 };
}

export interface RenderOptions {
  frameW: number;
  frameH: number;
  gap: number;
}

/** Draw both frames, the draft links, and the confidence shading. */
export function drawQuery(
  ctx: CanvasRenderingContext2D,
  view: QueryView,
  draft: (number | null)[],
  selected: number | null,
  opts: RenderOptions,
): void {
  const { frameW, frameH, gap } = opts;
  const leftNodes = sideLayout(view.boxes_t, view.n, frameW, frameH);
  const rightNodes = sideLayout(view.boxes_t1, view.n, frameW, frameH).map((nd) => ({
    ...nd,
    x: nd.x + frameW + gap,
  }));
  ctx.clearRect(0, 0, frameW * 2 + gap, frameH + 60);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(0, 0, frameW, frameH);
  ctx.strokeRect(frameW + gap, 0, frameW, frameH);

  for (let i = 0; i < view.n; i++) {
    const j = draft[i];
    if (j === null) continue;
    const a = center(leftNodes[i]);
    const b = center(rightNodes[j]);
    ctx.globalAlpha = linkOpacity(view.confidence[i][j]);
    ctx.strokeStyle = "#1566c0";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(a.x, a.y);
    ctx.lineTo(b.x, b.y);
    ctx.stroke();
    ctx.globalAlpha = 1;
  }

  const drawSide = (nodes: NodeLayout[], labelsAreLeft: boolean) => {
    nodes.forEach((nd, i) => {
      ctx.lineWidth = labelsAreLeft && i === selected ? 3 : 1.5;
      ctx.strokeStyle = nd.real ? "#2a8f2a" : "#b08a2a";
      ctx.strokeRect(nd.x, nd.y, nd.w, nd.h);
      ctx.fillStyle = ctx.strokeStyle;
      ctx.font = "12px sans-serif";
      ctx.fillText(String(i), nd.x + 3, nd.y + 13);
    });
  };
  drawSide(leftNodes, true);
  drawSide(rightNodes, false);
}

/** Hit test used by the click handlers. */
export function nodeAt(
  nodes: NodeLayout[],
  x: number,
  y: number,
): number | null {
  for (let i = nodes.length - 1; i >= 0; i--) {
    const nd = nodes[i];
    if (x >= nd.x && x <= nd.x + nd.w && y >= nd.y && y <= nd.y + nd.h) return i;
  }
  return null;
}
