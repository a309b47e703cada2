// Canvas 2D renderer. Pure function of the last accepted response plus the
// current viewport: no retained scene graph, every frame is a full repaint.

import type { RenderState } from './controller.js';
import type { WindowResponse } from './types.js';
import { LABEL_SCALE, Viewport, worldToScreen } from './viewport.js';

const EDGE_COLOR = '#b8c0cc';
const NODE_COLOR = '#3b6ea5';
const OUTSIDE_NODE_COLOR = '#9db4cc';
const HIGHLIGHT_COLOR = '#d9534f';
const SUPERNODE_COLOR = '#5a4f8a';
const SUPEREDGE_COLOR = '#a89cc8';
const LABEL_COLOR = '#222832';

const NODE_RADIUS_PX = 3.5;

export function drawScene(ctx: CanvasRenderingContext2D, state: RenderState): void {
  const { viewport, response, highlight } = state;
  ctx.clearRect(0, 0, viewport.width, viewport.height);
  ctx.fillStyle = '#fafbfc';
  ctx.fillRect(0, 0, viewport.width, viewport.height);
  if (!response) return;

  if (response.level === 0) {
    drawDetail(ctx, viewport, response, highlight);
  } else {
    drawAbstraction(ctx, viewport, response);
  }
  if (response.truncated) drawTruncationBadge(ctx, viewport);
}

function drawDetail(
  ctx: CanvasRenderingContext2D,
  vp: Viewport,
  resp: WindowResponse,
  highlight: number | null,
): void {
  const nodes = resp.nodes ?? [];
  const edges = resp.edges ?? [];
  const byId = new Map(nodes.map((n) => [n.id, n]));
  const outside = new Set(resp.outside_node_ids);

  ctx.strokeStyle = EDGE_COLOR;
  ctx.lineWidth = 1;
  ctx.beginPath();
  for (const e of edges) {
    const a = byId.get(e.src);
    const b = byId.get(e.dst);
    if (!a || !b) continue;
    const pa = worldToScreen(vp, a.x, a.y);
    const pb = worldToScreen(vp, b.x, b.y);
    ctx.moveTo(pa.x, pa.y);
    ctx.lineTo(pb.x, pb.y);
  }
  ctx.stroke();

  for (const n of nodes) {
    const p = worldToScreen(vp, n.x, n.y);
    ctx.fillStyle =
      n.id === highlight ? HIGHLIGHT_COLOR : outside.has(n.id) ? OUTSIDE_NODE_COLOR : NODE_COLOR;
    ctx.beginPath();
    ctx.arc(p.x, p.y, n.id === highlight ? NODE_RADIUS_PX * 1.8 : NODE_RADIUS_PX, 0, Math.PI * 2);
    ctx.fill();
  }

  // labels only when zoomed in enough to keep them legible
  if (vp.scale >= LABEL_SCALE) {
    ctx.fillStyle = LABEL_COLOR;
    ctx.font = '11px system-ui, sans-serif';
    for (const n of nodes) {
      if (!n.label) continue;
      const p = worldToScreen(vp, n.x, n.y);
      ctx.fillText(n.label, p.x + NODE_RADIUS_PX + 2, p.y + 3);
    }
  }
}

function drawAbstraction(ctx: CanvasRenderingContext2D, vp: Viewport, resp: WindowResponse): void {
  const supernodes = resp.supernodes ?? [];
  const superedges = resp.superedges ?? [];
  const byId = new Map(supernodes.map((s) => [s.id, s]));
  const maxWeight = superedges.reduce((m, e) => Math.max(m, e.weight), 1);

  for (const e of superedges) {
    const a = byId.get(e.a);
    const b = byId.get(e.b);
    if (!a || !b) continue;
    const pa = worldToScreen(vp, a.x, a.y);
    const pb = worldToScreen(vp, b.x, b.y);
    ctx.strokeStyle = SUPEREDGE_COLOR;
    ctx.lineWidth = 1 + 4 * (e.weight / maxWeight);
    ctx.beginPath();
    ctx.moveTo(pa.x, pa.y);
    ctx.lineTo(pb.x, pb.y);
    ctx.stroke();
  }

  ctx.fillStyle = SUPERNODE_COLOR;
  for (const s of supernodes) {
    const p = worldToScreen(vp, s.x, s.y);
    const r = 6 + 4 * Math.log10(Math.max(s.count, 1));
    ctx.beginPath();
    ctx.arc(p.x, p.y, r, 0, Math.PI * 2);
    ctx.fill();
  }

  ctx.fillStyle = LABEL_COLOR;
  ctx.font = '11px system-ui, sans-serif';
  ctx.textAlign = 'center';
  for (const s of supernodes) {
    const p = worldToScreen(vp, s.x, s.y);
    ctx.fillText(String(s.count), p.x, p.y + 4);
  }
  ctx.textAlign = 'left';
}

function drawTruncationBadge(ctx: CanvasRenderingContext2D, vp: Viewport): void {
  const msg = 'view truncated: zoom in for full detail';
  ctx.font = '12px system-ui, sans-serif';
  const w = ctx.measureText(msg).width + 16;
  ctx.fillStyle = 'rgba(40, 44, 52, 0.85)';
  ctx.fillRect(vp.width - w - 10, 10, w, 24);
  ctx.fillStyle = '#ffd479';
  ctx.fillText(msg, vp.width - w - 2, 26);
}
