// Viewport state and the world/screen transform. The world window is fully
// derived: center +- half the canvas divided by scale.

export type Viewport = {
  centerX: number;
  centerY: number;
  scale: number; // screen pixels per world unit, > 0
  width: number; // canvas pixels
  height: number;
};

export type WorldWindow = { x0: number; y0: number; x1: number; y1: number };

// below this scale the view is too far out for node detail: request level 1
export const ABSTRACTION_SCALE = 0.15;
// scale used when jumping to a search hit
export const DETAIL_SCALE = 1.0;
// node labels are drawn only at or above this scale
export const LABEL_SCALE = 0.6;

export function levelFor(scale: number): 0 | 1 {
  return scale < ABSTRACTION_SCALE ? 1 : 0;
}

export function worldWindow(vp: Viewport): WorldWindow {
  const hw = vp.width / 2 / vp.scale;
  const hh = vp.height / 2 / vp.scale;
  return {
    x0: vp.centerX - hw,
    y0: vp.centerY - hh,
    x1: vp.centerX + hw,
    y1: vp.centerY + hh,
  };
}

export function worldToScreen(vp: Viewport, wx: number, wy: number): { x: number; y: number } {
  return {
    x: (wx - vp.centerX) * vp.scale + vp.width / 2,
    y: (wy - vp.centerY) * vp.scale + vp.height / 2,
  };
}

export function screenToWorld(vp: Viewport, sx: number, sy: number): { x: number; y: number } {
  return {
    x: vp.centerX + (sx - vp.width / 2) / vp.scale,
    y: vp.centerY + (sy - vp.height / 2) / vp.scale,
  };
}

/** Shift the view by a drag delta given in screen pixels. */
export function panBy(vp: Viewport, dxPx: number, dyPx: number): Viewport {
  return {
    ...vp,
    centerX: vp.centerX - dxPx / vp.scale,
    centerY: vp.centerY - dyPx / vp.scale,
  };
}

/** Rescale keeping the world point under the anchor pixel fixed on screen. */
export function zoomAt(vp: Viewport, factor: number, anchorX: number, anchorY: number): Viewport {
  const anchor = screenToWorld(vp, anchorX, anchorY);
  const scale = vp.scale * factor;
  return {
    ...vp,
    scale,
    centerX: anchor.x - (anchorX - vp.width / 2) / scale,
    centerY: anchor.y - (anchorY - vp.height / 2) / scale,
  };
}

/** Initial viewport: the whole world bbox fitted into the canvas. */
export function fitViewport(
  bbox: { x0: number; y0: number; x1: number; y1: number },
  width: number,
  height: number,
): Viewport {
  const spanX = Math.max(bbox.x1 - bbox.x0, 1e-9);
  const spanY = Math.max(bbox.y1 - bbox.y0, 1e-9);
  return {
    centerX: (bbox.x0 + bbox.x1) / 2,
    centerY: (bbox.y0 + bbox.y1) / 2,
    scale: Math.min(width / spanX, height / spanY),
    width,
    height,
  };
}
