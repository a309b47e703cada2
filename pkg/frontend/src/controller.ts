// Glue between viewport state, the debounced fetch cycle, and the renderer.
// Deliberately DOM-free: input handlers and the canvas live in main.ts, so
// the whole interaction contract is testable with a stubbed fetch.

import { debounce, Debounced } from './debounce.js';
import { WindowFetcher, FetchLike } from './fetcher.js';
import type { Meta, SearchHit, SearchResponse, WindowResponse } from './types.js';
import {
  DETAIL_SCALE,
  Viewport,
  fitViewport,
  levelFor,
  panBy,
  worldWindow,
  zoomAt,
} from './viewport.js';

export const DEBOUNCE_MS = 120;
export const ZOOM_STEP = 1.25;

export type RenderState = {
  viewport: Viewport;
  response: WindowResponse | null;
  highlight: number | null;
  error: string | null;
};

export type ControllerOptions = {
  meta: Meta;
  width: number;
  height: number;
  fetchImpl: FetchLike;
  render: (state: RenderState) => void;
  debounceMs?: number;
};

export class ExplorerController {
  viewport: Viewport;
  response: WindowResponse | null = null;
  highlight: number | null = null;
  error: string | null = null;

  private fetchImpl: FetchLike;
  private fetcher: WindowFetcher;
  private render: (state: RenderState) => void;
  private scheduled: Debounced;

  constructor(opts: ControllerOptions) {
    this.viewport = fitViewport(opts.meta.bbox, opts.width, opts.height);
    this.fetchImpl = opts.fetchImpl;
    this.fetcher = new WindowFetcher(opts.fetchImpl);
    this.render = opts.render;
    this.scheduled = debounce(() => this.issue(), opts.debounceMs ?? DEBOUNCE_MS);
  }

  /** Immediate fetch for the current viewport (initial paint, search jump). */
  issue(): void {
    const w = worldWindow(this.viewport);
    void this.fetcher.fetchWindow(
      { ...w, level: levelFor(this.viewport.scale) },
      (resp) => {
        this.response = resp;
        this.error = null;
        this.paint();
      },
      () => {
        // keep the last good frame; the viewport stays interactive
        this.error = 'server unreachable';
        this.paint();
      },
    );
  }

  panBy(dxPx: number, dyPx: number): void {
    this.viewport = panBy(this.viewport, dxPx, dyPx);
    this.paint();
    this.scheduled();
  }

  zoomBy(direction: 1 | -1, anchorX: number, anchorY: number): void {
    const factor = direction > 0 ? ZOOM_STEP : 1 / ZOOM_STEP;
    this.viewport = zoomAt(this.viewport, factor, anchorX, anchorY);
    this.paint();
    this.scheduled();
  }

  /** Returns null for a blank term (validation failure, no request sent). */
  async search(term: string): Promise<SearchHit[] | null> {
    if (!term.trim()) return null;
    const resp = await this.fetchImpl(`/api/search?q=${encodeURIComponent(term)}`);
    if (!resp.ok) throw new Error(`search failed: ${resp.status}`);
    const body = (await resp.json()) as SearchResponse;
    return body.results;
  }

  /** Center on a search hit at detail scale and highlight it. */
  selectHit(hit: SearchHit): void {
    this.scheduled.cancel();
    this.viewport = {
      ...this.viewport,
      centerX: hit.x,
      centerY: hit.y,
      scale: Math.max(this.viewport.scale, DETAIL_SCALE),
    };
    this.highlight = hit.id;
    this.issue();
  }

  private paint(): void {
    this.render({
      viewport: this.viewport,
      response: this.response,
      highlight: this.highlight,
      error: this.error,
    });
  }
}
