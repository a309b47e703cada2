// Browser entry point: wires DOM events to the controller and the canvas
// renderer. Everything interesting lives in controller.ts; this file only
// translates browser events into controller calls.

import { ExplorerController } from './controller.js';
import { drawScene } from './render.js';
import type { Meta, SearchHit } from './types.js';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const canvas = el<HTMLCanvasElement>('atlas');
  const banner = el<HTMLDivElement>('banner');
  const searchBox = el<HTMLInputElement>('search');
  const searchButton = el<HTMLButtonElement>('search-go');
  const results = el<HTMLUListElement>('results');
  const status = el<HTMLDivElement>('status');

  const resize = () => {
    canvas.width = canvas.clientWidth;
    canvas.height = canvas.clientHeight;
  };
  resize();

  const metaResp = await fetch('/api/meta');
  if (!metaResp.ok) {
    banner.textContent = 'could not reach the graph server';
    banner.hidden = false;
    return;
  }
  const meta = (await metaResp.json()) as Meta;
  status.textContent = `${meta.counts.nodes.toLocaleString()} nodes, ${meta.counts.edges.toLocaleString()} edges`;

  const ctx = canvas.getContext('2d');
  if (!ctx) throw new Error('canvas 2d context unavailable');

  const controller = new ExplorerController({
    meta,
    width: canvas.width,
    height: canvas.height,
    fetchImpl: fetch.bind(window),
    render: (state) => {
      drawScene(ctx, state);
      banner.hidden = state.error === null;
      if (state.error !== null) banner.textContent = state.error;
    },
  });
  controller.issue();

  // drag to pan
  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  canvas.addEventListener('pointerdown', (ev) => {
    dragging = true;
    lastX = ev.offsetX;
    lastY = ev.offsetY;
    canvas.setPointerCapture(ev.pointerId);
  });
  canvas.addEventListener('pointermove', (ev) => {
    if (!dragging) return;
    controller.panBy(ev.offsetX - lastX, ev.offsetY - lastY);
    lastX = ev.offsetX;
    lastY = ev.offsetY;
  });
  canvas.addEventListener('pointerup', (ev) => {
    dragging = false;
    canvas.releasePointerCapture(ev.pointerId);
  });

  // wheel to zoom, anchored at the cursor
  canvas.addEventListener(
    'wheel',
    (ev) => {
      ev.preventDefault();
      controller.zoomBy(ev.deltaY < 0 ? 1 : -1, ev.offsetX, ev.offsetY);
    },
    { passive: false },
  );

  window.addEventListener('resize', () => {
    resize();
    controller.viewport = { ...controller.viewport, width: canvas.width, height: canvas.height };
    controller.issue();
  });

  const runSearch = async () => {
    const term = searchBox.value;
    results.replaceChildren();
    if (!term.trim()) {
      status.textContent = 'enter a search term';
      return;
    }
    let hits: SearchHit[] | null;
    try {
      hits = await controller.search(term);
    } catch {
      banner.textContent = 'search failed';
      banner.hidden = false;
      return;
    }
    if (!hits || hits.length === 0) {
      status.textContent = 'no results';
      return;
    }
    status.textContent = `${hits.length} result${hits.length === 1 ? '' : 's'}`;
    for (const hit of hits) {
      const item = document.createElement('li');
      item.textContent = hit.label;
      item.addEventListener('click', () => {
        controller.selectHit(hit);
        results.replaceChildren();
      });
      results.append(item);
    }
  };
  searchButton.addEventListener('click', () => void runSearch());
  searchBox.addEventListener('keydown', (ev) => {
    if (ev.key === 'Enter') void runSearch();
  });
}

void boot();
