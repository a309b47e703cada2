import { describe, expect, it } from 'vitest';
import { FetchLike, WindowFetcher } from '../src/fetcher.js';
import type { WindowResponse } from '../src/types.js';

type PendingCall = {
  url: string;
  resolve: (body: unknown) => void;
  fail: (err: unknown) => void;
};

/** fetch stub whose responses are resolved manually, in any order. */
function manualFetch(): { calls: PendingCall[]; fetchImpl: FetchLike } {
  const calls: PendingCall[] = [];
  const fetchImpl: FetchLike = (url) =>
    new Promise((resolve, reject) => {
      calls.push({
        url,
        resolve: (body) => resolve({ ok: true, status: 200, json: async () => body }),
        fail: reject,
      });
    });
  return { calls, fetchImpl };
}

function frame(tag: number): WindowResponse {
  return {
    level: 0,
    window: { x0: tag, y0: 0, x1: tag + 1, y1: 1 },
    truncated: false,
    outside_node_ids: [],
    nodes: [],
    edges: [],
  };
}

const PARAMS = { x0: 0, y0: 0, x1: 10, y1: 10, level: 0 };

describe('WindowFetcher', () => {
  it('encodes the window and level into the request URL', async () => {
    const { calls, fetchImpl } = manualFetch();
    const f = new WindowFetcher(fetchImpl);
    void f.fetchWindow({ x0: -1.5, y0: 2, x1: 3.5, y1: 4, level: 1 }, () => {});
    expect(calls[0]!.url).toBe('/api/window?x0=-1.5&y0=2&x1=3.5&y1=4&level=1');
  });

  it('delivers the response when it is still the newest request', async () => {
    const { calls, fetchImpl } = manualFetch();
    const f = new WindowFetcher(fetchImpl);
    const seen: WindowResponse[] = [];
    const p = f.fetchWindow(PARAMS, (r) => seen.push(r));
    calls[0]!.resolve(frame(1));
    await p;
    expect(seen).toHaveLength(1);
    expect(seen[0]!.window.x0).toBe(1);
  });

  it('drops a response that resolves after a newer request was issued', async () => {
    const { calls, fetchImpl } = manualFetch();
    const f = new WindowFetcher(fetchImpl);
    const seen: number[] = [];
    const p1 = f.fetchWindow(PARAMS, (r) => seen.push(r.window.x0));
    const p2 = f.fetchWindow(PARAMS, (r) => seen.push(r.window.x0));
    // the newer request answers first; the older answer arrives late
    calls[1]!.resolve(frame(2));
    await p2;
    calls[0]!.resolve(frame(1));
    await p1;
    expect(seen).toEqual([2]);
  });

  it('drops a stale response even when it arrives before the fresh one', async () => {
    const { calls, fetchImpl } = manualFetch();
    const f = new WindowFetcher(fetchImpl);
    const seen: number[] = [];
    const p1 = f.fetchWindow(PARAMS, (r) => seen.push(r.window.x0));
    const p2 = f.fetchWindow(PARAMS, (r) => seen.push(r.window.x0));
    calls[0]!.resolve(frame(1)); // old request answers first: still stale
    await p1;
    calls[1]!.resolve(frame(2));
    await p2;
    expect(seen).toEqual([2]);
  });

  it('reports an error only while the request is still the newest', async () => {
    const { calls, fetchImpl } = manualFetch();
    const f = new WindowFetcher(fetchImpl);
    const errors: unknown[] = [];
    const fresh: number[] = [];
    const p1 = f.fetchWindow(
      PARAMS,
      (r) => fresh.push(r.window.x0),
      (e) => errors.push(e),
    );
    const p2 = f.fetchWindow(
      PARAMS,
      (r) => fresh.push(r.window.x0),
      (e) => errors.push(e),
    );
    calls[0]!.fail(new Error('network down')); // superseded: swallowed
    await p1;
    expect(errors).toHaveLength(0);
    calls[1]!.fail(new Error('network down'));
    await p2;
    expect(errors).toHaveLength(1);
    expect(fresh).toHaveLength(0);
  });

  it('treats a non-2xx response as an error', async () => {
    const fetchImpl: FetchLike = async () => ({
      ok: false,
      status: 500,
      json: async () => ({}),
    });
    const f = new WindowFetcher(fetchImpl);
    const errors: unknown[] = [];
    await f.fetchWindow(PARAMS, () => {}, (e) => errors.push(e));
    expect(errors).toHaveLength(1);
  });
});
