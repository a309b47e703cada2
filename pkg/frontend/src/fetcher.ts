// Sequence-numbered window fetches: only the response to the newest request
// is ever delivered, so a slow response can never paint over a fresh one.

import type { WindowResponse, WorldWindowParams } from './types.js';

export type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

export class WindowFetcher {
  private seq = 0;

  constructor(
    private fetchImpl: FetchLike,
    private base = '',
  ) {}

  /** The sequence number of the newest request issued so far. */
  get latest(): number {
    return this.seq;
  }

  async fetchWindow(
    params: WorldWindowParams,
    onFresh: (resp: WindowResponse) => void,
    onError?: (err: unknown) => void,
  ): Promise<void> {
    const id = ++this.seq;
    const url =
      `${this.base}/api/window?x0=${params.x0}&y0=${params.y0}` +
      `&x1=${params.x1}&y1=${params.y1}&level=${params.level}`;
    try {
      const resp = await this.fetchImpl(url);
      if (id !== this.seq) return; // superseded while in flight
      if (!resp.ok) throw new Error(`window query failed: ${resp.status}`);
      const body = (await resp.json()) as WindowResponse;
      if (id !== this.seq) return; // superseded while reading the body
      onFresh(body);
    } catch (err) {
      if (id === this.seq && onError) onError(err);
    }
  }
}
