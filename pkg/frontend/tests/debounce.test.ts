import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';
import { debounce } from '../src/debounce.js';

beforeEach(() => {
  vi.useFakeTimers({ toFake: ['setTimeout', 'clearTimeout', 'Date'] });
});

afterEach(() => {
  vi.useRealTimers();
});

describe('debounce', () => {
  it('a single call fires once after the interval', () => {
    const fn = vi.fn();
    const d = debounce(fn, 120);
    d();
    expect(fn).not.toHaveBeenCalled();
    vi.advanceTimersByTime(119);
    expect(fn).not.toHaveBeenCalled();
    vi.advanceTimersByTime(1);
    expect(fn).toHaveBeenCalledTimes(1);
    vi.advanceTimersByTime(1000);
    expect(fn).toHaveBeenCalledTimes(1);
  });

  it('many calls within one interval coalesce into one firing', () => {
    const fn = vi.fn();
    const d = debounce(fn, 120);
    for (let i = 0; i < 7; i++) {
      d();
      vi.advanceTimersByTime(15);
    }
    expect(fn).not.toHaveBeenCalled();
    vi.advanceTimersByTime(120);
    expect(fn).toHaveBeenCalledTimes(1);
  });

  it('sustained calling fires exactly once per interval, never starving', () => {
    const fn = vi.fn();
    const fireTimes: number[] = [];
    const d = debounce(() => {
      fn();
      fireTimes.push(Date.now());
    }, 120);
    // call every 16 ms for 1.2 s: a naive trailing debounce would fire zero times
    for (let t = 0; t < 1200; t += 16) {
      d();
      vi.advanceTimersByTime(16);
    }
    vi.advanceTimersByTime(200);
    expect(fn.mock.calls.length).toBeGreaterThanOrEqual(9);
    for (let i = 1; i < fireTimes.length; i++) {
      expect(fireTimes[i]! - fireTimes[i - 1]!).toBeGreaterThanOrEqual(120);
    }
  });

  it('cancel drops the pending firing', () => {
    const fn = vi.fn();
    const d = debounce(fn, 120);
    d();
    d.cancel();
    vi.advanceTimersByTime(1000);
    expect(fn).not.toHaveBeenCalled();
  });

  it('flush fires the pending call immediately, once', () => {
    const fn = vi.fn();
    const d = debounce(fn, 120);
    d();
    d.flush();
    expect(fn).toHaveBeenCalledTimes(1);
    vi.advanceTimersByTime(1000);
    expect(fn).toHaveBeenCalledTimes(1);
    d.flush(); // nothing pending: no extra firing
    expect(fn).toHaveBeenCalledTimes(1);
  });
});
