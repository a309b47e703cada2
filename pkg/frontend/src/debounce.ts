// Interval-anchored debounce: the first call in a burst arms a timer, calls
// while it is armed coalesce into that firing. Sustained input therefore
// produces exactly one firing per interval instead of being deferred forever.

export type Debounced = {
  (): void;
  cancel: () => void;
  flush: () => void;
};

export function debounce(fn: () => void, intervalMs: number): Debounced {
  let timer: ReturnType<typeof setTimeout> | null = null;
  const schedule = () => {
    if (timer !== null) return;
    timer = setTimeout(() => {
      timer = null;
      fn();
    }, intervalMs);
  };
  schedule.cancel = () => {
    if (timer !== null) {
      clearTimeout(timer);
      timer = null;
    }
  };
  schedule.flush = () => {
    if (timer !== null) {
      clearTimeout(timer);
      timer = null;
      fn();
    }
  };
  return schedule;
}
