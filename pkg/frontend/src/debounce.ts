/** Trailing-edge debounce: rapid triggers collapse into one call. */

export interface Debounced {
  trigger: () => void;
  cancel: () => void;
  flush: () => void;
}

export function debounce(fn: () => void, waitMs: number): Debounced {
  let handle: ReturnType<typeof setTimeout> | null = null;

  const fire = () => {
    handle = null;
    fn();
  };

  return {
    trigger() {
      if (handle !== null) clearTimeout(handle);
      handle = setTimeout(fire, waitMs);
    },
    cancel() {
      if (handle !== null) clearTimeout(handle);
      handle = null;
    },
    flush() {
      if (handle !== null) {
        clearTimeout(handle);
        fire();
      }
    },
  };
}
