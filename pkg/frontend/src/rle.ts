/**
 * Run-length decoding for mask transport.
 *
 * The server flattens each mask row-major and sends alternating run
 * lengths [n0, n1, n0, ...] starting with a background (0) run, which may
 * be zero-length. Run lengths must sum to width*height.
 */

export function decodeRle(runs: number[], width: number, height: number): Uint8Array {
  let total = 0;
  for (const run of runs) {
    if (!Number.isInteger(run) || run < 0) {
      throw new Error('rle: expected a list of non-negative integers');
    }
    total += run;
  }
  if (total !== width * height) {
    throw new Error(`rle: run lengths sum to ${total}, expected ${width * height}`);
  }
  const flat = new Uint8Array(width * height);
  let pos = 0;
  let foreground = false;
  for (const run of runs) {
    if (foreground) {
      flat.fill(1, pos, pos + run);
    }
    pos += run;
    foreground = !foreground;
  }
  return flat;
}

/** Number of set pixels in a decoded mask. */
export function foregroundCount(mask: Uint8Array): number {
  let count = 0;
  for (const bit of mask) {
    count += bit;
  }
  return count;
}
