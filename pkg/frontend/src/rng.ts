/**
 * Mulberry32 PRNG, bit-identical to the server's layout generator.
 * Positions come from raw u32 pulls, so nextU32 is the contract here;
 * random() is the usual [0,1) convenience on top.
 */

export interface Rng {
  nextU32(): number;
  random(): number;
}

export function makeRng(seed: number): Rng {
  let s = seed >>> 0;
  function nextU32(): number {
    s = (s + 0x6d2b79f5) >>> 0;
    let t = s;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return (t ^ (t >>> 14)) >>> 0;
  }
  return {
    nextU32,
    random: () => nextU32() / 4294967296,
  };
}

// Knuth multiplicative-hash stride; keeps each trial on its own stream.
const TRIAL_STRIDE = 2654435761;

export function trialStreamSeed(layoutSeed: number, trialIndex: number): number {
  return ((layoutSeed >>> 0) + trialIndex * TRIAL_STRIDE) % 4294967296;
}
