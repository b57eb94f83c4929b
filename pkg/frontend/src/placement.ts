/**
 * Object layout for one trial, a faithful port of the server's generator.
 * Draw order, integer-grid mapping, rejection, and the size rule must all
 * stay in lockstep with the service or positions will drift; the fixture
 * test pins them bit-for-bit.
 */

import { makeRng, trialStreamSeed } from "./rng.js";
import { LevelDefinition, ObjectSpec } from "./level.js";

export const MAX_ATTEMPTS = 1000;
export const DEFAULT_MIN_SEPARATION = 10.0;

export interface PlacedObject {
  shape: string;
  is_target: boolean;
  visibility_order: number;
  x: number;
  y: number;
  radius: number;
}

interface Grid {
  x0: number;
  y0: number;
  xSpan: number; // inclusive count minus one
  ySpan: number;
}

export class PlacementError extends Error {}

function gridFor(obj: ObjectSpec): Grid {
  const b = obj.placement_bounds;
  const x0 = Math.ceil(b.x_min);
  const y0 = Math.ceil(b.y_min);
  const xSpan = Math.floor(b.x_max) - x0;
  const ySpan = Math.floor(b.y_max) - y0;
  if (xSpan < 0 || ySpan < 0) {
    throw new PlacementError("bounds contain no integer field positions");
  }
  return { x0, y0, xSpan, ySpan };
}

function maxPairDistanceSq(a: Grid, b: Grid): number {
  let best = 0;
  for (const ax of [a.x0, a.x0 + a.xSpan]) {
    for (const ay of [a.y0, a.y0 + a.ySpan]) {
      for (const bx of [b.x0, b.x0 + b.xSpan]) {
        for (const by of [b.y0, b.y0 + b.ySpan]) {
          const d = (ax - bx) ** 2 + (ay - by) ** 2;
          if (d > best) best = d;
        }
      }
    }
  }
  return best;
}

function radiusOf(obj: ObjectSpec, grid: Grid, x: number, y: number): number {
  const halfDiag = Math.sqrt(grid.xSpan ** 2 + grid.ySpan ** 2) / 2.0;
  let closeness: number;
  if (halfDiag === 0.0) {
    closeness = 1.0;
  } else {
    const cx = grid.x0 + grid.xSpan / 2.0;
    const cy = grid.y0 + grid.ySpan / 2.0;
    const d = Math.sqrt((x - cx) ** 2 + (y - cy) ** 2);
    closeness = 1.0 - d / halfDiag;
  }
  return obj.size_rule.base_radius * (1.0 + obj.size_rule.distance_scale * closeness);
}

export function placeObjects(
  level: LevelDefinition,
  rngSeed: number,
  trialIndex: number,
  minSeparation: number = DEFAULT_MIN_SEPARATION,
): PlacedObject[] {
  const order = level.objects
    .map((_, i) => i)
    .sort((a, b) =>
      level.objects[a].visibility_order - level.objects[b].visibility_order || a - b,
    );
  const objs = order.map((i) => level.objects[i]);
  const grids = objs.map(gridFor);

  const sepSq = minSeparation * minSeparation;
  for (let i = 0; i < objs.length; i++) {
    for (let j = i + 1; j < objs.length; j++) {
      if (maxPairDistanceSq(grids[i], grids[j]) < sepSq) {
        throw new PlacementError(
          `infeasible placement: bounds cannot hold objects ${minSeparation} apart`,
        );
      }
    }
  }

  const rng = makeRng(trialStreamSeed(rngSeed, trialIndex));
  const placed: PlacedObject[] = [];
  for (let i = 0; i < objs.length; i++) {
    const obj = objs[i];
    const grid = grids[i];
    let done = false;
    for (let attempt = 0; attempt < MAX_ATTEMPTS; attempt++) {
      const x = grid.x0 + (rng.nextU32() % (grid.xSpan + 1));
      const y = grid.y0 + (rng.nextU32() % (grid.ySpan + 1));
      if (placed.every((p) => (x - p.x) ** 2 + (y - p.y) ** 2 >= sepSq)) {
        placed.push({
          shape: obj.shape,
          is_target: obj.is_target,
          visibility_order: obj.visibility_order,
          x,
          y,
          radius: radiusOf(obj, grid, x, y),
        });
        done = true;
        break;
      }
    }
    if (!done) {
      throw new PlacementError(
        `infeasible placement: no layout found in ${MAX_ATTEMPTS} attempts`,
      );
    }
  }
  return placed;
}
