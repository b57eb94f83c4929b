"""Deterministic object placement shared with the browser client.

The PRNG (Mulberry32), the stream seeding, the draw order, and the
integer-grid mapping are all part of the wire contract: a JavaScript port
doing the same 32-bit operations reproduces every position bit-for-bit.
Keep any change here in lockstep with the client.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import PlacementError
from .model import LevelDefinition, ObjectSpec

_U32 = 0xFFFFFFFF
# Knuth multiplicative-hash constant; spreads trial indices across the seed space.
_TRIAL_STRIDE = 2654435761
MAX_ATTEMPTS = 1000
DEFAULT_MIN_SEPARATION = 10.0


class Mulberry32:
    """32-bit PRNG, identical to the common JS one-liner."""

    def __init__(self, seed: int):
        self.state = seed & _U32

    def next_u32(self) -> int:
        self.state = (self.state + 0x6D2B79F5) & _U32
        t = self.state
        t = ((t ^ (t >> 15)) * (t | 1)) & _U32
        t ^= (t + (((t ^ (t >> 7)) * (t | 61)) & _U32)) & _U32
        return ((t ^ (t >> 14))) & _U32


def trial_stream_seed(layout_seed: int, trial_index: int) -> int:
    """Independent stream per trial so layouts never shift between trials."""
    return (layout_seed + trial_index * _TRIAL_STRIDE) & _U32


@dataclass(frozen=True, slots=True)
class PlacedObject:
    shape: str
    is_target: bool
    visibility_order: int
    x: int
    y: int
    radius: float


@dataclass(frozen=True, slots=True)
class _Grid:
    """Integer positions available inside an object's bounds."""

    x0: int
    y0: int
    x_span: int  # inclusive count minus one
    y_span: int

    @property
    def cx(self) -> float:
        return self.x0 + self.x_span / 2.0

    @property
    def cy(self) -> float:
        return self.y0 + self.y_span / 2.0


def _grid_for(obj: ObjectSpec) -> _Grid:
    b = obj.placement_bounds
    x0 = math.ceil(b.x_min)
    y0 = math.ceil(b.y_min)
    x_span = math.floor(b.x_max) - x0
    y_span = math.floor(b.y_max) - y0
    if x_span < 0 or y_span < 0:
        raise PlacementError("bounds contain no integer field positions")
    return _Grid(x0=x0, y0=y0, x_span=x_span, y_span=y_span)


def _max_pair_distance_sq(a: _Grid, b: _Grid) -> int:
    """Largest squared distance between any grid point of a and of b."""
    best = 0
    for ax in (a.x0, a.x0 + a.x_span):
        for ay in (a.y0, a.y0 + a.y_span):
            for bx in (b.x0, b.x0 + b.x_span):
                for by in (b.y0, b.y0 + b.y_span):
                    d = (ax - bx) ** 2 + (ay - by) ** 2
                    if d > best:
                        best = d
    return best


def _radius(obj: ObjectSpec, grid: _Grid, x: int, y: int) -> float:
    """Size-by-closeness: objects near the field center render larger."""
    half_diag = math.sqrt(grid.x_span**2 + grid.y_span**2) / 2.0
    if half_diag == 0.0:
        closeness = 1.0
    else:
        d = math.sqrt((x - grid.cx) ** 2 + (y - grid.cy) ** 2)
        closeness = 1.0 - d / half_diag
    return obj.size_rule.base_radius * (1.0 + obj.size_rule.distance_scale * closeness)


def place_objects(
    level: LevelDefinition,
    rng_seed: int,
    trial_index: int,
    min_separation: float = DEFAULT_MIN_SEPARATION,
) -> list[PlacedObject]:
    """Lay out one trial's objects on integer field units.

    Objects are drawn in visibility order (ties keep definition order); each
    draw is two u32 pulls mapped by modulo onto the bounds grid, rejected
    until the pairwise separation holds. Raises PlacementError when the
    geometry can never satisfy the separation or rejection gives up.
    """
    order = sorted(range(len(level.objects)), key=lambda i: (level.objects[i].visibility_order, i))
    objs = [level.objects[i] for i in order]
    grids = [_grid_for(o) for o in objs]

    sep_sq = min_separation * min_separation
    for i in range(len(objs)):
        for j in range(i + 1, len(objs)):
            if _max_pair_distance_sq(grids[i], grids[j]) < sep_sq:
                raise PlacementError(
                    f"infeasible placement: bounds cannot hold objects {min_separation} apart"
                )

    rng = Mulberry32(trial_stream_seed(rng_seed, trial_index))
    placed: list[PlacedObject] = []
    for obj, grid in zip(objs, grids):
        for _ in range(MAX_ATTEMPTS):
            x = grid.x0 + rng.next_u32() % (grid.x_span + 1)
            y = grid.y0 + rng.next_u32() % (grid.y_span + 1)
            if all((x - p.x) ** 2 + (y - p.y) ** 2 >= sep_sq for p in placed):
                placed.append(
                    PlacedObject(
                        shape=obj.shape.value,
                        is_target=obj.is_target,
                        visibility_order=obj.visibility_order,
                        x=x,
                        y=y,
                        radius=_radius(obj, grid, x, y),
                    )
                )
                break
        else:
            raise PlacementError(
                f"infeasible placement: no layout found in {MAX_ATTEMPTS} attempts"
            )
    return placed
