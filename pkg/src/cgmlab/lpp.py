"""Last-passage percolation on the planar lattice.

G(u, v) is the maximum, over up-right paths from u to v, of the sum of the
vertex weights along the path, both endpoints included.  It satisfies the
corner recursion G(u, v) = max(G(u, v - e1), G(u, v - e2)) + Y(v), which is
what the table builder fills in.  Arrays are stored northeast-growing with
the path origin at array index (0, 0); the southwest growth picture used by
the Busemann estimators is the reflection x -> -x of the same array, so a
backtracked path toward the array origin reads as a southwest geodesic
there.

The limit shape of G along the diagonal is governed by
g(x) = (sqrt|x1| + sqrt|x2|)^2 for x in the third quadrant, with
G(-N, -N -> 0) / N approaching g(-1, -1) = 4.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .rng import SeqWindow, WeightField
from .multiclass import MultiConfig

__all__ = [
    "GTable",
    "GeodesicPath",
    "STEP_E1",
    "STEP_E2",
    "lpp_grid",
    "brute_force_lpp",
    "shape_function",
    "backtrack_geodesic",
    "stationary_halfplane_lpp",
]

# Step codes for paths recorded toward the array origin: a STEP_E1 entry
# moves by -e1 (axis 0), a STEP_E2 entry by -e2 (axis 1).
STEP_E1 = 0
STEP_E2 = 1


@dataclass(eq=False)
class GTable:
    """Passage times from a fixed origin to every point of a rectangle.

    values[a, b] = G(origin, origin + (a, b)).
    """

    origin: tuple[int, int]
    values: np.ndarray

    def __post_init__(self):
        self.origin = (int(self.origin[0]), int(self.origin[1]))
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("GTable values must be 2-dimensional")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def at(self, point: tuple[int, int]) -> float:
        a = point[0] - self.origin[0]
        b = point[1] - self.origin[1]
        if a < 0 or b < 0 or a >= self.values.shape[0] or b >= self.values.shape[1]:
            raise ValueError(f"point {point} outside table")
        return float(self.values[a, b])


@dataclass(eq=False)
class GeodesicPath:
    """A lattice path recorded from its start toward the table origin.

    steps holds STEP_E1 / STEP_E2 codes; truncated marks a walk stopped by
    a step budget rather than by reaching the origin.
    """

    start: tuple[int, int]
    steps: np.ndarray
    truncated: bool = False

    def __post_init__(self):
        self.start = (int(self.start[0]), int(self.start[1]))
        self.steps = np.asarray(self.steps, dtype=np.int8)

    def __len__(self) -> int:
        return len(self.steps)

    def points(self) -> list[tuple[int, int]]:
        pts = [self.start]
        a, b = self.start
        for code in self.steps:
            if code == STEP_E1:
                a -= 1
            else:
                b -= 1
            pts.append((a, b))
        return pts

    def initial_e1_run(self) -> int:
        """Number of consecutive STEP_E1 moves at the start of the path."""
        hits = np.flatnonzero(self.steps == STEP_E2)
        return int(hits[0]) if len(hits) else len(self.steps)


def _grid_values(weights: np.ndarray) -> np.ndarray:
    """Fill G[a,b] = max(G[a-1,b], G[a,b-1]) + Y[a,b] over the rectangle."""
    rows, cols = weights.shape
    if rows > cols:
        # Loop over the shorter axis; the recursion is transpose-symmetric.
        return _grid_values(weights.T).T
    g = np.empty_like(weights)
    g[0] = np.cumsum(weights[0])
    for a in range(1, rows):
        row = weights[a]
        csum = np.cumsum(row)
        # G[a,b] = CY[b] + max_{j<=b} (G[a-1,j] - CY[j-1]), CY[j-1] = csum[j]-row[j]
        g[a] = csum + np.maximum.accumulate(g[a - 1] - (csum - row))
    return g


def lpp_grid(weights: WeightField) -> GTable:
    """Passage times from the field's southwest array corner to every point."""
    return GTable(weights.origin, _grid_values(weights.values))


def brute_force_lpp(weights: WeightField, start: tuple[int, int],
                    end: tuple[int, int], max_paths: int = 1_000_000) -> float:
    """Exhaustive-path oracle for G(start, end); refuses more than max_paths paths."""
    a0 = start[0] - weights.origin[0]
    b0 = start[1] - weights.origin[1]
    a1 = end[0] - weights.origin[0]
    b1 = end[1] - weights.origin[1]
    rows, cols = weights.values.shape
    for a, b in ((a0, b0), (a1, b1)):
        if not (0 <= a < rows and 0 <= b < cols):
            raise ValueError("endpoint outside the weight field")
    da, db = a1 - a0, b1 - b0
    if da < 0 or db < 0:
        raise ValueError("end must lie northeast of start")
    if math.comb(da + db, da) > max_paths:
        raise ValueError("too many paths for brute force enumeration")
    vals = weights.values
    best = -math.inf

    def walk(a, b, acc):
        nonlocal best
        acc += vals[a, b]
        if a == a1 and b == b1:
            if acc > best:
                best = acc
            return
        if a < a1:
            walk(a + 1, b, acc)
        if b < b1:
            walk(a, b + 1, acc)

    walk(a0, b0, 0.0)
    return best


def shape_function(x: tuple[float, float]) -> float:
    """Limit shape g(x) = (sqrt|x1| + sqrt|x2|)^2 for x in the closed third quadrant."""
    x1, x2 = float(x[0]), float(x[1])
    if x1 > 0 or x2 > 0:
        raise ValueError("shape function is defined for directions with x <= 0")
    return (math.sqrt(-x1) + math.sqrt(-x2)) ** 2


def walk_to_corner(gvalues: np.ndarray, a: int, b: int,
                   max_steps: int | None = None) -> tuple[np.ndarray, bool]:
    """Follow maximal predecessors from (a, b) toward (0, 0).

    Steps by -e1 when the west predecessor is strictly larger, by -e2
    otherwise (ties go to -e2, and so does the comparison against the
    corner's missing neighbor).  Returns (step codes, truncated flag).
    """
    steps = []
    budget = math.inf if max_steps is None else max_steps
    while (a > 0 or b > 0) and len(steps) < budget:
        if b == 0:
            code = STEP_E1
        elif a == 0:
            code = STEP_E2
        elif gvalues[a - 1, b] > gvalues[a, b - 1]:
            code = STEP_E1
        else:
            code = STEP_E2
        if code == STEP_E1:
            a -= 1
        else:
            b -= 1
        steps.append(code)
    truncated = a > 0 or b > 0
    return np.asarray(steps, dtype=np.int8), truncated


def backtrack_geodesic(table: GTable, target: tuple[int, int],
                       max_steps: int | None = None) -> GeodesicPath:
    """The maximizing path from target back to the table origin.

    The recorded weight sum along the path equals table.at(target).
    """
    a = target[0] - table.origin[0]
    b = target[1] - table.origin[1]
    if a < 0 or b < 0 or a >= table.values.shape[0] or b >= table.values.shape[1]:
        raise ValueError("target outside table")
    steps, truncated = walk_to_corner(table.values, a, b, max_steps)
    return GeodesicPath(target, steps, truncated)


def _halfplane_level(g_prev: np.ndarray, row: np.ndarray) -> np.ndarray:
    """One level of the strip recursion: G_t[k] = max_{j<=k} (G_{t-1}[j] + sum row[j..k])."""
    csum = np.cumsum(row)
    return csum + np.maximum.accumulate(g_prev - (csum - row))


def stationary_halfplane_lpp(initial: MultiConfig, weights: WeightField) -> list[MultiConfig]:
    """Half-plane passage times grown from level-0 increment data.

    initial holds one increment window per line on level 0; weights holds
    the bulk levels, with weights.origin = (initial.offset, 1) and shape
    (window length, number of levels).  Entry t of the result carries the
    level-t increments of each line's passage times, where paths may enter
    the bulk at any window column j <= k.  The window's west column is
    pinned to 0 at every level, which makes one level exactly a departure
    map applied with an empty queue at the west edge; iterating levels
    therefore reproduces iterated coupled departures.
    """
    if weights.origin != (initial.offset, 1):
        raise ValueError(
            "weights must start at (initial.offset, 1); got origin "
            f"{weights.origin} for offset {initial.offset}"
        )
    length, levels = weights.values.shape
    if length != initial.length:
        raise ValueError("weight field and initial window lengths differ")
    if length == 0:
        raise ValueError("empty window")
    means = initial.values.mean(axis=1)
    if np.any(means <= 1.0):
        warnings.warn("initial increments should have Cesaro mean above the bulk mean 1")
    out = [initial]
    g = np.cumsum(initial.values, axis=1)
    for t in range(1, levels + 1):
        row = weights.values[:, t - 1]
        g = np.vstack([_halfplane_level(g[i], row) for i in range(g.shape[0])])
        incr = np.diff(g, axis=1, prepend=0.0)
        out.append(MultiConfig(initial.offset, incr, rates=initial.rates))
    return out
