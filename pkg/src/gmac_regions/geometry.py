"""Split-rate polytopes and their two-dimensional projections.

A :class:`SplitRatePolytope` constrains the four split rates
``(R12, R13, R21, R23)``; projecting it onto ``R1 = R12 + R13`` and
``R2 = R21 + R23`` gives a down-closed convex :class:`RateRegion2D`, stored by
its upper-right (Pareto) boundary.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

SPLIT_VARIABLES = ("R12", "R13", "R21", "R23")
DEFAULT_TOL = 1e-9

# user swap: R12 <-> R21, R13 <-> R23
_SWAP = (2, 3, 0, 1)


class UnboundedRegionError(ValueError):
    pass


@dataclass(frozen=True)
class SplitRatePolytope:
    """Linear constraints ``a . (R12, R13, R21, R23) <= b`` plus nonnegativity."""

    constraints: tuple[tuple[tuple[float, float, float, float], float], ...]

    def __post_init__(self):
        rows = []
        for coeffs, bound in self.constraints:
            coeffs = tuple(float(c) for c in coeffs)
            if len(coeffs) != 4:
                raise ValueError(f"expected 4 coefficients, got {len(coeffs)}")
            if any(c < 0 or not math.isfinite(c) for c in coeffs):
                raise ValueError(f"coefficients must be finite and nonnegative: {coeffs}")
            rows.append((coeffs, float(bound)))
        object.__setattr__(self, "constraints", tuple(rows))

    @classmethod
    def from_arrays(cls, A, b) -> "SplitRatePolytope":
        A = np.asarray(A, dtype=float).reshape(-1, 4)
        b = np.asarray(b, dtype=float).reshape(-1)
        return cls(tuple((tuple(row), bound) for row, bound in zip(A, b)))

    @classmethod
    def theorem1(cls, b12, b21, b13, b23, b13_23, b_sum) -> "SplitRatePolytope":
        """The six-constraint shape shared by the discrete and Gaussian regions."""
        return cls((
            ((1, 0, 0, 0), b12),
            ((0, 0, 1, 0), b21),
            ((0, 1, 0, 0), b13),
            ((0, 0, 0, 1), b23),
            ((0, 1, 0, 1), b13_23),
            ((1, 1, 1, 1), b_sum),
        ))

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.constraints:
            return np.zeros((0, 4)), np.zeros(0)
        A = np.array([c for c, _ in self.constraints], dtype=float)
        b = np.array([bd for _, bd in self.constraints], dtype=float)
        return A, b

    def swap_users(self) -> "SplitRatePolytope":
        return SplitRatePolytope(tuple(
            (tuple(coeffs[i] for i in _SWAP), bound) for coeffs, bound in self.constraints
        ))

    def with_bound(self, index: int, bound: float) -> "SplitRatePolytope":
        rows = list(self.constraints)
        rows[index] = (rows[index][0], float(bound))
        return SplitRatePolytope(tuple(rows))

    def is_bounded(self) -> bool:
        A, b = self.arrays()
        finite = np.isfinite(b)
        return bool(np.all((A[finite] > 0).any(axis=0))) if finite.any() else False


# ---------------------------------------------------------------------------
# Pareto boundaries

def _pareto_chain(points: np.ndarray, tol: float) -> np.ndarray:
    """Upper-right concave chain of a point cloud, from the R2 axis to the R1 axis."""
    if points.size == 0:
        return np.zeros((1, 2))
    pts = np.clip(points, 0.0, None)
    xmax = float(pts[:, 0].max())
    ymax = float(pts[:, 1].max())
    if xmax <= tol and ymax <= tol:
        return np.zeros((1, 2))

    # Pareto-maximal points: sweep by decreasing R1, keep strict R2 improvements
    order = np.lexsort((-pts[:, 1], -pts[:, 0]))
    pts = pts[order]
    best = np.maximum.accumulate(pts[:, 1])
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = pts[1:, 1] > best[:-1] + tol
    front = pts[keep][::-1]

    hull: list[tuple[float, float]] = []
    for x, y in front:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
            scale = max(1.0, abs(x - x1) + abs(y - y1))
            if cross >= -tol * scale:
                hull.pop()
            else:
                break
        hull.append((float(x), float(y)))

    if hull[0][0] > tol:
        hull.insert(0, (0.0, hull[0][1]))
    if hull[-1][1] > tol:
        hull.append((hull[-1][0], 0.0))
    out = [hull[0]]
    for v in hull[1:]:
        if abs(v[0] - out[-1][0]) > tol or abs(v[1] - out[-1][1]) > tol:
            out.append(v)
    return np.array(out, dtype=float)


@dataclass(frozen=True, eq=False)
class RateRegion2D:
    """Down-closed convex region in the ``(R1, R2)`` plane.

    ``vertices`` runs from ``(0, R2max)`` to ``(R1max, 0)`` with ``R1``
    nondecreasing and ``R2`` nonincreasing. The origin-only region is the
    single vertex ``(0, 0)``.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(-1, 2)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]] | np.ndarray,
                    tol: float = DEFAULT_TOL) -> "RateRegion2D":
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        if pts.size and not np.all(np.isfinite(pts)):
            raise ValueError("region points must be finite")
        return cls(_pareto_chain(pts, tol))

    @classmethod
    def origin(cls) -> "RateRegion2D":
        return cls(np.zeros((1, 2)))

    @classmethod
    def pentagon(cls, r1_max: float, r2_max: float, sum_max: float) -> "RateRegion2D":
        """``{R1 <= r1_max, R2 <= r2_max, R1 + R2 <= sum_max}`` in the positive quadrant."""
        h1, h2, h12 = max(r1_max, 0.0), max(r2_max, 0.0), max(sum_max, 0.0)
        a1 = min(h1, h12)
        b2 = min(h2, h12)
        return cls.from_points([(a1, min(h2, h12 - a1)), (min(h1, h12 - b2), b2)])

    @property
    def r1_max(self) -> float:
        return float(self.vertices[-1, 0])

    @property
    def r2_max(self) -> float:
        return float(self.vertices[0, 1])

    def polygon(self) -> np.ndarray:
        """Closed-region vertex list: origin followed by the boundary chain."""
        v = self.vertices
        if len(v) == 1 and not v.any():
            return v.copy()
        return np.vstack([np.zeros((1, 2)), v])

    def weighted_max(self, mu: float) -> float:
        return float(np.max(mu * self.vertices[:, 0] + (1.0 - mu) * self.vertices[:, 1]))

    def max_sum_rate(self) -> float:
        return float(np.max(self.vertices.sum(axis=1)))

    def swap_users(self) -> "RateRegion2D":
        return RateRegion2D.from_points(self.vertices[:, ::-1])

    def _halfplanes(self) -> tuple[np.ndarray, np.ndarray]:
        v = self.vertices
        normals = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]
        offsets = [self.r1_max, self.r2_max, 0.0, 0.0]
        for p, q in zip(v[:-1], v[1:]):
            d = q - p
            length = math.hypot(*d)
            if length == 0:
                continue
            n = np.array([-d[1], d[0]]) / length
            normals.append(tuple(n))
            offsets.append(float(n @ p))
        return np.array(normals), np.array(offsets)

    def contains_point(self, point: Sequence[float], tol: float = DEFAULT_TOL) -> bool:
        N, c = self._halfplanes()
        return bool(np.all(N @ np.asarray(point, dtype=float) <= c + tol))

    def distance_to(self, point: Sequence[float]) -> float:
        p = np.asarray(point, dtype=float)
        if self.contains_point(p, tol=0.0):
            return 0.0
        poly = self.polygon()
        if len(poly) == 1:
            return float(np.hypot(*(p - poly[0])))
        ring = np.vstack([poly, poly[:1]])
        return min(_segment_distance(p, a, b) for a, b in zip(ring[:-1], ring[1:]))

    def to_dict(self) -> dict:
        return {"vertices": [[float(x), float(y)] for x, y in self.vertices]}

    @classmethod
    def from_dict(cls, data: dict) -> "RateRegion2D":
        return cls.from_points(data["vertices"])

    def __repr__(self) -> str:
        pts = ", ".join(f"({x:.4g}, {y:.4g})" for x, y in self.vertices)
        return f"RateRegion2D[{pts}]"


def _segment_distance(p, a, b) -> float:
    d = b - a
    denom = float(d @ d)
    t = 0.0 if denom == 0 else min(1.0, max(0.0, float((p - a) @ d) / denom))
    return float(np.hypot(*(p - (a + t * d))))


def region_contains(outer: RateRegion2D, inner: RateRegion2D, tol: float = DEFAULT_TOL) -> bool:
    """True iff every vertex of ``inner`` lies in ``outer`` up to ``tol``."""
    return all(outer.contains_point(v, tol) for v in inner.vertices)


def region_excess(outer: RateRegion2D, inner: RateRegion2D) -> float:
    """Largest distance from a vertex of ``inner`` to ``outer`` (0 when contained)."""
    return max(outer.distance_to(v) for v in inner.polygon())


def hausdorff_distance(a: RateRegion2D, b: RateRegion2D) -> float:
    # for convex sets the sup of the distance function is attained at a vertex
    return max(region_excess(a, b), region_excess(b, a))


def convex_union(regions: Sequence[RateRegion2D], tol: float = DEFAULT_TOL) -> RateRegion2D:
    """Convex hull of the union of regions (time sharing between them)."""
    regions = list(regions)
    if not regions:
        raise ValueError("convex_union needs at least one region")
    return RateRegion2D.from_points(np.vstack([r.vertices for r in regions]), tol)


# ---------------------------------------------------------------------------
# Fourier-Motzkin elimination

def _prune(A: np.ndarray, b: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Drop trivial rows and keep only the tightest copy of parallel rows."""
    scale = np.abs(A).max(axis=1)
    trivial = scale <= tol
    if np.any(trivial & (b < -tol)):
        raise _Infeasible
    A, b, scale = A[~trivial], b[~trivial], scale[~trivial]
    if len(A) == 0:
        return A, b
    A = A / scale[:, None]
    b = b / scale
    key = np.round(A / tol) * tol if tol > 0 else A
    best: dict[tuple, int] = {}
    for i, row in enumerate(map(tuple, key)):
        j = best.get(row)
        if j is None or b[i] < b[j]:
            best[row] = i
    idx = sorted(best.values())
    return A[idx], b[idx]


class _Infeasible(Exception):
    pass


def fourier_motzkin(A: np.ndarray, b: np.ndarray, col: int,
                    tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Eliminate variable ``col`` from ``A x <= b``; returns the reduced system."""
    a = A[:, col]
    pos = np.flatnonzero(a > tol)
    neg = np.flatnonzero(a < -tol)
    zero = np.flatnonzero(np.abs(a) <= tol)
    rows = [A[zero]]
    rhs = [b[zero]]
    if len(pos) and len(neg):
        P = A[pos] / a[pos, None]
        bp = b[pos] / a[pos]
        Ng = A[neg] / -a[neg, None]
        bn = b[neg] / -a[neg]
        rows.append((P[:, None, :] + Ng[None, :, :]).reshape(-1, A.shape[1]))
        rhs.append((bp[:, None] + bn[None, :]).reshape(-1))
    A2 = np.delete(np.vstack(rows), col, axis=1)
    b2 = np.concatenate(rhs)
    return _prune(A2, b2, tol)


def _vertices_2d(A: np.ndarray, b: np.ndarray, tol: float) -> np.ndarray:
    pts = [np.zeros(2)]
    for i, j in itertools.combinations(range(len(A)), 2):
        M = A[[i, j]]
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        if abs(det) <= 1e-14:
            continue
        x = np.linalg.solve(M, b[[i, j]])
        if np.all(A @ x <= b + tol * (1.0 + np.abs(b))):
            pts.append(x)
    return np.array(pts)


def project_to_r1_r2(p: SplitRatePolytope, tol: float = DEFAULT_TOL) -> RateRegion2D:
    """Exact projection of a split-rate polytope onto ``(R1, R2)``.

    Substitutes ``R13 = R1 - R12`` and ``R23 = R2 - R21`` and eliminates
    ``R12`` then ``R21`` by Fourier-Motzkin, pruning redundant rows after each
    step. Infinite bounds are dropped; an infeasible system (some negative
    bound) yields the origin-only region.
    """
    A, b = p.arrays()
    keep = np.isfinite(b)
    if np.any(np.isnan(b)):
        raise ValueError("constraint bound is NaN")
    A, b = A[keep], b[keep]
    if len(A) == 0 or not np.all((A > 0).any(axis=0)):
        raise UnboundedRegionError("unbounded region: some split rate is unconstrained")
    if np.any(b < 0):
        return RateRegion2D.origin()

    # columns: R1, R2, R12, R21
    T = np.column_stack([A[:, 1], A[:, 3], A[:, 0] - A[:, 1], A[:, 2] - A[:, 3]])
    nonneg = np.array([
        [0, 0, -1, 0],   # R12 >= 0
        [-1, 0, 1, 0],   # R13 >= 0
        [0, 0, 0, -1],   # R21 >= 0
        [0, -1, 0, 1],   # R23 >= 0
        [-1, 0, 0, 0],
        [0, -1, 0, 0],
    ], dtype=float)
    M = np.vstack([T, nonneg])
    rhs = np.concatenate([b, np.zeros(len(nonneg))])
    try:
        M, rhs = _prune(M, rhs, 1e-12)
        M, rhs = fourier_motzkin(M, rhs, 2)
        M, rhs = fourier_motzkin(M, rhs, 2)
    except _Infeasible:
        return RateRegion2D.origin()
    return RateRegion2D.from_points(_vertices_2d(M, rhs, tol), tol)


def pentagon_bounds(b12, b21, b13, b23, b13_23, b_sum):
    """Closed-form projection of the six-constraint shape (vectorised).

    The box on ``(R12, R21)`` plus the polymatroid on ``(R13, R23)``, cut by
    the total-rate bound, is again a polymatroid; its rank function gives the
    pentagon ``R1 <= h1, R2 <= h2, R1 + R2 <= h12``. Inputs must already be
    clamped at zero.
    """
    g1 = np.minimum(b13, b13_23)
    g2 = np.minimum(b23, b13_23)
    g12 = np.minimum(b13_23, b13 + b23)
    h1 = np.minimum(b12 + g1, b_sum)
    h2 = np.minimum(b21 + g2, b_sum)
    h12 = np.minimum(b12 + b21 + g12, b_sum)
    return h1, h2, h12


def pentagon_corners(h1, h2, h12):
    """The two Pareto corners of ``{R1<=h1, R2<=h2, R1+R2<=h12}`` (vectorised)."""
    h12 = np.minimum(h12, h1 + h2)
    a1 = np.minimum(h1, h12)
    a2 = np.minimum(h2, h12 - a1)
    b2 = np.minimum(h2, h12)
    b1 = np.minimum(h1, h12 - b2)
    return (a1, a2), (b1, b2)
