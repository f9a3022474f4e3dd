"""Boundary tracing of parameter-union regions by weighted-sum maximisation.

For each weight ``mu`` the engine maximises ``mu R1 + (1-mu) R2`` over a
parameter grid, then refines around the winner on shrinking local grids.
The reported region is the convex hull of every initial candidate's
pentagon corners plus the exact projected region of every refinement
winner, so adding samples or refinement levels can only grow it.

Work is split into fixed-size chunks and reduced in chunk order, which
keeps results bitwise identical for any worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import Executor, ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .gaussian import (CodingParams, GaussianChannel, ModelPreconditionError,
                       eta_min, prop1_pentagon_arrays, prop1_region, prop2_arrays,
                       prop2_region, prop3_arrays, prop3_region, remove_common_state)
from .geometry import (RateRegion2D, _pareto_chain, convex_union, pentagon_bounds,
                       pentagon_corners, project_to_r1_r2, region_excess)

MODEL_AXES = {
    "prop1": ("rho1", "rho2", "f1", "f2"),
    "prop2": ("rho1", "rho2", "f1", "f2", "eta1", "eta2", "a1", "a2", "a13", "a23"),
    "prop3": ("rho1", "rho2", "a13", "f2"),
}
WORKERS_ENV = "GMAC_REGIONS_WORKERS"

# Parameter patterns of the four-case decomposition, on the sweep axes.
# f = 1 puts all power in the cooperative layer (P'' = 0), f = 0 the reverse.
FOUR_CASES = {
    "case1": {"f1": 1.0, "f2": 1.0, "a13": 0.0, "a23": 0.0},
    "case2": {"f1": 0.0, "f2": 0.0, "a1": 0.0, "a2": 0.0, "rho1": 0.0, "rho2": 0.0},
    "case3": {"f1": 1.0, "f2": 0.0, "a13": 0.0, "a2": 0.0},
    "case4": {"f1": 0.0, "f2": 1.0, "a1": 0.0, "a23": 0.0},
}


@dataclass(frozen=True)
class SweepSpec:
    """Grid densities, refinement and weights for one boundary trace.

    ``fixed`` pins axes to constants (removing them from the grid);
    ``alpha_cap`` defaults to twice the total-power Costa coefficient.
    """

    rho_points: int = 9
    eta_points: int = 9
    split_points: int = 5
    alpha_points: int = 9
    refine_depth: int = 3
    shrink: float = 3.0
    weights: int = 33
    max_grid_points: int = 200_000
    chunk_size: int = 8192
    alpha_cap: float | None = None
    seed: int = 0
    fixed: Mapping[str, float] = field(default_factory=dict)
    zero_corrections: bool = False

    def __post_init__(self):
        for name in ("rho_points", "eta_points", "split_points", "alpha_points"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be >= 2")
        if self.refine_depth < 0 or self.weights < 1 or self.shrink <= 1:
            raise ValueError("refine_depth >= 0, weights >= 1 and shrink > 1 required")
        if self.max_grid_points < 1 or self.chunk_size < 1:
            raise ValueError("max_grid_points and chunk_size must be positive")
        object.__setattr__(self, "fixed", dict(sorted(dict(self.fixed).items())))

    def with_(self, **kw) -> "SweepSpec":
        return replace(self, **kw)

    def mus(self) -> np.ndarray:
        if self.weights == 1:
            return np.array([0.5])
        return np.linspace(0.0, 1.0, self.weights)


def alpha_cap(ch: GaussianChannel) -> float:
    s = ch.total_signal_power()
    return 2.0 * s / (s + ch.n3)


@dataclass(frozen=True)
class _Problem:
    """Everything a worker needs; picklable."""

    model: str
    ch: GaussianChannel
    axes: tuple[str, ...]          # free axes, in canonical order
    fixed: tuple[tuple[str, float], ...]
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    zero_corrections: bool

    def full(self, P: np.ndarray) -> dict[str, np.ndarray]:
        cols = {a: P[:, i] for i, a in enumerate(self.axes)}
        for a, v in self.fixed:
            cols[a] = np.full(P.shape[0], float(v))
        return cols


def _axis_range(model: str, axis: str, ch: GaussianChannel, cap: float) -> tuple[float, float]:
    if axis.startswith(("rho", "f")):
        return 0.0, 1.0
    if axis == "eta1":
        return eta_min(ch.p1, ch.q1), 1.0
    if axis == "eta2":
        return eta_min(ch.p2, ch.q2), 1.0
    return 0.0, cap


def _axis_points(spec: SweepSpec, axis: str) -> int:
    if axis.startswith("rho"):
        return spec.rho_points
    if axis.startswith("eta"):
        return spec.eta_points
    if axis.startswith("f"):
        return spec.split_points
    return spec.alpha_points


def _problem(ch: GaussianChannel, spec: SweepSpec, model: str) -> tuple[_Problem, list[np.ndarray]]:
    if model not in MODEL_AXES:
        raise ValueError(f"unknown sweep model {model!r}")
    if model == "prop1":
        if ch.q1 != 0 or ch.q2 != 0:
            raise ModelPreconditionError("prop1 sweep requires q1 = q2 = 0")
    elif model == "prop2":
        ch = remove_common_state(ch)
        if math.isinf(ch.q1) or math.isinf(ch.q2):
            raise ModelPreconditionError("infinite private state: use the prop3 model")
    elif model == "prop3" and not math.isinf(ch.q1):
        raise ModelPreconditionError("prop3 needs q1 = inf; for a finite q1 use prop2")
    cap = spec.alpha_cap if spec.alpha_cap is not None else alpha_cap(ch)
    all_axes = MODEL_AXES[model]
    unknown = set(spec.fixed) - set(all_axes)
    if unknown:
        raise ValueError(f"fixed axes {sorted(unknown)} not in {model} axes {all_axes}")
    free = tuple(a for a in all_axes if a not in spec.fixed)
    ranges = [_axis_range(model, a, ch, cap) for a in free]
    grids = [np.linspace(lo, hi, _axis_points(spec, a)) if hi > lo else np.array([lo])
             for a, (lo, hi) in zip(free, ranges)]
    prob = _Problem(model, ch, free, tuple(spec.fixed.items()),
                    tuple(r[0] for r in ranges), tuple(r[1] for r in ranges),
                    spec.zero_corrections)
    return prob, grids


def _canonical(prob: _Problem, P: np.ndarray) -> np.ndarray:
    """Zero the coefficient of any layer that carries no power."""
    P = P.copy()
    idx = {a: i for i, a in enumerate(prob.axes)}
    c = prob.full(P)
    if prob.model == "prop2":
        for k in (1, 2):
            live = (1 - c[f"rho{k}"]) * c[f"eta{k}"]
            if f"a{k}" in idx:
                P[:, idx[f"a{k}"]] = np.where(live * c[f"f{k}"] > 0, P[:, idx[f"a{k}"]], 0.0)
            if f"a{k}3" in idx:
                P[:, idx[f"a{k}3"]] = np.where(live * (1 - c[f"f{k}"]) > 0,
                                               P[:, idx[f"a{k}3"]], 0.0)
    elif prob.model == "prop3" and "a13" in idx:
        P[:, idx["a13"]] = np.where(c["rho1"] < 1, P[:, idx["a13"]], 0.0)
    return P


def _pentagons(prob: _Problem, P: np.ndarray):
    """``(h1, h2, h12)`` for each row of the parameter matrix."""
    ch, c = prob.ch, prob.full(P)
    if prob.model == "prop1":
        return prop1_pentagon_arrays(ch, c["rho1"], c["rho2"], c["f1"] * ch.p1, c["f2"] * ch.p2,
                                     (1 - c["f1"]) * ch.p1, (1 - c["f2"]) * ch.p2)
    if prob.model == "prop3":
        r2, s = prop3_arrays(ch.p1, ch.p2, ch.n1, ch.n3, c["rho1"], c["rho2"], c["a13"],
                             c["f2"] * ch.p2, (1 - c["f2"]) * ch.p2)
        return s, r2, s
    t = prop2_arrays(ch.p1, ch.p2, ch.n1, ch.n2, ch.n3, ch.q1, ch.q2,
                     c["rho1"], c["rho2"], c["f1"] * ch.p1, c["f2"] * ch.p2,
                     (1 - c["f1"]) * ch.p1, (1 - c["f2"]) * ch.p2,
                     c["eta1"], c["eta2"], c["a1"], c["a2"], c["a13"], c["a23"],
                     zero_corrections=prob.zero_corrections)
    return pentagon_bounds(t["b12"], t["b21"], t["b13"], t["b23"], t["b13_23"], t["b_sum"])


def coding_params(prob_or_model, ch: GaussianChannel, vector: Mapping[str, float]) -> CodingParams:
    """Map sweep-axis values to the coding parameters they stand for."""
    g = dict(vector)
    f1, f2 = g.get("f1", 1.0), g.get("f2", 1.0)
    kw = dict(rho1=g.get("rho1", 0.0), rho2=g.get("rho2", 0.0),
              pp1=f1 * ch.p1, ppp1=(1 - f1) * ch.p1, pp2=f2 * ch.p2, ppp2=(1 - f2) * ch.p2,
              eta1=g.get("eta1", 1.0), eta2=g.get("eta2", 1.0),
              a1=g.get("a1", 0.0), a2=g.get("a2", 0.0),
              a13=g.get("a13", 0.0), a23=g.get("a23", 0.0))
    if prob_or_model == "prop3":
        kw.update(pp1=0.0, ppp1=0.0)
    return CodingParams(**kw)


def closed_form_region(model: str, ch: GaussianChannel, cp: CodingParams,
                       zero_corrections: bool = False) -> RateRegion2D:
    """Exact per-parameter region through the split-rate projection."""
    if model == "prop1":
        return project_to_r1_r2(prop1_region(ch, cp))
    if model == "prop3":
        return project_to_r1_r2(prop3_region(ch, cp))
    return project_to_r1_r2(prop2_region(remove_common_state(ch), cp, zero_corrections))


# ---------------------------------------------------------------------------
# Chunk evaluation (worker side)

def _unique_rows(P: np.ndarray) -> np.ndarray:
    """Distinct rows in lexicographic order."""
    if len(P) == 0:
        return P
    P = P[np.lexsort(P.T[::-1])]
    keep = np.ones(len(P), dtype=bool)
    keep[1:] = np.any(P[1:] != P[:-1], axis=1)
    return P[keep]


def _best_per_mu(P: np.ndarray, A: tuple, B: tuple, mus: np.ndarray):
    """Per-weight best value, point and row index, ties to the smallest row."""
    va = mus[None, :] * A[0][:, None] + (1 - mus[None, :]) * A[1][:, None]
    vb = mus[None, :] * B[0][:, None] + (1 - mus[None, :]) * B[1][:, None]
    use_b = vb > va
    val = np.where(use_b, vb, va)
    best = val.max(axis=0)
    order = np.lexsort(P.T[::-1])          # lexicographic row order
    rank = np.empty(len(order), dtype=np.int64)
    rank[order] = np.arange(len(order))
    rows = np.empty(len(mus), dtype=np.int64)
    pts = np.empty((len(mus), 2))
    for j in range(len(mus)):
        hit = np.flatnonzero(val[:, j] == best[j])
        i = hit[np.argmin(rank[hit])]
        rows[j] = i
        pts[j] = (B[0][i], B[1][i]) if use_b[i, j] else (A[0][i], A[1][i])
    return best, pts, rows


def _eval_chunk(task):
    prob, P, mus = task
    P = _canonical(prob, P)
    h1, h2, h12 = _pentagons(prob, P)
    A, B = pentagon_corners(h1, h2, h12)
    best, pts, rows = _best_per_mu(P, A, B, mus)
    corners = np.concatenate([np.column_stack(A), np.column_stack(B)])
    hull = _pareto_chain(corners, 1e-12)
    return best, pts, P[rows], hull, len(P)


def _refine_one(task):
    """Local-grid hill climb for one weight; returns the winner after each level."""
    prob, start, value, point, mu, steps, depth, shrink = task
    d = len(start)
    offsets = np.array(np.meshgrid(*([(-1.0, 0.0, 1.0)] * d), indexing="ij")).reshape(d, -1).T
    lo, hi = np.array(prob.lo), np.array(prob.hi)
    center, best, best_pt = np.array(start, float), value, np.array(point, float)
    path, evaluated = [], 0
    mus = np.array([mu])
    for level in range(1, depth + 1):
        h = np.asarray(steps) / shrink ** level
        P = np.clip(center[None, :] + offsets * h[None, :], lo, hi)
        P = _unique_rows(_canonical(prob, P))
        h1, h2, h12 = _pentagons(prob, P)
        A, B = pentagon_corners(h1, h2, h12)
        b, pts, rows = _best_per_mu(P, A, B, mus)
        evaluated += len(P)
        cand = P[rows[0]]
        if b[0] > best or (b[0] == best and tuple(cand) < tuple(center)):
            center, best, best_pt = cand, b[0], pts[0]
        path.append(center.copy())
    return center, best, best_pt, np.array(path).reshape(-1, d), evaluated


# ---------------------------------------------------------------------------
# Executor handling

def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        workers = int(env) if env else 1
    if workers < 1:
        raise ValueError("worker count must be >= 1")
    return workers


@contextmanager
def make_executor(workers: int | None = None) -> Iterator[Executor | None]:
    """A process pool for ``workers > 1``; ``None`` (serial) otherwise."""
    n = resolve_workers(workers)
    if n == 1:
        yield None
        return
    import multiprocessing as mp
    with ProcessPoolExecutor(max_workers=n, mp_context=mp.get_context("fork")) as ex:
        yield ex


def _map(executor: Executor | None, fn, tasks: list) -> list:
    if executor is None:
        return [fn(t) for t in tasks]
    return list(executor.map(fn, tasks))


# ---------------------------------------------------------------------------
# Tracing

@dataclass(frozen=True)
class TraceResult:
    model: str
    channel: GaussianChannel
    axes: tuple[str, ...]
    fixed: Mapping[str, float]
    mus: np.ndarray
    winners: np.ndarray       # final winner per weight (free axes)
    points: np.ndarray        # winning (R1, R2) per weight
    values: np.ndarray
    path: np.ndarray          # every level winner, all weights
    region: RateRegion2D
    n_evaluated: int
    zero_corrections: bool = False

    def vector(self, row: np.ndarray) -> dict[str, float]:
        v = dict(zip(self.axes, map(float, row)))
        v.update(self.fixed)
        return v

    def winner_params(self, j: int) -> CodingParams:
        return coding_params(self.model, self.channel, self.vector(self.winners[j]))

    def winner_vectors(self) -> tuple[dict[str, float], ...]:
        return tuple(self.vector(r) for r in self.path)

    def table(self) -> tuple[list[str], list[list[float]]]:
        """Rows ``mu, axis values..., R1, R2`` for export."""
        names = list(MODEL_AXES[self.model])
        rows = []
        for j, mu in enumerate(self.mus):
            v = self.vector(self.winners[j])
            rows.append([float(mu)] + [v[a] for a in names] + list(map(float, self.points[j])))
        return ["mu"] + names + ["R1", "R2"], rows


def _initial_candidates(grids: list[np.ndarray], spec: SweepSpec) -> np.ndarray:
    sizes = [len(g) for g in grids]
    total = math.prod(sizes)
    if total <= spec.max_grid_points:
        idx = np.indices(sizes).reshape(len(sizes), -1).T
    else:
        rng = np.random.default_rng(spec.seed)
        idx = np.column_stack([rng.integers(0, n, spec.max_grid_points) for n in sizes])
        idx = _unique_rows(idx)
    return np.column_stack([g[idx[:, i]] for i, g in enumerate(grids)]) if grids \
        else np.zeros((1, 0))


def trace(ch: GaussianChannel, spec: SweepSpec, model: str, executor: Executor | None = None,
          seed_vectors: Iterable[Mapping[str, float]] = (), mus: Sequence[float] | None = None,
          ) -> TraceResult:
    """Trace the union region of ``model`` on ``ch`` (see module docstring)."""
    prob, grids = _problem(ch, spec, model)
    mus = np.asarray(spec.mus() if mus is None else mus, dtype=float)
    cand = _initial_candidates(grids, spec)
    extra = [[float(v[a]) for a in prob.axes] for v in seed_vectors
             if all(v.get(a) == val for a, val in prob.fixed)]
    if extra:
        cand = _unique_rows(np.concatenate([cand, np.array(extra).reshape(-1, len(prob.axes))]))
    chunks = [(prob, cand[i:i + spec.chunk_size], mus)
              for i in range(0, len(cand), spec.chunk_size)]
    results = _map(executor, _eval_chunk, chunks)

    best = np.full(len(mus), -np.inf)
    pts = np.zeros((len(mus), 2))
    win = np.zeros((len(mus), len(prob.axes)))
    hulls, n_eval = [], 0
    for b, p, w, hull, n in results:       # chunk order: deterministic reduction
        n_eval += n
        hulls.append(hull)
        for j in range(len(mus)):
            if b[j] > best[j] or (b[j] == best[j] and tuple(w[j]) < tuple(win[j])):
                best[j], pts[j], win[j] = b[j], p[j], w[j]

    steps = [(h - l) / (len(g) - 1) if len(g) > 1 else 0.0
             for l, h, g in zip(prob.lo, prob.hi, grids)]
    path = [win.copy()]
    if spec.refine_depth > 0 and len(prob.axes) > 0:
        tasks = [(prob, win[j], best[j], pts[j], float(mus[j]), steps,
                  spec.refine_depth, spec.shrink) for j in range(len(mus))]
        for j, (c, b, p, lvl, n) in enumerate(_map(executor, _refine_one, tasks)):
            win[j], best[j], pts[j] = c, b, p
            path.append(lvl)
            n_eval += n
    path = _unique_rows(np.concatenate(path))

    regions = [RateRegion2D(_pareto_chain(np.concatenate(hulls), 1e-12))]
    fixed = dict(prob.fixed)
    for row in path:
        v = dict(zip(prob.axes, map(float, row)))
        v.update(fixed)
        cp = coding_params(model, prob.ch, v)
        regions.append(closed_form_region(model, prob.ch, cp, spec.zero_corrections))
    region = convex_union(regions)
    return TraceResult(model, prob.ch, prob.axes, fixed, mus, win, pts, best, path,
                       region, n_eval, spec.zero_corrections)


def trace_boundary(ch: GaussianChannel, spec: SweepSpec, model: str,
                   executor: Executor | None = None) -> RateRegion2D:
    """Region of a union model, or of a baseline scenario (``baseline-<tag>``)."""
    if model.startswith("baseline-"):
        from .gaussian import baseline_regions
        tag = model[len("baseline-"):]
        return baseline_regions(ch, (tag,), spec, executor)[tag]
    return trace(ch, spec, model, executor).region


def _case_spec(spec: SweepSpec, case: str) -> SweepSpec:
    return spec.with_(fixed={**spec.fixed, **FOUR_CASES[case]}, zero_corrections=True)


@dataclass(frozen=True)
class FourCaseResult:
    hull: RateRegion2D
    cases: Mapping[str, RateRegion2D]
    unrestricted: RateRegion2D
    excess: float             # how far the unrestricted region leaves the hull

    @property
    def exceeds(self) -> bool:
        return self.excess > 1e-3


def four_case_hull(ch: GaussianChannel, spec: SweepSpec,
                   executor: Executor | None = None) -> FourCaseResult:
    """Convex hull of the four restricted patterns, compared with the full sweep."""
    traces = {c: trace(ch, _case_spec(spec, c), "prop2", executor) for c in FOUR_CASES}
    cases = {c: t.region for c, t in traces.items()}
    hull = convex_union(list(cases.values()))
    seeds = [v for t in traces.values() for v in t.winner_vectors()]
    full = trace(ch, spec, "prop2", executor, seed_vectors=seeds).region
    return FourCaseResult(hull, cases, full, region_excess(hull, full))


SIR_STRATEGIES = ("gdpc", "full-cooperation", "no-cooperation")


@dataclass(frozen=True)
class SirTable:
    sir_db: tuple[float, ...]
    rows: tuple[tuple[float, ...], ...]     # per SIR: one sum-rate per strategy
    monotone: bool

    def column(self, strategy: str) -> np.ndarray:
        return np.array([r[SIR_STRATEGIES.index(strategy)] for r in self.rows])


def sum_rate_vs_sir(template: GaussianChannel, sir_range_db: Sequence[float], spec: SweepSpec,
                    executor: Executor | None = None) -> SirTable:
    """Maximum sum-rate for ``Q1 = Q2 = P / 10^(SIR/10)`` per strategy.

    ``monotone`` reports whether the unrestricted curve never rises as the
    SIR drops (within 1e-9 bits).
    """
    if not math.isclose(template.p1, template.p2, rel_tol=1e-12):
        raise ModelPreconditionError("sum-rate vs SIR needs a symmetric channel (p1 = p2)")
    strategies = {"gdpc": spec, "full-cooperation": _case_spec(spec, "case1"),
                  "no-cooperation": _case_spec(spec, "case2")}
    rows = []
    for sir in sir_range_db:
        q = template.p1 / 10.0 ** (float(sir) / 10.0)
        ch = replace(template, q0=0.0, q1=q, q2=q)
        coop = trace(ch, strategies["full-cooperation"], "prop2", executor, mus=(0.5,))
        nocoop = trace(ch, strategies["no-cooperation"], "prop2", executor, mus=(0.5,))
        # the restricted winners are feasible for the unrestricted sweep
        seeds = coop.winner_vectors() + nocoop.winner_vectors()
        full = trace(ch, spec, "prop2", executor, seed_vectors=seeds, mus=(0.5,))
        rows.append(tuple(t.region.max_sum_rate() for t in (full, coop, nocoop)))
    order = np.argsort(np.asarray(sir_range_db, float), kind="stable")
    g = np.array([r[0] for r in rows])[order]
    monotone = bool(np.all(np.diff(g) >= -1e-9))
    return SirTable(tuple(map(float, sir_range_db)), tuple(rows), monotone)
