"""Invariant checks behind ``gmac-regions verify``.

Every check is a pure function of its options, so the report is
reproducible byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Mapping

import numpy as np

from . import gaussian as g
from .discrete import broken_markov_pmf, pmf_from_json, validate_factorization
from .geometry import (SplitRatePolytope, hausdorff_distance, pentagon_bounds,
                       pentagon_corners, project_to_r1_r2)

CSIT_CH = g.GaussianChannel.from_db(p1=10, p2=10, n1=0, n2=0, n3=7, q0=5)
DIRTY_CH = g.GaussianChannel.from_db(p1=10, p2=10, n1=0, n2=0, n3=10, q1=7, q2=7)
STRONG_CH = g.GaussianChannel.from_db(p1=10, p2=10, n1=0, n2=0, n3=10).with_(q1=math.inf)

ORTHO_TOL = 1e-12


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str
    value: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def random_prop2_params(ch: g.GaussianChannel, rng: np.random.Generator,
                        alpha_max: float = 1.5) -> g.CodingParams:
    """A full-power doubly dirty parameter draw with every layer active."""
    r1, r2 = rng.uniform(0, 0.95, 2)
    f1, f2 = rng.uniform(0.05, 0.95, 2)
    e1 = rng.uniform(g.eta_min(ch.p1, ch.q1), 1)
    e2 = rng.uniform(g.eta_min(ch.p2, ch.q2), 1)
    a = rng.uniform(0.01, alpha_max, 4)
    return g.CodingParams.full_power(ch, r1, r2, f1, f2, eta1=e1, eta2=e2,
                                     a1=a[0], a2=a[1], a13=a[2], a23=a[3])


def check_orthogonality(opts: Mapping[str, Any]) -> Check:
    rng = np.random.default_rng(opts.get("seed", 0))
    delta = float(opts.get("perturb_a0", 0.0))
    worst, at = 0.0, None
    for _ in range(int(opts.get("grid_points", 1000))):
        cp = g.CodingParams.full_power(CSIT_CH, *rng.uniform(0, 1, 4))
        cp = g.optimal_dpc_coeffs(CSIT_CH, cp)
        cp = cp.with_(a0=cp.a0 + delta)
        res = np.abs(g.dpc_orthogonality_residuals(CSIT_CH, cp))
        if res.max() >= worst:
            worst, at = float(res.max()), g.dpc_orthogonality_residuals(CSIT_CH, cp)
    detail = f"max |residual| = {worst:.3e}"
    if worst >= ORTHO_TOL:
        detail += " (residuals U,V1,V2,V13,V23 = " + ", ".join(f"{r:.6g}" for r in at) + ")"
    return Check("orthogonality", worst < ORTHO_TOL, detail, worst)


def check_printed_coefficients(opts) -> Check:
    rng = np.random.default_rng(opts.get("seed", 0) + 1)
    worst = 0.0
    for _ in range(200):
        cp = g.optimal_dpc_coeffs(CSIT_CH, g.CodingParams.full_power(CSIT_CH, *rng.uniform(0, 1, 4)))
        pc = g.printed_dpc_coeffs(CSIT_CH, cp)
        worst = max(worst, max(abs(pc[k] - getattr(cp, k)) for k in pc))
    return Check("printed-coefficients", worst < 1e-12,
                 f"max |closed form - covariance ratio| = {worst:.3e}", worst)


def check_interference_independence(opts) -> Check:
    rng = np.random.default_rng(opts.get("seed", 0) + 2)
    bad = 0
    for _ in range(200):
        cp = g.CodingParams.full_power(CSIT_CH, *rng.uniform(0, 1, 4))
        ref = g.prop1_region(CSIT_CH.with_(q0=0.0), cp).constraints
        for q0 in (10 ** 0.2, 10 ** 0.5, 10 ** 0.8, 1e6):
            bad += g.prop1_region(CSIT_CH.with_(q0=q0), cp).constraints != ref
    return Check("interference-independence", bad == 0,
                 f"{bad} bound sets differ across q0 (bitwise)", bad)


def check_mmse_ordering(opts) -> Check:
    rng = np.random.default_rng(opts.get("seed", 0) + 3)
    n = 10_000
    q = 10 ** rng.uniform(-1, 2, (n, 2))
    p = 10 ** rng.uniform(-1, 2, (n, 2))
    eta = 1 - rng.uniform(0, 1, (n, 2)) * np.minimum(1, q / p)
    f = rng.uniform(0, 1, (n, 2))
    rho = rng.uniform(0, 1, (n, 2))
    a = rng.uniform(0, 1, (n, 2))
    a3 = rng.uniform(0, 1, (n, 2)) * 2 * (1 - a)
    t = g.prop2_arrays(p[:, 0], p[:, 1], 1.0, 1.0, 1.0, q[:, 0], q[:, 1], rho[:, 0], rho[:, 1],
                       f[:, 0] * p[:, 0], f[:, 1] * p[:, 1], (1 - f[:, 0]) * p[:, 0],
                       (1 - f[:, 1]) * p[:, 1], eta[:, 0], eta[:, 1],
                       a[:, 0], a[:, 1], a3[:, 0], a3[:, 1])
    tol = 1e-12
    viol = 0
    for k in (1, 2):
        qe, qh, qd = t[f"q{k}e"], t[f"q{k}e_hat"], t[f"q{k}e_dhat"]
        rh, rd = t[f"r{k}_hat"], t[f"r{k}_dhat"]
        scale = tol * (1 + q[:, k - 1])
        viol += int(np.sum(qe > q[:, k - 1] + scale) + np.sum(qh > qe + scale)
                    + np.sum(qd > qh + scale) + np.sum(qd < -scale)
                    + np.sum(rd > rh + scale) + np.sum(rh > qe + scale))
    return Check("mmse-ordering", viol == 0, f"{viol} violations in {n} draws", viol)


def check_prop2_to_prop1(opts) -> Check:
    rng = np.random.default_rng(opts.get("seed", 0) + 4)
    ch = DIRTY_CH.with_(q1=0.0, q2=0.0)
    worst = 0.0
    for _ in range(200):
        cp = g.CodingParams.full_power(ch, *rng.uniform(0, 1, 4))
        r2 = project_to_r1_r2(g.prop2_region(ch, cp))
        r1 = project_to_r1_r2(g.prop1_region(ch, cp))
        worst = max(worst, hausdorff_distance(r1, r2))
    return Check("prop2-to-prop1", worst <= 1e-9, f"max Hausdorff = {worst:.3e}", worst)


def check_prop3_limit(opts) -> Check:
    rng = np.random.default_rng(opts.get("seed", 0) + 5)
    worst = 0.0
    for _ in range(100):
        r1, r2, f2 = rng.uniform(0, 1, 3)
        cp = g.CodingParams(rho1=r1, rho2=r2, a13=rng.uniform(0.01, 1.6),
                            pp2=f2 * STRONG_CH.p2, ppp2=(1 - f2) * STRONG_CH.p2)
        worst = max(worst, hausdorff_distance(project_to_r1_r2(g.prop3_region(STRONG_CH, cp)),
                                              project_to_r1_r2(g.prop3_via_prop2(STRONG_CH, cp))))
    return Check("prop3-limit", worst <= 1e-3,
                 f"max Hausdorff at q1 = 1e6 p1: {worst:.3e}", worst)


def check_covariance_oracle(opts) -> Check:
    rng = np.random.default_rng(opts.get("seed", 0) + 6)
    worst = 0.0
    for _ in range(10):
        cp = random_prop2_params(DIRTY_CH, rng)
        cf = g.prop2_bounds(DIRTY_CH, cp).as_tuple()
        ob = g.theorem1_bounds_gaussian(g.doubly_dirty_model(DIRTY_CH, cp)).as_tuple()
        worst = max(worst, max(abs(x - y) for x, y in zip(cf, ob)))
        cp1 = g.optimal_dpc_coeffs(CSIT_CH, g.CodingParams.full_power(CSIT_CH, *rng.uniform(0, 1, 4)))
        ob1 = g.theorem1_bounds_gaussian(g.full_csit_model(CSIT_CH, cp1)).region()
        worst = max(worst, hausdorff_distance(ob1, project_to_r1_r2(g.prop1_region(CSIT_CH, cp1))))
    return Check("closed-form-vs-covariance", worst <= 1e-9,
                 f"max deviation = {worst:.3e} bits", worst)


def check_entropy_monte_carlo(opts) -> Check:
    rng = np.random.default_rng(opts.get("seed", 0) + 7)
    cp = random_prop2_params(DIRTY_CH, rng)
    est = g.mc_entropy_oracle(DIRTY_CH, cp, samples=int(opts.get("mc_samples", 200_000)),
                              seed=int(opts.get("seed", 0)))
    diff = abs(est - g.y3_residual_entropy(DIRTY_CH, cp))
    return Check("entropy-monte-carlo", diff < 0.02, f"|MC - closed form| = {diff:.4f} bits", diff)


def check_projection(opts) -> Check:
    rng = np.random.default_rng(opts.get("seed", 0) + 8)
    worst = 0.0
    for _ in range(100):
        b = rng.uniform(0, 2, 6)
        fm = project_to_r1_r2(SplitRatePolytope.theorem1(*b))
        h = pentagon_bounds(*b)
        A, B = pentagon_corners(*h)
        from .geometry import RateRegion2D
        pent = RateRegion2D.from_points([A, B, (0, 0)])
        worst = max(worst, hausdorff_distance(fm, pent))
    return Check("projection-vs-pentagon", worst <= 1e-9, f"max Hausdorff = {worst:.3e}", worst)


def check_factorization(opts) -> Check:
    if opts.get("break_markov"):
        pmf, label = broken_markov_pmf(int(opts.get("seed", 0))), "broken-markov"
    else:
        fixture = opts.get("fixture", "cribbing-partial-csit")
        pmf, _ = pmf_from_json({"fixture": fixture, "seed": int(opts.get("seed", 0))})
        label = fixture
    v = validate_factorization(pmf)
    detail = f"{label}: " + ("admissible" if not v else "; ".join(v))
    return Check("factorization", not v, detail, len(v))


CHECKS: tuple[Callable[[Mapping[str, Any]], Check], ...] = (
    check_orthogonality,
    check_printed_coefficients,
    check_interference_independence,
    check_mmse_ordering,
    check_prop2_to_prop1,
    check_prop3_limit,
    check_covariance_oracle,
    check_entropy_monte_carlo,
    check_projection,
    check_factorization,
)


def run_checks(opts: Mapping[str, Any] | None = None) -> list[Check]:
    opts = dict(opts or {})
    return [c(opts) for c in CHECKS]
