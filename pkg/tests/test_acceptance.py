"""Primary acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that the terminal summary prints at the
end of the run, together with the measured quantity and the runtime.
"""

from __future__ import annotations

import filecmp
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import C_40_OVER_N3, record
from gmac_regions import gaussian as g
from gmac_regions.discrete import (JointPmf, cut_set_ceiling, mutual_information,
                                   theorem1_bounds)
from gmac_regions.geometry import (RateRegion2D, SplitRatePolytope, hausdorff_distance,
                                   project_to_r1_r2, region_contains)
from gmac_regions.sweep import SweepSpec, trace
from gmac_regions.fixtures import named_fixture

ROOT = Path(__file__).resolve().parents[1]
CSIT_CH = dict(p1=10, p2=10, n1=0, n2=0, n3=7)


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


# --------------------------------------------------------------------------

def test_interference_independence():
    name = "Interference independence (Q0 in {2,5,8} dB, Hausdorff <= 1e-9, < 5 s)"

    def run():
        return [trace(g.GaussianChannel.from_db(**CSIT_CH, q0=q), SweepSpec(), "prop1").region
                for q in (2, 5, 8)]

    regions, dt = _timed(run)
    d = max(hausdorff_distance(a, b) for a in regions for b in regions)
    ok = d <= 1e-9 and dt < 5
    record(name, ok, f"max Hausdorff {d:.2e} bits in {dt:.2f} s")
    assert ok


@pytest.mark.xfail(strict=True, reason="the full-cooperation sum-rate is not a point of the "
                   "union region: at rho1 = rho2 = 1 both single-rate bounds are 0")
def test_full_cooperation_anchor(fig5_channel):
    name = "Full-cooperation anchor (max sum-rate = C(40/10^0.7) within 1e-6, < 1 s)"

    def run():
        region = trace(fig5_channel, SweepSpec(), "prop1").region
        cp = g.CodingParams.full_power(fig5_channel, 1.0, 1.0)
        s4 = g.prop1_region(fig5_channel, cp).constraints[3][1]
        return region.max_sum_rate(), s4

    (best, s4), dt = _timed(run)
    err = abs(best - C_40_OVER_N3)
    ok = err <= 1e-6 and dt < 1
    record(name, ok, f"swept max {best:.6f} vs reference {C_40_OVER_N3:.6f} "
           f"(gap {err:.3e}); the sum constraint at rho = 1 is {s4:.12f} "
           f"(|diff| {abs(s4 - C_40_OVER_N3):.1e}); {dt:.2f} s")
    assert ok


def test_orthogonality(fig5_channel):
    name = "Orthogonality (residuals < 1e-12 on 1e4 points; each +-0.05 perturbation > 1e-4, < 10 s)"
    ch = fig5_channel

    def run():
        rng = np.random.default_rng(2024)
        worst, weakest = 0.0, math.inf
        for u in rng.uniform(0, 1, (10_000, 4)):
            cp = g.optimal_dpc_coeffs(ch, g.CodingParams.full_power(ch, *u))
            worst = max(worst, max(map(abs, g.dpc_orthogonality_residuals(ch, cp))))
            for k in ("a0", "a1", "a2", "a13", "a23"):
                for d in (0.05, -0.05):
                    res = g.dpc_orthogonality_residuals(ch, cp.with_(**{k: getattr(cp, k) + d}))
                    weakest = min(weakest, max(map(abs, res)))
        return worst, weakest

    (worst, weakest), dt = _timed(run)
    ok = worst < 1e-12 and weakest > 1e-4 and dt < 10
    record(name, ok, f"max |residual| {worst:.2e}; smallest perturbed max {weakest:.3f}; {dt:.2f} s")
    assert ok


def test_mmse_entropy_oracle(fig6_channel):
    name = "MMSE entropy oracle (20 draws, 1e6 samples, within 0.02 bits, < 60 s)"
    from gmac_regions.verify import random_prop2_params

    def run():
        rng = np.random.default_rng(7)
        diffs = []
        for i in range(20):
            cp = random_prop2_params(fig6_channel, rng)
            est = g.mc_entropy_oracle(fig6_channel, cp, samples=1_000_000, seed=i)
            diffs.append(abs(est - g.y3_residual_entropy(fig6_channel, cp)))
        return max(diffs)

    worst, dt = _timed(run)
    ok = worst < 0.02 and dt < 60
    record(name, ok, f"max |MC - closed form| {worst:.4f} bits; {dt:.1f} s")
    assert ok


def test_strong_state_closed_forms():
    name = "Strong-state closed forms (max sum and max R2 within 1e-3, both branches, < 60 s)"
    spec = SweepSpec(refine_depth=6)
    cases = []
    for p1 in (10, 15):
        for n1, n3 in ((0, 10), (10, 0)):
            cases.append(g.GaussianChannel.from_db(p1=p1, p2=10, n1=n1, n2=0, n3=n3)
                         .with_(q1=math.inf))

    def run():
        out = []
        for ch in cases:
            r = trace(ch, spec, "prop3").region
            r2, branch = g.strong_state_max_r2(ch)
            out.append((abs(r.max_sum_rate() - g.strong_state_max_sum(ch)),
                        abs(r.r2_max - r2), branch))
        return out

    res, dt = _timed(run)
    e_sum = max(r[0] for r in res)
    e_r2 = max(r[1] for r in res)
    branches = sorted({r[2] for r in res})
    ok = e_sum <= 1e-3 and e_r2 <= 1e-3 and dt < 60 and len(branches) >= 3
    record(name, ok, f"sum error {e_sum:.1e}, R2 error {e_r2:.1e} over branches "
           f"{', '.join(branches)}; {dt:.1f} s")
    assert ok


def test_degeneration_chain(fig6_channel, fig7_channel):
    name = "Degeneration chain (Prop2|Q=0 = Prop1 within 1e-9; Prop3 = Prop2 at Q1=1e6 P1 within 1e-3, < 10 s)"

    def run():
        rng = np.random.default_rng(3)
        clean = fig6_channel.with_(q1=0.0, q2=0.0)
        d12 = 0.0
        for u in rng.uniform(0, 1, (300, 4)):
            cp = g.CodingParams.full_power(clean, *u)
            d12 = max(d12, hausdorff_distance(project_to_r1_r2(g.prop1_region(clean, cp)),
                                              project_to_r1_r2(g.prop2_region(clean, cp))))
        d23 = 0.0
        for r1, r2, a13, f2 in rng.uniform(0, 1, (300, 4)):
            cp = g.CodingParams(rho1=r1, rho2=r2, a13=1.6 * a13,
                                pp2=f2 * fig7_channel.p2, ppp2=(1 - f2) * fig7_channel.p2)
            d23 = max(d23, hausdorff_distance(
                project_to_r1_r2(g.prop3_region(fig7_channel, cp)),
                project_to_r1_r2(g.prop3_via_prop2(fig7_channel, cp))))
        return d12, d23

    (d12, d23), dt = _timed(run)
    ok = d12 <= 1e-9 and d23 <= 1e-3 and dt < 10
    record(name, ok, f"Prop2->Prop1 {d12:.1e}, Prop3->Prop2 {d23:.1e} bits; {dt:.2f} s")
    assert ok


def grid_oracle(b, step=0.01) -> RateRegion2D:
    """Brute-force achievable (R1, R2) set of a six-bound system on a step grid.

    ``R12, R21, R13`` are enumerated; ``R23`` takes the largest grid value
    allowed by the other three, which loses nothing since the set is
    down-closed in ``R23``.
    """
    b12, b21, b13, b23, b13_23, b_sum = b
    axis = lambda hi: np.arange(int(np.floor(hi / step + 1e-9)) + 1) * step
    r21, r13 = np.meshgrid(axis(b21), axis(b13), indexing="ij")
    r21, r13 = r21.ravel(), r13.ravel()
    best = {}
    for r12 in axis(b12):
        r23 = np.minimum.reduce([np.full_like(r13, b23), b13_23 - r13, b_sum - r12 - r13 - r21])
        r23 = np.floor(r23 / step + 1e-9) * step
        ok = r23 >= 0
        r1 = np.rint((r12 + r13[ok]) / step).astype(int)
        r2 = r21[ok] + r23[ok]
        top = np.full(r1.max() + 1 if r1.size else 0, -1.0)
        np.maximum.at(top, r1, r2)
        for i in np.nonzero(top >= 0)[0]:
            best[i] = max(best.get(i, -1.0), top[i])
    pts = [(i * step, v) for i, v in best.items()]
    return RateRegion2D.from_points(pts)


def test_fourier_motzkin_oracle():
    name = "Fourier-Motzkin oracle (50 random systems vs 0.01 grid, Hausdorff <= 0.02, < 30 s)"

    def run():
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(50):
            b = rng.uniform(0, 2, 6)
            fm = project_to_r1_r2(SplitRatePolytope.theorem1(*b))
            worst = max(worst, hausdorff_distance(fm, grid_oracle(b)))
        return worst

    worst, dt = _timed(run)
    ok = worst <= 0.02 and dt < 30
    record(name, ok, f"max Hausdorff {worst:.4f} bits; {dt:.1f} s")
    assert ok


def _entropy(p: np.ndarray, axes: tuple[int, ...]) -> float:
    drop = tuple(i for i in range(p.ndim) if i not in axes)
    m = p.sum(axis=drop).ravel()
    m = m[m > 0]
    return float(-(m * np.log2(m)).sum())


def _mi(p, a, b, c=()):
    """I(A;B|C) from entropies of the dense tensor (independent of the engine)."""
    a, b, c = (tuple(JointPmfIndex[v] for v in s) for s in (a, b, c))
    return (_entropy(p, a + c) + _entropy(p, b + c) - _entropy(p, a + b + c)
            - (_entropy(p, c) if c else 0.0))


JointPmfIndex = {v: i for i, v in enumerate(("S0", "S1", "S2", "U", "V1", "V2", "V13", "V23",
                                             "X1", "X2", "Y1", "Y2", "Y3"))}


def _xor_channel():
    ch = np.zeros((2, 2, 2))
    for x1 in range(2):
        for x2 in range(2):
            ch[x1 ^ x2, x1, x2] = 1.0
    return ch


def test_discrete_engine():
    name = ("Discrete engine (GMAC row = Willems shape; XOR cribbing sum 1.0 within 1e-9; "
            "100 pmfs under the cut-set ceiling, < 30 s)")

    def run():
        rng = np.random.default_rng(5)
        # GMAC row against independently evaluated Willems-shape terms
        gmac_err = 0.0
        for _ in range(5):
            p = named_fixture("gmac").random(rng)
            t = p.tensor
            want = (_mi(t, ["V1"], ["Y2"], ["U", "X2"]), _mi(t, ["V2"], ["Y1"], ["U", "X1"]),
                    _mi(t, ["X1"], ["Y3"], ["U", "V1", "V2", "X2"]),
                    _mi(t, ["X2"], ["Y3"], ["U", "V1", "V2", "X1"]),
                    _mi(t, ["X1", "X2"], ["Y3"], ["U", "V1", "V2"]), _mi(t, ["X1", "X2"], ["Y3"]))
            b = theorem1_bounds(p)
            pen = max(abs(b.delta1_minus), abs(b.delta2_minus), abs(b.cap_delta_minus))
            gmac_err = max(gmac_err, pen, max(abs(x - y) for x, y in zip(b.as_tuple(), want)))

        fx = named_fixture("cribbing")
        xor = _xor_channel()
        uniform = np.full((2, 2), 0.5)
        coop = fx.build({"U": np.array([1.0]), "X1|U": uniform[:, :1], "X2|U": uniform[:, :1],
                         "Y3|X1,X2": xor})
        xor_sum = theorem1_bounds(coop).region().max_sum_rate()

        ceiling = cut_set_ceiling(xor, step=0.05)
        worst = -math.inf
        for _ in range(100):
            comps = fx.random_components(rng, 2)
            comps["Y3|X1,X2"] = xor
            r = theorem1_bounds(fx.build(comps)).region()
            worst = max(worst, r.max_sum_rate() - ceiling)
        return gmac_err, xor_sum, ceiling, worst

    (gmac_err, xor_sum, ceiling, worst), dt = _timed(run)
    ok = gmac_err <= 1e-10 and abs(xor_sum - 1.0) <= 1e-9 and worst <= 1e-9 and dt < 30
    record(name, ok, f"GMAC deviation {gmac_err:.1e}; XOR sum {xor_sum:.12f}; "
           f"ceiling {ceiling:.6f}, max excess {worst:.2e}; {dt:.1f} s")
    assert ok


def test_scenario_ordering():
    name = "Scenario ordering (mac-no-csit < gmac-no-csit < gmac-csit, mac-no-csit < mac-csit < gmac-csit, < 10 s)"

    def run():
        failures = []
        for q0 in (2, 5, 8):
            r = g.baseline_regions(g.GaussianChannel.from_db(**CSIT_CH, q0=q0))
            for inner, outer in (("mac-no-csit", "gmac-no-csit"), ("gmac-no-csit", "gmac-csit"),
                                 ("mac-no-csit", "mac-csit"), ("mac-csit", "gmac-csit")):
                if not region_contains(r[outer], r[inner], tol=1e-9):
                    failures.append(f"{inner} not in {outer} at Q0={q0} dB")
        return failures

    failures, dt = _timed(run)
    ok = not failures and dt < 10
    record(name, ok, ("all 12 containments hold" if not failures else "; ".join(failures))
           + f"; {dt:.2f} s")
    assert ok


def _cli(cmd, config, out, workers):
    return subprocess.run([sys.executable, "-m", "gmac_regions.cli", cmd, "--config",
                           str(config), "--out", str(out), "--workers", str(workers)],
                          capture_output=True, text=True)


def test_determinism(tmp_path):
    name = "Determinism (verify, region, sumrate-sir byte-identical over 2 runs and workers {1, 8}, < 120 s)"
    jobs = (("verify", ROOT / "configs" / "verify.json"),
            ("region", ROOT / "configs" / "fig5.json"),
            ("sumrate-sir", ROOT / "configs" / "fig6.json"))

    def run():
        diffs, codes = [], []
        for cmd, cfg in jobs:
            outs = []
            for run_id, workers in (("a", 1), ("b", 1), ("c", 8)):
                out = tmp_path / f"{cmd}-{run_id}"
                codes.append(_cli(cmd, cfg, out, workers).returncode)
                outs.append(out)
            files = sorted(p.name for p in outs[0].iterdir())
            for other in outs[1:]:
                if sorted(p.name for p in other.iterdir()) != files:
                    diffs.append(f"{cmd}: file sets differ")
                    continue
                _, mismatch, errors = filecmp.cmpfiles(outs[0], other, files, shallow=False)
                diffs += [f"{cmd}/{f}" for f in mismatch + errors]
        return diffs, codes

    (diffs, codes), dt = _timed(run)
    ok = not diffs and set(codes) == {0} and dt < 120
    record(name, ok, ("all outputs identical" if not diffs else "differ: " + ", ".join(diffs))
           + f"; exit codes {sorted(set(codes))}; {dt:.1f} s")
    assert ok
