import math

import numpy as np
import pytest
from scipy.optimize import minimize

from gmac_regions import gaussian as g
from gmac_regions.geometry import hausdorff_distance, region_contains
from gmac_regions.sweep import (FOUR_CASES, SweepSpec, alpha_cap, closed_form_region,
                                four_case_hull, make_executor, resolve_workers,
                                sum_rate_vs_sir, trace, trace_boundary)

SMALL = SweepSpec(rho_points=4, eta_points=3, split_points=3, alpha_points=4,
                  refine_depth=2, weights=9)


def test_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec(rho_points=1)
    with pytest.raises(ValueError):
        SweepSpec(shrink=1.0)
    assert list(SweepSpec(weights=1).mus()) == [0.5]
    assert SweepSpec(fixed={"b": 1, "a": 2}).fixed == {"a": 2, "b": 1}


def test_unknown_model_and_axes(fig5_channel):
    with pytest.raises(ValueError):
        trace(fig5_channel, SMALL, "prop9")
    with pytest.raises(ValueError, match="fixed axes"):
        trace(fig5_channel, SMALL.with_(fixed={"eta1": 1.0}), "prop1")


def test_model_preconditions(fig5_channel, fig6_channel):
    with pytest.raises(g.ModelPreconditionError):
        trace(fig6_channel, SMALL, "prop1")
    with pytest.raises(g.ModelPreconditionError):
        trace(fig6_channel, SMALL, "prop3")


@pytest.mark.parametrize("model", ["prop1", "prop2", "prop3"])
def test_deterministic(model, fig5_channel, fig6_channel, fig7_channel):
    ch = {"prop1": fig5_channel, "prop2": fig6_channel, "prop3": fig7_channel}[model]
    a, b = trace(ch, SMALL, model), trace(ch, SMALL, model)
    assert np.array_equal(a.region.vertices, b.region.vertices)
    assert np.array_equal(a.winners, b.winners)
    assert a.table() == b.table()


@pytest.mark.parametrize("model", ["prop1", "prop2", "prop3"])
def test_winners_are_achievable(model, fig5_channel, fig6_channel, fig7_channel):
    ch = {"prop1": fig5_channel, "prop2": fig6_channel, "prop3": fig7_channel}[model]
    tr = trace(ch, SMALL, model)
    for j, mu in enumerate(tr.mus):
        r = closed_form_region(model, tr.channel, tr.winner_params(j), tr.zero_corrections)
        assert r.weighted_max(mu) == pytest.approx(tr.values[j], abs=1e-9)
        assert r.distance_to(tr.points[j]) <= 1e-9
        assert tr.region.contains_point(tr.points[j])


def test_refinement_never_shrinks(fig6_channel):
    prev = None
    for depth in range(4):
        r = trace(fig6_channel, SMALL.with_(refine_depth=depth), "prop2").region
        if prev is not None:
            assert region_contains(r, prev, tol=1e-9)
        prev = r


def test_serial_parallel_identical(fig6_channel):
    spec = SMALL.with_(chunk_size=500)
    serial = trace(fig6_channel, spec, "prop2")
    with make_executor(3) as ex:
        parallel = trace(fig6_channel, spec, "prop2", ex)
    assert np.array_equal(serial.region.vertices, parallel.region.vertices)
    assert np.array_equal(serial.path, parallel.path)


def test_workers_from_environment(monkeypatch):
    monkeypatch.setenv("GMAC_REGIONS_WORKERS", "4")
    assert resolve_workers() == 4
    assert resolve_workers(2) == 2
    monkeypatch.delenv("GMAC_REGIONS_WORKERS")
    assert resolve_workers() == 1
    with pytest.raises(ValueError):
        resolve_workers(0)


def test_random_subsampling_is_seeded(fig6_channel):
    spec = SMALL.with_(max_grid_points=2000)
    a = trace(fig6_channel, spec, "prop2")
    b = trace(fig6_channel, spec, "prop2")
    c = trace(fig6_channel, spec.with_(seed=1), "prop2")
    assert np.array_equal(a.region.vertices, b.region.vertices)
    assert not np.array_equal(a.region.vertices, c.region.vertices)


def test_alpha_cap(fig6_channel):
    s = (math.sqrt(fig6_channel.p1) + math.sqrt(fig6_channel.p2)) ** 2
    assert alpha_cap(fig6_channel) == pytest.approx(2 * s / (s + fig6_channel.n3))
    tr = trace(fig6_channel, SMALL, "prop2")
    i = tr.axes.index("a13")
    assert tr.path[:, i].max() <= alpha_cap(fig6_channel) + 1e-12


def test_interference_independence_of_traces():
    regs = [trace(g.GaussianChannel.from_db(p1=10, p2=10, n1=0, n2=0, n3=7, q0=q),
                  SweepSpec(), "prop1").region for q in (2, 5, 8)]
    assert max(hausdorff_distance(a, b) for a in regs for b in regs) <= 1e-9


def test_prop3_sum_rate(fig7_channel):
    r = trace(fig7_channel, SweepSpec(), "prop3").region
    assert r.max_sum_rate() == pytest.approx(0.5, abs=1e-3)


def test_baseline_dispatch(fig5_channel):
    r = trace_boundary(fig5_channel, SMALL, "baseline-mac-csit")
    assert hausdorff_distance(r, g.mac_pentagon(fig5_channel)) == 0


def test_four_cases(fig6_channel):
    res = four_case_hull(fig6_channel, SMALL)
    assert set(res.cases) == set(FOUR_CASES)
    for c in res.cases.values():
        assert region_contains(res.hull, c)
    # symmetric channel: cases 3 and 4 mirror each other
    assert hausdorff_distance(res.cases["case3"], res.cases["case4"].swap_users()) <= 1e-9
    assert res.excess >= 0 and res.exceeds == (res.excess > 1e-3)


def test_case2_matches_direct_evaluation(fig6_channel):
    spec = SMALL.with_(fixed=FOUR_CASES["case2"], zero_corrections=True)
    tr = trace(fig6_channel, spec, "prop2")
    for j in range(len(tr.mus)):
        cp = tr.winner_params(j)
        assert cp.rho1 == cp.rho2 == cp.a1 == cp.a2 == 0 and cp.pp1 == cp.pp2 == 0
        direct = g.prop2_bounds(fig6_channel, cp, zero_corrections=True)
        assert direct.b12 == direct.b21 == 0


def test_sumrate_single_value():
    ch = g.GaussianChannel.from_db(p1=10, p2=10, n1=-10, n2=-10, n3=0)
    t = sum_rate_vs_sir(ch, [5.0], SMALL.with_(weights=1))
    assert len(t.rows) == 1 and t.monotone
    assert t.column("full-cooperation")[0] >= t.column("no-cooperation")[0] - 1e-9
    assert t.column("gdpc")[0] >= t.column("full-cooperation")[0] - 1e-12


def test_sumrate_rejects_asymmetric():
    ch = g.GaussianChannel.from_db(p1=10, p2=7, n1=0, n2=0, n3=0)
    with pytest.raises(g.ModelPreconditionError):
        sum_rate_vs_sir(ch, [0.0], SMALL)


def _clean_sum_rate_optimum(ch):
    """Best full-CSIT sum-rate by multi-start local optimisation (scipy)."""
    from gmac_regions.gaussian import prop1_pentagon_arrays

    def neg(u):
        u = np.clip(u, 0, 1)
        h1, h2, h12 = prop1_pentagon_arrays(ch, u[0], u[1], u[2] * ch.p1, u[3] * ch.p2,
                                            (1 - u[2]) * ch.p1, (1 - u[3]) * ch.p2)
        return -float(min(h1 + h2, h12))

    starts = np.random.default_rng(0).uniform(0, 1, (40, 4))
    return max(-minimize(neg, s, method="Nelder-Mead", bounds=[(0, 1)] * 4,
                         options={"xatol": 1e-10, "fatol": 1e-12}).fun for s in starts)


def test_sumrate_high_sir_limit():
    ch = g.GaussianChannel.from_db(p1=10, p2=10, n1=-10, n2=-10, n3=0)
    t = sum_rate_vs_sir(ch, [60.0], SweepSpec(weights=1))
    best = _clean_sum_rate_optimum(ch)
    got = t.column("gdpc")[0]
    assert got <= g.full_cooperation_sum_rate(ch) + 1e-12
    assert got == pytest.approx(best, abs=5e-3)
