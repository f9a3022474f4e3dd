"""``gmac-regions`` command line: region, sumrate-sir and verify.

Exit codes: 0 success, 2 config error, 3 model-precondition error,
4 verification failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from . import gaussian as g
from .config import ConfigError, RunConfig, load_config
from .discrete import FactorizationError, pmf_from_json, theorem1_bounds
from .geometry import RateRegion2D, convex_union, region_excess
from .io import read_polyline_csv, write_csv, write_json
from .sweep import (FOUR_CASES, SIR_STRATEGIES, _case_spec, make_executor,
                    sum_rate_vs_sir, trace)

EXIT_OK, EXIT_CONFIG, EXIT_MODEL, EXIT_VERIFY = 0, 2, 3, 4
FORMATS = ("csv", "json", "svg")


def _channel_dict(ch: g.GaussianChannel) -> dict[str, float]:
    return {k: getattr(ch, k) for k in ("p1", "p2", "n1", "n2", "n3", "q0", "q1", "q2")}


def _require(model: str, ch: g.GaussianChannel) -> None:
    if model in ("prop2", "prop3") and ch.q0 != 0:
        raise g.ModelPreconditionError(
            f"{model} has no common state: q0 must be 0 (got {ch.q0:g})")
    if model == "prop3" and not math.isinf(ch.q1):
        raise g.ModelPreconditionError(
            f"prop3 needs an arbitrarily strong state at encoder 1: q1 must be inf (got {ch.q1:g})")


def _panel_overlays(cfg: RunConfig, label: str, ch: g.GaussianChannel, ex):
    """Regions and trace tables for every overlay of one panel."""
    spec, model = cfg.sweep, cfg.model
    _require(model, ch)
    regions: dict[str, RateRegion2D] = {}
    traces = {}
    extra = {}
    clean = replace(ch, q0=0.0, q1=0.0, q2=0.0)
    wanted = cfg.overlays
    base_tags = [t for t in wanted if t in g.BASELINE_SCENARIOS]
    if base_tags:
        regions.update(g.baseline_regions(ch, tuple(base_tags), spec, ex))
    # restricted prop2 sweeps run first; their winners seed the unrestricted one
    if model == "prop2":
        if "four-case-hull" in wanted:
            restricted = [*FOUR_CASES, *(t for t in wanted if t == "pure-dpc")]
        else:
            restricted = [t for t in wanted if t in FOUR_CASES or t == "pure-dpc"]
        for tag in restricted:
            sub = (spec.with_(fixed={**spec.fixed, "eta1": 1.0, "eta2": 1.0})
                   if tag == "pure-dpc" else _case_spec(spec, tag))
            traces[tag] = trace(ch, sub, "prop2", ex)
            regions[tag] = traces[tag].region
    seeds = [v for t in traces.values() for v in t.winner_vectors()]
    for tag in wanted:
        if tag in regions:
            continue
        if tag == "gdpc":
            tr = trace(ch, spec, model, ex, seed_vectors=seeds)
            regions[tag], traces[tag] = tr.region, tr
        elif tag == "clean-gmac":
            tr = trace(clean, spec, "prop1", ex)
            regions[tag], traces[tag] = tr.region, tr
        elif tag == "clean-mac":
            regions[tag] = g.mac_pentagon(clean)
        elif tag == "four-case-hull":
            regions[tag] = convex_union([traces[c].region for c in FOUR_CASES])
        elif tag == "outer-bound":
            path = cfg.outer_bound.get(label)
            if path is not None:
                try:
                    regions[tag] = RateRegion2D.from_points(read_polyline_csv(path))
                except (OSError, ValueError) as exc:
                    raise ConfigError(f"outer bound for panel {label!r}: {exc}") from None
    if "four-case-hull" in regions:
        full = regions.get("gdpc") or trace(ch, spec, "prop2", ex, seed_vectors=seeds).region
        exc_ = region_excess(regions["four-case-hull"], full)
        extra["four_case_excess"] = exc_
        extra["four_case_exceeds"] = exc_ > 1e-3
    if model == "prop3":
        r2, branch = g.strong_state_max_r2(ch)
        extra["strong_state"] = {"max_sum": g.strong_state_max_sum(ch), "max_r2": r2, "branch": branch}
    ordered = {t: regions[t] for t in wanted if t in regions}
    return ordered, {t: tr for t, tr in traces.items() if t in wanted}, extra


def _region_summary(r: RateRegion2D) -> dict:
    return {**r.to_dict(), "r1_max": r.r1_max, "r2_max": r.r2_max,
            "max_sum_rate": r.max_sum_rate()}


def _discrete_region(cfg: RunConfig):
    try:
        pmf, empty = pmf_from_json(cfg.pmf)
        b = theorem1_bounds(pmf)
    except FactorizationError as exc:
        raise g.ModelPreconditionError(str(exc)) from None
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"pmf: {exc}") from None
    region = b.region(empty)
    extra = {"bounds": dict(zip(g.BOUND_NAMES, b.as_tuple())),
             "empty_messages": list(empty)}
    return {"theorem1": region}, {}, extra


def cmd_region(cfg: RunConfig, out: Path, formats: Sequence[str], workers: int | None) -> int:
    results = []
    with make_executor(workers) as ex:
        if cfg.model == "discrete":
            results.append(("main", None, *_discrete_region(cfg)))
        else:
            for label, ch in cfg.panels:
                results.append((label, ch, *_panel_overlays(cfg, label, ch, ex)))

    # all writes happen after the computation
    summary = {"model": cfg.model, "description": cfg.description, "panels": []}
    for label, ch, regions, traces, extra in results:
        if "csv" in formats:
            rows = [[tag, x, y] for tag, r in regions.items() for x, y in r.polygon()]
            write_csv(out / f"region_{label}.csv",
                      [f"model={cfg.model} panel={label}",
                       "overlay: scenario tag; R1, R2: closed boundary vertices "
                       "[bits/channel use], origin first"],
                      ["overlay", "R1", "R2"], rows)
            for tag, tr in traces.items():
                cols, rows = tr.table()
                write_csv(out / f"trace_{label}_{tag}.csv",
                          [f"model={tr.model} panel={label} overlay={tag}",
                           "mu: weight on R1; parameter columns; R1, R2: winning point"],
                          cols, rows)
        summary["panels"].append({
            "label": label,
            "channel": _channel_dict(ch) if ch is not None else None,
            "overlays": {t: _region_summary(r) for t, r in regions.items()},
            **extra,
        })
        if "svg" in formats:
            from .plotting import plot_regions
            plot_regions(out / f"region_{label}.svg", f"{cfg.model}: {label}",
                         [(t, r.polygon()) for t, r in regions.items()])
    if cfg.combined_overlay and len(results) > 1:
        curves = [(f"{cfg.combined_overlay} {label}", regions[cfg.combined_overlay].polygon())
                  for label, _, regions, _, _ in results if cfg.combined_overlay in regions]
        if "svg" in formats:
            from .plotting import plot_regions
            plot_regions(out / "region_combined.svg", f"{cfg.combined_overlay}: all panels", curves)
        if len(curves) > 1:
            from .geometry import hausdorff_distance
            regs = [r[cfg.combined_overlay] for _, _, r, _, _ in results]
            summary["combined_max_hausdorff"] = max(
                hausdorff_distance(a, b) for a in regs for b in regs)
    if "json" in formats:
        write_json(out / "region.json", summary)
    return EXIT_OK


def cmd_sumrate_sir(cfg: RunConfig, out: Path, formats: Sequence[str],
                    workers: int | None) -> int:
    if not cfg.sir_db:
        raise ConfigError(f"{cfg.source or '<config>'}: sumrate-sir needs a non-empty 'sir_db' list")
    ch = cfg.channel
    if ch.q1 != ch.q2:
        raise g.ModelPreconditionError("sum-rate vs SIR needs a symmetric channel (q1 = q2)")
    with make_executor(workers) as ex:
        table = sum_rate_vs_sir(ch, cfg.sir_db, cfg.sweep, ex)
    p_db = 10 * math.log10(ch.p1)
    cols = ["sir_db", "q_db"] + [s.replace("-", "_") for s in SIR_STRATEGIES]
    rows = [[s, p_db - s, *r] for s, r in zip(table.sir_db, table.rows)]
    if "csv" in formats:
        write_csv(out / "sumrate_sir.csv",
                  ["sir_db: P - Q [dB]; q_db: Q1 = Q2 [dB]",
                   "remaining columns: maximum sum-rate [bits/channel use] per strategy"],
                  cols, rows)
    if "json" in formats:
        write_json(out / "sumrate_sir.json",
                   {"channel": _channel_dict(ch), "columns": cols, "rows": rows,
                    "monotone": table.monotone,
                    "cooperation_dominates": bool(np.all(table.column("full-cooperation")
                                                         >= table.column("no-cooperation") - 1e-9))})
    if "svg" in formats:
        from .plotting import plot_lines
        order = np.argsort(table.sir_db, kind="stable")
        x = np.asarray(table.sir_db)[order]
        plot_lines(out / "sumrate_sir.svg", "Sum-rate versus SIR", x,
                   {s: table.column(s)[order] for s in SIR_STRATEGIES},
                   "SIR = P - Q [dB]", "max R1 + R2 [bits/channel use]")
    return EXIT_OK


def cmd_verify(cfg: RunConfig | None, out: Path) -> int:
    from .verify import run_checks
    checks = run_checks(cfg.verify if cfg is not None else {})
    lines = [c.line() for c in checks]
    n_fail = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - n_fail} passed, {n_fail} failed")
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_json(out / "verify.json",
               {"checks": [{"name": c.name, "passed": c.passed, "detail": c.detail,
                            "value": c.value} for c in checks],
                "passed": n_fail == 0})
    print("\n".join(lines))
    return EXIT_OK if n_fail == 0 else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gmac-regions",
                                 description="Rate regions of the state-dependent GMAC.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("command", choices=("region", "sumrate-sir", "verify"))
    ap.add_argument("--config", type=Path, help="JSON run configuration")
    ap.add_argument("--model", choices=("prop1", "prop2", "prop3", "discrete"),
                    help="override the config's model")
    ap.add_argument("--out", type=Path, help="output directory (default: config output.dir or ./out)")
    ap.add_argument("--format", help="comma-separated subset of csv,json,svg")
    ap.add_argument("--workers", type=int, help="worker processes (default: $GMAC_REGIONS_WORKERS or 1)")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is None:
            if args.command != "verify":
                raise ConfigError(f"{args.command} needs --config")
            cfg = None
        else:
            cfg = load_config(args.config)
            if args.model and args.model != cfg.model:
                cfg = replace(cfg, model=args.model)
        if args.format:
            formats = tuple(f.strip() for f in args.format.split(",") if f.strip())
            bad = [f for f in formats if f not in FORMATS]
            if bad:
                raise ConfigError(f"--format: unknown format(s) {bad}; choose from {list(FORMATS)}")
        else:
            formats = cfg.formats if cfg is not None else FORMATS
        out = args.out or (cfg.out_dir if cfg is not None and cfg.out_dir else Path("out"))
        if args.workers is not None and args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        if args.command == "verify":
            return cmd_verify(cfg, out)
        if cfg.model == "discrete" and cfg.pmf is None:
            raise ConfigError(f"{cfg.source}: model 'discrete' needs a 'pmf' object")
        if not cfg.panels:
            raise ConfigError(f"{cfg.source}: {args.command} needs 'channel' or 'panels'")
        if args.command == "region":
            return cmd_region(cfg, out, formats, args.workers)
        return cmd_sumrate_sir(cfg, out, formats, args.workers)
    except ConfigError as exc:
        print(f"gmac-regions: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except g.ModelPreconditionError as exc:
        print(f"gmac-regions: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
