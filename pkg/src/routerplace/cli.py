"""Command-line driver for the router placement solvers."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .estimators import AnnealingPlacement, DistributedPlacement
from .network import link_sinrs
from .scan import scan_surface, strict_local_maxima
from .scenario import (
    ScenarioError,
    ScenarioParseError,
    write_atomic,
    load_scenario,
    shipped_scenarios,
    write_surface,
    write_trace,
)
from .validation import ValidationError

log = logging.getLogger("routerplace")

EXIT_OK = 0
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_RUNTIME = 5

# Final per-link SINR after annealing, from the reference experiments
# (two crossing flows, two robots each, unit powers, eta = 2).
TABLE3_TARGETS = {
    "two_flow_table3_noise0_6": (0.6, 0.0327),
    "two_flow_table3_noise1": (1.0, 0.0200),
    "two_flow_table3_noise2": (2.0, 0.0108),
    "two_flow_table3_noise3": (3.0, 0.0073),
    "two_flow_table3_noise4": (4.0, 0.0055),
    "two_flow_table3_noise10": (10.0, 0.0022),
}


@dataclass
class RunReport:
    scenario: str
    mode: str
    seed: int
    iterations: int
    final_global_cost: float
    link_sinrs: list[dict]
    wall_time: float
    stop_reason: str | None = None


def _g(v: float) -> float:
    return float(f"{v:.12g}")


def run_scenario(doc, mode: str, seed: int | None = None, iterations: int | None = None, record_every: int = 100):
    """Run one scenario; returns ``(estimator, report)``."""
    seed = doc.seed if seed is None else seed
    network, state = doc.network(), doc.initial_state()
    if mode == "centralized":
        schedule = doc.annealing
        if iterations is not None:
            schedule = replace(schedule, iterations=iterations)
        est = AnnealingPlacement(
            flows=network, channel=doc.channel, record_every=record_every, random_state=seed,
            **asdict(schedule),
        )
    elif mode == "distributed":
        ctrl = doc.controller
        if iterations is not None:
            ctrl = replace(ctrl, max_iterations=iterations)
        est = DistributedPlacement(
            flows=network, channel=doc.channel, mobility=doc.mobility_model(), random_state=seed,
            **asdict(ctrl),
        )
    else:
        raise ValidationError("mode", f"unknown mode {mode!r}")
    est.fit(state)
    # recomputed from the final layout rather than taken from the optimizer
    sinrs = link_sinrs(est.state_, doc.channel, network)
    report = RunReport(
        scenario=doc.name,
        mode=mode,
        seed=seed,
        iterations=est.n_iter_,
        final_global_cost=_g(float(sinrs.min())),
        link_sinrs=[
            {"flow": l.flow_id, "link": l.index, "tx": l.tx_node, "rx": l.rx_node, "sinr": _g(float(v))}
            for l, v in zip(network.links, sinrs)
        ],
        wall_time=round(est.fit_time_, 3),
        stop_reason=getattr(est, "stop_reason_", None),
    )
    return est, report


def cmd_simulate(args) -> int:
    doc = load_scenario(args.scenario)
    est, report = run_scenario(doc, args.mode, args.seed, args.iterations, args.trace_every)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_trace(est.trace_, out / "trace.csv", est.network_, doc.channel)
    if args.mode == "centralized":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "global_cost", "accepted", "temperature", "best_cost"])
        for r in est.trace_.records:
            w.writerow([r.iteration, f"{r.global_cost:.12g}", int(r.accepted), f"{r.temperature:.12g}", f"{r.best_cost:.12g}"])
        write_atomic(out / "anneal.csv", buf.getvalue())
    write_atomic(out / "report.json", json.dumps(asdict(report), indent=2) + "\n")
    print(
        f"{report.scenario} [{report.mode}] seed={report.seed} iterations={report.iterations} "
        f"min SINR={report.final_global_cost:.6g}"
    )
    for row in report.link_sinrs:
        print(f"  flow {row['flow']} link {row['tx']}->{row['rx']}: {row['sinr']:.6g}")
    return EXIT_OK


def cmd_scan(args) -> int:
    doc = load_scenario(args.scenario)
    try:
        a, b = (int(v) for v in args.robots.split(","))
    except ValueError:
        raise ValidationError("robots", f"expected two comma-separated node ids, got {args.robots!r}") from None
    t, grid = scan_surface(doc.initial_state(), doc.channel, doc.network(), (a, b), args.samples)
    write_surface(grid, (t, t), args.out, names=(f"t_robot_{a}", f"t_robot_{b}"))
    peaks = strict_local_maxima(grid)
    i, j = np.unravel_index(np.argmax(grid), grid.shape)
    print(f"{grid.size} samples, max min-SINR {grid.max():.6g} at t=({t[i]:.3g}, {t[j]:.3g})")
    print(f"{len(peaks)} strict local maxima:")
    for i, j, v in sorted(peaks, key=lambda p: -p[2]):
        print(f"  t=({t[i]:.3g}, {t[j]:.3g}) min SINR {v:.6g}")
    return EXIT_OK


def table3_rows(seed: int | None = None):
    """Anneal every shipped reference row; yields one dict per noise level."""
    for name, (noise, target) in TABLE3_TARGETS.items():
        doc = load_scenario(name)
        _, report = run_scenario(doc, "centralized", seed, record_every=0)
        values = [r["sinr"] for r in report.link_sinrs]
        yield {
            "scenario": name,
            "noise": noise,
            "target": target,
            "links": values,
            "min": min(values),
            "spread": max(values) / min(values) - 1.0,
            "wall_time": report.wall_time,
        }


def cmd_table3(args) -> int:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    labels = ["link_12", "link_23", "link_34", "link_56", "link_67", "link_78"]
    w.writerow(["noise", *labels, "target", "min_over_target", "spread"])
    print(f"{'noise':>6} " + " ".join(f"{l:>8}" for l in labels) + f" {'target':>8} {'ratio':>7}")
    for row in table3_rows(args.seed):
        ratio = row["min"] / row["target"]
        w.writerow([row["noise"], *(f"{v:.12g}" for v in row["links"]), row["target"], f"{ratio:.12g}", f"{row['spread']:.12g}"])
        print(f"{row['noise']:>6} " + " ".join(f"{v:8.4f}" for v in row["links"]) + f" {row['target']:8.4f} {ratio:7.3f}")
    write_atomic(args.out, buf.getvalue())
    return EXIT_OK


def cmd_list(args) -> int:
    for name in shipped_scenarios():
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="routerplace", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="optimize robot positions for one scenario")
    p.add_argument("--scenario", required=True, help="scenario file or shipped scenario name")
    p.add_argument("--mode", choices=("centralized", "distributed"), default="centralized",
                   help="annealing or decentralized controller (default: centralized)")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--iterations", type=int, default=None,
                   help="annealing iterations or controller iteration budget")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--trace-every", type=int, default=100,
                   help="snapshot stride for centralized traces (default: 100)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scan", help="min-SINR surface along two flows' tx-rx lines")
    p.add_argument("--scenario", required=True)
    p.add_argument("--robots", required=True, help="two robot ids in different flows, e.g. 2,5")
    p.add_argument("--samples", type=int, default=101, help="samples per axis (default: 101)")
    p.add_argument("--out", default="surface.csv")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("table3", help="anneal every reference noise level and compare")
    p.add_argument("--out", default="table3.csv")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_table3)

    p = sub.add_parser("list", help="list shipped scenarios")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ScenarioParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValidationError, ScenarioError) as exc:
        print(f"error: invalid {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001
        log.debug("run failed", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
