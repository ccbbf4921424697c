"""``osaas-plan`` command line: plan, trx-curve, contour, profile-check, validate.

Exit codes: 0 success or feasible plan, 1 input error, 2 planning exhausted.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import formats
from .catalog import enumerate_feasible
from .errors import PlanningError, ScenarioError
from .knapsack import solve_knapsack, throughput_vs_trx
from .planner import contour_grid, knapsack_instance, plan_with_fallback, profile_check

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_EXHAUSTED = 2


def _emit(text: str, output, filename: str):
    if output is None:
        sys.stdout.write(text)
        return
    out = Path(output)
    out.mkdir(parents=True, exist_ok=True)
    (out / filename).write_text(text, encoding="utf-8")


def _load(args):
    return formats.load_scenario(args.scenario, strict=args.strict, seed=args.seed)


def cmd_plan(args) -> int:
    scenario = _load(args)
    outcome = plan_with_fallback(scenario, single_exclusion=args.single_exclusion)
    doc = formats.plan_to_dict(outcome, scenario)
    summary = formats.plan_summary(outcome, scenario)
    out = Path(args.output or ".")
    out.mkdir(parents=True, exist_ok=True)
    (out / "plan.json").write_text(formats.dumps(doc), encoding="utf-8")
    (out / "summary.txt").write_text(summary, encoding="utf-8")
    if args.format == "json":
        sys.stdout.write(formats.dumps(doc))
    elif args.format == "csv":
        header = list(doc["channels"][0]) if doc["channels"] else ["channel"]
        sys.stdout.write(formats.to_csv(header, [list(c.values()) for c in doc["channels"]]))
    else:
        sys.stdout.write(summary)
    return EXIT_OK if outcome.feasible else EXIT_EXHAUSTED


def cmd_trx_curve(args) -> int:
    scenario = _load(args)
    services = enumerate_feasible(
        scenario.catalog, scenario.profile, scenario.targets, scenario.n_wss, scenario.wss,
        scenario.dsp, (), scenario.seed, scenario.reference_rate_gbd, scenario.launch, scenario.isi,
    )
    instance = knapsack_instance(services, scenario.capacity_bins, scenario.n_trx, scenario.copies_per_item)
    table, _ = solve_knapsack(instance)
    rows = formats.trx_curve_rows(throughput_vs_trx(table), services)
    header = formats.TRX_CURVE_HEADER
    if args.format == "json":
        text = formats.dumps([dict(zip(header, r)) for r in rows])
    elif args.format == "text":
        text = "".join(f"{r[0]:>3} {r[1]:>10} {r[2]:>10}  {r[3]}\n" for r in [header, *rows])
    else:
        text = formats.to_csv(header, rows)
    _emit(text, args.output, f"trx_curve.{args.format}")
    return EXIT_OK


def cmd_contour(args) -> int:
    scenario = _load(args)
    grid = contour_grid(scenario, args.service, args.wss_bandwidth)
    a, p, q = grid.argmax
    rows = [(f"{alpha:.2f}", f"{power:.2f}", f"{grid.mean_q_db[i, j]:.2f}")
            for i, alpha in enumerate(grid.rolloffs) for j, power in enumerate(grid.powers_db)]
    if args.format == "json":
        text = formats.dumps({
            "service": grid.service_id,
            "wss_bandwidth_ghz": formats.fmt_ghz(grid.wss_bandwidth_ghz),
            "rolloffs": [round(float(x), 2) for x in grid.rolloffs],
            "relative_power_db": [formats.fmt_db(x) for x in grid.powers_db],
            "mean_q_db": [[formats.fmt_db(v) for v in row] for row in grid.mean_q_db],
            "argmax": {"rolloff": round(a, 2), "relative_power_db": formats.fmt_db(p), "mean_q_db": formats.fmt_db(q)},
        })
    else:
        text = formats.to_csv(formats.CONTOUR_HEADER, rows)
        text += f"# argmax rolloff={a:.2f} relative_power_db={p:.2f} mean_q_db={q:.2f}\n"
    ext = "json" if args.format == "json" else "csv"
    _emit(text, args.output, f"contour_{args.service}.{ext}")
    return EXIT_OK


def _profile_values(row):
    """Rounded columns; slack is formed from the rounded pair so it adds up."""
    req = formats.fmt_db(row.required_snr_db)
    avail = formats.fmt_db(row.available_snr_db)
    slack = None if req is None else round(avail - req, 2)
    return [row.service_id, row.modulation, row.symbol_rate, req, avail, slack, row.feasible]


def cmd_profile_check(args) -> int:
    scenario = _load(args)
    rows = [_profile_values(r) for r in profile_check(scenario)]
    header = formats.PROFILE_HEADER
    if args.format == "json":
        text = formats.dumps([dict(zip(header, r)) for r in rows])
    elif args.format == "csv":
        text = formats.to_csv(header, [[f"{v:.2f}" if isinstance(v, float) and i > 2 else v
                                        for i, v in enumerate(r)] for r in rows])
    else:
        def cell(v):
            return "-" if v is None else (f"{v:.2f}" if isinstance(v, float) else str(v))
        lines = [f"{'service':<14} {'mod':<6} {'Rs':>6} {'req':>7} {'avail':>7} {'slack':>7} ok"]
        for sid, mod, rate, req, avail, slack, ok in rows:
            lines.append(f"{sid:<14} {mod:<6} {rate:>6g} {cell(req):>7} {cell(avail):>7} {cell(slack):>7} "
                         f"{'y' if ok else 'n'}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.output, f"profile_check.{args.format}")
    return EXIT_OK


def cmd_validate(args) -> int:
    scenario = _load(args)
    if args.format == "json":
        sys.stdout.write(formats.dumps(formats.scenario_to_dict(scenario)))
    else:
        sys.stdout.write(f"{scenario.name}: ok ({len(scenario.catalog)} candidates, "
                         f"{scenario.capacity_bins} bins, {scenario.n_trx} TRx, {scenario.n_wss} WSS)\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("scenario", help="scenario file, or the name of a shipped scenario")
    common.add_argument("--output", metavar="DIR", help="write results into DIR")
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--strict", dest="strict", action="store_true", default=True,
                      help="reject unknown fields (default)")
    mode.add_argument("--lenient", dest="strict", action="store_false", help="warn on unknown fields")
    common.add_argument("--seed", type=int, metavar="N", help="override the scenario seed")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="osaas-plan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, default_format, formats_, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--format", choices=formats_, default=default_format)
        p.set_defaults(func=fn)
        return p

    p = add("plan", cmd_plan, "text", ("json", "csv", "text"), "pack the band and run the QoT fallback loop")
    p.add_argument("--single-exclusion", action="store_true",
                   help="exclude only the worst failing service per iteration")
    add("trx-curve", cmd_trx_curve, "csv", ("json", "csv", "text"), "throughput versus transceiver count")
    p = add("contour", cmd_contour, "csv", ("json", "csv"), "roll-off x launch-power Q grid")
    p.add_argument("service", help="catalog id")
    p.add_argument("--wss-bandwidth", type=float, metavar="GHZ", help="WSS window (default: scenario contour)")
    add("profile-check", cmd_profile_check, "text", ("json", "csv", "text"), "candidate eligibility at min GSNR")
    add("validate", cmd_validate, "text", ("json", "text"), "load and validate a scenario")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ScenarioError, PlanningError, ValueError) as exc:
        print(f"osaas-plan: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
