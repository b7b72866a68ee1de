"""Command-line interface: ``asrf <subcommand> ...``.

Data goes to stdout (or ``--out``), diagnostics to stderr. Exit status is 0
on success, 1 when inputs fail validation or a solve is infeasible, and 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .adequacy import DEFAULT_FLOORS, adequacy_report, distance_to_default, reverse_stress
from .csvio import emit, fmt, ingest
from .engine import Book, Mode, capital
from .errors import AsrfError
from .factor import Allocation, LAGS, factor_series
from .montecarlo import METHODS, SimConfig, convergence_study, simulate
from .params import constants_rows
from .portfolio import DEFAULT_INPUT_LEAD, parse_quarter
from .synth import DEFAULT_PD_BANDS, SynthSpec, synthesize

log = logging.getLogger("asrf")

SEED_ENV = "ASRF_SEED"


def _default_seed():
    return int(os.environ.get(SEED_ENV, "0"))


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return fmt(v)
    if hasattr(v, "isoformat"):
        return v.isoformat()
    if hasattr(v, "value"):
        return str(v.value)
    return str(v)


def render(header, rows, table=False) -> str:
    cells = [[_cell(v) for v in row] for row in rows]
    if not table:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(cells)
        return buf.getvalue()
    widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def _round(v, digits):
    return None if v is None else round(v, digits)


def _emit(args, header, rows):
    text = render(header, rows, getattr(args, "table", False))
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _probability(text):
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in (0, 1)")
    return v


def _nonneg(text):
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"{text} is negative")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} must be >= 1")
    return v


# ---------------------------------------------------------------------------
# subcommands

def cmd_capital(args):
    series = ingest(args.data)
    mode = Mode(args.mode)
    rows = []
    for q, snap in sorted(series.snapshots.items()):
        dec = capital(snap, args.alpha, mode)
        rows.append([q, snap.total_ead, dec.expected_loss, dec.conditional_loss, dec.capital,
                     dec.confidence, dec.factor_point, mode])
    _emit(args, ["quarter", "total_ead", "expected_loss", "conditional_loss", "capital",
                 "confidence", "factor_point", "mode"], rows)


def cmd_invert_factor(args):
    series = ingest(args.data)
    result = factor_series(series, args.lag, Allocation(args.allocation), args.input_lead)
    for q, reason in result.gaps:
        log.info("skipped %s: %s", q.isoformat(), reason)
    rows = [[r.quarter, r.y, r.alpha, r.lag_quarters, r.allocation, r.window_losses]
            for r in result.readings]
    _emit(args, ["quarter", "y", "alpha", "lag", "allocation", "window_losses"], rows)


def _adequacy_quarters(series):
    return [q for q in sorted(series.snapshots) if q in series.accounts]


def cmd_dtd(args):
    series = ingest(args.data)
    rows = []
    for q in _adequacy_quarters(series):
        r = distance_to_default(series, q)
        rows.append([q, r.capital_ratio, r.provisions_irb, r.capital_irb, r.dtd, r.dtd_alpha,
                     r.provision_shortfall])
    _emit(args, ["quarter", "capital_ratio", "provisions_irb", "capital_irb", "dtd", "dtd_alpha",
                 "provision_shortfall"], rows)


def cmd_reverse_stress(args):
    series = ingest(args.data)
    floors = args.floor or list(DEFAULT_FLOORS)
    rows = []
    for q in _adequacy_quarters(series):
        for f in floors:
            r = reverse_stress(series, q, f)
            rows.append([q, r.floor, r.y_hat, r.alpha_hat, r.loss_threshold])
    _emit(args, ["quarter", "floor", "y_hat", "alpha_hat", "loss_threshold"], rows)


def cmd_report(args):
    series = ingest(args.data)
    floors = args.floor or list(DEFAULT_FLOORS)
    header = ["quarter", "capital_ratio", "dtd", "dtd_alpha"]
    for f in floors:
        header += [f"y_hat@{f:g}", f"alpha_hat@{f:g}"]
    header += ["y", "alpha"]
    rows = []
    for r in adequacy_report(series, floors, args.lag, Allocation(args.allocation)):
        s = r.solvency
        row = [r.quarter, s.capital_ratio, s.dtd, s.dtd_alpha]
        for st in r.stress:
            row += [st.y_hat, st.alpha_hat]
        row += [r.factor_y, r.factor_alpha]
        if args.table:
            # percent for ratios and confidences, 3 d.p. for factor shocks
            row = [row[0], _round(row[1] * 100, 2), _round(row[2], 3), _round(row[3] * 100, 3)] + [
                _round(v * 100, 3) if i % 2 else _round(v, 3) for i, v in enumerate(row[4:-2])
            ] + [_round(row[-2], 2), _round(None if row[-1] is None else row[-1] * 100, 1)]
        rows.append(row)
    _emit(args, header, rows)


def cmd_simulate(args):
    series = ingest(args.data)
    quarter = parse_quarter(args.quarter) if args.quarter else max(series.snapshots)
    snap = series.snapshot(quarter)
    cfg = SimConfig(scenarios=args.scenarios, seed=args.seed, obligors_per_grade=args.obligors_per_grade,
                    conditional_y=args.conditional_y, method=args.method, workers=args.workers)
    dist = simulate(snap, cfg)
    book = Book.from_snapshot(snap, Mode.RAW)
    analytic = book.expected_loss() if args.conditional_y is None else book.conditional_loss(args.conditional_y)
    rows = [["scenarios", float(len(dist))], ["mean", dist.mean], ["std_error", dist.std_error],
            ["analytic_mean", analytic]]
    for a in args.alpha or [0.999]:
        var, se = dist.batch_quantile(a, args.batches)
        rows += [[f"var@{a:g}", var], [f"var_se@{a:g}", se]]
    if args.losses_out:
        Path(args.losses_out).write_text(
            render(["scenario", "loss"], [[i, v] for i, v in enumerate(dist.scenario_losses.tolist())]),
            encoding="utf-8")
    _emit(args, ["statistic", "value"], rows)


def cmd_convergence(args):
    cfg = SimConfig(scenarios=args.scenarios, seed=args.seed, method=args.method, workers=args.workers)
    rows = convergence_study(args.pd, args.rho, args.lgd, args.ead, args.clones, cfg, args.alpha,
                             args.batches)
    _emit(args, ["obligors", "mc_var", "mc_var_se", "asrf_value", "gap", "gap_se"],
          [[r.obligors, r.mc_var, r.mc_var_se, r.asrf_value, r.gap, r.gap_se] for r in rows])


def cmd_synth(args):
    if args.y_path:
        path = [float(v) for v in args.y_path.split(",")]
        if len(path) != args.quarters:
            raise SystemExit(_usage_error(f"--y-path has {len(path)} values, --quarters is {args.quarters}"))
    else:
        path = [args.y] * args.quarters
    bands = [float(v) for v in args.pd_bands.split(",")] if args.pd_bands else DEFAULT_PD_BANDS
    try:
        spec = SynthSpec(quarters=args.quarters, base_y_path=path, grades_per_class=args.grades_per_class,
                         pd_band_edges=bands, seed=args.seed, ead_scale=args.ead_scale, noisy=args.noisy,
                         obligors_per_grade=args.obligors_per_grade)
    except ValueError as exc:
        raise SystemExit(_usage_error(str(exc)))
    try:
        series = synthesize(spec)
    except ValueError as exc:
        sys.stderr.write(f"asrf: {exc}\n")
        raise SystemExit(1)
    paths = emit(series, args.out_dir)
    for p in paths.values():
        log.info("wrote %s", p)


def cmd_params(args):
    _emit(args, ["asset_class", "formula_id", "constant", "value"], constants_rows())


def _usage_error(msg):
    sys.stderr.write(f"asrf: error: {msg}\n")
    return 2


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="asrf", description="Single-factor IRB credit capital engine.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def data_cmd(name, func, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("data", help="directory holding grades.csv, accounts.csv, losses.csv")
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--table", action="store_true", help="aligned plain-text table instead of CSV")
        sp.set_defaults(func=func)
        return sp

    def factor_flags(sp):
        sp.add_argument("--lag", type=int, choices=LAGS, default=0, help="bad-debt recognition delay, quarters")
        sp.add_argument("--allocation", choices=[a.value for a in Allocation],
                        default=Allocation.PROPORTIONAL_RWA.value)

    sp = data_cmd("capital", cmd_capital, "expected loss and capital per snapshot")
    sp.add_argument("--alpha", type=_probability, default=0.999)
    sp.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.REGULATORY.value)

    sp = data_cmd("invert-factor", cmd_invert_factor, "recover systematic factor readings from losses")
    factor_flags(sp)
    sp.add_argument("--input-lead", type=int, default=DEFAULT_INPUT_LEAD,
                    help="quarters between input snapshot and reading (default 2)")

    data_cmd("dtd", cmd_dtd, "distance to default per quarter")

    sp = data_cmd("reverse-stress", cmd_reverse_stress, "weakest shock breaching capital ratio floors")
    sp.add_argument("--floor", type=_nonneg, action="append", help="capital ratio floor (repeatable)")

    sp = data_cmd("report", cmd_report, "combined capital adequacy table")
    sp.add_argument("--floor", type=_nonneg, action="append", help="capital ratio floor (repeatable)")
    factor_flags(sp)

    sp = data_cmd("simulate", cmd_simulate, "Monte Carlo loss distribution of one snapshot")
    sp.add_argument("--quarter", help="snapshot quarter (default: latest)")
    sp.add_argument("--scenarios", type=_positive_int, default=100_000)
    sp.add_argument("--seed", type=int, default=_default_seed())
    sp.add_argument("--obligors-per-grade", type=_positive_int, default=100)
    sp.add_argument("--conditional-y", type=float)
    sp.add_argument("--method", choices=METHODS, default="binomial")
    sp.add_argument("--alpha", type=_probability, action="append")
    sp.add_argument("--batches", type=_positive_int, default=30)
    sp.add_argument("--workers", type=_positive_int, default=1)
    sp.add_argument("--losses-out", help="also write per-scenario losses to this CSV")

    sp = sub.add_parser("convergence-study", help="MC VaR vs asymptotic value as granularity grows")
    sp.add_argument("--pd", type=_probability, default=0.01)
    sp.add_argument("--rho", type=_probability, default=0.2)
    sp.add_argument("--lgd", type=float, default=1.0)
    sp.add_argument("--ead", type=float, default=1.0)
    sp.add_argument("--clones", type=_positive_int, nargs="+", default=[10, 100, 1000, 10000])
    sp.add_argument("--scenarios", type=_positive_int, default=2_000_000)
    sp.add_argument("--seed", type=int, default=_default_seed())
    sp.add_argument("--alpha", type=_probability, default=0.999)
    sp.add_argument("--batches", type=_positive_int, default=40)
    sp.add_argument("--method", choices=METHODS, default="binomial")
    sp.add_argument("--workers", type=_positive_int, default=1)
    sp.add_argument("--out")
    sp.add_argument("--table", action="store_true")
    sp.set_defaults(func=cmd_convergence)

    sp = sub.add_parser("synth", help="write a synthetic series to a directory")
    sp.add_argument("out_dir")
    sp.add_argument("--quarters", type=_positive_int, default=22)
    sp.add_argument("--y", type=float, default=-0.81, help="constant factor path value")
    sp.add_argument("--y-path", help="comma-separated factor path, one value per quarter")
    sp.add_argument("--grades-per-class", type=_positive_int, default=6)
    sp.add_argument("--pd-bands", help="comma-separated ascending PD band edges")
    sp.add_argument("--seed", type=int, default=_default_seed())
    sp.add_argument("--ead-scale", type=float, default=1_000_000.0)
    sp.add_argument("--noisy", action="store_true", help="binomially sampled losses")
    sp.add_argument("--obligors-per-grade", type=_positive_int, default=10_000)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("params", help="supervisory parameter constants")
    sp.add_argument("--dump", action="store_true", required=True)
    sp.add_argument("--out")
    sp.add_argument("--table", action="store_true")
    sp.set_defaults(func=cmd_params)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="asrf: %(levelname)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except AsrfError as exc:
        sys.stderr.write(f"asrf: {exc}\n")
        return 1
    except (FileNotFoundError, IsADirectoryError) as exc:
        sys.stderr.write(f"asrf: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
