"""Command line front end.

Every table is CSV with the fixed header ``axis,metric,value,psi,k,tau_db,rho_bps,seed``
(or a JSON list of the same records).  Exit codes: 0 success, 2 invalid input,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import coverage, load, mc, model, series, throughput
from .model import NetworkParams, ValidationError, db_to_linear
from .specfun import NumericalError

HEADER = ("axis", "metric", "value", "psi", "k", "tau_db", "rho_bps", "seed")
EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


@dataclass
class SweepSpec:
    variable: str  # tau | psi | k | rho
    values: list
    fixed: NetworkParams
    outputs: list
    format: str = "csv"
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.variable not in ("tau", "psi", "k", "rho"):
            raise ValidationError([f"unknown sweep variable {self.variable!r}"])
        if not self.values:
            raise ValidationError(["sweep needs at least one value"])
        unknown = [m for m in self.outputs if m not in SWEEP_METRICS]
        if unknown:
            raise ValidationError([f"unknown metric(s): {', '.join(unknown)}"])


class _PartialFailure(Exception):
    """Some sweep points failed; the rest are still written."""

    def __init__(self, rows, failures):
        self.rows = rows
        self.failures = failures
        super().__init__("; ".join(failures))


# -- formatting ------------------------------------------------------------------


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def row(axis, metric, value, params=None, tau_db=None, rho=None, seed=None):
    return {
        "axis": axis, "metric": metric, "value": value,
        "psi": None if params is None else params.psi,
        "k": None if params is None else params.k,
        "tau_db": tau_db, "rho_bps": rho, "seed": seed,
    }


def render(rows, fmt="csv") -> str:
    if fmt == "json":
        clean = [{k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in r.items()}
                 for r in rows]
        return json.dumps(clean, indent=2, default=float) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in rows:
        w.writerow([_fmt(r[h]) for h in HEADER])
    return buf.getvalue()


def gnuplot_script(data_path, rows) -> str:
    metrics = list(dict.fromkeys(r["metric"] for r in rows))
    plots = ", \\\n     ".join(
        f"'{data_path}' using 1:(strcol(2) eq \"{m}\" ? $3 : NaN) with linespoints title \"{m}\""
        for m in metrics)
    return ("set datafile separator ','\nset key autotitle columnhead\nset grid\n"
            "set xlabel 'axis'\nset ylabel 'value'\n"
            f"plot {plots}\n")


# -- parameters ------------------------------------------------------------------


def _add_param_flags(p):
    g = p.add_argument_group("scenario (overrides config file, which overrides defaults)")
    g.add_argument("--config", help="JSON config file")
    g.add_argument("--psi", type=float, help="relative density psi = pi lambda_A R_B^2")
    g.add_argument("--k", type=int, help="spatial multiplexing gain (beams per AP)")
    g.add_argument("--mu", type=int, help="fading shape parameter (1..20)")
    g.add_argument("--alpha", type=float, help="LOS path-loss exponent (0, 2]")
    g.add_argument("--r-los-m", type=float, help="LOS ball radius R_B in metres")
    g.add_argument("--lambda-user", type=float, help="user intensity per km^2")
    g.add_argument("--bandwidth-hz", type=float, help="total bandwidth B in Hz")
    g.add_argument("--ga-main-db", type=float, help="AP main-lobe gain G_A in dB")
    g.add_argument("--ga-side-db", type=float, help="AP side-lobe gain g_A in dB")
    g.add_argument("--gu-main-db", type=float, help="user main-lobe gain G_U in dB")
    g.add_argument("--gu-side-db", type=float, help="user side-lobe gain g_U in dB")
    g.add_argument("--theta-a-deg", type=float, help="AP main-lobe width in degrees")
    g.add_argument("--theta-u-deg", type=float, help="user main-lobe width in degrees")
    g.add_argument("--bias", type=float, help="bias factor xi of the mean-bandwidth formula")
    g.add_argument("--sinr-cap-db", type=float, help="SIR ceiling for rate metrics in dB (default 40)")
    g.add_argument("--no-sinr-cap", action="store_true", help="disable the SIR ceiling")
    o = p.add_argument_group("output")
    o.add_argument("--out", help="write the table here instead of stdout")
    o.add_argument("--format", choices=("csv", "json"), default="csv")
    o.add_argument("--gnuplot", action="store_true",
                   help="also emit a gnuplot script (OUT.gp, or stderr without --out)")


def params_from_args(args) -> NetworkParams:
    base = model.load_config(args.config) if args.config else model.NetworkParams()
    beam = {}
    for flag, name in (("ga_main_db", "main_gain_ap"), ("ga_side_db", "side_gain_ap"),
                       ("gu_main_db", "main_gain_user"), ("gu_side_db", "side_gain_user")):
        if getattr(args, flag) is not None:
            beam[name] = db_to_linear(getattr(args, flag))
    for flag, name in (("theta_a_deg", "main_width_ap"), ("theta_u_deg", "main_width_user")):
        if getattr(args, flag) is not None:
            beam[name] = math.radians(getattr(args, flag))
    kw = {}
    for flag, name in (("psi", "psi"), ("k", "k"), ("mu", "mu"), ("alpha", "alpha_los"),
                       ("lambda_user", "lambda_user"), ("bandwidth_hz", "bandwidth_total"),
                       ("bias", "bias_factor"), ("sinr_cap_db", "sinr_cap_db")):
        if getattr(args, flag) is not None:
            kw[name] = getattr(args, flag)
    if args.r_los_m is not None:
        kw["r_los"] = args.r_los_m / 1000.0
    if args.no_sinr_cap:
        kw["sinr_cap_db"] = None
    p = dataclasses.replace(base, beam=dataclasses.replace(base.beam, **beam), **kw)
    return model.validate(p)


def parse_values(text, integer=False):
    """'1,2,5' or '1..12' (inclusive integer range) or a mix of both."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            a, b = part.split("..")
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part) if integer else float(part))
    if not out:
        raise ValidationError([f"no values in {text!r}"])
    return out


def _mbps_note():
    print("note: rates are read as Mbit/s", file=sys.stderr)


def _tau(tau_db):
    return 10.0 ** (tau_db / 10.0)


# -- metrics shared by commands and sweeps ---------------------------------------


def _schedule(args):
    if getattr(args, "rates_mbps", None):
        return throughput.RateSchedule(tuple(r * 1e6 for r in parse_values(args.rates_mbps)))
    return throughput.RateSchedule.ladder_mbps()


def _metric(name, p: NetworkParams, tau_db, rho, args):
    """Returns a list of (metric, value, rho) triples."""
    if name == "coverage":
        return [(name, coverage.coverage_probability(_tau(tau_db), p), None)]
    if name == "series-coverage":
        return [(name, series.coverage_via_series(_tau(tau_db), p), None)]
    if name == "fixed":
        return [(name, throughput.fixed_rate_throughput(rho, p).value, rho)]
    if name == "multi-rate":
        return [(name, throughput.multi_rate_throughput(_schedule(args), p).value, None)]
    if name == "upper-bound":
        return [(name, throughput.throughput_upper_bound(p).value, None)]
    if name in ("fixed-optimal", "optimal-rate"):
        rs, T = throughput.optimal_rate_threshold(p)
        return [("fixed-optimal", T, rs)] if name == "fixed-optimal" else [("optimal-rate", rs, rs)]
    if name == "gain":
        return [(name, throughput.densification_gain(p.psi, p, args.rho0_mbps * 1e6), args.rho0_mbps * 1e6)]
    if name == "threshold":
        return [(name, throughput.density_threshold(_tau(tau_db), p.k, p), None)]
    if name == "mean-bandwidth":
        return [(name, load.mean_bandwidth(p), None)]
    if name == "mc-coverage":
        cfg = mc.McConfig(trials=args.trials, seed=args.seed, fading=args.fading)
        e = mc.simulate_coverage(_tau(tau_db), p, cfg)
        return [(name, e.mean, None), (name + "-halfwidth", e.half_width_95, None)]
    raise ValidationError([f"unknown metric {name!r}"])


SWEEP_METRICS = ("coverage", "series-coverage", "fixed", "multi-rate", "upper-bound", "fixed-optimal",
                 "optimal-rate", "gain", "threshold", "mean-bandwidth", "mc-coverage")


# -- commands --------------------------------------------------------------------


def cmd_coverage(args, p):
    v = (series.coverage_via_series(_tau(args.tau_db), p) if args.method == "series"
         else coverage.coverage_probability(_tau(args.tau_db), p))
    return [row(args.tau_db, "coverage", v, p, tau_db=args.tau_db)]


def cmd_series(args, p):
    L = args.degree if args.degree is not None else series.choose_degree(p.psi, p.mu, args.target_err)
    tab = series.coefficients(_tau(args.tau_db), p.psi, p, L)
    rows = [row(l, "c_l", c, p, tau_db=args.tau_db) for l, c in enumerate(tab.coeffs)]
    rows.append(row(L, "series-coverage", min(max(tab.evaluate(p.k), 0.0), 1.0), p, tau_db=args.tau_db))
    rows.append(row(L, "truncation-bound", series.truncation_bound(L, p.psi, p.mu), p, tau_db=args.tau_db))
    return rows


def cmd_load(args, p):
    pmf = load.load_pmf(p, form=args.form)
    rows = [row(int(n), "pmf", float(q), p) for n, q in zip(pmf.n, pmf.p)]
    rows.append(row(pmf.truncation_n, "tail-mass", pmf.tail_mass, p))
    rows.append(row(None, "mean", pmf.mean(), p))
    rows.append(row(None, "mean-bandwidth", load.mean_bandwidth(p), p))
    return rows


def cmd_throughput(args, p):
    _mbps_note()
    if args.rates_mbps:
        r = throughput.multi_rate_throughput(_schedule(args), p, load=args.load)
        return [row(r.schedule.schedule_id, "multi-rate", r.value, p)]
    if args.rho_mbps is None:
        raise ValidationError(["throughput needs --rho-mbps or --rates-mbps"])
    rho = args.rho_mbps * 1e6
    r = throughput.fixed_rate_throughput(rho, p, load=args.load)
    return [row(args.rho_mbps, "fixed", r.value, p, rho=rho)]


def cmd_upper_bound(args, p):
    r = throughput.throughput_upper_bound(p, method=args.method)
    return [row(None, "upper-bound", r.value, p)]


def cmd_optimal_rate(args, p):
    _mbps_note()
    rs, T = throughput.optimal_rate_threshold(p, bracket=(args.rho_min_mbps * 1e6, args.rho_max_mbps * 1e6))
    return [row(None, "optimal-rate", rs, p, rho=rs), row(None, "fixed-optimal", T, p, rho=rs)]


def cmd_gain(args, p):
    _mbps_note()
    rho0 = args.rho0_mbps * 1e6
    g = throughput.densification_gain(p.psi, p, rho0)
    return [row(p.psi, "gain", g, p, rho=rho0)]


def cmd_threshold(args, p):
    grid = np.arange(args.psi_min, args.psi_max + 1e-9, args.psi_step)
    v = throughput.density_threshold(_tau(args.tau_db), p.k, p, grid=grid)
    return [row(args.tau_db, "threshold", v, p, tau_db=args.tau_db)]


def cmd_simulate(args, p):
    cfg = mc.McConfig(trials=args.trials, seed=args.seed, fading=args.fading, workers=args.workers)
    if args.what == "coverage":
        e = mc.simulate_coverage(_tau(args.tau_db), p, cfg)
        rows = [row(args.tau_db, "mc-coverage", e.mean, p, tau_db=args.tau_db, seed=args.seed),
                row(args.tau_db, "mc-coverage-halfwidth", e.half_width_95, p, tau_db=args.tau_db, seed=args.seed)]
        return rows
    joint = mc.simulate_joint(p, cfg, with_sir=args.what == "throughput")
    if args.records:
        with open(args.records, "w", encoding="utf-8", newline="") as fh:
            joint.write_csv(fh)
    if args.what == "load":
        pmf = mc.empirical_pmf(joint.psi_count)
        rows = [row(int(n), "mc-pmf", float(q), p, seed=args.seed) for n, q in zip(pmf.n, pmf.p)]
        rows.append(row(None, "mc-excluded", pmf.excluded, p, seed=args.seed))
        return rows
    if args.rho_mbps is None:
        raise ValidationError(["simulate throughput needs --rho-mbps"])
    _mbps_note()
    rho = args.rho_mbps * 1e6
    e = mc.simulate_fixed_rate_throughput(rho, p, cfg)
    return [row(args.rho_mbps, "mc-fixed", e.mean, p, rho=rho, seed=args.seed),
            row(args.rho_mbps, "mc-fixed-halfwidth", e.half_width_95, p, rho=rho, seed=args.seed)]


def _sweep_values(args):
    if args.values:
        vals = parse_values(args.values, integer=args.var == "k")
        return vals if args.var == "k" else [float(v) for v in vals]
    if args.start is None or args.stop is None:
        raise ValidationError(["sweep needs --values or --from/--to"])
    if args.steps < 1:
        raise ValidationError(["--steps must be >= 1"])
    xs = (np.geomspace(args.start, args.stop, args.steps) if args.log
          else np.linspace(args.start, args.stop, args.steps))
    return [int(round(x)) for x in xs] if args.var == "k" else [float(x) for x in xs]


def cmd_sweep(args, p):
    spec = SweepSpec(args.var, _sweep_values(args), p, [m.strip() for m in args.metric.split(",") if m.strip()],
                     args.format)
    if any(m in ("fixed", "multi-rate", "gain", "optimal-rate", "fixed-optimal") for m in spec.outputs) \
            or spec.variable == "rho":
        _mbps_note()

    def point(x):
        tau_db, rho, q = args.tau_db, (args.rho_mbps * 1e6 if args.rho_mbps is not None else None), p
        if spec.variable == "tau":
            tau_db = x
        elif spec.variable == "rho":
            rho = x * 1e6
        else:
            q = model.validate(p.replace(**{spec.variable: x}))
        out = []
        for m in spec.outputs:
            if m == "fixed" and rho is None:
                raise ValidationError(["metric 'fixed' needs --rho-mbps or --var rho"])
            for name, v, r in _metric(m, q, tau_db, rho, args):
                out.append(row(x, name, v, q, tau_db=tau_db, rho=r if r is not None else rho,
                               seed=args.seed if m == "mc-coverage" else None))
        return out

    def safe(x):
        try:
            return point(x), None
        except (NumericalError, ArithmeticError) as exc:
            return [], f"{spec.variable}={x}: {exc}"

    with ThreadPoolExecutor(max(1, args.workers)) as pool:
        results = list(pool.map(safe, spec.values))
    rows, failures = [], []
    for r, err in results:
        rows.extend(r)
        if err:
            failures.append(err)
    if failures:
        raise _PartialFailure(rows, failures)
    return rows


def cmd_defaults(args, p):
    return json.dumps(model.params_to_dict(model.NetworkParams()), indent=2) + "\n"


# -- parser ----------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="mmwave-densify", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        s = sub.add_parser(name, help=help_, description=help_)
        _add_param_flags(s)
        s.set_defaults(fn=fn)
        return s

    s = add("coverage", cmd_coverage, "coverage probability P(SIR > tau)")
    s.add_argument("--tau-db", type=float, required=True, help="SIR threshold in dB")
    s.add_argument("--method", choices=("integral", "series"), default="integral")

    s = add("series", cmd_series, "polynomial-in-k coefficients c_l(tau, psi)")
    s.add_argument("--tau-db", type=float, required=True, help="SIR threshold in dB")
    s.add_argument("--degree", type=int, help="degree L (default from --target-err)")
    s.add_argument("--target-err", type=float, default=1e-8, help="truncation bound target")

    s = add("load", cmd_load, "PMF of the number of users sharing a sector")
    s.add_argument("--form", choices=("auto", "simplified", "full"), default="auto")

    s = add("throughput", cmd_throughput, "fixed-rate or multi-rate area throughput (bit/s/km^2)")
    s.add_argument("--rho-mbps", type=float, help="fixed rate threshold in Mbit/s")
    s.add_argument("--rates-mbps", help="multi-rate thresholds in Mbit/s, comma separated")
    s.add_argument("--load", choices=("pmf", "mean"), default="pmf",
                   help="average over the load PMF or use the mean-bandwidth shortcut")

    s = add("upper-bound", cmd_upper_bound, "Shannon-rate upper bound on throughput (bit/s/km^2)")
    s.add_argument("--method", choices=("integral", "series"), default="integral")

    s = add("optimal-rate", cmd_optimal_rate, "rate threshold maximizing fixed-rate throughput")
    s.add_argument("--rho-min-mbps", type=float, default=0.1, help="search bracket low end, Mbit/s")
    s.add_argument("--rho-max-mbps", type=float, default=1e4, help="search bracket high end, Mbit/s")

    s = add("gain", cmd_gain, "densification gain T(psi rho0; psi, k) / T(rho0; 1, k)")
    s.add_argument("--rho0-mbps", type=float, default=80.0, help="reference rate at psi = 1, Mbit/s")

    s = add("threshold", cmd_threshold, "relative density maximizing coverage")
    s.add_argument("--tau-db", type=float, required=True, help="SIR threshold in dB")
    s.add_argument("--psi-min", type=float, default=0.25)
    s.add_argument("--psi-max", type=float, default=12.0)
    s.add_argument("--psi-step", type=float, default=0.25)

    s = add("simulate", cmd_simulate, "Monte Carlo estimates")
    s.add_argument("--what", choices=("coverage", "load", "throughput"), default="coverage")
    s.add_argument("--tau-db", type=float, default=10.0, help="SIR threshold in dB (coverage)")
    s.add_argument("--rho-mbps", type=float, help="rate threshold in Mbit/s (throughput)")
    s.add_argument("--records", help="write per-trial records CSV here (load/throughput)")
    _add_mc_flags(s)

    s = add("sweep", cmd_sweep, "evaluate metrics along one variable")
    s.add_argument("--var", choices=("tau", "psi", "k", "rho"), required=True,
                   help="swept variable (tau in dB, rho in Mbit/s)")
    s.add_argument("--values", help="comma list, ranges like 1..12 allowed")
    s.add_argument("--from", dest="start", type=float)
    s.add_argument("--to", dest="stop", type=float)
    s.add_argument("--steps", type=int, default=20)
    s.add_argument("--log", action="store_true", help="geometric spacing")
    s.add_argument("--metric", required=True, help="comma list of: " + ", ".join(SWEEP_METRICS))
    s.add_argument("--tau-db", type=float, default=10.0, help="SIR threshold in dB")
    s.add_argument("--rho-mbps", type=float, help="fixed rate in Mbit/s")
    s.add_argument("--rho0-mbps", type=float, default=80.0, help="reference rate for 'gain'")
    s.add_argument("--rates-mbps", help="multi-rate thresholds in Mbit/s")
    _add_mc_flags(s)

    s = sub.add_parser("defaults", help="print the default scenario as a JSON config")
    s.set_defaults(fn=cmd_defaults, out=None, format="csv", gnuplot=False)
    return ap


def _add_mc_flags(s):
    s.add_argument("--trials", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--fading", choices=mc.FADING_MODES, default="gamma")
    s.add_argument("--workers", type=int, default=1)


def _emit(text, args):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        if args.command == "defaults":
            _emit(cmd_defaults(args, None), args)
            return EXIT_OK
        p = params_from_args(args)
        rows = args.fn(args, p)
        code = EXIT_OK
    except _PartialFailure as exc:
        rows, code = exc.rows, EXIT_NUMERIC
        print(f"error: numeric failure at {exc}", file=sys.stderr)
    except (ValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalError, ArithmeticError) as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _emit(render(rows, args.format), args)
    if args.gnuplot:
        script = gnuplot_script(args.out or "data.csv", rows)
        if args.out:
            with open(args.out + ".gp", "w", encoding="utf-8") as fh:
                fh.write(script)
        else:
            sys.stderr.write(script)
    return code


def main(argv=None):
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
