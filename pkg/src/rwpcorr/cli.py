"""Command-line driver: analytic tables, simulations, figure data and validation.

Every subcommand writes CSV (comma separated, header row) to ``--out`` or to
standard output. Parameter precedence is flag, then ``--config`` JSON file,
then the baseline (N=50, K=50, eps=0.5, M=5, v=1, xi=1, a=4, warmup=10000).

Exit codes: 0 success, 2 bad or unsupported configuration, 3 validation
failure, 1 anything else (for example I/O errors).

CSV schemas:
  steady-state  n,f                     (+ f_oracle with --oracle, f_mc,f_mc_stderr with --with-mc)
  kernel        n,k,tau,prob
  correlation   x_p,tau,mean,std,rho,rho_ppp
  outage        x_p,P_out,P_out_cond_tau<T>
  simulate      quantity,x_p,tau,estimate,stderr,n_samples   (+ JSON manifest)
  figure        one CSV per table, see rwpcorr.figures
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import chain, csvio, figures, interference, mobility, outage, simulation, validation
from .errors import InvalidConfigError, StateSpaceError, UnsupportedConfigurationError
from .interference import ChannelConfig
from .mobility import LatticeConfig
from .outage import LinkConfig
from .simulation import SimConfig

log = logging.getLogger("rwpcorr")

BASELINE = {
    "n": 50, "m": 5, "k_users": 50, "xi": 1.0, "alpha": 4.0, "epsilon": 0.5,
    "speed": "1", "densify": 1, "tau": 1, "xp": None, "xt": None, "q": 1.0,
    "noise": 1e-3, "seed": 0, "warmup": 10_000, "samples": 20_000,
    "replications": 30, "with_mc": False, "oracle": False, "out": None, "quick": False,
}

COMMANDS = ("steady-state", "kernel", "correlation", "outage", "simulate", "figure", "validate")


class RunSpec:
    """Resolved parameters of one invocation; attribute access by flag name."""

    def __init__(self, command: str, values: dict, figure_id=None):
        self.command = command
        self.figure_id = figure_id
        self.values = values
        for key, value in values.items():
            setattr(self, key, value)

    @property
    def speeds(self) -> tuple:
        try:
            speeds = tuple(Fraction(v.strip()) for v in str(self.speed).split(","))
        except ValueError:
            raise InvalidConfigError(f"cannot parse speed {self.speed!r}") from None
        return speeds

    @property
    def lattice(self) -> LatticeConfig:
        speeds = self.speeds
        v = speeds[0] if len(speeds) == 1 else Fraction(1)
        return LatticeConfig(self.n, self.m, v=v, N_d=self.densify)

    @property
    def channel(self) -> ChannelConfig:
        return ChannelConfig(K=self.k_users, xi=self.xi, epsilon=self.epsilon, a=self.alpha)

    def receivers(self) -> np.ndarray:
        return parse_positions(self.xp) if self.xp is not None else np.arange(1, self.n + 1, dtype=float)

    def sim(self, link=None) -> SimConfig:
        speeds = self.speeds
        return SimConfig(self.lattice, self.channel, link=link, warmup_slots=self.warmup,
                         sample_slots=self.samples, replications=self.replications, seed=self.seed,
                         speed_set=speeds if len(speeds) > 1 else None)


def parse_positions(text) -> np.ndarray:
    """``"3"``, ``"1,2.5,7"`` or an inclusive range ``"1:25"`` / ``"1:25:2"``."""
    if isinstance(text, (int, float)):
        return np.array([float(text)])
    if isinstance(text, (list, tuple)):
        return np.array([float(v) for v in text])
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            step = parts[2] if len(parts) == 3 else 1.0
            if step <= 0:
                raise ValueError
            return np.arange(parts[0], parts[1] + step / 2, step)
        return np.array([float(p) for p in text.split(",")])
    except ValueError:
        raise InvalidConfigError(f"cannot parse receiver positions {text!r}") from None


def _coerce(key, value):
    base = BASELINE[key]
    if value is None or base is None or key == "speed":
        return value if key != "speed" else str(value)
    try:
        if isinstance(base, bool):
            if not isinstance(value, bool):
                raise ValueError
            return value
        if isinstance(base, int):
            if float(value) != int(float(value)):
                raise ValueError
            return int(float(value))
        return type(base)(value)
    except (TypeError, ValueError):
        raise InvalidConfigError(f"config key {key!r}: bad value {value!r}") from None


def load_config(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InvalidConfigError(f"cannot read config file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InvalidConfigError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InvalidConfigError("config file must hold a JSON object")
    unknown = sorted(set(data) - set(BASELINE))
    if unknown:
        raise InvalidConfigError(f"unknown config keys: {', '.join(unknown)}")
    return {k: _coerce(k, v) for k, v in data.items()}


def resolve(args: argparse.Namespace) -> RunSpec:
    values = dict(BASELINE)
    if args.config:
        values.update(load_config(args.config))
    for key in BASELINE:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return RunSpec(args.command, values, getattr(args, "figure_id", None))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model")
    g.add_argument("--n", type=int, help="lattice size N (default 50)")
    g.add_argument("--m", type=int, help="maximum think time M in slots (default 5)")
    g.add_argument("--k-users", dest="k_users", type=int, help="number of users K (default 50)")
    g.add_argument("--xi", type=float, help="ALOHA transmit probability (default 1)")
    g.add_argument("--alpha", type=float, help="pathloss exponent a (default 4)")
    g.add_argument("--epsilon", type=float, help="pathloss guard epsilon (default 0.5)")
    g.add_argument("--speed", help="speed v in points per slot; a comma list draws one per travel (MC only)")
    g.add_argument("--densify", type=int, help="lattice densification factor N_d (default 1)")
    g.add_argument("--tau", type=int, help="time lag in slots (default 1)")
    g.add_argument("--xp", help="receiver position(s): 3 | 1,2,5 | 1:25 | 1:25:2 (default all points)")
    g.add_argument("--xt", type=float, help="desired transmitter position (default: at the receiver)")
    g.add_argument("--q", type=float, help="SINR threshold (default 1)")
    g.add_argument("--noise", type=float, help="noise power P_N (default 1e-3)")
    r = common.add_argument_group("run")
    r.add_argument("--seed", type=int, help="simulation seed (default 0)")
    r.add_argument("--warmup", type=int, help="warm-up slots (default 10000)")
    r.add_argument("--samples", type=int, help="sampled slots per replication (default 20000)")
    r.add_argument("--replications", type=int, help="independent replications (default 30)")
    r.add_argument("--with-mc", dest="with_mc", action="store_const", const=True,
                   help="add simulation estimates")
    r.add_argument("--oracle", action="store_const", const=True,
                   help="use the exact Markov-chain kernel")
    r.add_argument("--quick", action="store_const", const=True, help="validate: small lattice, short runs")
    r.add_argument("--out", help="output file (figure: output directory)")
    r.add_argument("--config", help="JSON file of parameter defaults; keys are flag names")

    parser = argparse.ArgumentParser(prog="rwpcorr", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("steady-state", parents=[common], help="steady-state occupancy f(n)")
    sub.add_parser("kernel", parents=[common], help="displacement kernel at lag --tau")
    sub.add_parser("correlation", parents=[common], help="interference moments and correlation")
    sub.add_parser("outage", parents=[common], help="unconditional and conditional outage")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo estimates with manifest")
    fig = sub.add_parser("figure", parents=[common], help="data for one evaluation figure (2-9)",
                         description=figures.__doc__,
                         formatter_class=argparse.RawDescriptionHelpFormatter)
    fig.add_argument("figure_id", type=int, help="figure number, 2 to 9")
    sub.add_parser("validate", parents=[common], help="run the self-check suite")
    return parser


def select_kernel(opts: RunSpec, tau: int):
    """Closed form where one exists, the chain oracle with ``--oracle``."""
    lat = opts.lattice
    if opts.oracle:
        exact = chain.oracle_kernels(lat, [tau])[tau]
        try:
            approx = mobility.kernel_for_speed(lat, tau)
        except UnsupportedConfigurationError:
            return exact
        gap = exact.to_matrix() - approx.to_matrix()
        log.warning("closed form vs oracle at lag %d: largest underestimate %.3g, largest overestimate %.3g",
                    tau, max(0.0, gap.max()), max(0.0, -gap.min()))
        return exact
    try:
        return mobility.kernel_for_speed(lat, tau)
    except UnsupportedConfigurationError as exc:
        raise UnsupportedConfigurationError(f"{exc}; rerun with --oracle for the exact kernel") from None


class Output:
    """Destination for the primary table plus companion files."""

    def __init__(self, out):
        self.path = Path(out) if out else None

    def write(self, table, digits=csvio.STATS_DIGITS, suffix=""):
        if self.path is None:
            if suffix:
                sys.stdout.write("\n")
            csvio.write_table(table, sys.stdout, digits)
            return None
        path = self.path.with_name(self.path.stem + suffix + (self.path.suffix or ".csv"))
        csvio.write_table(table, path, digits)
        return path

    def manifest(self, data, suffix=""):
        if self.path is None:
            sys.stderr.write(json.dumps(data, sort_keys=True) + "\n")
            return
        csvio.write_manifest(data, self.path.with_name(self.path.stem + suffix + ".manifest.json"))


def _manifest(opts: RunSpec, **extra):
    config = {k: v for k, v in opts.values.items() if k not in ("out",)}
    return csvio.manifest(opts.seed, {"command": opts.command, **config}, extra or None)


def cmd_steady_state(opts: RunSpec) -> int:
    lat = opts.lattice
    ss = mobility.steady_state(lat)
    table = csvio.steady_state_table(ss)
    out = Output(opts.out)
    if opts.oracle:
        ch = chain.build_chain(lat)
        law = chain.stationary(ch)
        table = csvio.Table(table.name, table.columns + ("f_oracle",),
                            [row + [float(v)] for row, v in zip(table.rows, law.marginal(ch))])
        if out.path is not None:
            out.write(csvio.oracle_table(ch, law), csvio.KERNEL_DIGITS, "_oracle")
    if opts.with_mc:
        est = simulation.empirical_occupancy(opts.sim())
        table = csvio.Table(table.name, table.columns + ("f_mc", "f_mc_stderr"),
                            [row + [e.estimate, e.stderr] for row, e in zip(table.rows, est)])
        out.manifest(_manifest(opts))
    out.write(table, csvio.KERNEL_DIGITS)
    return 0


def cmd_kernel(opts: RunSpec) -> int:
    k = select_kernel(opts, opts.tau)
    Output(opts.out).write(csvio.kernel_table(k), csvio.KERNEL_DIGITS)
    return 0


def cmd_correlation(opts: RunSpec) -> int:
    lat, ch = opts.lattice, opts.channel
    ss = mobility.steady_state(lat)
    k = select_kernel(opts, opts.tau)
    xp = opts.receivers()
    mean = np.atleast_1d(interference.mean_interference(ss, ch, xp))
    std = np.sqrt(np.atleast_1d(interference.variance(ss, ch, xp)))
    rho = interference.correlation(ss, k, ch, xp)
    rho_ppp = interference.ppp_variants(ss, k, ch, xp).rho
    out = Output(opts.out)
    out.write(csvio.interference_table(xp, opts.tau, mean, std, rho, rho_ppp))
    if opts.with_mc:
        est = simulation.estimate_interference(opts.sim(), xp, taus=(opts.tau,))
        rows = (csvio.estimate_rows("mean", xp, est.mean) + csvio.estimate_rows("std", xp, est.std)
                + csvio.estimate_rows("rho", xp, est.rho[opts.tau], opts.tau))
        out.write(csvio.estimates_table(rows), suffix="_mc")
        out.manifest(_manifest(opts), "_mc")
    return 0


def _link(opts: RunSpec, x_p: float) -> LinkConfig:
    x_t = x_p if opts.xt is None else opts.xt
    return LinkConfig(x_p=x_p, x_t=x_t, q=opts.q, P_N=opts.noise, channel=opts.channel)


def cmd_outage(opts: RunSpec) -> int:
    ss = mobility.steady_state(opts.lattice)
    k = select_kernel(opts, opts.tau)
    xp = opts.receivers()
    res = [outage.outage_result(ss, k, _link(opts, float(x))) for x in xp]
    table = csvio.outage_table(xp, [r.unconditional for r in res], [r.conditional for r in res])
    if opts.tau != 1:
        table = table._replace(columns=("x_p", "P_out", f"P_out_cond_tau{opts.tau}"))
    out = Output(opts.out)
    out.write(table)
    if opts.with_mc:
        rows = _simulate_outage(opts, xp)
        out.write(csvio.estimates_table(rows), suffix="_mc")
        out.manifest(_manifest(opts), "_mc")
    return 0


def _simulate_outage(opts: RunSpec, xp) -> list:
    if opts.xt is None:
        link = _link(opts, float(xp[0]))
        est = simulation.estimate_outage(opts.sim(link), taus=(opts.tau,), x_p=xp)
        outs, conds = est.outage, est.conditional[opts.tau]
    else:
        outs, conds = [], []
        for x in xp:
            link = _link(opts, float(x))
            est = simulation.estimate_outage(opts.sim(link), taus=(opts.tau,))
            outs.append(est.outage[0])
            conds.append(est.conditional[opts.tau][0])
    return (csvio.estimate_rows("P_out", xp, outs)
            + csvio.estimate_rows("P_out_cond", xp, conds, opts.tau))


def cmd_simulate(opts: RunSpec) -> int:
    xp = opts.receivers()
    cfg = opts.sim()
    taus = tuple(sorted({1, opts.tau}))
    est = simulation.estimate_interference(cfg, xp, taus=taus)
    rows = csvio.estimate_rows("mean", xp, est.mean) + csvio.estimate_rows("std", xp, est.std)
    for t in taus:
        if t in est.rho:
            rows += csvio.estimate_rows("rho", xp, est.rho[t], t)
    occ = simulation.empirical_occupancy(cfg)
    points = mobility.lattice_coordinates(cfg.lattice)
    rows += csvio.estimate_rows("occupancy", points, occ)
    rows += _simulate_outage(opts, xp)
    out = Output(opts.out)
    out.write(csvio.estimates_table(rows))
    out.manifest(_manifest(opts))
    return 0


def cmd_figure(opts: RunSpec) -> int:
    settings = figures.FigureSettings(N=opts.n, K=opts.k_users, epsilon=opts.epsilon, with_mc=opts.with_mc,
                                      oracle=opts.oracle, seed=opts.seed, warmup=opts.warmup,
                                      samples=opts.samples, replications=opts.replications)
    tables = figures.figure(opts.figure_id, settings)
    if opts.out is None:
        for i, table in enumerate(tables):
            if i:
                sys.stdout.write("\n")
            csvio.write_table(table, sys.stdout)
        return 0
    outdir = Path(opts.out)
    for table in tables:
        csvio.write_table(table, outdir / f"{table.name}.csv")
        if table.name.endswith("_mc"):
            csvio.write_manifest(_manifest(opts, figure=opts.figure_id), outdir / f"{table.name}.manifest.json")
    return 0


def cmd_validate(opts: RunSpec) -> int:
    settings = validation.ValidationSettings(
        N=opts.n, M=opts.m, K=opts.k_users, a=opts.alpha, xi=opts.xi, epsilon=opts.epsilon,
        seed=opts.seed, warmup=opts.warmup, samples=opts.samples,
        replications=opts.replications, quick=opts.quick)
    results = validation.validate(settings)
    text = validation.report(results) + "\n"
    if opts.out:
        Path(opts.out).write_text(text)
    sys.stdout.write(text)
    return 0 if all(r.passed for r in results) else 3


HANDLERS = {
    "steady-state": cmd_steady_state, "kernel": cmd_kernel, "correlation": cmd_correlation,
    "outage": cmd_outage, "simulate": cmd_simulate, "figure": cmd_figure, "validate": cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        opts = resolve(args)
        return HANDLERS[opts.command](opts)
    except (InvalidConfigError, UnsupportedConfigurationError, StateSpaceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
