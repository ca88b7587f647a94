"""Command-line front end: ``fracstep {simulate,stability,converge,compare,validate}``.

Data and reports go to stdout, diagnostics to stderr. Exit status is 0 on
success, 2 on a configuration error and 3 when a solver step fails.

Settings come from flags, then from an optional ``--config`` INI file, then
from model defaults, in that order of precedence. The config file holds a
``[model]`` block (``name`` plus parameter values) and a ``[run]`` block
whose keys are the long flag names with dashes turned into underscores::

    [model]
    name = predator_prey
    s = 0.2
    K = 25

    [run]
    scheme = both
    alpha = 0.65
    x0 = 6.5, 5.4
    h = 0.01
    T = 100
"""

import argparse
import configparser
import io
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields

import numpy as np

from . import analysis, convergence, csvio, models
from .glkernel import check_order
from .schemes import Grid, Scheme, SolverError, SolverOptions, integrate

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3

DEFAULTS = {
    "model": "predator_prey",
    "scheme": "NSFD",
    "alpha": "0.9",
    "t0": "0",
    "T": "10",
    "h": "0.1",
    "output": "fracstep",
    "newton_tol": "1e-12",
    "newton_max_iter": "50",
    "negativity_policy": "record",
    "gl_variant": "explicit",
    "jobs": "1",
    "max_events": "20",
    "samples": "1000",
    "box_max": "10",
    "format": "text",
}

COMMAND_DEFAULTS = {
    "converge": {"alpha": "0.5,0.6,0.7,0.8,0.9", "x0": "0.05,0.05", "T": "1",
                 "ladder": "2^-3,2^-4,2^-5,2^-6,2^-7", "h_star": "2^-12"},
    "compare": {"alpha": "0.8", "T": "5", "h_nsfd": "0.01", "h_gl": "0.001"},
    "stability": {"alpha": ""},
}


class ConfigError(ValueError):
    pass


def parse_number(text):
    """Float, also accepting powers written as ``2^-12``."""
    text = str(text).strip()
    try:
        if "^" in text:
            base, exp = text.split("^", 1)
            return float(base) ** float(exp)
        return float(text)
    except ValueError:
        raise ConfigError(f"not a number: {text!r}") from None


def parse_list(text):
    return [parse_number(v) for v in str(text).split(",") if v.strip()]


def parse_assignments(text):
    out = {}
    for item in str(text).split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise ConfigError(f"--set expects key=value pairs, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = parse_number(value)
    return out


class Settings:
    """Layered lookup: flags, then config file, then command/model defaults."""

    def __init__(self, args):
        self.args = args
        self.file = {}
        self.file_params = {}
        self.file_model = None
        if getattr(args, "config", None):
            self._read_config(args.config)

    def _read_config(self, path):
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            with open(path) as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"{path}: {exc}") from None
        for section in cp.sections():
            if section not in ("model", "run"):
                raise ConfigError(f"{path}: unknown section [{section}]")
        if cp.has_section("model"):
            block = dict(cp["model"])
            self.file_model = block.pop("name", None)
            for key, value in block.items():
                try:
                    self.file_params[key] = parse_number(value)
                except ConfigError as exc:
                    raise ConfigError(f"{path}: [model] {key}: {exc}") from None
        if cp.has_section("run"):
            self.file = {k.replace("-", "_"): v for k, v in cp["run"].items()}

    def get(self, key):
        value = getattr(self.args, key, None)
        if value is not None:
            return value
        if key in self.file:
            return self.file[key]
        cmd = COMMAND_DEFAULTS.get(self.args.command, {})
        if key in cmd:
            return cmd[key]
        return DEFAULTS.get(key)

    def number(self, key):
        try:
            return parse_number(self.get(key))
        except ConfigError as exc:
            raise ConfigError(f"--{key.replace('_', '-')}: {exc}") from None

    def numbers(self, key):
        try:
            return parse_list(self.get(key))
        except ConfigError as exc:
            raise ConfigError(f"--{key.replace('_', '-')}: {exc}") from None

    def alphas(self):
        out = []
        for a in self.numbers("alpha"):
            try:
                out.append(check_order(a))
            except ValueError as exc:
                raise ConfigError(f"--alpha: {exc}") from None
        return out

    def model(self):
        name = self.args.model or self.file_model or DEFAULTS["model"]
        params = dict(self.file_params) if name == (self.file_model or name) else {}
        if self.args.set:
            params.update(parse_assignments(self.args.set))
        try:
            p = models.make_params(name, params)
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from None
        return name, p, models.MODELS[name].build(p)

    def x0(self, name):
        raw = self.get("x0")
        if raw is None:
            return np.array(models.MODELS[name].default_x0, dtype=float)
        try:
            return np.array(parse_list(raw), dtype=float)
        except ConfigError as exc:
            raise ConfigError(f"--x0: {exc}") from None

    def solver_options(self):
        try:
            return SolverOptions(
                newton_tol=self.number("newton_tol"),
                newton_max_iter=int(self.number("newton_max_iter")),
                negativity_policy=self.get("negativity_policy"),
                gl_variant=self.get("gl_variant"),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def grid(self, h_key="h"):
        t0, T, h = self.number("t0"), self.number("T"), self.number(h_key)
        if h <= 0:
            raise ConfigError(f"--{h_key.replace('_', '-')}: step must be positive")
        try:
            return Grid.from_span(t0, T, h)
        except ValueError as exc:
            raise ConfigError(f"--T/--{h_key.replace('_', '-')}: {exc}") from None


def _describe(name, p):
    return f"{name} (" + ", ".join(f"{f.name}={getattr(p, f.name):g}" for f in fields(p)) + ")"


def _vec(v, digits=6):
    return "(" + ", ".join(f"{x:.{digits}g}" for x in v) + ")"


def _schemes(text):
    text = str(text).upper()
    if text == "BOTH":
        return [Scheme.NSFD, Scheme.GL]
    try:
        return [Scheme(text)]
    except ValueError:
        raise ConfigError(f"--scheme must be GL, NSFD or both, got {text!r}") from None


def _timed_run(sys_, scheme, alpha, x0, grid, opts):
    start = time.perf_counter()
    traj = integrate(sys_, scheme, alpha, x0, grid, opts)
    return traj, time.perf_counter() - start


def _check_dim(sys_, x0):
    if len(x0) != sys_.dim:
        raise ConfigError(f"--x0: expected {sys_.dim} components, got {len(x0)}")


def cmd_simulate(settings, out):
    name, p, sys_ = settings.model()
    x0 = settings.x0(name)
    _check_dim(sys_, x0)
    grid = settings.grid()
    alphas = settings.alphas()
    schemes = _schemes(settings.get("scheme"))
    opts = settings.solver_options()
    prefix = settings.get("output")
    max_events = int(settings.number("max_events"))
    jobs = max(1, int(settings.number("jobs")))

    runs = [(s, a) for s in schemes for a in alphas]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_timed_run, sys_, s, a, x0, grid, opts) for s, a in runs]
        results = [f.result() for f in futures]

    print(f"model: {_describe(name, p)}", file=out)
    print(f"grid: t0={grid.t0:g} T={grid.T:g} h={grid.h:g} steps={grid.n_steps}", file=out)
    for (scheme, alpha), (traj, elapsed) in zip(runs, results):
        path = f"{prefix}_{scheme.value}_alpha{alpha:g}.csv"
        csvio.save_trajectory(path, traj.times, traj.states)
        ev = traj.negativity_events
        variant = f" [{opts.gl_variant}]" if scheme is Scheme.GL else ""
        print(f"\n[{scheme.value}{variant} alpha={alpha:g}] -> {path}", file=out)
        print(f"  wall_clock_s: {elapsed:.4f}", file=out)
        print(f"  steps: {grid.n_steps}", file=out)
        print(f"  final_state: {_vec(traj.final, 10)}", file=out)
        print(f"  min_state: {_vec(traj.states.min(axis=0), 10)}", file=out)
        print(f"  negativity_events: {len(ev)}", file=out)
        for e in ev[:max_events]:
            print(f"    step={e.step} component={e.component + 1} value={e.value:.6g}", file=out)
        if len(ev) > max_events:
            print(f"    ... {len(ev) - max_events} more", file=out)
    return EXIT_OK


def _stability_rows(report):
    rows = []
    for r in report.points:
        pt = r.point if r.point is not None else [math.nan, math.nan]
        eig = list(r.eigenvalues) + [complex(math.nan, math.nan)] * (2 - len(r.eigenvalues))
        base = [r.kind, str(r.exists).lower(), csvio.fmt(report.R0), csvio.fmt(pt[0]),
                csvio.fmt(pt[1]), csvio.fmt(eig[0].real), csvio.fmt(eig[0].imag),
                csvio.fmt(eig[1].real), csvio.fmt(eig[1].imag),
                "" if r.marginal_alpha is None else csvio.fmt(r.marginal_alpha),
                r.real_kind or ""]
        if not r.exists or not report.alphas:
            rows.append(base + ["", ""])
        else:
            rows.extend(base + [csvio.fmt(a), r.classification_at(a)] for a in report.alphas)
    return rows


STABILITY_HEADER = ["point", "exists", "R0", "x", "y", "eig1_re", "eig1_im", "eig2_re",
                    "eig2_im", "marginal_alpha", "real_kind", "alpha", "verdict"]


def _format_eig(ev):
    if ev.imag == 0:
        return f"{ev.real:.6g}"
    return f"{ev.real:.6g}{'+' if ev.imag > 0 else '-'}{abs(ev.imag):.6g}i"


def format_stability(name, p, report):
    lines = [f"model: {_describe(name, p)}", f"R0 = {report.R0:.4f}"]
    for r in report.points:
        if not r.exists:
            lines.append(f"{r.kind}: {r.reason}")
            continue
        lines.append(f"{r.kind} = ({r.point[0]:.4f}, {r.point[1]:.4f})")
        lines.append("  eigenvalues: " + ", ".join(_format_eig(ev) for ev in r.eigenvalues)
                     + (f"  [{r.real_kind}]" if r.real_kind else ""))
        lines.append("  |arg|: " + ", ".join(f"{a:.6f}" for a in r.args))
        if r.marginal_alpha is not None:
            lines.append(f"  marginal alpha = {r.marginal_alpha:.4f}")
        for note in r.notes:
            lines.append(f"  note: {note}")
        for a in report.alphas:
            lines.append(f"  alpha={a:g}: {r.classification_at(a)}")
    return "\n".join(lines)


def cmd_stability(settings, out):
    name, p, _ = settings.model()
    if name != "predator_prey":
        raise ConfigError(f"stability analysis needs closed-form equilibria; "
                          f"model {name!r} is not supported")
    alphas = settings.alphas()
    report = analysis.stability_report(p, alphas)
    rows = _stability_rows(report)
    if settings.get("format") == "csv":
        csvio.write_rows(out, STABILITY_HEADER, rows)
    else:
        print(format_stability(name, p, report), file=out)
    if settings.args.output:
        with open(f"{settings.args.output}_stability.csv", "w", newline="") as fh:
            csvio.write_rows(fh, STABILITY_HEADER, rows)
    return EXIT_OK


def cmd_converge(settings, out):
    name, p, sys_ = settings.model()
    x0 = settings.x0(name)
    _check_dim(sys_, x0)
    alphas = settings.alphas()
    ladder = settings.numbers("ladder")
    h_star = settings.number("h_star")
    T = settings.number("T")
    try:
        convergence.check_ladder(ladder, h_star)
        Grid.from_span(0.0, T, h_star)
        for h in ladder:
            Grid.from_span(0.0, T, h)
    except ValueError as exc:
        raise ConfigError(f"--ladder/--h-star: {exc}") from None
    opts = settings.solver_options()
    jobs = max(1, int(settings.number("jobs")))
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        tables = list(pool.map(
            lambda a: convergence.rate_table(sys_, a, x0, T, ladder, h_star, opts=opts), alphas))

    header = ["alpha", "h", "xi", "rho"] + [f"eps_x{i + 1}" for i in range(sys_.dim)]
    rows = [row for t in tables for row in t.rows()]
    if settings.get("format") == "csv":
        csvio.write_rows(out, header, rows)
    else:
        print(f"model: {_describe(name, p)}; x0={_vec(x0)}; T={T:g}", file=out)
        print(convergence.format_rate_tables(tables), file=out)
    if settings.args.output:
        with open(f"{settings.args.output}_rates.csv", "w", newline="") as fh:
            csvio.write_rows(fh, header, rows)
    return EXIT_OK


def cmd_compare(settings, out):
    name, p, sys_ = settings.model()
    x0 = settings.x0(name)
    _check_dim(sys_, x0)
    alpha = settings.alphas()
    if len(alpha) != 1:
        raise ConfigError("--alpha: compare takes a single order")
    alpha = alpha[0]
    g_nsfd = settings.grid("h_nsfd")
    g_gl = settings.grid("h_gl")
    opts = settings.solver_options()
    print(f"model: {_describe(name, p)}; alpha={alpha:g}; x0={_vec(x0)}", file=out)
    if g_nsfd.n_steps == 0:
        print("empty comparison (T = t0)", file=out)
        return EXIT_OK
    coarse_h, fine_h = max(g_nsfd.h, g_gl.h), min(g_nsfd.h, g_gl.h)
    ratio = int(round(coarse_h / fine_h))
    if abs(ratio * fine_h - coarse_h) > 1e-12 * coarse_h:
        raise ConfigError("--h-nsfd/--h-gl: the larger step must be a whole multiple "
                          "of the smaller one")

    nsfd, t_nsfd = _timed_run(sys_, Scheme.NSFD, alpha, x0, g_nsfd, opts)
    gl, t_gl = _timed_run(sys_, Scheme.GL, alpha, x0, g_gl, opts)
    if g_nsfd.h >= g_gl.h:
        a, b = nsfd.states, gl.states[::ratio]
    else:
        a, b = nsfd.states[::ratio], gl.states
    n = min(len(a), len(b))
    diff = np.abs(a[:n] - b[:n]).max()

    for label, traj, h, elapsed in (("NSFD", nsfd, g_nsfd.h, t_nsfd),
                                   (f"GL [{opts.gl_variant}]", gl, g_gl.h, t_gl)):
        print(f"{label}: h={h:g} steps={traj.grid.n_steps} wall_clock_s={elapsed:.4f} "
              f"final={_vec(traj.final, 8)} negativity_events={len(traj.negativity_events)}",
              file=out)
    print(f"max_node_difference: {diff:.6g} (on the h={coarse_h:g} grid)", file=out)
    print(f"time_ratio_gl_over_nsfd: {t_gl / t_nsfd:.3f}", file=out)
    if settings.args.output:
        for traj in (nsfd, gl):
            csvio.save_trajectory(f"{settings.args.output}_{traj.scheme.value}_h{traj.grid.h:g}.csv",
                                  traj.times, traj.states)
    return EXIT_OK


def cmd_validate(settings, out):
    name, p, sys_ = settings.model()
    n = int(settings.number("samples"))
    box = settings.number("box_max")
    seed = settings.get("seed")
    if seed is None:
        seed = os.environ.get("FRACSTEP_SEED", 0)
    try:
        seed = int(seed)
    except ValueError:
        raise ConfigError(f"seed must be an integer, got {seed!r}") from None
    print(f"model: {_describe(name, p)}; samples={n} box=[0,{box:g}] seed={seed}", file=out)
    for rep in (models.validate_decomposition(sys_, n, box, seed),
                models.check_quasi_monotone(sys_, n, box, seed)):
        print("\n".join(rep.lines()), file=out)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "stability": cmd_stability,
    "converge": cmd_converge,
    "compare": cmd_compare,
    "validate": cmd_validate,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fracstep",
        description="GL and positivity-preserving NSFD solvers for Caputo fractional systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with [model] and [run] blocks")
    common.add_argument("--model", choices=sorted(models.MODELS))
    common.add_argument("--set", help="model parameters, e.g. s=0.2,K=25")
    common.add_argument("--output", help="path prefix for CSV files")
    common.add_argument("--format", choices=["text", "csv"], help="stdout report format")

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--alpha", help="fractional order(s), comma separated")
    run.add_argument("--x0", help="initial state, comma separated")
    run.add_argument("--t0")
    run.add_argument("--T", dest="T", help="final time")
    run.add_argument("--newton-tol")
    run.add_argument("--newton-max-iter")
    run.add_argument("--negativity-policy", choices=["record", "halt"])
    variant = run.add_mutually_exclusive_group()
    variant.add_argument("--gl-explicit", dest="gl_variant", action="store_const",
                         const="explicit", help="GL with f at the previous level (default)")
    variant.add_argument("--gl-implicit", dest="gl_variant", action="store_const",
                         const="implicit", help="GL with f at the new level (Newton)")
    run.add_argument("--jobs", help="concurrent solver runs for alpha sweeps")

    p = sub.add_parser("simulate", parents=[common, run], help="integrate and write trajectories")
    p.add_argument("--scheme", help="GL, NSFD or both")
    p.add_argument("--h", help="time step")
    p.add_argument("--max-events", help="negativity events listed per run")

    p = sub.add_parser("stability", parents=[common], help="equilibria and Matignon stability")
    p.add_argument("--alpha", help="orders to classify, comma separated")

    p = sub.add_parser("converge", parents=[common, run], help="self-convergence rate table")
    p.add_argument("--ladder", help="dyadic steps, e.g. 2^-3,2^-4")
    p.add_argument("--h-star", help="reference step")

    p = sub.add_parser("compare", parents=[common, run], help="NSFD vs GL at different steps")
    p.add_argument("--h-nsfd")
    p.add_argument("--h-gl")

    p = sub.add_parser("validate", parents=[common], help="sample the model's sign conditions")
    p.add_argument("--samples")
    p.add_argument("--box-max")
    p.add_argument("--seed", type=int, help="defaults to $FRACSTEP_SEED or 0")
    return parser


def main(argv=None, stdout=None):
    args = build_parser().parse_args(argv)
    out = stdout or sys.stdout
    try:
        settings = Settings(args)
        return COMMANDS[args.command](settings, out)
    except ConfigError as exc:
        print(f"fracstep {args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"fracstep {args.command}: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def run(argv=None):
    """Run ``main`` and capture stdout; returns ``(exit_code, text)``."""
    buf = io.StringIO()
    code = main(argv, buf)
    return code, buf.getvalue()


if __name__ == "__main__":
    sys.exit(main())
