"""
Command-line harness: every subcommand writes CSVs to the output directory
(``--out``, else $TORUSWALK_OUT, else the working directory), a key=value
manifest next to them, and prints one summary line per run.

Exit codes: 0 success, 2 usage error, 3 invalid parameter, 4 output path
not writable.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .evolution import MarkedCoinSpec, evolve, grover_coin
from .lattice import (
    LatticeGeometry,
    make_global_uniform,
    make_localized_uniform_coin,
    measure,
    write_distribution_csv,
)
from .limiting import (
    average_distribution,
    limiting_distribution,
    peak_count,
)
from .mixing import (
    classical_mixing_baseline,
    default_horizon,
    distance_trace,
    mixing_times_from_trace,
    scaling_sweep,
)
from .records import manifest_hash, manifest_text, write_csv
from .search import run_search, stationary_reference_marked
from .spectral import build_eigensystem

OUT_ENV = "TORUSWALK_OUT"
EXIT_USAGE, EXIT_PARAM, EXIT_OUTPUT = 2, 3, 4

FIG2_SIDES = (21, 31, 41, 51, 61, 71, 81, 91, 101)
FIG_EPSILONS = (0.1, 0.2, 0.3, 0.4, 0.5)


class OutputError(OSError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: usage error: {message}\n")


class Run:
    """Output directory plus the manifest shared by the files of one run."""

    def __init__(self, out: Path, name: str, params: dict):
        self.out = out
        self.name = name
        self.params = dict(params)
        self.digest = manifest_hash(self.params)
        self.comment = f"manifest_sha256={self.digest}"
        self.files: list[Path] = []
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / f"{name}.manifest").write_text(manifest_text(self.params))
        except OSError as exc:
            raise OutputError(f"cannot write to output directory {out}: {exc.strerror or exc}") from exc

    def path(self, suffix: str) -> Path:
        p = self.out / f"{self.name}{suffix}"
        self.files.append(p)
        return p

    def csv(self, suffix: str, header, rows, extra_comment: Optional[str] = None):
        comment = self.comment if extra_comment is None else f"{self.comment}\n# {extra_comment}"
        try:
            write_csv(self.path(suffix), header, rows, comment=comment)
        except OSError as exc:
            raise OutputError(f"cannot write {self.out / (self.name + suffix)}: {exc.strerror or exc}") from exc

    def distribution(self, suffix: str, dist, extra_comment: Optional[str] = None):
        comment = self.comment if extra_comment is None else f"{self.comment}\n# {extra_comment}"
        try:
            write_distribution_csv(dist, self.path(suffix), comment=comment)
        except OSError as exc:
            raise OutputError(f"cannot write {self.out / (self.name + suffix)}: {exc.strerror or exc}") from exc


def _geometry(side: int) -> LatticeGeometry:
    return LatticeGeometry(side)


def _initial(geometry, start: str, x0: int, y0: int):
    if start == "uniform":
        return make_global_uniform(geometry)
    return make_localized_uniform_coin(geometry, x0, y0)


def _coin(geometry, kind: str, mx: int, my: int):
    return grover_coin() if kind == "grover" else MarkedCoinSpec(geometry, (mx, my))


def _trace_rows(trace):
    return zip(trace.t, trace.average, trace.instantaneous, trace.average_to_uniform)


TRACE_HEADER = ("t", "tv_avg_to_pi", "tv_inst_to_pi", "tv_avg_to_uniform")
SWEEP_HEADER = ("N", "epsilon", "M_eps", "I_eps", "reached")
FIT_HEADER = ("model", "key", "slope_or_exponent", "intercept_or_prefactor", "r_squared", "residual_max", "n_points")


def _fit_rows(fits: dict):
    for key, f in fits.items():
        c = f.coefficients
        a = c.get("slope", c.get("exponent"))
        b = c.get("intercept", c.get("prefactor"))
        yield (f.model, key, a, b, f.r_squared, f.residual_max, f.n_points)


# -- subcommands -------------------------------------------------------------

def cmd_evolve(args, out: Path) -> str:
    g = _geometry(args.side)
    init = _initial(g, args.start, args.x0, args.y0)
    coin = _coin(g, args.coin, args.marked_x, args.marked_y)
    final = evolve(init, coin, args.steps)
    run = Run(out, f"evolve_side{args.side}_t{args.steps}", _params(args))
    dist = measure(final)
    run.distribution(".csv", dist)
    return f"evolve side={args.side} steps={args.steps} coin={args.coin} norm={final.norm_squared():.15f}"


def cmd_spectrum(args, out: Path) -> str:
    g = _geometry(args.side)
    es = build_eigensystem(g)
    rows = []
    for kx in range(g.side):
        for ky in range(g.side):
            th = es.theta[kx, ky]
            for lam in es.eigenvalues[kx, ky]:
                rows.append((kx, ky, lam.real, lam.imag, None if np.isnan(th) else th))
    run = Run(out, f"spectrum_side{args.side}", _params(args))
    run.csv(".csv", ("kx", "ky", "re_lambda", "im_lambda", "theta"), rows, extra_comment=f"gap={es.gap:.17g}")
    return f"spectrum side={args.side} N={g.vertices} gap={es.gap:.6e}"


def _limiting_result(g, args):
    init = make_localized_uniform_coin(g, args.x0, args.y0)
    method = args.method
    if method == "auto":
        method = "analytic" if g.is_odd else "empirical"
    if method == "analytic":
        return limiting_distribution(g, init), method
    return average_distribution(g, grover_coin(), init, args.steps), method


def cmd_limiting(args, out: Path) -> str:
    g = _geometry(args.side)
    pi, method = _limiting_result(g, args)
    params = _params(args)
    params["method"] = method
    run = Run(out, f"limiting_side{args.side}", params)
    peaks = peak_count(pi)
    meta = f"N={g.vertices} method={method}"
    if method == "empirical":
        meta += f" T={args.steps}"
    origin = pi[args.x0, args.y0]
    meta += f" peaks={peaks} pi_origin={origin:.17g}"
    run.distribution(".csv", pi, extra_comment=meta)
    return f"limiting {meta}"


def _mixing_setup(g, args):
    if args.coin == "grover":
        init = make_localized_uniform_coin(g, 0, 0)
        ref = limiting_distribution(g, init)
        return grover_coin(), init, ref
    marked = (args.marked_x, args.marked_y)
    return MarkedCoinSpec(g, marked), make_global_uniform(g), stationary_reference_marked(g, marked, args.reference_steps)


def cmd_mixing(args, out: Path) -> str:
    g = _geometry(args.side)
    epsilons = args.epsilon or [0.1]
    for e in epsilons:
        if e <= 0:
            raise ValueError(f"epsilon must be positive (got {e})")
    horizon = args.horizon or default_horizon(g)
    coin, init, ref = _mixing_setup(g, args)
    trace = distance_trace(g, coin, init, ref, horizon)
    run = Run(out, f"mixing_side{args.side}_{args.coin}", _params(args) | {"horizon": horizon})
    rows = []
    for e in epsilons:
        m, i = mixing_times_from_trace(trace, e)
        rows.append((g.vertices, e, m, i, m is not None))
    run.csv("_sweep.csv", SWEEP_HEADER, rows)
    if args.trace:
        try:
            write_csv(args.trace, TRACE_HEADER, _trace_rows(trace), comment=run.comment)
        except OSError as exc:
            raise OutputError(f"cannot write trace {args.trace}: {exc.strerror or exc}") from exc
    else:
        run.csv("_trace.csv", TRACE_HEADER, _trace_rows(trace))
    summary = " ".join(f"M[{e:g}]={'-' if r[2] is None else r[2]}" for e, r in zip(epsilons, rows))
    return f"mixing side={args.side} coin={args.coin} horizon={horizon} {summary}"


def cmd_search(args, out: Path) -> str:
    g = _geometry(args.side)
    marked = (args.marked_x, args.marked_y)
    t_max = args.t_max or 20 * args.side + 100
    res = run_search(g, marked, t_max)
    run = Run(out, f"search_side{args.side}", _params(args) | {"t_max": t_max})
    meta = f"first_max_step={res.first_max_step} p_star={res.first_max_probability}"
    run.csv("_trace.csv", ("t", "p_marked"), enumerate(res.trace), extra_comment=meta)
    for t in args.dump_snapshot_at or []:
        if not 0 <= t <= t_max:
            raise ValueError(f"snapshot step {t} outside [0, {t_max}]")
        state = evolve(make_global_uniform(g), MarkedCoinSpec(g, marked), t)
        run.distribution(f"_snapshot_t{t}.csv", measure(state))
    return f"search side={args.side} marked={marked} {meta}"


def cmd_scaling(args, out: Path) -> str:
    sides = sorted(args.sides)
    epsilons = args.epsilon or list(FIG_EPSILONS)
    sweep = scaling_sweep(
        sides, epsilons, coin_kind=args.coin, horizon=args.horizon,
        marked=(args.marked_x, args.marked_y), workers=args.threads,
    )
    run = Run(out, f"scaling_{args.coin}", _params(args))
    rows = [
        (r.parameters["N"], r.parameters["epsilon"], r.outputs["M_eps"], r.outputs["I_eps"], r.outputs["reached"])
        for r in sweep.records
    ]
    run.csv("_sweep.csv", SWEEP_HEADER, rows)
    fits = {f"epsilon={k:g}": v for k, v in sweep.size_fits.items()}
    fits.update({f"side={k}": v for k, v in sweep.epsilon_fits.items()})
    if sweep.joint_fit is not None:
        fits["joint"] = sweep.joint_fit
    run.csv("_fits.csv", FIT_HEADER, _fit_rows(fits))
    c = "nan" if sweep.joint_fit is None else f"{sweep.joint_fit['exponent']:.3f}"
    r2 = min((f.r_squared for f in sweep.size_fits.values()), default=float("nan"))
    return f"scaling coin={args.coin} sides={sides[0]}..{sides[-1]} min_R2={r2:.4f} c={c} flagged={len(sweep.flagged)}"


def cmd_classical(args, out: Path) -> str:
    eps = args.epsilon[0] if args.epsilon else 0.1
    records, fit = classical_mixing_baseline(sorted(args.sides), eps)
    run = Run(out, "classical", _params(args))
    run.csv(".csv", ("side", "N", "epsilon", "t_mix"),
            [(r.parameters["side"], r.parameters["N"], eps, r.outputs["t_mix"]) for r in records])
    run.csv("_fit.csv", FIT_HEADER, _fit_rows({"N": fit}))
    return f"classical epsilon={eps:g} exponent={fit['exponent']:.3f} R2={fit.r_squared:.4f}"


FIGURES = {
    "fig1": "limiting distribution, start shifted to the lattice centre; single peak at the start site",
    "fig2": "Grover walk: distance traces (~1/t decay to pi, flat to uniform) and M_eps vs sqrt(N log N)",
    "fig3": "search walk: snapshot at the first maximum and time average at T=10^4, both peaked at the marked vertex",
    "fig4": "search walk: oscillating distance trace and M_eps vs sqrt(N log N)",
}


def cmd_reproduce(args, out: Path) -> str:
    side = args.side
    g = _geometry(side)
    fig = args.figure
    run = Run(out, f"reproduce_{fig}", _params(args))
    if fig == "fig1":
        c = side // 2
        pi = limiting_distribution(g, make_localized_uniform_coin(g, c, c))
        run.distribution("_pi.csv", pi, extra_comment=f"start=({c},{c}) peaks={peak_count(pi)}")
        mx, my = (int(v) for v in np.unravel_index(np.argmax(pi.probabilities), pi.probabilities.shape))
        return f"reproduce fig1 side={side} start=({c},{c}) max_at=({mx},{my})"
    if fig in ("fig2", "fig4"):
        kind = "grover" if fig == "fig2" else "marked"
        ns = argparse.Namespace(coin=kind, marked_x=0, marked_y=0, reference_steps=args.reference_steps)
        coin, init, ref = _mixing_setup(g, ns)
        trace = distance_trace(g, coin, init, ref, args.horizon or default_horizon(g))
        run.csv("_trace.csv", TRACE_HEADER, _trace_rows(trace))
        sides = sorted(args.sides or FIG2_SIDES)
        sweep = scaling_sweep(sides, FIG_EPSILONS, coin_kind=kind, horizon=args.horizon,
                              workers=args.threads, reference_steps=args.reference_steps)
        run.csv("_sweep.csv", SWEEP_HEADER, [
            (r.parameters["N"], r.parameters["epsilon"], r.outputs["M_eps"], r.outputs["I_eps"], r.outputs["reached"])
            for r in sweep.records
        ])
        run.csv("_fits.csv", FIT_HEADER, _fit_rows({f"epsilon={k:g}": v for k, v in sweep.size_fits.items()}))
        return f"reproduce {fig} side={side} sweep_points={len(sweep.records)}"
    if fig == "fig3":
        marked = (0, 0)
        res = run_search(g, marked, 20 * side + 100)
        if res.first_max_step is None:
            raise ValueError("no confirmed maximum found")
        snap = measure(evolve(make_global_uniform(g), MarkedCoinSpec(g, marked), res.first_max_step))
        run.distribution(f"_snapshot_t{res.first_max_step}.csv", snap)
        ref = stationary_reference_marked(g, marked, args.reference_steps)
        run.distribution(f"_stationary_T{args.reference_steps}.csv", ref)
        return f"reproduce fig3 side={side} first_max_step={res.first_max_step} p_star={res.first_max_probability:.6f}"
    raise ValueError(f"unknown figure {fig!r}")


# -- parser ------------------------------------------------------------------

_NOT_IN_MANIFEST = {"func", "out", "threads", "trace"}


def _params(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_IN_MANIFEST and v is not None}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="toruswalk", description="Coined quantum walks on the 2-D torus.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=None, help=f"output directory (default ${OUT_ENV} or .)")
    common.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def marked_flags(sp):
        sp.add_argument("--marked-x", type=int, default=0)
        sp.add_argument("--marked-y", type=int, default=0)

    sp = sub.add_parser("evolve", parents=[common], help="evolve and dump P(x,y,t)")
    sp.add_argument("--side", type=int, required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--start", choices=("localized", "uniform"), default="localized")
    sp.add_argument("--x0", type=int, default=0)
    sp.add_argument("--y0", type=int, default=0)
    sp.add_argument("--coin", choices=("grover", "marked"), default="grover")
    marked_flags(sp)
    sp.set_defaults(func=cmd_evolve)

    sp = sub.add_parser("spectrum", parents=[common], help="eigenvalues of every reduced block")
    sp.add_argument("--side", type=int, required=True)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("limiting", parents=[common], help="limiting distribution")
    sp.add_argument("--side", type=int, required=True)
    sp.add_argument("--x0", type=int, default=0)
    sp.add_argument("--y0", type=int, default=0)
    sp.add_argument("--method", choices=("auto", "analytic", "empirical"), default="auto")
    sp.add_argument("--steps", type=int, default=10_000, help="T for the empirical average")
    sp.set_defaults(func=cmd_limiting)

    sp = sub.add_parser("mixing", parents=[common], help="mixing times on one lattice")
    sp.add_argument("--side", type=int, required=True)
    sp.add_argument("--epsilon", type=float, action="append")
    sp.add_argument("--coin", choices=("grover", "marked"), default="grover")
    marked_flags(sp)
    sp.add_argument("--horizon", type=int, default=None)
    sp.add_argument("--reference-steps", type=int, default=10_000)
    sp.add_argument("--trace", type=Path, default=None, help="trace CSV path")
    sp.set_defaults(func=cmd_mixing)

    sp = sub.add_parser("search", parents=[common], help="marked-vertex search run")
    sp.add_argument("--side", type=int, required=True)
    marked_flags(sp)
    sp.add_argument("--t-max", type=int, default=None)
    sp.add_argument("--dump-snapshot-at", type=int, action="append")
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("scaling", parents=[common], help="M_eps sweep and fits")
    sp.add_argument("--sides", type=int, nargs="+", required=True)
    sp.add_argument("--epsilon", type=float, action="append")
    sp.add_argument("--coin", choices=("grover", "marked"), default="grover")
    marked_flags(sp)
    sp.add_argument("--horizon", type=int, default=None)
    sp.set_defaults(func=cmd_scaling)

    sp = sub.add_parser("classical", parents=[common], help="classical random-walk baseline")
    sp.add_argument("--sides", type=int, nargs="+", required=True)
    sp.add_argument("--epsilon", type=float, action="append")
    sp.set_defaults(func=cmd_classical)

    sp = sub.add_parser("reproduce", parents=[common], help="regenerate figure data")
    sp.add_argument("figure", choices=sorted(FIGURES))
    sp.add_argument("--side", type=int, default=41)
    sp.add_argument("--sides", type=int, nargs="+", default=None, help="sweep sides (fig2, fig4)")
    sp.add_argument("--horizon", type=int, default=None)
    sp.add_argument("--reference-steps", type=int, default=10_000)
    sp.set_defaults(func=cmd_reproduce)
    return p


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = args.out if args.out is not None else Path(os.environ.get(OUT_ENV, "."))
    if args.threads < 1:
        print(f"toruswalk: invalid parameter: --threads must be >= 1 (got {args.threads})", file=sys.stderr)
        return EXIT_PARAM
    try:
        summary = args.func(args, out)
    except OutputError as exc:
        print(f"toruswalk: output error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    except (ValueError, TypeError) as exc:
        print(f"toruswalk: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_PARAM
    print(summary)
    return 0


def main() -> None:
    sys.exit(run_cli())
