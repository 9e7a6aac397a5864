"""Command-line surface: emits machine-readable artifacts (CSV or JSON) for
coefficient tables, constructed methods, error reports, solver runs,
stability boundaries, and consistency diagnostics.

Exit codes: 0 success, 2 argument/domain error, 3 numeric failure.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from fracstep import __version__
from fracstep.analysis import (
    consistency_qbar,
    consistency_qk,
    consistency_qtilde,
    fbdf_boundary,
    stability_boundary,
    zero_stability_check,
)
from fracstep.errors import MlRangeError, NewtonConvergenceError, StabilityViolationError
from fracstep.fbdf import bdf_coefficients, genfun_taylor, GeneratingFunction
from fracstep.mittag_leffler import ml_sequence
from fracstep.problems import fokker_planck, nigmatullin, scalar_linear
from fracstep.rational import (
    build_method,
    componentwise_error,
    fractional_power_pf,
    tau_hat,
    tau_scan,
)
from fracstep.solver import iter_kstep, solve_fbdf, solve_kstep

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _fmt(value):
    """Canonical cell text: shortest round-trip decimal for floats."""
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if value is None:
        return ""
    return str(value)


def _resolve_output(path):
    if path is None:
        return None
    outdir = os.environ.get("FRACSTEP_OUTDIR")
    if outdir and not os.path.isabs(path):
        return os.path.join(outdir, path)
    return path


class Emitter:
    """Collects a header + rows and writes them in the selected format."""

    def __init__(self, columns, fmt, path, meta=None):
        self.columns = columns
        self.fmt = fmt
        self.path = _resolve_output(path)
        self.meta = meta or {}
        self._fh = open(self.path, "w", encoding="utf-8", newline="") if self.path else sys.stdout
        self._rows = []
        if self.fmt == "csv":
            self._fh.write(",".join(self.columns) + "\n")

    def row(self, values):
        if self.fmt == "csv":
            self._fh.write(",".join(_fmt(v) for v in values) + "\n")
        else:
            self._rows.append(values)

    def close(self):
        if self.fmt == "json":
            data = [
                {c: (None if v is None else (float(v) if isinstance(v, (float, np.floating)) else v))
                 for c, v in zip(self.columns, row)}
                for row in self._rows
            ]
            json.dump({"meta": self.meta, "data": data}, self._fh, indent=1, default=float)
            self._fh.write("\n")
        if self._fh is not sys.stdout:
            self._fh.close()


def _parse_h_grid(spec):
    """Comma list of step sizes; each entry a float or '2^-k'."""
    vals = []
    for tok in spec.split(","):
        tok = tok.strip()
        if "^" in tok:
            base, exp = tok.split("^")
            vals.append(float(base) ** float(exp))
        else:
            vals.append(float(tok))
    if not vals:
        raise ValueError("empty h grid")
    return vals


def _parse_scan_grid(spec):
    """Log-spaced grid 'lo:hi:count'."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError("tau scan grid must be 'lo:hi:count'")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    return np.logspace(math.log10(lo), math.log10(hi), count)


def _choose_tau(args):
    """Resolve the tau policy flags into a value; returns (tau, note)."""
    if args.tau is not None:
        if not 0.0 < args.tau <= 1.0:
            raise ValueError("tau must be in (0, 1]")
        return args.tau, "fixed"
    if args.tau_scan is not None:
        grid = _parse_scan_grid(args.tau_scan)
        tau_star, _ = tau_scan(args.p, args.alpha, args.k, args.n, grid)
        return tau_star, "scan"
    th = tau_hat(args.p, args.k, args.n)
    note = "tau-hat (clamped)" if th.clamped else "tau-hat"
    return th.value, note


def _add_common(sp, tau_group=True, n_default=None):
    sp.add_argument("--alpha", type=float, required=True, help="fractional order in (0,1)")
    sp.add_argument("--output", "-o", help="output path (FRACSTEP_OUTDIR prefixes relative paths)")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    if tau_group:
        sp.add_argument("--p", type=int, default=1, help="BDF order (default 1)")
        sp.add_argument("--k", type=int, required=True, help="quadrature points / step number")
        sp.add_argument("--n", type=int, default=n_default, help="coefficient horizon N")
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--tau", type=float, help="fixed tau in (0,1]")
        g.add_argument("--tau-hat", action="store_true", help="use (7+p)k/(2N) (default)")
        g.add_argument("--tau-scan", metavar="LO:HI:COUNT", help="pick tau minimising the scan objective")


def cmd_coeffs(args):
    if args.n is None or args.n < 0:
        raise ValueError("--n must be a nonnegative integer")
    gf = GeneratingFunction(bdf=bdf_coefficients(args.p), alpha=args.alpha)
    om = genfun_taylor(gf, args.n)
    em = Emitter(["j", "omega"], args.format, args.output,
                 meta={"p": args.p, "alpha": args.alpha, "n": args.n})
    for j in range(args.n + 1):
        em.row([j, om[j]])
    em.close()


def cmd_method(args):
    tau, note = _choose_tau(args)
    sc = build_method(args.p, args.alpha, args.k, tau)
    pf = fractional_power_pf(args.alpha, args.k, tau)
    meta = {"p": args.p, "k": args.k, "m": sc.m, "alpha": args.alpha,
            "tau": tau, "tau_policy": note}
    em = Emitter(["j", "alpha_j", "beta_j", "gamma_j", "eta_j"], args.format, args.output, meta)
    rows = max(sc.m + 1, args.k)
    for j in range(rows):
        em.row([
            j,
            sc.alpha_coef[j] if j <= sc.m else None,
            sc.beta_coef[j] if j <= sc.m else None,
            pf.gamma[j] if j < args.k else None,
            pf.eta[j] if j < args.k else None,
        ])
    em.close()


def cmd_error(args):
    if args.n is None or args.n < 1:
        raise ValueError("--n must be a positive integer")
    tau, note = _choose_tau(args)
    rep = componentwise_error(args.p, args.alpha, args.k, tau, args.n)
    meta = {"p": args.p, "k": args.k, "alpha": args.alpha, "tau": tau,
            "tau_policy": note, "max_abs_E": rep.max_abs_E, "bound_valid": rep.bound_valid}
    em = Emitter(["j", "omega", "gamma", "E", "bound"], args.format, args.output, meta)
    for j in range(args.n + 1):
        em.row([j, rep.omega[j], rep.gamma[j], rep.E[j], rep.bound[j]])
    em.close()


def _build_problem(args):
    if args.problem == "linear":
        prob = scalar_linear(args.alpha, args.lam)
        exact = lambda t: ml_sequence(args.alpha, args.lam, np.atleast_1d(t))[..., None]
        return prob, exact
    if args.problem == "nigmatullin":
        return nigmatullin(args.s, args.alpha)
    prob = fokker_planck(args.s, args.alpha, lambda x: args.p_const, lambda x: 0.0,
                         args.r, args.big_k, args.k_alpha)
    return prob, None


def cmd_solve(args):
    prob, exact = _build_problem(args)
    if args.method == "fbdf":
        traj = solve_fbdf(prob, args.p, args.n)
        times, states = traj.times, traj.states
        stream = None
    elif args.no_store:
        tau, _ = _choose_tau(args)
        sc = build_method(args.p, args.alpha, args.k, tau)
        stream = iter_kstep(prob, sc, args.n)
    else:
        tau, _ = _choose_tau(args)
        sc = build_method(args.p, args.alpha, args.k, tau)
        traj = solve_kstep(prob, sc, args.n)
        times, states = traj.times, traj.states
        stream = None

    baseline = None
    if args.baseline == "fbdf" and args.method != "fbdf":
        baseline = solve_fbdf(prob, args.p, args.n)

    cols = ["t"] + [f"y{i+1}" for i in range(prob.s)]
    if exact is not None:
        cols.append("err")
        if baseline is not None:
            cols.append("err_fbdf")
    elif baseline is not None:
        cols.append("diff_fbdf")
    em = Emitter(cols, args.format, args.output,
                 meta={"problem": args.problem, "method": args.method, "n": args.n,
                       "alpha": args.alpha, "s": prob.s})

    def emit(n, t, y):
        row = [t] + list(y)
        if exact is not None:
            row.append(float(np.max(np.abs(y - exact(t)[0]))))
            if baseline is not None:
                row.append(float(np.max(np.abs(baseline.states[n] - exact(t)[0]))))
        elif baseline is not None:
            row.append(float(np.max(np.abs(y - baseline.states[n]))))
        em.row(row)

    if stream is not None:
        for n, t, y in stream:
            emit(n, t, y)
    else:
        for n in range(args.n + 1):
            emit(n, times[n], states[n])
    em.close()


def cmd_stability(args):
    if args.fbdf:
        bd = fbdf_boundary(args.p, args.alpha, args.n_theta)
        meta = {"variant": "fbdf", "p": args.p, "alpha": args.alpha}
        report = None
    else:
        tau, note = _choose_tau(args)
        sc = build_method(args.p, args.alpha, args.k, tau)
        bd = stability_boundary(sc, args.n_theta)
        report = zero_stability_check(sc)
        meta = {"variant": "kstep", "p": args.p, "k": args.k, "alpha": args.alpha,
                "tau": tau, "tau_policy": note,
                "crosscheck_residual": report.crosscheck_residual,
                "p_roots": [[z.real, z.imag] for z in np.atleast_1d(report.p_roots)],
                "q_roots": [[z.real, z.imag] for z in np.atleast_1d(report.q_roots)]}
    em = Emitter(["theta", "re", "im"], args.format, args.output, meta)
    for th, pt in zip(bd.theta, bd.points):
        em.row([float(th), float(pt.real), float(pt.imag)])
    em.close()
    if report is not None and args.format == "csv":
        print(f"zero-stability: certified; crosscheck residual "
              f"{report.crosscheck_residual:.3e}", file=sys.stderr)


def cmd_consistency(args):
    tau, note = _choose_tau(args)
    h = _parse_h_grid(args.h_grid)
    qk = consistency_qk(args.alpha, tau, args.k, h)
    qt = consistency_qtilde(args.alpha, tau, args.k, h)
    qb = consistency_qbar(args.alpha, tau, args.k, h)
    em = Emitter(["h", "qk", "qtilde", "qbar"], args.format, args.output,
                 meta={"alpha": args.alpha, "k": args.k, "tau": tau, "tau_policy": note})
    for i in range(len(h)):
        em.row([h[i], qk.q_values[i], qt.q_values[i], qb.q_values[i]])
    em.close()


def build_parser():
    ap = argparse.ArgumentParser(
        prog="fracstep",
        description="Short-memory m-step methods for Caputo fractional differential equations",
    )
    ap.add_argument("--version", action="version", version=f"fracstep {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("coeffs", help="FBDF generating-function Taylor coefficients")
    sp.add_argument("--p", type=int, default=1)
    sp.add_argument("--n", type=int, required=True)
    _add_common(sp, tau_group=False)
    sp.set_defaults(func=cmd_coeffs)

    sp = sub.add_parser("method", help="m-step method coefficients")
    _add_common(sp, n_default=400)
    sp.set_defaults(func=cmd_method)

    sp = sub.add_parser("error", help="componentwise coefficient errors and bound")
    _add_common(sp, n_default=400)
    sp.set_defaults(func=cmd_error)

    sp = sub.add_parser("solve", help="integrate a built-in problem")
    sp.add_argument("--problem", choices=("linear", "nigmatullin", "fokker-planck"),
                    default="linear")
    sp.add_argument("--lam", type=float, default=-1.0, help="linear-problem coefficient")
    sp.add_argument("--s", type=int, default=50, help="interior grid points")
    sp.add_argument("--r", type=float, default=0.2, help="Fisher growth rate")
    sp.add_argument("--big-k", type=float, default=1.0, help="carrying capacity K")
    sp.add_argument("--k-alpha", type=float, default=1.0, help="diffusion coefficient")
    sp.add_argument("--p-const", type=float, default=-1.0, help="constant drift p(x)")
    sp.add_argument("--method", choices=("kstep", "fbdf"), default="kstep")
    sp.add_argument("--baseline", choices=("fbdf",), help="also run the FBDF reference")
    sp.add_argument("--no-store", action="store_true",
                    help="stream rows, keeping only the method's m-state window")
    _add_common(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("stability", help="stability-region boundary locus")
    sp.add_argument("--n-theta", type=int, default=512)
    sp.add_argument("--fbdf", action="store_true", help="FBDF baseline locus")
    _add_common(sp)
    sp.set_defaults(func=cmd_stability)

    sp = sub.add_parser("consistency", help="consistency diagnostics on an h grid")
    sp.add_argument("--h-grid", required=True,
                    help="comma list of step sizes; entries may use '2^-k'")
    _add_common(sp)
    sp.set_defaults(func=cmd_consistency)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        args.func(args)
    except (ValueError, MlRangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NewtonConvergenceError, StabilityViolationError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
