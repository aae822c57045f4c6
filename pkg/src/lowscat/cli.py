"""Command-line front end.

Subcommands
-----------
capacity       equilibrium solve for a geometry JSON file -> JSON report
disk-ssf       exact and approximate disk spectral shift on an x = rho sqrt(mu) grid -> CSV
fig1           disk-ssf for radii 0.15, 1.5, 15, 150 over x in [0.02, 8] -> four CSVs
phase          leading scattering phase and its derivative on a lambda grid -> CSV
dtn-eig        exact and asymptotic lowest DtN eigenvalue of a disk -> CSV
series-invert  shifted-log geometric inversion of a series JSON file -> JSON

Exit codes: 0 success, 2 invalid input, 3 numerical non-convergence,
4 mathematical precondition violated.  Floats are written with 17
significant digits, and every CSV starts with a ``#`` comment line naming
the tool version, the command line and the shift constant ``a``.
"""

import argparse
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from . import asymptotics as asym
from . import diskref, logseries, potential
from .errors import InputError, LowscatError, NumericalError, PreconditionError

log = logging.getLogger("lowscat")

FIG1_RADII = (0.15, 1.5, 15.0, 150.0)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_PRECONDITION = 4

SSF_COLUMNS = ("x", "mu", "xi_exact", "xi_arctan", "xi_mcg1", "xi_mcg3", "terms_used")
PHASE_COLUMNS = ("lambda", "sigma_leading", "sigma_prime_leading")
DTN_COLUMNS = ("kappa", "exact", "asymptotic", "residual")


def fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def fmt_complex(z):
    return f"{fmt(z.real)}{'+' if z.imag >= 0 else '-'}{fmt(abs(z.imag))}j"


def log_grid(lo, hi, n, what):
    if not (0 < lo < hi) or not math.isfinite(hi):
        raise InputError(f"{what} bounds must satisfy 0 < min < max")
    if n < 2:
        raise InputError("--points must be >= 2")
    return np.geomspace(lo, hi, n)


def header_line(argv, a):
    return f"# lowscat {__version__} | {' '.join(argv)} | shift_a={fmt_complex(a)}"


def render_csv(header, columns, rows):
    out = io.StringIO()
    out.write(header + "\n")
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(fmt(v) for v in row) + "\n")
    return out.getvalue()


def render_json_rows(header, columns, rows):
    obj = {"meta": header.lstrip("# "), "rows": [dict(zip(columns, r)) for r in rows]}
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def parallel_map(fn, items, jobs):
    """Ordered map; ``jobs > 1`` fans out over worker threads of this process."""
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# row builders
# ---------------------------------------------------------------------------

def _ssf_row(args):
    rho, x, tol = args
    mu = (x / rho) ** 2
    table = diskref.ssf_table(rho, [mu], tol)
    r = table.rows[0]
    return (x, mu, r.xi_exact, r.xi_arctan, r.xi_mcg1, r.xi_mcg3, r.terms_used)


def ssf_rows(rho, xs, tol, jobs=1):
    return parallel_map(_ssf_row, [(rho, float(x), tol) for x in xs], jobs)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_capacity(ns, argv):
    geom = potential.Geometry.load(ns.geometry)
    if ns.panels < potential.MIN_CLOSED_PANELS:
        raise InputError("--panels must be >= 8")
    mesh = potential.build_mesh(geom, ns.panels)
    sol = potential.solve_equilibrium(mesh, ns.richardson, ns.richardson_order)
    report = sol.report()
    if ns.flux:
        report["green_flux"] = potential.green_flux(sol, mesh)
    emit(json.dumps(report, indent=2) + "\n", ns.output)


def write_ssf(rho, xs, tol, jobs, argv, path, fmt_name="csv"):
    rows = ssf_rows(rho, xs, tol, jobs)
    head = header_line(argv, potential.shift_a(math.log(rho)))
    render = render_csv if fmt_name == "csv" else render_json_rows
    emit(render(head, SSF_COLUMNS, rows), path)
    return rows


def cmd_disk_ssf(ns, argv):
    if not ns.radius > 0:
        raise InputError("--radius must be > 0")
    xs = log_grid(ns.x_min, ns.x_max, ns.points, "x")
    write_ssf(ns.radius, xs, ns.tol, ns.jobs, argv, ns.output, ns.format)


def fig1_filename(rho):
    return f"fig1_rho_{rho:g}.csv"


def cmd_fig1(ns, argv):
    xs = log_grid(ns.x_min, ns.x_max, ns.points, "x")
    os.makedirs(ns.outdir, exist_ok=True)
    for rho in FIG1_RADII:
        path = os.path.join(ns.outdir, fig1_filename(rho))
        write_ssf(rho, xs, ns.tol, ns.jobs, argv, path)
        log.info("wrote %s", path)


def _capacity_from(ns):
    if ns.geometry is not None:
        geom = potential.Geometry.load(ns.geometry)
        return potential.solve_equilibrium(potential.build_mesh(geom, ns.panels)).log_capacity
    return ns.capacity


def cmd_phase(ns, argv):
    c = _capacity_from(ns)
    p = asym.AsymParams(c)
    lams = log_grid(ns.lambda_min, ns.lambda_max, ns.points, "lambda")
    rows = []
    for lam in lams:
        rows.append((lam, asym.sigma_leading(p, lam), asym.sigma_prime_leading(p, lam)))
    render = render_csv if ns.format == "csv" else render_json_rows
    emit(render(header_line(argv, p.a), PHASE_COLUMNS, rows), ns.output)


def cmd_dtn_eig(ns, argv):
    if not ns.radius > 0:
        raise InputError("--radius must be > 0")
    p = asym.AsymParams.for_disk(ns.radius)
    kappas = log_grid(ns.kappa_min, ns.kappa_max, ns.points, "kappa")
    rows = []
    for k in kappas:
        exact = diskref.dtn_disk_lowest(ns.radius, k)
        approx = asym.dtn_lowest_asym(p, k)
        rows.append((k, exact, approx, exact - approx))
    render = render_csv if ns.format == "csv" else render_json_rows
    emit(render(header_line(argv, p.a), DTN_COLUMNS, rows), ns.output)


def parse_complex_pair(text):
    try:
        re_, im_ = (float(t) for t in text.split(","))
    except ValueError as exc:
        raise InputError(f"expected 're,im', got {text!r}") from exc
    return complex(re_, im_)


def quotient_report(alpha, log_z, result, moduli=(1e-4, 1e-3, 1e-2), args=(0.0, math.pi / 2, math.pi)):
    """Compare the expansion with the direct quotient at a few points."""
    out = []
    for m in moduli:
        for t in args:
            lam = logseries.LogPoint(m, t)
            direct = 1.0 / (1.0 - (lam.log - log_z) * logseries.evaluate(alpha, lam))
            approx = result.evaluate(lam)
            out.append({
                "modulus": m,
                "argument": t,
                "direct": [direct.real, direct.imag],
                "series": [approx.real, approx.imag],
                "relative_residual": abs(approx - direct) / abs(direct),
            })
    return out


def cmd_series_invert(ns, argv):
    try:
        with open(ns.series) as fh:
            obj = json.load(fh)
        alpha = logseries.LogPowSeries.from_json_obj(obj)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, LowscatError):
            raise
        raise InputError(f"cannot read series from {ns.series}: {exc}") from exc
    log_z = parse_complex_pair(ns.log_z)
    result = logseries.geometric_log_invert(alpha, log_z, ns.j_cut)
    report = {
        "version": __version__,
        "command": " ".join(argv),
        "j_cut": ns.j_cut,
        "log_z": [log_z.real, log_z.imag],
        "result": result.to_json_obj(),
        "quotient_check": quotient_report(alpha, log_z, result),
    }
    if ns.derivative:
        # the j = 0 stratum differentiates to lambda^-1 terms; emit the rest
        report["derivative_j_ge_1"] = logseries.differentiate(
            result.to_single(), drop_j0=True).to_json_obj()
    emit(json.dumps(report, indent=2) + "\n", ns.output)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(
        prog="lowscat",
        description="Low-frequency scattering quantities for planar obstacles.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="exit codes: 0 ok, 2 invalid input, 3 non-convergence, 4 precondition violated",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def grid_common(p):
        p.add_argument("--points", type=int, default=64)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("-o", "--output", default=None, help="output file (default stdout)")

    p = sub.add_parser("capacity", help="log-capacity of a geometry",
                       description="Equilibrium solve. JSON keys: robin_constant, log_capacity, "
                                   "capacity, shift_a [re, im], panels, residual, potential_spread.")
    p.add_argument("geometry", help="geometry JSON file")
    p.add_argument("--panels", type=int, default=512)
    p.add_argument("--richardson", action="store_true",
                   help="also report the extrapolation C_N + (C_N - C_{N/2})/(2^p - 1)")
    p.add_argument("--richardson-order", type=int, default=1, help="assumed panel error order p")
    p.add_argument("--flux", action="store_true", help="add the boundary flux diagnostic (-2 pi)")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("disk-ssf", help="disk spectral shift table",
                       description="CSV columns: " + ",".join(SSF_COLUMNS)
                                   + ". x = rho*sqrt(mu) is log-spaced; the expansion "
                                     "columns are nan for mu >= 1.")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--x-min", type=float, default=0.02)
    p.add_argument("--x-max", type=float, default=8.0)
    p.add_argument("--tol", type=float, default=diskref.DEFAULT_TOL)
    p.add_argument("--jobs", type=int, default=1)
    grid_common(p)
    p.set_defaults(func=cmd_disk_ssf)

    p = sub.add_parser("fig1", help="four disk-ssf tables for radii 0.15, 1.5, 15, 150",
                       description="Writes fig1_rho_<r>.csv into --outdir; columns as disk-ssf.")
    p.add_argument("--outdir", default=".")
    p.add_argument("--x-min", type=float, default=0.02)
    p.add_argument("--x-max", type=float, default=8.0)
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--tol", type=float, default=diskref.DEFAULT_TOL)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_fig1)

    p = sub.add_parser("phase", help="leading scattering phase",
                       description="CSV columns: " + ",".join(PHASE_COLUMNS))
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--capacity", type=float, help="log-capacity C")
    src.add_argument("--geometry", help="geometry JSON; C is computed first")
    p.add_argument("--panels", type=int, default=512)
    p.add_argument("--lambda-min", type=float, default=1e-8)
    p.add_argument("--lambda-max", type=float, default=1e-1)
    grid_common(p)
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("dtn-eig", help="lowest DtN eigenvalue of a disk",
                       description="CSV columns: " + ",".join(DTN_COLUMNS)
                                   + "; residual = exact - asymptotic.")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--kappa-min", type=float, default=1e-5)
    p.add_argument("--kappa-max", type=float, default=1e-1)
    grid_common(p)
    p.set_defaults(func=cmd_dtn_eig)

    p = sub.add_parser("series-invert", help="invert 1 - (log lambda - log z) alpha",
                       description="Reads {shift, terms:[{j,k,c}]} and writes the split "
                                   "result (plain log powers + powers of log lambda - a) "
                                   "with a quotient-residual report.")
    p.add_argument("series", help="alpha series JSON file")
    p.add_argument("--log-z", required=True, help="log z as 're,im'")
    p.add_argument("--j-cut", type=int, default=logseries.DEFAULT_J_CUT)
    p.add_argument("--derivative", action="store_true", help="also emit d/dlambda of the j >= 1 part of the result")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_series_invert)
    return ap


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    ns = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(ns, "jobs", 1) < 1:
        ap.error("--jobs must be >= 1")
    try:
        ns.func(ns, ["lowscat"] + argv)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PreconditionError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
