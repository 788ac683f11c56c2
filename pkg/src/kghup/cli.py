"""Command-line front end.

Every run prints one JSON object ``{config, seed, results, tail_bounds,
warnings}`` to stdout (keys sorted, floats with 17 significant digits);
table-shaped results can additionally be written as CSV with ``--out``.
Exit codes: 0 success, 2 invalid input, 3 numerical accuracy failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import mpmath
import numpy as np

from kghup import __version__
from kghup import gauss_map, measures, moebius, transfer_operator as tro
from kghup import hup_lab
from kghup.circle_arith import parse_point
from kghup.errors import AccuracyError, ConvergenceError, KGHupError
from kghup.io import dumps, write_csv, write_spectrum_csv

ENV_PREFIX = "KGHUP_"

EPILOG = f"""\
environment:
  Options of the form --some-flag can be preset with the variable
  {ENV_PREFIX}SOME_FLAG (for instance {ENV_PREFIX}THREADS=4 or {ENV_PREFIX}SEED=7).
  Command-line flags take precedence.

exit codes:
  0 success, 2 invalid parameters or usage, 3 numerical accuracy failure
"""


class UsageError(ValueError):
    """Raised instead of argparse's own exit so main() controls the code."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------------------
# argument types


def _rational_or_float(text: str):
    try:
        return parse_point(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a nonnegative integer")
    return v


def _float_list(text: str) -> List[float]:
    try:
        return [float(parse_point(s)) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text: str) -> List[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _env_default(dest: str, default, conv: Callable):
    raw = os.environ.get(ENV_PREFIX + dest.upper())
    if raw is None:
        return default
    try:
        return conv(raw)
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(f"bad value in {ENV_PREFIX}{dest.upper()}: {exc}") from None


def _add(p: argparse.ArgumentParser, flag: str, conv: Callable, default, **kw):
    dest = flag.lstrip("-").replace("-", "_")
    p.add_argument(flag, type=conv, default=_env_default(dest, default, conv), dest=dest, **kw)


def _as_beta(v):
    return v if isinstance(v, Fraction) else float(v)


# ---------------------------------------------------------------------------
# output envelope


class Run:
    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.results = {}
        self.tail_bounds = {}
        self.warnings: List[str] = []

    def config(self):
        skip = {"func", "threads"}
        out = {}
        for k, v in sorted(vars(self.args).items()):
            if k in skip:
                continue
            if isinstance(v, Fraction):
                v = str(v)
            elif isinstance(v, complex):
                v = {"re": v.real, "im": v.imag}
            out[k] = v
        return out

    def emit(self, stream=None):
        doc = {
            "config": self.config(),
            "seed": self.args.seed,
            "results": self.results,
            "tail_bounds": self.tail_bounds,
            "warnings": self.warnings,
        }
        (stream or sys.stdout).write(dumps(doc) + "\n")


def _pool_map(fn, items, threads: int):
    """Ordered map over a bounded thread pool (results follow input order)."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _point_str(p) -> object:
    return str(p.exact) if p.exact is not None else p.value


# ---------------------------------------------------------------------------
# commands


def cmd_orbit(run: Run):
    a = run.args
    if a.precision_bits is not None and a.precision_bits < 2:
        raise UsageError("--precision-bits must be >= 2")
    rec = gauss_map.orbit(a.x, a.steps, beta=_as_beta(a.beta), precision_bits=a.precision_bits,
                          guard_bits=a.guard_bits)
    run.results = {
        "start": _point_str(rec.start),
        "iterates": [_point_str(p) for p in rec.iterates],
        "digits": list(rec.digits),
        "terminated": rec.terminated.value,
        "exact": rec.start.exact is not None,
        "trusted": rec.trusted,
        "log2_derivative": rec.log2_derivative,
        "precision_bits": rec.precision_bits,
    }
    if not rec.trusted:
        run.warnings.append("derivative product exceeded the working precision; tail digits are not trustworthy")


def cmd_ecf_expand(run: Run):
    a = run.args
    cf = gauss_map.even_cf_expand(a.x, a.depth, beta=_as_beta(a.beta))
    run.results = {"digits": list(cf.digits), "tail": _point_str(cf.tail),
                   "terminated": cf.terminated.value}
    if not isinstance(a.x, Fraction):
        rec = gauss_map.orbit(a.x, a.depth, beta=_as_beta(a.beta))
        if not rec.trusted:
            run.warnings.append("double precision exhausted; pass p/q for exact digits")


def cmd_ecf_reconstruct(run: Run):
    a = run.args
    p = gauss_map.even_cf_reconstruct(a.digits, a.tail, beta=_as_beta(a.beta))
    run.results = {"value": _point_str(p), "float": p.value}


def cmd_invariant_check(run: Run):
    a = run.args
    if not 0 < a.window < 1:
        raise UsageError("--window must lie in ]0, 1[")
    t = np.linspace(-a.window, a.window, a.points)
    col = float(np.max(np.abs(measures.omega_branch_sum(t, J=a.J) - measures.omega_density(t))))
    res = {"collocation_residual": col}
    if a.transfer:
        tr = tro.apply_transfer(measures.omega_density, t, beta=1.0, J=a.J)
        res["transfer_residual"] = float(np.max(np.abs(tr - measures.omega_density(t))))
    if a.grid:
        s = a.support
        nu = measures.GridMeasure.from_antiderivative(np.arctanh, a.grid, support=(-s, s))
        res["grid_residual"] = measures.invariance_residual(nu, beta=1.0, J=a.J, window=a.window)
        res["grid"] = a.grid
    run.results = res
    run.tail_bounds = {"branches_beyond_J": float(np.max(tro.transfer_tail_bound(t, 1.0, a.J)))}


def _birkhoff_starts(a) -> list:
    if a.x is not None:
        return [("given", a.x)]
    rng = np.random.default_rng(a.seed)
    us = rng.uniform(-1.0, 1.0, a.starts)
    out = []
    for u in us:
        u = float(u)
        # an irrational shift keeps seeded starts off the rationals
        out.append((u, lambda u=u: mpmath.mpf(u) + mpmath.pi * mpmath.mpf(2) ** -60))
    return out


def cmd_birkhoff(run: Run):
    a = run.args
    Ns = a.N
    if not Ns or min(Ns) < 1:
        raise UsageError("--N values must be positive")
    if a.x is None and a.starts < 1:
        raise UsageError("--starts must be positive")
    starts = _birkhoff_starts(a)

    def job(item):
        label, x = item
        prof = measures.birkhoff_profile(x, Ns, beta=a.beta, precision_bits=a.precision_bits,
                                         guard_bits=a.guard_bits, max_bits=a.max_bits)
        r0 = prof[Ns[-1]] if Ns else None
        return {"start": label, "trusted": r0.trusted, "precision_bits": r0.precision_bits,
                "averages": {str(n): prof[n].value for n in sorted(prof)}}

    rows = _pool_map(job, starts, a.threads)
    run.results = {"runs": rows}
    if len(Ns) >= 2:
        lo, hi = min(Ns), max(Ns)
        trusted = [r for r in rows if r["trusted"]]
        below = sum(r["averages"][str(hi)] < r["averages"][str(lo)] for r in trusted)
        run.results["decrease_count"] = below
        run.results["trusted_count"] = len(trusted)
    if any(not r["trusted"] for r in rows):
        run.warnings.append("some orbits were not trusted at the precision cap")
    if a.out:
        write_csv(a.out, ["start", "N", "average", "trusted"],
                  [(r["start"], int(n), v, r["trusted"]) for r in rows
                   for n, v in r["averages"].items()])


def cmd_survivor(run: Run):
    a = run.args
    rows = []
    for n in range(1, a.depth + 1):
        u = gauss_map.survivor_set(a.beta, n, branch_cutoff=a.branch_cutoff, min_length=a.min_length)
        rows.append({"n": n, "lower": u.measure[0], "upper": u.measure[1],
                     "intervals": int(u.intervals.shape[0]), "tail_bound": u.tail_measure_bound})
    run.results = {"levels": rows}
    run.tail_bounds = {"max_gap": max(r["tail_bound"] for r in rows)}
    if a.out:
        write_csv(a.out, ["n", "lower", "upper", "intervals"],
                  [(r["n"], r["lower"], r["upper"], r["intervals"]) for r in rows])


_BUILDERS = {
    "ulam": tro.ulam_matrix,
    "collocation": tro.collocation_matrix,
    "composed": tro.composed_ulam_matrix,
}


def _spectrum_one(beta, N, J, top, kind):
    M = _BUILDERS[kind](beta, N, J=J)
    rep = tro.spectrum(M)
    return rep, M.tail_bound


def cmd_spectrum(run: Run):
    a = run.args
    tro._check_beta(a.beta)
    rep, tb = _spectrum_one(a.beta, a.grid, a.J, a.top, a.discretization)
    eigs = rep.eigenvalues[: a.top]
    run.results = {"spectral_radius": rep.spectral_radius, "peripheral_gap": rep.peripheral_gap,
                   "solver": rep.solver, "eigenvalues": [complex(z) for z in eigs]}
    run.tail_bounds = {"row_mass_beyond_J": tb}
    if a.out:
        write_spectrum_csv(a.out, [(a.beta, a.grid, eigs)])


def cmd_spectrum_sweep(run: Run):
    a = run.args
    for b in a.betas:
        tro._check_beta(b)
    tasks = [(b, n) for b in a.betas for n in a.grids]

    def job(task):
        b, n = task
        return _spectrum_one(b, n, a.J, a.top, a.discretization)

    out = _pool_map(job, tasks, a.threads)
    rows = []
    records = []
    for (b, n), (rep, tb) in zip(tasks, out):
        eigs = rep.eigenvalues[: a.top]
        rows.append({"beta": b, "N": n, "spectral_radius": rep.spectral_radius,
                     "peripheral_gap": rep.peripheral_gap})
        run.tail_bounds[f"beta={b!r},N={n}"] = tb
        records.append((b, n, eigs))
    run.results = {"sweep": rows}
    if a.out:
        write_spectrum_csv(a.out, records)


def cmd_moebius_classify(run: Run):
    a = run.args
    run.results = {"verdicts": [moebius.discreteness_classify(b, q_max=a.q_max).as_dict()
                                for b in a.beta]}


def cmd_moebius_reduce(run: Run):
    a = run.args
    r = moebius.reduce_to_domain(a.z, a.beta, max_steps=a.max_steps)
    run.results = {"z": r.z, "word": r.word, "reduced": r.reduced,
                   "cusp_proximity": r.cusp_proximity}
    if not r.reduced:
        run.warnings.append("step budget exhausted before reaching the fundamental domain")


def cmd_hup_verdict(run: Run):
    a = run.args
    bp, hup = moebius.normalize_pair(a.alpha, a.beta, a.eps)
    run.results = {"beta_prime": bp, "hup": hup}


def cmd_hup_falsify(run: Run):
    """Exhibit a nonzero measure annihilated by the lattice-cross."""
    a = run.args
    bp, hup = moebius.normalize_pair(a.alpha, a.beta, a.eps)
    if a.kind == "singular":
        _, cert = hup_lab.singular_annihilator(a.alpha, a.beta, a.m, a.n,
                                               j_max=a.j_max, k_max=a.k_max)
    else:
        if hup:
            raise UsageError(f"beta' = {bp!r} <= 1: the pair is a uniqueness pair, "
                             "no absolutely continuous annihilator exists")
        _, cert = hup_lab.ac_annihilator(a.beta, alpha=a.alpha, eps=a.eps,
                                         j_max=a.j_max, k_max=a.k_max, tol=a.tol)
    run.results = {"beta_prime": bp, "hup": hup, "certificate": cert.as_dict()}
    if not cert.valid:
        run.warnings.append("witness does not dominate the lattice residual")


def _density_target(name: str, beta_ac: float):
    if name == "poisson":
        return hup_lab.poisson_difference_target(beta_ac), None
    if name == "annihilator":
        return hup_lab.annihilator_target(beta_ac)
    return hup_lab.ExpTarget.e(1), None


def cmd_hup_density_gap(run: Run):
    a = run.args
    if a.target != "e1" and not a.target_beta > 1:
        raise UsageError("--target-beta must exceed 1")
    if min(a.N) < 1:
        raise UsageError("--N values must be positive")
    target, K = _density_target(a.target, a.target_beta)
    out = _pool_map(lambda n: hup_lab.density_gap(a.beta, n, target, tol=a.tol), a.N, a.threads)
    rows = [{"N": r.N, "residual": r.residual, "gram_condition": r.gram_condition,
             "flagged": r.flagged} for r in out]
    run.results = {"beta": a.beta, "rows": rows}
    if K is not None:
        bound, err = hup_lab.duality_bound(target, K)
        run.results["duality_lower_bound"] = bound
        run.tail_bounds["duality_quadrature_error"] = err
    run.tail_bounds["quadrature_error"] = max(r.quadrature_error for r in out)
    if any(r.flagged for r in out):
        run.warnings.append("Gram matrix ill-conditioned; regularized solution reported")
    if a.out:
        write_csv(a.out, ["beta", "N", "residual", "gram_condition"], [r.as_row() for r in out])


def cmd_hup_lattice_residual(run: Run):
    a = run.args
    if a.kind == "singular":
        mu, cert = hup_lab.singular_annihilator(a.alpha, a.beta, a.m, a.n,
                                                j_max=a.j_max, k_max=a.k_max)
        res = hup_lab.lattice_residual(mu, cert.lattice, exact=True)
    else:
        mu, cert = hup_lab.ac_annihilator(a.beta, alpha=a.alpha, eps=a.eps, j_max=a.j_max,
                                          k_max=a.k_max, tol=a.tol, check=False)
        res = hup_lab.lattice_residual(mu, cert.lattice, tol=a.tol)
    run.results = {"max_residual": res.max_residual, "argmax": list(res.argmax),
                   "kind": a.kind}
    run.tail_bounds = {"quadrature_error": res.quadrature_error}
    if a.out:
        write_csv(a.out, ["index", "axis", "re", "im", "abs"], res.table())


def cmd_fixtures_generate(run: Run):
    """Regenerate regression fixtures (spectra, survivor bounds, classifier table)."""
    a = run.args
    d = Path(a.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    betas = [0.3, 0.5, 0.7, 0.9]

    def spectrum_of(b):
        return tro.spectrum(tro.ulam_matrix(b, a.grid, J=a.J))

    reps = _pool_map(spectrum_of, betas, a.threads)
    write_spectrum_csv(d / "spectra.csv", [(b, a.grid, r.eigenvalues[:8]) for b, r in zip(betas, reps)])
    spectra = {repr(b): {"spectral_radius": r.spectral_radius, "peripheral_gap": r.peripheral_gap}
               for b, r in zip(betas, reps)}
    surv = [gauss_map.survivor_set(0.8, n).measure[1] for n in range(1, 9)]
    write_csv(d / "survivor_beta0.8.csv", ["n", "upper"], list(zip(range(1, 9), surv)))
    cls = {repr(b): moebius.discreteness_classify(b).as_dict() for b in (0.5, 1.0, 4 / 3, 1.5, 2.0, 4.0)}
    doc = {"grid": a.grid, "J": a.J, "spectra": spectra, "survivor_upper": surv, "classifier": cls}
    (d / "fixtures.json").write_text(dumps(doc) + "\n", encoding="utf-8")
    run.results = {"written": sorted(p.name for p in d.iterdir()), **doc}


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    _add(common, "--seed", int, 0, help="RNG seed, recorded in every output")
    _add(common, "--threads", _positive_int, 1, help="bound on worker threads for sweeps")

    p = _Parser(prog="kghup", description=__doc__.splitlines()[0], epilog=EPILOG,
                formatter_class=argparse.RawDescriptionHelpFormatter, parents=[common])
    p.add_argument("--version", action="version", version=f"kghup {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def cmd(parent, name, func, help_):
        q = parent.add_parser(name, help=help_, description=help_, parents=[common],
                              epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
        q.set_defaults(func=func)
        return q

    q = cmd(sub, "orbit", cmd_orbit, "iterate U_beta; p/q starts run in exact arithmetic")
    q.add_argument("--x", type=_rational_or_float, required=True)
    _add(q, "--beta", _rational_or_float, Fraction(1))
    _add(q, "--steps", _nonneg_int, 10)
    _add(q, "--precision-bits", int, None)
    _add(q, "--guard-bits", _nonneg_int, 0)

    ecf = sub.add_parser("ecf", help="even continued fractions")
    ecf_sub = ecf.add_subparsers(dest="action", metavar="ACTION", parser_class=_Parser)
    ecf_sub.required = True
    q = cmd(ecf_sub, "expand", cmd_ecf_expand, "branch digits of x")
    q.add_argument("--x", type=_rational_or_float, required=True)
    _add(q, "--depth", _nonneg_int, 40)
    _add(q, "--beta", _rational_or_float, Fraction(1))
    q = cmd(ecf_sub, "reconstruct", cmd_ecf_reconstruct, "evaluate digits with a tail")
    q.add_argument("--digits", type=_int_list, required=True)
    _add(q, "--tail", _rational_or_float, Fraction(0))
    _add(q, "--beta", _rational_or_float, Fraction(1))

    q = cmd(sub, "invariant-check", cmd_invariant_check,
            "residuals of the invariant density 1/(1 - t^2)")
    _add(q, "--points", _positive_int, 1001)
    _add(q, "--window", float, 0.9)
    _add(q, "--J", _positive_int, 512)
    _add(q, "--grid", _nonneg_int, 0, help="also check a grid measure with this many cells")
    _add(q, "--support", float, 0.95)
    q.add_argument("--transfer", action="store_true", help="also apply the transfer operator")

    q = cmd(sub, "birkhoff", cmd_birkhoff, "Birkhoff averages of 1 - x^2")
    q.add_argument("--x", type=_rational_or_float, default=None,
                   help="single start; otherwise --starts seeded random starts")
    _add(q, "--starts", _positive_int, 32)
    _add(q, "--N", _int_list, [100, 10000])
    _add(q, "--beta", float, 1.0)
    _add(q, "--precision-bits", int, 128)
    _add(q, "--guard-bits", _nonneg_int, 32)
    _add(q, "--max-bits", _positive_int, 1 << 16)
    _add(q, "--out", str, None)

    q = cmd(sub, "survivor", cmd_survivor, "measure bounds of the survivor sets E_beta(n)")
    _add(q, "--beta", float, 0.8)
    _add(q, "--depth", _positive_int, 8)
    _add(q, "--branch-cutoff", _positive_int, 64)
    _add(q, "--min-length", float, 1e-5)
    _add(q, "--out", str, None)

    for name, func, help_ in (("spectrum", cmd_spectrum, "leading eigenvalues of a transfer matrix"),
                              ("spectrum-sweep", cmd_spectrum_sweep, "spectra over a (beta, N) grid")):
        q = cmd(sub, name, func, help_)
        if name == "spectrum":
            _add(q, "--beta", float, 0.5)
            _add(q, "--grid", _positive_int, 1024)
        else:
            _add(q, "--betas", _float_list, [0.3, 0.5, 0.7, 0.9])
            _add(q, "--grids", _int_list, [1024])
        _add(q, "--top", _positive_int, 8)
        _add(q, "--J", _positive_int, 512)
        _add(q, "--discretization", str, "ulam")
        _add(q, "--out", str, None)

    mb = sub.add_parser("moebius", help="the Moebius group G(beta)")
    mb_sub = mb.add_subparsers(dest="action", metavar="ACTION", parser_class=_Parser)
    mb_sub.required = True
    q = cmd(mb_sub, "classify", cmd_moebius_classify, "discreteness verdict for beta")
    q.add_argument("--beta", type=_float_list, required=True, help="comma-separated values")
    _add(q, "--q-max", _positive_int, 10000)
    q = cmd(mb_sub, "reduce", cmd_moebius_reduce, "reduce z into the fundamental domain")
    q.add_argument("--z", type=_complex, required=True)
    _add(q, "--beta", float, 1.0)
    _add(q, "--max-steps", _positive_int, 10000)

    hp = sub.add_parser("hup", help="Heisenberg uniqueness pairs for the hyperbola")
    hp_sub = hp.add_subparsers(dest="action", metavar="ACTION", parser_class=_Parser)
    hp_sub.required = True
    q = cmd(hp_sub, "verdict", cmd_hup_verdict, "normalized parameter and uniqueness verdict")
    for flag in ("--alpha", "--beta", "--eps"):
        _add(q, flag, lambda s: float(parse_point(s)), 1.0)
    for name, func, help_ in (("falsify", cmd_hup_falsify, "construct an annihilating measure"),
                              ("lattice-residual", cmd_hup_lattice_residual,
                               "Fourier transform of an annihilator on the lattice-cross")):
        q = cmd(hp_sub, name, func, help_)
        for flag in ("--alpha", "--beta", "--eps"):
            _add(q, flag, lambda s: float(parse_point(s)), 2.0 if flag == "--beta" else 1.0)
        q.add_argument("--kind", choices=["ac", "singular"], default="ac")
        _add(q, "--m", _positive_int, 2)
        _add(q, "--n", _positive_int, 2)
        _add(q, "--j-max", _nonneg_int, 20)
        _add(q, "--k-max", _nonneg_int, 20)
        _add(q, "--tol", float, hup_lab.DEFAULT_TOL)
        if name == "lattice-residual":
            _add(q, "--out", str, None)
    q = cmd(hp_sub, "density-gap", cmd_hup_density_gap,
            "least-squares distance of a target from the exponential span")
    _add(q, "--beta", float, 0.5)
    _add(q, "--N", _int_list, [4, 8, 16, 32])
    q.add_argument("--target", choices=["poisson", "annihilator", "e1"], default="poisson")
    _add(q, "--target-beta", float, 2.0)
    _add(q, "--tol", float, hup_lab.DEFAULT_TOL)
    _add(q, "--out", str, None)

    fx = sub.add_parser("fixtures", help="regression fixtures")
    fx_sub = fx.add_subparsers(dest="action", metavar="ACTION", parser_class=_Parser)
    fx_sub.required = True
    q = cmd(fx_sub, "generate", cmd_fixtures_generate, "write spectra/survivor/classifier fixtures")
    _add(q, "--out-dir", str, "fixtures")
    _add(q, "--grid", _positive_int, 1024)
    _add(q, "--J", _positive_int, 512)
    return p


def _validate(args):
    if getattr(args, "discretization", None) not in (None, *_BUILDERS):
        raise UsageError(f"unknown discretization {args.discretization!r}")
    if getattr(args, "threads", 1) < 1:
        raise UsageError("--threads must be positive")


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        _validate(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    run = Run(args)
    try:
        args.func(run)
    except (AccuracyError, ConvergenceError, ArithmeticError) as exc:
        print(f"kghup: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (UsageError, ValueError, KGHupError) as exc:
        print(f"kghup: invalid input: {exc}", file=sys.stderr)
        return 2
    run.emit()
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
