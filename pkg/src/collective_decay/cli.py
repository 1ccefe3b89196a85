"""Command-line interface: ``collective-decay <command> ...``.

Exit codes: 0 success, 1 numerical or convergence failure (including failed
verification checks), 2 usage, validation or I/O errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .couplings import Variant, coupling_coefficients
from .dynamics import build_generator, eigenmodes, evolve
from .ensemble import normalized, single_excitation, symmetric_excitation
from .errors import CollectiveDecayError, ConvergenceError, NumericalError, ValidationError
from .microsim import Sector, build_mode_grid, extract_rate_and_shift, microsim_run
from .pv import PVQuadratureSpec
from .verify import SUITES, run_suites, Check

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def parse_initial(text: str, n_atoms: int) -> np.ndarray:
    """Initial amplitudes from a preset.

    ``single:l,eta``, ``symmetric:eta``, ``antisymmetric:eta`` or
    ``weights:c0,c1,...`` with 3N complex entries in flat channel order
    (Python complex syntax, e.g. ``1+0.5j``); weights are normalized.
    """
    kind, _, arg = text.partition(":")
    try:
        if kind == "single":
            atom, zeeman = (int(v) for v in arg.split(","))
            return single_excitation(n_atoms, atom, zeeman)
        if kind in ("symmetric", "antisymmetric"):
            return symmetric_excitation(n_atoms, int(arg), 1 if kind == "symmetric" else -1)
        if kind == "weights":
            w = np.array([complex(v) for v in arg.split(",")])
            if w.shape != (3 * n_atoms,):
                raise ValidationError(f"weights need {3 * n_atoms} entries, got {w.size}")
            return normalized(w)
    except ValueError as exc:
        raise ValidationError(f"bad initial state {text!r}: {exc}") from None
    raise ValidationError(f"unknown initial-state preset {text!r}")


def _spec(args) -> PVQuadratureSpec:
    kw = {"cutoff": args.cutoff}
    if args.eps_seq is not None:
        kw["epsilon_sequence"] = args.eps_seq
    return PVQuadratureSpec(**kw)


def _couplings(ens, variant, args):
    return coupling_coefficients(ens, variant, _spec(args), workers=args.workers)


def _common_params(args) -> dict:
    return {"cutoff": args.cutoff, "eps_seq": args.eps_seq, "units": args.units,
            "workers": args.workers, "ensemble_file": str(args.ensemble_file)}


def cmd_couplings(args) -> int:
    ens = io.load_ensemble(args.ensemble_file, args.units)
    out = io.resolve_out_dir(args.out_dir)
    variants = [Variant(v) for v in args.compare.split(",")] if args.compare else [Variant(args.variant)]
    if args.compare and len(variants) != 2:
        raise ValidationError("--compare takes exactly two variants")
    outputs, extra, results = [], {"residuals": {}}, []
    for v in variants:
        c = _couplings(ens, v, args)
        results.append(c)
        outputs += io.write_matrix(out / f"b_{v.value}", c.b, ens.n_atoms)
        outputs += io.write_matrix(out / f"g_{v.value}", c.g, ens.n_atoms)
        extra["residuals"][v.value] = c.residual
    if len(variants) == 2:
        diff = results[0].g - results[1].g
        name = f"g_diff_{variants[0].value}_{variants[1].value}"
        outputs += io.write_matrix(out / name, diff, ens.n_atoms)
        extra["max_abs_difference"] = float(np.abs(diff).max()) if diff.size else 0.0
        print(f"max |g_{variants[0].value} - g_{variants[1].value}| = "
              f"{extra['max_abs_difference']:.6g}")
    params = {**_common_params(args), "variant": args.variant, "compare": args.compare,
              "quadrature": _spec(args).as_dict()}
    io.write_metadata(out, "couplings", params, ens, outputs, extra)
    print(f"wrote {len(outputs)} files to {out}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    ens = io.load_ensemble(args.ensemble_file, args.units)
    out = io.resolve_out_dir(args.out_dir)
    c = _couplings(ens, args.variant, args)
    modes = eigenmodes(build_generator(ens, c))
    io.write_eigenmodes(out / "eigenmodes.csv", modes, ens.n_atoms)
    params = {**_common_params(args), "variant": args.variant,
              "quadrature": _spec(args).as_dict()}
    io.write_metadata(out, "spectrum", params, ens, ["eigenmodes.csv"],
                      {"residual": c.residual, "rate_sum": float(modes.rates.sum())})
    for rate, shift in zip(modes.rates, modes.shifts):
        print(f"rate {rate:.10g}  shift {shift:.10g}")
    return EXIT_OK


def cmd_evolve(args) -> int:
    ens = io.load_ensemble(args.ensemble_file, args.units)
    beta0 = parse_initial(args.initial, ens.n_atoms)
    out = io.resolve_out_dir(args.out_dir)
    c = _couplings(ens, args.variant, args)
    traj = evolve(build_generator(ens, c), beta0, args.t_final, args.dt_max, args.samples)
    io.write_trajectory(out / "trajectory.csv", traj, ens.n_atoms)
    params = {**_common_params(args), "variant": args.variant, "initial": args.initial,
              "t_final": args.t_final, "dt_max": args.dt_max, "samples": args.samples,
              "quadrature": _spec(args).as_dict()}
    io.write_metadata(out, "evolve", params, ens, ["trajectory.csv"],
                      {"residual": c.residual, "step": traj.step})
    print(f"final population {traj.excited_population[-1]:.12g}")
    return EXIT_OK


def cmd_microsim(args) -> int:
    ens = io.load_ensemble(args.ensemble_file, args.units)
    sector = Sector(args.sector)
    if sector is Sector.FULL and ens.n_atoms != 2:
        raise ValidationError("the full sector is only available for N = 2")
    beta0 = parse_initial(args.initial, ens.n_atoms)
    band = args.band if args.band is not None else (
        50.0 if sector is Sector.RWA else 3.0 * ens.omega0)
    grid = build_mode_grid(ens, band, args.n_omega, args.angular_order, sector,
                           t_final=args.t_final)
    out = io.resolve_out_dir(args.out_dir)
    run = microsim_run(ens, grid, beta0, args.t_final, sector, args.samples)
    io.write_trajectory(out / "trajectory.csv", run.trajectory, ens.n_atoms)
    io.write_csv(out / "virtual_population.csv", ["time", "virtual_population"],
                 zip(run.trajectory.times, run.virtual_population))
    window = args.fit_window or (min(0.2, 0.1 * args.t_final), args.t_final)
    fit = extract_rate_and_shift(run.trajectory, window)
    modes = eigenmodes(build_generator(ens, coupling_coefficients(ens)))
    k = int(np.argmax(np.abs(modes.eigenvectors.conj().T @ beta0)))
    comparison = {
        "fit": {"rate": fit.rate, "shift": fit.shift, "rate_residual": fit.rate_residual,
                "shift_residual": fit.shift_residual, "component": fit.component,
                "window": list(window)},
        "prediction": {"rate": float(modes.rates[k]), "shift": float(modes.shifts[k]),
                       "mode_index": k},
        "norm_drift": run.norm_drift,
        "max_virtual_population": float(run.virtual_population.max()),
    }
    params = {"ensemble_file": str(args.ensemble_file), "units": args.units,
              "sector": sector.value, "initial": args.initial, "t_final": args.t_final,
              "samples": args.samples, "grid": grid.as_dict()}
    io.write_metadata(out, "microsim", params, ens,
                      ["trajectory.csv", "virtual_population.csv"], comparison)
    print(f"fitted rate {fit.rate:.6g} (effective {modes.rates[k]:.6g}), "
          f"shift {fit.shift:.6g} (effective {modes.shifts[k]:.6g})")
    return EXIT_OK


def cmd_verify(args) -> int:
    suites = SUITES if args.suite == "all" else (args.suite,)
    report = run_suites(suites, workers=args.workers)
    for checks in report["suites"].values():
        for c in checks:
            print(Check(**c).line())
    out = io.resolve_out_dir(args.out_dir)
    path = out / (args.report or f"verify_{args.suite}.json")
    path.write_text(io.dumps(report))
    print(f"report: {path}")
    return EXIT_OK if report["passed"] else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="collective-decay", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", help=f"output directory (env {io.OUT_DIR_ENV}, default ./results)")
    common.add_argument("--workers", type=int, default=1, help="threads for coupling assembly")

    phys = argparse.ArgumentParser(add_help=False)
    phys.add_argument("ensemble_file", type=Path)
    phys.add_argument("--units", choices=["inverse_k0", "wavelength"],
                      help="length unit when the file does not declare one")
    phys.add_argument("--variant", default="closed", choices=[v.value for v in Variant])
    phys.add_argument("--cutoff", type=float, default=40.0, help="frequency cutoff in units of omega0")
    phys.add_argument("--eps-seq", type=_floats, help="regulator sequence, e.g. 0.04,0.02,0.01,0.005")

    p = sub.add_parser("couplings", parents=[common, phys], help="write b and g matrices")
    p.add_argument("--compare", help="two variants, e.g. extended,full_numeric")
    p.set_defaults(func=cmd_couplings)

    p = sub.add_parser("spectrum", parents=[common, phys], help="collective rates and shifts")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("evolve", parents=[common, phys], help="effective-generator trajectory")
    p.add_argument("--initial", default="single:0,0")
    p.add_argument("--t-final", type=float, default=5.0)
    p.add_argument("--dt-max", type=float, default=0.01)
    p.add_argument("--samples", type=int, default=201)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("microsim", parents=[common], help="discretized-mode simulation")
    p.add_argument("ensemble_file", type=Path)
    p.add_argument("--units", choices=["inverse_k0", "wavelength"])
    p.add_argument("--sector", default="rwa", choices=[s.value for s in Sector])
    p.add_argument("--band", type=float,
                   help="rwa: half-width W around omega0 (default 50); full: upper edge (default 3 omega0)")
    p.add_argument("--n-omega", type=int, default=400)
    p.add_argument("--angular-order", type=int, default=17)
    p.add_argument("--t-final", type=float, default=3.0)
    p.add_argument("--initial", default="single:0,0")
    p.add_argument("--samples", type=int, default=301)
    p.add_argument("--fit-window", type=_floats)
    p.set_defaults(func=cmd_microsim)

    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("--suite", default="all", choices=[*SUITES, "all"])
    p.add_argument("--report", help="report file name inside the output directory")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"error: {exc}\nresidual: {exc.residual:.6g}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CollectiveDecayError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
