"""Command line front end: ``python -m borel_laplace {stability,integrate,sweep}``.

Exit status is 0 on success, 1 on invalid input and 2 when a solver fails.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import bench
from .errors import BorelLaplaceError, DomainError, RunFailure, ValidationError
from .stability import region_mask, region_size, write_region_csv, write_size_csv
from .summation import default_degrees, gauss_laguerre_rule

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 1, 2


def _parser():
    p = argparse.ArgumentParser(prog="borel_laplace", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("stability", help="stability regions and their size on the negative axis")
    s.add_argument("--method", choices=["anm", "bpl"], required=True)
    s.add_argument("--K", type=int, nargs="+", required=True)
    s.add_argument("--Ka", type=int)
    s.add_argument("--Kb", type=int)
    s.add_argument("--NG", type=int, default=100)
    s.add_argument("--re-min", type=float, default=-3.0)
    s.add_argument("--re-max", type=float, default=1.0)
    s.add_argument("--im-min", type=float, default=-3.0)
    s.add_argument("--im-max", type=float, default=3.0)
    s.add_argument("--res", type=int, default=200)
    s.add_argument("--size-only", action="store_true", help="print |D| instead of the region mask")
    s.add_argument("--out", help="CSV output path")

    i = sub.add_parser("integrate", help="run one benchmark scenario")
    i.add_argument("--config", help="key=value file; flags override its values")
    i.add_argument("--problem", choices=bench.PROBLEMS)
    i.add_argument("--scheme", choices=bench.SCHEMES)
    tol = i.add_mutually_exclusive_group()
    tol.add_argument("--eps", type=float, dest="tol", help="BPL/ANM residue tolerance")
    tol.add_argument("--tol", type=float, dest="tol", help="reference scheme error tolerance")
    hor = i.add_mutually_exclusive_group()
    hor.add_argument("--T", type=float)
    hor.add_argument("--periods", type=float)
    i.add_argument("--K", type=int)
    i.add_argument("--Ka", type=int)
    i.add_argument("--Kb", type=int)
    i.add_argument("--NG", type=int)
    i.add_argument("--residue-norm", choices=["euclidean", "componentwise"], dest="residue_norm")
    i.add_argument("--fixed-step", type=float, dest="fixed_step")
    i.add_argument("--lam", type=float, help="Dahlquist rate")
    i.add_argument("--u0", type=float, help="Dahlquist initial value")
    i.add_argument("--r", type=float, help="Lotka-Volterra stiffness ratio")
    i.add_argument("--D", type=int, help="KdV number of modes (even)")
    i.add_argument("--samples-per-step", type=int, dest="samples_per_step")
    i.add_argument("--time-samples", type=int, dest="time_samples")
    i.add_argument("--out", help="output directory for trajectory.csv and metrics.csv")

    w = sub.add_parser("sweep", help="run a parameter sweep from a key=value file")
    w.add_argument("config")
    w.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a setting of the file")
    w.add_argument("--out", help="output directory")
    w.add_argument("--workers", type=int, default=1)
    return p


def _format_metrics(m) -> str:
    return (f"{m.problem} {m.scheme} status={m.status} mean_error={m.mean_error:.6e} "
            f"mean_step={m.mean_step:.6e} steps={m.step_count} wall_time={m.wall_time:.3f}s"
            + (f" ({m.message})" if m.message else ""))


def _stability(args):
    rule = gauss_laguerre_rule(args.NG)
    rows = []
    for K in args.K:
        if args.method == "bpl":
            Ka, Kb = (args.Ka, args.Kb) if args.Ka is not None and args.Kb is not None else default_degrees(K)
            if Ka + Kb != K - 1 or min(Ka, Kb) < 0:
                raise ValidationError(f"Padé degrees must satisfy Ka + Kb = K - 1, got [{Ka}/{Kb}]")
        else:
            Ka = Kb = None
        rows.append((K, Ka, Kb, {"K": K, "Ka": Ka, "Kb": Kb, "rule": rule}))
    if args.size_only:
        sizes = [(K, Ka, Kb, region_size(args.method, params)) for K, Ka, Kb, params in rows]
        for K, Ka, Kb, size in sizes:
            print(f"{size:.4f}" if len(sizes) == 1 else f"K={K} size={size:.4f}")
        if args.out:
            write_size_csv(sizes, args.out)
        return EXIT_OK
    if len(rows) != 1:
        raise ValidationError("region masks take a single --K")
    K, Ka, Kb, params = rows[0]
    grid = region_mask(args.method, params, (args.re_min, args.re_max),
                       (args.im_min, args.im_max), args.res)
    print(f"{args.method} K={K}: {int(grid.mask.sum())} of {grid.mask.size} points stable")
    if args.out:
        write_region_csv(grid, args.out)
    return EXIT_OK


_INTEGRATE_KEYS = ["problem", "scheme", "tol", "T", "periods", "K", "Ka", "Kb", "NG",
                   "residue_norm", "fixed_step", "lam", "u0", "r", "D", "samples_per_step",
                   "time_samples", "out"]


def _integrate(args):
    settings = {}
    if args.config:
        settings = {k: v[0] for k, v in bench.read_config(args.config).items() if v}
    for key in _INTEGRATE_KEYS:
        value = getattr(args, key)
        if value is not None:
            settings[key] = value
    if args.periods is not None:
        settings.pop("T", None)
    sc = bench.Scenario(**settings)
    metrics = bench.run_scenario(sc)
    print(_format_metrics(metrics))
    return EXIT_OK


def _sweep(args):
    settings = bench.read_config(args.config)
    settings.update(bench.parse_config(args.set))
    out = args.out or (settings.get("out") or [None])[0]
    rows = bench.sweep(settings, out=out, workers=args.workers)
    for i, m in enumerate(rows):
        swept = " ".join(f"{k}={v}" for k, v in m.params.items())
        print(f"[{i}] {swept} {_format_metrics(m)}".replace("  ", " "))
    if out:
        print(f"metrics written to {os.path.join(out, 'metrics.csv')}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handler = {"stability": _stability, "integrate": _integrate, "sweep": _sweep}[args.command]
    try:
        return handler(args)
    except RunFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValidationError, DomainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BorelLaplaceError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
