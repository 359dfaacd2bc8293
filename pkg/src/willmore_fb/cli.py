"""Command-line front end.

Exit status: 0 when every asserted residual is below tolerance, 1 on a
computation error (the typed payload is printed as JSON), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import convergence, energies, free_boundary, gallery, reflection, spectral
from .errors import WillmoreFBError
from .geometry import compute_geometry
from .grid import ParamGrid, read_surface, write_surface


class UsageError(Exception):
    pass


class ResidualAboveTolerance(WillmoreFBError):
    pass


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, default=_json_default)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _write_csv(rows, path: str) -> None:
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)


def _params(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"parameter {item!r} is not of the form key=value")
        try:
            out[key] = float(val)
        except ValueError:
            out[key] = json.loads(val)
    return out


def _load_surface(args):
    if getattr(args, "surface", None):
        return read_surface(args.surface)
    if getattr(args, "id", None):
        params = _params(getattr(args, "param", None))
        surf = gallery.get(args.id, **params)
        nx, ny = args.nx or 129, args.ny or 65
        return gallery.sample(args.id, grid=surf.default_grid(nx, ny), **params)
    raise UsageError("give a surface with --surface FILE or --id NAME")


def _add_surface_args(p):
    p.add_argument("--surface", help="surface JSON file")
    p.add_argument("--id", help="gallery surface id")
    p.add_argument("--nx", type=int)
    p.add_argument("--ny", type=int)
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="gallery parameter (scale, tilt_deg, r, d, ...)")
    p.add_argument("--scheme", choices=("auto", "analytic", "fd"), default="auto")


def _check(name: str, value: float, tol: float, failures: list) -> dict:
    ok = bool(abs(value) <= tol)
    if not ok:
        failures.append(name)
    return {"value": value, "tol": tol, "pass": ok}


def _finish(payload: dict, failures: list, out: str | None) -> int:
    payload["pass"] = not failures
    _emit(payload, out)
    if failures:
        raise ResidualAboveTolerance("asserted residuals above tolerance", failed=failures)
    return 0


# ---------------------------------------------------------------- commands

def cmd_energy(args) -> int:
    f = _load_surface(args)
    geom = compute_geometry(f, scheme=args.scheme)
    chi = int(args.chi) if args.chi is not None else "chart"
    report = energies.energy_report(geom, chi=chi, support=args.support,
                                    tol_orth=args.tol_constraint)
    failures: list = []
    scale = max(1.0, abs(report.E))
    payload = {"surface": dict(f.meta), "grid": f.grid.to_dict(), "scheme": geom.scheme,
               **report.to_dict(),
               "checks": {"E-T-W": _check("E-T-W", report.identity_residuals["E-T-W"],
                                          1e-12 * scale, failures)}}
    return _finish(payload, failures, args.out)


def _random_field(grid: ParamGrid, rng: np.random.Generator) -> np.ndarray:
    X, Y = grid.mesh()
    xs = (X - grid.x_range[0]) / (grid.x_range[1] - grid.x_range[0])
    ys = (Y - grid.y_range[0]) / (grid.y_range[1] - grid.y_range[0])
    window = np.sin(np.pi * xs) ** 3 * np.cos(0.5 * np.pi * ys) ** 3
    comps = [np.cos(2 * np.pi * (rng.integers(1, 4) * xs + rng.random()))
             * np.cos(np.pi * rng.integers(0, 3) * ys + rng.random()) for _ in range(3)]
    phi = window[..., None] * np.stack(comps, axis=-1)
    phi[:, [0, -1]] = 0.0
    phi[-1] = 0.0
    return phi


def cmd_variation(args) -> int:
    f = _load_surface(args)
    if args.field:
        data = json.loads(Path(args.field).read_text())
        phi = np.asarray(data.get("values", data) if isinstance(data, dict) else data,
                         dtype=float).reshape(f.grid.ny, f.grid.nx, 3)
    else:
        phi = _random_field(f.grid, np.random.default_rng(args.seed))
    geom = compute_geometry(f, scheme=args.scheme)
    rep = energies.first_variation_willmore(geom, phi)
    failures: list = []
    payload = {"surface": dict(f.meta), "DW": rep.total, "terms": list(rep.terms)}
    if not args.no_oracle:
        oracle = energies.energy_derivative_fd(f, phi, t=args.t, scheme="fd")
        fd_geom = compute_geometry(f, scheme="fd")
        consistent = energies.first_variation_willmore(fd_geom, phi).total
        payload["oracle"] = oracle
        payload["DW_fd_scheme"] = consistent
        payload["checks"] = {"oracle": _check("oracle", consistent - oracle,
                                              1e-6 + 1e-3 * abs(consistent), failures)}
    return _finish(payload, failures, args.out)


def cmd_reflect(args) -> int:
    f = _load_surface(args)
    full = reflection.reflect(f, args.kind, tol=args.tol_constraint, scheme=args.scheme)
    parity = reflection.parity_audit(full, args.kind)
    conf = reflection.conformality_preserved(full, f, scheme=args.scheme)
    summary = {"kind": args.kind, "grid": full.grid.to_dict(), "parity": parity.residuals,
               "conformality": {"full": conf.full, "half": conf.half,
                                "mirror_defect": conf.mirror_defect}}
    if args.out:
        write_surface(full, args.out)
        summary["written"] = args.out
    if args.summary:
        _emit(summary, args.summary)
    elif args.out:
        _emit(summary, None)
    else:
        from .grid import immersion_to_dict

        _emit(immersion_to_dict(full), None)
    return 0


def cmd_residuals(args) -> int:
    f = _load_surface(args)
    geom = compute_geometry(f, scheme=args.scheme)
    rep = free_boundary.free_bc_residuals(geom, args.support, tol_orth=args.tol_constraint)
    if args.csv:
        _write_csv(rep.csv_rows(), args.csv)
    failures: list = []
    checks = {}
    for name in args.require or []:
        if name not in rep.sup:
            raise UsageError(f"no residual named {name!r}; have {sorted(rep.sup)}")
        checks[name] = _check(name, rep.sup[name], args.tol, failures)
    payload = {"surface": dict(f.meta), **rep.to_dict(), "checks": checks}
    return _finish(payload, failures, args.out)


def _boundary_data(path, expr, nx):
    x = spectral.periodic_nodes(nx)
    if path:
        text = Path(path).read_text()
        try:
            data = json.loads(text)
            vals = np.asarray(data.get("values", data) if isinstance(data, dict) else data, float)
        except json.JSONDecodeError:
            vals = np.loadtxt(path, delimiter="," if "," in text else None, dtype=float)
        vals = np.ravel(vals)
        if vals.size != nx:
            raise UsageError(f"{path}: expected {nx} samples on [-pi, pi], got {vals.size}")
        return vals
    if expr:
        import sympy as sp

        sx = sp.Symbol("x", real=True)
        fn = sp.lambdify(sx, sp.sympify(expr, locals={"x": sx}), "numpy")
        return np.broadcast_to(np.asarray(fn(x), dtype=float), x.shape).copy()
    return np.zeros(nx)


def cmd_extend(args) -> int:
    K = args.modes
    nx = args.nx or max(2 * K + 3, 65)
    if nx < 2 * K + 2:
        raise UsageError(f"--nx must be at least {2 * K + 2} for {K} modes")
    ny = args.ny or 65
    x = spectral.periodic_nodes(nx)
    y = np.linspace(0.0, args.y_max, ny)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        phi = spectral.fourier_decompose(_boundary_data(args.phi, args.phi_expr, nx), K)
        psi = spectral.fourier_decompose(_boundary_data(args.psi, args.psi_expr, nx), K)
    u = spectral.biharmonic_extension(phi, psi, x, y,
                                      support_x=x if args.enforce_support else None)
    if args.cutoff:
        u = spectral.apply_cutoff(u)
    uy = spectral.biharmonic_extension(phi, psi, x, np.array([0.0]), y_order=1).values[0]
    failures: list = []
    checks = {}
    if not args.cutoff:
        tr = float(np.max(np.abs(u.values[0] - phi.evaluate(x))))
        ntr = float(np.max(np.abs(uy - psi.evaluate(x))))
        checks = {"trace": _check("trace", tr, args.tol_spectral, failures),
                  "normal_trace": _check("normal_trace", ntr, args.tol_spectral, failures)}
    if args.csv:
        rows = [["x", "y", "u"]]
        for jj, yy in enumerate(y):
            rows.extend([repr(float(xx)), repr(float(yy)), repr(float(u.values[jj, ii]))]
                        for ii, xx in enumerate(x))
        _write_csv(rows, args.csv)
    payload = {"modes": K, "field": u.to_dict(), "checks": checks,
               "warnings": [str(w.message) for w in caught]}
    return _finish(payload, failures, args.out)


def cmd_gallery(args) -> int:
    if args.action == "list":
        _emit({"surfaces": gallery.list_surfaces()}, args.out)
        return 0
    if not args.id:
        raise UsageError("gallery sample needs --id")
    params = _params(args.param)
    surf = gallery.get(args.id, **params)
    grid = surf.default_grid(args.nx or 65, args.ny or 33)
    if args.x_range or args.y_range:
        grid = ParamGrid(grid.nx, grid.ny, tuple(args.x_range or grid.x_range),
                         tuple(args.y_range or grid.y_range))
    f = gallery.sample(args.id, grid=grid, **params)
    if args.out:
        write_surface(f, args.out)
    else:
        from .grid import immersion_to_dict

        _emit(immersion_to_dict(f), None)
    return 0


def _ladder(text: str):
    try:
        return tuple(tuple(int(v) for v in rung.lower().split("x")) for rung in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad ladder {text!r}; use e.g. 65x33,129x65,257x129") from exc


def cmd_converge(args) -> int:
    if args.quantity not in convergence.STUDIES:
        raise UsageError(f"unknown quantity {args.quantity!r}; have {sorted(convergence.STUDIES)}")
    ladder = _ladder(args.ladder) if args.ladder else convergence.DEFAULT_LADDER
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        table = convergence.convergence_study(args.quantity, ladder)
    if args.csv:
        _write_csv(table.csv_rows(), args.csv)
    failures: list = []
    payload = {**table.to_dict(), "warnings": [str(w.message) for w in caught]}
    if args.min_order is not None:
        order = table.final_order
        ok = order is not None and order >= args.min_order
        payload["checks"] = {"order": {"value": order, "min": args.min_order, "pass": ok}}
        if not ok:
            failures.append("order")
    return _finish(payload, failures, args.out)


def cmd_audit(args) -> int:
    """Identity and estimate battery; seeds fix every random draw."""
    rng = np.random.default_rng(args.seed)
    failures: list = []
    checks = {}
    hs = rng.normal(size=(10_000, 2, 2))
    hs = 0.5 * (hs + np.swapaxes(hs, -1, -2))
    checks["cubic_identity"] = _check("cubic_identity",
                                      float(np.max(np.abs(energies.cubic_identity_check(hs)))),
                                      1e-12, failures)
    checks["kernel_mass"] = _check(
        "kernel_mass", max(abs(spectral.kernel_mass(y) - 1.0) for y in (0.1, 0.5, 1.0, 2.0)),
        1e-10, failures)
    phi = spectral.random_band_limited(rng, K=16, decay=2.0)
    l2 = max(spectral.l2_identity_check(phi, s).residual for s in (-0.5, 0.5, 1.0, 1.5, 2.0))
    checks["l2_identity"] = _check("l2_identity", l2, 1e-12, failures)
    psi = spectral.random_band_limited(rng, K=16, decay=2.0)
    ibp = spectral.boundary_ibp_identity(phi, psi)
    checks["boundary_ibp"] = _check("boundary_ibp", ibp.residual,
                                    1e-10 * max(1.0, abs(ibp.coefficient)), failures)
    audit = spectral.estimate_audit(seed=args.seed, n_pairs=args.pairs)
    payload = {"seed": args.seed, "checks": checks, "estimate_ratios": audit["max"],
               "pairs": audit["pairs"]}
    return _finish(payload, failures, args.out)


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-constraint", type=float, default=1e-8)
    common.add_argument("--tol-spectral", type=float, default=1e-9)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write the JSON report (or surface) here")

    parser = argparse.ArgumentParser(prog="willmore-fb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("energy", parents=[common], help="W, E, T and Gauss-Bonnet relations")
    _add_surface_args(p)
    p.add_argument("--chi", type=int, help="Euler characteristic of the closed-up surface")
    p.add_argument("--support", help="plane | sphere:R for the support-surface relation")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("variation", parents=[common], help="first variation of W")
    _add_surface_args(p)
    p.add_argument("--field", help="JSON with per-node vectors (ny*nx*3)")
    p.add_argument("--t", type=float, default=1e-5, help="step of the energy oracle")
    p.add_argument("--no-oracle", action="store_true")
    p.set_defaults(func=cmd_variation)

    p = sub.add_parser("reflect", parents=[common], help="extend by reflection")
    _add_surface_args(p)
    p.add_argument("--kind", choices=("plane", "line"), default="plane")
    p.add_argument("--summary", help="write the parity/conformality summary here")
    p.set_defaults(func=cmd_reflect)

    p = sub.add_parser("residuals", parents=[common], help="free boundary residuals")
    _add_surface_args(p)
    p.add_argument("--support", default="plane", help="plane | sphere:R | line")
    p.add_argument("--csv", help="per-node residual CSV")
    p.add_argument("--require", action="append", help="assert this residual below --tol")
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_residuals)

    p = sub.add_parser("extend", parents=[common], help="biharmonic extension of (phi, psi)")
    p.add_argument("--phi", help="samples of phi on [-pi, pi] (JSON list or text)")
    p.add_argument("--psi", help="samples of psi on [-pi, pi]")
    p.add_argument("--phi-expr", help="expression in x, e.g. 'cos(x)'")
    p.add_argument("--psi-expr", help="expression in x")
    p.add_argument("--modes", type=int, default=spectral.DEFAULT_MODES)
    p.add_argument("--nx", type=int)
    p.add_argument("--ny", type=int)
    p.add_argument("--y-max", type=float, default=1.0)
    p.add_argument("--cutoff", action="store_true", help="multiply by the fixed cutoff")
    p.add_argument("--enforce-support", action="store_true",
                   help="require data supported in [-pi/2, pi/2]")
    p.add_argument("--csv", help="write x, y, u rows")
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("gallery", parents=[common], help="list or sample gallery surfaces")
    p.add_argument("action", choices=("list", "sample"))
    p.add_argument("--id")
    p.add_argument("--nx", type=int)
    p.add_argument("--ny", type=int)
    p.add_argument("--x-range", type=float, nargs=2)
    p.add_argument("--y-range", type=float, nargs=2)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=cmd_gallery)

    p = sub.add_parser("converge", parents=[common], help="refinement study")
    p.add_argument("--quantity", default="hemisphere_W",
                   help=", ".join(sorted(convergence.STUDIES)))
    p.add_argument("--ladder", help="e.g. 65x33,129x65,257x129")
    p.add_argument("--min-order", type=float)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("audit", parents=[common], help="identity and estimate battery")
    p.add_argument("--pairs", type=int, default=8)
    p.set_defaults(func=cmd_audit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except WillmoreFBError as exc:
        print(json.dumps(exc.payload, default=_json_default))
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (UsageError, ValueError, KeyError, FileNotFoundError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
