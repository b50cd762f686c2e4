"""Command-line entry point.

    minsurf generate --example catenoid --res 128 --out cat.obj
    minsurf diagnose --in cat.obj --all
    minsurf shiffman --example riemann --t 1 --out report.json
    minsurf kdv print --order 2
    minsurf kdv detect --gauss-map "(exp z)" --max-order 3
    minsurf solve-mse --domain -0.8,0.8,-0.8,0.8 --res 65 --boundary scherk
    minsurf limits --sequence catenoid --n 1..64 --out report.json
    minsurf selftest

Every flag may also come from ``--config FILE`` holding ``key = value``
lines (keys as the long flag names); flags on the command line win.
Usage errors exit with 2, numerical failures with 1 and a JSON error report.
"""
from __future__ import annotations

import argparse
import os
import sys

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


# ----------------------------------------------------------------- parsing

def _floats(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def _resolution(text):
    vals = [int(v) for v in str(text).split(",")]
    if len(vals) == 1:
        return vals[0]
    if len(vals) == 2:
        return tuple(vals)
    raise argparse.ArgumentTypeError("resolution is N or NX,NY")


def _n_range(text):
    text = str(text)
    if ".." in text:
        a, b = text.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(v) for v in text.split(",")]


def _point(text):
    vals = _floats(text)
    if len(vals) != 3:
        raise argparse.ArgumentTypeError("point is x,y,z")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="minsurf", description="Minimal-surface geometry toolkit")
    p.add_argument("--config", help="key = value file mirroring the flags")
    p.add_argument("--threads", type=int, default=None, help="cap on worker threads for linear algebra")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a catalog surface")
    g.add_argument("--example", required=True)
    g.add_argument("--t", type=float, default=1.0, help="flux parameter of the Riemann example")
    g.add_argument("--res", type=_resolution, default=128)
    g.add_argument("--window", type=_floats, default=None, help="x0,x1,y0,y1")
    g.add_argument("--form", default="conjugate", help="helicoid data: conjugate or height")
    g.add_argument("--r-max", type=float, default=4.0, help="section radius where the Riemann mesh stops")
    g.add_argument("--gauss-map", default=None, help="custom g in prefix syntax (with --example custom)")
    g.add_argument("--height-differential", default="1", help="custom dh coefficient in prefix syntax")
    g.add_argument("--domain", default="plane", help="custom data domain: plane or cylinder")
    g.add_argument("--out", required=True, help=".obj or .csv")

    d = sub.add_parser("diagnose", help="statistics of a mesh")
    d.add_argument("--in", dest="input", required=True)
    d.add_argument("--all", action="store_true")
    d.add_argument("--flux", action="store_true")
    d.add_argument("--decay", action="store_true")
    d.add_argument("--degree", action="store_true")
    d.add_argument("--area", action="store_true")
    d.add_argument("--level", type=float, default=None, help="height of the flux section")
    d.add_argument("--center", type=_point, default=[0.0, 0.0, 0.0])
    d.add_argument("--radii", type=_floats, default=None)
    d.add_argument("--out", default=None)

    s = sub.add_parser("shiffman", help="Shiffman field of an example")
    s.add_argument("--example", default="riemann")
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--res", type=_resolution, default=512)
    s.add_argument("--r-max", type=float, default=4.0)
    s.add_argument("--gauss-map", default=None)
    s.add_argument("--window", type=_floats, default=None)
    s.add_argument("--out", default=None)

    k = sub.add_parser("kdv", help="KdV hierarchy tools")
    ksub = k.add_subparsers(dest="kdv_command", required=True)
    kp = ksub.add_parser("print")
    kp.add_argument("--order", type=int, required=True)
    kd = ksub.add_parser("detect")
    kd.add_argument("--gauss-map", default=None)
    kd.add_argument("--potential", default=None, help="u directly, in prefix syntax")
    kd.add_argument("--max-order", type=int, default=3)
    kd.add_argument("--tol", type=float, default=1e-6)
    kd.add_argument("--points", type=int, default=40)
    kd.add_argument("--center", default="0.5+0.5j")
    kd.add_argument("--radius", type=float, default=0.4)
    kd.add_argument("--out", default=None)

    m = sub.add_parser("solve-mse", help="Dirichlet problem for the minimal surface equation")
    m.add_argument("--domain", type=_floats, default=None, help="x0,x1,y0,y1")
    m.add_argument("--res", type=_resolution, default=65)
    m.add_argument("--boundary", default="scherk", help="scherk, catenoid, affine:a,b,c or a CSV file")
    m.add_argument("--tol", type=float, default=1e-10)
    m.add_argument("--max-iter", type=int, default=50)
    m.add_argument("--out", default=None, help="CSV grid x,y,u")
    m.add_argument("--report", default=None)

    li = sub.add_parser("limits", help="shrinking sequences and blow-up sets")
    li.add_argument("--sequence", required=True, choices=("catenoid", "helicoid", "plane"))
    li.add_argument("--n", type=_n_range, default=[4, 8, 16, 32, 64])
    li.add_argument("--box", type=float, default=1.0)
    li.add_argument("--out", default=None)

    st = sub.add_parser("selftest", help="run the acceptance suite")
    st.add_argument("--out", default=None)
    return p


def read_config(path) -> dict:
    out = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}: expected key = value, got {raw.strip()!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            val = val.strip('"').strip("'")
            if val.lower() in ("true", "false"):
                val = val.lower() == "true"
            out[key.replace("-", "_")] = val
    return out


def _option_map(parser):
    """dest -> (option string, takes a value) for every optional flag."""
    out = {}
    for a in parser._actions:
        if a.option_strings and a.dest != "help":
            out[a.dest] = (a.option_strings[-1], a.nargs != 0)
    return out


def _config_tokens(parser, values):
    tokens = []
    for dest, (flag, takes_value) in _option_map(parser).items():
        key = dest if dest in values else flag.lstrip("-").replace("-", "_")
        if key not in values or dest == "config":
            continue
        val = values[key]
        if takes_value:
            tokens += [flag, str(val).lower() if isinstance(val, bool) else str(val)]
        elif val is True or str(val).lower() == "true":
            tokens.append(flag)
    return tokens


def _apply_config(parser, argv):
    """Splice config entries in as flags ahead of the command-line flags of
    the selected subcommand; argparse keeps the last occurrence, so explicit
    flags win.  Keys a subcommand does not know are ignored."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    pre.add_argument("--threads")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return parser.parse_args(argv)
    try:
        values = read_config(known.config)
    except OSError as exc:
        parser.error(f"cannot read config: {exc}")
    except ValueError as exc:
        parser.error(str(exc))
    head = ["--config", known.config] + _config_tokens(parser, values)
    if known.threads is not None:
        head += ["--threads", known.threads]
    sub, path = parser, []
    while rest and not rest[0].startswith("-"):
        action = next((a for a in sub._actions if isinstance(a, argparse._SubParsersAction)), None)
        if action is None or rest[0] not in action.choices:
            break
        path.append(rest.pop(0))
        sub = action.choices[path[-1]]
    return parser.parse_args(head + path + _config_tokens(sub, values) + rest)


# ---------------------------------------------------------------- commands

def _emit(report, out):
    text = report.to_json()
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_generate(args):
    from . import catalog
    from . import symexpr as se
    from .mesh import write_csv, write_obj
    from .weierstrass import WeierstrassData, immerse

    if args.example == "custom":
        if not args.gauss_map or not args.window:
            raise SystemExit(_usage("custom data needs --gauss-map and --window"))
        wd = WeierstrassData(se.parse(args.gauss_map), se.parse(args.height_differential), args.domain,
                             name="custom")
        mesh = immerse(wd, args.window, args.res)
    elif args.example == "riemann":
        mesh = catalog.riemann_example(args.t, args.res, r_max=args.r_max)
    else:
        params = {"form": args.form} if args.example == "helicoid" else {}
        mesh = catalog.mesh(args.example, args.res, window=args.window, **params)
    if str(args.out).endswith(".csv"):
        write_csv(mesh, args.out)
    else:
        write_obj(mesh, args.out)
    nx, ny = mesh.shape
    print(f"wrote {args.out}: {mesh.name} {nx}x{ny} vertices")


def _default_radii(reach):
    return [reach * f for f in (0.05, 0.1, 0.15, 0.2, 0.3, 0.45, 0.6, 0.75, 0.9)]


def cmd_diagnose(args):
    import numpy as np

    from . import diagnostics as dg
    from .errors import MinsurfError
    from .mesh import read_obj
    from .report import Report

    mesh = read_obj(args.input)
    every = args.all or not (args.flux or args.decay or args.degree or args.area)
    rep = Report(surface=mesh.name or os.path.basename(args.input))
    errors = {}
    if every or args.flux:
        try:
            level = args.level
            if level is None:
                level = float(np.nanmean(mesh.position[mesh.shape[0] // 2, :, 2]))
            rep["flux"] = dg.flux(mesh, level).vector
            rep["flux_level"] = level
        except MinsurfError as exc:
            rep["flux"] = None
            errors["flux"] = f"{type(exc).__name__}: {exc}"
    P = mesh.position[np.all(np.isfinite(mesh.position), axis=-1)]
    reach = float(np.max(np.linalg.norm(P - np.asarray(args.center), axis=1)))
    if every or args.decay:
        radii = args.radii or list(np.geomspace(0.25 * reach, 0.9 * reach, 6))
        try:
            ds = dg.decay_statistic(mesh, radii, center=args.center)
            rep["decay"] = {"R": ds.radii, "KR2": ds.KR2, "KR4": ds.KR4}
            rep["verdict"] = ds.verdict
        except MinsurfError as exc:
            rep["decay"] = None
            rep["verdict"] = None
            errors["decay"] = f"{type(exc).__name__}: {exc}"
    if every or args.degree:
        try:
            deg, info = dg.gauss_degree(mesh, details=True)
            rep["degree"] = deg
            rep["degree_check"] = {"curvature_integral": info["integral"], "preimage_counts": info["counts"]}
        except MinsurfError as exc:
            rep["degree"] = None
            errors["degree"] = f"{type(exc).__name__}: {exc}"
    if every or args.area:
        try:
            bd = dg.boundary_distance(mesh, args.center)
            radii = args.radii or _default_radii(bd)
            ratio = dg.area_growth(mesh, args.center, radii)
            rep["area_growth"] = {"R": radii, "ratio": ratio}
        except MinsurfError as exc:
            rep["area_growth"] = None
            errors["area_growth"] = f"{type(exc).__name__}: {exc}"
    if errors:
        rep["errors"] = errors
    _emit(rep, args.out)


def cmd_shiffman(args):
    import numpy as np

    from . import catalog
    from . import shiffman as sh
    from . import symexpr as se
    from .report import Report
    from .weierstrass import WeierstrassData, immerse

    cal = sh.calibrate()
    wd = None
    if args.gauss_map:
        wd = WeierstrassData(se.parse(args.gauss_map), se.const(1), "plane", name="custom")
        mesh = immerse(wd, args.window or (0.0, 1.0, 0.0, 1.0), args.res)
    elif args.example == "riemann":
        mesh = catalog.riemann_example(args.t, args.res, r_max=args.r_max)
    elif args.example == "helicoid":
        mesh = catalog.mesh("helicoid", args.res, window=args.window, form="height")
    else:
        mesh = catalog.mesh(args.example, args.res, window=args.window)
    field = sh.shiffman_geometric(mesh)
    v, resid = sh.linearity_test(field.S, mesh.normal)
    rep = Report(surface=mesh.name, resolution=list(mesh.shape), max_abs_S=field.max_abs(),
                 convention={"part": cal["part"], "sign": cal["sign"], "correlation": cal["correlation"]},
                 linearity={"v": v, "relative_residual": resid})
    if args.example == "riemann" and not args.gauss_map:
        rep["t"] = args.t
    if wd is not None:
        closed = sh.shiffman_part(wd, mesh.z, cal)
        ok = np.isfinite(field.S)
        rep["closed_form_max_difference"] = float(np.max(np.abs(field.S[ok] - closed[ok])))
    _emit(rep, args.out)


def cmd_kdv(args):
    from . import diffpoly as dp
    if args.kdv_command == "print":
        n = args.order
        print(f"P_{n} = {dp.hierarchy(n)}")
        print(f"du/dt_{n} = {dp.flow(n)}")
        return
    from . import kdvlab as kl
    from . import symexpr as se
    from .report import Report
    if bool(args.gauss_map) == bool(args.potential):
        raise SystemExit(_usage("give exactly one of --gauss-map and --potential"))
    if args.gauss_map:
        g = se.parse(args.gauss_map)
        u = kl.miura_from_g(g)
    else:
        g = None
        u = se.parse(args.potential)
    zs = kl.sample_points(args.points, center=complex(args.center.replace(" ", "")), radius=args.radius)
    sample = kl.PotentialSample.from_expr(u, zs, kl.required_order(args.max_order))
    det = kl.algebro_geometric_test(sample, args.max_order, args.tol)
    rep = Report(gauss_map=se.to_prefix(g) if g is not None else None, potential=se.to_prefix(u),
                 max_order=args.max_order, tol=args.tol, detected=det.detected,
                 stationary_order=det.stationary_order, coefficients=det.coefficients,
                 residuals={str(k): v for k, v in det.residuals.items()})
    _emit(rep, args.out)


def _read_grid_csv(path):
    import numpy as np
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    xs, ys = np.unique(data[:, 0]), np.unique(data[:, 1])
    order = np.lexsort((data[:, 1], data[:, 0]))
    return xs, ys, data[order, 2].reshape(len(xs), len(ys))


def cmd_solve_mse(args):
    import numpy as np

    from . import mse
    from .report import Report
    kw = dict(tol=args.tol, max_iter=args.max_iter)
    b = args.boundary
    if b == "scherk":
        p = mse.scherk_problem(args.res, **kw)
        exact = mse.scherk_graph
        if args.domain:
            p = mse.GridProblem(tuple(args.domain), args.res, mse.scherk_graph, **kw)
    elif b == "catenoid":
        p = mse.catenoid_problem(args.res, tuple(args.domain) if args.domain else (1.5, 3.0, -0.75, 0.75), **kw)
        exact = mse.catenoid_graph
    elif b.startswith("affine:"):
        a, bb, c = _floats(b.split(":", 1)[1])
        exact = lambda x, y: a * x + bb * y + c  # noqa: E731
        p = mse.GridProblem(tuple(args.domain or (0.0, 1.0, 0.0, 1.0)), args.res, exact, **kw)
    else:
        xs, ys, grid = _read_grid_csv(b)
        exact = None
        p = mse.GridProblem((xs[0], xs[-1], ys[0], ys[-1]), grid.shape, grid, **kw)
    sol = mse.solve_mse(p)
    X, Y = p.grid()
    rep = Report(bounds=list(p.bounds), resolution=list(p.shape), iterations=sol.iterations,
                 residual_trace=sol.trace, steps=sol.steps,
                 final_residual=sol.trace[-1], area=mse.discrete_area(sol.u, *p.spacing))
    if exact is not None:
        rep["max_error"] = float(np.max(np.abs(sol.u - exact(X, Y))))
    if args.out:
        np.savetxt(args.out, np.column_stack([X.ravel(), Y.ravel(), sol.u.ravel()]), delimiter=",",
                   header="x,y,u", comments="", fmt="%.17g")
    _emit(rep, args.report)


def cmd_limits(args):
    from . import limits as lm
    from .report import Report
    ns = sorted(set(args.n))
    res = lm.blowup_set(args.sequence, ns, box=args.box)
    if args.sequence == "helicoid":
        region = lm.Region(center=(0.6 * args.box, 0.0, 0.0), r_max=0.3 * args.box)
    else:
        region = lm.Region(r_min=0.5 * args.box, r_max=args.box)
    dist = lm.distance_series(args.sequence, ns, region, args.box, skip_empty=True)
    rep = Report(sequence=args.sequence, n=ns, tau="n", cell=lm.CELL,
                 blowup_set=res.points, blowup_cells_per_n={str(k): v for k, v in res.per_n.items()},
                 region={"center": list(region.center), "r_min": region.r_min, "r_max": region.r_max},
                 lamination_distance=dist)
    _emit(rep, args.out)


def cmd_selftest(args):
    from . import acceptance
    results = acceptance.run_all(echo=lambda s: print(s, file=sys.stderr))
    _emit(acceptance.to_report(results), args.out)
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {"generate": cmd_generate, "diagnose": cmd_diagnose, "shiffman": cmd_shiffman, "kdv": cmd_kdv,
            "solve-mse": cmd_solve_mse, "limits": cmd_limits, "selftest": cmd_selftest}


def _usage(msg):
    print(f"minsurf: error: {msg}", file=sys.stderr)
    return 2


def _glue_negative_values(argv):
    """``--window -1,1,-1,1`` -> ``--window=-1,1,-1,1`` so argparse does not
    read a leading minus as a new option."""
    out = []
    for tok in argv:
        if (out and out[-1].startswith("--") and "=" not in out[-1] and len(tok) > 1
                and tok[0] == "-" and (tok[1].isdigit() or tok[1] == ".")):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def run(argv=None) -> int:
    parser = build_parser()
    argv = _glue_negative_values(sys.argv[1:] if argv is None else list(argv))
    args = _apply_config(parser, argv)
    if args.threads:
        for var in _THREAD_VARS:
            os.environ[var] = str(args.threads)
    from .errors import MinsurfError
    from .report import Report
    try:
        code = COMMANDS[args.command](args)
    except MinsurfError as exc:
        err = Report(error=type(exc).__name__, message=str(exc))
        for attr in ("residual", "trace"):
            if getattr(exc, attr, None) is not None:
                err[attr] = getattr(exc, attr)
        sys.stdout.write(err.to_json())
        return 1
    return int(code or 0)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
