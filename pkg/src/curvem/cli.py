"""Command-line driver.

Exit status: 0 on success, 1 when a tolerance check fails, 2 on bad input.
"""

import argparse
import json
import sys


from . import __version__
from .assembly import OWNER_SMALLER_ID, POLICIES, export_coo
from .element import TGP, QuadratureConfig, element_type
from .errors import ConfigError, CurvemError
from .geometry.io import read_mesh, write_mesh
from .geometry.mesh import mesh_diagnostics
from .meshgen import GENERATORS, generate, replace_with_chords, reparametrize
from .problems import builtin, patch
from .solve import (convergence_study, mesh_size, rows_to_csv, solve_problem, write_field)

CONFIG_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def load_config(path):
    """Read a JSON run configuration; its keys are the long option names with underscores."""
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"{path}: no such file") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    if cfg.get("version") != CONFIG_VERSION:
        raise ConfigError(f"{path}: unsupported config version {cfg.get('version')!r}")
    return cfg


def _merge(args, defaults):
    """Flags override the config file, which overrides built-in defaults."""
    cfg = load_config(args.config)
    for key, value in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, cfg.get(key, value))
    for k in _as_list(getattr(args, "k", None) or []):
        if k not in (1, 2, 3):
            raise ConfigError(f"k must be 1, 2 or 3, got {k}")
    return args


def _as_list(v):
    return v if isinstance(v, (list, tuple)) else [v]


def _quad(args):
    return QuadratureConfig(args.curved_points, args.straight_points)


def _transform(mesh, args):
    if args.chords:
        mesh = replace_with_chords(mesh, args.chords)
    if args.reparametrize:
        mesh = reparametrize(mesh)
    return mesh


def _generator_params(args):
    params = {"n": args.n}
    if args.generator == "square-circle-interface":
        params["r"] = args.radius
    if args.generator == "disk-boundary" and args.boundary:
        params["boundary"] = args.boundary
    return params


# -- commands -------------------------------------------------------------------

def cmd_patch_test(args):
    _merge(args, {"k": [1, 2, 3], "n": 4, "radius": 0.3, "rho": 1.0, "tol": 1e-8,
                  "policy": OWNER_SMALLER_ID, "solver": "direct", "corrupt_tgp": 0.0})
    worst = 0.0
    for k in _as_list(args.k):
        prob = patch(k, rho=args.rho, r=args.radius)
        mesh = read_mesh(args.mesh) if args.mesh else prob.mesh(args.n)
        mesh = _transform(mesh, args)
        sol = solve_problem(mesh, prob.as_problem(), k, _quad(args), args.policy, args.solver)
        g = sol.g.copy()
        if args.corrupt_tgp:
            h = mesh_size(mesh)
            for s, i in sol.system.dofs.index.items():
                if s.kind == TGP:
                    g[i] += args.corrupt_tgp * h
            sol.report.u = g
        err = sol.errors(prob.u, prob.grad)
        worst = max(worst, err.e_H1)
        status = "pass" if err.e_H1 <= args.tol else "FAIL"
        print(f"patch-test k={k} elements={len(mesh.elements)} ndof={sol.report.n_free} "
              f"e_H1={err.e_H1:.3e} e_L2={err.e_L2:.3e} residual={sol.report.residual:.1e} {status}")
    return EXIT_OK if worst <= args.tol else EXIT_FAIL


def cmd_convergence(args):
    _merge(args, {"problem": "interface-jump", "k": [1, 2, 3], "levels": [4, 8, 16, 32],
                  "policy": OWNER_SMALLER_ID, "solver": "direct", "min_rate_slack": None})
    prob = builtin(args.problem)
    rows = convergence_study(prob, list(args.levels), list(_as_list(args.k)), _quad(args),
                             args.policy, args.solver, lambda m: _transform(m, args))
    text = rows_to_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.min_rate_slack is None:
        return EXIT_OK
    ok = True
    for k in _as_list(args.k):
        last = [r for r in rows if r["k"] == k][-1]
        if not last["rate_H1"] >= k - args.min_rate_slack:
            print(f"k={k}: H1 rate {last['rate_H1']:.3f} below {k - args.min_rate_slack}",
                  file=sys.stderr)
            ok = False
    return EXIT_OK if ok else EXIT_FAIL


def cmd_solve(args):
    _merge(args, {"problem": "interface-jump", "k": [2], "n": 8, "policy": OWNER_SMALLER_ID,
                  "solver": "direct"})
    k = _as_list(args.k)[0]
    prob = builtin(args.problem)
    mesh = read_mesh(args.mesh) if args.mesh else prob.mesh(args.n)
    mesh = _transform(mesh, args)
    sol = solve_problem(mesh, prob.as_problem(), k, _quad(args), args.policy, args.solver)
    summary = {"problem": prob.name, "k": k, "elements": len(mesh.elements),
               "ndof": sol.report.n_free, "residual": sol.report.residual,
               "solver": sol.report.method, **sol.report.stats}
    if prob.u is not None:
        err = sol.errors(prob.u, prob.grad)
        summary.update(e_H1=err.e_H1, e_L2=err.e_L2)
    if args.out:
        write_field(sol, args.out)
    if args.matrix:
        export_coo(sol.system, args.matrix)
    print(json.dumps(summary, indent=1))
    return EXIT_OK


def _load_mesh(args):
    if args.mesh:
        return read_mesh(args.mesh)
    if not args.generator:
        raise ConfigError("give --mesh FILE or --generator NAME")
    return generate(args.generator, **_generator_params(args))


def cmd_mesh_info(args):
    _merge(args, {"n": 4, "radius": 0.3, "generator": None, "boundary": None,
                  "theta": 0.1})
    mesh = _transform(_load_mesh(args), args)
    diag = mesh_diagnostics(mesh)
    types = [0, 0, 0, 0]
    for eid in range(len(mesh.elements)):
        types[element_type(mesh, eid)[0]] += 1
    info = {"vertices": len(mesh.vertices), "edges": len(mesh.edges),
            "elements": len(mesh.elements),
            "curved_edges": sum(e.is_curved for e in mesh.edges),
            "element_types": {str(i): c for i, c in enumerate(types)},
            "h_max": diag["h_max"], "theta_min": diag["theta_min"],
            "theta1_min": diag["theta1_min"]}
    print(json.dumps(info, indent=1))
    for key in ("theta_min", "theta1_min"):
        if diag[key] < args.theta:
            print(f"warning: {key} = {diag[key]:.3g} below {args.theta}", file=sys.stderr)
    return EXIT_OK


def cmd_gen_mesh(args):
    _merge(args, {"n": 4, "radius": 0.3, "boundary": None})
    if not args.generator:
        raise ConfigError("gen-mesh needs a generator name")
    mesh = _transform(generate(args.generator, **_generator_params(args)), args)
    write_mesh(mesh, args.output)
    print(f"wrote {args.output}: {len(mesh.elements)} elements, {len(mesh.edges)} edges")
    return EXIT_OK


# -- parser ---------------------------------------------------------------------

def _common(p, mesh=True):
    p.add_argument("--config", help="JSON run configuration (flags take precedence)")
    p.add_argument("--curved-points", type=int, dest="curved_points")
    p.add_argument("--straight-points", type=int, dest="straight_points")
    p.add_argument("--chords", choices=("curved", "straight"),
                   help="replace curved geometry by chords with this declaration")
    p.add_argument("--reparametrize", action="store_true", default=None,
                   help="use t = t0 + (t1 - t0) s^3 on every curved edge")
    if mesh:
        p.add_argument("--mesh", help="mesh file in curvem-mesh/1 format")
        p.add_argument("--n", type=int, help="refinement parameter of the built-in mesh")


def _solver_opts(p):
    p.add_argument("--policy", choices=POLICIES, help="stabilization ownership on interfaces")
    p.add_argument("--solver", choices=("direct", "cg"))


def build_parser():
    ap = argparse.ArgumentParser(prog="curvem", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"curvem {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("patch-test", help="check exact reproduction of polynomial solutions")
    _common(p)
    _solver_opts(p)
    p.add_argument("--k", type=int, nargs="+")
    p.add_argument("--radius", type=float)
    p.add_argument("--rho", type=float, help="Robin coefficient on the right and top sides")
    p.add_argument("--tol", type=float)
    p.add_argument("--corrupt-tgp", type=float, dest="corrupt_tgp",
                   help="add this multiple of h to every trace generator value (negative control)")
    p.set_defaults(func=cmd_patch_test)

    p = sub.add_parser("convergence", help="refinement study with a CSV rate table")
    _common(p, mesh=False)
    _solver_opts(p)
    p.add_argument("--problem")
    p.add_argument("--k", type=int, nargs="+")
    p.add_argument("--levels", type=int, nargs="+")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--min-rate-slack", type=float, dest="min_rate_slack",
                   help="fail unless the last H1 rate is at least k minus this")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("solve", help="solve one problem and dump the field")
    _common(p)
    _solver_opts(p)
    p.add_argument("--problem")
    p.add_argument("--k", type=int, nargs=1)
    p.add_argument("--out", help="curvem-field/1 output path")
    p.add_argument("--matrix", help="write the global matrix as 'i j value' lines")
    p.set_defaults(func=cmd_solve)

    for name, fn, hlp in (("mesh-info", cmd_mesh_info, "print shape diagnostics"),
                          ("gen-mesh", cmd_gen_mesh, "write a built-in mesh to a file")):
        p = sub.add_parser(name, help=hlp)
        _common(p, mesh=(name == "mesh-info"))
        if name == "gen-mesh":
            p.add_argument("generator", nargs="?", choices=sorted(GENERATORS))
            p.add_argument("--n", type=int)
            p.add_argument("-o", "--output", required=True)
        else:
            p.add_argument("--generator", choices=sorted(GENERATORS))
            p.add_argument("--theta", type=float, help="warning threshold for the ratios")
        p.add_argument("--radius", type=float)
        p.add_argument("--boundary", choices=("dirichlet", "robin", "mixed"))
        p.set_defaults(func=fn)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        for key in ("curved_points", "straight_points", "chords", "reparametrize"):
            if getattr(args, key) is None:
                setattr(args, key, cfg.get(key))
        return args.func(args)
    except (CurvemError, OSError) as exc:
        print(f"curvem: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
