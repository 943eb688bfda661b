"""Command-line driver: single runs, mesh-refinement convergence studies,
asymptotic-limit comparisons, and well-balance audits, all emitting CSV.

Exit codes: 0 success, 2 configuration error, 3 nonconvergence,
4 positivity violation."""

import argparse
import configparser
import sys

import numpy as np

from . import cases as case_mod
from .core import (LINEAR, PositivityError, RunReport, surface_level,
                   tableau_implicit_euler, tableau_si_imex_443)
from .limit import LimitState, advance_limit, limit_momentum
from .linsolve import LinearSolveError
from .timestep import (PicardConfig, PicardNonconvergence, advance,
                       compute_dt, step_si_imex_rk)

SCHEMES = ("si-s1", "si-s2", "first-order", "lim")

DEFAULTS = {
    "scheme": "si-s1",
    "n": "100",
    "epsilon": 1.0,
    "cfl": 0.2,
    "delta": 1e-9,
    "xi": 1e-15,
    "picard_max": 100,
    "snapshot_every": 0,
}


class ConfigError(ValueError):
    pass


def _fmt(x):
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(row) + "\n")


def _state_rows(grid, bath, h_int, m_int):
    dim = grid.dim
    B = grid.interior(bath.B)
    rows = []
    if dim == 1:
        x = grid.cell_centers(0)
        for i in range(grid.n[0]):
            rows.append([_fmt(x[i]), _fmt(B[i]), _fmt(h_int[i]),
                         _fmt(m_int[0][i]), _fmt(h_int[i] + B[i])])
        header = ["x", "B", "h", "m1", "H"]
    else:
        x = grid.cell_centers(0)
        y = grid.cell_centers(1)
        for i in range(grid.n[0]):
            for j in range(grid.n[1]):
                rows.append([_fmt(x[i]), _fmt(y[j]), _fmt(B[i, j]),
                             _fmt(h_int[i, j]), _fmt(m_int[0][i, j]),
                             _fmt(m_int[1][i, j]), _fmt(h_int[i, j] + B[i, j])])
        header = ["x", "y", "B", "h", "m1", "m2", "H"]
    return header, rows


def write_state_csv(path, grid, bath, h_int, m_int, failure=None):
    header, rows = _state_rows(grid, bath, h_int, m_int)
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(row) + "\n")
        if failure:
            f.write(f"# failure: {failure}\n")


def write_report_csv(path, rep):
    write_csv(path, ["steps", "picard_total", "picard_max", "steady_hits", "seconds"],
              [[str(rep.steps), str(rep.picard_total), str(rep.picard_max),
                str(rep.steady_hits), _fmt(rep.seconds)]])


def discrete_l1(diff, grid):
    """Volume-weighted discrete L1 norm."""
    return float(np.sum(np.abs(diff))) * grid.cell_volume


def parse_n(text, dim):
    parts = [int(p) for p in str(text).split(",")]
    if len(parts) == 1:
        return tuple(parts * dim)
    if len(parts) != dim:
        raise ConfigError(f"--n expects 1 or {dim} comma-separated values")
    return tuple(parts)


def make_run(case, n, cfl, delta, xi, picard_max):
    grid = case.make_grid(n)
    state = case.make_state(grid)
    bath = case.make_bathymetry(grid)
    source = case.make_source(grid)
    cfg = PicardConfig(delta=delta, max_iters=picard_max)
    return grid, state, bath, source, cfg


def run_case(case, scheme, n, cfl, delta, xi, picard_max, t_end=None, on_step=None):
    """Advance one configuration; returns (grid, bath, h_int, m_int, report)."""
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown scheme {scheme!r}")
    grid, state, bath, source, cfg = make_run(case, n, cfl, delta, xi, picard_max)
    T = case.final_time if t_end is None else t_end
    tab = tableau_si_imex_443()
    if scheme == "lim":
        if case.params.friction == LINEAR or case.source is not None:
            raise ConfigError("the lim scheme applies to Manning-friction, "
                              "source-free cases only")
        lst = LimitState(grid, state.h.copy(), state.t)
        lst, rep = advance_limit(lst, bath, case.params, T, tab, cfg, cfl=cfl)
        h_int = grid.interior(lst.h0)
        m_int = limit_momentum(lst.h0, bath, case.params, grid)
        return grid, bath, h_int, m_int, rep
    closure = "explicit" if scheme == "si-s2" else "implicit"
    if scheme == "first-order":
        tab = tableau_implicit_euler()
    state, rep = advance(state, bath, case.params, T, tab, cfg, closure=closure,
                         cfl=cfl, source=source, xi=xi, on_step=on_step)
    h_int = grid.interior(state.h).copy()
    m_int = np.stack([grid.interior(state.m[c]) for c in range(grid.dim)])
    return grid, bath, h_int, m_int, rep


def restrict_to_coarse(fine, ratio):
    """Restrict fine-grid interior values to the coarse grid whose cells are
    `ratio` (a power of two) times larger.  Cell centers of nested meshes
    never coincide for even ratios, so the coarse center (always the
    midpoint of two fine centers) is filled by the symmetric 4th-order
    interpolation; wraps around (periodic comparisons only)."""
    out = np.asarray(fine, dtype=float)
    for ax in range(out.ndim):
        nf = out.shape[ax]
        nc = nf // ratio
        i = np.arange(nc)
        j0 = ratio * i + ratio // 2 - 1
        idx = np.stack([(j0 - 1) % nf, j0 % nf, (j0 + 1) % nf, (j0 + 2) % nf])
        slabs = [np.take(out, idx[k], axis=ax) for k in range(4)]
        out = (9.0 * (slabs[1] + slabs[2]) - (slabs[0] + slabs[3])) / 16.0
    return out


def _resolve(args, key, cast=None):
    val = getattr(args, key, None)
    if val is None:
        val = args._config.get(key, DEFAULTS.get(key))
    if val is None:
        raise ConfigError(f"missing required option --{key.replace('_', '-')}")
    return cast(val) if cast else val


def _load_config(path):
    if not path:
        return {}
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    out = {}
    for section in cp.sections() or []:
        for k, v in cp.items(section):
            out[k.replace("-", "_")] = v
    for k, v in cp.defaults().items():
        out[k.replace("-", "_")] = v
    return out


def _common(sub):
    sub.add_argument("--config", help="INI file with option defaults")
    sub.add_argument("--case", help="benchmark case id")
    sub.add_argument("--scheme", choices=SCHEMES)
    sub.add_argument("--epsilon", type=float)
    sub.add_argument("--theta", type=float, help="relaxation scaling for ex53")
    sub.add_argument("--cfl", type=float)
    sub.add_argument("--tmax", type=float, help="override the case final time")
    sub.add_argument("--delta", type=float, help="Picard/steady tolerance")
    sub.add_argument("--xi", type=float, help="equilibrium cut-off threshold")
    sub.add_argument("--picard-max", dest="picard_max", type=int)


def _prep(args):
    args._config = _load_config(getattr(args, "config", None))
    case_id = _resolve(args, "case")
    theta = getattr(args, "theta", None)
    if theta is None:
        theta = args._config.get("theta")
        theta = float(theta) if theta is not None else None
    tmax = getattr(args, "tmax", None)
    if tmax is None:
        tmax = args._config.get("tmax")
        tmax = float(tmax) if tmax is not None else None
    case = case_mod.build(case_id,
                          epsilon=_resolve(args, "epsilon", float),
                          T=tmax, theta=theta)
    opts = dict(
        scheme=_resolve(args, "scheme"),
        cfl=_resolve(args, "cfl", float),
        delta=_resolve(args, "delta", float),
        xi=_resolve(args, "xi", float),
        picard_max=_resolve(args, "picard_max", int),
    )
    return case, opts


def cmd_run(args):
    case, o = _prep(args)
    n = parse_n(_resolve(args, "n"), case.dim)
    out = args.out or f"{case.id}-{o['scheme']}-state.csv"
    report_out = args.report_out or f"{case.id}-{o['scheme']}-report.csv"
    snap = int(getattr(args, "snapshot_every", None)
               or args._config.get("snapshot_every", 0) or 0)

    on_step = None
    if snap > 0 and o["scheme"] != "lim":
        snap_bath = {}

        def on_step(state, total):
            if total.steps % snap == 0:
                g = state.grid
                if "bath" not in snap_bath:
                    snap_bath["bath"] = case.make_bathymetry(g)
                h = g.interior(state.h)
                m = np.stack([g.interior(state.m[c]) for c in range(g.dim)])
                write_state_csv(f"{out}.t{state.t:.6f}.csv", g,
                                snap_bath["bath"], h, m)

    try:
        grid, bath, h, m, rep = run_case(case, o["scheme"], n, o["cfl"],
                                         o["delta"], o["xi"], o["picard_max"],
                                         on_step=on_step)
    except (PicardNonconvergence, LinearSolveError, PositivityError) as exc:
        g = case.make_grid(n)
        b = case.make_bathymetry(g)
        st = case.make_state(g)
        write_state_csv(out, g, b, g.interior(st.h),
                        np.stack([g.interior(st.m[c]) for c in range(g.dim)]),
                        failure=str(exc))
        write_report_csv(report_out, RunReport())
        raise
    write_state_csv(out, grid, bath, h, m)
    write_report_csv(report_out, rep)
    print(f"wrote {out} and {report_out} "
          f"(steps={rep.steps}, picard={rep.picard_total}, steady={rep.steady_hits})")
    return 0


def convergence_table(case, scheme, n_list, reference, cfl, delta, xi, picard_max):
    """Errors/orders per N; reference 'exact' (requires an exact solution)
    or 'finest' (the last N acts as reference and is not reported)."""
    n_list = sorted(int(n) for n in n_list)
    if reference == "exact" and case.exact is None:
        raise ConfigError(f"case {case.id} has no exact solution")
    if reference == "finest":
        for n in n_list[:-1]:
            ratio = n_list[-1] / n
            if 2 ** int(round(np.log2(ratio))) != ratio:
                raise ConfigError("finest-reference comparisons need "
                                  "power-of-two nested meshes")
    results = []
    for n in n_list:
        grid, bath, h, m, rep = run_case(case, scheme, n, cfl, delta, xi, picard_max)
        results.append((n, grid, h, m))
    rows = []
    if reference == "exact":
        compare = results
    else:
        compare = results[:-1]
        n_ref, grid_ref, h_ref, m_ref = results[-1]
    prev = None
    for n, grid, h, m in compare:
        if reference == "exact":
            xs = grid.meshgrid()
            h_x, m_x = case.exact(xs[0], case.final_time)
            errs = [discrete_l1(h - h_x, grid), discrete_l1(m[0] - m_x, grid)]
            if grid.dim == 2:
                errs.append(discrete_l1(m[1] - m_x, grid))
        else:
            ratio = n_ref // n
            errs = [discrete_l1(h - restrict_to_coarse(h_ref, ratio), grid)]
            for c in range(grid.dim):
                errs.append(discrete_l1(m[c] - restrict_to_coarse(m_ref[c], ratio), grid))
        orders = [float("nan")] * len(errs)
        if prev is not None:
            ratio_n = n / prev[0]
            orders = [np.log(pe / e) / np.log(ratio_n) if e > 0 and pe > 0
                      else float("nan")
                      for pe, e in zip(prev[1], errs)]
        rows.append((n, errs, orders))
        prev = (n, errs)
    return rows


def cmd_convergence(args):
    case, o = _prep(args)
    n_list = [int(p) for p in _resolve(args, "n_list").split(",")]
    reference = _resolve(args, "reference")
    rows = convergence_table(case, o["scheme"], n_list, reference, o["cfl"],
                             o["delta"], o["xi"], o["picard_max"])
    dim = case.dim
    header = ["N", "err_h", "ord_h", "err_m1", "ord_m1"]
    if dim == 2:
        header += ["err_m2", "ord_m2"]
    out_rows = []
    for n, errs, orders in rows:
        row = [str(n)]
        for e, o_ in zip(errs, orders):
            row += [_fmt(e), _fmt(o_) if np.isfinite(o_) else "nan"]
        out_rows.append(row)
    out = args.out or f"{case.id}-convergence.csv"
    write_csv(out, header, out_rows)
    print(f"wrote {out}")
    for r in out_rows:
        print("  " + ",".join(r))
    return 0


def cmd_ap_compare(args):
    case, o = _prep(args)
    if case.params.friction == LINEAR or case.source is not None:
        raise ConfigError("ap-compare needs a Manning-friction, source-free case")
    n = parse_n(_resolve(args, "n"), case.dim)
    eps_list = [float(p) for p in _resolve(args, "eps_list").split(",")]
    grid, bath, h_lim, _m, rep_lim = run_case(case, "lim", n, o["cfl"],
                                              o["delta"], o["xi"], o["picard_max"])
    rows = []
    for eps in eps_list:
        c = case_mod.build(case.id, epsilon=eps, T=case.final_time)
        _g, _b, h, _m2, _rep = run_case(c, o["scheme"], n, o["cfl"], o["delta"],
                                        o["xi"], o["picard_max"])
        rows.append([_fmt(eps), _fmt(discrete_l1(h - h_lim, grid))])
    out = args.out or f"{case.id}-ap-compare.csv"
    write_csv(out, ["epsilon", "l1_distance_h"], rows)
    print(f"wrote {out}")
    for r in rows:
        print("  " + ",".join(r))
    return 0


def cmd_wellbalance(args):
    case, o = _prep(args)
    n = parse_n(_resolve(args, "n"), case.dim)
    eps_list = [float(p) for p in _resolve(args, "eps_list").split(",")]
    steps = int(_resolve(args, "steps"))
    rows = []
    for eps in eps_list:
        c = case_mod.build(case.id, epsilon=eps)
        for scheme in ("si-s1", "si-s2") if o["scheme"] == "si-s1" else (o["scheme"],):
            grid, state, bath, source, cfg = make_run(c, n, o["cfl"], o["delta"],
                                                      o["xi"], o["picard_max"])
            H0 = surface_level(state, bath).copy()
            tab = tableau_si_imex_443()
            closure = "explicit" if scheme == "si-s2" else "implicit"
            for _ in range(steps):
                dt = compute_dt(state, c.params, o["cfl"], grid.dx_min)
                state, _rep = step_si_imex_rk(state, bath, c.params, dt, tab,
                                              cfg, closure=closure, xi=o["xi"])
            dH = float(np.max(np.abs(grid.interior(surface_level(state, bath) - H0))))
            m_int = np.stack([grid.interior(state.m[comp])
                              for comp in range(grid.dim)])
            rows.append([_fmt(eps), scheme, _fmt(dH), _fmt(float(np.max(np.abs(m_int))))])
    out = args.out or f"{case.id}-wellbalance.csv"
    write_csv(out, ["epsilon", "scheme", "max_dH", "max_m"], rows)
    print(f"wrote {out}")
    for r in rows:
        print("  " + ",".join(r))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="swimex",
                                description="semi-implicit shallow water solver")
    subs = p.add_subparsers(dest="command", required=True)

    r = subs.add_parser("run", help="advance one configuration and dump the state")
    _common(r)
    r.add_argument("--n", help="cells per dimension (or comma list)")
    r.add_argument("--out")
    r.add_argument("--report-out", dest="report_out")
    r.add_argument("--snapshot-every", dest="snapshot_every", type=int)
    r.set_defaults(func=cmd_run)

    c = subs.add_parser("convergence", help="mesh-refinement error table")
    _common(c)
    c.add_argument("--n-list", dest="n_list", help="comma-separated ascending N")
    c.add_argument("--reference", choices=("exact", "finest"))
    c.add_argument("--out")
    c.set_defaults(func=cmd_convergence)

    a = subs.add_parser("ap-compare", help="distance to the limit solver per epsilon")
    _common(a)
    a.add_argument("--n")
    a.add_argument("--eps-list", dest="eps_list")
    a.add_argument("--out")
    a.set_defaults(func=cmd_ap_compare)

    w = subs.add_parser("wellbalance", help="still-water deviation audit")
    _common(w)
    w.add_argument("--n")
    w.add_argument("--eps-list", dest="eps_list")
    w.add_argument("--steps")
    w.add_argument("--out")
    w.set_defaults(func=cmd_wellbalance)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (PicardNonconvergence, LinearSolveError) as exc:
        print(f"nonconvergence: {exc}", file=sys.stderr)
        return 3
    except PositivityError as exc:
        print(f"positivity violation: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
