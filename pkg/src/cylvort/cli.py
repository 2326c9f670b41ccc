"""``cylvort`` command line."""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import io as cio
from .cylinder import (
    Configuration, CylPoint, Cylinder, nfold_copy, project, quotient_distance, shape_distance,
)
from .dynamics import IntegratorConfig, integrate
from .equilibria import CyclicOrder, complete3, ring_multistart, stagnation_points
from .reduced import (
    Split3, Split4, classify_regime, critical_points_upper_trunk, embed3, embed4, eta_re,
    eta_re_perturbative, level_grid, reduced_h3, reduced_h4, rho_critical, rho_perturbative,
    split_strengths,
)
from .rpo import cotan_sum, detect_relative_period, verify_relative_equilibrium, vortex_street_family


class CliError(Exception):
    """Validation failure reported as a one-line diagnostic."""


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _point(text: str) -> CylPoint:
    vals = _floats(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}")
    return CylPoint(*vals)


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        vals = _floats(text)
        if len(vals) != 2:
            raise argparse.ArgumentTypeError(f"expected a complex number or 're,im', got {text!r}") from None
        return complex(*vals)


def _icfg(args) -> IntegratorConfig:
    return IntegratorConfig(scheme=args.scheme, rtol=args.rtol, atol=args.atol, step=args.step)


def _print_config(cfg: Configuration, out) -> None:
    print("x y gamma", file=out)
    for x, y, g in zip(cfg.x, cfg.y, cfg.gamma):
        print(f"{cio.FMT % x} {cio.FMT % y} {cio.FMT % g}", file=out)


# -------------------------------------------------------------- commands


def cmd_simulate(args, outputs: list[Path], out) -> int:
    run = cio.read_config(args.config)
    t_final = args.t_final if args.t_final is not None else run.t_final
    if t_final is None:
        raise CliError("no horizon: give --t-final or t_final in the config")
    samples = args.samples or run.samples or 201
    target = args.output or run.output
    if target is None:
        raise CliError("no output path: give --output or output in the config")
    icfg = run.integrator if args.scheme is None else _icfg(args)
    traj = integrate(run.configuration(), t_final, icfg, t_eval=np.linspace(0.0, t_final, samples))
    target = Path(target)
    outputs += [target, target.with_name(target.stem + ".unwrapped" + target.suffix)]
    cio.write_trajectory_csv(traj, target)
    dh = float(np.max(np.abs(traj.energy - traj.energy[0])))
    dp = float(np.max(np.abs(traj.momentum - traj.momentum[0])))
    print(f"status {traj.status}; samples {len(traj)}; max |dH| {dh:.3e}; max |dP| {dp:.3e}", file=out)
    if traj.collision is not None:
        c = traj.collision
        print(f"collision of vortices {c.pair[0] + 1} and {c.pair[1] + 1} at t={c.t:.6g}", file=out)
    print(f"wrote {outputs[0]}", file=out)
    return 0


def cmd_equilibrium(args, outputs, out) -> int:
    gam = args.gamma
    if len(gam) < 2:
        raise CliError("need at least two vorticities")
    if not (all(g > 0 for g in gam) or all(g < 0 for g in gam)):
        raise CliError("ring equilibria require vorticities of one sign")
    order = CyclicOrder(tuple(int(k) - 1 for k in args.order)) if args.order else None
    cyl = Cylinder(args.radius)
    results = ring_multistart(gam, order, cyl, args.starts, np.random.default_rng(args.seed))
    best = min(results, key=lambda r: r.residual)
    spread = max(shape_distance(best.configuration, r.configuration) for r in results)
    text = cio.format_equilibrium_report(best) + f"multistart spread {spread:.3e}\n"
    out.write(text)
    if args.output:
        Path(args.output).write_text(text)
        outputs.append(Path(args.output))
    if args.csv:
        cio.write_equilibrium_csv(best, args.csv)
        outputs.append(Path(args.csv))
    return 0 if best.certified else 1


def cmd_complete3(args, outputs, out) -> int:
    cyl = Cylinder(args.radius)
    s1, s2 = stagnation_points(args.z1, args.z2, args.g1, args.g2, cyl)
    print(f"stagnation 1: {cio.FMT % s1.x} {cio.FMT % s1.y}", file=out)
    print(f"stagnation 2: {cio.FMT % s2.x} {cio.FMT % s2.y}", file=out)
    cfg = complete3(args.z1, args.z2, args.g1, args.g2, cyl, args.which - 1)
    print(f"completing vorticity {cio.FMT % cfg.gamma[2]}", file=out)
    _print_config(cfg, out)
    if args.output:
        cio.write_config(cio.config_from(cfg), args.output)
        outputs.append(Path(args.output))
    return 0


def _emit_embedding(cfg: Configuration, h: float, args, outputs, out) -> None:
    print(f"H {cio.FMT % h}", file=out)
    _print_config(cfg, out)
    if args.output:
        cio.write_config(cio.config_from(cfg), args.output)
        outputs.append(Path(args.output))


def cmd_reduce3(args, outputs, out) -> int:
    s = Split3(args.c, args.gamma, args.gamma_prime, args.zeta)
    _emit_embedding(embed3(s), reduced_h3(s), args, outputs, out)
    return 0


def cmd_reduce4(args, outputs, out) -> int:
    s = Split4(args.b, args.gamma, args.gamma_prime, args.zeta)
    h = reduced_h4(s)
    print(f"regime {classify_regime(s)}", file=out)
    _emit_embedding(embed4(s), h, args, outputs, out)
    return 0


def cmd_contour(args, outputs, out) -> int:
    g, gp = split_strengths(args.ratio)
    if args.kind == "split4":
        params = {"b": args.b, "gamma": g, "gamma_p": gp}
        window = args.window or [-math.pi / 2, math.pi / 2, -3.0, 3.0]
    else:
        params = {"c": args.c, "gamma": g, "gamma_p": gp}
        window = args.window or [-math.pi, math.pi, -3.0, 3.0]
    if len(window) != 4:
        raise CliError("--window needs four numbers xi0,xi1,eta0,eta1")
    grid = level_grid(args.kind, params, tuple(window), (args.nx, args.ny))
    outputs += [Path(args.output), Path(args.output + ".header")]
    cio.write_level_grid(grid, args.output)
    print(f"wrote {args.output} ({args.ny} x {args.nx}, {int(grid.mask.sum())} masked cells)", file=out)
    return 0


def cmd_separatrix(args, outputs, out) -> int:
    r = args.radius
    res = rho_critical(args.b, args.gamma, args.gamma_prime, radius=r)
    print(f"rho {cio.FMT % res.rho}", file=out)
    print(f"eta_re {cio.FMT % res.zeta_re.imag}", file=out)
    print(f"saddle H {cio.FMT % res.h_saddle}", file=out)
    if args.gamma == args.gamma_prime:
        wide = rho_critical(args.b, args.gamma, args.gamma_prime, radius=1e3).rho
        print(f"plane limit: rho at r=1e3 {cio.FMT % wide}; b/sqrt2 {cio.FMT % (args.b / math.sqrt(2.0))}", file=out)
    pts = critical_points_upper_trunk(args.b / r, args.gamma, args.gamma_prime)
    for p in pts:
        print(f"critical point in C+: xi={p.zeta.real:.6g} eta={p.zeta.imag * r:.10g} {p.kind}", file=out)
    for eps in args.epsilon or []:
        g, gp = 1.0 + eps, 1.0
        er = eta_re(args.b / r, g, gp)
        rc = rho_critical(args.b / r, g, gp).rho
        print(
            f"eps {eps:g}: eta_re {er:.12g} expansion {eta_re_perturbative(args.b / r, eps):.12g}; "
            f"rho {rc:.12g} expansion {rho_perturbative(args.b / r, eps):.12g}",
            file=out,
        )
    return 0


def cmd_street(args, outputs, out) -> int:
    cyl = Cylinder(args.radius)
    cfg = vortex_street_family(args.n, args.a, args.b, args.gamma, cyl)
    ok, v = verify_relative_equilibrium(cfg, args.tol)
    print(f"relative equilibrium {'yes' if ok else 'no'}; velocity {v.vx:.12g} {v.vy:.12g}", file=out)
    _print_config(cfg, out)
    if args.output:
        cio.write_config(cio.config_from(cfg), args.output)
        outputs.append(Path(args.output))
    return 0 if ok else 1


def cmd_rpo(args, outputs, out) -> int:
    run = cio.read_config(args.config)
    traj = cio.read_trajectory_csv(args.trajectory, run.gamma, run.radius)
    traj.meta["icfg"] = run.integrator
    rep = detect_relative_period(traj, args.tol)
    if rep is None:
        print("no relative period within the horizon", file=out)
        return 1
    kind = "relative equilibrium (continuous closure)" if rep.continuous else "relative periodic orbit"
    print(f"{kind}: T {rep.period:.12g}; drift {rep.drift.real:.12g} {rep.drift.imag:.12g}; "
          f"residual {rep.residual:.3e}", file=out)
    if args.output:
        cio.write_rpo_csv([rep], args.output)
        outputs.append(Path(args.output))
    return 0


def selftest_checks(seed: int = 0) -> list[tuple[str, bool, str]]:
    rng = np.random.default_rng(seed)
    rows = []
    z = rng.uniform(-2, 2, 100) + 1j * rng.uniform(-2, 2, 100)
    err = max(float(np.max(np.abs(cotan_sum(z, n) - np.cos(z) / np.sin(z)))) for n in (2, 3, 5))
    rows.append(("cotan identity", err < 1e-12, f"max err {err:.2e}"))

    cyl = Cylinder(1.0)
    dh = dp = 0.0
    for _ in range(5):
        n = int(rng.integers(2, 6))
        cfg = Configuration(cyl, rng.uniform(0, 2 * math.pi, n), rng.uniform(-1, 1, n),
                            rng.choice([-1, 1], n) * rng.uniform(0.5, 1.5, n))
        tr = integrate(cfg, 5.0, t_eval=np.linspace(0, 5, 11))
        dh = max(dh, float(np.max(np.abs(tr.energy - tr.energy[0]))))
        dp = max(dp, float(np.max(np.abs(tr.momentum - tr.momentum[0]))))
    rows.append(("energy conservation", dh < 1e-7, f"max |dH| {dh:.2e}"))
    rows.append(("momentum conservation", dp < 1e-7, f"max |dP| {dp:.2e}"))

    base = Configuration(cyl, [0.3, 2.0, 4.1], [0.4, -0.3, 0.1], [1.0, -0.7, 0.5])
    tb = integrate(base, 2.0, t_eval=[2.0])
    tc = integrate(nfold_copy(base, 2), 2.0, t_eval=[2.0])
    lifted = project(tc.config(-1), cyl)
    n = base.n
    dev = max(
        quotient_distance(CylPoint(tb.x[-1, j], tb.y[-1, j]), CylPoint(lifted.x[k * n + j], lifted.y[k * n + j]), cyl)
        for k in range(2) for j in range(n)
    )
    rows.append(("covering equivalence", dev < 1e-6, f"max deviation {dev:.2e}"))
    return rows


def cmd_selftest(args, outputs, out) -> int:
    rows = selftest_checks(args.seed)
    width = max(len(r[0]) for r in rows)
    for name, ok, detail in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name.ljust(width)}  {detail}", file=out)
    return 0 if all(r[1] for r in rows) else 1


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cylvort", description="Point vortices on a cylinder.")
    sub = p.add_subparsers(dest="command", required=True)

    def integ(sp, default_scheme):
        sp.add_argument("--scheme", choices=["rk45", "dop853", "rk4"], default=default_scheme)
        sp.add_argument("--rtol", type=float, default=1e-10)
        sp.add_argument("--atol", type=float, default=1e-12)
        sp.add_argument("--step", type=float, default=1e-2, help="fixed step for rk4")

    sp = sub.add_parser("simulate", help="integrate a configuration and write a trajectory CSV")
    sp.add_argument("config")
    sp.add_argument("--t-final", type=float)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--output")
    integ(sp, None)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("equilibrium", help="ring equilibrium of same-sign vortices with a certificate")
    sp.add_argument("--gamma", type=_floats, required=True, help="vorticities, comma separated")
    sp.add_argument("--order", type=_floats, help="cyclic order as 1-based labels")
    sp.add_argument("--radius", type=float, default=1.0)
    sp.add_argument("--starts", type=int, default=8)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", help="text report path")
    sp.add_argument("--csv", help="x,y,gamma CSV path")
    sp.set_defaults(func=cmd_equilibrium)

    sp = sub.add_parser("complete3", help="stagnation points and completing third vortex")
    sp.add_argument("--z1", type=_point, required=True)
    sp.add_argument("--z2", type=_point, required=True)
    sp.add_argument("--g1", type=float, required=True)
    sp.add_argument("--g2", type=float, required=True)
    sp.add_argument("--which", type=int, choices=[1, 2], default=1)
    sp.add_argument("--radius", type=float, default=1.0)
    sp.add_argument("--output", help="write the completed configuration as a config file")
    sp.set_defaults(func=cmd_complete3)

    sp = sub.add_parser("reduce3", help="reduced energy and embedding of a three-vortex split")
    sp.add_argument("--c", type=_complex, required=True)
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--gamma-prime", type=float, required=True)
    sp.add_argument("--zeta", type=_complex, required=True)
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_reduce3)

    sp = sub.add_parser("reduce4", help="reduced energy, regime and embedding of a four-vortex split")
    sp.add_argument("--b", type=float, required=True)
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--gamma-prime", type=float, required=True)
    sp.add_argument("--zeta", type=_complex, required=True)
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_reduce4)

    sp = sub.add_parser("contour", help="export a reduced-energy level grid")
    sp.add_argument("--kind", choices=["split3", "split4"], default="split4")
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--c", type=_complex, default=1j)
    sp.add_argument("--ratio", type=float, default=1.0, help="gamma / gamma'")
    sp.add_argument("--window", type=_floats)
    sp.add_argument("--nx", type=int, default=201)
    sp.add_argument("--ny", type=int, default=201)
    sp.add_argument("--output", default="grid.txt")
    sp.set_defaults(func=cmd_contour)

    sp = sub.add_parser("separatrix", help="leapfrog threshold, saddle height and critical points")
    sp.add_argument("--b", type=float, required=True)
    sp.add_argument("--gamma", type=float, default=1.0)
    sp.add_argument("--gamma-prime", type=float, default=1.0)
    sp.add_argument("--radius", type=float, default=1.0)
    sp.add_argument("--epsilon", type=_floats, help="compare with the small-asymmetry expansion")
    sp.set_defaults(func=cmd_separatrix)

    sp = sub.add_parser("street", help="vortex street family on the cylinder")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--b", type=float, required=True)
    sp.add_argument("--gamma", type=float, default=1.0)
    sp.add_argument("--radius", type=float, default=1.0)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_street)

    sp = sub.add_parser("rpo", help="detect a relative period in a trajectory CSV")
    sp.add_argument("trajectory")
    sp.add_argument("--config", required=True, help="config the trajectory was produced from")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--output", help="report CSV")
    sp.set_defaults(func=cmd_rpo)

    sp = sub.add_parser("selftest", help="identity, conservation and covering checks")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    outputs: list[Path] = []
    func: Callable = args.func
    try:
        return func(args, outputs, out)
    except (CliError, ValueError, ArithmeticError, RuntimeError, OSError) as exc:
        for path in outputs:
            path.unlink(missing_ok=True)
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"cylvort {args.command}: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
