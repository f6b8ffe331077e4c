"""Command line entry point: ``kdvdg {convergence,evolve,verify}``."""

from __future__ import annotations

import argparse
import logging
import sys

from kdvdg import harness


def _cells(text: str) -> list[int]:
    try:
        return [int(c) for c in text.split(",") if c]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad cell list {text!r}") from exc


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=["A", "U", "C"], default="A")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--cfl", type=float, default=None,
                   help="dt = CFL * h_min^3 (default depends on the degree)")
    p.add_argument("--mesh", choices=["uniform", "random"])
    p.add_argument("--perturb", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init", choices=list(harness.INIT_KINDS), default="auto",
                   help="initial projection; auto = coupled for method A, l2 otherwise")
    p.add_argument("--plot", default=None, help="write a figure to this file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kdvdg", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    conv = sub.add_parser("convergence", help="L2 errors and orders at T = 10 dt_0")
    conv.add_argument("--example", choices=["4.1", "4.2", "4.3"], default="4.1")
    conv.add_argument("--cells", type=_cells, default=[10, 20, 40, 80])
    conv.add_argument("--shared-mesh", action="store_true",
                      help="use --seed for every level instead of seed + N")
    conv.add_argument("--out", default=None)
    _add_common(conv)
    conv.set_defaults(mesh="random")

    evo = sub.add_parser("evolve", help="long-time run with energy history and final snapshot")
    evo.add_argument("--example", choices=["4.1", "4.2", "4.3", "4.4"], default="4.4")
    evo.add_argument("--cells", type=int, default=20)
    evo.add_argument("--T", dest="t_final", type=float, default=None)
    evo.add_argument("--energy-out", default=None)
    evo.add_argument("--snapshot-out", default=None)
    evo.add_argument("--snapshot-every", type=int, default=100,
                     help="record the energy every M steps")
    _add_common(evo)
    evo.set_defaults(mesh="uniform")

    ver = sub.add_parser("verify", help="run the invariant battery")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--states", type=int, default=100)
    return parser


def _convergence(args) -> int:
    report = harness.run_convergence(
        args.example, args.method, args.degree, args.cells, cfl=args.cfl,
        mesh_kind=args.mesh, perturb=args.perturb, seed=args.seed,
        shared_mesh=args.shared_mesh, init=args.init,
    )
    _write(report.to_csv(), args.out)
    if args.plot:
        from kdvdg.plotting import plot_convergence

        plot_convergence(report, args.plot)
    return 0


def _evolve(args) -> int:
    result = harness.run_evolution(
        args.example, args.method, args.degree, args.cells, t_final=args.t_final,
        cfl=args.cfl, mesh_kind=args.mesh, perturb=args.perturb, seed=args.seed,
        energy_every=args.snapshot_every, init=args.init,
    )
    _write(result.history.to_csv(result.metadata), args.energy_out)
    if args.snapshot_out:
        _write(result.snapshot_csv(), args.snapshot_out)
    if args.plot:
        from kdvdg.plotting import plot_evolution

        plot_evolution(result, args.plot)
    logging.getLogger("kdvdg").info(
        "error_u=%.6e energy drift=%.3e", result.error_u, result.history.relative_drift
    )
    return 0


def _verify(args) -> int:
    results = harness.run_property_suite(seed=args.seed, nstates=args.states)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    handlers = {"convergence": _convergence, "evolve": _evolve, "verify": _verify}
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
