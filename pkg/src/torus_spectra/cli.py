"""Command-line entry point: ``torus-spectra <subcommand> [flags]``.

Every subcommand writes CSV (header row, comma separator, LF endings) to
stdout or ``--output`` and emits a JSON run manifest. Node indices are
0-based, row-major with the first coordinate varying fastest.

Exit status: 0 on success, 1 on a domain error (one line on stderr), 2 on a
usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import DEFAULT_TERMS, bound_report, compare_walks, compare_walks_vs_m
from .deletion import (
    DeletionError,
    Removal,
    charpoly_minus_edge,
    charpoly_minus_node,
    charpoly_minus_set,
    charpoly_minus_two,
    one_node_reduction_sweep,
    spectral_radius_after_deletion,
    two_node_reduction_map,
)
from .sis import DEFAULT_RNG_SEED, SisParams, jacobian_spectral_test, run_experiment
from .spectral import (
    ZERO_TOL,
    SpectralError,
    Spectrum,
    charpoly_eval_torus,
    dense_charpoly,
    dense_spectrum,
    laplacian_spectrum,
    torus_eigenvalues,
)
from .topology import (
    Graph,
    TopologyError,
    TorusSpec,
    build_grid,
    build_torus,
    delete_edge,
    delete_nodes,
    read_edgelist,
    write_edgelist,
)
from .walks import (
    PoleError,
    WalkPrecisionError,
    exact_walk_counts,
    lattice_closed_walks,
    lattice_walks_to,
    torus_closed_walks,
    torus_walks_between,
)

DOMAIN_ERRORS = (
    TopologyError,
    DeletionError,
    SpectralError,
    PoleError,
    WalkPrecisionError,
    ValueError,
    IndexError,
    OSError,
)


# -- formatting ---------------------------------------------------------------


def fmt(value) -> str:
    """Render one CSV cell; floats keep 12 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(float(f"{v:.12g}") + 0.0)
    return str(value)


def render_csv(rows: Sequence[dict], columns: Sequence[str] | None = None) -> str:
    columns = list(columns or (rows[0].keys() if rows else []))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def render_kv(rows: Sequence[dict]) -> str:
    return "".join(",".join(f"{k}={fmt(v)}" for k, v in row.items()) + "\n" for row in rows)


# -- argument helpers ---------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _edge(text: str) -> tuple[int, int]:
    try:
        i, j = (int(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an edge as i:j, got {text!r}")
    return i, j


def _seeds(text: str) -> int | tuple[int, ...]:
    values = _int_list(text)
    if "," not in text and len(values) == 1:
        return values[0]
    return tuple(values)


def _add_output(p: argparse.ArgumentParser, formats: Sequence[str] = ("csv",)) -> None:
    p.add_argument("--output", "-o", help="write CSV here instead of stdout")
    p.add_argument("--format", choices=formats, default="csv", help="output format")
    p.add_argument(
        "--manifest",
        help="run-manifest path (default: <output>.manifest.json, or stderr without --output)",
    )


def _add_torus(p: argparse.ArgumentParser, len_flag: str = "--len", default_len: int = 5) -> None:
    p.add_argument("--dim", type=int, default=2, help="torus dimension d (default 2)")
    p.add_argument(len_flag, dest="side", type=int, default=default_len,
                   help=f"torus side length m (default {default_len})")


def _add_topology(p: argparse.ArgumentParser) -> None:
    _add_torus(p)
    p.add_argument("--topology", choices=("torus", "grid"), default="torus")
    p.add_argument("--delete-nodes", type=_int_list, default=[], metavar="I,J,...",
                   help="remove these nodes (0-based)")
    p.add_argument("--delete-edge", type=_edge, default=None, metavar="I:J",
                   help="remove this edge")
    p.add_argument("--graph-file", help="read the graph from an edge-list file instead")


def _graph_from_args(args) -> tuple[Graph, bool]:
    """Build the requested graph; the flag says whether it is an intact torus."""
    if args.graph_file:
        g = read_edgelist(args.graph_file)
        intact = False
    elif args.topology == "grid":
        g = build_grid((args.dim, args.side))
        intact = False
    else:
        g = build_torus(TorusSpec(args.dim, args.side))
        intact = True
    if args.delete_edge is not None:
        g = delete_edge(g, *args.delete_edge)
        intact = False
    if args.delete_nodes:
        g = delete_nodes(g, args.delete_nodes)
        intact = False
    return g, intact


# -- subcommands --------------------------------------------------------------


def cmd_spectra(args) -> str:
    g, intact = _graph_from_args(args)
    if args.export_edges:
        write_edgelist(g, args.export_edges)
        args._outputs.append(args.export_edges)
    closed_form = intact and not args.oracle
    if args.laplacian:
        if closed_form:
            lap = laplacian_spectrum(TorusSpec(args.dim, args.side)).eigenvalues
        else:
            lap = np.linalg.eigvalsh(np.diag(g.degrees().astype(float)) - g.to_dense())
        pairs = Spectrum(np.sort(lap)[::-1]).multiplicities()[::-1]
    else:
        spectrum = torus_eigenvalues(TorusSpec(args.dim, args.side)) if closed_form else dense_spectrum(g)
        pairs = spectrum.multiplicities()
    # print round-off zeros as 0.0 so reruns and oracle runs agree textually
    rows = [{"value": 0.0 if abs(v) < ZERO_TOL else v, "multiplicity": k} for v, k in pairs]
    return render_csv(rows, ["value", "multiplicity"])


def _removal_from_args(args) -> Removal | None:
    chosen = [r for r in (args.node is not None, bool(args.nodes), args.edge is not None) if r]
    if len(chosen) > 1:
        raise DeletionError("choose one of --node, --nodes, --edge")
    if args.node is not None:
        return Removal.node(args.node)
    if args.nodes:
        return Removal.nodes(args.nodes)
    if args.edge is not None:
        return Removal.edge(*args.edge)
    return None


def cmd_charpoly(args) -> str:
    spec = TorusSpec(args.dim, args.side)
    removal = _removal_from_args(args)
    x = args.at
    if removal is None:
        val = charpoly_eval_torus(spec, x)
    elif removal.kind == "node":
        val = charpoly_minus_node(spec, removal.items[0], x)
    elif removal.kind == "edge":
        val = charpoly_minus_edge(spec, *removal.items, x)
    elif len(removal.items) == 2:
        val = charpoly_minus_two(spec, *removal.items, x)
    else:
        val = charpoly_minus_set(spec, removal.items, x)
    row = {
        "sign": val.sign,
        "log_magnitude": val.log_magnitude,
        "value_if_finite": val.value if val.is_finite else "",
    }
    if args.oracle:
        g = build_torus(spec)
        if removal is not None:
            g = delete_edge(g, *removal.items) if removal.kind == "edge" else delete_nodes(g, removal.items)
        row["oracle_rel_diff"] = val.rel_diff(dense_charpoly(g, x))
    return render_csv([row])


def cmd_walks(args) -> str:
    if args.lattice:
        if args.closed:
            rows = [{"ell": k, "count": lattice_closed_walks(k).count}
                    for k in range(args.len // 2 + 1)]
            return render_csv(rows, ["ell", "count"])
        if args.to is None:
            raise ValueError("--lattice needs --closed or --to A,B")
        a, b = args.to
        rows = []
        for ell in range(args.len + 1):
            w = lattice_walks_to(a, b, ell)
            rows.append({"ell": ell, "count": w.count, "parity_mismatch": w.parity_mismatch})
        return render_csv(rows, ["ell", "count", "parity_mismatch"])

    spec = TorusSpec(args.dim, args.side)
    if args.closed:
        i = j = 0
    elif args.source is not None and args.target is not None:
        i, j = args.source, args.target
    else:
        raise ValueError("give --closed or both --from and --to-node")
    rows = []
    exact = None
    for ell in range(args.len + 1):
        try:
            if i == j:
                count = torus_closed_walks(spec, ell).count
            else:
                count = torus_walks_between(spec, i, j, ell).count
        except WalkPrecisionError:
            if exact is None:
                print(f"note: floating power sum lost precision at ell={ell}; "
                      "switching to exact integer counting", file=sys.stderr)
                exact = exact_walk_counts(build_torus(spec), i, args.len)
            count = exact[ell][j]
        rows.append({"ell": ell, "count": count})
    return render_csv(rows, ["ell", "count"])


def cmd_remove(args) -> str:
    spec = TorusSpec(args.dim, args.side)
    removal = _removal_from_args(args)
    if removal is None:
        raise DeletionError("choose one of --node, --nodes, --edge")
    res = spectral_radius_after_deletion(spec, removal, oracle=not args.no_oracle)
    row = {
        "removal": removal.describe(),
        "rho_analytic": res.spectral_radius,
        "rho_oracle": res.oracle_radius,
        "discrepancy": res.discrepancy,
    }
    return render_csv([row])


def cmd_bounds(args) -> str:
    spec = TorusSpec(2, args.side)
    rows = []
    for x in args.at:
        rep = bound_report(spec, x, args.terms)
        rows.append({
            "x": x,
            "torus_exact": rep.exact_value,
            "lattice_truncated": rep.lattice_value,
            "stirling_lower": rep.stirling_value,
            "lattice_tail": rep.lattice_tail,
            "stirling_tail": rep.stirling_tail,
            "chain_holds": rep.chain_holds(),
        })
    return render_csv(rows)


def _sis_params(args) -> SisParams:
    return SisParams(beta=args.beta, delta=args.delta, horizon=args.steps, seeds=args.seeds)


def cmd_sis(args) -> str:
    g, _ = _graph_from_args(args)
    mode = "montecarlo" if args.mode == "mc" else args.mode
    traj = run_experiment(g, _sis_params(args), mode, args.replicas, args.rng_seed)
    cols = ["t", "infected_mean"] + (["infected_std"] if traj.std is not None else [])
    return render_csv(traj.rows(), cols)


def cmd_threshold(args) -> str:
    g, intact = _graph_from_args(args)
    params = SisParams(beta=args.beta, delta=args.delta, horizon=0, seeds=0)
    rho = 2.0 * args.dim if intact else None
    v = jacobian_spectral_test(g, params, rho=rho)
    row = {"rho": v.rho, "ratio": v.ratio, "stable": v.stable}
    return render_kv([row]) if args.format == "kv" else render_csv([row])


def _figure1(args) -> str:
    g = build_torus(TorusSpec(2, args.side or 30))
    cols: dict[str, np.ndarray] = {}
    for delta in args.deltas:
        params = SisParams(beta=args.beta, delta=delta, horizon=args.steps, seeds=args.seeds)
        cols[f"meanfield_delta_{delta:g}"] = run_experiment(g, params, "meanfield", 1, args.rng_seed).mean
        mc = run_experiment(g, params, "montecarlo", args.replicas, args.rng_seed)
        cols[f"mc_mean_delta_{delta:g}"] = mc.mean
        cols[f"mc_std_delta_{delta:g}"] = mc.std
    rows = [{"t": t, **{k: v[t] for k, v in cols.items()}} for t in range(args.steps + 1)]
    return render_csv(rows)


def _figure3(args) -> str:
    rows = one_node_reduction_sweep(args.lens or [5, 7, 9, 11], d=args.dim, oracle=not args.no_oracle)
    return render_csv(rows, ["m", "rho_analytic", "rho_oracle", "rho_reduction", "discrepancy"])


def _figure4(args) -> str:
    spec = TorusSpec(args.dim, args.side or 7)
    rows = two_node_reduction_map(spec, oracle=not args.no_oracle)
    coords = [f"c{k}" for k in range(spec.d)]
    return render_csv(rows, ["node", *coords, "rho_analytic", "rho_oracle", "rho_reduction", "discrepancy"])


def cmd_figures(args) -> str:
    which = args.which
    if which == 1:
        return _figure1(args)
    if which == 3:
        return _figure3(args)
    if which == 4:
        return _figure4(args)
    if which in (5, 6):
        rows = compare_walks(args.side or 5, args.max_ell)
        cols = ["ell", "torus", "lattice"] if which == 5 else ["ell", "percent_diff"]
        return render_csv(rows, cols)
    if which in (7, 8):
        rows = compare_walks_vs_m(args.ell, args.lens or list(range(3, 21)))
        cols = ["m", "torus", "lattice"] if which == 7 else ["m", "percent_diff"]
        return render_csv(rows, cols)
    raise ValueError(f"figure {which} is not reproducible (choose 1, 3, 4, 5, 6, 7 or 8)")


# -- parser -------------------------------------------------------------------


def _figure_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--len", dest="side", type=int, default=None,
                   help="torus side length (figure 1: 30, figure 4: 7, figures 5/6: 5)")
    p.add_argument("--lens", type=_int_list, default=None,
                   help="side lengths to sweep (figure 3: 5,7,9,11; figures 7/8: 3..20)")
    p.add_argument("--max-ell", type=int, default=20, help="longest walk for figures 5/6")
    p.add_argument("--ell", type=int, default=10, help="walk length for figures 7/8")
    p.add_argument("--no-oracle", action="store_true", help="skip the dense cross-check")
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--deltas", type=_float_list, default=[0.2, 0.6])
    p.add_argument("--seeds", type=_seeds, default=20)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--replicas", type=int, default=100)
    p.add_argument("--rng-seed", type=int, default=DEFAULT_RNG_SEED)
    _add_output(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torus-spectra",
        description="Spectra, walk counts and SIS thresholds on tori and almost-tori. "
        "Node indices are 0-based and row-major (first coordinate fastest).",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectra", help="adjacency eigenvalues as value,multiplicity")
    _add_topology(p)
    p.add_argument("--oracle", action="store_true", help="use the dense eigensolver")
    p.add_argument("--laplacian", action="store_true", help="Laplacian instead of adjacency")
    p.add_argument("--export-edges", metavar="PATH", help="also write the graph as an edge list")
    _add_output(p)
    p.set_defaults(func=cmd_spectra)

    p = sub.add_parser("charpoly", help="characteristic polynomial at a point: sign,log_magnitude,value_if_finite")
    _add_torus(p)
    p.add_argument("--at", type=float, required=True, help="evaluation point x")
    p.add_argument("--node", type=int)
    p.add_argument("--nodes", type=_int_list, default=[])
    p.add_argument("--edge", type=_edge)
    p.add_argument("--oracle", action="store_true", help="append the relative gap to det(xI - A)")
    _add_output(p)
    p.set_defaults(func=cmd_charpoly)

    p = sub.add_parser(
        "walks",
        help="walk counts as ell,count",
        description="Torus walks use --len as the maximum walk length and --side for the torus. "
        "With --lattice --closed the ell column is the half-length k: count = binom(2k, k)^2 "
        "closed walks of 2k steps, listed up to 2k <= --len.",
    )
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--side", type=int, default=5, help="torus side length m (default 5)")
    p.add_argument("--len", type=int, required=True, help="maximum walk length")
    p.add_argument("--closed", action="store_true")
    p.add_argument("--from", dest="source", type=int)
    p.add_argument("--to-node", dest="target", type=int)
    p.add_argument("--lattice", action="store_true", help="infinite square lattice")
    p.add_argument("--to", type=lambda t: tuple(_int_list(t)), default=None, metavar="A,B",
                   help="lattice target offset")
    _add_output(p)
    p.set_defaults(func=cmd_walks)

    p = sub.add_parser("remove", help="spectral radius after deleting nodes or an edge")
    _add_torus(p)
    p.add_argument("--node", type=int)
    p.add_argument("--nodes", type=_int_list, default=[])
    p.add_argument("--edge", type=_edge)
    p.add_argument("--no-oracle", action="store_true")
    p.add_argument("--report", choices=("csv",), default="csv")
    _add_output(p)
    p.set_defaults(func=cmd_remove)

    p = sub.add_parser(
        "bounds",
        help="torus resolvent diagonal vs lattice and Stirling lower bounds",
        description="Columns: x, torus_exact = [(xI-A)^-1]_ii, lattice_truncated = "
        "(1/x) sum_{l<=L} x^-2l binom(2l,l)^2, stirling_lower (series from l=1), "
        "their truncation tail bounds, chain_holds.",
    )
    p.add_argument("--len", dest="side", type=int, default=5, help="torus side length m")
    p.add_argument("--at", type=_float_list, default=[6.0, 8.0, 10.0], help="points x > 4")
    p.add_argument("--terms", type=int, default=DEFAULT_TERMS)
    _add_output(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sis", help="SIS trajectory: t,infected_mean[,infected_std]")
    _add_topology(p)
    p.add_argument("--mode", choices=("meanfield", "mc"), default="meanfield")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--seeds", type=_seeds, default=20, help="seed count k, or a node list i,j,...")
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--replicas", type=int, default=100)
    p.add_argument("--rng-seed", type=int, default=DEFAULT_RNG_SEED)
    _add_output(p)
    p.set_defaults(func=cmd_sis)

    p = sub.add_parser("threshold", help="epidemic threshold verdict: rho,ratio,stable")
    _add_topology(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    _add_output(p, formats=("csv", "kv"))
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser(
        "figures",
        help="reproduce figure data (1, 3, 4, 5, 6, 7, 8)",
        description="1: SIS infected counts vs time; 3: rho drop vs m (one node); "
        "4: rho drop map (central node + one more); 5/6: closed walks vs ell and percent "
        "difference 100*(torus-lattice)/torus; 7/8: the same vs torus side length.",
    )
    p.add_argument("--which", type=int, required=True, choices=(1, 3, 4, 5, 6, 7, 8))
    _figure_flags(p)
    p.set_defaults(func=cmd_figures)

    for n in (3, 4):
        p = sub.add_parser(f"figure{n}", help=f"alias for 'figures --which {n}'")
        _figure_flags(p)
        p.set_defaults(func=cmd_figures, which=n)

    return parser


def _manifest(args, argv: Sequence[str], duration: float) -> dict:
    flags = {k: v for k, v in vars(args).items() if not k.startswith("_") and k != "func"}
    return {
        "subcommand": args.command,
        "argv": list(argv),
        "flags": flags,
        "rng_seed": getattr(args, "rng_seed", None),
        "version": __version__,
        "duration_s": duration,
        "outputs": args._outputs,
    }


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args._outputs = []
    start = time.perf_counter()
    try:
        text = args.func(args)
    except DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.output:
        Path(args.output).write_text(text, newline="\n")
        args._outputs.insert(0, args.output)
    else:
        sys.stdout.write(text)
    manifest = json.dumps(_manifest(args, argv, time.perf_counter() - start), default=str)
    if args.manifest:
        Path(args.manifest).write_text(manifest + "\n")
    elif args.output:
        Path(args.output + ".manifest.json").write_text(manifest + "\n")
    else:
        print(f"manifest: {manifest}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
