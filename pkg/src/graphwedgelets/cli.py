"""Command-line front end.

Commands
--------
encode   grow a signal-adapted tree and write a quantized .bwpc stream
decode   rebuild a signal (or image) from a .bwpc stream
analyze  approximation-error curves for the md/fa/r strategies (CSV)
compare  wedgelet vs quadtree vs 2D-Haar PSNR on an image (CSV)
gen      graph generators and synthetic signals
theory   dyadic-block error-bound checks and the small-n tree oracle

Exit codes: 0 ok, 1 usage, 2 I/O, 3 data-invariant violation. Every run
prints one metadata line (version, seed, config hash) for reproducibility.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .codec import bits_per_node, deserialize, payload_bits, peek_header, serialize
from .encoder import Strategy, encode, error_curve
from .errors import FormatError, InvariantError
from .graph import (
    Graph,
    gen_er_graph,
    gen_grid_graph,
    load_graph,
    load_signal,
    save_graph,
    save_signal,
)
from .imaging import (
    haar2d_topm,
    image_to_signal,
    psnr,
    quadtree_encode,
    read_image,
    signal_to_image,
    write_pgm,
)
from .metrics import METRIC_KINDS, Metric
from .signals import (
    cluster_label_signal,
    ellipse_indicator,
    gradient_blend,
    halfplane_indicator,
    random_signal,
)
from .theory import besov_oracle, jackson_check
from .wavelets import (
    decompose,
    reconstruct_from_means,
    reconstruct_from_wavelet_values,
    stored_wavelet_values,
)

__all__ = ["main"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would sys.exit(2)
        raise UsageError(message)


def _fraction(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a number: {text!r}") from exc


def _build_parser() -> _Parser:
    parser = _Parser(prog="wedgelets", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_domain(p: _Parser, signal: bool = True) -> None:
        p.add_argument("--graph", type=Path, help="edge-list file")
        if signal:
            p.add_argument("--signal", type=Path, help="signal file (one value per line)")
        p.add_argument("--image", type=Path, help="grayscale image (pgm; png with Pillow)")
        p.add_argument("--metric", choices=METRIC_KINDS, default="hop")
        p.add_argument(
            "--induced-metric",
            action="store_true",
            help="measure subset distances inside the induced subgraph",
        )

    def add_strategy(p: _Parser) -> None:
        p.add_argument("--strategy", choices=("md", "fa", "r"), default="fa")
        p.add_argument("--R", type=int, help="sample size for the r strategy")
        p.add_argument("--seed", type=int, help="PRNG seed (required for any randomized path)")
        p.add_argument("--q1", default="0", help="first center: vertex id or 'random'")

    p = sub.add_parser("encode", help="encode a signal or image into a .bwpc stream")
    add_domain(p)
    add_strategy(p)
    p.add_argument("--M", type=int, required=True, help="number of centers")
    p.add_argument("--K", type=int, default=256, help="quantizer levels")
    p.add_argument("--mode", choices=("means", "wavelets"), default="means")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("decode", help="decode a .bwpc stream")
    p.add_argument("--bitstream", type=Path, required=True)
    p.add_argument("--graph", type=Path)
    p.add_argument("--width", type=int, help="grid width (rebuilds the pixel graph)")
    p.add_argument("--height", type=int, help="grid height")
    p.add_argument("--induced-metric", action="store_true")
    p.add_argument("--mterm", type=int, help="keep only the m largest wavelets")
    p.add_argument("--out", type=Path, required=True, help=".pgm for an image, else text signal")

    p = sub.add_parser("analyze", help="error curves for md/fa/r (CSV: m, err_md, err_fa, err_r)")
    add_domain(p)
    add_strategy(p)
    p.add_argument("--M", type=int, required=True, help="largest partition size")
    p.add_argument("--csv", type=Path, required=True)

    p = sub.add_parser("compare", help="wedgelet vs quadtree vs Haar PSNR on an image")
    add_domain(p, signal=False)
    add_strategy(p)
    p.add_argument("--M", type=int, required=True, help="piece budget for all methods")
    p.add_argument("--csv", type=Path, required=True)
    p.set_defaults(metric="l2")

    p = sub.add_parser("gen", help="generate graphs and synthetic signals")
    p.add_argument("--model", choices=("er", "grid"), required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, required=True, help="edge-list output")
    p.add_argument(
        "--signal-kind",
        choices=("halfplane", "ellipse", "gradient", "random", "clusters"),
    )
    p.add_argument("--signal-out", type=Path)
    p.add_argument("--threshold", type=float, help="halfplane/gradient boundary")
    p.add_argument("--axis", choices=("x", "y"), default="x")
    p.add_argument(
        "--ellipse",
        type=float,
        nargs=5,
        metavar=("CX", "CY", "WX", "WY", "R2"),
        help="ellipse center, axis weights and squared radius",
    )
    p.add_argument("--alpha", type=float, default=0.1, help="gradient blend slope")
    p.add_argument("--k", type=int, default=3, help="cluster count for 'clusters'")

    p = sub.add_parser("theory", help="error-bound checks and the small-n tree oracle")
    add_domain(p)
    add_strategy(p)
    p.add_argument("--check", choices=("jackson", "besov"), required=True)
    p.add_argument("--r", type=_fraction, default=_fraction("2/3"), help="energy exponent (e.g. 2/3)")
    p.add_argument("--alpha", type=_fraction, help="smoothness exponent (besov)")
    p.add_argument("--rho", type=float, default=0.8, help="balance bound (besov)")
    p.add_argument("--nmax", type=int, default=8, help="oracle size limit")
    p.add_argument("--csv", type=Path)

    return parser


# ----------------------------------------------------------------------
# Shared loading helpers
# ----------------------------------------------------------------------


def _config_digest(args: argparse.Namespace) -> str:
    payload = {k: str(v) for k, v in sorted(vars(args).items())}
    return hashlib.sha256(json.dumps(payload).encode()).hexdigest()[:12]


def _load_domain(args) -> tuple[Graph, np.ndarray | None, tuple[int, int] | None]:
    """(graph, signal, image dimensions) from --image or --graph/--signal."""
    if args.image is not None:
        image = read_image(args.image)
        graph, f = image_to_signal(image)
        return graph, f, (image.width, image.height)
    if args.graph is None:
        raise UsageError("need --image or --graph")
    graph = load_graph(args.graph.read_text())
    f = None
    if getattr(args, "signal", None) is not None:
        f = load_signal(args.signal.read_text(), graph.n)
    return graph, f, None


def _metric(args, graph: Graph) -> Metric:
    return Metric(graph, args.metric, induced=args.induced_metric)


def _q1(args, graph: Graph) -> int:
    if args.q1 == "random":
        if args.seed is None:
            raise UsageError("--q1 random requires --seed")
        return int(np.random.default_rng(args.seed).integers(graph.n))
    try:
        q1 = int(args.q1)
    except ValueError as exc:
        raise UsageError(f"--q1 must be a vertex id or 'random', got {args.q1!r}") from exc
    if not 0 <= q1 < graph.n:
        raise UsageError(f"--q1 {q1} out of range for n={graph.n}")
    return q1


def _strategy(args) -> Strategy:
    if args.strategy == "r":
        if args.R is None:
            raise UsageError("strategy 'r' requires --R")
        if args.seed is None:
            raise UsageError("strategy 'r' requires an explicit --seed")
    return Strategy(args.strategy, R=args.R, seed=args.seed)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return repr(float(x))


# ----------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------


def _cmd_encode(args) -> int:
    graph, f, _dims = _load_domain(args)
    if f is None:
        raise UsageError("encode needs a signal (--signal or --image)")
    metric = _metric(args, graph)
    result = encode(graph, metric, f, _q1(args, graph), args.M, _strategy(args))
    if args.mode == "means":
        values = result.leaf_means
    else:
        values = stored_wavelet_values(decompose(result.tree, f))
    data = serialize(result.tree, values, args.mode, args.K, args.strategy)
    args.out.write_bytes(data)
    bpn = bits_per_node(graph.n, result.tree.M, args.K)
    bits = payload_bits(graph.n, result.tree.M, args.K)
    print(
        f"encoded M={result.tree.M} n={graph.n} K={args.K} mode={args.mode} "
        f"payload_bits={bits} bound_bits_per_node={bpn:.6f} "
        f"error_l2={result.error_trace[-1]:.6g}"
    )
    return 0


def _cmd_decode(args) -> int:
    data = args.bitstream.read_bytes()
    if args.graph is not None:
        graph = load_graph(args.graph.read_text())
        dims = None
    elif args.width is not None and args.height is not None:
        graph = gen_grid_graph(args.width, args.height)
        dims = (args.width, args.height)
    else:
        raise UsageError("decode needs --graph or both --width and --height")
    metric = None
    if args.induced_metric:
        metric = Metric(graph, peek_header(data).metric, induced=True)
    stream = deserialize(data, graph, metric)
    if stream.header.mode == "means":
        if args.mterm is not None:
            raise UsageError("--mterm applies only to wavelets-mode streams")
        recon = reconstruct_from_means(stream.tree, stream.values)
    else:
        recon = reconstruct_from_wavelet_values(stream.tree, stream.values, args.mterm)
    if args.out.suffix.lower() == ".pgm":
        if dims is None:
            raise UsageError("writing a .pgm needs --width and --height")
        args.out.write_bytes(write_pgm(signal_to_image(recon, dims[0], dims[1])))
    else:
        args.out.write_text(save_signal(recon))
    print(f"decoded M={stream.tree.M} mode={stream.header.mode} -> {args.out}")
    return 0


def _cmd_analyze(args) -> int:
    graph, f, _dims = _load_domain(args)
    if f is None:
        raise UsageError("analyze needs a signal (--signal or --image)")
    if args.R is None or args.seed is None:
        raise UsageError("analyze runs the r strategy: --R and --seed are required")
    metric = _metric(args, graph)
    strategies = [Strategy("md"), Strategy("fa"), Strategy("r", R=args.R, seed=args.seed)]
    curves = error_curve(graph, metric, f, _q1(args, graph), strategies, args.M)
    rows = [
        [m + 1, _fmt(curves["md"][m]), _fmt(curves["fa"][m]), _fmt(curves["r"][m])]
        for m in range(args.M)
    ]
    _write_csv(args.csv, ["m", "err_md", "err_fa", "err_r"], rows)
    print(f"analyze wrote {args.M} rows -> {args.csv}")
    return 0


def _cmd_compare(args) -> int:
    if args.image is None:
        raise UsageError("compare needs --image")
    image = read_image(args.image)
    graph, f = image_to_signal(image)
    metric = _metric(args, graph)
    budget = args.M
    result = encode(graph, metric, f, _q1(args, graph), budget, _strategy(args))
    wedge_img = signal_to_image(
        reconstruct_from_means(result.tree, result.leaf_means), image.width, image.height
    )
    quad = quadtree_encode(image, budget)
    haar_img = haar2d_topm(image, budget)
    rows = [
        ["wedgelet", result.tree.M, _fmt(psnr(image, wedge_img))],
        ["quadtree", quad.n_leaves, _fmt(psnr(image, quad.to_image()))],
        ["haar2d", budget, _fmt(psnr(image, haar_img))],
    ]
    _write_csv(args.csv, ["method", "pieces", "psnr_db"], rows)
    print(f"compare wrote {len(rows)} rows -> {args.csv}")
    return 0


def _cmd_gen(args) -> int:
    if args.model == "er":
        if args.n is None or args.p is None or args.seed is None:
            raise UsageError("gen --model er needs --n, --p and --seed")
        graph = gen_er_graph(args.n, args.p, args.seed)
    else:
        if args.width is None or args.height is None:
            raise UsageError("gen --model grid needs --width and --height")
        graph = gen_grid_graph(args.width, args.height)
    args.out.write_text(save_graph(graph))
    print(f"gen wrote graph n={graph.n} m={graph.num_edges} -> {args.out}")

    if args.signal_kind is None:
        return 0
    if args.signal_out is None:
        raise UsageError("--signal-kind needs --signal-out")
    kind = args.signal_kind
    if kind == "halfplane":
        if args.threshold is None:
            raise UsageError("halfplane signal needs --threshold")
        f = halfplane_indicator(graph, args.threshold, args.axis)
    elif kind == "ellipse":
        if args.ellipse is None:
            raise UsageError("ellipse signal needs --ellipse CX CY WX WY R2")
        cx, cy, wx, wy, r2 = args.ellipse
        f = ellipse_indicator(graph, (cx, cy), (wx, wy), r2)
    elif kind == "gradient":
        if args.threshold is None:
            raise UsageError("gradient signal needs --threshold (for its halfplane base)")
        f = gradient_blend(graph, halfplane_indicator(graph, args.threshold, args.axis), args.alpha)
    elif kind == "clusters":
        if args.seed is None:
            raise UsageError("clusters signal needs --seed")
        f = cluster_label_signal(graph, args.k, args.seed)
    else:
        if args.seed is None:
            raise UsageError("random signal needs --seed")
        f = random_signal(graph.n, args.seed)
    args.signal_out.write_text(save_signal(f))
    print(f"gen wrote signal kind={kind} -> {args.signal_out}")
    return 0


def _cmd_theory(args) -> int:
    graph, f, _dims = _load_domain(args)
    if f is None:
        raise UsageError("theory needs a signal (--signal or --image)")
    if args.check == "jackson":
        metric = _metric(args, graph)
        result = encode(graph, metric, f, _q1(args, graph), graph.n, _strategy(args))
        report = jackson_check(result.tree, f, args.r)
        print(
            f"jackson r={report.r:.6g} alpha={report.alpha:.6g} rho={report.rho:.6g} "
            f"C={report.constant:.6g} Nr={report.nr:.6g} blocks={len(report.blocks)} "
            f"all_ok={report.all_ok}"
        )
        if report.mr_ok is not None:
            print(
                f"oscillation bound: Mr={report.mr_value:.6g} <= {report.mr_bound:.6g} "
                f"ok={report.mr_ok}"
            )
        if args.csv is not None:
            rows = [
                [b.mu, b.m, _fmt(b.lhs), _fmt(b.rhs), int(b.ok)] for b in report.blocks
            ]
            _write_csv(args.csv, ["mu", "m", "lhs", "rhs", "ok"], rows)
        return 0 if report.all_ok else 3
    alpha = args.alpha if args.alpha is not None else 1.0 / args.r - 0.5
    result = besov_oracle(graph, f, alpha, args.r, args.rho, nmax=args.nmax)
    tree = result.gb_tree
    print(
        f"besov alpha={alpha:.6g} r={args.r:.6g} rho={args.rho:.6g} "
        f"gb={_fmt(result.gb_value)} inf_nr={_fmt(result.inf_r_energy)} "
        f"ratio={_fmt(result.near_best_ratio)}"
    )
    if tree is not None:
        print(
            f"minimizing tree: nodes={tree.n_nodes} complete={tree.is_complete} "
            f"rho={tree.balance_ratio():.6g}"
        )
    return 0


_COMMANDS = {
    "encode": _cmd_encode,
    "decode": _cmd_decode,
    "analyze": _cmd_analyze,
    "compare": _cmd_compare,
    "gen": _cmd_gen,
    "theory": _cmd_theory,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        seed = getattr(args, "seed", None)
        print(
            f"# graph-wedgelets {__version__} seed={seed if seed is not None else '-'} "
            f"config={_config_digest(args)}"
        )
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (OSError, FormatError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except (InvariantError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
