"""Command-line entry point: ``netcorr generate|correlate|analyze|ingest``.

Every subcommand accepts ``--config FILE`` (JSON, or ``key = value`` lines)
whose keys mirror the long flags; explicit flags win. A run writing to a
file also writes ``<out>.manifest.json`` recording the parameters, seeds,
paths, version and wall-clock time; passing that manifest back through
``--config`` reproduces the run.

Randomness comes from ``--seed`` only. Stages that need several streams
derive them with :func:`derive_seed`.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
import zlib
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from . import analysis, formats, generators, ingest
from .correlation import centered_corr_matrix, corr_curve, corr_matrix
from .exceptions import NetcorrError, ParameterError
from .validation import check_n_jobs

logger = logging.getLogger("netcorr")


def _version() -> str:
    try:
        return version("netcorr")
    except PackageNotFoundError:  # pragma: no cover - running from a source tree
        return "0+unknown"


def derive_seed(seed: int, label: str) -> int:
    """Sub-seed for the stage ``label``: ``SeedSequence([seed, crc32(label)])``."""
    ss = np.random.SeedSequence([int(seed), zlib.crc32(label.encode())])
    return int(ss.generate_state(1, np.uint32)[0])


def _int_list(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    return [int(v) for v in str(text).split(",") if v.strip()]


def _window(text):
    if isinstance(text, (list, tuple)):
        lo, hi = text
    else:
        lo, _, hi = str(text).partition(",")
    conv = lambda v: None if v in (None, "") else float(v)
    return conv(lo), conv(hi)


def _pair(text):
    lo, hi = _int_list(text)
    return lo, hi


# parser -----------------------------------------------------------------------


def _common(seed=True, out=True) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="JSON or key=value file supplying defaults for any flag")
    p.add_argument("--threads", type=int, default=0, help="worker threads (0 = all cores)")
    if seed:
        p.add_argument("--seed", type=int, default=0, help="master random seed")
    if out:
        p.add_argument("--out", "-o", default="-", help="output path ('-' = stdout)")
    return p


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    leaves: dict[str, argparse.ArgumentParser] = {}
    parser = argparse.ArgumentParser(prog="netcorr", description="Correlations of network trajectories.")
    parser.add_argument("--version", action="version", version=f"netcorr {_version()}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="synthesise a benchmark trajectory")
    models = gen.add_subparsers(dest="model", required=True)
    common = _common()

    p = models.add_parser("white", parents=[common], help="i.i.d. Erdos-Renyi snapshots")
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--p", type=float, default=0.2)
    p.add_argument("--directed", action="store_true")
    leaves["generate white"] = p

    p = models.add_parser("periodic", parents=[common], help="noisy periodic ER snapshots")
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--n", type=int, default=120)
    p.add_argument("--t", type=int, default=20, dest="period", help="period T")
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--q", type=float, default=0.4, help="per-entry noise probability")
    leaves["generate periodic"] = p

    p = models.add_parser("darn", parents=[common], help="discrete autoregressive network DARN(p)")
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--order", type=int, default=1, help="memory order p")
    p.add_argument("--q", type=float, default=0.6, help="copy probability")
    p.add_argument("--y", type=float, default=0.1, help="innovation edge probability")
    p.add_argument("--burn-in", type=int, default=None)
    leaves["generate darn"] = p

    p = models.add_parser("darn-cross", parents=[common], help="DARN(1) with cross-sampling")
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--q", type=float, default=0.6)
    p.add_argument("--y", type=float, default=0.1)
    p.add_argument("--w", type=float, default=0.5, help="cross-sampling probability")
    p.add_argument("--shift", type=int, default=2)
    p.add_argument("--burn-in", type=int, default=None)
    leaves["generate darn-cross"] = p

    p = models.add_parser("logistic", parents=[common], help="logistic map through a graph dictionary")
    p.add_argument("--r", type=float, default=generators.R_INFINITY)
    p.add_argument("--l", type=int, default=1000, dest="L", help="dictionary size L")
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--p", type=float, default=0.4, help="density of G_1")
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--x0", type=float, default=None, help="initial condition (default: derived from --seed)")
    p.add_argument("--transient", type=int, default=1000)
    leaves["generate logistic"] = p

    p = sub.add_parser("correlate", parents=[common], help="correlation curve and matrices")
    p.add_argument("input", help="trajectory file ('-' = stdin)")
    p.add_argument("--tau-max", type=int, default=20)
    p.add_argument("--matrices", type=_int_list, default=[], help="comma-separated lags to export C~ at")
    p.add_argument("--raw-matrices", action="store_true", help="export raw C instead of centered C~")
    p.add_argument("--dense-matrices", action="store_true", help="dense rows instead of i,j,value triplets")
    p.add_argument("--matrix-prefix", default=None, help="path prefix for matrix files")
    p.add_argument("--kernel", choices=("auto", "dense", "sparse"), default="auto")
    p.add_argument("--diagnostics", action="store_true", help="print the c - <mu,mu> shortcut gap")
    leaves["correlate"] = p

    ana = sub.add_parser("analyze", help="statistics on curves, matrices or trajectories")
    kinds = ana.add_subparsers(dest="kind", required=True)

    p = kinds.add_parser("zscore", parents=[common], help="period detectability z-score")
    p.add_argument("inputs", nargs="+", help="curve files")
    p.add_argument("--t", type=int, default=30, dest="period")
    p.add_argument("--threshold", type=float, default=analysis.DETECTION_THRESHOLD)
    leaves["analyze zscore"] = p

    p = kinds.add_parser("decay", parents=[common], help="exponential decay rate past the plateau")
    p.add_argument("inputs", nargs="+", help="curve files")
    p.add_argument("--orders", type=_int_list, default=None, help="memory order of each input")
    p.add_argument("--window", type=_pair, default=None, help="fit window lo,hi")
    p.add_argument("--tol", type=float, default=0.1, help="plateau tolerance")
    leaves["analyze decay"] = p

    p = kinds.add_parser("lifetimes", parents=[common], help="correlation lifetimes vs a shuffled null")
    p.add_argument("input", help="trajectory file")
    p.add_argument("--shuffles", type=int, default=50)
    p.add_argument("--tau-max", type=int, default=100)
    p.add_argument("--null", choices=analysis.NULL_MODELS, default="snapshot")
    p.add_argument("--revival", type=float, default=0.5)
    leaves["analyze lifetimes"] = p

    p = kinds.add_parser("scaling", parents=[common], help="edge-of-chaos peak scaling exponent")
    p.add_argument("input", help="curve file")
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=5)
    leaves["analyze scaling"] = p

    p = kinds.add_parser("offdiag", parents=[common], help="off-diagonal to diagonal mass ratio")
    p.add_argument("inputs", nargs="+", help="matrix files")
    leaves["analyze offdiag"] = p

    p = sub.add_parser("ingest", parents=[_common(seed=False)], help="bin a contact list into a trajectory")
    p.add_argument("input", help="contact list (gzip allowed, '-' = stdin)")
    p.add_argument("--resolution", type=float, required=True, help="snapshot width in seconds")
    p.add_argument("--window", type=_window, default=None, help="t_start,t_end (either may be empty)")
    p.add_argument("--cols", default=None, help="column roles, e.g. t,i,j or i,j,t,_")
    p.add_argument("--format", choices=ingest.FORMATS, default="tij", dest="fmt")
    p.add_argument("--delimiter", default=None)
    leaves["ingest"] = p
    return parser, leaves


def _leaf_name(args) -> str:
    extra = getattr(args, "model", None) or getattr(args, "kind", None)
    return f"{args.command} {extra}" if extra else args.command


def load_config(path) -> dict:
    """Flag defaults from JSON (a run manifest is accepted) or ``key = value`` lines."""
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text)
        if isinstance(data, dict) and "params" in data and "subcommand" in data:
            data = data["params"]
    except json.JSONDecodeError:
        data = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ParameterError(f"{path}:{lineno}: expected key = value")
            data[key.strip()] = value.strip()
    if not isinstance(data, dict):
        raise ParameterError(f"{path}: config must be a mapping")
    return {k.lstrip("-").replace("-", "_"): v for k, v in data.items()}


def _apply_config(leaf: argparse.ArgumentParser, config: dict) -> None:
    actions = {a.dest: a for a in leaf._actions}
    defaults = {}
    for key, value in config.items():
        if key in ("config", "out", "input", "inputs"):
            continue
        if key not in actions:
            raise ParameterError(f"unknown config key {key!r}")
        action = actions[key]
        if isinstance(action, argparse._StoreTrueAction) and isinstance(value, str):
            value = value.lower() in ("1", "true", "yes", "on")
        elif isinstance(value, list):
            value = ",".join(str(v) for v in value)
        elif value is not None and not isinstance(value, (str, bool)):
            value = str(value)
        defaults[key] = value
    leaf.set_defaults(**defaults)


def parse_args(argv=None):
    parser, leaves = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        leaf = leaves[_leaf_name(args)]
        _apply_config(leaf, load_config(args.config))
        args = parser.parse_args(argv)
    return args


# commands -----------------------------------------------------------------------


def _is_file(path) -> bool:
    return path not in (None, "-")


def _emit_summary(args, line: str) -> None:
    stream = sys.stdout if _is_file(args.out) else sys.stderr
    print(line, file=stream)


def cmd_generate(args) -> dict:
    seeds = {"seed": args.seed}
    if args.model == "white":
        traj = generators.gen_white(generators.WhiteParams(args.m, args.n, args.p, args.seed, args.directed))
    elif args.model == "periodic":
        traj = generators.gen_periodic(
            generators.PeriodicParams(args.m, args.n, args.period, args.p, args.q, args.seed)
        )
    elif args.model == "darn":
        traj = generators.gen_darn(
            generators.DarnParams(args.m, args.n, args.order, args.q, args.y, args.seed, args.burn_in)
        )
    elif args.model == "darn-cross":
        traj = generators.gen_darn_cross(generators.DarnCrossParams(
            args.m, args.n, args.q, args.y, args.w, args.shift, args.seed, args.burn_in,
        ))
    else:
        seeds["dictionary"] = derive_seed(args.seed, "dictionary")
        dictionary = generators.build_dictionary(args.m, args.L, args.p, seeds["dictionary"])
        x0 = args.x0
        if x0 is None:
            seeds["x0"] = derive_seed(args.seed, "x0")
            x0 = generators.seed_to_x0(seeds["x0"])
        traj = generators.gen_logistic(
            generators.LogisticParams(args.r, args.n, dictionary, x0=x0, transient=args.transient)
        )
    traj.metadata["seed"] = args.seed
    formats.write_trajectory(traj, args.out)
    return {"seeds": seeds, "outputs": [args.out]}


def _matrix_prefix(args) -> str:
    if args.matrix_prefix:
        return args.matrix_prefix
    if _is_file(args.out):
        root, _ = os.path.splitext(args.out)
        return root
    if _is_file(args.input):
        root, _ = os.path.splitext(args.input)
        return root
    raise ParameterError("--matrices with stdin/stdout streams needs --matrix-prefix")


def cmd_correlate(args) -> dict:
    traj = formats.read_trajectory(args.input)
    curve = corr_curve(traj, args.tau_max, kernel=args.kernel, n_jobs=check_n_jobs(args.threads),
                       diagnostics=args.diagnostics)
    formats.export_curve(curve, args.out)
    outputs = [args.out]
    if args.diagnostics:
        gap = curve.diagnostics["shortcut_gap"]
        print(f"shortcut_gap max_abs={float(np.max(np.abs(gap))):.6g}", file=sys.stderr)
    if args.matrices:
        prefix = _matrix_prefix(args)
        tag = "C" if args.raw_matrices else "Ctilde"
        for tau in args.matrices:
            if args.raw_matrices:
                mat = corr_matrix(traj, tau, kernel=args.kernel)
            else:
                mat = centered_corr_matrix(traj, tau, kernel=args.kernel)
            path = f"{prefix}.{tag}{tau}.csv"
            meta = {"N": traj.n_snapshots, "source": args.input, "seed": traj.metadata.get("seed")}
            formats.export_matrix(mat, path, sparse=not args.dense_matrices, meta=meta)
            outputs += [path, formats.sidecar_path(path)]
    return {"inputs": [args.input], "outputs": outputs}


def cmd_analyze(args) -> dict:
    seeds = {}
    if args.kind == "zscore":
        rows = []
        for path in args.inputs:
            rep = analysis.period_zscore(formats.read_curve(path), args.period, args.threshold)
            rows.append({"input": path, **rep.to_dict()})
            _emit_summary(args, f"{path}: {rep.summary()}")
        report = {"kind": "zscore", "period": args.period, "threshold": args.threshold, "rows": rows}
        inputs = args.inputs
    elif args.kind == "decay":
        if args.orders is not None and len(args.orders) != len(args.inputs):
            raise ParameterError(f"--orders lists {len(args.orders)} values for {len(args.inputs)} inputs")
        rows = []
        for k, path in enumerate(args.inputs):
            order = None if args.orders is None else args.orders[k]
            fit = analysis.decay_fit(formats.read_curve(path), args.window, order, args.tol)
            rows.append({"input": path, "order": order, **fit.to_dict()})
            _emit_summary(args, f"{path}: beta={fit.beta:.4f} window={fit.fit_window} "
                                f"r2={fit.r_squared:.3f} plateau={fit.plateau_end}")
        report = {"kind": "decay", "rows": rows}
        orders = [r["order"] if r["order"] is not None else r["plateau_end"] for r in rows]
        if len(rows) >= 2 and all(o >= 1 for o in orders) and len(set(orders)) >= 2:
            expo = analysis.power_law_exponent(orders, [r["beta"] for r in rows])
            report["order_exponent"] = expo
            _emit_summary(args, f"beta ~ p^{expo:.3f}")
        inputs = args.inputs
    elif args.kind == "lifetimes":
        traj = formats.read_trajectory(args.input)
        tau_max = min(args.tau_max, traj.n_snapshots - 1)
        jobs = check_n_jobs(args.threads)
        seeds["shuffle"] = derive_seed(args.seed, "shuffle")
        curve = corr_curve(traj, tau_max, n_jobs=jobs)
        rep = analysis.lifetimes(traj, curve, args.shuffles, seeds["shuffle"], null_model=args.null,
                                 revival=args.revival, n_jobs=jobs)
        report = {"kind": "lifetimes", "input": args.input, "tau_max": tau_max, **rep.to_dict()}
        _emit_summary(args, rep.summary())
        inputs = [args.input]
    elif args.kind == "scaling":
        fit = analysis.peak_scaling(formats.read_curve(args.input), (args.k_min, args.k_max))
        report = {"kind": "scaling", "input": args.input, **fit.to_dict()}
        _emit_summary(args, fit.summary())
        inputs = [args.input]
    else:
        rows = []
        for path in args.inputs:
            ratio = analysis.offdiag_ratio(formats.read_matrix(path))
            rows.append({"input": path, "ratio": ratio})
            _emit_summary(args, f"{path}: offdiag_ratio={ratio:.4f}")
        report = {"kind": "offdiag", "rows": rows}
        inputs = args.inputs
    formats.write_json(report, args.out)
    return {"seeds": seeds, "inputs": inputs, "outputs": [args.out]}


def cmd_ingest(args) -> dict:
    source = sys.stdin.buffer if args.input == "-" else args.input
    events = ingest.parse_contacts(source, fmt=args.fmt, cols=args.cols, delimiter=args.delimiter)
    traj = ingest.bin_to_trajectory(events, ingest.BinningSpec(args.resolution, args.window))
    traj.metadata["source"] = args.input
    formats.write_trajectory(traj, args.out)
    return {"inputs": [args.input], "outputs": [args.out]}


COMMANDS = {"generate": cmd_generate, "correlate": cmd_correlate, "analyze": cmd_analyze, "ingest": cmd_ingest}

_NOT_PARAMS = {"command", "model", "kind", "config", "verbose", "out"}


def write_manifest(args, record: dict, started: float) -> None:
    if not _is_file(args.out):
        return
    params = {k: v for k, v in vars(args).items() if k not in _NOT_PARAMS}
    manifest = {
        "subcommand": _leaf_name(args),
        "params": params,
        "seeds": record.get("seeds", {}),
        "inputs": record.get("inputs", []),
        "outputs": record.get("outputs", []),
        "version": _version(),
        "duration_s": round(time.perf_counter() - started, 6),
    }
    formats.write_json(manifest, f"{args.out}.manifest.json")


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except NetcorrError as exc:
        print(f"netcorr: error category={exc.category} message={exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    started = time.perf_counter()
    try:
        record = COMMANDS[args.command](args)
        write_manifest(args, record, started)
    except NetcorrError as exc:
        print(f"netcorr: error category={exc.category} message={exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"netcorr: error category=io message={exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
