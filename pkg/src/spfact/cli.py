"""Command-line front end: synthetic instances, completion runs, benchmarks.

Subcommands
    synth           write a synthetic instance to the fixture text format
    complete        run the solver over a (p, lambda, init-rank, seed) grid
    bench           predefined seeded suites: table1, ptrend, movielens
    movielens-prep  validate/summarize a ratings file, optionally split it

Runs are emitted as CSV with a fixed column order (see CSV_COLUMNS), one
row per configuration, plus an optional JSON mirror that also carries
per-run error messages. Output is deterministic for fixed inputs and
seeds; wall_ms is the one exception unless --no-timing zeroes it.

A 'key = value' config file (--config) supplies flag defaults; explicit
flags win. The SPFACT_OUTDIR environment variable sets the default
output directory.
"""

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from .datasets import (
    SynthSpec,
    gen_synthetic,
    load_fixture,
    nmae,
    parse_movielens,
    relative_error,
    save_fixture,
    split,
)
from .solver import SolverConfig, solve

CSV_COLUMNS = [
    "suite",
    "m",
    "n",
    "true_rank",
    "missing",
    "snr_db",
    "p",
    "lambda",
    "init_rank",
    "escape",
    "seed",
    "iters",
    "escapes",
    "final_rank",
    "objective",
    "re",
    "nmae",
    "wall_ms",
]

TABLE1_MULTIPLIERS = (0.5, 0.75, 1.0, 1.25, 1.5)
MOVIELENS_INIT_RANKS = (10, 20, 30)

# Desk-scale regularization defaults; the suites accept --lam/--lams to
# override. There is no universally good value, these are tuned for the
# default suite geometries.
TABLE1_LAM = 100.0
PTREND_LAMS = (12.5, 50.0, 200.0, 800.0, 3200.0)
MOVIELENS_LAM = 15.0


def _outdir(value):
    return value if value is not None else os.environ.get("SPFACT_OUTDIR", ".")


def _float_list(text):
    if isinstance(text, (int, float)):
        return [float(text)]
    return [float(t) for t in text.split(",") if t]


def _fmt(x):
    if isinstance(x, float):
        return repr(float(x))
    return str(x)


def _write_csv(path, runs):
    lines = [",".join(CSV_COLUMNS)]
    lines += [",".join(_fmt(row[c]) for c in CSV_COLUMNS) for row, _ in runs]
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _write_json(path, runs):
    mirror = []
    for row, err in runs:
        entry = dict(row)
        entry["error"] = err
        mirror.append(entry)
    with open(path, "w") as fh:
        json.dump(mirror, fh, indent=2)
        fh.write("\n")


def _report_failures(runs):
    failed = [(row, err) for row, err in runs if err]
    for row, err in failed:
        print(
            f"run failed (p={row['p']}, lambda={row['lambda']}, "
            f"init_rank={row['init_rank']}, seed={row['seed']}): {err}",
            file=sys.stderr,
        )
    return 1 if failed else 0


def _run_one(suite, y_train, cfg, meta, no_timing, re_fn=None, nmae_fn=None):
    """Solve one configuration and assemble a full RunRecord row."""
    row = dict(meta)
    row.update(
        suite=suite,
        p=cfg.p,
        init_rank=cfg.init_width,
        escape="on" if cfg.escape_enabled else "off",
        seed=cfg.seed,
    )
    row["lambda"] = cfg.lam
    t0 = time.perf_counter()
    error = ""
    try:
        F, report = solve(y_train, cfg)
        row.update(
            iters=report.iters,
            escapes=report.escapes,
            final_rank=report.final_width,
            objective=float(report.objective_trace[-1]),
            re=re_fn(F) if re_fn else float("nan"),
            nmae=nmae_fn(F) if nmae_fn else float("nan"),
        )
    except Exception as exc:  # noqa: BLE001 - finish the remaining runs
        error = f"{type(exc).__name__}: {exc}"
        row.update(
            iters=0,
            escapes=0,
            final_rank=0,
            objective=float("nan"),
            re=float("nan"),
            nmae=float("nan"),
        )
    row["wall_ms"] = 0.0 if no_timing else (time.perf_counter() - t0) * 1000.0
    return row, error


def _solver_config(args, p, lam, init_rank, seed, escape_on):
    return SolverConfig(
        p=p,
        lam=lam,
        init_width=init_rank,
        prune_thres=args.prune_thres,
        max_iter=args.max_iter,
        conv_tol=args.conv_tol,
        escape_enabled=escape_on,
        escape_check_max=args.escape_budget,
        seed=seed,
    )


def _add_solver_flags(sp):
    sp.add_argument("--prune-thres", type=float, default=1e-5)
    sp.add_argument("--max-iter", type=int, default=1000)
    sp.add_argument("--conv-tol", type=float, default=1e-4)
    sp.add_argument("--escape-budget", type=int, default=None)
    sp.add_argument("--no-timing", action="store_true", help="write wall_ms as 0")


# ----------------------------------------------------------------------
# synth


def cmd_synth(args, parser):
    if not 0.0 <= args.missing < 1.0:
        parser.error("--missing must lie in [0, 1)")
    snr = math.inf if args.snr is None else args.snr
    spec = SynthSpec(args.m, args.n, args.rank, snr, args.missing, args.seed)
    gt = gen_synthetic(spec)
    out = args.out
    if out is None:
        name = (
            f"synth_m{args.m}_n{args.n}_r{args.rank}_snr{snr}"
            f"_miss{args.missing}_seed{args.seed}.txt"
        )
        out = os.path.join(_outdir(None), name)
    save_fixture(out, spec, gt.y_obs)
    print(
        f"wrote {out}: {args.m}x{args.n} rank {args.rank}, "
        f"{gt.y_obs.nnz} observed entries ({gt.y_obs.nnz / (args.m * args.n):.1%}), "
        f"snr {snr} dB, seed {args.seed}"
    )
    return 0


# ----------------------------------------------------------------------
# complete


def _parse_init_ranks(tokens, true_rank, parser):
    if isinstance(tokens, int):
        return [tokens]
    ranks = []
    for tok in tokens.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok.endswith("x"):
            if true_rank < 1:
                parser.error(
                    f"init rank {tok!r} is a multiplier but the input has no known rank"
                )
            ranks.append(max(1, round(float(tok[:-1]) * true_rank)))
        else:
            ranks.append(int(tok))
    if not ranks:
        parser.error("no init ranks given")
    return ranks


def _load_input(path, fmt):
    """Returns (kind, obs, truth, true_rank)."""
    if fmt in ("auto", "fixture"):
        try:
            spec, obs, truth = load_fixture(path)
            return "fixture", obs, truth, (spec.rank if spec else 0)
        except (ValueError, OSError):
            if fmt == "fixture":
                raise
    obs = parse_movielens(path)
    return "movielens", obs, None, 0


def cmd_complete(args, parser):
    kind, obs, truth, true_rank = _load_input(args.input, args.format)
    escape_modes = {"on": (True,), "off": (False,), "both": (True, False)}[args.escape]
    ps = _float_list(args.p)
    lams = _float_list(args.lam)
    init_ranks = _parse_init_ranks(args.init_rank, true_rank, parser)
    combos = sorted(
        (ir, p, lam, esc, seed)
        for ir in init_ranks
        for p in ps
        for lam in lams
        for esc in escape_modes
        for seed in range(args.seeds)
    )

    runs = []
    for ir, p, lam, esc, seed in combos:
        if kind == "fixture":
            y_train = obs
            meta = dict(
                m=obs.m,
                n=obs.n,
                true_rank=true_rank,
                missing=1.0 - obs.nnz / (obs.m * obs.n),
                snr_db=float("nan"),
            )
            re_fn = None
            if truth is not None and truth.test_mask[0].size:
                gt = truth
                re_fn = lambda F: relative_error(F, gt.x_true, gt.test_mask)
            nmae_fn = None
        else:
            ms = split(obs, args.train_frac, seed)
            y_train = ms.train
            meta = dict(
                m=obs.m,
                n=obs.n,
                true_rank=0,
                missing=1.0 - ms.train.nnz / (obs.m * obs.n),
                snr_db=float("nan"),
            )
            re_fn = None
            test = ms.test
            nmae_fn = lambda F: nmae(F, test, args.rmin, args.rmax)
        cfg = _solver_config(args, p, lam, ir, seed, esc)
        runs.append(
            _run_one("complete", y_train, cfg, meta, args.no_timing, re_fn, nmae_fn)
        )
    _write_csv(args.out, runs)
    if args.json:
        _write_json(args.json, runs)
    return _report_failures(runs)


# ----------------------------------------------------------------------
# bench


def _median(xs):
    return float(np.median(np.asarray(xs)))


def _bench_table1(args):
    ps = _float_list(args.p)
    lam = args.lam if args.lam is not None else TABLE1_LAM
    out_dir = _outdir(args.out_dir)
    os.makedirs(out_dir, exist_ok=True)

    runs = []
    for mult in TABLE1_MULTIPLIERS:
        ir = max(1, round(mult * args.rank))
        for p in ps:
            for esc in (True, False):
                for seed in range(args.seeds):
                    spec = SynthSpec(
                        args.m, args.n, args.rank, args.snr, args.missing, seed
                    )
                    gt = gen_synthetic(spec)
                    meta = dict(
                        m=args.m,
                        n=args.n,
                        true_rank=args.rank,
                        missing=args.missing,
                        snr_db=args.snr,
                    )
                    cfg = _solver_config(args, p, lam, ir, seed, esc)
                    re_fn = lambda F: relative_error(F, gt.x_true, gt.test_mask)
                    runs.append(
                        _run_one("table1", gt.y_obs, cfg, meta, args.no_timing, re_fn)
                    )
    _write_csv(os.path.join(out_dir, "table1_runs.csv"), runs)

    # summary axes: one row per initial-rank multiplier, one column pair
    # (median RE, median rank) per escape-mode x p combination
    rows = [row for row, _ in runs]
    combos = [(p, esc) for p in ps for esc in ("on", "off")]
    header = ["init_mult"]
    for p, esc in combos:
        header += [f"re_p{p:g}_esc_{esc}", f"rank_p{p:g}_esc_{esc}"]
    summary = [",".join(header)]
    print("init_mult  " + "  ".join(f"p={p:g}/{esc}" for p, esc in combos))
    for mult in TABLE1_MULTIPLIERS:
        ir = max(1, round(mult * args.rank))
        cells = [str(mult)]
        shown = []
        for p, esc in combos:
            sel = [
                r
                for r in rows
                if r["init_rank"] == ir and r["p"] == p and r["escape"] == esc
            ]
            re_med = _median([r["re"] for r in sel])
            rank_med = _median([r["final_rank"] for r in sel])
            cells += [repr(re_med), repr(rank_med)]
            shown.append(f"{re_med:.4f}/r{rank_med:g}")
        summary.append(",".join(cells))
        print(f"{mult:<10} " + "  ".join(shown))
    with open(os.path.join(out_dir, "table1_summary.csv"), "w") as fh:
        fh.write("\n".join(summary) + "\n")
    print(f"wrote {out_dir}/table1_runs.csv and table1_summary.csv")
    return _report_failures(runs)


def _bench_ptrend(args):
    lams = _float_list(args.lams) if args.lams else list(PTREND_LAMS)
    ir = args.init_rank if args.init_rank else round(1.5 * args.rank)
    ps = _float_list(args.p)
    out_dir = _outdir(args.out_dir)
    os.makedirs(out_dir, exist_ok=True)

    runs = []
    for p in ps:
        for lam in lams:
            for seed in range(args.seeds):
                spec = SynthSpec(
                    args.m, args.n, args.rank, args.snr, args.missing, seed
                )
                gt = gen_synthetic(spec)
                meta = dict(
                    m=args.m,
                    n=args.n,
                    true_rank=args.rank,
                    missing=args.missing,
                    snr_db=args.snr,
                )
                cfg = _solver_config(args, p, lam, ir, seed, True)
                re_fn = lambda F: relative_error(F, gt.x_true, gt.test_mask)
                runs.append(
                    _run_one("ptrend", gt.y_obs, cfg, meta, args.no_timing, re_fn)
                )
    _write_csv(os.path.join(out_dir, "ptrend_runs.csv"), runs)

    # summary: one RE column per p, each taken at that p's best lambda
    rows = [row for row, _ in runs]
    best = {}
    for p in ps:
        for lam in lams:
            sel = [r for r in rows if r["p"] == p and r["lambda"] == lam]
            re_med = _median([r["re"] for r in sel])
            if p not in best or re_med < best[p][1]:
                best[p] = (lam, re_med)
    summary = [
        "metric," + ",".join(f"p={p:g}" for p in ps),
        "re_median," + ",".join(repr(best[p][1]) for p in ps),
        "best_lambda," + ",".join(repr(best[p][0]) for p in ps),
    ]
    print("        " + "  ".join(f"p={p:<10g}" for p in ps))
    print("re      " + "  ".join(f"{best[p][1]:<12.4f}" for p in ps))
    print("lambda  " + "  ".join(f"{best[p][0]:<12g}" for p in ps))
    with open(os.path.join(out_dir, "ptrend_summary.csv"), "w") as fh:
        fh.write("\n".join(summary) + "\n")
    print(f"wrote {out_dir}/ptrend_runs.csv and ptrend_summary.csv")
    return _report_failures(runs)


def _bench_movielens(args, parser):
    if not args.data:
        parser.error(
            "the movielens suite needs --data pointing to a ratings file "
            "(tab-separated 'user item rating timestamp' lines, e.g. ml-100k/u.data)"
        )
    obs = parse_movielens(args.data)
    lam = args.lam if args.lam is not None else MOVIELENS_LAM
    p = _float_list(args.p)[0]
    out_dir = _outdir(args.out_dir)
    os.makedirs(out_dir, exist_ok=True)

    runs = []
    for ir in MOVIELENS_INIT_RANKS:
        for seed in range(args.seeds):
            ms = split(obs, args.train_frac, seed)
            meta = dict(
                m=obs.m,
                n=obs.n,
                true_rank=0,
                missing=1.0 - ms.train.nnz / (obs.m * obs.n),
                snr_db=float("nan"),
            )
            cfg = _solver_config(args, p, lam, ir, seed, True)
            test = ms.test
            nmae_fn = lambda F: nmae(F, test, args.rmin, args.rmax)
            runs.append(
                _run_one("movielens", ms.train, cfg, meta, args.no_timing, None, nmae_fn)
            )
    _write_csv(os.path.join(out_dir, "movielens_runs.csv"), runs)

    rows = [row for row, _ in runs]
    summary = ["init_rank,nmae_median"]
    print("init_rank  median_nmae")
    for ir in MOVIELENS_INIT_RANKS:
        sel = [r for r in rows if r["init_rank"] == ir]
        med = _median([r["nmae"] for r in sel])
        summary.append(f"{ir},{med!r}")
        print(f"{ir:<10} {med:.4f}")
    with open(os.path.join(out_dir, "movielens_summary.csv"), "w") as fh:
        fh.write("\n".join(summary) + "\n")
    print(f"wrote {out_dir}/movielens_runs.csv and movielens_summary.csv")
    return _report_failures(runs)


def cmd_bench(args, parser):
    if args.suite == "table1":
        return _bench_table1(args)
    if args.suite == "ptrend":
        return _bench_ptrend(args)
    return _bench_movielens(args, parser)


# ----------------------------------------------------------------------
# movielens-prep


def cmd_movielens_prep(args, parser):
    obs = parse_movielens(args.data)
    density = obs.nnz / (obs.m * obs.n)
    print(
        f"{args.data}: {obs.nnz} ratings, {obs.m} users x {obs.n} items "
        f"(density {density:.2%}), values in [{obs.val.min():g}, {obs.val.max():g}]"
    )
    if args.split_out:
        os.makedirs(args.split_out, exist_ok=True)
        ms = split(obs, args.train_frac, args.seed)
        for name, part in (("train", ms.train), ("test", ms.test)):
            path = os.path.join(args.split_out, f"{name}.txt")
            with open(path, "w") as fh:
                fh.write(f"{obs.m} {obs.n} 0 nan nan {args.seed}\n")
                for i, j, v in zip(part.row, part.col, part.val):
                    fh.write(f"{i} {j} {float(v)!r}\n")
            print(f"wrote {path}: {part.nnz} triplets")
    return 0


# ----------------------------------------------------------------------
# parser plumbing


def _read_config(path):
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _typed_config(parser, config):
    """Coerce config strings using the declared type of the matching flag."""
    actions = {}
    stack = [parser]
    while stack:
        p = stack.pop()
        for a in p._actions:
            if isinstance(a, argparse._SubParsersAction):
                stack.extend(a.choices.values())
            else:
                actions.setdefault(a.dest, a)
    typed = {}
    for key, raw in config.items():
        action = actions.get(key)
        if action is None:
            raise ValueError(f"unknown config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            typed[key] = raw.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            typed[key] = action.type(raw)
        else:
            typed[key] = raw
    return typed


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spfact",
        description="Schatten-p variational factorization: completion runs and benchmarks",
    )
    parser.add_argument(
        "--config",
        default=None,
        help="key = value file of flag defaults (explicit flags still win)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="write a synthetic fixture instance")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--rank", type=int, required=True)
    sp.add_argument("--snr", type=float, default=None, help="SNR in dB; omit for noiseless")
    sp.add_argument("--missing", type=float, default=0.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None, help="output path (default under SPFACT_OUTDIR)")

    sp = sub.add_parser("complete", help="run the solver over a parameter grid")
    sp.add_argument("--input", required=True, help="fixture file or MovieLens ratings file")
    sp.add_argument("--format", choices=("auto", "fixture", "movielens"), default="auto")
    sp.add_argument("--p", default="0.5", help="comma-separated exponents")
    sp.add_argument("--lam", default="1.0", help="comma-separated regularization weights")
    sp.add_argument(
        "--init-rank",
        default="10",
        help="comma-separated widths; '0.5x' style multiplies the known true rank",
    )
    sp.add_argument("--escape", choices=("on", "off", "both"), default="on")
    sp.add_argument("--seeds", type=int, default=1, help="number of seeds (0..N-1)")
    sp.add_argument("--train-frac", type=float, default=0.5, help="ratings-only: train split")
    sp.add_argument("--rmin", type=float, default=1.0)
    sp.add_argument("--rmax", type=float, default=5.0)
    sp.add_argument("--out", default=None, help="CSV path (default: stdout)")
    sp.add_argument("--json", default=None, help="optional JSON mirror path")
    _add_solver_flags(sp)

    sp = sub.add_parser("bench", help="run a predefined benchmark suite")
    sp.add_argument("suite", choices=("table1", "ptrend", "movielens"))
    sp.add_argument("--m", type=int, default=200)
    sp.add_argument("--n", type=int, default=200)
    sp.add_argument("--rank", type=int, default=None)
    sp.add_argument("--missing", type=float, default=None)
    sp.add_argument("--snr", type=float, default=None)
    sp.add_argument("--seeds", type=int, default=5)
    sp.add_argument("--p", default=None, help="comma-separated exponents")
    sp.add_argument("--lam", type=float, default=None)
    sp.add_argument("--lams", default=None, help="ptrend: comma-separated sweep values")
    sp.add_argument("--init-rank", type=int, default=None, help="ptrend: solver width")
    sp.add_argument("--data", default=None, help="movielens: ratings file path")
    sp.add_argument("--train-frac", type=float, default=0.5)
    sp.add_argument("--rmin", type=float, default=1.0)
    sp.add_argument("--rmax", type=float, default=5.0)
    sp.add_argument("--out-dir", default=None)
    _add_solver_flags(sp)

    sp = sub.add_parser(
        "movielens-prep", help="validate and optionally split a ratings file"
    )
    sp.add_argument("--data", required=True)
    sp.add_argument("--train-frac", type=float, default=0.5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--split-out", default=None, help="directory for train/test files")

    return parser


_BENCH_DEFAULTS = {
    "table1": {"rank": 10, "missing": 0.4, "snr": 10.0, "p": "0.5,0.3"},
    "ptrend": {"rank": 20, "missing": 0.5, "snr": 8.0, "p": "0.3,0.5,0.7,1.0"},
    "movielens": {"rank": 1, "missing": 0.0, "snr": 0.0, "p": "0.5"},
}


def _apply_defaults(parser, typed):
    # subparsers parse into a fresh namespace, so defaults must be pushed
    # onto every subparser, not just the root
    stack = [parser]
    while stack:
        p = stack.pop()
        p.set_defaults(**typed)
        for a in p._actions:
            if isinstance(a, argparse._SubParsersAction):
                stack.extend(a.choices.values())


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.config:
        try:
            config = _typed_config(parser, _read_config(args.config))
        except (ValueError, OSError) as exc:
            parser.error(str(exc))
        parser = build_parser()
        _apply_defaults(parser, config)
        args = parser.parse_args(argv)

    if args.command == "bench":
        defaults = _BENCH_DEFAULTS[args.suite]
        if args.rank is None:
            args.rank = defaults["rank"]
        if args.missing is None:
            args.missing = defaults["missing"]
        if args.snr is None:
            args.snr = defaults["snr"]
        if args.p is None:
            args.p = defaults["p"]

    try:
        if args.command == "synth":
            return cmd_synth(args, parser)
        if args.command == "complete":
            return cmd_complete(args, parser)
        if args.command == "bench":
            return cmd_bench(args, parser)
        return cmd_movielens_prep(args, parser)
    except SystemExit:
        raise
    except Exception as exc:  # noqa: BLE001 - top-level CLI failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
