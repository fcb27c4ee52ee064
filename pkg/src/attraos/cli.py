"""Command-line front end: simulate, embed, lyapunov, fit, predict, eval,
bench-scan.

Exit codes: 0 success, 2 usage error (bad flag values), 3 data error (missing
or unusable input).  All numeric output is written at full double precision
(%.17g for CSV cells, round-trip exact floats in JSON).
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import chaos, forecaster
from .embedding import EmbeddingParams, delay_embed, fnn_profile, mi_profile, select_embedding
from .errors import AttraosError
from .lyapunov import mle_table
from .scan import ScanInput, blelloch_scan, sequential_scan
from .seeding import derive_seed


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path, data: np.ndarray, header: list, times=None) -> None:
    data = np.atleast_2d(np.asarray(data, dtype=float))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for i, row in enumerate(data):
            cells = [_fmt(times[i])] if times is not None else []
            cells.extend(_fmt(v) for v in row)
            fh.write(",".join(cells) + "\n")


def read_csv(path) -> np.ndarray:
    """Value columns of a headed CSV; a leading 't' column is dropped."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if header and header[0].strip().lower() == "t":
        data = data[:, 1:]
    if data.shape[1] == 0:
        raise AttraosError(f"no value columns in {path}")
    return data


def _json_out(obj) -> None:
    print(json.dumps(obj))


def cmd_simulate(args) -> int:
    if args.system == "lorenz63":
        params = chaos.Lorenz63Params(sigma=args.sigma, rho=args.rho, beta=args.beta)
        x0 = np.array([float(v) for v in args.x0.split(",")]) if args.x0 else np.array([1.0, 1.0, 1.0])
        traj = chaos.simulate_lorenz63(params, x0, args.dt, args.steps + args.transient)
    else:
        if args.dim < 4:
            raise UsageError("lorenz96 needs --dim >= 4")
        params = chaos.Lorenz96Params(forcing_f=args.f, dim=args.dim)
        if args.x0:
            x0 = np.array([float(v) for v in args.x0.split(",")])
        else:
            x0 = chaos.default_lorenz96_x0(params)
        traj = chaos.simulate_lorenz96(params, x0, args.dt, args.steps + args.transient)
    if args.transient:
        traj = chaos.drop_transient(traj, args.transient)
    data = traj.states
    if args.obs_dim is not None:
        omap = chaos.ObservationMap.random(args.obs_dim, data.shape[1], derive_seed(args.seed, 1))
        data = chaos.observe(traj, omap)
    times = args.dt * np.arange(data.shape[0])
    header = ["t"] + [f"v{i}" for i in range(data.shape[1])]
    write_csv(args.out, data, header, times=times)
    _json_out({"rows": int(data.shape[0]), "channels": int(data.shape[1]), "out": args.out})
    return 0


def _embedding_flags(args):
    if (args.m is None) != (args.tau is None):
        raise UsageError("--m and --tau must be given together")
    if args.m is not None:
        return EmbeddingParams(m=args.m, tau=args.tau)
    return None


def cmd_embed(args) -> int:
    data = read_csv(args.input)
    series = data if data.shape[1] > 1 else data[:, 0]
    params = _embedding_flags(args)
    if params is None:
        params = select_embedding(series, max_tau=args.max_tau, max_m=args.max_m,
                                  repeats=args.repeats)
    cols = []
    for c in range(data.shape[1]):
        cols.append(delay_embed(data[:, c], params).points)
    points = np.concatenate(cols, axis=1)
    header = [f"c{c}_d{d}" for c in range(data.shape[1]) for d in range(params.m)]
    write_csv(args.out_traj, points, header)
    ref = data[:, 0]
    max_tau = args.max_tau or int(np.clip(ref.size // 10, 10, 100))
    meta = {
        "m": params.m,
        "tau": params.tau,
        "mi_curve": mi_profile(ref, max_tau).tolist(),
        "fnn_fraction_curve": fnn_profile(ref, params.tau, args.max_m).tolist(),
    }
    if args.out_meta:
        with open(args.out_meta, "w", encoding="utf-8") as fh:
            json.dump(meta, fh)
    _json_out(meta)
    return 0


def cmd_lyapunov(args) -> int:
    data = read_csv(args.input)
    params = EmbeddingParams(m=args.m, tau=args.tau)
    fit_range = None
    if args.fit_start is not None and args.fit_end is not None:
        fit_range = (args.fit_start, args.fit_end)
    table = mle_table(data, params, horizon=args.horizon, theiler=args.theiler,
                      fit_range=fit_range)
    out = {
        "mle_per_channel": table["per_channel"].tolist(),
        "mean_mle": table["mean"],
        "divergence_curve": table["estimates"][0].divergence_curve.tolist(),
    }
    if args.dt is not None:
        out["mean_mle_per_time_unit"] = table["mean"] / args.dt
    _json_out(out)
    return 0


def cmd_fit(args) -> int:
    data = read_csv(args.input)
    embedding = _embedding_flags(args)
    config = forecaster.ForecasterConfig(
        window=args.window,
        horizon=args.horizon,
        embedding=embedding,
        patch_len=args.patch_len,
        poly_order=args.poly_order,
        ssm_variant=args.variant,
        theta=args.theta,
        levels=args.levels,
        m_modes=args.m_modes,
        ridge_lambda=args.ridge_lambda,
        evolution_strategy=args.strategy,
        n_clusters=args.clusters,
        max_train_windows=args.max_windows,
        seed=args.seed,
    )
    model = forecaster.fit(config, data)
    forecaster.save_model(model, args.out)
    _json_out(
        {
            "out": args.out,
            "channels": model.n_channels,
            "m": model.embedding.m,
            "tau": model.embedding.tau,
            "n_patches": model.shapes.n_patches,
        }
    )
    return 0


def cmd_predict(args) -> int:
    model = forecaster.load_model(args.model)
    context = read_csv(args.input)
    result = forecaster.predict(model, context)
    header = [f"v{i}" for i in range(result.predictions.shape[1])]
    write_csv(args.out, result.predictions, header)
    _json_out({"out": args.out, "horizon": int(result.predictions.shape[0])})
    return 0


def cmd_eval(args) -> int:
    pred = read_csv(args.pred)
    truth = read_csv(args.truth)
    metrics = forecaster.evaluate(pred, truth)
    _json_out({"mse": metrics["mse"], "mae": metrics["mae"]})
    return 0


def cmd_bench_scan(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    if args.d < 1:
        raise UsageError("--d must be >= 1")
    rng = np.random.default_rng(derive_seed(args.seed, 7))
    report = []
    for l in args.l_list:
        a = rng.uniform(0.1, 0.9, size=(l, args.n))
        bu = rng.standard_normal((l, args.d, args.n))
        inp = ScanInput(a_seq=a[:, None, :], bu_seq=bu)
        t0 = time.perf_counter()
        seq = sequential_scan(inp)
        t1 = time.perf_counter()
        tree = blelloch_scan(inp)
        t2 = time.perf_counter()
        dev = float(np.max(np.abs(seq - tree)))
        report.append(
            {
                "L": l,
                "sequential_s": t1 - t0,
                "tree_s": t2 - t1,
                "max_deviation": dev,
            }
        )
    _json_out({"bench": report})
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="attraos", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="integrate a reference chaotic system to CSV")
    s.add_argument("--system", choices=["lorenz63", "lorenz96"], required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--dt", type=float, default=0.01)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--sigma", type=float, default=10.0)
    s.add_argument("--rho", type=float, default=28.0)
    s.add_argument("--beta", type=float, default=8.0 / 3.0)
    s.add_argument("--f", type=float, default=8.0)
    s.add_argument("--dim", type=int, default=40)
    s.add_argument("--x0", type=str, default="")
    s.add_argument("--obs-dim", type=int, default=None)
    s.add_argument("--transient", type=int, default=0)
    s.add_argument("--out", type=str, required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("embed", help="delay-embed a series CSV")
    s.add_argument("--input", type=str, required=True)
    s.add_argument("--m", type=int, default=None)
    s.add_argument("--tau", type=int, default=None)
    s.add_argument("--max-tau", type=int, default=None)
    s.add_argument("--max-m", type=int, default=8)
    s.add_argument("--repeats", type=int, default=1)
    s.add_argument("--out-traj", type=str, required=True)
    s.add_argument("--out-meta", type=str, default="")
    s.set_defaults(func=cmd_embed)

    s = sub.add_parser("lyapunov", help="maximal Lyapunov exponent of a series CSV")
    s.add_argument("--input", type=str, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--tau", type=int, required=True)
    s.add_argument("--horizon", type=int, default=200)
    s.add_argument("--theiler", type=int, default=None)
    s.add_argument("--fit-start", type=int, default=None)
    s.add_argument("--fit-end", type=int, default=None)
    s.add_argument("--dt", type=float, default=None)
    s.set_defaults(func=cmd_lyapunov)

    s = sub.add_parser("fit", help="fit a forecaster on a series CSV")
    s.add_argument("--input", type=str, required=True)
    s.add_argument("--window", type=int, required=True)
    s.add_argument("--horizon", type=int, required=True)
    s.add_argument("--m", type=int, default=None)
    s.add_argument("--tau", type=int, default=None)
    s.add_argument("--patch-len", type=int, default=8)
    s.add_argument("--poly-order", type=int, default=8)
    s.add_argument("--variant", choices=["legt_full", "legs_diag", "diag_neg1"],
                   default="diag_neg1")
    s.add_argument("--theta", type=float, default=4.0)
    s.add_argument("--levels", type=int, default=2)
    s.add_argument("--m-modes", type=int, default=16)
    s.add_argument("--ridge-lambda", type=float, default=1e-3)
    s.add_argument("--strategy", choices=["frequency", "direct", "hopfield"],
                   default="frequency")
    s.add_argument("--clusters", type=int, default=8)
    s.add_argument("--max-windows", type=int, default=1024)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", type=str, required=True)
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("predict", help="forecast from a saved model JSON")
    s.add_argument("--model", type=str, required=True)
    s.add_argument("--input", type=str, required=True)
    s.add_argument("--out", type=str, required=True)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("eval", help="MSE/MAE between prediction and truth CSVs")
    s.add_argument("--pred", type=str, required=True)
    s.add_argument("--truth", type=str, required=True)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("bench-scan", help="sequential vs tree scan timing report")
    s.add_argument("--l-list", type=lambda v: [int(x) for x in v.split(",")],
                   default=[64, 256, 1024])
    s.add_argument("--n", type=int, default=8)
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_bench_scan)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = 2
    except (AttraosError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = 3
    if argv is None:
        sys.exit(code)
    return code
