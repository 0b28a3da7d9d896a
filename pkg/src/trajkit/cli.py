"""Command-line front end.

One binary, one subcommand per workflow: synth, embed, cluster, matrix,
retrieve, sweep and bench. Every command takes a global --seed and writes its
artifacts into --out: delimited output plus a JSON metadata sidecar, and a
rendered PNG figure unless --no-plots is given. Partial outputs are removed
when a command fails.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import bench as bench_mod
from . import plots
from .baselines import pairwise_matrix, write_matrix_csv
from .data import (
    TrajectoryDataset,
    augment_order_dimension,
    load_dataset,
    min_max_normalize,
    save_dataset,
)
from .dkernel import GDKParams, embed_sets, gdk_fit_nystrom, median_heuristic_gamma
from .evaluation import ari, nmi, precision_at_k, run_sampling_sweep, similarity_matrix
from .ikernel import IKParams, IsolationKernelModel
from .synth import generate_synthetic, parse_synth_config
from .tidkc import TidkcParams, cluster, embed_level1


class _Outputs:
    """Tracks files written by one command so failures can clean up."""

    def __init__(self, outdir: str):
        self.outdir = outdir
        self.paths: list[str] = []
        os.makedirs(outdir, exist_ok=True)

    def path(self, name: str) -> str:
        p = os.path.join(self.outdir, name)
        self.paths.append(p)
        return p

    def names(self) -> str:
        return " ".join(os.path.basename(p) for p in self.paths if os.path.exists(p))

    def cleanup(self) -> None:
        for p in self.paths:
            if os.path.exists(p):
                os.remove(p)


def _load(args) -> TrajectoryDataset:
    fmt = args.format
    if fmt == "auto":
        fmt = "csv_long" if str(args.input).endswith(".csv") else "jsonl"
    return load_dataset(args.input, format=fmt)


def _preprocess(ds: TrajectoryDataset, args) -> TrajectoryDataset:
    if not getattr(args, "no_normalize", False):
        ds = min_max_normalize(ds)
    weight = getattr(args, "order_weight", None)
    if weight is not None:
        ds = augment_order_dimension(ds, weight=weight)
    return ds


def _write_json(obj: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _write_labels_csv(ids, labels, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("id,label\n")
        for tid, lab in zip(ids, labels):
            fh.write(f"{tid},{int(lab)}\n")


def _write_embeddings_csv(ids, V: np.ndarray, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("id," + ",".join(f"f{j}" for j in range(V.shape[1])) + "\n")
        for tid, row in zip(ids, V):
            fh.write(tid + "," + ",".join(repr(float(v)) for v in row) + "\n")


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def _tidkc_params(args) -> TidkcParams:
    kernel2 = "idk" if args.algo == "tidkc" else "gdk_nystrom"
    return TidkcParams(
        k=args.k,
        rho=args.rho,
        tau_floor=args.tau_floor,
        level1=IKParams(psi=args.psi1, t=args.t1),
        level2=IKParams(psi=args.psi2, t=args.t2),
        seed_subset_s=args.subset_s,
        knn_for_contrast=args.knn,
        kernel1="idk" if args.kernel1 == "idk" else "gdk_nystrom",
        kernel2=kernel2,
        rng_seed=args.seed,
    )


# ---------------------------------------------------------------- commands


def cmd_synth(args, out: _Outputs) -> str:
    spec = parse_synth_config(args.config)
    ds = generate_synthetic(spec, rng_seed=args.seed)
    save_dataset(ds, out.path("dataset.jsonl"))
    _write_json(
        {
            "command": "synth",
            "seed": args.seed,
            "n_trajectories": len(ds),
            "n_labels": spec.n_labels,
            "dims": ds.dims,
            "pooled_points": ds.pooled_point_count,
        },
        out.path("synth_meta.json"),
    )
    if not args.no_plots:
        plots.plot_dataset(ds, out.path("dataset.png"), title="synthetic dataset")
    return f"synth: n={len(ds)} labels={spec.n_labels}"


def cmd_embed(args, out: _Outputs) -> str:
    ds = _preprocess(_load(args), args)
    meta: dict = {
        "command": "embed",
        "kernel": args.kernel,
        "seed": args.seed,
        "n_trajectories": len(ds),
        "dims": ds.dims,
        "normalized": not args.no_normalize,
        "order_weight": args.order_weight,
    }
    pooled = ds.pooled_points()
    if args.kernel == "idk":
        model = IsolationKernelModel.fit(pooled, IKParams(psi=args.psi, t=args.t, rng_seed=args.seed))
        V = embed_sets(model, ds.point_sets())
        model.to_json(out.path("model.json"))
        meta["params"] = {"psi": args.psi, "t": args.t}
    else:
        m = min(args.nystrom_m, len(pooled))
        gamma = args.gamma if args.gamma is not None else median_heuristic_gamma(pooled, rng_seed=args.seed)
        params = GDKParams(gamma=gamma, nystrom_samples=m, nystrom_rank=min(args.nystrom_l, m), rng_seed=args.seed)
        nmap = gdk_fit_nystrom(pooled, params)
        V = embed_sets(nmap, ds.point_sets())
        np.save(out.path("model_landmarks.npy"), nmap.landmarks)
        np.save(out.path("model_weights.npy"), nmap.weights)
        _write_json(
            {"kind": "gdk_nystrom", "gamma": gamma, "m": m, "rank": nmap.feature_dim, "rng_seed": args.seed},
            out.path("model.json"),
        )
        meta["params"] = {"gamma": gamma, "m": m, "rank": nmap.feature_dim}
    _write_embeddings_csv(ds.ids, V, out.path("embeddings.csv"))
    np.save(out.path("embeddings.npy"), V)
    _write_json(meta, out.path("embed_meta.json"))
    return f"embed: n={len(ds)} kernel={args.kernel} dim={V.shape[1]}"


def cmd_cluster(args, out: _Outputs) -> str:
    raw = _load(args)
    ds = _preprocess(raw, args)
    params = _tidkc_params(args)
    result = cluster(ds, params)
    _write_labels_csv(ds.ids, result.labels, out.path("labels.csv"))
    meta = {
        "command": "cluster",
        "algo": args.algo,
        "seed": args.seed,
        "n_trajectories": len(ds),
        "params": params.to_dict(),
        "normalized": not args.no_normalize,
        "order_weight": args.order_weight,
        "objective": result.objective,
        "iterations": result.iterations,
        "tau0": result.tau0,
        "tau_history": [{"tau": t, "assigned": a} for t, a in result.history],
        "seed_indices": list(result.seed_indices),
        "timings": result.timings,
    }
    if args.eval:
        truth = raw.labels()
        meta["nmi"] = nmi(truth, result.labels)
        meta["ari"] = ari(truth, result.labels)
    _write_json(meta, out.path("run.json"))
    if not args.no_plots:
        plots.plot_dataset(raw, out.path("clusters.png"), labels=result.labels, title=args.algo)
    score = f" nmi={meta['nmi']:.3f}" if args.eval else ""
    return f"cluster: n={len(ds)} k={args.k} algo={args.algo} iterations={result.iterations}{score}"


def _matrix_for(ds: TrajectoryDataset, args):
    measure = {"idk": "idk_distance", "gdk": "gdk_distance"}.get(args.measure, args.measure)
    ik = IKParams(psi=args.psi, t=args.t, rng_seed=args.seed) if measure == "idk_distance" else None
    gdk = None
    if measure == "gdk_distance" and args.gamma is not None:
        m = min(args.nystrom_m, ds.pooled_point_count)
        gdk = GDKParams(gamma=args.gamma, nystrom_samples=m, nystrom_rank=min(args.nystrom_l, m), rng_seed=args.seed)
    return (
        pairwise_matrix(
            ds,
            measure,
            band=args.band,
            ik_params=ik,
            gdk_params=gdk,
            rng_seed=args.seed,
            n_threads=args.threads,
        ),
        measure,
    )


def cmd_matrix(args, out: _Outputs) -> str:
    ds = _preprocess(_load(args), args)
    dm, measure = _matrix_for(ds, args)
    params = {"seed": args.seed, "threads": args.threads, "normalized": not args.no_normalize}
    if measure == "dtw":
        params["band"] = args.band
    if measure == "idk_distance":
        params.update({"psi": args.psi, "t": args.t})
    out.path("matrix.meta.json")  # sidecar registered for cleanup before writing
    write_matrix_csv(dm, out.path("matrix.csv"), measure=measure, params=params)
    if not args.no_plots:
        plots.plot_distance_matrix(dm.values, out.path("matrix.png"), title=measure)
    return f"matrix: n={len(dm)} measure={measure}"


def cmd_retrieve(args, out: _Outputs) -> str:
    raw = _load(args)
    if not raw.has_labels():
        raise ValueError("retrieval evaluation requires a labeled dataset")
    ds = _preprocess(raw, args)
    ks = _int_list(args.ks)
    labels = raw.labels()
    if args.measure in ("idk", "gdk"):
        pooled = ds.pooled_points()
        if args.measure == "idk":
            model = IsolationKernelModel.fit(pooled, IKParams(psi=args.psi, t=args.t, rng_seed=args.seed))
            V = embed_sets(model, ds.point_sets())
        else:
            m = min(args.nystrom_m, len(pooled))
            gamma = args.gamma if args.gamma is not None else median_heuristic_gamma(pooled, rng_seed=args.seed)
            nmap = gdk_fit_nystrom(
                pooled, GDKParams(gamma=gamma, nystrom_samples=m, nystrom_rank=min(args.nystrom_l, m), rng_seed=args.seed)
            )
            V = embed_sets(nmap, ds.point_sets())
        curve = precision_at_k(similarity_matrix(V), labels, ks, higher_is_better=True)
    else:
        dm, _ = _matrix_for(ds, args)
        curve = precision_at_k(dm.values, labels, ks, higher_is_better=False)
    curve.write_csv(out.path("precision.csv"))
    _write_json(
        {
            "command": "retrieve",
            "measure": args.measure,
            "seed": args.seed,
            "params": {"psi": args.psi, "t": args.t, "gamma": args.gamma, "band": args.band},
            "ks": list(curve.ks),
            "precision": [float(p) for p in curve.precision],
        },
        out.path("precision_meta.json"),
    )
    if not args.no_plots:
        plots.plot_precision_curve(curve.ks, curve.precision, out.path("precision.png"), label=args.measure)
    return f"retrieve: measure={args.measure} precision@{curve.ks[0]}={curve.precision[0]:.3f}"


def cmd_sweep(args, out: _Outputs) -> str:
    ds = _preprocess(_load(args), args)
    selection = "all" if args.selection == "all" else "half_per_cluster"
    rows = run_sampling_sweep(
        ds, _float_list(args.rates), selection, _tidkc_params(args), rng_seed=args.seed
    )
    with open(out.path("sweep.csv"), "w", encoding="utf-8") as fh:
        fh.write("rate,nmi,ari\n")
        for row in rows:
            fh.write(f"{row['rate']!r},{row['nmi']!r},{row['ari']!r}\n")
    _write_json(
        {"command": "sweep", "selection": args.selection, "seed": args.seed, "rows": rows},
        out.path("sweep_meta.json"),
    )
    if not args.no_plots:
        plots.plot_sweep(rows, out.path("sweep.png"))
    worst = min(r["nmi"] for r in rows)
    return f"sweep: rates={args.rates} selection={args.selection} worst_nmi={worst:.3f}"


def cmd_bench(args, out: _Outputs) -> str:
    base = _preprocess(_load(args), args)
    tidkc_params = None
    if args.target in ("tidkc", "tgdkc"):
        args.algo = args.target
        tidkc_params = _tidkc_params(args)
    records = bench_mod.scaleup_run(
        base,
        _int_list(args.multipliers),
        args.target,
        reps=args.reps,
        rng_seed=args.seed,
        tidkc_params=tidkc_params,
    )
    bench_mod.write_timings_csv(records, out.path("timings.csv"))
    _write_json(
        {
            "command": "bench",
            "target": args.target,
            "multipliers": _int_list(args.multipliers),
            "reps": args.reps,
            "seed": args.seed,
            "threads": args.threads,
            "base_n": len(base),
        },
        out.path("bench_meta.json"),
    )
    if not args.no_plots:
        plots.plot_scaleup(records, out.path("scaleup.png"))
    totals = [r for r in records if r.phase == "total"]
    return f"bench: target={args.target} sizes={[r.n for r in totals]}"


# ---------------------------------------------------------------- parser


def _add_common(p: argparse.ArgumentParser, with_input: bool = True) -> None:
    if with_input:
        p.add_argument("-i", "--input", required=True, help="input dataset file")
        p.add_argument(
            "--format", choices=("auto", "jsonl", "csv_long"), default="auto",
            help="input format (auto keys off the file extension)",
        )
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0, help="global RNG seed")
    p.add_argument("--threads", type=int, default=1, help="worker threads for pairwise measures")
    p.add_argument("--no-plots", action="store_true", help="skip PNG figure rendering")


def _add_preprocess(p: argparse.ArgumentParser) -> None:
    p.add_argument("--no-normalize", action="store_true", help="skip min-max normalization")
    p.add_argument(
        "--order-weight", type=float, default=None,
        help="append a traversal-order coordinate scaled by this weight",
    )


def _add_ik_flags(p: argparse.ArgumentParser, psi_default: int = 16) -> None:
    p.add_argument("--psi", type=int, default=psi_default, help="isolation kernel centers per partitioning")
    p.add_argument("--t", type=int, default=100, help="isolation kernel partitionings")


def _add_gdk_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gamma", type=float, default=None, help="Gaussian bandwidth (default: median heuristic)")
    p.add_argument("--nystrom-m", type=int, default=1024, help="Nystrom landmark count")
    p.add_argument("--nystrom-l", type=int, default=1024, help="Nystrom feature rank")


def _add_tidkc_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, required=True, help="number of clusters")
    p.add_argument("--rho", type=float, default=0.9, help="threshold decay rate in (0,1)")
    p.add_argument("--tau-floor", type=float, default=1e-5, help="stop when tau falls below this")
    p.add_argument("--psi1", type=int, default=16, help="level-1 isolation kernel psi")
    p.add_argument("--t1", type=int, default=100, help="level-1 isolation kernel t")
    p.add_argument("--psi2", type=int, default=4, help="level-2 isolation kernel psi")
    p.add_argument("--t2", type=int, default=100, help="level-2 isolation kernel t")
    p.add_argument("--subset-s", type=int, default=1000, help="seed-selection subsample cap")
    p.add_argument("--knn", type=int, default=10, help="neighbors for local-contrast seeding")
    p.add_argument("--kernel1", choices=("idk", "gdk"), default="idk", help="trajectory representation kernel")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trajkit",
        description="Trajectory similarity and clustering via distributional kernels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset from a config file")
    p.add_argument("--config", required=True, help="key = value synthetic spec file")
    _add_common(p, with_input=False)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("embed", help="embed trajectories as mean-map vectors")
    p.add_argument("--kernel", choices=("idk", "gdk"), default="idk")
    _add_common(p)
    _add_preprocess(p)
    _add_ik_flags(p)
    _add_gdk_flags(p)
    p.set_defaults(fn=cmd_embed)

    p = sub.add_parser("cluster", help="cluster trajectories with TIDKC or TGDKC")
    p.add_argument("--algo", choices=("tidkc", "tgdkc"), default="tidkc")
    p.add_argument("--eval", action="store_true", help="score NMI/ARI against input labels")
    _add_common(p)
    _add_preprocess(p)
    _add_tidkc_flags(p)
    p.set_defaults(fn=cmd_cluster)

    p = sub.add_parser("matrix", help="export a pairwise distance matrix")
    p.add_argument("--measure", choices=("hausdorff", "dtw", "idk", "gdk"), required=True)
    p.add_argument("--band", type=int, default=None, help="Sakoe-Chiba half-width for DTW")
    _add_common(p)
    _add_preprocess(p)
    _add_ik_flags(p)
    _add_gdk_flags(p)
    p.set_defaults(fn=cmd_matrix)

    p = sub.add_parser("retrieve", help="precision@k retrieval evaluation")
    p.add_argument("--measure", choices=("idk", "gdk", "hausdorff", "dtw"), default="idk")
    p.add_argument("--ks", default="1,5,10", help="comma-separated neighborhood sizes")
    p.add_argument("--band", type=int, default=None, help="Sakoe-Chiba half-width for DTW")
    _add_common(p)
    _add_preprocess(p)
    _add_ik_flags(p)
    _add_gdk_flags(p)
    p.set_defaults(fn=cmd_retrieve)

    p = sub.add_parser("sweep", help="cluster at several sampling rates and score NMI")
    p.add_argument("--rates", default="1,0.9,0.7,0.5,0.3", help="comma-separated sampling rates")
    p.add_argument("--selection", choices=("all", "half"), default="all")
    p.add_argument("--algo", choices=("tidkc", "tgdkc"), default="tidkc")
    _add_common(p)
    _add_preprocess(p)
    _add_tidkc_flags(p)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("bench", help="wall-clock scaling measurements")
    p.add_argument("--target", choices=bench_mod.TARGETS, required=True)
    p.add_argument("--multipliers", default="1,2,4", help="comma-separated size multipliers")
    p.add_argument("--reps", type=int, default=3, help="repetitions per size (median reported)")
    p.add_argument("--algo", choices=("tidkc", "tgdkc"), default="tidkc", help=argparse.SUPPRESS)
    _add_common(p)
    _add_preprocess(p)
    _add_tidkc_flags_optional(p)
    p.set_defaults(fn=cmd_bench)

    return parser


def _add_tidkc_flags_optional(p: argparse.ArgumentParser) -> None:
    # same knobs as cluster, but k only matters for clustering targets
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--rho", type=float, default=0.9)
    p.add_argument("--tau-floor", type=float, default=1e-5)
    p.add_argument("--psi1", type=int, default=16)
    p.add_argument("--t1", type=int, default=100)
    p.add_argument("--psi2", type=int, default=4)
    p.add_argument("--t2", type=int, default=100)
    p.add_argument("--subset-s", type=int, default=1000)
    p.add_argument("--knn", type=int, default=10)
    p.add_argument("--kernel1", choices=("idk", "gdk"), default="idk")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = _Outputs(args.out)
    try:
        summary = args.fn(args, out)
    except Exception as exc:
        out.cleanup()
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{summary} outputs: {out.names()}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
