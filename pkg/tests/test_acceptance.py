"""Acceptance gate: one test per release criterion, each printing a verdict line.

Run with  pytest tests/test_acceptance.py -v -s  to see the per-criterion
pass/fail lines alongside the pytest report.
"""

import hashlib
import json
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from _oracles import (
    ari_bruteforce,
    dtw_bruteforce,
    hausdorff_bruteforce,
    idk_double_sum,
    nmi_bruteforce,
)
from conftest import separated_blob_dataset
from trajkit.baselines import dtw, hausdorff
from trajkit.bench import scaleup_run
from trajkit.cli import main as cli_main
from trajkit.data import augment_order_dimension, min_max_normalize, save_dataset
from trajkit.dkernel import embed_set_idk, embed_sets, idk_similarity
from trajkit.evaluation import ari, nmi, precision_at_k, run_sampling_sweep, similarity_matrix
from trajkit.ikernel import IKParams, IsolationKernelModel
from trajkit.synth import SyntheticSpec, default_backbones, generate_synthetic
from trajkit.tidkc import TidkcParams, cluster, embed_level1, nearest_seed_labels


@contextmanager
def criterion(num: int, desc: str):
    try:
        yield
    except BaseException:
        print(f"[FAIL] criterion {num}: {desc}")
        raise
    print(f"[PASS] criterion {num}: {desc}")


def test_criterion_1_idk_factorization_identity():
    with criterion(1, "IDK mean-map dot equals the double-sum estimator to 1e-9"):
        start = time.perf_counter()
        rng = np.random.default_rng(101)
        combos = [(2, 10), (4, 10), (16, 10), (2, 100), (4, 100), (16, 100)]
        worst = 0.0
        for trial in range(102):
            psi, t = combos[trial % len(combos)]
            d = int(rng.integers(1, 4))
            while True:
                ns, nt = int(rng.integers(1, 51)), int(rng.integers(1, 51))
                if ns + nt >= psi:
                    break
            S = rng.normal(size=(ns, d)) * 3
            T = rng.normal(size=(nt, d)) * 3
            model = IsolationKernelModel.fit(
                np.vstack([S, T]), IKParams(psi=psi, t=t, rng_seed=trial)
            )
            fast = idk_similarity(embed_set_idk(model, S), embed_set_idk(model, T))
            worst = max(worst, abs(fast - idk_double_sum(model, S, T)))
        elapsed = time.perf_counter() - start
        assert worst <= 1e-9, f"worst factorization gap {worst}"
        assert elapsed < 10.0, f"criterion 1 took {elapsed:.1f}s"


def test_criterion_2_baseline_oracles():
    with criterion(2, "Hausdorff/DTW match literal brute-force oracles exactly"):
        start = time.perf_counter()
        rng = np.random.default_rng(202)
        for trial in range(200):
            d = int(rng.integers(1, 4))
            A = rng.normal(size=(int(rng.integers(1, 11)), d)) * 10
            B = rng.normal(size=(int(rng.integers(1, 11)), d)) * 10
            assert hausdorff(A, B) == hausdorff_bruteforce(A, B)
        for trial in range(200):
            d = int(rng.integers(1, 3))
            hi = 9 if trial % 10 == 0 else 7  # a tenth of the trials at length 7..8
            A = rng.normal(size=(int(rng.integers(1, hi)), d)) * 5
            B = rng.normal(size=(int(rng.integers(1, hi)), d)) * 5
            assert dtw(A, B) == dtw_bruteforce(A, B)
        elapsed = time.perf_counter() - start
        assert elapsed < 30.0, f"criterion 2 took {elapsed:.1f}s"


def test_criterion_3_metric_oracles():
    with criterion(3, "NMI/ARI match brute-force counting to 1e-12, relabeling exact"):
        rng = np.random.default_rng(303)
        for trial in range(200):
            n = int(rng.integers(2, 31))
            u = rng.integers(0, int(rng.integers(1, 6)) + 1, size=n)
            v = rng.integers(0, int(rng.integers(1, 6)) + 1, size=n)
            ref_nmi = min(max(nmi_bruteforce(u, v), 0.0), 1.0)
            assert abs(nmi(u, v) - ref_nmi) <= 1e-12
            assert abs(ari(u, v) - ari_bruteforce(u, v)) <= 1e-12
            pu, pv = rng.permutation(12)[u], rng.permutation(12)[v]
            assert nmi(u, v) == nmi(pu, pv)
            assert ari(u, v) == ari(pu, pv)


def test_criterion_4_synthetic_clustering():
    with criterion(4, "TIDKC defaults reach median NMI >= 0.95 on 4 separated clusters"):
        start = time.perf_counter()
        tidkc_scores, baseline_scores = [], []
        for seed in range(10):
            ds = separated_blob_dataset(k=4, per_cluster=50, noise=0.05, seed=400 + seed)
            truth = ds.labels()
            params = TidkcParams(k=4, rng_seed=seed)
            result = cluster(ds, params)
            tidkc_scores.append(nmi(truth, result.labels))
            G, _ = embed_level1(ds, params)
            baseline = nearest_seed_labels(G, result.seed_indices)
            baseline_scores.append(nmi(truth, baseline))
        elapsed = time.perf_counter() - start
        print(
            f"    TIDKC median NMI {np.median(tidkc_scores):.3f} | "
            f"nearest-seed baseline median NMI {np.median(baseline_scores):.3f} (context)"
        )
        assert np.median(tidkc_scores) >= 0.95
        assert elapsed < 60.0, f"criterion 4 took {elapsed:.1f}s"


def test_criterion_5_direction_experiment_analog():
    with criterion(5, "order dimension separates direction pairs (NMI >= 0.95, margin >= 0.2)"):
        bb1 = np.array([[0.0, 0.0], [10.0, 0.0]])
        bb2 = np.array([[0.0, 5.0], [10.0, 5.0]])
        spec = SyntheticSpec(
            backbones=(bb1, bb2),
            per_cluster=25,
            noise_sigma=0.05,
            length_range=(20, 40),
            direction_pairs=True,
        )
        with_order, without_order = [], []
        for seed in range(10):
            ds = generate_synthetic(spec, rng_seed=500 + seed)
            truth = ds.labels()
            norm = min_max_normalize(ds)
            augmented = augment_order_dimension(norm, weight=1.0)
            with_order.append(nmi(truth, cluster(augmented, TidkcParams(k=4, rng_seed=seed)).labels))
            without_order.append(nmi(truth, cluster(norm, TidkcParams(k=4, rng_seed=seed)).labels))
        med_with, med_without = np.median(with_order), np.median(without_order)
        print(f"    with order dim: {med_with:.3f} | without: {med_without:.3f}")
        assert med_with >= 0.95
        assert med_with - med_without >= 0.2


def test_criterion_6_linear_vs_quadratic_scaleup():
    with criterion(6, "TIDKC doubles in <= 2.5x while Hausdorff matrix grows >= 3.0x"):
        start = time.perf_counter()
        base = separated_blob_dataset(k=4, per_cluster=10, noise=0.05, seed=600, lengths=(24, 32))
        multipliers = [1, 2, 4, 8]
        # seed_subset_s stays fixed across scales so every phase is linear in n
        params = TidkcParams(k=4, seed_subset_s=128, rng_seed=0)
        tidkc_rec = scaleup_run(base, multipliers, "tidkc", reps=3, rng_seed=0, tidkc_params=params)
        tidkc_times = [r.wall_time for r in tidkc_rec if r.phase == "total"]
        ratios = [b / a for a, b in zip(tidkc_times, tidkc_times[1:])]
        print(f"    TIDKC totals {[f'{t:.3f}' for t in tidkc_times]} ratios {[f'{r:.2f}' for r in ratios]}")
        haus_rec = scaleup_run(base, multipliers, "hausdorff_matrix", reps=3, rng_seed=0)
        haus_times = [r.wall_time for r in haus_rec if r.phase == "total"]
        haus_ratio = haus_times[-1] / haus_times[-2]
        print(f"    Hausdorff totals {[f'{t:.3f}' for t in haus_times]} last ratio {haus_ratio:.2f}")
        assert all(r <= 2.5 for r in ratios), f"TIDKC ratios {ratios}"
        assert haus_ratio >= 3.0, f"Hausdorff largest-step ratio {haus_ratio}"
        elapsed = time.perf_counter() - start
        assert elapsed < 300.0, f"criterion 6 took {elapsed:.1f}s"


def test_criterion_7_sampling_rate_robustness():
    with criterion(7, "NMI at rate 0.3 stays within 0.05 of rate 1.0 (all and half modes)"):
        ds = separated_blob_dataset(k=4, per_cluster=25, noise=0.05, seed=700)
        params = TidkcParams(k=4, rng_seed=1)
        for selection in ("all", "half_per_cluster"):
            rows = run_sampling_sweep(ds, [1.0, 0.3], selection, params, rng_seed=7)
            gap = abs(rows[0]["nmi"] - rows[1]["nmi"])
            print(f"    {selection}: rate 1.0 -> {rows[0]['nmi']:.3f}, rate 0.3 -> {rows[1]['nmi']:.3f}")
            assert gap <= 0.05, f"{selection} NMI gap {gap}"


def test_criterion_8_retrieval_bound():
    with criterion(8, "precision@k is 1.0 below class size and bounded by (c-1)/k past it"):
        spec = SyntheticSpec(
            backbones=default_backbones(4), per_cluster=25, noise_sigma=0.0, length_range=(20, 30)
        )
        ds = min_max_normalize(generate_synthetic(spec, rng_seed=800))
        labels = ds.labels()
        model = IsolationKernelModel.fit(ds.pooled_points(), IKParams(psi=16, t=100, rng_seed=0))
        V = embed_sets(model, ds.point_sets())
        ks = [1, 5, 10, 24, 25, 40, 80]
        curve = precision_at_k(similarity_matrix(V), labels, ks)
        class_size = 25
        for k, p in zip(curve.ks, curve.precision):
            if k < class_size:
                assert p == 1.0, f"precision@{k} = {p}"
            else:
                bound = (class_size - 1) / k
                assert p <= bound + 1e-12, f"precision@{k} = {p} exceeds bound {bound}"


@pytest.mark.skip(reason="public CROSS/TRAFFIC datasets are not available in this environment")
def test_criterion_9_public_dataset_check():
    pass


def _sha(path) -> str:
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


def _tree_digest(outdir, skip_names=(), json_drop=()):
    digest = {}
    for p in sorted(outdir.iterdir()):
        if p.name in skip_names:
            continue
        if p.suffix == ".json" and json_drop:
            obj = json.loads(p.read_text())
            for key in json_drop:
                obj.pop(key, None)
            digest[p.name] = hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()
        else:
            digest[p.name] = _sha(p)
    return digest


def test_criterion_10_cli_determinism(tmp_path):
    with criterion(10, "every CLI command is byte-deterministic under a fixed --seed"):
        cfg = tmp_path / "synth.cfg"
        cfg.write_text("clusters = 2\nper_cluster = 8\nsigma = 0.05\nmin_len = 10\nmax_len = 14\n")
        data = tmp_path / "data.jsonl"
        ds = separated_blob_dataset(k=2, per_cluster=8, seed=10, lengths=(10, 14))
        save_dataset(ds, data)
        runs = {
            "synth": ["synth", "--config", str(cfg)],
            "embed": ["embed", "-i", str(data), "--psi", "8"],
            "cluster": ["cluster", "-i", str(data), "--k", "2", "--eval"],
            "matrix": ["matrix", "-i", str(data), "--measure", "idk", "--psi", "8"],
            "retrieve": ["retrieve", "-i", str(data), "--ks", "1,5"],
            "sweep": ["sweep", "-i", str(data), "--rates", "1,0.5", "--k", "2"],
            "bench": ["bench", "-i", str(data), "--target", "idk_embed", "--multipliers", "1,2", "--reps", "1"],
        }
        # wall-clock values are the only permitted difference between reruns;
        # the bench CSV and its rendered figure are pure timing artifacts
        timing_files = {"bench": ("timings.csv", "scaleup.png")}
        json_drop = ("timings",)
        for name, argv in runs.items():
            digests = []
            for attempt in ("x", "y"):
                out = tmp_path / f"{name}-{attempt}"
                rc = cli_main(argv + ["--seed", "3", "-o", str(out)])
                assert rc == 0, f"{name} failed"
                digests.append(
                    _tree_digest(out, skip_names=timing_files.get(name, ()), json_drop=json_drop)
                )
            assert digests[0] == digests[1], f"{name} outputs differ between reruns"
