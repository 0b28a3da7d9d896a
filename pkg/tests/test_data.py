import json
import math

import numpy as np
import pytest

from conftest import make_dataset
from trajkit.data import (
    DatasetFormatError,
    Trajectory,
    TrajectoryDataset,
    augment_order_dimension,
    downsample,
    load_dataset,
    min_max_normalize,
    save_dataset,
)


class TestLoading:
    def test_jsonl_single_line(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text('{"id":"a","label":0,"points":[[0,0],[1,1]]}\n')
        ds = load_dataset(p, format="jsonl")
        assert len(ds) == 1
        assert len(ds[0]) == 2
        assert ds.dims == 2
        assert ds[0].label == 0

    def test_csv_long_grouping(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("traj_id,seq,x1,x2\na,0,0.0,0.0\na,1,1.0,1.0\nb,0,5.0,5.0\n")
        ds = load_dataset(p, format="csv_long")
        assert len(ds) == 2
        assert [len(tr) for tr in ds] == [2, 1]
        assert ds[1].points[0].tolist() == [5.0, 5.0]

    def test_csv_long_with_labels_unsorted_rows(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("traj_id,seq,x1,x2,label\na,1,1.0,1.0,3\na,0,0.0,0.0,3\n")
        ds = load_dataset(p, format="csv_long")
        assert ds[0].points[0].tolist() == [0.0, 0.0]
        assert ds[0].label == 3

    def test_dimension_mismatch(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text('{"id":"a","points":[[0,0]]}\n{"id":"b","points":[[0,0,0]]}\n')
        with pytest.raises(DatasetFormatError, match="dimension"):
            load_dataset(p)

    def test_parse_error_carries_line_number(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text('{"id":"a","points":[[0,0]]}\nnot json\n')
        with pytest.raises(DatasetFormatError, match=":2:"):
            load_dataset(p)

    def test_empty_file(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text("")
        with pytest.raises(DatasetFormatError, match="empty"):
            load_dataset(p)

    def test_duplicate_ids_rejected(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text('{"id":"a","points":[[0,0]]}\n{"id":"a","points":[[1,1]]}\n')
        with pytest.raises(DatasetFormatError, match="duplicate"):
            load_dataset(p)

    def test_nonfinite_points_rejected(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text('{"id":"a","points":[[0,null]]}\n')
        with pytest.raises(DatasetFormatError):
            load_dataset(p)

    def test_round_trip_bit_exact(self, tmp_path, rng):
        pts = [rng.normal(size=(int(rng.integers(1, 8)), 3)) * 1e3 for _ in range(6)]
        ds = make_dataset(pts, labels=[0, 1, 0, 1, 2, None])
        out = tmp_path / "rt.jsonl"
        save_dataset(ds, out)
        back = load_dataset(out)
        assert back.ids == ds.ids
        for a, b in zip(ds, back):
            assert np.array_equal(a.points, b.points)
            assert a.label == b.label


class TestNormalize:
    def test_affine_definition(self):
        ds = make_dataset([[[0.0, -5.0], [10.0, 5.0]], [[2.0, 0.0]]])
        norm = min_max_normalize(ds)
        assert norm[0].points.tolist() == [[0.0, 0.0], [1.0, 1.0]]
        assert norm[1].points.tolist() == [[0.2, 0.5]]

    def test_constant_axis_maps_to_half(self):
        ds = make_dataset([[[3.0, 3.0], [3.0, 3.0]]])
        norm = min_max_normalize(ds)
        assert np.all(norm[0].points == 0.5)

    def test_identity_on_unit_range(self):
        ds = make_dataset([[[0.0, 0.0], [1.0, 1.0], [0.25, 0.75]]])
        norm = min_max_normalize(ds)
        assert np.array_equal(norm[0].points, ds[0].points)

    def test_idempotent(self, rng):
        ds = make_dataset([rng.normal(size=(10, 2)) * 50 for _ in range(5)])
        once = min_max_normalize(ds)
        twice = min_max_normalize(once)
        for a, b in zip(once, twice):
            assert np.allclose(a.points, b.points, atol=1e-12)

    def test_original_untouched(self):
        ds = make_dataset([[[0.0, 0.0], [10.0, 10.0]]])
        min_max_normalize(ds)
        assert ds[0].points[1].tolist() == [10.0, 10.0]


class TestDownsample:
    def test_rate_one_identity(self, rng):
        ds = make_dataset([rng.normal(size=(7, 2)) for _ in range(3)])
        out = downsample(ds, rate=1.0, selection="all", rng_seed=0)
        for a, b in zip(ds, out):
            assert np.array_equal(a.points, b.points)

    def test_half_rate_keeps_endpoints(self):
        pts = np.arange(20, dtype=float).reshape(10, 2)
        ds = make_dataset([pts])
        out = downsample(ds, rate=0.5, selection="all", rng_seed=0)
        assert len(out[0]) == 5
        assert np.array_equal(out[0].points[0], pts[0])
        assert np.array_equal(out[0].points[-1], pts[-1])

    def test_length_is_ceil(self, rng):
        for n in range(2, 30):
            for rate in (0.2, 0.35, 0.5, 0.77, 0.99):
                ds = make_dataset([rng.normal(size=(n, 2))])
                out = downsample(ds, rate=rate, selection="all", rng_seed=0)
                assert len(out[0]) == math.ceil(rate * n)

    def test_half_per_cluster_counts(self, rng):
        # exactly floor(count/2) trajectories per label get shorter
        sizes = {0: 7, 1: 10, 2: 3}
        pts, labels = [], []
        for lab, cnt in sizes.items():
            for _ in range(cnt):
                pts.append(rng.normal(size=(12, 2)))
                labels.append(lab)
        ds = make_dataset(pts, labels=labels)
        out = downsample(ds, rate=0.3, selection="half_per_cluster", rng_seed=5)
        shortened: dict[int, int] = {}
        for before, after in zip(ds, out):
            if len(after) < len(before):
                shortened[before.label] = shortened.get(before.label, 0) + 1
        assert shortened == {lab: cnt // 2 for lab, cnt in sizes.items()}

    def test_half_per_cluster_needs_labels(self, rng):
        ds = make_dataset([rng.normal(size=(5, 2))])
        with pytest.raises(ValueError, match="label"):
            downsample(ds, rate=0.5, selection="half_per_cluster", rng_seed=0)

    def test_deterministic(self, rng):
        pts = [rng.normal(size=(15, 2)) for _ in range(8)]
        ds = make_dataset(pts, labels=[0, 0, 0, 0, 1, 1, 1, 1])
        a = downsample(ds, rate=0.4, selection="half_per_cluster", rng_seed=9)
        b = downsample(ds, rate=0.4, selection="half_per_cluster", rng_seed=9)
        for x, y in zip(a, b):
            assert np.array_equal(x.points, y.points)

    def test_invalid_rate(self, rng):
        ds = make_dataset([rng.normal(size=(5, 2))])
        for rate in (0.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                downsample(ds, rate=rate)


class TestAugmentOrder:
    def test_linear_ramp(self):
        ds = make_dataset([[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]])
        out = augment_order_dimension(ds, weight=1.0)
        assert out.dims == 3
        assert out[0].points[:, 2].tolist() == [0.0, 0.5, 1.0]

    def test_single_point_gets_zero(self):
        ds = make_dataset([[[4.0, 2.0]]])
        out = augment_order_dimension(ds, weight=2.0)
        assert out[0].points[0, 2] == 0.0

    def test_reversed_traversal_distinguishable(self):
        # identical point sets, opposite orders: augmented sets must differ
        fwd = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 0.0]])
        ds = make_dataset([fwd, fwd[::-1]])
        out = augment_order_dimension(ds, weight=1.0)
        set_a = {tuple(p) for p in out[0].points}
        set_b = {tuple(p) for p in out[1].points}
        assert set_a != set_b

    def test_preserves_everything_else(self, rng):
        pts = [rng.normal(size=(int(rng.integers(1, 9)), 2)) for _ in range(5)]
        ds = make_dataset(pts, labels=[1, 2, 3, 4, 5])
        out = augment_order_dimension(ds, weight=0.7)
        assert len(out) == len(ds)
        for a, b in zip(ds, out):
            assert len(a) == len(b)
            assert np.array_equal(b.points[:, :2], a.points)
            assert b.label == a.label

    def test_weight_must_be_positive(self, rng):
        ds = make_dataset([rng.normal(size=(3, 2))])
        with pytest.raises(ValueError):
            augment_order_dimension(ds, weight=0.0)


class TestContainers:
    def test_trajectory_immutable(self):
        tr = Trajectory(id="a", points=[[0.0, 1.0]])
        with pytest.raises(ValueError):
            tr.points[0, 0] = 5.0

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            TrajectoryDataset(())

    def test_pooled_count(self, rng):
        ds = make_dataset([rng.normal(size=(n, 2)) for n in (3, 5, 2)])
        assert ds.pooled_point_count == 10
        assert ds.pooled_points().shape == (10, 2)

    def test_labels_none_when_partial(self, rng):
        ds = make_dataset([rng.normal(size=(2, 2))] * 1, labels=[None])
        assert not ds.has_labels()
        with pytest.raises(ValueError):
            ds.labels()
