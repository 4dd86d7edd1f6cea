import numpy as np
import pytest

import wpsc
from conftest import make_uos
from wpsc.errors import DegenerateColumnError
from wpsc.graph import Partition, spectral_clustering
from wpsc.pipeline import SingleViewPipeline, WpMeraPipeline, five_views, unit_columns
from wpsc.subspace import assign_oos


@pytest.mark.parametrize("spec", [
    wpsc.SolverSpec("SSC", {"alpha": 10}),
    wpsc.SolverSpec("LRR", {"lambda": 10.0}),
    wpsc.SolverSpec("NSN", {"k": 8, "d_max": 3}),
    wpsc.SolverSpec("RTSC", {"q": 5}),
], ids=lambda s: s.kind)
def test_every_solver_recovers_planted_clusters(spec):
    ds = make_uos(C=4, d=3, D=60, n=15, sigma=0.0, seed=0)
    pred = SingleViewPipeline(spec).run(ds.data, ds.C, seed=0)
    assert wpsc.evaluate(ds.labels, pred).acc == 1.0


def test_ipd_pipeline_variant_runs():
    ds = make_uos(C=3, d=2, D=36, n=10, sigma=0.0, seed=1)
    pipe = SingleViewPipeline(wpsc.SolverSpec("SSC", {"alpha": 10}), ipd_d=2)
    pred = pipe.run(ds.data, ds.C, seed=1)
    assert wpsc.evaluate(ds.labels, pred).acc == 1.0


def test_unit_columns_rejects_zero_column():
    X = np.ones((4, 3))
    X[:, 1] = 0.0
    with pytest.raises(DegenerateColumnError):
        unit_columns(X)


def test_five_views_order_and_shapes():
    ds = make_uos(C=2, d=2, D=16, n=6, sigma=0.0, seed=2)
    views = five_views(ds)
    assert len(views) == 5
    for v in views:
        assert v.shape == ds.data.shape
        assert np.abs(np.linalg.norm(v, axis=0) - 1.0).max() <= 1e-12
    # view 0 is the (re-normalized) original data
    assert np.abs(views[0] - ds.data).max() <= 1e-12


def test_wp_mera_pipeline_object_matches_function():
    ds = make_uos(C=3, d=2, D=64, n=12, sigma=0.0, seed=3)
    pipe = WpMeraPipeline(img_h=8, img_w=8, lam=10.0, R=12)
    labels_a = pipe.run(ds.data, ds.C, seed=3)
    part, _, _ = wpsc.run_wp_mera(ds, ds.C, lam=10.0, R=12, seed=3)
    assert np.array_equal(labels_a, part.labels)


def test_spectral_with_isolated_vertex():
    # isolated vertex exercises the degree floor; clustering still works
    W = np.zeros((7, 7))
    W[:3, :3] = 1.0
    W[3:6, 3:6] = 1.0
    np.fill_diagonal(W, 0.0)  # vertex 6 has no edges at all
    part = spectral_clustering(W, 2, seed=0)
    assert part.labels[0] == part.labels[1] == part.labels[2]
    assert part.labels[3] == part.labels[4] == part.labels[5]


def test_assign_oos_with_degenerate_cluster():
    # a zero-width basis falls back to distance-to-mean
    model = wpsc.ClusterModel(
        means=np.array([[0.0, 0.0], [10.0, 10.0]]),
        bases=[np.zeros((2, 0)), np.zeros((2, 0))],
        d=1)
    assert assign_oos(np.array([1.0, 1.0]), model) == 0
    assert assign_oos(np.array([9.0, 9.0]), model) == 1
