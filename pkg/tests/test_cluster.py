import numpy as np
import pytest

from afmdomains.cluster import IndexMap, kmeans, label_domains, make_rng, merge_clusters
from afmdomains.features import FeatureCube
from afmdomains.tiling import TileSpec, tile_grid


def _blobs(rng, n=200):
    a = rng.normal(0, 0.3, size=(n, 2))
    b = rng.normal(5, 0.3, size=(n, 2))
    return np.vstack([a, b])


def test_rng_stream_is_stable():
    assert make_rng(7).integers(1 << 30, size=3).tolist() == make_rng(7).integers(1 << 30, size=3).tolist()


def test_separated_blobs(rng):
    x = _blobs(rng)
    res = kmeans(x, 2, seed=3)
    first, second = res.assignments[:200], res.assignments[200:]
    assert len(set(first)) == 1 and len(set(second)) == 1 and first[0] != second[0]
    np.testing.assert_allclose(sorted(res.centroids[:, 0]), [0, 5], atol=0.1)


def test_k1_is_mean(rng):
    x = rng.normal(size=(50, 3))
    res = kmeans(x, 1)
    np.testing.assert_allclose(res.centroids[0], x.mean(axis=0), atol=1e-12)
    assert res.inertia == pytest.approx(((x - x.mean(axis=0)) ** 2).sum())


def test_identical_points_repair():
    x = np.ones((3, 2))
    res = kmeans(x, 2, seed=0)
    assert np.isfinite(res.centroids).all()
    assert res.inertia == 0


def test_empty_cluster_reseeded():
    x = np.array([[0.0], [1.0], [10.0], [11.0]])
    res = kmeans(x, 2, init=[[5.0], [100.0]])
    assert sorted(res.assignments[:2].tolist() + res.assignments[2:].tolist()) == [0, 0, 1, 1]
    assert res.assignments[0] != res.assignments[3]


def test_fixed_point_and_monotone(rng):
    x = rng.normal(size=(300, 4))
    res = kmeans(x, 3, seed=11)
    d2 = ((x[:, None, :] - res.centroids[None]) ** 2).sum(-1)
    np.testing.assert_array_equal(res.assignments, np.argmin(d2, axis=1))
    assert res.inertia == pytest.approx(d2.min(axis=1).sum())
    hist = np.array(res.inertia_history)
    assert (np.diff(hist) <= 1e-9 * hist[0]).all()


def test_seed_determinism(rng):
    x = rng.normal(size=(100, 2))
    a = kmeans(x, 3, seed=5)
    b = kmeans(x, 3, seed=5)
    np.testing.assert_array_equal(a.assignments, b.assignments)
    np.testing.assert_array_equal(a.centroids, b.centroids)


def test_scaling_invariance(rng):
    x = _blobs(rng)
    a = kmeans(x, 2, seed=1)
    b = kmeans(4.0 * x + 3.0, 2, seed=1)
    np.testing.assert_array_equal(a.assignments, b.assignments)


@pytest.mark.parametrize("kwargs", [dict(k=0), dict(k=5)])
def test_bad_k(kwargs):
    with pytest.raises(ValueError):
        kmeans(np.zeros((3, 2)), **kwargs)


def test_non_finite():
    with pytest.raises(ValueError):
        kmeans(np.array([[0.0], [np.nan]]), 1)


def test_merge_clusters(rng):
    x = np.concatenate([rng.normal(m, 0.1, size=(30, 1)) for m in (0, 5, 10)])
    res = kmeans(x, 3, seed=2)
    order = np.argsort(res.centroids[:, 0])
    merge = np.zeros(3, dtype=int)
    merge[order[2]] = 1
    merged = merge_clusters(res, merge)
    assert merged.assignments.tolist() == [0] * 60 + [1] * 30
    np.testing.assert_allclose(merged.centroids[0], x[:60].mean(axis=0), atol=1e-12)
    with pytest.raises(ValueError):
        merge_clusters(res, [0, 1])


def _cube(shape_img, spec):
    grid = tile_grid(shape_img, spec)
    return FeatureCube(np.zeros(grid.shape + (1,)), ["variance"], grid)


def test_label_domains_brighter_is_light():
    img = np.zeros((10, 10))
    img[:, 5:] = 200
    cube = _cube(img.shape, TileSpec(2, 2, 1))
    cols = np.array(cube.grid.center_cols)
    assign = np.tile(cols >= 5, (cube.grid.grid_h, 1)).astype(int)
    from afmdomains.cluster import KMeansResult
    for flip in (0, 1):
        res = KMeansResult((assign ^ flip).ravel(), np.zeros((2, 1)), 1, 0.0, [0.0])
        imap = label_domains(res, cube, img)
        assert isinstance(imap, IndexMap)
        np.testing.assert_array_equal(imap.labels, assign)


def test_label_domains_tie():
    from afmdomains.cluster import KMeansResult
    img = np.full((6, 6), 9.0)
    cube = _cube(img.shape, TileSpec(2, 2, 2))
    assign = np.array([0, 1, 0, 1, 0, 1, 0, 1, 0])
    imap = label_domains(KMeansResult(assign, np.zeros((2, 1)), 1, 0.0, [0.0]), cube, img)
    np.testing.assert_array_equal(imap.labels.ravel(), assign)
