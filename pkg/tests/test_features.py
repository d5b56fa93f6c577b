import numpy as np
import pytest

from afmdomains.features import (FeatureOptions, STATS, build_feature_cube, channel_names,
                                 correlation_matrix, extract_features, stats4, zscore_normalize)
from afmdomains.tiling import TileSpec
from afmdomains.transforms import dct2, dft2_amplitude
from oracles import moments, naive_dft2


def test_stats4_small_example():
    np.testing.assert_allclose(stats4([1.0, 2.0, 3.0, 4.0]), [2.5, 1.25, 0.0, 1.64], atol=1e-12)


def test_stats4_constant():
    assert stats4(np.full((3, 3), 5.0)).tolist() == [5.0, 0.0, 0.0, 0.0]


def test_stats4_empty():
    with pytest.raises(ValueError):
        stats4(np.zeros((0, 3)))


def test_stats4_matches_loops(rng):
    for _ in range(20):
        x = rng.gamma(2.0, 3.0, size=(7, 9))
        np.testing.assert_allclose(stats4(x), moments(x), rtol=1e-10, atol=1e-10)


def test_stats4_batched_axes(rng):
    x = rng.normal(size=(3, 5, 6))
    out = stats4(x, axes=(-2, -1))
    assert out.shape == (3, 4)
    np.testing.assert_allclose(out[1], moments(x[1]), rtol=1e-12)


def test_variance_only_mask(rng):
    tile = rng.uniform(0, 255, size=(12, 12))
    vec = extract_features(tile, "dft", FeatureOptions(channels=("variance",)))
    assert vec.shape == (1,)
    assert vec[0] == pytest.approx(moments(np.abs(naive_dft2(tile)))[1], rel=1e-10)


def test_mask_order_is_canonical():
    opts = FeatureOptions(channels=("kurtosis", "mean"))
    assert opts.channels == ("mean", "kurtosis")
    with pytest.raises(ValueError):
        FeatureOptions(channels=())
    with pytest.raises(ValueError):
        FeatureOptions(channels=("median",))


def _haar_1level(x):
    # textbook orthonormal Haar, rows then columns
    lo = (x[:, 0::2] + x[:, 1::2]) / np.sqrt(2)
    hi = (x[:, 0::2] - x[:, 1::2]) / np.sqrt(2)
    ll = (lo[0::2] + lo[1::2]) / np.sqrt(2)
    lh = (lo[0::2] - lo[1::2]) / np.sqrt(2)
    hl = (hi[0::2] + hi[1::2]) / np.sqrt(2)
    hh = (hi[0::2] - hi[1::2]) / np.sqrt(2)
    return ll, hl, lh, hh


def test_dwt_features_against_subbands(rng):
    tile = rng.uniform(0, 255, size=(16, 16))
    opts = FeatureOptions(wavelet="haar", levels=2)
    vec = extract_features(tile, "dwt", opts)
    names = channel_names("dwt", opts)
    assert len(vec) == len(names) == 32
    ll, hl, lh, hh = _haar_1level(tile)
    expected = [moments(b) for b in (ll, hl, lh, hh)]
    expected += [moments(b) for b in _haar_1level(ll)]
    np.testing.assert_allclose(vec, np.ravel(expected), rtol=1e-9, atol=1e-9)
    assert names[0] == "L1_LL_mean" and names[-1] == "L2_HH_kurtosis"


@pytest.mark.parametrize("method", ["dft", "dct", "dwt", "radon"])
def test_cube_matches_per_tile(rng, method):
    img = rng.uniform(0, 255, size=(30, 27))
    spec = TileSpec(8, 8, stride=5)
    opts = FeatureOptions(n_angles=12)
    cube = build_feature_cube(img, spec, method, opts)
    rs, cs = cube.grid.tile_slices(2, 3)
    np.testing.assert_allclose(cube.values[2, 3], extract_features(img[rs, cs], method, opts),
                               rtol=1e-12, atol=1e-12)


def test_cube_independent_of_workers(rng):
    img = rng.uniform(0, 255, size=(60, 40))
    spec = TileSpec(6, 6)
    a = build_feature_cube(img, spec, "dct", workers=1)
    b = build_feature_cube(img, spec, "dct", workers=4)
    assert a.values.tobytes() == b.values.tobytes()


def test_mirror_invariance(rng):
    tile = rng.uniform(0, 255, size=(12, 12))
    for method in ("dft", "radon"):
        opts = FeatureOptions(n_angles=180)
        a = extract_features(tile, method, opts)
        b = extract_features(tile[:, ::-1], method, opts)
        np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-9)


def test_dct_mean_is_scaled_sum(rng):
    tile = rng.uniform(0, 255, size=(12, 12))
    assert dct2(tile)[0, 0] == pytest.approx(2 / 12 * tile.sum())
    assert dft2_amplitude(tile)[0, 0] == pytest.approx(tile.mean())


def test_zscore_examples():
    cube = build_feature_cube(np.zeros((4, 4)), TileSpec(2, 2, 2), "dft",
                              FeatureOptions(channels=("mean",)))
    cube.values[:] = np.array([0.0, 10.0, 0.0, 10.0]).reshape(2, 2, 1)
    out = zscore_normalize(cube)
    np.testing.assert_allclose(out.values.ravel(), [-1, 1, -1, 1])
    assert out.normalized
    cube.values[:] = 3.0
    assert not zscore_normalize(cube).values.any()


def test_zscore_idempotent(rng):
    cube = build_feature_cube(rng.uniform(0, 255, (20, 20)), TileSpec(4, 4), "dft")
    once = zscore_normalize(cube)
    twice = zscore_normalize(once)
    np.testing.assert_allclose(once.values, twice.values, atol=1e-12)
    flat = once.vectors()
    np.testing.assert_allclose(flat.mean(axis=0), 0, atol=1e-12)
    np.testing.assert_allclose(flat.std(axis=0), 1, atol=1e-12)


def test_correlation_examples(rng):
    x = rng.normal(size=10000)
    corr = correlation_matrix(np.stack([x, 2 * x + 1, -x, rng.normal(size=10000)], axis=-1))
    np.testing.assert_allclose(corr[0, :3], [1, 1, -1], atol=1e-12)
    assert abs(corr[0, 3]) < 0.05
    np.testing.assert_array_equal(corr, corr.T)
    np.testing.assert_array_equal(np.diag(corr), 1.0)


def test_correlation_permutation(rng):
    data = rng.normal(size=(500, 4)) @ rng.normal(size=(4, 4))
    perm = [2, 0, 3, 1]
    c = correlation_matrix(data)
    cp = correlation_matrix(data[:, perm])
    np.testing.assert_allclose(cp, c[np.ix_(perm, perm)], atol=1e-12)


def test_correlation_constant_channel(rng):
    data = np.column_stack([rng.normal(size=50), np.ones(50)])
    c = correlation_matrix(data)
    assert c[0, 1] == 0 and c[1, 1] == 1


def test_unknown_method():
    with pytest.raises(ValueError, match="method"):
        extract_features(np.zeros((4, 4)), "resnet")
    assert len(STATS) == 4
