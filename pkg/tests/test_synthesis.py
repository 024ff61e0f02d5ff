import numpy as np
import pytest

from treesample import (ConfigError, brownian_innovation_variances,
                        fbm_innovation_variances, synthesize_midpoint_path)


def test_brownian_schedule_halves_per_scale():
    w = brownian_innovation_variances(4)
    assert w[0] == 0.25
    assert np.array_equal(w[:-1] / 2.0, w[1:])


def test_h_half_reduces_to_brownian():
    assert np.array_equal(fbm_innovation_variances(5, 0.5),
                          brownian_innovation_variances(5))
    a = synthesize_midpoint_path(4, brownian=True, paths=3, seed=9)
    b = synthesize_midpoint_path(4, hurst=0.5, paths=3, seed=9)
    assert np.array_equal(a.increments, b.increments)


def test_fbm_schedule_positive_across_hurst_range():
    for hurst in (0.05, 0.3, 0.7, 0.95):
        w = fbm_innovation_variances(6, hurst)
        assert np.all(w > 0)
        # Scale-j node variance matches the target decay.
        v = 1.0
        for j, wj in enumerate(w, start=1):
            v = v / 4.0 + wj
            assert v == pytest.approx((2.0 ** -j) ** (2 * hurst), rel=1e-12)


def test_increments_sum_to_root():
    for depth in (1, 3, 6):
        out = synthesize_midpoint_path(depth, brownian=True, paths=5, seed=21)
        assert out.increments.shape == (5, 2 ** depth)
        assert np.max(np.abs(out.increments.sum(axis=1) - out.root)) <= 1e-12
        assert np.allclose(out.cumulative[:, -1], out.root, atol=1e-12)


def test_deterministic_given_seed():
    a = synthesize_midpoint_path(5, brownian=True, paths=4, seed=77)
    b = synthesize_midpoint_path(5, brownian=True, paths=4, seed=77)
    assert np.array_equal(a.increments, b.increments)
    c = synthesize_midpoint_path(5, brownian=True, paths=4, seed=78)
    assert not np.array_equal(a.increments, c.increments)


def test_two_increments_split_the_root(  ):
    out = synthesize_midpoint_path(1, brownian=True, paths=2000, seed=3)
    assert out.increments.shape == (2000, 2)
    assert np.max(np.abs(out.increments.sum(axis=1) - out.root)) <= 1e-12
    # Population variance of each half is 1/2; allow 3 standard errors.
    var = out.increments[:, 0].var()
    se = 0.5 * np.sqrt(2.0 / (2000 - 1))
    assert abs(var - 0.5) <= 3 * se


@pytest.mark.parametrize("kwargs", [
    dict(brownian=True, hurst=0.5),
    dict(),
    dict(hurst=1.5),
    dict(hurst=0.0),
])
def test_invalid_configurations(kwargs):
    with pytest.raises(ConfigError):
        synthesize_midpoint_path(3, **kwargs)


def test_invalid_depth():
    with pytest.raises(ConfigError):
        synthesize_midpoint_path(0, brownian=True)
