"""Midpoint-displacement path synthesis.

A coarse Gaussian total is refined scale by scale: each node splits into
``parent/2 + W`` and ``parent/2 - W`` with an independent innovation W, so
the values at any scale sum back to the root exactly.  The Brownian
schedule halves the innovation variance per scale starting from 1/4; the
fBm-style schedule picks innovation variances so scale-j nodes match the
variance ``(2**-j)**(2*H)`` of fBm increments at that time scale (exact for
H = 1/2, an approximation otherwise).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass
class PathSynthesis:
    """Finest-scale increments per path plus their running sums."""

    depth: int
    increments: np.ndarray  # shape (paths, 2**depth)
    cumulative: np.ndarray  # shape (paths, 2**depth)
    root: np.ndarray        # shape (paths,), the total each path refines


def brownian_innovation_variances(depth: int) -> np.ndarray:
    """Innovation variance 2**-(j+1) for scales j = 1 .. depth."""
    _check_depth(depth)
    return 2.0 ** -(np.arange(1, depth + 1) + 1.0)


def fbm_innovation_variances(depth: int, hurst: float) -> np.ndarray:
    """Innovation variances matching scale-j node variance to (2**-j)**(2H)."""
    _check_depth(depth)
    if isinstance(hurst, bool) or not isinstance(hurst, (int, float)):
        raise ConfigError(f"H must be a number, got {hurst!r}")
    if not 0 < hurst < 1:
        raise ConfigError(f"H must lie in (0, 1), got {hurst}")
    v = 2.0 ** (-2.0 * hurst * np.arange(depth + 1))
    w = v[1:] - v[:-1] / 4.0
    if np.any(w <= 0):
        raise ConfigError("derived innovation variance is not positive")
    return w


def additive_leaf_values(root_variance: float, innovation_variances,
                         paths: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Run the generic binary refinement; returns (root draws, leaf values).

    Deterministic for a given seed: the root draws come first, then one
    innovation block per scale.
    """
    w = np.asarray(innovation_variances, dtype=float)
    if root_variance <= 0:
        raise ConfigError("root_variance must be positive")
    if w.ndim != 1 or w.size < 1:
        raise ConfigError("innovation_variances must be a non-empty sequence")
    if np.any(w <= 0):
        raise ConfigError("innovation variances must be positive")
    if paths < 1:
        raise ConfigError("paths must be >= 1")
    rng = np.random.default_rng(seed)
    level = math.sqrt(root_variance) * rng.standard_normal((paths, 1))
    root = level[:, 0].copy()
    for wj in w:
        noise = math.sqrt(wj) * rng.standard_normal(level.shape)
        half = level / 2.0
        nxt = np.empty((level.shape[0], level.shape[1] * 2))
        nxt[:, 0::2] = half + noise
        nxt[:, 1::2] = half - noise
        level = nxt
    return root, level


def synthesize_midpoint_path(depth: int, *, hurst: float | None = None,
                             brownian: bool = False, paths: int = 1,
                             seed: int = 0) -> PathSynthesis:
    """Synthesize ``paths`` sample paths down to 2**depth increments.

    Exactly one of ``brownian`` / ``hurst`` selects the variance schedule;
    ``hurst=0.5`` coincides with the Brownian case.  Output is a pure
    function of (depth, schedule, paths, seed).
    """
    _check_depth(depth)
    if brownian == (hurst is not None):
        raise ConfigError("choose exactly one of brownian=True or hurst=H")
    if brownian:
        w = brownian_innovation_variances(depth)
    else:
        w = fbm_innovation_variances(depth, hurst)
    root, increments = additive_leaf_values(1.0, w, paths, seed)
    return PathSynthesis(depth=depth, increments=increments,
                         cumulative=np.cumsum(increments, axis=1), root=root)


def _check_depth(depth):
    if isinstance(depth, bool) or not isinstance(depth, int) or depth < 1:
        raise ConfigError(f"depth must be an integer >= 1, got {depth!r}")
