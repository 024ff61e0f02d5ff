import numpy as np
import pytest

from treesample import build_innovations_tree


def scale_invariant_config(depth, branching=2, rho=1.0, innovation_variance=1.0,
                           root_variance=1.0):
    if isinstance(branching, int):
        branching = [branching] * depth
    if isinstance(rho, (int, float)):
        rho = [rho] * depth
    if isinstance(innovation_variance, (int, float)):
        innovation_variance = [innovation_variance] * depth
    return {
        "type": "innovations",
        "root_variance": root_variance,
        "scales": [{"branching": branching[j], "rho": rho[j],
                    "innovation_variance": innovation_variance[j]}
                   for j in range(depth)],
    }


def make_scale_invariant(depth, **kwargs):
    return build_innovations_tree(scale_invariant_config(depth, **kwargs))


@pytest.fixture
def t2():
    """Depth-1 binary tree: root variance 1, rho 1, innovation variance 1."""
    return make_scale_invariant(1)


@pytest.fixture
def t4():
    """Depth-2 binary scale-invariant tree with unit parameters."""
    return make_scale_invariant(2)


def random_innovations_tree(rng, max_depth=3, branchings=(2, 3), max_leaves=12,
                            rho_range=(0.3, 2.0), w_range=(0.1, 5.0),
                            root_range=(0.5, 2.0)):
    """Random tree with per-node parameters drawn inside the given ranges.

    Shapes are resampled until the leaf count stays within ``max_leaves`` so
    exhaustive oracles remain cheap.
    """
    while True:
        depth = int(rng.integers(1, max_depth + 1))
        shape = [int(rng.choice(branchings)) for _ in range(depth)]
        if int(np.prod(shape)) <= max_leaves:
            break
    config = {
        "type": "innovations",
        "root_variance": float(rng.uniform(*root_range)),
        "scales": [{"branching": b, "rho": 1.0, "innovation_variance": 1.0}
                   for b in shape],
    }
    base = build_innovations_tree(config)
    overrides = [
        {"node": str(addr),
         "rho": float(rng.uniform(*rho_range)),
         "innovation_variance": float(rng.uniform(*w_range))}
        for addr in base.nodes if not addr.is_root
    ]
    config["overrides"] = overrides
    return build_innovations_tree(config)
