import numpy as np
import pytest

from treesample import (ConfigError, DomainError, LeafSet, NodeAddress, ROOT,
                        additive_leaf_values, build_covariance_tree,
                        build_innovations_tree, build_wig_covariance_tree,
                        matched_innovations_tree, node_covariance, proximity,
                        wig_innovation_variances)

from conftest import make_scale_invariant, random_innovations_tree, scale_invariant_config


# -- generic builder ---------------------------------------------------------


def test_t2_leaf_variances(t2):
    assert [str(a) for a in t2.leaves] == ["1", "2"]
    for leaf in t2.leaves:
        assert t2.variance(leaf) == 2.0


def test_t4_leaf_variances(t4):
    assert [str(a) for a in t4.leaves] == ["11", "12", "21", "22"]
    for leaf in t4.leaves:
        assert t4.variance(leaf) == 3.0
    assert t4.leaf_count(ROOT) == 4
    assert t4.leaf_count(NodeAddress.parse("1")) == 2


def test_override_five_times_right_innovation():
    config = scale_invariant_config(3)
    config["overrides"] = [{"node": "2", "innovation_variance": 5.0}]
    tree = build_innovations_tree(config)
    assert tree.variance(NodeAddress.parse("1")) == 2.0
    assert tree.variance(NodeAddress.parse("2")) == 6.0
    assert tree.innovation_variance(NodeAddress.parse("2")) == 5.0
    # Sibling parameters untouched.
    assert tree.innovation_variance(NodeAddress.parse("1")) == 1.0


def test_variance_recursion_exact():
    rng = np.random.default_rng(5)
    for _ in range(20):
        tree = random_innovations_tree(rng)
        for addr in tree.nodes:
            if addr.is_root:
                continue
            r = tree.rho(addr)
            expected = r * r * tree.variance(addr.parent()) + tree.innovation_variance(addr)
            assert tree.variance(addr) == expected


@pytest.mark.parametrize("mutate,err", [
    (lambda c: c.__setitem__("root_variance", 0.0), "root_variance"),
    (lambda c: c["scales"][0].__setitem__("rho", 0), "rho"),
    (lambda c: c["scales"][1].__setitem__("innovation_variance", -1.0),
     "innovation_variance"),
    (lambda c: c.__setitem__("prune", ["root"]), "prune"),
    (lambda c: c.__setitem__("overrides", [{"node": "333", "rho": 1.0}]), "override"),
    (lambda c: c.__setitem__("overrides", [{"node": "11"}]), "override"),
    (lambda c: c.__setitem__("extra", 1), "unknown"),
])
def test_builder_rejects_invalid_configs(mutate, err):
    config = scale_invariant_config(2)
    mutate(config)
    with pytest.raises(ConfigError):
        build_innovations_tree(config)


def test_prune_removes_subtrees_and_empty_interiors():
    config = scale_invariant_config(3)
    config["prune"] = ["21"]
    tree = build_innovations_tree(config)
    assert not tree.contains(NodeAddress.parse("21"))
    assert not tree.contains(NodeAddress.parse("211"))
    assert tree.contains(NodeAddress.parse("22"))
    assert tree.leaf_count(NodeAddress.parse("2")) == 2
    # Pruning both children of a node removes the node itself.
    config = scale_invariant_config(3)
    config["prune"] = ["21", "22"]
    tree = build_innovations_tree(config)
    assert not tree.contains(NodeAddress.parse("2"))
    assert tree.leaf_count(ROOT) == 4


# -- covariance queries -------------------------------------------------------


def test_node_covariance_hand_values(t4):
    # Same scale-1 parent: expanding both leaves as V_parent + W gives the
    # parent variance; different parents leave only the root term.
    assert node_covariance(t4, "11", "12") == 2.0
    assert node_covariance(t4, "11", "21") == 1.0
    assert node_covariance(t4, "root", "root") == 1.0
    assert node_covariance(t4, "11", "11") == 3.0


def test_node_covariance_symmetry_random_trees():
    rng = np.random.default_rng(11)
    for _ in range(10):
        tree = random_innovations_tree(rng)
        nodes = tree.nodes
        for _ in range(10):
            a = nodes[rng.integers(len(nodes))]
            b = nodes[rng.integers(len(nodes))]
            assert tree.covariance(a, b) == tree.covariance(b, a)


def test_covariance_invalid_address(t4):
    with pytest.raises(DomainError):
        node_covariance(t4, "11", "31")


def test_scale_invariant_trees_have_positive_progression():
    rng = np.random.default_rng(3)
    for _ in range(15):
        depth = int(rng.integers(1, 5))
        tree = make_scale_invariant(
            depth,
            branching=[int(rng.choice([2, 3])) for _ in range(depth)],
            rho=[float(rng.uniform(0.3, 2.0)) for _ in range(depth)],
            innovation_variance=[float(rng.uniform(0.1, 5.0)) for _ in range(depth)],
            root_variance=float(rng.uniform(0.5, 2.0)))
        c = tree.leaf_proximity_covariances()
        assert c[0] > 0
        assert np.all(np.diff(c) > 0)


# -- covariance trees ----------------------------------------------------------


def cov_tree(c, rho=1.0, root_variance=1.0, branching=2):
    depth = len(c) - 1
    return build_covariance_tree({
        "type": "covariance", "root_variance": root_variance, "rho": rho,
        "c": list(c), "scales": [{"branching": branching}] * depth,
    })


def test_proximity_hand_values():
    tree = cov_tree([1.0, 2.0, 3.0])
    assert proximity(tree, "11", "12") == 1
    assert proximity(tree, "11", "21") == 0
    assert proximity(tree, "11", "11") == 2
    with pytest.raises(DomainError):
        proximity(tree, "1", "11")


def test_progression_classification():
    assert cov_tree([1.0, 2.0, 3.0]).progression == "positive"
    assert cov_tree([0.5, 0.25, 1.0]).progression == "negative"
    assert cov_tree([1.0, 0.5, 2.0, 3.0], branching=2).progression == "mixed"


def test_covariance_tree_requires_spd():
    with pytest.raises(ConfigError):
        cov_tree([1.0, 2.0, 1.0])  # proximity-1 covariance above the variance


def test_covariance_tree_queries():
    tree = cov_tree([1.0, 2.0, 3.0], rho=0.25, root_variance=4.0)
    assert tree.covariance(NodeAddress.parse("11"), NodeAddress.parse("12")) == 2.0
    assert tree.covariance(ROOT, NodeAddress.parse("22")) == 0.25
    assert tree.variance(ROOT) == 4.0
    assert tree.variance(NodeAddress.parse("11")) == 3.0
    with pytest.raises(DomainError):
        tree.variance(NodeAddress.parse("1"))


# -- WIG ------------------------------------------------------------------------


def test_wig_h05_independent_increments():
    tree = build_wig_covariance_tree(2, 2, 0.5, 1.0)
    assert np.allclose(tree.c[:2], 0.0, atol=1e-15)
    assert tree.c[2] == 0.25
    assert tree.rho == 0.25
    assert tree.root_variance == 1.0


def test_wig_progressions():
    assert build_wig_covariance_tree(6, 2, 0.8, 1.0).progression == "positive"
    assert build_wig_covariance_tree(6, 2, 0.3, 1.0).progression == "negative"


def test_wig_rejects_non_binary():
    with pytest.raises(ConfigError):
        build_wig_covariance_tree(3, 3, 0.7, 1.0)
    with pytest.raises(ConfigError):
        build_wig_covariance_tree(3, 2, 1.2, 1.0)


def test_wig_covariances_match_monte_carlo_synthesis():
    # Synthesize leaf vectors with the same +/- construction and compare the
    # empirical covariances with the derived c, within 3 standard errors of
    # the per-pair product estimator.
    depth, hurst, amplitude, paths = 2, 0.5, 1.0, 100_000
    tree = build_wig_covariance_tree(depth, 2, hurst, amplitude)
    w = wig_innovation_variances(depth, hurst, amplitude)
    _, leaves = additive_leaf_values(amplitude, w, paths, seed=20240229)
    emp = leaves.T @ leaves / paths
    leaf_var = tree.c[depth]
    for m in range(depth + 1):
        pairs = [(i, j) for i in range(4) for j in range(4)
                 if tree.proximity(tree.leaves[i], tree.leaves[j]) == m]
        est = np.mean([emp[i, j] for i, j in pairs])
        se = np.sqrt((tree.c[m] ** 2 + leaf_var ** 2) / paths)
        assert abs(est - tree.c[m]) <= 3 * se


# -- matched innovations trees ---------------------------------------------------


def test_matched_tree_t4_parameters():
    matched = matched_innovations_tree(cov_tree([1.0, 2.0, 3.0]))
    assert matched.root_variance == 1.0
    for addr in matched.nodes:
        if addr.is_root:
            continue
        assert matched.rho(addr) == 1.0
        assert matched.innovation_variance(addr) == 1.0


def test_matched_tree_reproduces_wig_covariances_entrywise():
    cov = build_wig_covariance_tree(6, 2, 0.8, 1.0)
    matched = matched_innovations_tree(cov)
    assert np.max(np.abs(matched.full_leaf_covariance()
                         - cov.full_leaf_covariance())) <= 1e-12


def test_matched_tree_rejects_non_positive_progression():
    with pytest.raises(DomainError):
        matched_innovations_tree(cov_tree([1.0, 0.5, 2.0], branching=2))
    with pytest.raises(DomainError):
        matched_innovations_tree(build_wig_covariance_tree(4, 2, 0.3, 1.0))


# -- misc ------------------------------------------------------------------------


def test_full_leaf_covariance_is_positive_definite():
    rng = np.random.default_rng(17)
    for _ in range(10):
        tree = random_innovations_tree(rng)
        np.linalg.cholesky(tree.full_leaf_covariance())


def test_branching_by_scale_and_symmetry(t4):
    assert t4.branching_by_scale() == (2, 2)
    config = scale_invariant_config(2)
    config["prune"] = ["21"]
    pruned = build_innovations_tree(config)
    with pytest.raises(DomainError):
        pruned.branching_by_scale()
    assert not pruned.is_scale_invariant()
    assert t4.is_scale_invariant()
