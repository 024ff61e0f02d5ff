"""Multiscale stochastic tree models.

Two model families are implemented.  In an *independent innovations tree*
every non-root node is a scaled copy of its parent plus an independent
innovation, ``V = rho * V_parent + W``.  In a *covariance tree* all leaves
sit at the same scale and the covariance of two leaves depends only on
their proximity, the scale of their lowest common ancestor.

Builders cover generic per-scale construction with per-node overrides and
subtree pruning, the binary WIG model whose per-scale variances decay as
``2**(-2*j*H)``, and the matched-innovations bridge that reproduces a
covariance tree's leaf second-order structure exactly.

All trees are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import bisect
import itertools
import math

import numpy as np

from .addresses import ROOT, LeafSet, NodeAddress
from .errors import ConfigError, DomainError


def _require_number(value, what):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{what} must be a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError(f"{what} must be finite, got {value!r}")
    return v


def _require_positive(value, what):
    v = _require_number(value, what)
    if v <= 0:
        raise ConfigError(f"{what} must be positive, got {value!r}")
    return v


def _require_keys(mapping, allowed, required, what):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{what} must be a mapping, got {mapping!r}")
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown field(s) {sorted(unknown)} in {what}")
    missing = required - set(mapping)
    if missing:
        raise ConfigError(f"missing field(s) {sorted(missing)} in {what}")


class InnovationsTree:
    """Tree of scalar random variables ``V = rho * V_parent + W``.

    Node variances are cached at construction via the recursion
    ``var(V) = rho**2 * var(V_parent) + var(W)``.
    """

    def __init__(self, root_variance, rho, innovation_variance, children, config=None):
        self.root_variance = _require_positive(root_variance, "root_variance")
        self._children = dict(children)
        self._rho = dict(rho)
        self._var_w = dict(innovation_variance)
        self.config = config

        if ROOT not in self._children:
            raise ConfigError("tree has no root")

        # Validate parameters and compute node variances top-down.
        self._variance = {ROOT: self.root_variance}
        order = [ROOT]
        i = 0
        while i < len(order):
            node = order[i]
            i += 1
            for child in self._children[node]:
                if child not in self._children:
                    raise ConfigError(f"node {child} has no children entry")
                r = self._rho.get(child)
                w = self._var_w.get(child)
                if r is None or w is None:
                    raise ConfigError(f"node {child} is missing rho / innovation variance")
                if r == 0:
                    raise ConfigError(f"rho must be nonzero at node {child}")
                if w <= 0:
                    raise ConfigError(f"innovation variance must be positive at node {child}")
                self._variance[child] = r * r * self._variance[node] + w
                order.append(child)
        if len(order) != len(self._children):
            raise ConfigError("children map contains nodes unreachable from the root")

        self._leaves = tuple(sorted(
            (a for a in order if not self._children[a]), key=lambda a: a.digits))
        self._leaf_index = {a: i for i, a in enumerate(self._leaves)}

        # Subtree leaf counts, bottom-up.
        self._n_leaves = {}
        for node in reversed(order):
            kids = self._children[node]
            self._n_leaves[node] = sum(self._n_leaves[c] for c in kids) if kids else 1
        self.depth = max(a.scale for a in self._leaves)
        self._order = tuple(order)
        self._full_cov = None

    # -- topology --------------------------------------------------------

    @property
    def leaves(self) -> tuple[NodeAddress, ...]:
        return self._leaves

    @property
    def nodes(self) -> tuple[NodeAddress, ...]:
        """All addresses in breadth-first order."""
        return self._order

    def contains(self, addr: NodeAddress) -> bool:
        return addr in self._children

    def _check(self, addr):
        if addr not in self._children:
            raise DomainError(f"node {addr} does not exist in this tree")

    def children(self, addr: NodeAddress) -> tuple[NodeAddress, ...]:
        self._check(addr)
        return self._children[addr]

    def is_leaf(self, addr: NodeAddress) -> bool:
        self._check(addr)
        return not self._children[addr]

    def leaf_count(self, addr: NodeAddress = ROOT) -> int:
        self._check(addr)
        return self._n_leaves[addr]

    def subtree_leaves(self, addr: NodeAddress) -> tuple[NodeAddress, ...]:
        self._check(addr)
        if addr.is_root:
            return self._leaves
        keys = [a.digits for a in self._leaves]
        lo = bisect.bisect_left(keys, addr.digits)
        hi = bisect.bisect_left(keys, addr.digits[:-1] + (addr.digits[-1] + 1,))
        return self._leaves[lo:hi]

    def first_leaf(self, addr: NodeAddress) -> NodeAddress:
        """Lowest-address leaf of the subtree rooted at ``addr``."""
        self._check(addr)
        while self._children[addr]:
            addr = self._children[addr][0]
        return addr

    def leaf_index(self, addr: NodeAddress) -> int:
        if addr not in self._leaf_index:
            raise DomainError(f"{addr} is not a leaf of this tree")
        return self._leaf_index[addr]

    def branching_by_scale(self) -> tuple[int, ...]:
        """Children count per scale; raises if the tree is not symmetric."""
        per_scale: dict[int, int] = {}
        for node in self._order:
            kids = self._children[node]
            if not kids:
                continue
            prev = per_scale.setdefault(node.scale, len(kids))
            if prev != len(kids):
                raise DomainError("tree is not symmetric: branching varies within a scale")
        if any(self._n_leaves[a] != 1 or a.scale != self.depth for a in self._leaves):
            raise DomainError("tree is not symmetric: leaves at mixed scales")
        return tuple(per_scale[s] for s in range(self.depth))

    def is_scale_invariant(self) -> bool:
        """True when branching, rho and innovation variance depend only on scale."""
        try:
            self.branching_by_scale()
        except DomainError:
            return False
        by_scale: dict[int, tuple[float, float]] = {}
        for addr, r in self._rho.items():
            params = (r, self._var_w[addr])
            prev = by_scale.setdefault(addr.scale, params)
            if prev != params:
                return False
        return True

    # -- second-order queries ---------------------------------------------

    def variance(self, addr: NodeAddress) -> float:
        self._check(addr)
        return self._variance[addr]

    def rho(self, addr: NodeAddress) -> float:
        self._check(addr)
        if addr.is_root:
            raise DomainError("the root has no rho")
        return self._rho[addr]

    def innovation_variance(self, addr: NodeAddress) -> float:
        self._check(addr)
        if addr.is_root:
            raise DomainError("the root has no innovation")
        return self._var_w[addr]

    def covariance(self, a: NodeAddress, b: NodeAddress) -> float:
        """cov(V_a, V_b): the variance of the lowest common ancestor scaled by
        the rho products along both downward paths."""
        self._check(a)
        self._check(b)
        if b.digits < a.digits:  # symmetric bit for bit
            a, b = b, a
        k = a.common_prefix_length(b)
        anc = a.ancestor_at(min(k, a.scale, b.scale))
        cov = self._variance[anc]
        for addr in (a, b):
            for s in range(anc.scale + 1, addr.scale + 1):
                cov *= self._rho[addr.ancestor_at(s)]
        return cov

    def leaf_proximity_covariances(self) -> np.ndarray:
        """Leaf-pair covariance per proximity for a scale-invariant tree."""
        if not self.is_scale_invariant():
            raise DomainError("leaf covariances are proximity-indexed only for "
                              "scale-invariant trees")
        c = np.empty(self.depth + 1)
        spine = [ROOT] + [NodeAddress((1,) * s) for s in range(1, self.depth + 1)]
        for m in range(self.depth + 1):
            tail = 1.0
            for s in range(m + 1, self.depth + 1):
                tail *= self._rho[spine[s]]
            c[m] = tail * tail * self._variance[spine[m]]
        return c

    def full_leaf_covariance(self) -> np.ndarray:
        """Dense covariance matrix of all leaves (cached)."""
        if self._full_cov is None:
            n = len(self._leaves)
            q = np.empty((n, n))
            for i in range(n):
                for j in range(i, n):
                    q[i, j] = q[j, i] = self.covariance(self._leaves[i], self._leaves[j])
            self._full_cov = q
        return self._full_cov

    def __eq__(self, other):
        if not isinstance(other, InnovationsTree):
            return NotImplemented
        return (self.root_variance == other.root_variance
                and self._children == other._children
                and self._rho == other._rho
                and self._var_w == other._var_w)

    def __repr__(self):
        return (f"InnovationsTree(depth={self.depth}, leaves={len(self._leaves)}, "
                f"root_variance={self.root_variance})")


class CovarianceTree:
    """Symmetric-branching tree whose leaf covariances are proximity-indexed.

    ``c[m]`` is the covariance of two leaves with proximity ``m``; ``c[D]``
    is the leaf variance.  ``rho`` is the common root-leaf covariance.  The
    full leaf covariance matrix is validated positive definite at
    construction.
    """

    def __init__(self, branching, c, rho, root_variance, config=None):
        branching = tuple(int(b) for b in branching)
        if len(branching) < 1 or any(b < 1 for b in branching):
            raise ConfigError("branching must list at least one scale with >= 1 children")
        self.branching = branching
        self.depth = len(branching)
        self.c = np.asarray([_require_number(x, "c entry") for x in c], dtype=float)
        if self.c.shape != (self.depth + 1,):
            raise ConfigError(
                f"c must have depth+1 = {self.depth + 1} entries, got {len(self.c)}")
        self.rho = _require_number(rho, "rho")
        self.root_variance = _require_positive(root_variance, "root_variance")
        self.config = config

        self._leaves = tuple(
            NodeAddress(d) for d in itertools.product(
                *[range(1, b + 1) for b in branching]))
        self._leaf_index = {a: i for i, a in enumerate(self._leaves)}

        self._full_cov = self.c[self._proximity_matrix()]
        try:
            np.linalg.cholesky(self._full_cov)
        except np.linalg.LinAlgError:
            raise ConfigError("leaf covariance matrix is not positive definite") from None

    def _proximity_matrix(self) -> np.ndarray:
        digits = np.array([a.digits for a in self._leaves])
        n = len(self._leaves)
        prox = np.zeros((n, n), dtype=int)
        same = np.ones((n, n), dtype=bool)
        for d in range(self.depth):
            col = digits[:, d]
            same &= col[:, None] == col[None, :]
            prox += same
        return prox

    # -- topology ----------------------------------------------------------

    @property
    def leaves(self) -> tuple[NodeAddress, ...]:
        return self._leaves

    def contains(self, addr: NodeAddress) -> bool:
        return (addr.scale <= self.depth
                and all(1 <= d <= self.branching[s] for s, d in enumerate(addr.digits)))

    def _check(self, addr):
        if not self.contains(addr):
            raise DomainError(f"node {addr} does not exist in this tree")

    def children(self, addr: NodeAddress) -> tuple[NodeAddress, ...]:
        self._check(addr)
        if addr.scale == self.depth:
            return ()
        return tuple(addr.child(k) for k in range(1, self.branching[addr.scale] + 1))

    def is_leaf(self, addr: NodeAddress) -> bool:
        self._check(addr)
        return addr.scale == self.depth

    def leaf_count(self, addr: NodeAddress = ROOT) -> int:
        self._check(addr)
        return math.prod(self.branching[addr.scale:])

    def subtree_leaves(self, addr: NodeAddress) -> tuple[NodeAddress, ...]:
        self._check(addr)
        if addr.is_root:
            return self._leaves
        keys = [a.digits for a in self._leaves]
        lo = bisect.bisect_left(keys, addr.digits)
        hi = bisect.bisect_left(keys, addr.digits[:-1] + (addr.digits[-1] + 1,))
        return self._leaves[lo:hi]

    def first_leaf(self, addr: NodeAddress) -> NodeAddress:
        """Lowest-address leaf of the subtree rooted at ``addr``."""
        self._check(addr)
        return NodeAddress(addr.digits + (1,) * (self.depth - addr.scale))

    def leaf_index(self, addr: NodeAddress) -> int:
        if addr not in self._leaf_index:
            raise DomainError(f"{addr} is not a leaf of this tree")
        return self._leaf_index[addr]

    def branching_by_scale(self) -> tuple[int, ...]:
        return self.branching

    # -- second-order queries ------------------------------------------------

    @property
    def progression(self) -> str:
        """Correlation progression: "positive", "negative" or "mixed"."""
        steps = self.c[1:self.depth] - self.c[:self.depth - 1]
        if self.c[0] > 0 and np.all(steps > 0):
            return "positive"
        if np.all(steps < 0):
            return "negative"
        return "mixed"

    def proximity(self, a: NodeAddress, b: NodeAddress) -> int:
        if not self.is_leaf(a) or not self.is_leaf(b):
            raise DomainError("proximity is defined for leaves only")
        return a.common_prefix_length(b)

    def variance(self, addr: NodeAddress) -> float:
        self._check(addr)
        if addr.is_root:
            return self.root_variance
        if addr.scale == self.depth:
            return float(self.c[self.depth])
        raise DomainError("covariance trees carry second-order data for the root "
                          "and the leaves only")

    def covariance(self, a: NodeAddress, b: NodeAddress) -> float:
        self._check(a)
        self._check(b)
        if a.is_root and b.is_root:
            return self.root_variance
        if a.is_root or b.is_root:
            other = b if a.is_root else a
            if other.scale != self.depth:
                raise DomainError("covariance with interior nodes is not defined")
            return self.rho
        return float(self.c[self.proximity(a, b)])

    def full_leaf_covariance(self) -> np.ndarray:
        return self._full_cov

    def __eq__(self, other):
        if not isinstance(other, CovarianceTree):
            return NotImplemented
        return (self.branching == other.branching
                and np.array_equal(self.c, other.c)
                and self.rho == other.rho
                and self.root_variance == other.root_variance)

    def __repr__(self):
        return (f"CovarianceTree(depth={self.depth}, branching={self.branching}, "
                f"progression={self.progression!r})")


# -- module-level query operations ------------------------------------------


def node_covariance(tree: InnovationsTree, a, b) -> float:
    """cov(V_a, V_b) on an innovations tree."""
    return tree.covariance(NodeAddress.parse(a), NodeAddress.parse(b))


def proximity(tree: CovarianceTree, a, b) -> int:
    """Scale of the lowest common ancestor of two leaves."""
    return tree.proximity(NodeAddress.parse(a), NodeAddress.parse(b))


# -- builders ----------------------------------------------------------------

_INNOVATIONS_KEYS = {"type", "root_variance", "scales", "overrides", "prune"}
_SCALE_KEYS = {"branching", "rho", "innovation_variance"}
_OVERRIDE_KEYS = {"node", "rho", "innovation_variance"}


def build_innovations_tree(config: dict) -> InnovationsTree:
    """Build an innovations tree from a configuration mapping.

    The mapping gives ``root_variance`` plus one entry per scale with
    ``branching``, ``rho`` and ``innovation_variance``; optional per-node
    ``overrides`` replace rho / innovation variance at single nodes and an
    optional ``prune`` list removes whole subtrees (interior nodes left
    without leaves are removed as well).  Unknown fields are rejected.
    """
    _require_keys(config, _INNOVATIONS_KEYS, {"root_variance", "scales"},
                  "innovations tree config")
    if config.get("type", "innovations") != "innovations":
        raise ConfigError(f"expected type 'innovations', got {config.get('type')!r}")
    root_variance = _require_positive(config["root_variance"], "root_variance")

    scales = config["scales"]
    if not isinstance(scales, list) or not scales:
        raise ConfigError("scales must be a non-empty list")
    base = []
    for j, entry in enumerate(scales):
        _require_keys(entry, _SCALE_KEYS, _SCALE_KEYS, f"scales[{j}]")
        b = entry["branching"]
        if isinstance(b, bool) or not isinstance(b, int) or b < 1:
            raise ConfigError(f"scales[{j}].branching must be an integer >= 1")
        r = _require_number(entry["rho"], f"scales[{j}].rho")
        if r == 0:
            raise ConfigError(f"scales[{j}].rho must be nonzero")
        w = _require_positive(entry["innovation_variance"],
                              f"scales[{j}].innovation_variance")
        base.append((b, r, w))
    depth = len(base)

    # Full product topology.
    children: dict[NodeAddress, tuple[NodeAddress, ...]] = {}
    frontier = [ROOT]
    for b, _, _ in base:
        nxt = []
        for node in frontier:
            kids = tuple(node.child(k) for k in range(1, b + 1))
            children[node] = kids
            nxt.extend(kids)
        frontier = nxt
    for leaf in frontier:
        children[leaf] = ()

    rho = {}
    var_w = {}
    for addr in children:
        if addr.is_root:
            continue
        b, r, w = base[addr.scale - 1]
        rho[addr] = r
        var_w[addr] = w

    norm_overrides = []
    for i, entry in enumerate(config.get("overrides", []) or []):
        _require_keys(entry, _OVERRIDE_KEYS, {"node"}, f"overrides[{i}]")
        if not ({"rho", "innovation_variance"} & set(entry)):
            raise ConfigError(f"overrides[{i}] must set rho and/or innovation_variance")
        addr = NodeAddress.parse(entry["node"])
        if addr.is_root:
            raise ConfigError("the root has no rho / innovation variance to override")
        if addr not in children:
            raise ConfigError(f"override address {addr} does not exist in the tree")
        norm = {"node": str(addr)}
        if "rho" in entry:
            r = _require_number(entry["rho"], f"overrides[{i}].rho")
            if r == 0:
                raise ConfigError(f"overrides[{i}].rho must be nonzero")
            rho[addr] = r
            norm["rho"] = r
        if "innovation_variance" in entry:
            w = _require_positive(entry["innovation_variance"],
                                  f"overrides[{i}].innovation_variance")
            var_w[addr] = w
            norm["innovation_variance"] = w
        norm_overrides.append(norm)

    norm_prune = []
    prune = config.get("prune", []) or []
    if prune:
        if not isinstance(prune, list):
            raise ConfigError("prune must be a list of node addresses")
        removed = set()
        for item in prune:
            addr = NodeAddress.parse(item)
            if addr.is_root:
                raise ConfigError("cannot prune the root")
            if addr not in children:
                raise ConfigError(f"prune address {addr} does not exist in the tree")
            norm_prune.append(str(addr))
            removed.update(a for a in children if a.is_within(addr))
        # Cascade: interior nodes whose children are all gone disappear too.
        changed = True
        while changed:
            changed = False
            for addr, kids in children.items():
                if addr in removed or not kids:
                    continue
                if all(k in removed for k in kids):
                    removed.add(addr)
                    changed = True
        if ROOT in removed:
            raise ConfigError("pruning removed every leaf of the tree")
        children = {a: tuple(k for k in kids if k not in removed)
                    for a, kids in children.items() if a not in removed}
        rho = {a: v for a, v in rho.items() if a not in removed}
        var_w = {a: v for a, v in var_w.items() if a not in removed}

    normalized = {
        "type": "innovations",
        "root_variance": root_variance,
        "scales": [{"branching": b, "rho": r, "innovation_variance": w}
                   for b, r, w in base],
    }
    if norm_overrides:
        normalized["overrides"] = norm_overrides
    if norm_prune:
        normalized["prune"] = norm_prune
    return InnovationsTree(root_variance, rho, var_w, children, config=normalized)


_COVARIANCE_KEYS = {"type", "root_variance", "scales", "depth", "c", "rho"}


def build_covariance_tree(config: dict) -> CovarianceTree:
    """Build a covariance tree from a configuration mapping.

    ``scales`` lists one ``{"branching": P}`` entry per scale; ``c`` gives
    the proximity covariances ``c[0] .. c[depth]`` and ``rho`` the common
    root-leaf covariance.  A redundant ``depth`` field, when present, must
    agree with ``len(scales)``.
    """
    _require_keys(config, _COVARIANCE_KEYS,
                  {"root_variance", "scales", "c", "rho"}, "covariance tree config")
    if config.get("type", "covariance") != "covariance":
        raise ConfigError(f"expected type 'covariance', got {config.get('type')!r}")
    scales = config["scales"]
    if not isinstance(scales, list) or not scales:
        raise ConfigError("scales must be a non-empty list")
    branching = []
    for j, entry in enumerate(scales):
        _require_keys(entry, {"branching"}, {"branching"}, f"scales[{j}]")
        b = entry["branching"]
        if isinstance(b, bool) or not isinstance(b, int) or b < 1:
            raise ConfigError(f"scales[{j}].branching must be an integer >= 1")
        branching.append(b)
    if "depth" in config and config["depth"] != len(branching):
        raise ConfigError(
            f"depth {config['depth']} disagrees with {len(branching)} scales entries")
    c = config["c"]
    if not isinstance(c, list):
        raise ConfigError("c must be a list of numbers")
    tree = CovarianceTree(branching, c, config["rho"], config["root_variance"])
    tree.config = {
        "type": "covariance",
        "root_variance": tree.root_variance,
        "scales": [{"branching": b} for b in branching],
        "c": [float(x) for x in c],
        "rho": tree.rho,
    }
    return tree


def wig_innovation_variances(depth: int, hurst: float, amplitude: float) -> np.ndarray:
    """Per-scale innovation variances of the binary additive WIG construction.

    Scale-j node variance is ``amplitude * 2**(-2*j*hurst)`` and children are
    formed as ``parent/2 +- W``, so ``var(W at scale j) = v_j - v_{j-1}/4``.
    """
    if isinstance(depth, bool) or not isinstance(depth, int) or depth < 1:
        raise ConfigError(f"depth must be an integer >= 1, got {depth!r}")
    hurst = _require_number(hurst, "H")
    if not 0 < hurst < 1:
        raise ConfigError(f"H must lie in (0, 1), got {hurst}")
    amplitude = _require_positive(amplitude, "amplitude")
    v = amplitude * 2.0 ** (-2.0 * hurst * np.arange(depth + 1))
    w = v[1:] - v[:-1] / 4.0
    if np.any(w <= 0):
        raise ConfigError("derived innovation variance is not positive for this "
                          "H / amplitude combination")
    return w


def build_wig_covariance_tree(depth: int, sigma: int, hurst: float,
                              amplitude: float) -> CovarianceTree:
    """Binary WIG covariance tree with Hurst-controlled variance decay.

    The proximity covariances are derived from the additive construction:
    two leaves whose lowest common ancestor sits at scale ``m`` share the
    ancestor value but receive the scale-(m+1) innovation with opposite
    signs, giving ``c_m = v_m / 4**(D-m) - w_{m+1} / 4**(D-m-1)`` for
    ``m < D`` and ``c_D = v_D``.
    """
    if sigma != 2:
        raise ConfigError("the WIG model is binary; sigma must be 2")
    w = wig_innovation_variances(depth, hurst, amplitude)
    v = amplitude * 2.0 ** (-2.0 * hurst * np.arange(depth + 1))
    c = np.empty(depth + 1)
    for m in range(depth):
        c[m] = v[m] / 4.0 ** (depth - m) - w[m] / 4.0 ** (depth - m - 1)
    c[depth] = v[depth]
    rho = amplitude / 2.0 ** depth
    tree = CovarianceTree((2,) * depth, c, rho, amplitude)
    tree.config = {"type": "wig", "depth": depth, "H": float(hurst),
                   "amplitude": float(amplitude)}

    expected = "positive" if hurst > 0.5 else ("negative" if hurst < 0.5 else "mixed")
    if tree.progression != expected:
        raise ConfigError(
            f"derived WIG covariances classify as {tree.progression!r}, "
            f"expected {expected!r} for H={hurst}")
    return tree


def matched_innovations_tree(cov: CovarianceTree) -> InnovationsTree:
    """Innovations tree reproducing a covariance tree's leaf covariances.

    Requires strictly increasing positive proximity covariances: the result
    has the same topology, rho = 1 everywhere, root variance ``c[0]`` and
    scale-j innovation variance ``c[j] - c[j-1]``; leaf-pair covariances
    then telescope back to ``c`` exactly.
    """
    c = cov.c
    if c[0] <= 0 or np.any(np.diff(c) <= 0):
        raise DomainError(
            "a matched innovations tree requires positive correlation progression "
            "(c[0] > 0 and c strictly increasing up to the leaf variance)")
    return build_innovations_tree({
        "type": "innovations",
        "root_variance": float(c[0]),
        "scales": [{"branching": cov.branching[j - 1], "rho": 1.0,
                    "innovation_variance": float(c[j] - c[j - 1])}
                   for j in range(1, cov.depth + 1)],
    })
