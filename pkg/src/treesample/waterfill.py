"""Water-filling and optimal leaf selection.

The generic primitive maximizes a sum of non-decreasing discrete-concave
functions over allocations of n units across P tables: greedily give each
unit to the table with the largest forward difference (ties to the lowest
table index).  The resulting optimum h(n) is itself non-decreasing and
discrete-concave, and the allocations are nested in n.

Optimal leaf selection runs this primitive scale-recursively.  For every
node, a table mu maps a sample count to the best achievable reciprocal
LMMSE of that node given leaves of its own subtree.  Tables are built
bottom-up:

* a leaf child contributes the two-entry table
  ``[1/var(V), 1/(var(V) - cov(V, leaf)**2 / var(leaf))]`` toward its
  parent V;
* an interior child's table is re-targeted at the parent through the
  constant covariance ratio xi = cov(child, leaf)/cov(parent, leaf):
  with phi(n) = var(child) - 1/mu_child(n),
  ``mu(n) = (1/var(parent)) / (1 - phi(n) / (xi**2 var(parent)))``;
* a node merges its children's re-targeted tables by water-filling and
  subtracts (P - 1)/var(V) from the summed values (the parallel-resistor
  identity).

Replaying each node's greedy increment order then percolates the n-th
sample unit down to a concrete leaf, so the selected sets are nested and
the root table values are exactly the reciprocal optimal errors.

Table construction is sequential per tree; the produced tables are
immutable and safe to share.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .addresses import ROOT, LeafSet, NodeAddress
from .errors import DomainError
from .estimator import lmmse
from .trees import CovarianceTree, InnovationsTree, matched_innovations_tree

_REL_TOL = 1e-9


def _table_scale(values) -> float:
    return max(1.0, float(np.max(np.abs(values))))


@dataclass(frozen=True)
class ConcaveTable:
    """Values of a non-decreasing discrete-concave function on 0..M."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 1 or not np.all(np.isfinite(values)):
            raise DomainError("table must be a non-empty sequence of finite values")
        tol = _REL_TOL * _table_scale(values)
        diffs = np.diff(values)
        if diffs.size and np.min(diffs) < -tol:
            raise DomainError("table is not non-decreasing")
        if diffs.size > 1 and np.max(np.diff(diffs)) > tol:
            raise DomainError("table is not discrete-concave")

    @property
    def m(self) -> int:
        """Largest admissible count."""
        return len(self.values) - 1


@dataclass(frozen=True)
class Allocation:
    """Integer counts per table, summing to the allocated total."""

    counts: tuple[int, ...]

    @property
    def n(self) -> int:
        return sum(self.counts)


@dataclass
class WaterfillResult:
    allocations: list[Allocation]   # entry n is the optimal allocation of n units
    values: np.ndarray              # entry n is h(n), the maximal table sum
    increments: list[int]           # table index receiving the n-th unit


def waterfill(tables, n_max: int) -> WaterfillResult:
    """Greedy allocation of 0..n_max units across discrete-concave tables."""
    tables = [t if isinstance(t, ConcaveTable) else ConcaveTable(t) for t in tables]
    if not tables:
        raise DomainError("waterfill needs at least one table")
    total = sum(t.m for t in tables)
    if not 0 <= n_max <= total:
        raise DomainError(f"n_max must lie in [0, {total}], got {n_max}")

    counts = [0] * len(tables)
    heap = [(-(t.values[1] - t.values[0]), k) for k, t in enumerate(tables) if t.m > 0]
    heapq.heapify(heap)

    allocations = [Allocation(tuple(counts))]
    values = np.empty(n_max + 1)
    values[0] = sum(float(t.values[0]) for t in tables)
    increments = []
    for n in range(1, n_max + 1):
        _, k = heapq.heappop(heap)
        counts[k] += 1
        increments.append(k)
        if counts[k] < tables[k].m:
            v = tables[k].values
            heapq.heappush(heap, (-(v[counts[k] + 1] - v[counts[k]]), k))
        allocations.append(Allocation(tuple(counts)))
        values[n] = sum(float(t.values[c]) for t, c in zip(tables, counts))
    return WaterfillResult(allocations=allocations, values=values,
                           increments=increments)


def uniform_split_value(table: ConcaveTable, parts: int, n: int) -> float:
    """Optimal table sum when all ``parts`` tables are identical.

    Closed form of the water-filling optimum: counts are near-equal, so
    ``h(n) = (P - r) psi(q) + r psi(q + 1)`` with ``q, r = divmod(n, P)``.
    """
    if not isinstance(table, ConcaveTable):
        table = ConcaveTable(table)
    if parts < 1:
        raise DomainError("parts must be >= 1")
    if not 0 <= n <= parts * table.m:
        raise DomainError(f"n must lie in [0, {parts * table.m}], got {n}")
    q, r = divmod(n, parts)
    value = (parts - r) * float(table.values[q])
    if r:
        value += r * float(table.values[q + 1])
    return value


@dataclass
class MuTables:
    """Per-node reciprocal-error tables plus the greedy increment orders."""

    node_values: dict[NodeAddress, np.ndarray] = field(default_factory=dict)
    child_values: dict[NodeAddress, list[np.ndarray]] = field(default_factory=dict)
    increment_order: dict[NodeAddress, list[int]] = field(default_factory=dict)

    def select(self, tree, node, n: int) -> LeafSet:
        """Replay the greedy percolation: the first n leaves chosen under
        ``node``."""
        node = NodeAddress.parse(node)
        if not 0 <= n <= tree.leaf_count(node):
            raise DomainError(f"n must lie in [0, {tree.leaf_count(node)}], got {n}")
        counters: dict[NodeAddress, int] = {}
        chosen = []
        for _ in range(n):
            cursor = node
            while not tree.is_leaf(cursor):
                i = counters.get(cursor, 0)
                counters[cursor] = i + 1
                cursor = tree.children(cursor)[self.increment_order[cursor][i]]
            chosen.append(cursor)
        return LeafSet(tuple(chosen))


def _validate_mu(values, node, what):
    tol = _REL_TOL * _table_scale(values)
    if np.any(values <= 0):
        raise DomainError(f"{what} at node {node} is not positive")
    diffs = np.diff(values)
    if diffs.size and np.min(diffs) < -tol:
        raise DomainError(f"{what} at node {node} is not non-decreasing")
    if diffs.size > 1 and np.max(np.diff(diffs)) > tol:
        raise DomainError(f"{what} at node {node} violates discrete concavity")


def _lift_to_parent(tree, parent, child, child_mu):
    """Re-target a child's reciprocal-error table at its parent."""
    leaf = tree.first_leaf(child)
    xi = tree.covariance(child, leaf) / tree.covariance(parent, leaf)
    var_parent = tree.variance(parent)
    phi = tree.variance(child) - 1.0 / child_mu
    return (1.0 / var_parent) / (1.0 - phi / (xi * xi * var_parent))


def build_mu_tables(tree: InnovationsTree, n_max: int | None = None) -> MuTables:
    """Bottom-up construction of the reciprocal-error tables.

    Tables run over sample counts 0..N for each node (truncated at ``n_max``
    when given, which is all the selection of at most n_max leaves needs).
    Concavity violations beyond tolerance abort: the recursion guarantees
    concave tables, so a violation signals numeric or model inconsistency.
    """
    out = MuTables()
    for node in reversed(tree.nodes):
        children = tree.children(node)
        if not children:
            continue
        var = tree.variance(node)
        cap_node = tree.leaf_count(node) if n_max is None else min(
            tree.leaf_count(node), n_max)
        tabs = []
        for child in children:
            if tree.is_leaf(child):
                cov = tree.rho(child) * var
                err = var - cov * cov / tree.variance(child)
                tab = np.array([1.0 / var, 1.0 / err])
            else:
                tab = _lift_to_parent(tree, node, child, out.node_values[child])
            tab = tab[: min(len(tab) - 1, cap_node) + 1]
            _validate_mu(tab, node, "child table")
            tabs.append(tab)
        merged = waterfill([ConcaveTable(t) for t in tabs],
                           min(cap_node, sum(len(t) - 1 for t in tabs)))
        mu = merged.values - (len(children) - 1) / var
        _validate_mu(mu, node, "node table")
        out.node_values[node] = mu
        out.child_values[node] = tabs
        out.increment_order[node] = merged.increments
    return out


def optimal_leaf_sets(tree: InnovationsTree, n_max: int):
    """Optimal root-estimating leaf sets of sizes 1..n_max with their LMMSE.

    The returned sets are nested (a property of the greedy percolation, not
    claimed of every optimal set) and deterministic under the lowest-index
    tie-break.
    """
    if not 0 <= n_max <= tree.leaf_count(ROOT):
        raise DomainError(
            f"n_max must lie in [0, {tree.leaf_count(ROOT)}], got {n_max}")
    mu = build_mu_tables(tree, n_max)
    root_mu = mu.node_values[ROOT]
    counters: dict[NodeAddress, int] = {}
    chosen: list[NodeAddress] = []
    results = []
    for n in range(1, n_max + 1):
        cursor = ROOT
        while not tree.is_leaf(cursor):
            i = counters.get(cursor, 0)
            counters[cursor] = i + 1
            cursor = tree.children(cursor)[mu.increment_order[cursor][i]]
        chosen.append(cursor)
        results.append((LeafSet(tuple(chosen)), float(1.0 / root_mu[n])))
    return results


def uniform_leaf_sample(tree, n: int) -> LeafSet:
    """Leaf set with near-equal subtree counts at every node of a symmetric
    tree; count surpluses go to the lowest-index children."""
    tree.branching_by_scale()  # raises DomainError when not symmetric
    total = tree.leaf_count(ROOT)
    if not 0 <= n <= total:
        raise DomainError(f"n must lie in [0, {total}], got {n}")
    chosen: list[NodeAddress] = []

    def descend(node, quota):
        if quota == 0:
            return
        if tree.is_leaf(node):
            chosen.append(node)
            return
        children = tree.children(node)
        base, extra = divmod(quota, len(children))
        for k, child in enumerate(children):
            descend(child, base + 1 if k < extra else base)

    descend(ROOT, n)
    return LeafSet(tuple(chosen))


def clustered_leaf_set(tree, node) -> LeafSet:
    """All leaves of the subtree rooted at ``node``."""
    node = NodeAddress.parse(node)
    return LeafSet(tree.subtree_leaves(node))


def covariance_tree_optimal(cov: CovarianceTree, n: int):
    """Optimal size-n leaf set for estimating a covariance tree's root.

    Positive correlation progression required: the selection runs on the
    matched innovations tree (same leaf second-order structure, hence the
    same optimal sets) and the error is evaluated on the covariance tree
    itself.
    """
    if not 0 <= n <= cov.leaf_count(ROOT):
        raise DomainError(f"n must lie in [0, {cov.leaf_count(ROOT)}], got {n}")
    if n == 0:
        return LeafSet(), cov.root_variance
    matched = matched_innovations_tree(cov)
    leaf_set = optimal_leaf_sets(matched, n)[-1][0]
    return leaf_set, lmmse(cov, ROOT, leaf_set).lmmse


def covariance_tree_worst(cov: CovarianceTree, p: int) -> LeafSet:
    """Worst size-sigma**p leaf set on a constant-branching covariance tree.

    Positive correlation progression: the clustered leaves of a scale-(D-p)
    node (the lowest-address one is returned).  Negative progression: the
    uniform leaf sample.  Mixed progressions and non-constant branching are
    refused rather than guessed.
    """
    sigma = set(cov.branching)
    if len(sigma) != 1:
        raise DomainError("worst-case selection requires constant branching")
    if not 0 <= p <= cov.depth:
        raise DomainError(f"p must lie in [0, {cov.depth}], got {p}")
    progression = cov.progression
    if progression == "positive":
        return clustered_leaf_set(cov, NodeAddress((1,) * (cov.depth - p)))
    if progression == "negative":
        return uniform_leaf_sample(cov, sigma.pop() ** p)
    raise DomainError("worst-case selection is defined for strictly positive or "
                      "strictly negative correlation progression only")
