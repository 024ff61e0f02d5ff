"""Ground-truth machinery: exhaustive subset search, seeded random-pattern
surveys, and covariance-matrix sum / row-sum diagnostics.

Brute-force enumeration walks all size-n leaf subsets in lexicographic
index order, evaluating the root LMMSE in vectorized batches; ties resolve
to the first (lexicographically smallest) subset.  Surveys draw each
trial's subset from its own counter-based generator keyed on (seed, trial),
so trials are independent, order-insensitive and reproducible bit for bit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .addresses import ROOT, LeafSet
from .errors import CapExceededError, DomainError
from .trees import CovarianceTree
from .waterfill import uniform_leaf_sample

_CHUNK = 4096

DEFAULT_SUBSET_CAP = 10 ** 6


@dataclass
class BruteForceResult:
    n: int
    best_set: LeafSet
    best_lmmse: float
    worst_set: LeafSet
    worst_lmmse: float


@dataclass
class SurveyResult:
    """Normalized LMMSE of reference patterns and random size-n subsets."""

    n: int
    trials: int
    seed: int
    lmmse_uniform: float
    lmmse_clustered: float
    random_min: float | None
    random_max: float | None
    random_mean: float | None
    uniform_set: LeafSet
    clustered_set: LeafSet
    trial_values: np.ndarray | None = None


def _root_estimation_inputs(model):
    """Full leaf covariance matrix, root covariances, and root variance."""
    cov = model.full_leaf_covariance()
    target = np.array([model.covariance(leaf, ROOT) for leaf in model.leaves])
    return cov, target, model.variance(ROOT)


def _evaluate_index_sets(cov, target, var, index_sets):
    """Root LMMSE for a batch of leaf-index arrays, shape (batch, n)."""
    idx = np.asarray(index_sets)
    q = cov[idx[:, :, None], idx[:, None, :]]
    t = target[idx]
    sol = np.linalg.solve(q, t[:, :, None])[:, :, 0]
    return var - np.einsum("bi,bi->b", t, sol)


def brute_force_extremes(model, n: int, cap: int = DEFAULT_SUBSET_CAP) -> BruteForceResult:
    """Exact min and max of the root LMMSE over all size-n leaf subsets."""
    leaves = model.leaves
    total = len(leaves)
    if not 0 <= n <= total:
        raise DomainError(f"n must lie in [0, {total}], got {n}")
    count = math.comb(total, n)
    if count > cap:
        raise CapExceededError(
            f"{count} subsets of size {n} exceed the cap of {cap}")
    if n == 0:
        empty = LeafSet()
        var = model.variance(ROOT)
        return BruteForceResult(n, empty, var, empty, var)

    cov, target, var = _root_estimation_inputs(model)
    combos = itertools.combinations(range(total), n)
    best_val = math.inf
    worst_val = -math.inf
    best_idx = worst_idx = None
    while True:
        chunk = list(itertools.islice(combos, _CHUNK))
        if not chunk:
            break
        errs = _evaluate_index_sets(cov, target, var, chunk)
        i_min = int(np.argmin(errs))
        i_max = int(np.argmax(errs))
        if errs[i_min] < best_val:
            best_val = float(errs[i_min])
            best_idx = chunk[i_min]
        if errs[i_max] > worst_val:
            worst_val = float(errs[i_max])
            worst_idx = chunk[i_max]
    as_set = lambda idx: LeafSet(tuple(leaves[i] for i in idx))
    return BruteForceResult(n, as_set(best_idx), best_val,
                            as_set(worst_idx), worst_val)


def _trial_subset(total, n, seed, trial):
    """Partial Fisher-Yates shuffle keyed on (seed, trial)."""
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, trial],
                                                            dtype=np.uint64)))
    pool = np.arange(total)
    draws = rng.integers(low=np.arange(n), high=total)
    for i in range(n):
        j = int(draws[i])
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:n]


def random_pattern_survey(model: CovarianceTree, n: int, trials: int, seed: int,
                          keep_values: bool = False) -> SurveyResult:
    """Survey the normalized root LMMSE over random size-n leaf subsets.

    Reference patterns: the uniform leaf sample and the clustered pattern of
    the first n leaves in address order (a whole subtree whenever n is a
    power of the branching factor).  With ``trials=0`` only the references
    are evaluated and the random fields stay empty.
    """
    if not isinstance(model, CovarianceTree):
        raise DomainError("random-pattern surveys run on covariance trees")
    total = len(model.leaves)
    if not 1 <= n <= total:
        raise DomainError(f"n must lie in [1, {total}], got {n}")
    if trials < 0:
        raise DomainError("trials must be >= 0")
    if seed < 0:
        raise DomainError("seed must be >= 0")

    cov, target, var = _root_estimation_inputs(model)
    uniform = uniform_leaf_sample(model, n)
    clustered = LeafSet(model.leaves[:n])
    refs = np.array([[model.leaf_index(a) for a in uniform],
                     [model.leaf_index(a) for a in clustered]])
    ref_errs = _evaluate_index_sets(cov, target, var, refs) / var

    values = None
    random_min = random_max = random_mean = None
    if trials:
        subsets = np.empty((trials, n), dtype=int)
        for t in range(trials):
            subsets[t] = _trial_subset(total, n, seed, t)
        errs = np.empty(trials)
        for start in range(0, trials, _CHUNK):
            block = subsets[start:start + _CHUNK]
            errs[start:start + len(block)] = _evaluate_index_sets(
                cov, target, var, block)
        values = errs / var
        random_min = float(values.min())
        random_max = float(values.max())
        random_mean = float(values.mean())

    return SurveyResult(
        n=n, trials=trials, seed=seed,
        lmmse_uniform=float(ref_errs[0]), lmmse_clustered=float(ref_errs[1]),
        random_min=random_min, random_max=random_max, random_mean=random_mean,
        uniform_set=uniform, clustered_set=clustered,
        trial_values=values if keep_values else None)


def q_sum(model: CovarianceTree, leaf_set: LeafSet) -> float:
    """Sum of all entries of the leaf-sample covariance matrix."""
    if not isinstance(model, CovarianceTree):
        raise DomainError("q_sum is defined on covariance trees")
    idx = [model.leaf_index(a) for a in leaf_set]
    q = model.full_leaf_covariance()[np.ix_(idx, idx)]
    return float(q.sum())


def row_sum_eigen_check(model: CovarianceTree, leaf_set: LeafSet):
    """(constant, value): whether all row sums of Q_L agree within 1e-9
    relative, and their mean.  When constant, the all-ones vector is an
    eigenvector of Q_L with this eigenvalue."""
    if not isinstance(model, CovarianceTree):
        raise DomainError("row-sum checks are defined on covariance trees")
    if not leaf_set:
        raise DomainError("row-sum check requires a non-empty leaf set")
    idx = [model.leaf_index(a) for a in leaf_set]
    q = model.full_leaf_covariance()[np.ix_(idx, idx)]
    rows = q.sum(axis=1)
    spread = float(rows.max() - rows.min())
    scale = max(1.0, float(np.abs(rows).max()))
    return spread <= 1e-9 * scale, float(rows.mean())
