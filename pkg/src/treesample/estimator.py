"""Exact linear minimum mean-squared error (LMMSE) estimation.

Given a target node V and a leaf sample L, the best linear estimate has
coefficients solving ``Q_L alpha = cov(L, V)`` and error
``E = var(V) - cov(L, V)' alpha``.  The solve goes through a symmetric
positive-definite factorization; factorization failure signals a linearly
dependent or otherwise invalid leaf set.

Also provided: the parallel-resistor identity linking the reciprocal error
at a node to the reciprocal errors achieved through each of its children,

    1/E(V|L) + (P - 1)/var(V) = sum_k 1/E(V|L_k),

with empty child restrictions contributing 1/var(V).

All functions are pure and operate on immutable models; they can be called
concurrently without coordination.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .addresses import LeafSet, NodeAddress
from .errors import DomainError

_NEGATIVE_LMMSE_TOL = 1e-12


@dataclass
class LeafCovariance:
    """Covariance matrix of a leaf sample plus its covariances with a target."""

    q: np.ndarray           # (n, n) symmetric positive definite
    target_cov: np.ndarray  # (n,) cov(leaf_i, V_target)


@dataclass
class EstimateReport:
    """Result of an LMMSE evaluation."""

    lmmse: float
    coefficients: np.ndarray
    normalized_lmmse: float
    target: NodeAddress
    leaf_set: LeafSet


def _validate_leaves(model, leaf_set):
    for addr in leaf_set:
        if not model.contains(addr) or not model.is_leaf(addr):
            raise DomainError(f"{addr} is not a leaf of the model")


def leaf_covariance(model, target, leaf_set: LeafSet) -> LeafCovariance:
    """Build Q_L and cov(L, V_target) for a non-empty leaf sample."""
    target = NodeAddress.parse(target)
    if not leaf_set:
        raise DomainError("leaf covariance requires a non-empty leaf set")
    _validate_leaves(model, leaf_set)
    addrs = leaf_set.addresses
    n = len(addrs)
    q = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            q[i, j] = q[j, i] = model.covariance(addrs[i], addrs[j])
    t = np.array([model.covariance(addr, target) for addr in addrs])
    return LeafCovariance(q=q, target_cov=t)


def lmmse(model, target, leaf_set: LeafSet) -> EstimateReport:
    """LMMSE of estimating V_target from the leaf sample (empty allowed)."""
    target = NodeAddress.parse(target)
    var = model.variance(target)
    if not leaf_set:
        return EstimateReport(lmmse=var, coefficients=np.empty(0),
                              normalized_lmmse=1.0, target=target, leaf_set=leaf_set)
    lc = leaf_covariance(model, target, leaf_set)
    try:
        factor = scipy.linalg.cho_factor(lc.q)
    except scipy.linalg.LinAlgError:
        raise DomainError(
            "leaf covariance matrix is not positive definite: the leaf set is "
            "linearly dependent or the model is inconsistent") from None
    alpha = scipy.linalg.cho_solve(factor, lc.target_cov)
    err = var - float(lc.target_cov @ alpha)
    if err < -_NEGATIVE_LMMSE_TOL:
        raise DomainError(f"computed LMMSE {err} is negative: inconsistent model")
    err = max(err, 0.0)
    return EstimateReport(lmmse=err, coefficients=alpha,
                          normalized_lmmse=err / var, target=target,
                          leaf_set=leaf_set)


def parallel_resistor_residual(tree, node, leaf_set: LeafSet) -> float:
    """Absolute residual of the parallel-resistor identity at ``node``.

    ``leaf_set`` must lie inside the subtree of ``node``, which must have at
    least one child.
    """
    node = NodeAddress.parse(node)
    children = tree.children(node)
    if not children:
        raise DomainError(f"{node} is a leaf; the identity needs children")
    for addr in leaf_set:
        if not addr.is_within(node):
            raise DomainError(f"leaf {addr} lies outside the subtree of {node}")
    var = tree.variance(node)
    lhs = 1.0 / lmmse(tree, node, leaf_set).lmmse + (len(children) - 1) / var
    rhs = 0.0
    for child in children:
        sub = leaf_set.restricted_to(child)
        rhs += 1.0 / lmmse(tree, node, sub).lmmse
    return abs(lhs - rhs)
