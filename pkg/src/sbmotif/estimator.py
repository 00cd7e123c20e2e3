"""Median-of-means pair decisions and community recovery.

For each vertex pair, the remaining vertices are split into equal
blocks, the motif count is evaluated per block, and the median is
compared against half the same-community expectation for a block-sized
instance.  Pairs declared "same" define a graph whose connected
components are the recovered communities.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .counting import as_dense, count_blocks, expected_count_same
from .motif import Motif
from .sbm import CenteredAdjacency, membership_value

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EstimatorConfig:
    """Knobs of the pairwise decision rule.

    ``Lambda`` must divide n - 2 at use time.  The asymptotic default is
    ``24 * log(n)`` blocks, far too many at desk scale, where the
    block-instance size N = (n-2)/Lambda + 2 must stay >= 2(|V|-2) + 4
    for the count to concentrate; a too-small N warns but is not
    rejected.  The true (K, lambda, q) are inputs: the decision
    threshold is defined with known parameters.
    """

    motif: Motif
    K: int
    lam: float
    q: float
    Lambda: int
    threshold_scale: float = 0.5

    def __post_init__(self):
        if self.Lambda < 1:
            raise ValueError(f"Lambda must be at least 1, got {self.Lambda}")
        if self.lam <= 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.K < 1:
            raise ValueError(f"K must be at least 1, got {self.K}")


def asymptotic_block_count(n: int) -> int:
    """The paper-default number of blocks, 24 log(n), rounded."""
    return max(1, round(24 * math.log(n)))


def suggest_divisible_n(n: int, Lambda: int) -> int:
    """Nearest n' >= 3 with (n' - 2) divisible by Lambda."""
    rem = (n - 2) % Lambda
    down, up = n - rem, n + (Lambda - rem)
    if down >= 3 and (rem <= Lambda - rem):
        return down
    return up


def make_blocks(n: int, i: int, j: int, Lambda: int) -> list[tuple[int, ...]]:
    """Deterministic round-robin split of [n] minus {i, j} into Lambda
    equal blocks."""
    if (n - 2) % Lambda != 0:
        raise ValueError(
            f"Lambda = {Lambda} does not divide n - 2 = {n - 2}; "
            f"nearest valid n is {suggest_divisible_n(n, Lambda)}"
        )
    rest = sorted(set(range(n)) - {i, j})
    return [tuple(rest[k::Lambda]) for k in range(Lambda)]


def median_of_means(values) -> float:
    """Median of the block values; even length takes the lower middle."""
    values = list(values)
    if not values:
        raise ValueError("median of an empty list")
    return sorted(values)[(len(values) - 1) // 2]


@dataclass(frozen=True)
class PairEstimate:
    M: float
    threshold: float
    xhat: float


def block_instance_size(n: int, Lambda: int) -> int:
    return (n - 2) // Lambda + 2


def decision_threshold(config: EstimatorConfig, n: int) -> float:
    """Threshold for declaring a pair same-community: half (by default)
    of the same-community expectation at the block-instance size."""
    N = block_instance_size(n, config.Lambda)
    d = config.motif.num_vertices - 2
    if N < 2 * d + 4:
        logger.warning(
            "block-instance size N = %d is below 2(|V|-2)+4 = %d; "
            "the concentration regime does not apply", N, 2 * d + 4,
        )
    return config.threshold_scale * expected_count_same(N, config.K, config.lam, config.motif)


def estimate_pair(Y, config: EstimatorConfig, i: int, j: int,
                  threshold: float | None = None) -> PairEstimate:
    Yd = as_dense(Y)
    n = Yd.shape[0]
    if threshold is None:
        threshold = decision_threshold(config, n)
    blocks = make_blocks(n, i, j, config.Lambda)
    results = count_blocks(Yd, config.motif, i, j, blocks)
    M = median_of_means([res.value for res in results])
    xhat = (1.0 if M > threshold else 0.0) - 1.0 / config.K
    return PairEstimate(M=M, threshold=threshold, xhat=xhat)


@dataclass(frozen=True)
class RecoveryResult:
    xhat: np.ndarray
    clusters: list[tuple[int, ...]]
    exact_match: bool
    pair_error_rate: float


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)

    def components(self) -> list[tuple[int, ...]]:
        groups: dict[int, list[int]] = {}
        for x in range(len(self.parent)):
            groups.setdefault(self.find(x), []).append(x)
        return sorted(tuple(g) for g in groups.values())


def recover(Y: CenteredAdjacency, config: EstimatorConfig, workers: int = 1) -> RecoveryResult:
    """Pairwise decisions for all i < j, then connected components.

    Pairs are independent and may be processed by several threads (the
    counting kernel releases the GIL); results are merged by pair index,
    so the output does not depend on the worker count.
    """
    if not isinstance(Y, CenteredAdjacency):
        raise TypeError("recover needs a CenteredAdjacency (ground truth lives in its sample)")
    n = Y.n
    Yd = Y.dense
    threshold = decision_threshold(config, n)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def run_pair(pair):
        i, j = pair
        return estimate_pair(Yd, config, i, j, threshold=threshold)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            estimates = list(pool.map(run_pair, pairs, chunksize=64))
    else:
        estimates = [run_pair(p) for p in pairs]

    xhat = np.zeros((n, n))
    uf = UnionFind(n)
    same_value = 1.0 - 1.0 / config.K
    z = Y.sample.z
    errors = 0
    for (i, j), est in zip(pairs, estimates):
        xhat[i, j] = est.xhat
        if est.xhat == same_value:
            uf.union(i, j)
        if est.xhat != membership_value(z, i, j, config.K):
            errors += 1
    clusters = uf.components()
    truth = Y.sample.true_partition()
    return RecoveryResult(
        xhat=xhat,
        clusters=clusters,
        exact_match=clusters == truth,
        pair_error_rate=errors / len(pairs),
    )
