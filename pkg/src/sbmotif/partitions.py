"""Set-partition labels: canonical form, enumeration, uniform sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np


@dataclass(frozen=True)
class PartitionLabels:
    """Community ids, one per vertex, in canonical restricted-growth form
    (the first occurrence of group g precedes that of g + 1)."""

    labels: tuple[int, ...]
    num_groups: int

    def __post_init__(self):
        seen: list[int] = []
        for g in self.labels:
            if g == len(seen):
                seen.append(g)
            elif not 0 <= g < len(seen):
                raise ValueError(f"labels {self.labels} are not in restricted-growth form")
        if len(seen) != self.num_groups:
            raise ValueError(
                f"num_groups = {self.num_groups} but labels use {len(seen)} groups"
            )

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "PartitionLabels":
        """Canonicalize arbitrary group ids by first-occurrence order."""
        remap: dict[int, int] = {}
        out = []
        for g in labels:
            if g not in remap:
                remap[g] = len(remap)
            out.append(remap[g])
        return cls(labels=tuple(out), num_groups=len(remap))

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[int]], size: int) -> "PartitionLabels":
        labels = [-1] * size
        for g, block in enumerate(blocks):
            for v in block:
                if labels[v] != -1:
                    raise ValueError(f"vertex {v} appears in two blocks")
                labels[v] = g
        if any(g == -1 for g in labels):
            raise ValueError("blocks do not cover all vertices")
        return cls.from_labels(labels)

    def blocks(self) -> list[tuple[int, ...]]:
        out: list[list[int]] = [[] for _ in range(self.num_groups)]
        for v, g in enumerate(self.labels):
            out[g].append(v)
        return [tuple(b) for b in out]


def iter_restricted_growth(m: int) -> Iterator[tuple[int, ...]]:
    """All restricted-growth strings of length m (all set partitions)."""
    labels = [0] * m

    def rec(k: int, groups: int):
        if k == m:
            yield tuple(labels)
            return
        for g in range(groups + 1):
            labels[k] = g
            yield from rec(k + 1, max(groups, g + 1))

    if m == 0:
        yield ()
    else:
        yield from rec(1, 1)


def bell_number(m: int) -> int:
    """Number of set partitions of m elements."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    b = [1]
    for n in range(m):
        b.append(sum(math.comb(n, k) * b[k] for k in range(n + 1)))
    return b[m]


def sample_uniform_partition(m: int, rng: np.random.Generator) -> PartitionLabels:
    """An exactly uniform random set partition of m elements.

    Recursively draws the size k of the block containing the smallest
    remaining element with probability C(rem-1, k-1) * B(rem-k) / B(rem),
    then the block members uniformly.  Exact integer draws while the
    Bell number fits in 63 bits (m <= 25), float weights beyond.
    """
    bell = [bell_number(k) for k in range(m + 1)]
    remaining = list(range(m))
    labels = [0] * m
    group = 0
    while remaining:
        rem = len(remaining)
        weights = [math.comb(rem - 1, k - 1) * bell[rem - k] for k in range(1, rem + 1)]
        total = bell[rem]
        if total < (1 << 62):
            x = int(rng.integers(0, total))
            k = 1
            acc = 0
            for w in weights:
                acc += w
                if x < acc:
                    break
                k += 1
        else:
            probs = np.asarray(weights, dtype=np.float64)
            k = 1 + int(rng.choice(rem, p=probs / probs.sum()))
        head, rest = remaining[0], remaining[1:]
        labels[head] = group
        if k > 1:
            picked = rng.choice(len(rest), size=k - 1, replace=False)
            for idx in sorted(int(t) for t in picked):
                labels[rest[idx]] = group
            rest = [v for t, v in enumerate(rest) if t not in {int(t2) for t2 in picked}]
        remaining = rest
        group += 1
    return PartitionLabels.from_labels(labels)
