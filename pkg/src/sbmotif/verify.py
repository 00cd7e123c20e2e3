"""Structural certification of motifs.

The key property a motif must satisfy: for every partition of its
vertices with v1 and v2 in the same group, the number of edges crossing
groups is at least ``r * (groups - 1)`` where ``r = |E| / (|V| - 2)``.
This module certifies that inequality exhaustively on small vertex sets
and by sampling otherwise, plus targeted subset checks for the boundary
and fastener counting arguments behind it, and a sampled cap on the
edges shared by two overlapping injections.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._core import get_kernels
from .motif import Motif, MotifError
from .partitions import PartitionLabels, sample_uniform_partition
from .sbm import rng_stream

DEFAULT_EXHAUSTIVE_CAP = 13
SUBSET_EXHAUSTIVE_CAP = 1 << 20

_CERTIFY_STREAM = 10
_SUBSET_STREAM = 11
_OVERLAP_STREAM = 12


class ExhaustiveCapExceeded(ValueError):
    """The motif is too large for exhaustive enumeration; sample instead."""


@dataclass(frozen=True)
class SlackReport:
    min_slack: Fraction
    argmin_partition: PartitionLabels
    partitions_checked: int
    mode: str


@dataclass(frozen=True)
class LemmaReport:
    ok: bool
    witness: tuple[int, ...] | None
    mode: str
    subsets_checked: int


@dataclass(frozen=True)
class OverlapReport:
    ok: bool
    witness: dict | None
    equality_at_full_overlap: bool
    trials: int


def edges_across(motif: Motif, partition) -> int:
    """Number of motif edges whose endpoints get distinct labels."""
    labels = partition.labels if isinstance(partition, PartitionLabels) else tuple(partition)
    if len(labels) != motif.num_vertices:
        raise ValueError(
            f"partition covers {len(labels)} vertices, motif has {motif.num_vertices}"
        )
    return sum(1 for u, w in motif.edges if labels[u] != labels[w])


def slack_of(motif: Motif, partition) -> Fraction:
    """Exact slack ``|E_across| - r * (groups - 1)`` of one partition."""
    if not isinstance(partition, PartitionLabels):
        partition = PartitionLabels.from_labels(partition)
    r = motif.r
    across = edges_across(motif, partition)
    return Fraction(across * r.denominator - r.numerator * (partition.num_groups - 1),
                    r.denominator)


def _merged_items(motif: Motif) -> tuple[list[int], dict[int, int]]:
    """Item order for enumeration with v1 and v2 pre-merged as item 0."""
    others = [v for v in range(motif.num_vertices) if v not in (motif.v1, motif.v2)]
    index = {motif.v1: 0, motif.v2: 0}
    for k, v in enumerate(others):
        index[v] = k + 1
    return others, index


def _expand_merged_labels(motif: Motif, merged: Sequence[int]) -> PartitionLabels:
    others, index = _merged_items(motif)
    full = [0] * motif.num_vertices
    for v in range(motif.num_vertices):
        full[v] = int(merged[index[v]])
    return PartitionLabels.from_labels(full)


def _report(motif: Motif, min_scaled: int, argmin: PartitionLabels,
            checked: int, mode: str) -> SlackReport:
    r = motif.r
    min_slack = Fraction(min_scaled, r.denominator)
    recomputed = slack_of(motif, argmin)
    if recomputed != min_slack:
        raise AssertionError(
            f"slack recomputation mismatch: {recomputed} != {min_slack}"
        )
    return SlackReport(min_slack=min_slack, argmin_partition=argmin,
                       partitions_checked=checked, mode=mode)


def certify_exhaustive(motif: Motif, max_vertices: int = DEFAULT_EXHAUSTIVE_CAP,
                       kernels=None) -> SlackReport:
    """Minimum slack over ALL partitions with v1, v2 in the same group.

    A nonnegative minimum is the structural certificate.  Enumeration
    runs over restricted-growth strings with v1 and v2 pre-merged.
    """
    if motif.num_vertices > max_vertices:
        raise ExhaustiveCapExceeded(
            f"|V| = {motif.num_vertices} exceeds the exhaustive cap {max_vertices}; "
            "use certify_sampled"
        )
    if kernels is None:
        kernels = get_kernels()
    others, index = _merged_items(motif)
    num_items = len(others) + 1
    per_item: list[list[int]] = [[] for _ in range(num_items)]
    for u, w in motif.edges:
        iu, iw = index[u], index[w]
        later, prev = (iu, iw) if iu > iw else (iw, iu)
        per_item[later].append(prev)
    ptr = np.zeros(num_items + 1, dtype=np.int64)
    flat: list[int] = []
    for k, lst in enumerate(per_item):
        flat.extend(sorted(lst))
        ptr[k + 1] = len(flat)
    r = motif.r
    min_scaled, merged_labels, count = kernels.min_slack_partitions(
        num_items, ptr, np.asarray(flat, dtype=np.int64), r.numerator, r.denominator
    )
    argmin = _expand_merged_labels(motif, merged_labels)
    return _report(motif, int(min_scaled), argmin, int(count), "exhaustive")


def adversarial_partitions(motif: Motif) -> list[PartitionLabels]:
    """Deterministic batch of extremal partitions always included in
    sampled certification: the all-one-group partition, the merged-pair
    plus singletons, merged blocks of every intermediate size, and the
    layer-aligned configurations when layer metadata is present."""
    n = motif.num_vertices
    order = motif.internal_order
    out = []
    # one group
    out.append(PartitionLabels.from_labels([0] * n))
    # {v1, v2} merged with a prefix of the internal order, rest singletons
    for u in range(0, len(order)):
        labels = [0] * n
        g = 1
        for v in order[u:]:
            labels[v] = g
            g += 1
        out.append(PartitionLabels.from_labels(labels))
    if motif.cycle_nodes is not None:
        L = motif.L
        # v1, v2 alone; each layer one group
        labels = [0] * n
        for v, (w, _) in motif.cycle_nodes.items():
            labels[v] = w
        out.append(PartitionLabels.from_labels(labels))
        # v1, v2 joined with one layer, other layers separate
        for w0 in range(1, L + 1):
            labels = [0] * n
            for v, (w, _) in motif.cycle_nodes.items():
                labels[v] = 0 if w == w0 else w
            out.append(PartitionLabels.from_labels(labels))
        if L % 2 == 0:
            # alternating split: v1, v2 with the odd layers
            labels = [0] * n
            for v, (w, _) in motif.cycle_nodes.items():
                labels[v] = (w + 1) % 2
            out.append(PartitionLabels.from_labels(labels))
    return out


def certify_sampled(motif: Motif, num_samples: int, seed: int,
                    kernels=None) -> SlackReport:
    """Minimum slack over the deterministic adversarial batch plus
    uniformly sampled partitions (v1, v2 pre-merged)."""
    rng = rng_stream(seed, _CERTIFY_STREAM)
    batch = adversarial_partitions(motif)
    others, _ = _merged_items(motif)
    for _ in range(num_samples):
        merged = sample_uniform_partition(len(others) + 1, rng)
        batch.append(_expand_merged_labels(motif, merged.labels))
    best = None
    argmin = None
    r = motif.r
    for part in batch:
        scaled = edges_across(motif, part) * r.denominator - r.numerator * (part.num_groups - 1)
        if best is None or scaled < best:
            best, argmin = scaled, part
    return _report(motif, best, argmin, len(batch), "sampled")


# -- subset lemmas ---------------------------------------------------------


def _cycle_context(motif: Motif):
    if motif.cycle_nodes is None:
        raise MotifError("check requires layer metadata")
    cyc = list(motif.cycle_vertices)
    pos = {v: k for k, v in enumerate(cyc)}
    cyc_edges = [(pos[u], pos[w]) for u, w in motif.cycle_edges()]
    return cyc, pos, cyc_edges


def _structured_subsets(motif: Motif, cyc, pos, rng, num_samples: int):
    c = len(cyc)
    masks = set()
    for k in range(c):
        masks.add(1 << k)                      # single vertices
        masks.add(((1 << c) - 1) ^ (1 << k))   # complements
        masks.add((1 << (k + 1)) - 1)          # prefixes
    if motif.is_blowup:
        for w in range(1, motif.L + 1):        # layers and unions of adjacent layers
            layer_mask = 0
            for v in motif.layer_members(w):
                layer_mask |= 1 << pos[v]
            masks.add(layer_mask)
            nxt_mask = 0
            for v in motif.layer_members(w % motif.L + 1):
                nxt_mask |= 1 << pos[v]
            masks.add(layer_mask | nxt_mask)
    for _ in range(num_samples):
        bits = rng.integers(0, 2, size=c)
        masks.add(int(sum(b << k for k, b in enumerate(bits))))
    return masks


def _boundary_count(mask: int, cyc_edges) -> int:
    b = 0
    for u, w in cyc_edges:
        if ((mask >> u) & 1) != ((mask >> w) & 1):
            b += 1
    return b


def check_boundary_lemma(motif: Motif, mode: str = "auto", num_samples: int = 2000,
                         seed: int = 0) -> LemmaReport:
    """Every nonempty proper subset of cycle nodes has at least 2B cycle
    edges leaving it.  Exhaustive under the subset cap, sampled above."""
    cyc, pos, cyc_edges = _cycle_context(motif)
    c = len(cyc)
    exhaustive = _subset_mode(mode, c)
    target = 2 * motif.B
    if exhaustive:
        masks = range(1, (1 << c) - 1)
    else:
        rng = rng_stream(seed, _SUBSET_STREAM, 0)
        masks = sorted(
            m for m in _structured_subsets(motif, cyc, pos, rng, num_samples)
            if 0 < m < (1 << c) - 1
        )
    checked = 0
    for mask in masks:
        checked += 1
        if _boundary_count(mask, cyc_edges) < target:
            witness = tuple(cyc[k] for k in range(c) if (mask >> k) & 1)
            return LemmaReport(False, witness, _mode_name(exhaustive), checked)
    return LemmaReport(True, None, _mode_name(exhaustive), checked)


def check_fastener_lemma(motif: Motif, mode: str = "auto", num_samples: int = 2000,
                         seed: int = 0) -> LemmaReport:
    """For any subset S of cycle nodes (standing in for the community of
    v1 and v2): boundary(S) + 2 |fasteners outside S| >= 2a |cycle
    nodes outside S|, exactly in rational arithmetic."""
    cyc, pos, cyc_edges = _cycle_context(motif)
    c = len(cyc)
    a = motif.a
    fast_mask = 0
    for v in motif.fastener_nodes:
        fast_mask |= 1 << pos[v]
    exhaustive = _subset_mode(mode, c)
    if exhaustive:
        masks = range(0, 1 << c)
    else:
        rng = rng_stream(seed, _SUBSET_STREAM, 1)
        masks = sorted(_structured_subsets(motif, cyc, pos, rng, num_samples) | {0, (1 << c) - 1})
    checked = 0
    for mask in masks:
        checked += 1
        outside = c - bin(mask).count("1")
        fast_outside = bin(fast_mask & ~mask & ((1 << c) - 1)).count("1")
        lhs = (_boundary_count(mask, cyc_edges) + 2 * fast_outside) * a.denominator
        rhs = 2 * a.numerator * outside
        if lhs < rhs:
            witness = tuple(cyc[k] for k in range(c) if (mask >> k) & 1)
            return LemmaReport(False, witness, _mode_name(exhaustive), checked)
    return LemmaReport(True, None, _mode_name(exhaustive), checked)


def _subset_mode(mode: str, c: int) -> bool:
    if mode not in ("auto", "exhaustive", "sampled"):
        raise ValueError(f"mode must be auto, exhaustive, or sampled, got {mode!r}")
    in_cap = (1 << c) <= SUBSET_EXHAUSTIVE_CAP
    if mode == "exhaustive" and not in_cap:
        raise ExhaustiveCapExceeded(f"2^{c} subsets exceed the exhaustive cap")
    return mode == "exhaustive" or (mode == "auto" and in_cap)


def _mode_name(exhaustive: bool) -> str:
    return "exhaustive" if exhaustive else "sampled"


# -- overlapping-injection edge cap ----------------------------------------


def _labeled_edges(motif: Motif, images: dict[int, int]) -> set[tuple[int, int]]:
    out = set()
    for u, w in motif.edges:
        a, b = images[u], images[w]
        out.add((a, b) if a < b else (b, a))
    return out


def check_overlap_cap(motif: Motif, universe_size: int, trials: int,
                      seed: int) -> OverlapReport:
    """For two random injections agreeing on v1, v2 and sharing 2 + u
    images, the labeled graphs share at most ``r * u`` edges, exactly.

    The shared-image count u sweeps 0..(|V|-2) round-robin across
    trials; the first full-overlap trial reuses the identical injection,
    where the cap holds with equality.
    """
    d = motif.num_vertices - 2
    if universe_size < 2 * d + 2:
        raise ValueError(f"universe must have at least {2 * d + 2} vertices")
    rng = rng_stream(seed, _OVERLAP_STREAM)
    order = motif.internal_order
    r = motif.r
    pool = np.arange(2, universe_size, dtype=np.int64)
    equality_seen = False
    first_full = True
    for trial in range(trials):
        u = trial % (d + 1)
        img1_vals = rng.choice(pool, size=d, replace=False)
        if u == d and first_full:
            img2_vals = img1_vals.copy()
            first_full = False
        else:
            keep_idx = rng.choice(d, size=u, replace=False)
            kept = img1_vals[np.sort(keep_idx)]
            rest_pool = np.setdiff1d(pool, img1_vals, assume_unique=False)
            fresh = rng.choice(rest_pool, size=d - u, replace=False)
            img2_vals = np.concatenate([kept, fresh])
            img2_vals = rng.permutation(img2_vals)
        img1 = {motif.v1: 0, motif.v2: 1}
        img2 = {motif.v1: 0, motif.v2: 1}
        for k, v in enumerate(order):
            img1[v] = int(img1_vals[k])
            img2[v] = int(img2_vals[k])
        shared = len(_labeled_edges(motif, img1) & _labeled_edges(motif, img2))
        if shared * r.denominator > r.numerator * u:
            witness = {"u": u, "shared_edges": shared,
                       "images_1": [img1[v] for v in order],
                       "images_2": [img2[v] for v in order]}
            return OverlapReport(False, witness, equality_seen, trial + 1)
        if u == d and shared * r.denominator == r.numerator * d:
            equality_seen = True
    return OverlapReport(True, None, equality_seen, trials)
