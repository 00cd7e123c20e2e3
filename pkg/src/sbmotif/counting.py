"""Exact evaluation of the motif-count polynomial and its closed forms.

The count attached at a pair (i, j) is the sum, over all injections of
the motif's internal vertices into an allowed vertex set, of the product
of centered adjacency entries along the motif edges.  Closed-form mean
and variance-envelope expressions for this statistic under the SBM are
evaluated here as well.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._core import get_kernels
from .motif import Motif
from .sbm import CenteredAdjacency, DerivedProbs

logger = logging.getLogger(__name__)

_EPS = float(np.finfo(np.float64).eps)


def as_dense(Y) -> np.ndarray:
    """Normalize a centered-adjacency view or raw square matrix to float64."""
    if isinstance(Y, CenteredAdjacency):
        return Y.dense
    arr = np.ascontiguousarray(Y, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"matrix must be square, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class CountRequest:
    """One evaluation: a motif attached at (i, j) over an allowed set."""

    motif: Motif
    i: int
    j: int
    allowed: tuple[int, ...]

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("i and j must be distinct")
        allowed = tuple(int(v) for v in self.allowed)
        object.__setattr__(self, "allowed", allowed)
        if self.i in allowed or self.j in allowed:
            raise ValueError("allowed set must not contain i or j")
        if len(set(allowed)) != len(allowed):
            raise ValueError("allowed set has duplicates")


@dataclass(frozen=True)
class CountResult:
    value: float
    num_injections: int
    compensation_error_bound: float


def injection_plan(motif: Motif) -> tuple[np.ndarray, np.ndarray]:
    """CSR arrays describing, per internal vertex in assignment order,
    the earlier endpoint of every edge bound at that step.

    Endpoint codes: -2 is v1's image, -1 is v2's image, t >= 0 the image
    of internal slot t.  Assignment order is v1, v2, then the internal
    vertices in enumeration order.  Cached on the (immutable) motif.
    """
    cached = getattr(motif, "_injection_plan", None)
    if cached is not None:
        return cached
    order = motif.internal_order
    pos = {v: t for t, v in enumerate(order)}

    def code(x: int) -> int:
        if x == motif.v1:
            return -2
        if x == motif.v2:
            return -1
        return pos[x]

    per_level: list[list[int]] = [[] for _ in order]
    for u, w in motif.edges:
        cu, cw = code(u), code(w)
        later, other = (cu, cw) if cu > cw else (cw, cu)
        per_level[later].append(other)
    ptr = np.zeros(len(order) + 1, dtype=np.int64)
    flat: list[int] = []
    for t, lst in enumerate(per_level):
        flat.extend(sorted(lst))
        ptr[t + 1] = len(flat)
    plan = (ptr, np.asarray(flat, dtype=np.int64))
    object.__setattr__(motif, "_injection_plan", plan)
    return plan


def falling_factorial(m: int, k: int) -> int:
    """(m)_k = m (m-1) ... (m-k+1), exactly; 0 when k > m."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > m:
        return 0
    return math.perm(m, k)


def count_attached(Y, req: CountRequest, kernels=None) -> CountResult:
    """Evaluate the count polynomial by depth-first injection assignment.

    Edges are multiplied in as soon as both endpoints are assigned; the
    result is independent of the enumeration strategy up to roundoff,
    which is tracked in ``compensation_error_bound``.
    """
    Yd = as_dense(Y)
    n = Yd.shape[0]
    motif = req.motif
    for v in (req.i, req.j, *req.allowed):
        if not 0 <= v < n:
            raise ValueError(f"vertex {v} out of range for an order-{n} matrix")
    d = motif.num_vertices - 2
    m = len(req.allowed)
    num_inj = falling_factorial(m, d)
    if num_inj == 0:
        return CountResult(value=0.0, num_injections=0, compensation_error_bound=0.0)
    if kernels is None:
        kernels = get_kernels()
    ptr, other = injection_plan(motif)
    allowed = np.asarray(req.allowed, dtype=np.int64)
    value, abs_sum = kernels.count_injections(Yd, allowed, req.i, req.j, ptr, other)
    bound = (motif.num_edges + m + 4) * _EPS * abs_sum
    return CountResult(value=float(value), num_injections=num_inj,
                       compensation_error_bound=float(bound))


def count_blocks(Y, motif: Motif, i: int, j: int,
                 blocks: Sequence[Sequence[int]], kernels=None) -> list[CountResult]:
    """Per-block restrictions of the count over a partition of the
    remaining vertices into equal-size blocks."""
    Yd = as_dense(Y)
    n = Yd.shape[0]
    sizes = {len(b) for b in blocks}
    if len(sizes) != 1:
        raise ValueError(f"blocks must have equal sizes, got {sorted(sizes)}")
    flat = [int(v) for b in blocks for v in b]
    if len(set(flat)) != len(flat):
        raise ValueError("blocks overlap")
    if set(flat) != set(range(n)) - {i, j}:
        raise ValueError("blocks must partition the vertex set minus {i, j}")
    return [
        count_attached(Yd, CountRequest(motif=motif, i=i, j=j, allowed=tuple(b)), kernels=kernels)
        for b in blocks
    ]


def expected_count_same(m: int, K: int, lam: float, motif: Motif) -> float:
    """Closed-form mean of the count when the attached pair shares a
    community: ``(m-2)_d * lam**|E| / K**d`` with ``d = |V| - 2``.

    The rational exponent B + a never materializes: ``(lam**(B+a))**d``
    equals ``lam**|E|`` with integer ``|E|``.  Computed by exact integer
    falling factorial when in float range, otherwise in log space.
    """
    d = motif.num_vertices - 2
    ne = motif.num_edges
    if m < d + 2:
        logger.warning("m = %d admits no injections (need m >= %d); mean is 0", m, d + 2)
        return 0.0
    if lam <= 0.0:
        return 0.0
    ff = falling_factorial(m - 2, d)
    try:
        return float(ff) * lam**ne / float(K) ** d
    except OverflowError:
        pass
    log_v = (
        math.lgamma(m - 1) - math.lgamma(m - 1 - d) + ne * math.log(lam) - d * math.log(K)
    )
    try:
        return math.exp(log_v)
    except OverflowError:
        return math.inf


def envelope_assumptions(m: int, K: int, lam: float, q: float, motif: Motif) -> list[str]:
    """Violated hypotheses of the variance envelope, empty when it applies."""
    out = []
    if q > 0.25:
        out.append(f"q = {q} exceeds 1/4")
    if q + 2 * lam > 1.0:
        out.append(f"q + 2*lambda = {q + 2 * lam} exceeds 1")
    d = motif.num_vertices - 2
    if m < 2 * d + 4:
        out.append(f"m = {m} is below 2*(|V|-2) + 4 = {2 * d + 4}")
    if not motif.is_blowup:
        out.append("motif lacks blow-up structure")
    return out


def variance_bound_rhs(m: int, K: int, lam: float, q: float, motif: Motif) -> float:
    """Variance envelope for the count under either conditioning.

    The derivation's ambient-size factors are evaluated at the effective
    node count ``m`` uniformly, the conservative desk-scale reading.
    Hypothesis violations are warned about; the value is still returned.
    """
    violated = envelope_assumptions(m, K, lam, q, motif)
    if violated:
        warnings.warn(
            "variance envelope hypotheses violated: " + "; ".join(violated),
            stacklevel=2,
        )
    probs = DerivedProbs.of(q, lam)
    q_bar, p_bar = probs.q_bar, probs.p_bar
    d = motif.num_vertices - 2
    r = float(motif.r)
    mean = expected_count_same(m, K, lam, motif)
    lam2 = lam * lam
    term_qq = 2.0 * d**3 * K**2 / m * max(q_bar / lam2, q_bar / p_bar if p_bar > 0 else 0.0) ** r
    term_pp = 2.0 * d**3 * K / m * max(p_bar / lam2, 1.0) ** r
    return mean * mean * d * d * (term_qq + term_pp + term_qq**d + term_pp**d)


def check_variance_ratio_condition(m: int, K: int, lam: float, q: float,
                                   motif: Motif, rho: float) -> bool:
    """Signal condition under which the variance stays below
    ``(4/rho)`` times the squared mean."""
    if rho <= 1.0:
        raise ValueError(f"rho must exceed 1, got {rho}")
    d = motif.num_vertices - 2
    r = float(motif.r)
    q_bar = q * (1.0 - q)
    lhs1 = math.inf if q_bar == 0.0 else (lam * lam / (2.0 * q_bar)) ** r
    cond1 = lhs1 >= 2.0 * K**2 * d**5 * rho / m
    cond2 = lam**r >= 2.0 * K * d**5 * rho / m
    return cond1 and cond2
