"""Stochastic block model sampling and the centered adjacency view."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

# Purpose tags for the counter-based RNG streams, so label draws and edge
# draws are independent streams of the same 64-bit seed.
_LABEL_STREAM = 0
_EDGE_STREAM = 1
_PIN_STREAM = 2

_U64 = (1 << 64) - 1


def rng_stream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by ``(seed, *key)``.

    Streams with distinct keys are statistically independent, which keeps
    results reproducible under any parallel work split.
    """
    ss = np.random.SeedSequence(entropy=int(seed) & _U64, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *key: int) -> int:
    """A 64-bit child seed for ``(seed, *key)``, for per-trial streams."""
    ss = np.random.SeedSequence(entropy=int(seed) & _U64, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SbmParams:
    """Parameters of a symmetric two-probability stochastic block model.

    ``K = 1`` is accepted as the degenerate single-community variant
    (it is flagged, not rejected); ``q = 0`` and ``p = 1`` are allowed so
    that deterministic regimes can be exercised.
    """

    n: int
    K: int
    p: float
    q: float
    seed: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if not 1 <= self.K <= self.n:
            raise ValueError(f"K must lie in [1, n], got {self.K}")
        if not 0.0 <= self.q < self.p <= 1.0:
            raise ValueError(
                f"need 0 <= q < p <= 1 (so lambda = p - q > 0), got p={self.p}, q={self.q}"
            )

    @property
    def lam(self) -> float:
        return self.p - self.q

    @property
    def regime_flags(self) -> dict[str, bool]:
        """Regime conditions recorded for reports; never enforced."""
        return {
            "q_le_quarter": self.q <= 0.25,
            "q_plus_2lambda_le_1": self.q + 2 * self.lam <= 1.0,
            "single_community": self.K == 1,
        }


@dataclass(frozen=True)
class DerivedProbs:
    """Second-moment probabilities of a centered edge variable."""

    q_bar: float
    p_bar: float

    @classmethod
    def of(cls, q: float, lam: float) -> "DerivedProbs":
        q_bar = q * (1.0 - q)
        return cls(q_bar=q_bar, p_bar=q_bar + lam * (1.0 - 2.0 * q))


@dataclass(frozen=True)
class SbmSample:
    """One SBM draw: community labels plus the adjacency bits.

    ``adj`` is stored as a dense symmetric uint8 matrix with a zero
    diagonal, built from one pass of upper-triangular draws; at desk
    scale O(1) access matters more than the factor-of-two storage.
    """

    params: SbmParams
    z: np.ndarray
    adj: np.ndarray

    @property
    def n(self) -> int:
        return self.params.n

    def edge(self, i: int, j: int) -> int:
        if i == j:
            raise ValueError("the diagonal is absent")
        return int(self.adj[i, j])

    def centered(self) -> "CenteredAdjacency":
        return CenteredAdjacency(self)

    def true_partition(self) -> list[tuple[int, ...]]:
        """The community partition induced by z, as sorted tuples."""
        groups: dict[int, list[int]] = {}
        for i, zi in enumerate(self.z):
            groups.setdefault(int(zi), []).append(i)
        return sorted(tuple(g) for g in groups.values())


@dataclass(frozen=True)
class CenteredAdjacency:
    """The quasi-centered view: off-diagonal entries ``adj - q``."""

    sample: SbmSample

    @property
    def n(self) -> int:
        return self.sample.n

    @property
    def q(self) -> float:
        return self.sample.params.q

    def entry(self, i: int, j: int) -> float:
        if i == j:
            raise ValueError("the diagonal is absent")
        return float(self.sample.adj[i, j]) - self.q

    @cached_property
    def dense(self) -> np.ndarray:
        """Dense float64 matrix with zero diagonal, shared read-only."""
        y = self.sample.adj.astype(np.float64) - self.q
        np.fill_diagonal(y, 0.0)
        y.setflags(write=False)
        return y


def _edges_from_labels(params: SbmParams, z: np.ndarray) -> SbmSample:
    n = params.n
    e_rng = rng_stream(params.seed, _EDGE_STREAM)
    iu = np.triu_indices(n, 1)
    u = e_rng.random(iu[0].size)
    prob = np.where(z[iu[0]] == z[iu[1]], params.p, params.q)
    bits = (u < prob).astype(np.uint8)
    adj = np.zeros((n, n), dtype=np.uint8)
    adj[iu] = bits
    adj |= adj.T
    adj.setflags(write=False)
    z = z.copy()
    z.setflags(write=False)
    return SbmSample(params=params, z=z, adj=adj)


def sample(params: SbmParams) -> SbmSample:
    """Draw labels i.i.d. uniform on [K], then independent edges."""
    z_rng = rng_stream(params.seed, _LABEL_STREAM)
    z = z_rng.integers(0, params.K, size=params.n, dtype=np.int64)
    return _edges_from_labels(params, z)


def sample_conditioned(params: SbmParams, pin: str) -> SbmSample:
    """Draw from the conditional law given ``z_0 = z_1`` or ``z_0 != z_1``.

    Implemented by construction (pinning the first two labels) rather
    than rejection: z_0 is uniform, z_1 is forced equal (``pin="same"``)
    or uniform over the other K-1 labels (``pin="different"``), and the
    remaining labels stay i.i.d. uniform.  Exchangeability of the model
    makes the pinned pair generic.
    """
    if pin not in ("same", "different"):
        raise ValueError(f"pin must be 'same' or 'different', got {pin!r}")
    if pin == "different" and params.K == 1:
        raise ValueError("pin='different' is impossible with K = 1")
    z_rng = rng_stream(params.seed, _LABEL_STREAM)
    z = z_rng.integers(0, params.K, size=params.n, dtype=np.int64)
    if pin == "same":
        z[1] = z[0]
    else:
        shift = rng_stream(params.seed, _PIN_STREAM).integers(0, params.K - 1)
        z[1] = (z[0] + 1 + shift) % params.K
    return _edges_from_labels(params, z)


def membership_value(z, i: int, j: int, K: int) -> float:
    """The pair-membership value ``1{z_i = z_j} - 1/K``."""
    if i == j:
        raise ValueError("membership value is defined for distinct indices")
    return float(z[i] == z[j]) - 1.0 / K


# -- serialization ---------------------------------------------------------


def export_sample(s: SbmSample) -> dict:
    iu = np.triu_indices(s.n, 1)
    present = s.adj[iu].astype(bool)
    edges = [[int(a), int(b)] for a, b in zip(iu[0][present], iu[1][present])]
    p = s.params
    return {
        "n": p.n,
        "K": p.K,
        "p": p.p,
        "q": p.q,
        "seed": p.seed,
        "z": [int(v) for v in s.z],
        "edges": edges,
    }


def import_sample(doc) -> SbmSample:
    try:
        params = SbmParams(
            n=int(doc["n"]), K=int(doc["K"]), p=float(doc["p"]), q=float(doc["q"]),
            seed=int(doc["seed"]),
        )
        z = np.asarray(doc["z"], dtype=np.int64)
        edges = [(int(a), int(b)) for a, b in doc["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed sample document: {exc}") from exc
    if z.shape != (params.n,):
        raise ValueError(f"z must have length n = {params.n}")
    if z.min(initial=0) < 0 or z.max(initial=0) >= params.K:
        raise ValueError("labels out of range [0, K)")
    adj = np.zeros((params.n, params.n), dtype=np.uint8)
    for a, b in edges:
        if a == b or not (0 <= a < params.n and 0 <= b < params.n):
            raise ValueError(f"invalid edge ({a}, {b})")
        adj[a, b] = adj[b, a] = 1
    adj.setflags(write=False)
    z.setflags(write=False)
    return SbmSample(params=params, z=z, adj=adj)
