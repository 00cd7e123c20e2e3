"""Blow-up cycle motifs with fastener edges to two distinguished nodes.

A motif is a small template graph with two distinguished vertices ``v1``
and ``v2``.  The main family built here takes a cycle of length ``L``,
replaces every cycle node by a *layer* of ``B`` vertices, joins
consecutive layers by complete bipartite graphs, and then attaches
``v1``/``v2`` to a fraction ``a`` of the layer vertices ("fasteners").
The resulting graph has ``L*B + 2`` vertices and ``L*B**2 + a*L*B``
edges, so its edge-to-internal-vertex ratio is exactly ``B + a``.

Generic motifs (arbitrary simple graphs with two distinguished vertices)
are also supported so that user-supplied motif files can be verified.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

MOTIF_DOC_VERSION = 1


class MotifError(ValueError):
    """A motif parameter, invariant, or document is invalid."""


def _as_fraction(a) -> Fraction:
    try:
        return Fraction(a)
    except (TypeError, ValueError) as exc:
        raise MotifError(f"cannot interpret {a!r} as an exact fraction") from exc


def check_build_params(L: int, B: int, a) -> Fraction:
    """Validate a blow-up parameter triple, returning ``a`` as a Fraction.

    Raises :class:`MotifError` naming the violated condition.
    """
    a = _as_fraction(a)
    if not isinstance(B, int) or B < 1:
        raise MotifError(f"B must be a positive integer, got {B!r}")
    if not isinstance(L, int):
        raise MotifError(f"L must be an integer, got {L!r}")
    if not (0 < a < 1):
        raise MotifError(f"a must satisfy 0 < a < 1, got {a}")
    if L < 3:
        raise MotifError(f"L must be at least 3, got {L}")
    if L < 2 / a:
        raise MotifError(f"L must be at least 2/a = {2 / a}, got {L}")
    total = a * L * B
    if total.denominator != 1 or total.numerator % 2 != 0:
        raise MotifError(f"a*L*B must be an even integer, got {total}")
    return a


def fastener_counts(L: int, B: int, a) -> list[int]:
    """Per-layer fastener counts ``s_1..s_L``.

    Layer ``w`` contributes ``s_w = floor(a*w*B) - (s_1 + ... + s_{w-1})``
    fastener nodes, which spreads the ``a*L*B`` fasteners as evenly as
    possible: every ``s_w`` is ``floor(a*B)`` or ``ceil(a*B)`` and the
    prefix sums are exactly ``floor(a*w*B)``.
    """
    a = check_build_params(L, B, a)
    counts = []
    assigned = 0
    for w in range(1, L + 1):
        s = math.floor(a * w * B) - assigned
        counts.append(s)
        assigned += s
    return counts


@dataclass(frozen=True)
class Motif:
    """An immutable simple graph with two distinguished vertices.

    Vertices are ``0..num_vertices-1``.  For built blow-up motifs,
    ``v1 = 0``, ``v2 = 1`` and cycle vertices ``2..L*B+1`` are numbered
    in lexicographic (layer, slot) order.  ``cycle_nodes`` maps each
    cycle vertex to its 1-based ``(layer, slot)`` pair; it is ``None``
    for generic motifs, which then cannot be used where layer metadata
    is required.
    """

    num_vertices: int
    edges: tuple[tuple[int, int], ...]
    v1: int = 0
    v2: int = 1
    L: int | None = None
    B: int | None = None
    a: Fraction | None = None
    cycle_nodes: Mapping[int, tuple[int, int]] | None = None
    fasteners_v1: frozenset[int] = field(default_factory=frozenset)
    fasteners_v2: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        self._validate_generic()
        if self.is_blowup:
            self._validate_blowup()

    # -- generic invariants ------------------------------------------------

    def _validate_generic(self):
        n = self.num_vertices
        if n < 3:
            raise MotifError("motif needs at least 3 vertices (v1, v2, one internal)")
        for v in (self.v1, self.v2):
            if not 0 <= v < n:
                raise MotifError(f"distinguished vertex {v} out of range")
        if self.v1 == self.v2:
            raise MotifError("v1 and v2 must be distinct")
        seen = set()
        for e in self.edges:
            u, w = e
            if u == w:
                raise MotifError(f"self-loop at vertex {u}")
            if not (0 <= u < w < n):
                raise MotifError(f"edge {e} is not a sorted in-range pair")
            if e in seen:
                raise MotifError(f"duplicate edge {e}")
            seen.add(e)
        if tuple(sorted(self.edges)) != self.edges:
            raise MotifError("edges must be sorted lexicographically")
        if (min(self.v1, self.v2), max(self.v1, self.v2)) in seen:
            raise MotifError("(v1, v2) must not be an edge")
        if not self._connected():
            raise MotifError("motif must be connected")

    def _connected(self) -> bool:
        adj = [[] for _ in range(self.num_vertices)]
        for u, w in self.edges:
            adj[u].append(w)
            adj[w].append(u)
        seen = {0}
        stack = [0]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.num_vertices

    # -- blow-up invariants ------------------------------------------------

    @property
    def is_blowup(self) -> bool:
        return self.L is not None

    def _validate_blowup(self):
        L, B = self.L, self.B
        a = check_build_params(L, B, self.a)
        object.__setattr__(self, "a", a)
        if self.num_vertices != L * B + 2:
            raise MotifError(f"|V| must be L*B+2 = {L * B + 2}, got {self.num_vertices}")
        n_edges = Fraction(L * B * B) + a * L * B
        if Fraction(len(self.edges)) != n_edges:
            raise MotifError(f"|E| must be L*B^2 + a*L*B = {n_edges}, got {len(self.edges)}")
        if self.r != B + a:
            raise MotifError(f"|E|/(|V|-2) must equal B + a = {B + a}, got {self.r}")
        if self.cycle_nodes is None:
            raise MotifError("blow-up motif requires layer metadata")
        cyc = set(self.cycle_nodes)
        if cyc != set(range(self.num_vertices)) - {self.v1, self.v2}:
            raise MotifError("layer metadata must cover exactly the non-distinguished vertices")
        placements = set(self.cycle_nodes.values())
        expected = {(w, t) for w in range(1, L + 1) for t in range(1, B + 1)}
        if placements != expected:
            raise MotifError("layer metadata must be a bijection onto [L] x [B]")
        # cycle part is 2B-regular
        deg = {v: 0 for v in cyc}
        for u, w in self.edges:
            if u in cyc and w in cyc:
                deg[u] += 1
                deg[w] += 1
        bad = [v for v, d in deg.items() if d != 2 * B]
        if bad:
            raise MotifError(f"cycle part must be 2B-regular; vertex {bad[0]} has degree {deg[bad[0]]}")
        # fastener halves
        half = a * L * B / 2
        if Fraction(len(self.fasteners_v1)) != half or Fraction(len(self.fasteners_v2)) != half:
            raise MotifError(f"fastener sets must each have a*L*B/2 = {half} nodes")
        if self.fasteners_v1 & self.fasteners_v2:
            raise MotifError("fastener sets must be disjoint")
        if not (self.fasteners_v1 | self.fasteners_v2) <= cyc:
            raise MotifError("fastener nodes must be cycle nodes")
        edge_set = set(self.edges)
        for f in self.fasteners_v1:
            if (min(self.v1, f), max(self.v1, f)) not in edge_set:
                raise MotifError(f"missing fastener edge v1-{f}")
        for f in self.fasteners_v2:
            if (min(self.v2, f), max(self.v2, f)) not in edge_set:
                raise MotifError(f"missing fastener edge v2-{f}")

    # -- derived views -----------------------------------------------------

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def r(self) -> Fraction:
        """Edge-to-internal-vertex ratio |E| / (|V| - 2), exact."""
        return Fraction(self.num_edges, self.num_vertices - 2)

    @property
    def internal_order(self) -> tuple[int, ...]:
        """Non-distinguished vertices in enumeration order.

        For built motifs this is lexicographic (layer, slot) order, which
        coincides with increasing vertex id.
        """
        return tuple(v for v in range(self.num_vertices) if v not in (self.v1, self.v2))

    @property
    def cycle_vertices(self) -> tuple[int, ...]:
        if self.cycle_nodes is None:
            raise MotifError("motif has no layer metadata")
        return tuple(sorted(self.cycle_nodes))

    def cycle_edges(self) -> list[tuple[int, int]]:
        cyc = set(self.cycle_vertices)
        return [e for e in self.edges if e[0] in cyc and e[1] in cyc]

    def layer_members(self, w: int) -> tuple[int, ...]:
        return tuple(sorted(v for v, (lw, _) in self.cycle_nodes.items() if lw == w))

    @property
    def fastener_nodes(self) -> frozenset[int]:
        return self.fasteners_v1 | self.fasteners_v2


def _vertex_id(w: int, t: int, B: int) -> int:
    # v1 = 0, v2 = 1, then (layer, slot) in lexicographic order
    return 2 + (w - 1) * B + (t - 1)


def build_blowup_motif(L: int, B: int, a) -> Motif:
    """Construct the blow-up-with-fasteners motif for a valid ``(L, B, a)``.

    Preconditions: ``0 < a < 1``, ``B >= 1``, ``L >= max(3, 2/a)``, and
    ``a*L*B`` an even integer.  Within a layer the ``s_w`` fastener nodes
    occupy the lowest slot indices; fastener nodes enumerated in
    (layer, slot) order alternate between v1's set and v2's set.
    """
    a = check_build_params(L, B, a)
    counts = fastener_counts(L, B, a)

    edges: list[tuple[int, int]] = []
    for w in range(1, L + 1):
        nxt = w % L + 1
        for t in range(1, B + 1):
            for t2 in range(1, B + 1):
                u, v = _vertex_id(w, t, B), _vertex_id(nxt, t2, B)
                edges.append((min(u, v), max(u, v)))

    fastener_order = [
        _vertex_id(w, t, B) for w in range(1, L + 1) for t in range(1, counts[w - 1] + 1)
    ]
    fast_v1 = frozenset(fastener_order[0::2])
    fast_v2 = frozenset(fastener_order[1::2])
    edges.extend((0, f) for f in fast_v1)
    edges.extend((1, f) for f in fast_v2)

    cycle_nodes = {
        _vertex_id(w, t, B): (w, t) for w in range(1, L + 1) for t in range(1, B + 1)
    }
    return Motif(
        num_vertices=L * B + 2,
        edges=tuple(sorted(edges)),
        L=L,
        B=B,
        a=a,
        cycle_nodes=cycle_nodes,
        fasteners_v1=fast_v1,
        fasteners_v2=fast_v2,
    )


def approximate_exponent(r: float, eps: float) -> tuple[int, int, Fraction]:
    """Pick a valid blow-up triple whose ratio approximates a real ``r > 1``.

    Returns ``(L, B, a)`` with ``B = floor(r)``, ``a`` the closest proper
    fraction to ``r - B`` among denominators up to the accuracy bound
    (ties toward smaller denominator), and ``L = 2 * den(a) * B``.  The
    result satisfies ``|B + a - r| <= eps * r**2 / 2`` and all
    :func:`build_blowup_motif` preconditions.
    """
    if not 0 < eps < 1:
        raise MotifError(f"eps must lie in (0, 1), got {eps}")
    if r <= 1:
        raise MotifError(f"r must exceed 1, got {r}")
    B = math.floor(r)
    frac = Fraction(r) - B
    if frac == 0:
        raise MotifError(f"r must not be an integer, got {r}")
    # Denominator 1 admits no fraction in (0, 1), so the search always
    # includes denominator 2 even when the nominal bound collapses to 1.
    bound = max(math.ceil(2.0 / (eps * r * r)), 2)
    best: Fraction | None = None
    best_err: Fraction | None = None
    for den in range(2, bound + 1):
        lo = math.floor(frac * den)
        for num in (lo, lo + 1):
            num = min(max(num, 1), den - 1)
            cand = Fraction(num, den)
            err = abs(cand - frac)
            if best_err is None or err < best_err:
                best, best_err = cand, err
    a = best
    tol = Fraction(eps) * Fraction(r) ** 2 / 2
    if best_err > tol:
        raise MotifError(
            f"no fraction with denominator <= {bound} approximates {r} within {float(tol)}"
        )
    L = 2 * a.denominator * B
    check_build_params(L, B, a)
    return L, B, a


# -- serialization ---------------------------------------------------------


def export_motif(motif: Motif) -> dict:
    """Serialize a motif to its JSON document form."""
    doc = {
        "version": MOTIF_DOC_VERSION,
        "num_vertices": motif.num_vertices,
        "v1": motif.v1,
        "v2": motif.v2,
        "edges": [list(e) for e in motif.edges],
    }
    if motif.is_blowup:
        doc["L"] = motif.L
        doc["B"] = motif.B
        doc["a"] = {"num": motif.a.numerator, "den": motif.a.denominator}
        doc["layers"] = {str(v): list(wt) for v, wt in sorted(motif.cycle_nodes.items())}
        doc["fasteners_v1"] = sorted(motif.fasteners_v1)
        doc["fasteners_v2"] = sorted(motif.fasteners_v2)
    return doc


def import_motif(doc: Mapping) -> Motif:
    """Rebuild a motif from a document, re-validating all invariants.

    Documents without ``L``/``B``/``a``/``layers`` are accepted as generic
    motifs (arbitrary simple graphs with two distinguished vertices).
    """
    if not isinstance(doc, Mapping):
        raise MotifError("motif document must be a JSON object")
    try:
        num_vertices = int(doc["num_vertices"])
        v1 = int(doc.get("v1", 0))
        v2 = int(doc.get("v2", 1))
        edges = tuple(sorted((min(int(u), int(w)), max(int(u), int(w))) for u, w in doc["edges"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise MotifError(f"malformed motif document: {exc}") from exc

    kwargs = {}
    if "L" in doc:
        try:
            kwargs["L"] = int(doc["L"])
            kwargs["B"] = int(doc["B"])
            kwargs["a"] = Fraction(int(doc["a"]["num"]), int(doc["a"]["den"]))
            kwargs["cycle_nodes"] = {
                int(v): (int(wt[0]), int(wt[1])) for v, wt in doc["layers"].items()
            }
            kwargs["fasteners_v1"] = frozenset(int(v) for v in doc["fasteners_v1"])
            kwargs["fasteners_v2"] = frozenset(int(v) for v in doc["fasteners_v2"])
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise MotifError(f"malformed blow-up metadata: {exc}") from exc
    return Motif(num_vertices=num_vertices, edges=edges, v1=v1, v2=v2, **kwargs)


def save_motif(motif: Motif, path) -> None:
    with open(path, "w") as fh:
        json.dump(export_motif(motif), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_motif(path) -> Motif:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MotifError(f"not valid JSON: {exc}") from exc
    return import_motif(doc)
