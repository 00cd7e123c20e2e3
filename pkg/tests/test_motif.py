import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbmotif.motif import (
    Motif,
    MotifError,
    approximate_exponent,
    build_blowup_motif,
    export_motif,
    fastener_counts,
    import_motif,
    load_motif,
    save_motif,
)


def layer_vertex(motif, w, t):
    inv = {wt: v for v, wt in motif.cycle_nodes.items()}
    return inv[(w, t)]


def test_fastener_counts_examples():
    assert fastener_counts(8, 2, Fraction(1, 4)) == [0, 1, 0, 1, 0, 1, 0, 1]
    assert fastener_counts(4, 1, Fraction(1, 2)) == [0, 1, 0, 1]
    assert fastener_counts(3, 1, Fraction(2, 3)) == [0, 1, 1]


def test_figure_example_8_2_quarter():
    m = build_blowup_motif(8, 2, Fraction(1, 4))
    assert m.num_vertices == 18
    assert m.num_edges == 36
    fast = sorted(m.cycle_nodes[v] for v in m.fastener_nodes)
    assert fast == [(2, 1), (4, 1), (6, 1), (8, 1)]
    # alternating assignment: v1 gets (2,1), (6,1); v2 gets (4,1), (8,1)
    assert sorted(m.cycle_nodes[v] for v in m.fasteners_v1) == [(2, 1), (6, 1)]
    assert sorted(m.cycle_nodes[v] for v in m.fasteners_v2) == [(4, 1), (8, 1)]
    edge_set = set(m.edges)
    for w in (2, 6):
        v = layer_vertex(m, w, 1)
        assert (0, v) in edge_set
    for w in (4, 8):
        v = layer_vertex(m, w, 1)
        assert (1, v) in edge_set


def test_small_motif_4_1_half():
    m = build_blowup_motif(4, 1, Fraction(1, 2))
    assert (m.num_vertices, m.num_edges) == (6, 6)
    assert (0, layer_vertex(m, 2, 1)) in set(m.edges)
    assert (1, layer_vertex(m, 4, 1)) in set(m.edges)


def test_precondition_violations():
    with pytest.raises(MotifError, match="2/a"):
        build_blowup_motif(3, 1, Fraction(1, 2))
    with pytest.raises(MotifError, match="even"):
        build_blowup_motif(5, 1, Fraction(1, 2))  # a*L*B = 5/2
    with pytest.raises(MotifError, match="0 < a < 1"):
        build_blowup_motif(4, 1, Fraction(3, 2))
    with pytest.raises(MotifError, match="positive integer"):
        build_blowup_motif(4, 0, Fraction(1, 2))
    with pytest.raises(MotifError, match="at least 3"):
        build_blowup_motif(2, 2, Fraction(1, 2))


def random_valid_triples(rng, count):
    triples = []
    while len(triples) < count:
        den = rng.integers(2, 7)
        num = rng.integers(1, den)
        a = Fraction(int(num), int(den))
        B = int(rng.integers(1, 4))
        mult = int(rng.integers(1, 3))
        L = 2 * a.denominator * mult
        if L * B > 40 or L < 3 or L < 2 / a:
            continue
        triples.append((L, B, a))
    return triples


def test_construction_identities_randomized():
    import numpy as np

    rng = np.random.default_rng(2024)
    for L, B, a in random_valid_triples(rng, 50):
        m = build_blowup_motif(L, B, a)
        assert m.num_vertices == L * B + 2
        assert Fraction(m.num_edges) == Fraction(L * B * B) + a * L * B
        assert m.r == B + a
        # cycle part 2B-regular
        cyc = set(m.cycle_vertices)
        deg = {v: 0 for v in cyc}
        for u, w in m.edges:
            if u in cyc and w in cyc:
                deg[u] += 1
                deg[w] += 1
        assert set(deg.values()) == {2 * B}
        # fastener halves equal
        assert len(m.fasteners_v1) == len(m.fasteners_v2) == a * L * B / 2
        # every cycle node has total degree 2B or 2B+1
        total = {v: 0 for v in range(m.num_vertices)}
        for u, w in m.edges:
            total[u] += 1
            total[w] += 1
        assert all(total[v] in (2 * B, 2 * B + 1) for v in cyc)
        # fastener recurrence: prefix sums hit floor(a*w*B)
        counts = fastener_counts(L, B, a)
        prefix = 0
        for w, s in enumerate(counts, start=1):
            prefix += s
            assert prefix == math.floor(a * w * B)
            assert s in (math.floor(a * B), math.ceil(a * B))
        assert sum(counts) == a * L * B


@given(den=st.integers(2, 8), B=st.integers(1, 3), mult=st.integers(1, 2),
       num_frac=st.fractions(0, 1))
@settings(max_examples=60, deadline=None)
def test_ratio_identity_property(den, B, mult, num_frac):
    num = 1 + int(num_frac * (den - 2)) if den > 2 else 1
    a = Fraction(num, den)
    L = 2 * a.denominator * mult
    if L < 2 / a or L * B > 60:
        return
    m = build_blowup_motif(L, B, a)
    assert Fraction(m.num_edges) == (B + a) * (m.num_vertices - 2)


def test_approximate_exponent_rational_input():
    L, B, a = approximate_exponent(2.5, 0.5)
    assert (B, a) == (2, Fraction(1, 2))
    check = build_blowup_motif(L, B, a)
    assert check.r == Fraction(5, 2)


def test_approximate_exponent_e():
    r = math.e
    L, B, a = approximate_exponent(r, 0.01)
    assert B == 2
    bound = math.ceil(2 / (0.01 * r * r))
    assert bound == 28
    assert a.denominator <= bound
    assert abs(B + a - Fraction(r)) <= Fraction(0.01) * Fraction(r) ** 2 / 2
    # brute-force oracle: closest fraction among all denominators <= bound
    frac = Fraction(r) - 2
    best = min(
        (abs(Fraction(num, den) - frac), den, Fraction(num, den))
        for den in range(2, bound + 1)
        for num in range(1, den)
    )
    assert a == best[2]


def test_approximate_exponent_rejects_integers():
    with pytest.raises(MotifError):
        approximate_exponent(2.0, 0.1)
    with pytest.raises(MotifError):
        approximate_exponent(0.8, 0.1)


def test_export_import_roundtrip(tmp_path):
    m = build_blowup_motif(4, 1, Fraction(1, 2))
    assert import_motif(export_motif(m)) == m
    path = tmp_path / "motif.json"
    save_motif(m, path)
    assert load_motif(path) == m


def test_import_rejects_v1_v2_edge():
    doc = {"num_vertices": 3, "v1": 0, "v2": 1, "edges": [[0, 1], [0, 2], [1, 2]]}
    with pytest.raises(MotifError, match="must not be an edge"):
        import_motif(doc)


def test_import_generic_path_motif():
    doc = {"num_vertices": 3, "edges": [[0, 2], [1, 2]]}
    m = import_motif(doc)
    assert not m.is_blowup
    assert m.r == Fraction(2, 1)


def test_import_rejects_disconnected_and_malformed():
    with pytest.raises(MotifError, match="connected"):
        import_motif({"num_vertices": 4, "edges": [[0, 2], [1, 2]]})
    with pytest.raises(MotifError, match="malformed"):
        import_motif({"num_vertices": 4})
    with pytest.raises(MotifError, match="self-loop"):
        import_motif({"num_vertices": 3, "edges": [[2, 2], [0, 2], [1, 2]]})


def test_vertex_numbering_convention():
    m = build_blowup_motif(3, 1, Fraction(2, 3))
    assert (m.v1, m.v2) == (0, 1)
    assert m.internal_order == (2, 3, 4)
    assert [m.cycle_nodes[v] for v in (2, 3, 4)] == [(1, 1), (2, 1), (3, 1)]


def test_blowup_validation_catches_tampering():
    m = build_blowup_motif(4, 1, Fraction(1, 2))
    doc = export_motif(m)
    broken = dict(doc, edges=[e for e in doc["edges"] if e != [2, 3]])
    with pytest.raises(MotifError):
        import_motif(broken)
