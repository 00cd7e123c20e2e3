from fractions import Fraction

import pytest

from sbmotif.motif import Motif, build_blowup_motif
from sbmotif.partitions import PartitionLabels, bell_number, iter_restricted_growth
from sbmotif.verify import (
    ExhaustiveCapExceeded,
    certify_exhaustive,
    certify_sampled,
    check_boundary_lemma,
    check_fastener_lemma,
    check_overlap_cap,
    edges_across,
    slack_of,
)

G412 = build_blowup_motif(4, 1, Fraction(1, 2))
PATH = Motif(num_vertices=3, edges=((0, 2), (1, 2)))


def labels_by_layer(motif, layer_to_group, v1v2_group=0):
    labels = [v1v2_group] * motif.num_vertices
    for v, (w, _) in motif.cycle_nodes.items():
        labels[v] = layer_to_group[w]
    return labels


def test_edges_across_trivial():
    assert edges_across(G412, [0] * 6) == 0
    assert edges_across(G412, list(range(6))) == G412.num_edges


def test_edges_across_alternating_example():
    # v1, v2, layers 1 and 3 in one group; layers 2 and 4 in the other:
    # all four cycle edges cross, plus both fasteners
    labels = labels_by_layer(G412, {1: 0, 2: 1, 3: 0, 4: 1})
    assert edges_across(G412, labels) == 6


def test_edges_across_size_mismatch():
    with pytest.raises(ValueError, match="covers"):
        edges_across(G412, [0, 0, 0])


def test_edges_across_relabel_invariance():
    labels = labels_by_layer(G412, {1: 0, 2: 1, 3: 2, 4: 1})
    relabeled = [{0: 5, 1: 9, 2: 7}[g] for g in labels]
    assert edges_across(G412, labels) == edges_across(G412, relabeled)


def test_certify_exhaustive_blowups():
    rep = certify_exhaustive(G412)
    assert rep.min_slack >= 0
    assert rep.mode == "exhaustive"
    assert rep.partitions_checked == bell_number(5)


def test_certify_path_motif():
    rep = certify_exhaustive(PATH)
    # two partitions total: one group (slack 0), and {v1,v2} vs {u}
    # where both edges cross and slack = 2 - 2*1 = 0
    assert rep.partitions_checked == 2
    assert rep.min_slack == 0
    split = PartitionLabels(labels=(0, 0, 1), num_groups=2)
    assert slack_of(PATH, split) == 0


def test_single_group_slack_is_zero():
    assert slack_of(G412, PartitionLabels(labels=(0,) * 6, num_groups=1)) == 0


def test_certify_cap_exceeded():
    big = build_blowup_motif(6, 2, Fraction(1, 2))  # 14 vertices
    with pytest.raises(ExhaustiveCapExceeded, match="certify_sampled"):
        certify_exhaustive(big)


def test_sampled_never_below_exhaustive():
    exact = certify_exhaustive(G412)
    sampled = certify_sampled(G412, num_samples=200, seed=11)
    assert sampled.min_slack >= exact.min_slack
    assert sampled.mode == "sampled"


def test_certify_sampled_deterministic():
    a = certify_sampled(G412, num_samples=100, seed=5)
    b = certify_sampled(G412, num_samples=100, seed=5)
    assert a == b


def test_trivial_all_cycle_one_community():
    # all cycle nodes in one community distinct from {v1, v2}:
    # the crossing edges are exactly the fasteners, a*L*B >= B + 1 >= r
    for triple in [(4, 1, Fraction(1, 2)), (3, 1, Fraction(2, 3)), (8, 2, Fraction(1, 4))]:
        m = build_blowup_motif(*triple)
        labels = [0, 0] + [1] * (m.num_vertices - 2)
        across = edges_across(m, labels)
        a, L, B = m.a, m.L, m.B
        assert across == len(m.fastener_nodes) == a * L * B
        assert Fraction(across) >= B + 1 >= m.r


def test_boundary_lemma_examples():
    rep = check_boundary_lemma(G412)
    assert rep.ok and rep.mode == "exhaustive"
    # single cycle node: boundary exactly 2B
    cyc_edges = G412.cycle_edges()
    v = G412.cycle_vertices[0]
    assert sum(1 for e in cyc_edges if v in e) == 2 * G412.B

    m82 = build_blowup_motif(8, 2, Fraction(1, 4))
    rep82 = check_boundary_lemma(m82)
    assert rep82.ok
    # one full layer: boundary 2*B^2 = 8 >= 2B = 4
    layer = set(m82.layer_members(1))
    boundary = sum(1 for u, w in m82.cycle_edges() if (u in layer) != (w in layer))
    assert boundary == 2 * m82.B**2 == 8


def test_boundary_two_adjacent_nodes():
    # two adjacent cycle nodes of the 4-cycle: boundary = 2 >= 2
    inv = {wt: v for v, wt in G412.cycle_nodes.items()}
    s = {inv[(1, 1)], inv[(2, 1)]}
    boundary = sum(1 for u, w in G412.cycle_edges() if (u in s) != (w in s))
    assert boundary == 2


def test_boundary_lemma_needs_metadata():
    from sbmotif.motif import MotifError

    with pytest.raises(MotifError, match="layer metadata"):
        check_boundary_lemma(PATH)


def test_fastener_lemma_cases():
    rep = check_fastener_lemma(G412)
    assert rep.ok and rep.mode == "exhaustive"
    # hand-checked subset {(2,1)} (the v1-fastener): LHS = 2 + 2*1 = 4 >= 3 = RHS
    inv = {wt: v for v, wt in G412.cycle_nodes.items()}
    s = {inv[(2, 1)]}
    boundary = sum(1 for u, w in G412.cycle_edges() if (u in s) != (w in s))
    fast_outside = len(G412.fastener_nodes - s)
    a = G412.a
    lhs = Fraction(boundary + 2 * fast_outside)
    rhs = 2 * a * (len(G412.cycle_vertices) - len(s))
    assert boundary == 2 and fast_outside == 1
    assert lhs == 4 and rhs == 3


def test_fastener_lemma_boundary_cases():
    # S = empty: 2|V_fst| >= 2a|V_cyc| with equality; S = all: 0 >= 0
    for triple in [(4, 1, Fraction(1, 2)), (3, 1, Fraction(2, 3))]:
        m = build_blowup_motif(*triple)
        assert Fraction(2 * len(m.fastener_nodes)) == 2 * m.a * len(m.cycle_vertices)
        assert check_fastener_lemma(m).ok


def test_lemma_checks_sampled_mode():
    m = build_blowup_motif(8, 2, Fraction(1, 4))
    rep = check_boundary_lemma(m, mode="sampled", num_samples=300, seed=4)
    assert rep.ok and rep.mode == "sampled"
    rep2 = check_fastener_lemma(m, mode="sampled", num_samples=300, seed=4)
    assert rep2.ok


def test_overlap_cap_basic():
    rep = check_overlap_cap(G412, universe_size=12, trials=500, seed=9)
    assert rep.ok
    assert rep.equality_at_full_overlap
    assert rep.trials == 500


def test_overlap_cap_universe_too_small():
    with pytest.raises(ValueError, match="universe"):
        check_overlap_cap(G412, universe_size=9, trials=10, seed=0)


def test_overlap_single_shared_image_enumerated():
    # every pattern sharing exactly one cycle image keeps at most
    # floor(r * 1) = 1 shared edge
    import itertools

    order = G412.internal_order
    d = len(order)
    base = list(range(2, 2 + d))
    r = G412.r

    def labeled(images):
        out = set()
        img = {G412.v1: 0, G412.v2: 1, **dict(zip(order, images))}
        for u, w in G412.edges:
            a, b = img[u], img[w]
            out.add((min(a, b), max(a, b)))
        return out

    e1 = labeled(base)
    fresh = list(range(100, 100 + d))
    worst = 0
    for keep_pos in range(d):       # which slot of pi2 reuses an image
        for keep_val in base:        # which image it reuses
            for rest in itertools.permutations(fresh[: d - 1]):
                images2 = list(rest[:keep_pos]) + [keep_val] + list(rest[keep_pos:])
                shared = len(e1 & labeled(images2))
                worst = max(worst, shared)
                assert shared * r.denominator <= r.numerator  # u = 1
    assert worst <= 1


def test_exhaustive_restricted_growth_is_complete():
    # the enumerated partition count matches the Bell numbers
    assert sum(1 for _ in iter_restricted_growth(4)) == bell_number(4) == 15
    assert sum(1 for _ in iter_restricted_growth(6)) == bell_number(6) == 203


def test_slack_report_invariant():
    rep = certify_exhaustive(G412)
    assert slack_of(G412, rep.argmin_partition) == rep.min_slack
