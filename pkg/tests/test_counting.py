import math
from fractions import Fraction

import numpy as np
import pytest

from sbmotif.counting import (
    CountRequest,
    check_variance_ratio_condition,
    count_attached,
    count_blocks,
    envelope_assumptions,
    expected_count_same,
    falling_factorial,
    variance_bound_rhs,
)
from sbmotif.motif import Motif, build_blowup_motif
from sbmotif.oracle import count_attached_reference
from sbmotif.sbm import SbmParams, derive_seed, sample

G412 = build_blowup_motif(4, 1, Fraction(1, 2))
G313 = build_blowup_motif(3, 1, Fraction(2, 3))


def ones_matrix(n):
    y = np.ones((n, n))
    np.fill_diagonal(y, 0.0)
    return y


def test_all_ones_counts_injections():
    req = CountRequest(motif=G412, i=0, j=1, allowed=tuple(range(2, 10)))
    res = count_attached(ones_matrix(10), req)
    assert res.value == 8 * 7 * 6 * 5 == 1680
    assert res.num_injections == 1680


def test_all_zeros():
    req = CountRequest(motif=G412, i=0, j=1, allowed=tuple(range(2, 10)))
    res = count_attached(np.zeros((10, 10)), req)
    assert res.value == 0.0


def test_seeded_sample_matches_oracle():
    s = sample(SbmParams(n=9, K=2, p=0.7, q=0.2, seed=42))
    y = s.centered()
    allowed = tuple(range(2, 9))
    res = count_attached(y, CountRequest(motif=G313, i=0, j=1, allowed=allowed))
    ref = count_attached_reference(y, G313, 0, 1, allowed)
    assert abs(res.value - ref) <= max(res.compensation_error_bound, 1e-10 * abs(ref))


def test_oracle_equivalence_randomized():
    rng = np.random.default_rng(7)
    motifs = [G313, G412, build_blowup_motif(6, 1, Fraction(1, 3))]
    for trial in range(25):
        motif = motifs[trial % len(motifs)]
        d = motif.num_vertices - 2
        n = int(rng.integers(d + 3, d + 8))
        s = sample(SbmParams(n=n, K=int(rng.integers(1, 4)), p=0.8, q=0.2,
                             seed=int(rng.integers(0, 2**32))))
        y = s.centered()
        i, j = sorted(rng.choice(n, size=2, replace=False))
        allowed = tuple(v for v in range(n) if v not in (i, j))
        res = count_attached(y, CountRequest(motif=motif, i=int(i), j=int(j), allowed=allowed))
        ref = count_attached_reference(y, motif, int(i), int(j), allowed)
        assert abs(res.value - ref) <= max(res.compensation_error_bound, 1e-10 * abs(ref), 1e-12)


def test_request_validation():
    with pytest.raises(ValueError, match="distinct"):
        CountRequest(motif=G412, i=3, j=3, allowed=(4, 5))
    with pytest.raises(ValueError, match="contain"):
        CountRequest(motif=G412, i=0, j=1, allowed=(1, 4))
    with pytest.raises(ValueError, match="duplicates"):
        CountRequest(motif=G412, i=0, j=1, allowed=(4, 4))


def test_small_allowed_set_gives_zero_count():
    req = CountRequest(motif=G412, i=0, j=1, allowed=(2, 3))
    res = count_attached(ones_matrix(6), req)
    assert res.value == 0.0 and res.num_injections == 0


def test_count_blocks():
    s = sample(SbmParams(n=10, K=2, p=0.8, q=0.2, seed=3))
    y = s.centered()
    whole = tuple(range(2, 10))
    [single] = count_blocks(y, G313, 0, 1, [whole])
    direct = count_attached(y, CountRequest(motif=G313, i=0, j=1, allowed=whole))
    assert single.value == direct.value
    halves = [whole[0::2], whole[1::2]]
    res = count_blocks(y, G313, 0, 1, halves)
    for block, r in zip(halves, res):
        ref = count_attached_reference(y, G313, 0, 1, block)
        assert abs(r.value - ref) <= max(r.compensation_error_bound, 1e-10 * abs(ref), 1e-12)
        assert r.num_injections == falling_factorial(4, 3)
    with pytest.raises(ValueError, match="equal sizes"):
        count_blocks(y, G313, 0, 1, [whole[:3], whole[3:]])
    with pytest.raises(ValueError, match="overlap"):
        count_blocks(y, G313, 0, 1, [whole[:4], whole[:4]])
    with pytest.raises(ValueError, match="partition"):
        count_blocks(y, G313, 0, 1, [whole[:4], (0,) + whole[5:]])


def test_num_injections_independent_of_matrix():
    rng = np.random.default_rng(0)
    req = CountRequest(motif=G412, i=0, j=1, allowed=tuple(range(2, 9)))
    a = count_attached(rng.normal(size=(9, 9)), req)
    b = count_attached(ones_matrix(9), req)
    assert a.num_injections == b.num_injections == falling_factorial(7, 4)


def test_permutation_equivariance():
    s = sample(SbmParams(n=9, K=2, p=0.7, q=0.2, seed=11))
    y = s.centered().dense
    rng = np.random.default_rng(5)
    perm = rng.permutation(9)
    yp = y[np.ix_(perm, perm)]
    inv = np.argsort(perm)
    allowed = tuple(range(2, 9))
    res = count_attached(y, CountRequest(motif=G313, i=0, j=1, allowed=allowed))
    res_p = count_attached(
        yp,
        CountRequest(motif=G313, i=int(inv[0]), j=int(inv[1]),
                     allowed=tuple(int(inv[v]) for v in allowed)),
    )
    assert res_p.value == pytest.approx(res.value, rel=1e-12)


def test_affine_in_each_entry():
    # the count is degree-1 in any single (symmetric) entry: the second
    # difference of a 3-point evaluation vanishes
    s = sample(SbmParams(n=8, K=2, p=0.7, q=0.2, seed=2))
    base = np.array(s.centered().dense)
    req = CountRequest(motif=G313, i=0, j=1, allowed=tuple(range(2, 8)))
    rng = np.random.default_rng(3)
    for _ in range(6):
        u, w = sorted(rng.choice(8, size=2, replace=False))
        values = []
        for t in (0.0, 1.0, 2.0):
            y = base.copy()
            y[u, w] = y[w, u] = t
            values.append(count_attached(y, req).value)
        second_diff = values[2] - 2 * values[1] + values[0]
        scale = max(abs(v) for v in values) or 1.0
        assert abs(second_diff) <= 1e-9 * scale


def test_expected_count_same_examples():
    assert expected_count_same(10, 1, 1.0, G412) == 1680.0
    assert expected_count_same(10, 2, 0.5, G313) == pytest.approx(1.3125, rel=1e-14)
    assert expected_count_same(10, 2, 0.0, G313) == 0.0
    assert expected_count_same(4, 2, 0.5, G313) == 0.0  # too few vertices


def test_expected_count_log_space_fallback():
    # magnitudes beyond the exact-integer float range still evaluate
    big = build_blowup_motif(4, 2, Fraction(1, 2))
    v = expected_count_same(400, 2, 0.9, big)
    d = big.num_vertices - 2
    log_direct = (
        math.lgamma(399) - math.lgamma(399 - d)
        + big.num_edges * math.log(0.9) - d * math.log(2)
    )
    assert math.log(v) == pytest.approx(log_direct, rel=1e-12)


def test_variance_bound_selectors_and_monotonicity():
    # lambda^2 >= p_bar >= q_bar: the two selectors pick q_bar/p_bar and 1
    # (only reachable at the lambda = 1, q = 0 extreme)
    m, K, lam, q = 30, 2, 1.0, 0.0
    q_bar = q * (1 - q)
    p_bar = q_bar + lam * (1 - 2 * q)
    assert lam * lam >= p_bar >= q_bar
    d = G412.num_vertices - 2
    r = float(G412.r)
    mean = expected_count_same(m, K, lam, G412)
    t1 = 2 * d**3 * K**2 / m * (q_bar / p_bar) ** r
    t2 = 2 * d**3 * K / m * 1.0
    expected = mean * mean * d * d * (t1 + t2 + t1**d + t2**d)
    assert variance_bound_rhs(m, K, lam, q, G412) == pytest.approx(expected, rel=1e-12)
    # independent recomputation at generic parameters
    m, K, lam, q = 30, 2, 0.4, 0.1
    q_bar = q * (1 - q)
    p_bar = q_bar + lam * (1 - 2 * q)
    mean = expected_count_same(m, K, lam, G412)
    t1 = 2 * d**3 * K**2 / m * max(q_bar / lam**2, q_bar / p_bar) ** r
    t2 = 2 * d**3 * K / m * max(p_bar / lam**2, 1.0) ** r
    expected = mean * mean * d * d * (t1 + t2 + t1**d + t2**d)
    assert variance_bound_rhs(m, K, lam, q, G412) == pytest.approx(expected, rel=1e-12)
    assert variance_bound_rhs(m, 3, lam, q, G412) > variance_bound_rhs(m, 2, lam, q, G412)


def test_variance_bound_warns_outside_hypotheses():
    assert envelope_assumptions(30, 2, 0.4, 0.1, G412) == []
    bad = envelope_assumptions(10, 2, 0.6, 0.3, G412)
    assert len(bad) == 3
    with pytest.warns(UserWarning, match="hypotheses"):
        variance_bound_rhs(10, 2, 0.6, 0.3, G412)


def test_variance_ratio_condition():
    assert check_variance_ratio_condition(10**9, 2, 1.0, 0.01, G412, rho=2.0)
    d = G412.num_vertices - 2
    m = 2 * d + 4
    assert not check_variance_ratio_condition(m, m, 1.0, 0.1, G412, rho=1.5)
    # monotone in rho: holding at rho=2 implies holding at rho=1.5
    for m_try in (10**4, 10**6, 10**8):
        if check_variance_ratio_condition(m_try, 2, 0.5, 0.05, G412, rho=2.0):
            assert check_variance_ratio_condition(m_try, 2, 0.5, 0.05, G412, rho=1.5)
    with pytest.raises(ValueError, match="rho"):
        check_variance_ratio_condition(100, 2, 0.5, 0.1, G412, rho=1.0)


def test_falling_factorial():
    assert falling_factorial(8, 4) == 1680
    assert falling_factorial(3, 5) == 0
    assert falling_factorial(5, 0) == 1
