"""Pure-Python fallback for the compiled hot loops.

Same call signatures and same accumulation structure as ``_kernels.pyx``:
injection sums use Neumaier-compensated accumulation of per-branch
contributions, with the innermost assignment level evaluated over all
candidates at once (numpy) and already-used candidates subtracted.
Selected automatically when the compiled extension is unavailable, or
explicitly via the ``SBMOTIF_PURE`` environment variable.
"""

from __future__ import annotations

import numpy as np


def _neumaier_add(acc, x):
    s = acc[0]
    t = s + x
    if abs(s) >= abs(x):
        acc[1] += (s - t) + x
    else:
        acc[1] += (x - t) + s
    acc[0] = t


def count_injections(Y, allowed, i, j, edge_ptr, edge_other):
    """Sum of edge-entry products over all injections of the internal
    motif vertices into ``allowed`` (images of v1, v2 fixed at i, j).

    ``edge_ptr``/``edge_other`` encode, per internal vertex in assignment
    order, the earlier endpoint of every edge bound at that step:
    -2 means i, -1 means j, t >= 0 the image of internal slot t.
    Returns ``(value, abs_sum)`` where ``abs_sum`` accumulates absolute
    products for the roundoff bound.
    """
    Y = np.asarray(Y, dtype=np.float64)
    allowed = np.asarray(allowed, dtype=np.int64)
    edge_ptr = np.asarray(edge_ptr, dtype=np.int64)
    edge_other = np.asarray(edge_other, dtype=np.int64)
    d = len(edge_ptr) - 1
    m = int(allowed.size)
    if m < d or d <= 0:
        return 0.0, 0.0

    img = np.zeros(d, dtype=np.int64)
    used = np.zeros(m, dtype=bool)
    acc = [0.0, 0.0, 0.0]  # sum, compensation, abs sum
    last = d - 1
    last_codes = [int(c) for c in edge_other[edge_ptr[last]:edge_ptr[last + 1]]]

    def row_of(code):
        if code == -2:
            return i
        if code == -1:
            return j
        return int(img[code])

    def rec(t, prod, aprod):
        if t == last:
            vec = np.ones(m)
            for code in last_codes:
                vec = vec * Y[row_of(code), allowed]
            s = float(vec.sum())
            a = float(np.abs(vec).sum())
            if t > 0:
                uv = vec[used]
                s -= float(uv.sum())
                a -= float(np.abs(uv).sum())
            _neumaier_add(acc, prod * s)
            acc[2] += aprod * max(a, 0.0)
            return
        for idx in range(m):
            if used[idx]:
                continue
            c = int(allowed[idx])
            p = prod
            for e in range(edge_ptr[t], edge_ptr[t + 1]):
                p *= Y[row_of(int(edge_other[e])), c]
            img[t] = c
            used[idx] = True
            rec(t + 1, p, abs(p))
            used[idx] = False

    rec(0, 1.0, 1.0)
    return acc[0] + acc[1], acc[2]


def min_slack_partitions(num_items, adj_ptr, adj_prev, r_num, r_den):
    """Scan every partition of ``num_items`` elements (restricted-growth
    enumeration, element 0 pinned to group 0) and minimize the scaled
    slack ``cross_edges * r_den - r_num * (groups - 1)``.

    ``adj_ptr``/``adj_prev`` give, per element, the earlier endpoints of
    its incident edges (with multiplicity).  Returns
    ``(min_scaled_slack, argmin_labels, partitions_checked)``.
    """
    adj_ptr = np.asarray(adj_ptr, dtype=np.int64)
    adj_prev = np.asarray(adj_prev, dtype=np.int64)
    labels = np.zeros(num_items, dtype=np.int64)
    state = {"best": None, "argmin": None, "count": 0}

    def rec(k, num_groups, cross):
        if k == num_items:
            scaled = cross * r_den - r_num * (num_groups - 1)
            state["count"] += 1
            if state["best"] is None or scaled < state["best"]:
                state["best"] = scaled
                state["argmin"] = labels.copy()
            return
        for g in range(num_groups + 1):
            add = 0
            for e in range(adj_ptr[k], adj_ptr[k + 1]):
                if labels[adj_prev[e]] != g:
                    add += 1
            labels[k] = g
            rec(k + 1, num_groups if g < num_groups else g + 1, cross + add)

    rec(1, 1, 0)
    return int(state["best"]), state["argmin"], int(state["count"])
