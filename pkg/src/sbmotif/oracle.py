"""Brute-force reference for the count polynomial.

Materializes every injection as an explicit tuple, multiplies the edge
entries per injection, and adds the products with correctly-rounded
summation.  Kept deliberately independent of the depth-first evaluation
path in :mod:`sbmotif.counting`; tests cross-check the two.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .counting import as_dense
from .motif import Motif


def count_attached_reference(Y, motif: Motif, i: int, j: int,
                             allowed: Sequence[int]) -> float:
    Yd = as_dense(Y)
    order = motif.internal_order
    d = len(order)
    tuples = list(itertools.permutations([int(v) for v in allowed], d))
    if not tuples:
        return 0.0
    imgs = np.asarray(tuples, dtype=np.int64)
    column = {v: imgs[:, t] for t, v in enumerate(order)}
    column[motif.v1] = np.full(len(tuples), i, dtype=np.int64)
    column[motif.v2] = np.full(len(tuples), j, dtype=np.int64)
    products = np.ones(len(tuples))
    for u, w in motif.edges:
        products = products * Yd[column[u], column[w]]
    return math.fsum(products.tolist())
