# cython: language_level=3
"""Compiled hot loops: injection-sum evaluation and partition-slack scan.

Mirrors the pure-Python module ``_kernels_py``; see there for the
contract.  The innermost injection level runs branch-free over all
candidates and subtracts the used ones, and per-branch contributions
are folded in with Neumaier-compensated summation in a fixed order.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs
from libc.stdlib cimport free, malloc

cnp.import_array()


cdef struct InjAcc:
    double s
    double comp
    double abs_s


cdef void _inj_dfs(int t, int d, double prod, double aprod,
                   const double* Y, Py_ssize_t n,
                   const long long* allowed, int m,
                   const long long* edge_ptr, const long long* edge_other,
                   long long* img, unsigned char* used,
                   long long img_i, long long img_j,
                   const double** rows, InjAcc* acc) noexcept nogil:
    cdef int idx, k, n_e
    cdef long long e, code, c
    cdef double p, q, s_in, a_in, x, tmp
    n_e = <int> (edge_ptr[t + 1] - edge_ptr[t])
    if t == d - 1:
        for k in range(n_e):
            code = edge_other[edge_ptr[t] + k]
            if code == -2:
                rows[k] = Y + img_i * n
            elif code == -1:
                rows[k] = Y + img_j * n
            else:
                rows[k] = Y + img[code] * n
        s_in = 0.0
        a_in = 0.0
        for idx in range(m):
            c = allowed[idx]
            q = 1.0
            for k in range(n_e):
                q *= rows[k][c]
            s_in += q
            a_in += fabs(q)
        if t > 0:
            for idx in range(m):
                if used[idx]:
                    c = allowed[idx]
                    q = 1.0
                    for k in range(n_e):
                        q *= rows[k][c]
                    s_in -= q
                    a_in -= fabs(q)
        x = prod * s_in
        tmp = acc.s + x
        if fabs(acc.s) >= fabs(x):
            acc.comp += (acc.s - tmp) + x
        else:
            acc.comp += (x - tmp) + acc.s
        acc.s = tmp
        if a_in > 0.0:
            acc.abs_s += aprod * a_in
        return
    for idx in range(m):
        if used[idx]:
            continue
        c = allowed[idx]
        p = prod
        for e in range(edge_ptr[t], edge_ptr[t + 1]):
            code = edge_other[e]
            if code == -2:
                p *= Y[img_i * n + c]
            elif code == -1:
                p *= Y[img_j * n + c]
            else:
                p *= Y[img[code] * n + c]
        img[t] = c
        used[idx] = 1
        _inj_dfs(t + 1, d, p, fabs(p), Y, n, allowed, m, edge_ptr, edge_other,
                 img, used, img_i, img_j, rows, acc)
        used[idx] = 0


def count_injections(const double[:, ::1] Y, const long long[::1] allowed,
                     long long i, long long j,
                     const long long[::1] edge_ptr, const long long[::1] edge_other):
    cdef int d = <int> (edge_ptr.shape[0] - 1)
    cdef int m = <int> allowed.shape[0]
    if m < d or d <= 0:
        return 0.0, 0.0
    cdef Py_ssize_t n = Y.shape[1]
    cdef long long* img = <long long*> malloc(d * sizeof(long long))
    cdef unsigned char* used = <unsigned char*> malloc(m * sizeof(unsigned char))
    cdef Py_ssize_t max_e = 1
    cdef int t
    for t in range(d):
        if edge_ptr[t + 1] - edge_ptr[t] > max_e:
            max_e = edge_ptr[t + 1] - edge_ptr[t]
    cdef const double** rows = <const double**> malloc(max_e * sizeof(double*))
    if img == NULL or used == NULL or rows == NULL:
        free(img); free(used); free(rows)
        raise MemoryError()
    cdef InjAcc acc
    acc.s = 0.0
    acc.comp = 0.0
    acc.abs_s = 0.0
    cdef int k
    for k in range(m):
        used[k] = 0
    try:
        with nogil:
            _inj_dfs(0, d, 1.0, 1.0, &Y[0, 0], n, &allowed[0], m,
                     &edge_ptr[0], &edge_other[0], img, used, i, j, rows, &acc)
    finally:
        free(img)
        free(used)
        free(rows)
    return acc.s + acc.comp, acc.abs_s


cdef struct SlackState:
    long long best
    long long count


cdef void _slack_dfs(int k, int num_items, int num_groups, long long cross,
                     const long long* adj_ptr, const long long* adj_prev,
                     long long* labels, long long* best_labels,
                     long long r_num, long long r_den, SlackState* st) noexcept nogil:
    cdef int g, t
    cdef long long e, add, scaled
    if k == num_items:
        scaled = cross * r_den - r_num * (num_groups - 1)
        st.count += 1
        if scaled < st.best:
            st.best = scaled
            for t in range(num_items):
                best_labels[t] = labels[t]
        return
    for g in range(num_groups + 1):
        add = 0
        for e in range(adj_ptr[k], adj_ptr[k + 1]):
            if labels[adj_prev[e]] != g:
                add += 1
        labels[k] = g
        _slack_dfs(k + 1, num_items, num_groups if g < num_groups else g + 1,
                   cross + add, adj_ptr, adj_prev, labels, best_labels,
                   r_num, r_den, st)


def min_slack_partitions(long long num_items, const long long[::1] adj_ptr,
                         const long long[::1] adj_prev, long long r_num, long long r_den):
    labels_arr = np.zeros(num_items, dtype=np.int64)
    best_arr = np.zeros(num_items, dtype=np.int64)
    cdef long long[::1] labels = labels_arr
    cdef long long[::1] best_labels = best_arr
    cdef SlackState st
    st.best = (<long long> 1) << 62
    st.count = 0
    cdef const long long* prev = &adj_prev[0] if adj_prev.shape[0] > 0 else NULL
    with nogil:
        _slack_dfs(1, <int> num_items, 1, 0, &adj_ptr[0], prev,
                   &labels[0], &best_labels[0], r_num, r_den, &st)
    return int(st.best), best_arr, int(st.count)
