# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ``_pykernels``; results must be identical."""

from libc.stdlib cimport malloc, calloc, free

cdef enum:
    OP_ORIGIN = 0
    OP_MATCH = 1
    OP_TRANSPOSE = 2
    OP_SUBSTITUTE = 3
    OP_DELETE = 4
    OP_INSERT = 5


cdef inline int _sub_cost(str a, str b, str a_low, str b_low):
    if a == b:
        return 0
    if a_low == b_low:
        return 2
    cdef str short_, long_
    if len(a_low) <= len(b_low):
        short_, long_ = a_low, b_low
    else:
        short_, long_ = b_low, a_low
    if len(short_) >= 2 and long_.startswith(short_):
        return 3
    return 4


def align_ops(src, tgt):
    cdef Py_ssize_t n = len(src), m = len(tgt)
    cdef Py_ssize_t w = m + 1
    cdef Py_ssize_t i, j, k, kmax, idx, t
    cdef int a, b, c, best, best_op, best_k, nonzero, before, same_order
    cdef int is_match
    cdef list src_low = [s.lower() for s in src]
    cdef list tgt_low = [s.lower() for s in tgt]
    cdef dict vocab = {}
    cdef list s_list = [vocab.setdefault(s, len(vocab)) for s in src_low]
    cdef list t_list = [vocab.setdefault(s, len(vocab)) for s in tgt_low]
    cdef Py_ssize_t nv = len(vocab)

    cdef int *cost = <int *> malloc((n + 1) * w * sizeof(int))
    cdef int *bop = <int *> malloc((n + 1) * w * sizeof(int))
    cdef int *bk = <int *> malloc((n + 1) * w * sizeof(int))
    cdef int *s_ids = <int *> malloc((n + 1) * sizeof(int))
    cdef int *t_ids = <int *> malloc((m + 1) * sizeof(int))
    cdef int *diff = <int *> calloc(nv + 1, sizeof(int))
    cdef int *touched = <int *> malloc((2 * (n if n < m else m) + 2) * sizeof(int))
    cdef int ntouched
    if (cost == NULL or bop == NULL or bk == NULL or s_ids == NULL or t_ids == NULL
            or diff == NULL or touched == NULL):
        free(cost); free(bop); free(bk); free(s_ids); free(t_ids); free(diff); free(touched)
        raise MemoryError()

    try:
        for i in range(n):
            s_ids[i] = s_list[i]
        for j in range(m):
            t_ids[j] = t_list[j]

        cost[0] = 0
        bop[0] = OP_ORIGIN
        bk[0] = 0
        for i in range(1, n + 1):
            cost[i * w] = 2 * i
            bop[i * w] = OP_DELETE
            bk[i * w] = 1
        for j in range(1, m + 1):
            cost[j] = 2 * j
            bop[j] = OP_INSERT
            bk[j] = 1

        for i in range(1, n + 1):
            for j in range(1, m + 1):
                idx = i * w + j
                best = -1
                best_op = OP_ORIGIN
                best_k = 1
                is_match = src[i - 1] == tgt[j - 1]
                if is_match:
                    best = cost[idx - w - 1]
                    best_op = OP_MATCH

                kmax = i if i < j else j
                if kmax >= 2:
                    ntouched = 0
                    nonzero = 0
                    same_order = 1
                    for k in range(1, kmax + 1):
                        a = s_ids[i - k]
                        b = t_ids[j - k]
                        if a != b:
                            same_order = 0
                            before = diff[a]
                            diff[a] = before + 1
                            touched[ntouched] = a
                            ntouched += 1
                            if before == 0:
                                nonzero += 1
                            elif before + 1 == 0:
                                nonzero -= 1
                            before = diff[b]
                            diff[b] = before - 1
                            touched[ntouched] = b
                            ntouched += 1
                            if before == 0:
                                nonzero += 1
                            elif before - 1 == 0:
                                nonzero -= 1
                        if k >= 2 and nonzero == 0 and not same_order:
                            c = cost[(i - k) * w + (j - k)] + 2 * <int> k
                            if best < 0 or c < best:
                                best = c
                                best_op = OP_TRANSPOSE
                                best_k = <int> k
                            break
                    for t in range(ntouched):
                        diff[touched[t]] = 0

                if not is_match:
                    c = cost[idx - w - 1] + _sub_cost(src[i - 1], tgt[j - 1], src_low[i - 1], tgt_low[j - 1])
                    if best < 0 or c < best:
                        best = c
                        best_op = OP_SUBSTITUTE
                        best_k = 1
                c = cost[idx - w] + 2
                if best < 0 or c < best:
                    best = c
                    best_op = OP_DELETE
                    best_k = 1
                c = cost[idx - 1] + 2
                if c < best:
                    best = c
                    best_op = OP_INSERT
                    best_k = 1
                cost[idx] = best
                bop[idx] = best_op
                bk[idx] = best_k

        ops = []
        i = n
        j = m
        while i > 0 or j > 0:
            idx = i * w + j
            k = bk[idx]
            if bop[idx] == OP_MATCH or bop[idx] == OP_SUBSTITUTE:
                ops.append((bop[idx], i - 1, i, j - 1, j))
                i -= 1
                j -= 1
            elif bop[idx] == OP_TRANSPOSE:
                ops.append((OP_TRANSPOSE, i - k, i, j - k, j))
                i -= k
                j -= k
            elif bop[idx] == OP_DELETE:
                ops.append((OP_DELETE, i - 1, i, j, j))
                i -= 1
            else:
                ops.append((OP_INSERT, i, i, j - 1, j))
                j -= 1
        ops.reverse()
        return cost[n * w + m], ops
    finally:
        free(cost); free(bop); free(bk); free(s_ids); free(t_ids); free(diff); free(touched)


def char_distance(str a, str b):
    if len(a) < len(b):
        a, b = b, a
    cdef Py_ssize_t la = len(a), lb = len(b), i, j
    if lb == 0:
        return la
    cdef Py_UCS4 ca
    cdef Py_ssize_t *prev = <Py_ssize_t *> malloc((lb + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t *cur = <Py_ssize_t *> malloc((lb + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t *tmp
    cdef Py_ssize_t x, y, z
    if prev == NULL or cur == NULL:
        free(prev); free(cur)
        raise MemoryError()
    try:
        for j in range(lb + 1):
            prev[j] = j
        for i in range(1, la + 1):
            ca = a[i - 1]
            cur[0] = i
            for j in range(1, lb + 1):
                x = prev[j] + 1
                y = cur[j - 1] + 1
                z = prev[j - 1] + (0 if ca == b[j - 1] else 1)
                if y < x:
                    x = y
                if z < x:
                    x = z
                cur[j] = x
            tmp = prev
            prev = cur
            cur = tmp
        return prev[lb]
    finally:
        free(prev); free(cur)
