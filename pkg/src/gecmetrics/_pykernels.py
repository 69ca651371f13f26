"""Pure-Python versions of the hot loops; see ``_ckernels.pyx`` for the compiled twin.

Alignment costs are kept in half-units so that every comparison is exact
integer arithmetic: match 0, delete/insert 2, substitution 2 (case only),
3 (shared prefix of length >= 2) or 4, block transposition of k tokens 2k.
"""

OP_ORIGIN = 0
OP_MATCH = 1
OP_TRANSPOSE = 2
OP_SUBSTITUTE = 3
OP_DELETE = 4
OP_INSERT = 5


def substitution_cost(a, b, a_low, b_low):
    if a == b:
        return 0
    if a_low == b_low:
        return 2
    short, long_ = (a_low, b_low) if len(a_low) <= len(b_low) else (b_low, a_low)
    if len(short) >= 2 and long_.startswith(short):
        return 3
    return 4


def align_ops(src, tgt):
    """Minimal-cost alignment of two token sequences.

    Returns ``(op, i0, i1, j0, j1)`` tuples in order, where ``op`` is one of
    the ``OP_*`` codes and ``src[i0:i1]`` aligns to ``tgt[j0:j1]``.
    """
    n, m = len(src), len(tgt)
    src_low = [t.lower() for t in src]
    tgt_low = [t.lower() for t in tgt]
    vocab = {}
    s_ids = [vocab.setdefault(t, len(vocab)) for t in src_low]
    t_ids = [vocab.setdefault(t, len(vocab)) for t in tgt_low]

    cost = [[0] * (m + 1) for _ in range(n + 1)]
    back = [[(OP_ORIGIN, 0)] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        cost[i][0] = 2 * i
        back[i][0] = (OP_DELETE, 1)
    for j in range(1, m + 1):
        cost[0][j] = 2 * j
        back[0][j] = (OP_INSERT, 1)

    diff = [0] * len(vocab)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            best = None
            best_op = None
            if src[i - 1] == tgt[j - 1]:
                best = cost[i - 1][j - 1]
                best_op = (OP_MATCH, 1)

            # Block transpositions ending at (i, j): same lowercased multiset,
            # different lowercased order.
            kmax = min(i, j)
            if kmax >= 2:
                touched = []
                nonzero = 0
                same_order = True
                for k in range(1, kmax + 1):
                    a = s_ids[i - k]
                    b = t_ids[j - k]
                    if a != b:
                        same_order = False
                        for x, d in ((a, 1), (b, -1)):
                            before = diff[x]
                            diff[x] = before + d
                            touched.append(x)
                            if before == 0:
                                nonzero += 1
                            elif before + d == 0:
                                nonzero -= 1
                    if k >= 2 and nonzero == 0 and not same_order:
                        c = cost[i - k][j - k] + 2 * k
                        if best is None or c < best:
                            best = c
                            best_op = (OP_TRANSPOSE, k)
                        break
                for x in touched:
                    diff[x] = 0

            c = cost[i - 1][j - 1] + substitution_cost(src[i - 1], tgt[j - 1], src_low[i - 1], tgt_low[j - 1])
            if src[i - 1] != tgt[j - 1] and (best is None or c < best):
                best = c
                best_op = (OP_SUBSTITUTE, 1)
            c = cost[i - 1][j] + 2
            if best is None or c < best:
                best = c
                best_op = (OP_DELETE, 1)
            c = cost[i][j - 1] + 2
            if c < best:
                best = c
                best_op = (OP_INSERT, 1)
            cost[i][j] = best
            back[i][j] = best_op

    ops = []
    i, j = n, m
    while i > 0 or j > 0:
        op, k = back[i][j]
        if op == OP_MATCH or op == OP_SUBSTITUTE:
            ops.append((op, i - 1, i, j - 1, j))
            i -= 1
            j -= 1
        elif op == OP_TRANSPOSE:
            ops.append((op, i - k, i, j - k, j))
            i -= k
            j -= k
        elif op == OP_DELETE:
            ops.append((op, i - 1, i, j, j))
            i -= 1
        else:
            ops.append((op, i, i, j - 1, j))
            j -= 1
    ops.reverse()
    return cost[n][m], ops


def char_distance(a, b):
    """Character-level Levenshtein distance (unit costs)."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i] + [0] * len(b)
        for j, cb in enumerate(b, 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb))
        prev = cur
    return prev[-1]
