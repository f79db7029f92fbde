"""Hot numeric kernels.

Each kernel exists twice: an explicit-loop version compiled with numba and a
vectorised numpy version. The module-level names (``numeric_split``,
``categorical_split``, ``grounded_batch``) point at the loop versions when
numba is active and at the numpy versions otherwise. Both versions return
bit-identical results: split scores are built from exact integer sums of
squared class counts, so float rounding happens in the same operations.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

# Label codes used by grounded_batch.
INACTIVE, IN, OUT, UNDEC = 0, 1, 2, 3


def _midpoint(lo, hi):
    t = (lo + hi) / 2.0
    if t <= lo:
        t = hi
    return t


midpoint = njit(cache=True)(_midpoint)


@njit(cache=True)
def numeric_split_loop(x, y, n_classes):
    """Best threshold split of one numeric column.

    Returns ``(score, threshold)`` where score is
    ``sum(left_counts**2)/n_left + sum(right_counts**2)/n_right`` (larger is
    purer) and the left side is ``x < threshold``. Score is ``-inf`` when the
    column is constant.
    """
    n = x.shape[0]
    order = np.argsort(x)
    left = np.zeros(n_classes, dtype=np.int64)
    right = np.zeros(n_classes, dtype=np.int64)
    for i in range(n):
        right[y[i]] += 1
    sl = 0
    sr = 0
    for c in range(n_classes):
        sr += right[c] * right[c]
    best = -np.inf
    best_i = -1
    for i in range(n - 1):
        c = y[order[i]]
        sl += 2 * left[c] + 1
        left[c] += 1
        sr -= 2 * right[c] - 1
        right[c] -= 1
        if x[order[i]] < x[order[i + 1]]:
            nl = i + 1
            score = sl / nl + sr / (n - nl)
            if score > best:
                best = score
                best_i = i
    if best_i < 0:
        return best, np.nan
    return best, midpoint(x[order[best_i]], x[order[best_i + 1]])


def numeric_split_numpy(x, y, n_classes):
    n = x.shape[0]
    if n < 2:
        return -np.inf, np.nan
    order = np.argsort(x, kind="stable")
    xs = x[order]
    onehot = np.zeros((n, n_classes), dtype=np.int64)
    onehot[np.arange(n), y[order]] = 1
    cum = np.cumsum(onehot, axis=0)
    left = cum[:-1]
    right = cum[-1] - left
    nl = np.arange(1, n, dtype=np.int64)
    score = (left * left).sum(axis=1) / nl + (right * right).sum(axis=1) / (n - nl)
    score[~(xs[:-1] < xs[1:])] = -np.inf
    i = int(np.argmax(score))
    if score[i] == -np.inf:
        return -np.inf, np.nan
    return float(score[i]), _midpoint(float(xs[i]), float(xs[i + 1]))


@njit(cache=True)
def categorical_split_loop(codes, y, n_values, n_classes):
    """Best one-vs-rest split of one categorical column.

    Returns ``(score, value_code)``; the left side is ``codes == value_code``.
    Score as in :func:`numeric_split_loop`; ``-inf`` and ``-1`` if no value
    separates the rows.
    """
    n = codes.shape[0]
    counts = np.zeros((n_values, n_classes), dtype=np.int64)
    total = np.zeros(n_classes, dtype=np.int64)
    for i in range(n):
        counts[codes[i], y[i]] += 1
        total[y[i]] += 1
    best = -np.inf
    best_v = -1
    for v in range(n_values):
        nv = 0
        sl = 0
        sr = 0
        for c in range(n_classes):
            k = counts[v, c]
            r = total[c] - k
            nv += k
            sl += k * k
            sr += r * r
        if nv == 0 or nv == n:
            continue
        score = sl / nv + sr / (n - nv)
        if score > best:
            best = score
            best_v = v
    return best, best_v


def categorical_split_numpy(codes, y, n_values, n_classes):
    counts = np.bincount(codes * n_classes + y, minlength=n_values * n_classes)
    counts = counts.reshape(n_values, n_classes).astype(np.int64)
    total = counts.sum(axis=0)
    nv = counts.sum(axis=1)
    n = int(total.sum())
    right = total - counts
    valid = (nv > 0) & (nv < n)
    if not valid.any():
        return -np.inf, -1
    safe_nv = np.where(valid, nv, 1)
    score = (counts * counts).sum(axis=1) / safe_nv + (right * right).sum(axis=1) / np.where(
        valid, n - nv, 1
    )
    score[~valid] = -np.inf
    v = int(np.argmax(score))
    return float(score[v]), v


@njit(cache=True)
def grounded_batch_loop(active, indptr, targets):
    """Grounded labelling of the activated sub-framework, one row per instance.

    ``active`` is an ``(n_instances, n_args)`` boolean matrix; the attack
    relation is given in CSR form (attacks of argument ``a`` are
    ``targets[indptr[a]:indptr[a + 1]]``). Returns int8 labels
    ``INACTIVE/IN/OUT/UNDEC`` per cell.
    """
    n_rows, n_args = active.shape
    labels = np.zeros((n_rows, n_args), dtype=np.int8)
    pending = np.zeros(n_args, dtype=np.int64)
    stack = np.empty(n_args, dtype=np.int64)
    for r in range(n_rows):
        for a in range(n_args):
            pending[a] = 0
            labels[r, a] = 3 if active[r, a] else 0
        for a in range(n_args):
            if active[r, a]:
                for k in range(indptr[a], indptr[a + 1]):
                    if active[r, targets[k]]:
                        pending[targets[k]] += 1
        top = 0
        for a in range(n_args):
            if active[r, a] and pending[a] == 0:
                labels[r, a] = 1
                stack[top] = a
                top += 1
        while top > 0:
            top -= 1
            a = stack[top]
            for k in range(indptr[a], indptr[a + 1]):
                t = targets[k]
                if labels[r, t] != 3:
                    continue
                labels[r, t] = 2
                for m in range(indptr[t], indptr[t + 1]):
                    u = targets[m]
                    if labels[r, u] == 3:
                        pending[u] -= 1
                        if pending[u] == 0:
                            labels[r, u] = 1
                            stack[top] = u
                            top += 1
    return labels


def grounded_batch_numpy(active, indptr, targets):
    n_rows, n_args = active.shape
    adj = np.zeros((n_args, n_args), dtype=np.int32)
    for a in range(n_args):
        adj[a, targets[indptr[a] : indptr[a + 1]]] = 1
    is_in = np.zeros_like(active, dtype=bool)
    is_out = np.zeros_like(active, dtype=bool)
    while True:
        live = (active & ~is_out).astype(np.int32) @ adj
        new_in = active & ~is_in & ~is_out & (live == 0)
        if not new_in.any():
            break
        is_in |= new_in
        is_out |= active & ((is_in.astype(np.int32) @ adj) > 0)
    labels = np.where(active, UNDEC, INACTIVE).astype(np.int8)
    labels[is_in] = IN
    labels[is_out] = OUT
    return labels


def to_csr(n_args, attacks):
    """CSR arrays for an attack list of ``(attacker, target)`` index pairs."""
    indptr = np.zeros(n_args + 1, dtype=np.int64)
    pairs = sorted(set(attacks))
    for a, _ in pairs:
        indptr[a + 1] += 1
    np.cumsum(indptr, out=indptr)
    targets = np.array([b for _, b in pairs], dtype=np.int64)
    return indptr, targets


if USE_NUMBA:
    numeric_split = numeric_split_loop
    categorical_split = categorical_split_loop
    grounded_batch = grounded_batch_loop
else:
    numeric_split = numeric_split_numpy
    categorical_split = categorical_split_numpy
    grounded_batch = grounded_batch_numpy
