"""Pure-Python (numpy) versions of the DP tables in ``_kernels.pyx``."""

import numpy as np

UNREACHABLE = np.iinfo(np.int32).max


def knapsack_suffix(sizes, weights, capacity):
    """Suffix 0-1 knapsack tables.

    Row ``i`` holds, for every capacity ``c``, the best total weight using
    items ``i..n-1`` and the smallest total size achieving it.
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    n = len(sizes)
    best_w = np.zeros((n + 1, capacity + 1), dtype=np.float64)
    best_s = np.zeros((n + 1, capacity + 1), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        s, w = int(sizes[i]), float(weights[i])
        best_w[i] = best_w[i + 1]
        best_s[i] = best_s[i + 1]
        if s > capacity:
            continue
        cand_w = best_w[i + 1, : capacity + 1 - s] + w
        cand_s = best_s[i + 1, : capacity + 1 - s] + s
        cur_w = best_w[i, s:]
        cur_s = best_s[i, s:]
        take = (cand_w > cur_w) | ((cand_w == cur_w) & (cand_s < cur_s))
        best_w[i, s:] = np.where(take, cand_w, cur_w)
        best_s[i, s:] = np.where(take, cand_s, cur_s)
    return best_w, best_s


def subset_min_count(sizes, total):
    """Row ``i``: fewest items from ``i..n-1`` summing exactly to each total."""
    sizes = np.asarray(sizes, dtype=np.int64)
    n = len(sizes)
    tab = np.full((n + 1, total + 1), UNREACHABLE, dtype=np.int32)
    tab[n, 0] = 0
    for i in range(n - 1, -1, -1):
        s = int(sizes[i])
        tab[i] = tab[i + 1]
        if s > total:
            continue
        prev = tab[i + 1, : total + 1 - s]
        cand = np.where(prev == UNREACHABLE, UNREACHABLE, prev + 1)
        tab[i, s:] = np.minimum(tab[i, s:], cand)
    return tab
