"""NumPy implementation of the bounded two-constraint knapsack tables."""
import numpy as np


def suffix_tables(costs, values, copies, capacity, max_items):
    """Return F with F[i, b, t] = best value from items i.. using exactly b
    bins and exactly t items (-inf where unreachable)."""
    n = len(costs)
    tables = np.full((n + 1, capacity + 1, max_items + 1), -np.inf)
    tables[n, 0, 0] = 0.0
    for i in range(n - 1, -1, -1):
        k, v = int(costs[i]), float(values[i])
        nxt = tables[i + 1]
        cur = nxt.copy()
        for j in range(1, int(copies[i]) + 1):
            shift_b = j * k
            if shift_b > capacity or j > max_items:
                break
            cand = nxt[: capacity + 1 - shift_b, : max_items + 1 - j] + j * v
            view = cur[shift_b:, j:]
            np.maximum(view, cand, out=view)
        tables[i] = cur
    return tables
