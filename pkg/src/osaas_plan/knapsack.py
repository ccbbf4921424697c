"""Two-constraint bounded knapsack: spectrum bins x transceivers.

The table kernel is compiled (``_dp_core``) when the extension was built and
falls back to NumPy otherwise. Set ``OSAAS_PLAN_PURE_PYTHON=1`` to force the
fallback.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _dp_fallback

if os.environ.get("OSAAS_PLAN_PURE_PYTHON"):
    _core = None
else:
    try:
        from . import _dp_core as _core
    except ImportError:
        _core = None

KERNEL = "cython" if _core is not None else "python"
_KERNELS = {"python": _dp_fallback.suffix_tables}
if _core is not None:
    _KERNELS["cython"] = _core.suffix_tables


def available_kernels():
    return tuple(_KERNELS)


@dataclass(frozen=True)
class KnapsackItem:
    id: str
    value: float
    cost: int
    copies: Optional[int] = None


@dataclass(frozen=True)
class KnapsackInstance:
    items: tuple
    capacity_bins: int
    max_items: int
    copies_per_item: Optional[int] = None

    def __post_init__(self):
        if self.capacity_bins < 0 or self.max_items < 0:
            raise ValueError("capacity and item budget must be >= 0")
        ids = [it.id for it in self.items]
        if len(set(ids)) != len(ids):
            raise ValueError("item ids must be unique")
        for it in self.items:
            if it.cost < 1:
                raise ValueError(f"{it.id}: cost must be >= 1 bin")
            if not it.value > 0:
                raise ValueError(f"{it.id}: value must be > 0")

    @classmethod
    def from_band(cls, items, width_ghz, granularity_ghz, max_items, copies_per_item=None):
        bins = math.ceil(width_ghz / granularity_ghz - 1e-9)
        return cls(tuple(items), bins, max_items, copies_per_item)

    def copies_of(self, item: KnapsackItem) -> int:
        if item.copies is not None:
            return item.copies
        if self.copies_per_item is not None:
            return self.copies_per_item
        return self.max_items


@dataclass(frozen=True)
class Selection:
    counts: tuple  # ((id, copies), ...) in id order, zero counts omitted
    value: float
    bins: int
    trx: int

    def as_dict(self) -> dict:
        return dict(self.counts)


EMPTY = Selection((), 0.0, 0, 0)


class DpTable:
    """Solved tables for one instance.

    ``exact[b, t]`` is the best value with exactly ``b`` bins and ``t``
    items; ``value[b, t]`` relaxes the bins to ``<= b`` (the usual DP[b][t]).
    """

    def __init__(self, instance: KnapsackInstance, kernel: Optional[str] = None):
        self.instance = instance
        self.items = sorted(instance.items, key=lambda it: it.id)
        costs = np.array([it.cost for it in self.items], dtype=np.int64)
        values = np.array([float(it.value) for it in self.items])
        copies = np.array([instance.copies_of(it) for it in self.items], dtype=np.int64)
        fn = _KERNELS[kernel or KERNEL]
        self.layers = fn(costs, values, copies, instance.capacity_bins, instance.max_items)
        self.exact = self.layers[0]
        self.value = np.maximum.accumulate(self.exact, axis=0)

    def reconstruct(self, bins: int, trx: int) -> Selection:
        """Selection reaching ``exact[bins, trx]``; earlier ids take as many
        copies as possible, which makes the sorted id list lexicographically
        smallest among equal-value selections."""
        total = self.exact[bins, trx]
        if total == -np.inf:
            raise ValueError(f"no selection uses exactly {bins} bins and {trx} items")
        counts = []
        b, t = bins, trx
        for i, item in enumerate(self.items):
            target = self.layers[i, b, t]
            nxt = self.layers[i + 1]
            jmax = min(self.instance.copies_of(item), t, b // item.cost)
            for j in range(jmax, -1, -1):
                prev = nxt[b - j * item.cost, t - j]
                if prev != -np.inf and prev + j * float(item.value) == target:
                    break
            else:  # pragma: no cover - tables are self-consistent
                raise RuntimeError("inconsistent DP tables")
            if j:
                counts.append((item.id, j))
            b -= j * item.cost
            t -= j
        return Selection(tuple(counts), float(total), bins, trx)

    def _best_cell(self, trx_values: Sequence[int]):
        best = None
        for t in trx_values:
            for b in range(self.instance.capacity_bins + 1):
                v = self.exact[b, t]
                if v == -np.inf:
                    continue
                key = (-v, b, t)
                if best is None or key < best:
                    best = key
        return best

    def best(self, trx_values: Optional[Sequence[int]] = None) -> Selection:
        """Optimum over the given item counts (default: any count up to N_TRx).

        Ties go to fewer bins, then fewer items, then the id order.
        """
        if trx_values is None:
            trx_values = range(self.instance.max_items + 1)
        cell = self._best_cell(trx_values)
        if cell is None:
            return EMPTY
        _, b, t = cell
        if t == 0:
            return EMPTY
        return self.reconstruct(b, t)


def solve_knapsack(instance: KnapsackInstance, kernel: Optional[str] = None):
    """Exact optimum of sum(v x) s.t. sum(k x) <= B, sum(x) <= N_TRx."""
    table = DpTable(instance, kernel)
    return table, table.best()


@dataclass(frozen=True)
class TrxPoint:
    trx: int
    exact_gbps: Optional[float]
    envelope_gbps: float
    selection: Optional[Selection]
    envelope_selection: Selection


def throughput_vs_trx(table: DpTable) -> list:
    """Best throughput with exactly t transceivers, and its running envelope."""
    points = []
    envelope = EMPTY
    for t in range(1, table.instance.max_items + 1):
        exact = table.best([t])
        if exact is EMPTY:
            exact = None
        if exact is not None and exact.value > envelope.value:
            envelope = exact
        points.append(TrxPoint(t, exact.value if exact else None, envelope.value, exact, envelope))
    return points
