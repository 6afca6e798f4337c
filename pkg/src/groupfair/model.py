"""Instances, allocations and exact fairness verifiers.

Every verifier computes the *smallest* ``c`` for which an allocation is
envy-free, proportional, or a consensus 1/k-division up to ``c`` goods.
Utilities may be floats or :class:`fractions.Fraction` (object arrays); the
latter are compared exactly, the former with a relative tolerance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np

#: Relative tolerance for float utilities (scaled by the agent's total utility).
FLOAT_RTOL = 1e-9


class Notion(str, Enum):
    EF = "ef"
    PROP = "prop"
    CD = "cd"


def is_exact(a: np.ndarray) -> bool:
    return a.dtype == object


def as_utility_array(rows) -> np.ndarray:
    """Coerce nested rows to a float array, or an object array when any entry
    is a Fraction (exact arithmetic is then preserved)."""
    if isinstance(rows, np.ndarray) and rows.dtype != object:
        return np.asarray(rows, dtype=float)
    rows = [list(r) for r in rows]
    if any(isinstance(v, Fraction) for r in rows for v in r):
        out = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
        for i, r in enumerate(rows):
            for j, v in enumerate(r):
                out[i, j] = Fraction(v)
        return out
    return np.asarray(rows, dtype=float).reshape(len(rows), -1 if rows and rows[0] else 0)


@dataclass(frozen=True, eq=False)
class Instance:
    """``k`` groups of agents with additive utilities over ``m`` goods.

    Rows of ``utilities`` are agents in group-major order: agent ``(i, j)``
    is the ``j``-th agent of group ``i`` (both 0-based).
    """

    group_sizes: tuple[int, ...]
    utilities: np.ndarray
    _offsets: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.group_sizes)
        util = self.utilities
        if not isinstance(util, np.ndarray):
            util = as_utility_array(util)
        if util.ndim != 2:
            if util.size == 0:
                util = util.reshape(sum(sizes), 0)
            else:
                raise ValueError("utilities must be a 2-D matrix")
        object.__setattr__(self, "group_sizes", sizes)
        object.__setattr__(self, "utilities", util)
        if len(sizes) < 2:
            raise ValueError(f"need at least 2 groups, got {len(sizes)}")
        if any(s < 1 for s in sizes):
            raise ValueError(f"every group needs at least one agent: {sizes}")
        if util.shape[0] != sum(sizes):
            raise ValueError(
                f"utility matrix has {util.shape[0]} rows, group sizes sum to {sum(sizes)}"
            )
        if util.size:
            if is_exact(util):
                if any(v < 0 for v in util.flat):
                    raise ValueError("utilities must be nonnegative")
            elif not np.all(np.isfinite(util)) or np.any(util < 0):
                raise ValueError("utilities must be nonnegative and finite")
        object.__setattr__(self, "_offsets", tuple(np.concatenate([[0], np.cumsum(sizes)]).tolist()))

    @property
    def k(self) -> int:
        return len(self.group_sizes)

    @property
    def n(self) -> int:
        return int(self.utilities.shape[0])

    @property
    def m(self) -> int:
        return int(self.utilities.shape[1])

    @property
    def exact(self) -> bool:
        return is_exact(self.utilities)

    def group_of(self, agent: int) -> int:
        return int(np.searchsorted(self._offsets, agent, side="right") - 1)

    def agent_id(self, agent: int) -> tuple[int, int]:
        """Global row index -> (group, index within group)."""
        g = self.group_of(agent)
        return g, agent - self._offsets[g]

    def row_of(self, group: int, j: int) -> int:
        return self._offsets[group] + j

    def agents(self) -> Iterator[tuple[int, int]]:
        """Yield (row index, group) in group-major order."""
        for g, size in enumerate(self.group_sizes):
            for j in range(size):
                yield self._offsets[g] + j, g

    def without_agent(self, group: int, j: int) -> "Instance":
        if self.group_sizes[group] < 2:
            raise ValueError("cannot empty a group")
        row = self.row_of(group, j)
        sizes = list(self.group_sizes)
        sizes[group] -= 1
        return Instance(tuple(sizes), np.delete(self.utilities, row, axis=0))

    def with_row_scaled(self, row: int, factor) -> "Instance":
        util = self.utilities.copy()
        util[row] = util[row] * factor
        return Instance(self.group_sizes, util)

    def as_float(self) -> "Instance":
        if not self.exact:
            return self
        return Instance(self.group_sizes, self.utilities.astype(float))


@dataclass(frozen=True, eq=False)
class Allocation:
    """Assignment of each good to a bundle index in ``0..k-1``."""

    assignment: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64).reshape(-1)
        object.__setattr__(self, "assignment", a)

    @property
    def m(self) -> int:
        return len(self.assignment)

    def bundles(self, k: int) -> list[np.ndarray]:
        return [np.flatnonzero(self.assignment == i) for i in range(k)]

    def validate(self, instance: Instance) -> None:
        if self.m != instance.m:
            raise ValueError(f"allocation covers {self.m} goods, instance has {instance.m}")
        if self.m and (self.assignment.min() < 0 or self.assignment.max() >= instance.k):
            raise ValueError(f"bundle indices must lie in 0..{instance.k - 1}")

    def __eq__(self, other):
        return isinstance(other, Allocation) and np.array_equal(self.assignment, other.assignment)


@dataclass(frozen=True)
class FairnessReport:
    """Minimal ``c`` for one notion plus the agent and bundle pair attaining it.

    For PROP the pair is ``(i, i)``: the only bundle involved is the agent's own.
    """

    notion: Notion
    c: int
    agent: tuple[int, int]
    pair: tuple[int, int]


def min_removals(values: Sequence, slack, tol=0) -> int:
    """Smallest number of elements of ``values`` whose removal lowers their sum
    by at least ``slack`` (greedy: remove the largest first)."""
    if slack <= tol:
        return 0
    ordered = sorted(values, reverse=True)
    removed = 0
    for c, v in enumerate(ordered, start=1):
        removed += v
        if removed >= slack - tol:
            return c
    raise ValueError(f"slack {slack} exceeds the total {removed} of the values")


class _Row:
    """Per-agent view of an allocation: bundle prefix sums of sorted values."""

    __slots__ = ("prefix", "totals", "tol")

    def __init__(self, u: np.ndarray, bundles: list[np.ndarray], exact: bool):
        self.prefix = []
        for b in bundles:
            vals = np.sort(u[b])[::-1]
            pre = np.empty(len(vals) + 1, dtype=u.dtype)
            pre[0] = 0
            if len(vals):
                pre[1:] = np.cumsum(vals)
            self.prefix.append(pre)
        self.totals = [p[-1] for p in self.prefix]
        total = sum(self.totals)
        self.tol = 0 if exact else FLOAT_RTOL * float(total)

    def removals(self, src: int, slack) -> int:
        # smallest c with prefix[src][c] >= slack - tol
        if slack <= self.tol:
            return 0
        return int(np.searchsorted(self.prefix[src], slack - self.tol, side="left"))


def _outside_prefix(u: np.ndarray, mask: np.ndarray) -> np.ndarray:
    vals = np.sort(u[~mask])[::-1]
    pre = np.empty(len(vals) + 1, dtype=u.dtype)
    pre[0] = 0
    if len(vals):
        pre[1:] = np.cumsum(vals)
    return pre


def _evaluate(instance: Instance, alloc: Allocation, notion: Notion,
              stop_at: Optional[int] = None) -> tuple[int, int, tuple[int, int]]:
    """Return (c, witness row, witness pair); stops early once c >= stop_at."""
    k = instance.k
    exact = instance.exact
    bundles = alloc.bundles(k)
    best = (-1, 0, (0, 1) if notion != Notion.PROP else (0, 0))
    util = instance.utilities
    for row, g in instance.agents():
        u = util[row]
        if notion == Notion.PROP:
            mask = alloc.assignment == g
            pre = _outside_prefix(u, mask)
            own = u[mask].sum() if mask.any() else 0
            total = own + pre[-1]
            tol = 0 if exact else FLOAT_RTOL * float(total)
            slack = (Fraction(total) / k if exact else total / k) - own
            c = 0 if slack <= tol else int(np.searchsorted(pre, slack - tol, side="left"))
            if c > best[0]:
                best = (c, row, (g, g))
        else:
            view = _Row(u, bundles, exact)
            owners = [g] if notion == Notion.EF else range(k)
            for i in owners:
                for i2 in range(k):
                    if i2 == i:
                        continue
                    c = view.removals(i2, view.totals[i2] - view.totals[i])
                    if c > best[0]:
                        best = (c, row, (i, i2))
        if stop_at is not None and best[0] >= stop_at:
            break
    return max(best[0], 0), best[1], best[2]


def _report(instance: Instance, alloc: Allocation, notion: Notion) -> FairnessReport:
    alloc.validate(instance)
    c, row, pair = _evaluate(instance, alloc, notion)
    return FairnessReport(notion, c, instance.agent_id(row), pair)


def efc_of(instance: Instance, alloc: Allocation) -> FairnessReport:
    """Smallest c such that ``alloc`` is envy-free up to c goods."""
    return _report(instance, alloc, Notion.EF)


def propc_of(instance: Instance, alloc: Allocation) -> FairnessReport:
    """Smallest c such that ``alloc`` is proportional up to c goods."""
    return _report(instance, alloc, Notion.PROP)


def cdc_of(instance: Instance, alloc: Allocation) -> FairnessReport:
    """Smallest c such that ``alloc`` is a consensus 1/k-division up to c goods."""
    return _report(instance, alloc, Notion.CD)


VERIFIERS = {Notion.EF: efc_of, Notion.PROP: propc_of, Notion.CD: cdc_of}


def certify(instance: Instance, alloc: Allocation) -> dict[Notion, FairnessReport]:
    return {notion: fn(instance, alloc) for notion, fn in VERIFIERS.items()}


@dataclass(frozen=True)
class OptimumResult:
    notion: Notion
    c: int
    allocation: Allocation
    evaluated: int


DEFAULT_ALLOC_CAP = 2**20


def exhaustive_optimum(instance: Instance, notion: Notion,
                       cap: int = DEFAULT_ALLOC_CAP) -> OptimumResult:
    """Minimum c over all k^m allocations, by enumeration.

    Ties go to the lowest base-k encoding with good 0 as the least
    significant digit.
    """
    notion = Notion(notion)
    k, m = instance.k, instance.m
    total = k**m
    if total > cap:
        raise OverflowError(f"{k}^{m} = {total} allocations exceeds cap {cap}")
    best_c, best_assign = None, None
    count = 0
    # itertools.product varies the last position fastest; reverse so that
    # iteration order equals the base-k encoding order.
    for digits in itertools.product(range(k), repeat=m):
        assign = np.array(digits[::-1], dtype=np.int64)
        count += 1
        c, _, _ = _evaluate(instance, Allocation(assign), notion, stop_at=best_c)
        if best_c is None or c < best_c:
            best_c, best_assign = c, assign
            if c == 0:
                break
    if best_assign is None:
        best_c, best_assign = 0, np.zeros(0, dtype=np.int64)
    return OptimumResult(notion, int(best_c), Allocation(best_assign), count)
