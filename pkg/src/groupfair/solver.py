"""Consensus 1/k-division up to O(sqrt(n)) goods through multi-color discrepancy.

Each agent contributes two rows to a ``2n x m`` reduction matrix: the
indicator of its ``L`` most valued goods, and its remaining utilities scaled
by the smallest of those ``L`` values. A k-coloring with small discrepancy on
that matrix is an allocation in which every agent can eliminate any
between-bundle gap by removing few goods. The returned allocation is always
certified by the exact verifiers in :mod:`groupfair.model`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .discrepancy import solve_multicolor
from .model import Allocation, FairnessReport, Instance, Notion, certify, is_exact

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ReductionMatrix:
    base: np.ndarray          # (2n, m): indicator rows, then scaled small-good rows
    large: np.ndarray         # (n, m) bool mask of each agent's L most valued goods
    p: np.ndarray             # (n,) smallest utility inside each agent's large set
    L: int
    T: int

    @property
    def n(self) -> int:
        return self.large.shape[0]


def build_reduction(utilities, k: int, T: int) -> ReductionMatrix:
    """Reduction matrix for discrepancy budget ``T`` with ``L = min(m, 3Tk)``.

    ``utilities`` is an :class:`Instance` or an ``n x m`` matrix; groups play
    no role. Ties among equally valued goods go to the lower good index, and
    an agent whose ``L``-th best good is worth 0 gets an all-zero scaled row.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    U = utilities.utilities if isinstance(utilities, Instance) else np.asarray(utilities)
    if U.ndim != 2:
        raise ValueError("utilities must be a 2-D matrix")
    n, m = U.shape
    exact = is_exact(U)
    L = min(m, 3 * T * k)
    large = np.zeros((n, m), dtype=bool)
    z = np.zeros((n, m))
    p = np.zeros(n, dtype=object if exact else float)
    for j in range(n):
        u = U[j]
        if exact:
            order = sorted(range(m), key=lambda g: (-u[g], g))[:L]
        else:
            order = np.argsort(-u, kind="stable")[:L]
        large[j, order] = True
        p[j] = u[order].min() if L else 0
        if p[j] > 0:
            small = ~large[j]
            if exact:
                z[j, small] = [float(Fraction(v) / p[j]) for v in u[small]]
            else:
                z[j, small] = np.minimum(u[small] / p[j], 1.0)
    base = np.vstack([large.astype(float), z])
    return ReductionMatrix(base=base, large=large, p=p, L=L, T=int(T))


@dataclass(frozen=True)
class SolveParams:
    """``initial_T=None`` means ``ceil(sqrt(2n))``; ``reseeds`` extra seeds are
    tried at each budget before doubling it."""

    initial_T: Optional[int] = None
    max_doublings: int = 10
    seed: int = 0
    reseeds: int = 0

    def __post_init__(self):
        if self.initial_T is not None and self.initial_T < 1:
            raise ValueError("initial T must be at least 1")
        if self.max_doublings < 0 or self.reseeds < 0:
            raise ValueError("max_doublings and reseeds must be nonnegative")


@dataclass(frozen=True, eq=False)
class SolveOutcome:
    allocation: Allocation
    certified: dict[Notion, FairnessReport]
    T_used: int
    discrepancy_achieved: float
    seed: int
    notion: Notion = Notion.CD
    attempts: int = 1

    @property
    def report(self) -> FairnessReport:
        return self.certified[self.notion]

    def certificate(self) -> dict:
        return {
            "notion": self.notion.value,
            "cd": self.certified[Notion.CD].c,
            "ef": self.certified[Notion.EF].c,
            "prop": self.certified[Notion.PROP].c,
            "T_used": self.T_used,
            "disc": self.discrepancy_achieved,
            "seed": self.seed,
        }


def default_initial_T(n: int) -> int:
    return max(1, math.ceil(math.sqrt(2 * n)))


def _attempt_seed(seed: int, attempt: int):
    return seed if attempt == 0 else (seed, attempt)


def solve_consensus(instance: Instance, k: Optional[int] = None,
                    params: SolveParams = SolveParams()) -> SolveOutcome:
    """Allocation that is a consensus 1/k-division up to few goods.

    Starts from budget ``T`` and doubles it whenever the certified value
    exceeds ``4T`` (acceptance is forced once ``T >= m``). If the doubling
    budget runs out, the best allocation seen is returned.
    """
    if k is None:
        k = instance.k
    if k != instance.k:
        raise ValueError(f"k={k} does not match the instance's {instance.k} groups")
    m = instance.m
    if m == 0:
        alloc = Allocation(np.zeros(0, dtype=np.int64))
        return SolveOutcome(alloc, certify(instance, alloc), 0, 0.0, params.seed)

    T = params.initial_T or default_initial_T(instance.n)
    best = None
    attempt = 0
    for doubling in range(params.max_doublings + 1):
        red = build_reduction(instance, k, T)
        for _ in range(params.reseeds + 1):
            chi, disc = solve_multicolor(red.base, k, _attempt_seed(params.seed, attempt))
            attempt += 1
            alloc = Allocation(chi)
            certified = certify(instance, alloc)
            c = certified[Notion.CD].c
            logger.debug("T=%d attempt=%d disc=%.4g cd=%d", T, attempt, disc, c)
            if best is None or c < best.certified[Notion.CD].c:
                best = SolveOutcome(alloc, certified, T, disc, params.seed, attempts=attempt)
            if c <= 4 * T or T >= m:
                return SolveOutcome(alloc, certified, T, disc, params.seed, attempts=attempt)
        T *= 2
    logger.info("doubling budget exhausted; returning best allocation (cd=%d)",
                best.certified[Notion.CD].c)
    return SolveOutcome(best.allocation, best.certified, best.T_used,
                        best.discrepancy_achieved, params.seed, attempts=attempt)


def solve_for_notion(instance: Instance, notion, params: SolveParams = SolveParams()) -> SolveOutcome:
    """Same allocation as :func:`solve_consensus`; ``report`` surfaces ``notion``.

    A consensus 1/k-division up to c goods is also EFc and PROPc, so one
    allocation serves all three notions.
    """
    out = solve_consensus(instance, instance.k, params)
    return SolveOutcome(out.allocation, out.certified, out.T_used, out.discrepancy_achieved,
                        out.seed, Notion(notion), out.attempts)
