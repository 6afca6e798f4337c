"""Instance families: Hadamard lower-bound matrices, lower-bound fair-division
instances, the set-splitting gadget with Hadamard amplification, and random
regression instances."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .model import Instance, as_utility_array, is_exact


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def sylvester_hadamard(order: int) -> np.ndarray:
    """Sylvester Hadamard matrix; first row and column are all +1."""
    if not _is_power_of_two(int(order)):
        raise ValueError(f"Sylvester construction needs a power of two, got {order}")
    H = np.ones((1, 1), dtype=np.int64)
    while H.shape[0] < order:
        H = np.block([[H, H], [H, -H]])
    return H


def w_matrix(H) -> np.ndarray:
    """0/1 shift ``(J + H) / 2`` of a Hadamard matrix."""
    H = np.asarray(H)
    return ((1 + H) // 2).astype(float)


def gen_wdisc_lower(n: int) -> np.ndarray:
    """W of order ``n``: hard instance for weighted discrepancy."""
    return w_matrix(sylvester_hadamard(n))


def wdisc_target(n: int, p: float) -> Optional[float]:
    """``sqrt(p n / 8)`` when ``n >= 16 / p`` (where the lower-bound argument
    applies), else None. Reported as a diagnostic only."""
    if p <= 0 or n < 16 / p:
        return None
    return math.sqrt(p * n / 8)


def _unit_matrix(A) -> np.ndarray:
    A = np.asarray(A) if isinstance(A, np.ndarray) else as_utility_array(A)
    if A.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    if A.size and (min(A.flat) < 0 or max(A.flat) > 1):
        raise ValueError("matrix entries must lie in [0, 1]")
    return A


def gen_cd_lower_instance(A, k: int) -> Instance:
    """k groups, each holding one agent per row of ``A`` (identical across groups)."""
    A = _unit_matrix(A)
    if k < 2:
        raise ValueError("need k >= 2")
    n = A.shape[0]
    if n == 0:
        raise ValueError("matrix must have at least one row")
    return Instance((n,) * k, np.concatenate([A] * k, axis=0))


def gen_hardness_fairdiv(A, k: int) -> Instance:
    """One agent per row of ``A`` in every group; ``u^{(i,j)}(l) = A[j, l]``."""
    return gen_cd_lower_instance(A, k)


def gen_prop_lower_instance(A, k: int) -> Instance:
    """Group sizes ``(2n', 1, ..., 1)``: rows of ``A``, their conjugates
    ``1 - A``, then one agent per remaining group valuing every good at 1."""
    A = _unit_matrix(A)
    if k < 2:
        raise ValueError("need k >= 2")
    n, m = A.shape
    if n == 0:
        raise ValueError("matrix must have at least one row")
    one = Fraction(1) if is_exact(A) else 1.0
    conj = one - A
    uniform = np.full((k - 1, m), one, dtype=A.dtype)
    return Instance((2 * n,) + (1,) * (k - 1), np.concatenate([A, conj, uniform], axis=0))


# ---------------------------------------------------------------- set splitting

@dataclass(frozen=True)
class SetSystem:
    """4-element subsets of ``range(M)``."""

    M: int
    subsets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        subs = tuple(tuple(int(e) for e in s) for s in self.subsets)
        object.__setattr__(self, "subsets", subs)
        for i, s in enumerate(subs):
            if len(s) != 4 or len(set(s)) != 4:
                raise ValueError(f"subset {i} must have exactly 4 distinct elements: {s}")
            if min(s) < 0 or max(s) >= self.M:
                raise ValueError(f"subset {i} has elements outside range({self.M}): {s}")

    @property
    def N(self) -> int:
        return len(self.subsets)

    @property
    def d(self) -> int:
        """Maximum number of subsets any element appears in."""
        counts = np.zeros(self.M, dtype=np.int64)
        for s in self.subsets:
            counts[list(s)] += 1
        return int(counts.max()) if self.M else 0

    def unsplit(self, T) -> list[int]:
        T = set(int(t) for t in T)
        return [i for i, s in enumerate(self.subsets) if len(T.intersection(s)) != 2]


def planted_setsplit(M: int, N: int, seed: int = 0) -> tuple[SetSystem, np.ndarray]:
    """Random YES instance: draw ``T`` with ``|T| = M // 2``, then every subset
    takes two elements from ``T`` and two from its complement."""
    if M < 4 or M // 2 < 2 or M - M // 2 < 2:
        raise ValueError("need M >= 4")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(M)
    T = np.sort(perm[: M // 2])
    rest = np.sort(perm[M // 2:])
    subsets = []
    for _ in range(N):
        a = rng.choice(T, size=2, replace=False)
        b = rng.choice(rest, size=2, replace=False)
        subsets.append(tuple(sorted(int(v) for v in np.concatenate([a, b]))))
    return SetSystem(M, tuple(subsets)), T


@dataclass(frozen=True, eq=False)
class GadgetBundle:
    set_system: SetSystem
    k: int
    dprime: int
    edges: np.ndarray      # (|E|, 2): (left vertex u_i, right vertex v_i)
    C: np.ndarray          # (|E|, M) entries in {0, 1/2}
    D: np.ndarray          # (|E|, N) entries in {0, 1}
    B: np.ndarray          # [C D ... D] with k - 2 copies of D
    column_bound: Fraction  # max(d' d / 2, d')
    gamma: float

    @property
    def M(self) -> int:
        return self.set_system.M

    @property
    def N(self) -> int:
        return self.set_system.N


def random_regular_bipartite(N: int, dprime: int, rng: np.random.Generator) -> np.ndarray:
    """Union of ``dprime`` uniform permutations: a d'-regular bipartite multigraph
    on ``range(N) + range(N)``. Edge ``t * N + u`` joins ``u`` to ``perm_t[u]``."""
    edges = []
    for _ in range(dprime):
        perm = rng.permutation(N)
        edges.append(np.stack([np.arange(N), perm], axis=1))
    return np.concatenate(edges, axis=0) if edges else np.zeros((0, 2), dtype=np.int64)


def gen_setsplit_gadget(S: SetSystem, k: int, dprime: int, seed: int = 0,
                        delta: float = 1.0) -> GadgetBundle:
    """Gadget matrix ``B = [C D ... D]`` over a random d'-regular multigraph."""
    if k < 2:
        raise ValueError("need k >= 2")
    if dprime < 1:
        raise ValueError("need d' >= 1")
    if S.N == 0:
        raise ValueError("set system has no subsets")
    rng = np.random.default_rng(seed)
    edges = random_regular_bipartite(S.N, dprime, rng)
    E = len(edges)
    C = np.zeros((E, S.M))
    D = np.zeros((E, S.N))
    for i, (u, v) in enumerate(edges):
        C[i, list(S.subsets[u])] = 0.5
        D[i, v] = 1.0
    B = np.concatenate([C] + [D] * (k - 2), axis=1)
    d = S.d
    bound = max(Fraction(dprime * d, 2), Fraction(dprime))
    gamma = delta / (8 * d * k)
    return GadgetBundle(S, k, dprime, edges, C, D, B, bound, gamma)


def split_coloring_from_solution(T, bundle: GadgetBundle) -> np.ndarray:
    """k-coloring (0-based) of the gadget columns from a splitting set ``T``:
    ``T`` gets color 0, the rest of the ground set color 1, and the ``l``-th
    copy of ``D`` color ``l + 2``."""
    S = bundle.set_system
    bad = S.unsplit(T)
    if bad:
        raise ValueError(f"T does not split subset {bad[0]}: {S.subsets[bad[0]]}")
    chi = np.ones(S.M + (bundle.k - 2) * S.N, dtype=np.int64)
    chi[np.asarray(list(T), dtype=np.int64)] = 0
    for block in range(bundle.k - 2):
        start = S.M + block * S.N
        chi[start:start + S.N] = block + 2
    return chi


def _next_power_of_two(n: int) -> int:
    return 1 if n <= 1 else 1 << (n - 1).bit_length()


def hadamard_amplify(bundle, exact: bool = False, column_bound=None) -> np.ndarray:
    """``A = W B / D`` with ``B`` padded by zero rows (at the bottom) to a power
    of two and ``D`` the column-norm bound, so that ``A`` lies in [0,1].

    ``bundle`` is a :class:`GadgetBundle` or a bare matrix (then ``D``
    defaults to its largest column sum). With ``exact=True`` the result is an
    object array of Fractions.
    """
    if isinstance(bundle, GadgetBundle):
        B = bundle.B
        D = Fraction(bundle.column_bound) if column_bound is None else Fraction(column_bound)
    else:
        B = np.asarray(bundle, dtype=float)
        D = Fraction(column_bound) if column_bound is not None else Fraction(
            float(B.sum(axis=0).max()) if B.size else 0.0)
    rows, cols = B.shape
    order = _next_power_of_two(rows)
    padded = np.zeros((order, cols))
    padded[:rows] = B
    W = gen_wdisc_lower(order)
    if D == 0:
        return np.zeros((order, cols), dtype=object if exact else float)
    if not exact:
        return (W @ padded) / float(D)
    # entries of 2B are integers, so W @ 2B is exact in int64
    twice = np.rint(2 * padded).astype(np.int64)
    if not np.array_equal(twice, 2 * padded):
        raise ValueError("exact amplification needs entries that are multiples of 1/2")
    prod = W.astype(np.int64) @ twice
    denom = 2 * D
    cache: dict[int, Fraction] = {}
    out = np.empty(prod.shape, dtype=object)
    for idx, v in np.ndenumerate(prod):
        iv = int(v)
        if iv not in cache:
            cache[iv] = Fraction(iv) / denom
        out[idx] = cache[iv]
    return out


def expansion_sample(bundle: GadgetBundle, samples: int = 200, seed: int = 0,
                     gamma: Optional[float] = None) -> float:
    """Smallest observed ``e(U, V) / (d' N)`` over random ``U, V`` of size
    ``ceil(gamma N)``: a statistical stand-in for the expansion guarantee."""
    g = bundle.gamma if gamma is None else gamma
    N = bundle.N
    size = max(1, math.ceil(g * N))
    rng = np.random.default_rng(seed)
    u, v = bundle.edges[:, 0], bundle.edges[:, 1]
    worst = math.inf
    for _ in range(samples):
        U = np.zeros(N, dtype=bool)
        V = np.zeros(N, dtype=bool)
        U[rng.choice(N, size, replace=False)] = True
        V[rng.choice(N, size, replace=False)] = True
        worst = min(worst, float(np.sum(U[u] & V[v])) / (bundle.dprime * N))
    return worst


def planted_hardness_instance(M: int, N: int, k: int, dprime: int, seed: int = 0,
                              exact: bool = True):
    """End-to-end YES pipeline: planted set system, gadget, amplification and
    fair-division instance, plus the planted coloring."""
    S, T = planted_setsplit(M, N, seed)
    bundle = gen_setsplit_gadget(S, k, dprime, seed)
    chi = split_coloring_from_solution(T, bundle)
    A = hadamard_amplify(bundle, exact=exact)
    return gen_hardness_fairdiv(A, k), chi, bundle, A


# ---------------------------------------------------------------- random

def random_instance(group_sizes: Sequence[int], m: int, seed: int = 0,
                    distribution: str = "uniform", q: float = 0.5) -> Instance:
    """i.i.d. utilities: uniform on [0,1] or Bernoulli(q) on {0,1}."""
    rng = np.random.default_rng(seed)
    n = int(sum(group_sizes))
    if distribution == "uniform":
        U = rng.random((n, m))
    elif distribution == "bernoulli":
        U = (rng.random((n, m)) < q).astype(float)
    else:
        raise ValueError(f"unknown distribution {distribution!r}")
    return Instance(tuple(group_sizes), U)


def random_rational_instance(group_sizes: Sequence[int], m: int, seed: int = 0,
                             denominator: int = 12) -> Instance:
    """Exact instance with utilities ``a / denominator``, ``a`` uniform in 0..denominator."""
    rng = np.random.default_rng(seed)
    n = int(sum(group_sizes))
    nums = rng.integers(0, denominator + 1, size=(n, m))
    U = np.empty((n, m), dtype=object)
    for idx, a in np.ndenumerate(nums):
        U[idx] = Fraction(int(a), denominator)
    return Instance(tuple(group_sizes), U)
