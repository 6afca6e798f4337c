"""Constructive discrepancy minimization for [0,1] matrices.

Measurement (``eval_bicolor``, ``eval_multicolor``), exact brute-force oracles
(``brute_min_bicolor``, ``brute_min_multicolor``) and the randomized solvers:
column reduction, a random-walk partial-coloring engine for linear
discrepancy, and recursive halving for k colors.

Colorings are 0-based internally: a 2-coloring is a 0/1 vector, a k-coloring
maps each column to ``0..k-1``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional

import numpy as np

#: Empirical constant in the ``value <= C_SOLVER * sqrt(n)`` contract.
C_SOLVER = 16
#: Random-walk steps per partial-coloring round: ``ceil(C_STEP * m * log m)``.
C_STEP = 8
#: Constraint thresholds are ``LAMBDA_SCALE * ||row||_2 * sqrt(log(4 n / m))``.
LAMBDA_SCALE = 1.0
PIVOT_TOL = 1e-12
SNAP_TOL = 1e-9
DEFAULT_BICOLOR_CAP = 24
DEFAULT_MULTICOLOR_CAP = 2**24


def _matrix(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {A.shape}")
    return A


def _check_unit(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.size and (not np.all(np.isfinite(A)) or A.min() < 0 or A.max() > 1):
        raise ValueError("solver inputs must have all entries in [0, 1]")
    return A


# ---------------------------------------------------------------- measurement

def eval_bicolor(A, x, p=0.5) -> float:
    """``||A (p*1 - x)||_inf``."""
    A = _matrix(A)
    x = np.asarray(x).reshape(-1)
    if x.shape[0] != A.shape[1]:
        raise ValueError(f"coloring has length {x.shape[0]}, matrix has {A.shape[1]} columns")
    if A.size == 0:
        return 0.0
    if A.dtype == object:
        dev = A.sum(axis=1) * p - A[:, x.astype(bool)].sum(axis=1)
        return max(abs(v) for v in dev)
    return float(np.max(np.abs(A @ (p - x.astype(float)))))


def color_deviations(A, k: int, chi) -> np.ndarray:
    """Stack of ``A (1/k * 1 - 1(chi^{-1}(s)))`` for s = 0..k-1, shape (k, n).

    Computed as ``(rowsum - k * partial) / k`` so that integer and dyadic
    matrices evaluate without rounding.
    """
    A = _matrix(A)
    chi = np.asarray(chi, dtype=np.int64).reshape(-1)
    if chi.shape[0] != A.shape[1]:
        raise ValueError(f"coloring has length {chi.shape[0]}, matrix has {A.shape[1]} columns")
    if k < 1:
        raise ValueError("k must be at least 1")
    if chi.size and (chi.min() < 0 or chi.max() >= k):
        raise ValueError(f"coloring uses colors outside 0..{k - 1}")
    n = A.shape[0]
    exact = A.dtype == object
    rowsum = A.sum(axis=1) if A.shape[1] else np.zeros(n, dtype=A.dtype)
    out = np.empty((k, n), dtype=object if exact else float)
    for s in range(k):
        cols = chi == s
        part = A[:, cols].sum(axis=1) if cols.any() else np.zeros(n, dtype=A.dtype)
        if exact:
            out[s] = [Fraction(r - k * q) / k for r, q in zip(rowsum, part)]
        else:
            out[s] = (rowsum - k * part) / k
    return out


def eval_multicolor(A, k: int, chi):
    """``max_s ||A (1/k * 1 - 1(chi^{-1}(s)))||_inf``.

    Returns a Fraction for object (exact) matrices and a float otherwise.
    """
    dev = color_deviations(A, k, chi)
    if dev.size == 0:
        return 0.0
    if dev.dtype == object:
        return max(abs(v) for v in dev.flat)
    return float(np.max(np.abs(dev)))


# ---------------------------------------------------------------- oracles

def brute_min_bicolor(A, p=0.5, cap: int = DEFAULT_BICOLOR_CAP) -> tuple[np.ndarray, float]:
    """Exact ``min_x ||A (p*1 - x)||_inf`` over all 2^m colorings.

    The low columns are tabulated once; the high columns are walked in
    Gray-code order so each step costs one column update. Ties go to the
    lowest encoding ``sum_j x_j 2^j``.
    """
    A = np.asarray(_matrix(A), dtype=float)
    n, m = A.shape
    if m > cap:
        raise OverflowError(f"2^{m} colorings exceeds cap 2^{cap}")
    if m == 0 or n == 0:
        return np.zeros(m, dtype=np.int64), 0.0
    low = min(m, 12)
    high = m - low
    base = A.sum(axis=1) * p
    # table[:, code] = A[:, :low] @ bits(code), doubled one column at a time
    table = np.empty((n, 1 << low))
    table[:, 0] = 0.0
    for t in range(low):
        span = 1 << t
        table[:, span:2 * span] = table[:, :span] + A[:, t:t + 1]
    best_val, best_code = math.inf, 0
    scale = max(1.0, float(np.abs(A).sum()))
    tie = 1e-12 * scale
    hi_sum = np.zeros(n)
    hi_code = 0
    for step in range(1 << high):
        if step:
            bit = (step & -step).bit_length() - 1  # Gray code: flipped bit index
            hi_code ^= 1 << bit
            col = A[:, low + bit]
            hi_sum = hi_sum - col if (hi_code >> bit) & 1 == 0 else hi_sum + col
        vals = np.max(np.abs(base[:, None] - hi_sum[:, None] - table), axis=0)
        lo = int(np.argmin(vals))
        v = float(vals[lo])
        if v < best_val - tie:
            near = np.flatnonzero(vals <= v + tie)
            best_val, best_code = v, (hi_code << low) | int(near[0])
        elif v <= best_val + tie:
            near = np.flatnonzero(vals <= best_val + tie)
            code = (hi_code << low) | int(near[0])
            if code < best_code:
                best_code = code
    x = np.array([(best_code >> j) & 1 for j in range(m)], dtype=np.int64)
    return x, eval_bicolor(A, x, p)


def brute_min_multicolor(A, k: int, cap: int = DEFAULT_MULTICOLOR_CAP) -> tuple[np.ndarray, float]:
    """Exact k-color discrepancy over all k^m colorings.

    Ties go to the lowest base-k encoding with column 0 least significant.
    """
    A = np.asarray(_matrix(A), dtype=float)
    n, m = A.shape
    if k < 1:
        raise ValueError("k must be at least 1")
    if k**m > cap:
        raise OverflowError(f"{k}^{m} colorings exceeds cap {cap}")
    if m == 0 or n == 0 or k == 1:
        chi = np.zeros(m, dtype=np.int64)
        return chi, eval_multicolor(A, k, chi) if n else 0.0
    low = min(m, max(1, int(math.log(4096) / math.log(k))))
    high = m - low
    nlow = k**low
    codes = np.arange(nlow)
    digits = np.stack([(codes // k**j) % k for j in range(low)])  # (low, nlow)
    # low_part[s] : (n, nlow) partial sums of color s over the low columns
    low_part = np.stack([A[:, :low] @ (digits == s).astype(float) for s in range(k)])
    rowsum = A.sum(axis=1)
    share = rowsum / k
    tie = 1e-12 * max(1.0, float(A.sum()))
    best_val, best_code = math.inf, 0
    for hc in range(k**high):
        hd = [(hc // k**j) % k for j in range(high)]
        hi_part = np.zeros((k, n))
        for j, s in enumerate(hd):
            hi_part[s] += A[:, low + j]
        tot = low_part + hi_part[:, :, None]
        vals = np.max(np.abs(share[None, :, None] - tot), axis=(0, 1))
        v = float(vals.min())
        if v < best_val - tie:
            best_val = v
            best_code = hc * nlow + int(np.flatnonzero(vals <= v + tie)[0])
    chi = np.array([(best_code // k**j) % k for j in range(m)], dtype=np.int64)
    return chi, eval_multicolor(A, k, chi)


# ---------------------------------------------------------------- solvers

def null_space(M: np.ndarray, tol: float = PIVOT_TOL) -> np.ndarray:
    """Basis (columns) of the null space of ``M`` by Gauss-Jordan elimination
    with partial pivoting; pivots below ``tol * max|M|`` count as zero."""
    R = np.array(M, dtype=float, copy=True)
    rows, cols = R.shape
    thresh = tol * max(1.0, float(np.abs(R).max()) if R.size else 1.0)
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        i = r + int(np.argmax(np.abs(R[r:, c])))
        if abs(R[i, c]) <= thresh:
            continue
        if i != r:
            R[[r, i]] = R[[i, r]]
        R[r] /= R[r, c]
        others = np.abs(R[:, c]) > 0
        others[r] = False
        if others.any():
            R[others] -= np.outer(R[others, c], R[r])
        pivots.append(c)
        r += 1
    pivot_set = set(pivots)
    free = [c for c in range(cols) if c not in pivot_set]
    basis = np.zeros((cols, len(free)))
    for t, f in enumerate(free):
        basis[f, t] = 1.0
        for row, pc in enumerate(pivots):
            basis[pc, t] = -R[row, f]
    return basis


def _fractional(w: np.ndarray) -> np.ndarray:
    return np.flatnonzero((w > 0) & (w < 1))


def reduce_columns(A, w) -> tuple[np.ndarray, np.ndarray]:
    """Move ``w`` inside ``{v in [0,1]^m : A v = A w}`` until at most ``n``
    coordinates are fractional.

    Returns ``(w_reduced, floating)`` where ``floating`` lists the fractional
    coordinates. Works block-wise: a null-space basis of ``A`` restricted to
    ``n + n`` fractional columns is walked one basis vector at a time, and
    each move pins at least one coordinate to 0 or 1.
    """
    A = _check_unit(_matrix(A))
    w = np.array(w, dtype=float).reshape(-1)
    n, m = A.shape
    if w.shape[0] != m:
        raise ValueError(f"start vector has length {w.shape[0]}, matrix has {m} columns")
    if w.size and (w.min() < 0 or w.max() > 1):
        raise ValueError("start vector must lie in [0, 1]^m")
    w[w <= SNAP_TOL] = 0.0
    w[w >= 1 - SNAP_TOL] = 1.0
    frac = _fractional(w)
    block_size = max(2 * n, n + 1)
    while len(frac) > n:
        block = frac[:block_size]
        basis = null_space(A[:, block])
        wb = w[block]
        alive = np.ones(len(block), dtype=bool)
        while basis.shape[1]:
            v = basis[:, 0].copy()
            v[~alive] = 0.0
            if np.max(np.abs(v)) <= PIVOT_TOL:
                basis = basis[:, 1:]
                continue
            pos, neg = v > PIVOT_TOL, v < -PIVOT_TOL
            limits = np.concatenate([(1 - wb[pos]) / v[pos], wb[neg] / -v[neg]])
            idx = np.concatenate([np.flatnonzero(pos), np.flatnonzero(neg)])
            j = int(np.argmin(limits))
            t, hit = limits[j], idx[j]
            wb = wb + t * v
            wb[hit] = 1.0 if v[hit] > 0 else 0.0
            snapped = alive & ((wb <= SNAP_TOL) | (wb >= 1 - SNAP_TOL))
            wb[snapped & (wb <= SNAP_TOL)] = 0.0
            wb[snapped & (wb >= 1 - SNAP_TOL)] = 1.0
            alive &= ~snapped
            # eliminate pinned coordinates from the basis; v has v[hit] != 0 so
            # each move costs exactly one dimension
            order = [hit] + [c for c in np.flatnonzero(snapped) if c != hit]
            for c in order:
                col = np.flatnonzero(np.abs(basis[c]) > PIVOT_TOL)
                if not len(col):
                    continue
                piv = col[int(np.argmax(np.abs(basis[c, col])))]
                pv = basis[:, piv].copy()
                basis = basis - np.outer(pv, basis[c] / pv[c])
                basis = np.delete(basis, piv, axis=1)
            basis[~alive] = 0.0
        w[block] = wb
        frac = _fractional(w)
    return w, frac


def _partial_coloring(A: np.ndarray, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One round of the random-walk partial coloring on fractional ``x``.

    Gaussian steps are projected away from frozen coordinates (at 0 or 1) and
    from tight rows (``|<a_i, x - x0>|`` at its threshold); every step is
    truncated so that it stays inside the box and the row bands.
    """
    n, m = A.shape
    x = x.copy()
    steps = math.ceil(C_STEP * m * math.log(max(m, 2)))
    gamma = 1.0 / math.sqrt(steps)
    norms = np.sqrt((A * A).sum(axis=1))
    lam = LAMBDA_SCALE * norms * math.sqrt(math.log(4.0 * max(n, m) / m))
    dev = np.zeros(n)
    free = np.ones(m, dtype=bool)
    tight = lam <= SNAP_TOL
    fidx = np.arange(m)
    Q = None
    dirty = True
    for _ in range(steps):
        if dirty:
            fidx = np.flatnonzero(free)
            if not len(fidx):
                break
            rows = np.flatnonzero(tight)
            Q = None
            if len(rows):
                u, sv, _ = np.linalg.svd(A[np.ix_(rows, fidx)].T, full_matrices=False)
                keep = sv > 1e-10 * max(1.0, float(sv[0]) if len(sv) else 1.0)
                if keep.sum() >= len(fidx):
                    break
                Q = u[:, keep] if keep.any() else None
            Af = A[:, fidx]
            dirty = False
        g = rng.standard_normal(len(fidx))
        if Q is not None:
            g -= Q @ (Q.T @ g)
            if not np.any(np.abs(g) > 1e-12):
                break
        step = gamma * g
        xf = x[fidx]
        t = 1.0
        up, dn = step > 0, step < 0
        if up.any():
            t = min(t, float(np.min((1.0 - xf[up]) / step[up])))
        if dn.any():
            t = min(t, float(np.min(xf[dn] / -step[dn])))
        delta = Af @ step
        loose = ~tight
        inc, dec = loose & (delta > 0), loose & (delta < 0)
        if inc.any():
            t = min(t, float(np.min((lam[inc] - dev[inc]) / delta[inc])))
        if dec.any():
            t = min(t, float(np.min((lam[dec] + dev[dec]) / -delta[dec])))
        t = max(t, 0.0)
        xf = xf + t * step
        dev += t * delta
        lo, hi = xf <= SNAP_TOL, xf >= 1.0 - SNAP_TOL
        if lo.any() or hi.any():
            target = np.where(lo, 0.0, 1.0)
            snap = lo | hi
            dev += Af[:, snap] @ (target[snap] - xf[snap])
            xf[snap] = target[snap]
            free[fidx[snap]] = False
            dirty = True
        x[fidx] = xf
        newly = loose & (np.abs(dev) >= lam - SNAP_TOL)
        if newly.any():
            tight |= newly
            dirty = True
    return x


SWAP_POOL = 2048
SWAP_CANDIDATES = 64


def _local_repair(A: np.ndarray, w: np.ndarray, x: np.ndarray,
                  rng: Optional[np.random.Generator] = None,
                  max_iter: Optional[int] = None) -> np.ndarray:
    """Greedy repair of ``r = A (w - x)`` by single flips and pair swaps.

    A move is taken only if it lowers ``(||r||_inf, ||r||_2^2)``
    lexicographically, so the loop cannot cycle. Swap candidates (one
    coordinate 1 -> 0, another 0 -> 1) are ranked by the exact change of
    ``||r||_2^2`` via the Gram matrix, then checked in the max norm.
    """
    n, m = A.shape
    if m == 0 or n == 0:
        return x
    x = x.copy()
    r = A @ (w - x)
    cur_inf = float(np.max(np.abs(r)))
    cur_sq = float(r @ r)
    eps = 1e-12 * max(1.0, cur_inf)
    limit = max_iter if max_iter is not None else 4 * m + 16
    gram = A.T @ A if m <= SWAP_POOL else None
    norms2 = np.einsum("ij,ij->j", A, A)

    def better(inf, sq):
        return inf < cur_inf - eps or (inf <= cur_inf + eps and sq < cur_sq - eps)

    for _ in range(limit):
        # single flips
        dx = 1.0 - 2.0 * x
        cand = r[:, None] - A * dx[None, :]
        inf = np.max(np.abs(cand), axis=0)
        sq = np.einsum("ij,ij->j", cand, cand)
        j = int(np.lexsort((sq, inf))[0])
        if better(inf[j], sq[j]) and inf[j] < cur_inf - eps:
            r = cand[:, j]
            x[j] = 1.0 - x[j]
            cur_inf, cur_sq = float(inf[j]), float(sq[j])
            continue
        # pair swaps: r -> r + a_j - a_l for x_j = 1, x_l = 0
        ones, zeros = np.flatnonzero(x == 1), np.flatnonzero(x == 0)
        if not len(ones) or not len(zeros):
            break
        if gram is None:
            pick = rng if rng is not None else np.random.default_rng(0)
            ones = np.sort(pick.choice(ones, min(len(ones), SWAP_POOL // 2), replace=False))
            zeros = np.sort(pick.choice(zeros, min(len(zeros), SWAP_POOL // 2), replace=False))
            cross = A[:, ones].T @ A[:, zeros]
        else:
            cross = gram[np.ix_(ones, zeros)]
        ra = r @ A
        delta = ((norms2[ones] + 2 * ra[ones])[:, None]
                 + (norms2[zeros] - 2 * ra[zeros])[None, :] - 2 * cross)
        flat = np.argpartition(delta, min(SWAP_CANDIDATES, delta.size - 1), axis=None)[:SWAP_CANDIDATES]
        jj, ll = np.unravel_index(flat, delta.shape)
        trial = r[:, None] + A[:, ones[jj]] - A[:, zeros[ll]]
        t_inf = np.max(np.abs(trial), axis=0)
        t_sq = np.einsum("ij,ij->j", trial, trial)
        b = int(np.lexsort((t_sq, t_inf))[0])
        take_flip = better(inf[j], sq[j])
        take_swap = better(t_inf[b], t_sq[b])
        if take_swap and (not take_flip or (t_inf[b], t_sq[b]) < (inf[j], sq[j])):
            r = trial[:, b]
            x[ones[jj[b]]] = 0.0
            x[zeros[ll[b]]] = 1.0
            cur_inf, cur_sq = float(t_inf[b]), float(t_sq[b])
        elif take_flip:
            r = cand[:, j]
            x[j] = 1.0 - x[j]
            cur_inf, cur_sq = float(inf[j]), float(sq[j])
        else:
            break
    return x


def _linear_disc(A: np.ndarray, w: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n, m = A.shape
    if m == 0:
        return np.zeros(0, dtype=np.int64)
    if np.all((w == 0) | (w == 1)):
        return w.astype(np.int64)
    x, floating = reduce_columns(A, w)
    rounds = 2 * math.ceil(math.log2(max(len(floating), 2))) + 4
    for _ in range(rounds):
        if len(floating) <= 1:
            break
        x[floating] = _partial_coloring(A[:, floating], x[floating], rng)
        floating = _fractional(x)
    # residual coordinates: randomized rounding, then greedy repair
    if len(floating):
        x[floating] = (rng.random(len(floating)) < x[floating]).astype(float)
    x = np.round(x)
    x = _local_repair(A, w, x, rng)
    return x.astype(np.int64)


def solve_linear_disc(A, w, rng_seed=0) -> tuple[np.ndarray, float]:
    """Find ``x in {0,1}^m`` with small ``||A (w - x)||_inf``.

    Returns ``(x, value)``. Deterministic for a given seed (an int or a
    sequence of ints accepted by :func:`numpy.random.default_rng`).
    """
    A = _check_unit(_matrix(A))
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape[0] != A.shape[1]:
        raise ValueError(f"start vector has length {w.shape[0]}, matrix has {A.shape[1]} columns")
    if w.size and (w.min() < 0 or w.max() > 1):
        raise ValueError("start vector must lie in [0, 1]^m")
    x = _linear_disc(A, w, np.random.default_rng(rng_seed))
    value = float(np.max(np.abs(A @ (w - x)))) if A.size else 0.0
    return x, value


def _multicolor(A: np.ndarray, cols: np.ndarray, k: int, first: int,
                chi: np.ndarray, rng: np.random.Generator) -> None:
    if k == 1 or len(cols) == 0:
        chi[cols] = first
        return
    k0 = k // 2
    k1 = k - k0
    sub = A[:, cols]
    x = _linear_disc(sub, np.full(len(cols), k1 / k), rng)
    _multicolor(A, cols[x == 0], k0, first, chi, rng)
    _multicolor(A, cols[x == 1], k1, first + k0, chi, rng)


def solve_multicolor(A, k: int, rng_seed=0) -> tuple[np.ndarray, float]:
    """k-coloring by recursive halving on linear discrepancy.

    With ``k0 = k // 2`` and ``k1 = k - k0`` the columns are split by a
    linear-discrepancy coloring for the start vector ``(k1/k) * 1``; the
    zero side is colored recursively with colors ``0..k0-1``, the one side
    with ``k0..k-1``. Returns ``(chi, value)``.
    """
    A = _check_unit(_matrix(A))
    if k < 1:
        raise ValueError("k must be at least 1")
    m = A.shape[1]
    chi = np.zeros(m, dtype=np.int64)
    _multicolor(A, np.arange(m), k, 0, chi, np.random.default_rng(rng_seed))
    return chi, eval_multicolor(A, k, chi)
