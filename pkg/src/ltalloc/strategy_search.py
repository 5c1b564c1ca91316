"""Brute-force search over open-loop allocation sequences.

A strategy is a date-indexed sequence of stock weights drawn from a finite
grid, applied identically on every simulated path (no feedback on realised
states). Each sequence is scored by the average CRRA utility of terminal
wealth, starting from W_0 = 1 with per-quarter gross portfolio return

    alpha_t * exp(rf + r_t) + (1 - alpha_t) * exp(rf).

Because W_T^(1-gamma) = prod_t g_t^(1-gamma), a sequence's score only needs
the table ``f[t, j, p] = g_t(grid[j], p)^(1-gamma)`` (``log g`` for gamma = 1,
combined by addition instead of multiplication). The exhaustive search walks
the |grid|-ary tree of depth ``horizon`` depth-first and keeps one running
product per depth, so all sequences sharing a prefix reuse it.

Floating-point order is fixed: products are formed left to right in time and
each per-path sum runs in path-index order with Kahan compensation. The naive
evaluator performs exactly the same operations, so both agree bit for bit.
"""

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import BudgetExceeded, InvalidParams, NonPositiveWealth

DEFAULT_BUDGET = 10_000_000
MAX_TIES = 64


@dataclass(frozen=True)
class GridStrategy:
    grid: tuple
    sequence: tuple

    def __post_init__(self):
        check_grid(self.grid)
        for a in self.sequence:
            if a not in self.grid:
                raise InvalidParams(f"allocation {a!r} is not on the grid", field="sequence")


@dataclass
class SearchResult:
    best: GridStrategy
    expected_utility: float
    n_strategies_evaluated: int
    ties: list = field(default_factory=list)
    wall_time: float = 0.0


def check_grid(grid):
    grid = [float(g) for g in grid]
    if not grid:
        raise InvalidParams("grid is empty", field="grid")
    if any(not 0.0 <= g <= 1.0 for g in grid):
        raise InvalidParams("grid allocations must lie in [0, 1]", field="grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidParams("grid must be strictly ascending", field="grid")
    return grid


def wealth_factors(batch, rf_quarterly):
    """Gross stock and risk-free returns per path and quarter.

    Returns ``(stock, riskfree)``: ``stock`` has the batch's (n_paths, horizon)
    column-major layout, ``riskfree`` is the scalar exp(rf).
    """
    stock = np.exp(rf_quarterly + batch.excess_log_returns)
    return stock, math.exp(rf_quarterly)


def portfolio_gross(stock, riskfree, alpha):
    return alpha * stock + (1.0 - alpha) * riskfree


def _check_gamma(gamma):
    if not gamma > 0:
        raise InvalidParams("risk aversion must be positive", field="gamma")


def expected_crra_utility(batch, strategy, gamma, rf):
    """Average utility of terminal wealth, computed directly from W_T.

    This path compounds wealth and applies the utility at the end; it is
    independent of the factor table used by the search.
    """
    _check_gamma(gamma)
    seq = strategy.sequence
    if len(seq) != batch.horizon:
        raise InvalidParams(
            f"strategy has {len(seq)} dates, batch horizon is {batch.horizon}",
            field="sequence",
        )
    stock, riskfree = wealth_factors(batch, rf)
    if gamma == 1:
        logw = np.zeros(batch.n_paths)
        for t, a in enumerate(seq):
            g = portfolio_gross(stock[:, t], riskfree, a)
            if (g <= 0).any():
                raise NonPositiveWealth(f"non-positive gross return at quarter {t}")
            logw += np.log(g)
        return float(np.mean(logw))
    w = np.ones(batch.n_paths)
    for t, a in enumerate(seq):
        g = portfolio_gross(stock[:, t], riskfree, a)
        if (g <= 0).any():
            raise NonPositiveWealth(f"non-positive gross return at quarter {t}")
        w *= g
    return float(np.mean(w ** (1.0 - gamma)) / (1.0 - gamma))


def utility_factors(batch, grid, gamma, rf):
    """Per-quarter factor table f[t, j, p]; see the module docstring."""
    _check_gamma(gamma)
    grid = check_grid(grid)
    stock, riskfree = wealth_factors(batch, rf)
    f = np.empty((batch.horizon, len(grid), batch.n_paths))
    for t in range(batch.horizon):
        for j, a in enumerate(grid):
            g = portfolio_gross(stock[:, t], riskfree, a)
            if (g <= 0).any():
                raise NonPositiveWealth(f"non-positive gross return at quarter {t}")
            f[t, j] = np.log(g) if gamma == 1 else g ** (1.0 - gamma)
    return f


def _scale(gamma, n_paths):
    if gamma == 1:
        return 1.0 / n_paths
    return 1.0 / (n_paths * (1.0 - gamma))


@numba.njit(cache=True, nogil=True)
def _combine(x, y, additive):
    if additive:
        return x + y
    return x * y


@numba.njit(cache=True, nogil=True)
def _subtree(f, leaf, first, additive, scale, max_ties):
    """Best sequence among those starting with grid index ``first``.

    Sequences are visited in lexicographic order; a later one replaces the
    incumbent only on a strictly larger utility. Returns
    (best utility, best code, tie codes, tie count); a code is the sequence's
    base-|grid| number with the first date as the most significant digit.
    """
    T, G, N = f.shape
    buf = np.empty((max(T - 1, 1), N))
    digits = np.zeros(max(T - 1, 1), np.int64)
    acc = np.zeros(G)
    comp = np.zeros(G)
    ties = np.empty(max_ties, np.int64)
    n_ties = 0
    best = -np.inf
    best_code = -1

    if T == 1:
        n_prefix = 1
    else:
        n_prefix = G ** (T - 2)
        digits[0] = first
        for p in range(N):
            buf[0, p] = f[0, first, p]

    for code in range(n_prefix):
        start = 1
        if T > 2:
            # digits[1:T-1] hold ``code`` in base G; rebuild from the first changed one
            c = code
            for d in range(T - 2, 0, -1):
                digits[d] = c % G
                c //= G
            if code > 0:
                start = T - 2
                while start > 1 and digits[start] == 0:
                    start -= 1
            for d in range(start, T - 1):
                j = digits[d]
                for p in range(N):
                    buf[d, p] = _combine(buf[d - 1, p], f[d, j, p], additive)

        for j in range(G):
            acc[j] = 0.0
            comp[j] = 0.0
        if T == 1:
            for p in range(N):
                y = leaf[p, first] - comp[first]
                s = acc[first] + y
                comp[first] = (s - acc[first]) - y
                acc[first] = s
            js = first
            je = first + 1
        else:
            last = buf[T - 2]
            for p in range(N):
                lp = last[p]
                for j in range(G):
                    y = _combine(lp, leaf[p, j], additive) - comp[j]
                    s = acc[j] + y
                    comp[j] = (s - acc[j]) - y
                    acc[j] = s
            js = 0
            je = G

        for j in range(js, je):
            u = acc[j] * scale
            if T == 1:
                full = first
            else:
                full = (first * n_prefix + code) * G + j
            if u > best:
                best = u
                best_code = full
                n_ties = 0
            if u == best:
                if n_ties < max_ties:
                    ties[n_ties] = full
                n_ties += 1
    return best, best_code, ties[: min(n_ties, max_ties)], n_ties


@numba.njit(cache=True, nogil=True)
def _naive_utility(f, seq, additive, scale):
    T, G, N = f.shape
    acc = 0.0
    comp = 0.0
    for p in range(N):
        w = f[0, seq[0], p]
        for t in range(1, T):
            w = _combine(w, f[t, seq[t], p], additive)
        y = w - comp
        s = acc + y
        comp = (s - acc) - y
        acc = s
    return acc * scale


def _decode(code, n_grid, horizon):
    digits = []
    for _ in range(horizon):
        digits.append(code % n_grid)
        code //= n_grid
    return digits[::-1]


def _strategy(grid, idx):
    return GridStrategy(tuple(grid), tuple(grid[i] for i in idx))


def naive_search(batch, grid, gamma, rf, budget=DEFAULT_BUDGET):
    """Score every sequence independently, with no prefix reuse.

    Reference implementation for :func:`exhaustive_search` on small cases.
    """
    grid = check_grid(grid)
    n = len(grid) ** batch.horizon
    if n > budget:
        raise BudgetExceeded(n, budget)
    f = utility_factors(batch, grid, gamma, rf)
    scale = _scale(gamma, batch.n_paths)
    best = -np.inf
    best_idx = None
    ties = []
    for code in range(n):
        idx = _decode(code, len(grid), batch.horizon)
        u = _naive_utility(f, np.array(idx, np.int64), gamma == 1, scale)
        if u > best:
            best, best_idx, ties = u, idx, []
        if u == best:
            ties.append(idx)
    return SearchResult(
        best=_strategy(grid, best_idx),
        expected_utility=float(best),
        n_strategies_evaluated=n,
        ties=[_strategy(grid, t) for t in ties] if len(ties) > 1 else [],
    )


def sequence_utility(batch, grid, sequence_idx, gamma, rf):
    """Utility of one sequence (grid indices) through the factor table."""
    f = utility_factors(batch, grid, gamma, rf)
    return float(
        _naive_utility(f, np.asarray(sequence_idx, np.int64), gamma == 1, _scale(gamma, batch.n_paths))
    )


def exhaustive_search(batch, grid, gamma, rf, budget=DEFAULT_BUDGET, workers=None):
    """Best open-loop sequence over the full cartesian product of the grid.

    The tree is split by first-quarter allocation into |grid| subtrees, which
    run on up to ``workers`` threads (default: one per CPU). Results are
    merged in subtree order, so the answer does not depend on ``workers``.
    Ties go to the lexicographically smallest sequence.
    """
    t0 = time.perf_counter()
    grid = check_grid(grid)
    _check_gamma(gamma)
    G, T = len(grid), batch.horizon
    n = G**T
    if n > budget:
        raise BudgetExceeded(n, budget)
    f = utility_factors(batch, grid, gamma, rf)
    leaf = np.ascontiguousarray(f[T - 1].T)
    scale = _scale(gamma, batch.n_paths)
    additive = gamma == 1

    def run(first):
        return _subtree(f, leaf, first, additive, scale, MAX_TIES)

    if workers is None:
        workers = os.cpu_count() or 1
    workers = max(1, min(int(workers), G))
    if workers == 1:
        parts = [run(j) for j in range(G)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(G)))

    best = -np.inf
    best_code = -1
    tie_codes = []
    for u, code, ties, _ in parts:
        if u > best:
            best, best_code, tie_codes = u, code, list(ties)
        elif u == best:
            tie_codes.extend(ties)
    tie_codes = tie_codes[:MAX_TIES]
    return SearchResult(
        best=_strategy(grid, _decode(int(best_code), G, T)),
        expected_utility=float(best),
        n_strategies_evaluated=n,
        ties=[_strategy(grid, _decode(int(c), G, T)) for c in tie_codes]
        if len(tie_codes) > 1
        else [],
        wall_time=time.perf_counter() - t0,
    )
