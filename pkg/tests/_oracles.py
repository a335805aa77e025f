"""Slow independent reference computations used to cross-check the library."""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from fermigauss.matalg import rotation


def pfaffian_by_matchings(a: np.ndarray) -> float:
    """Sum over perfect matchings with explicit crossing signs (exponential time)."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n % 2:
        return 0.0

    def rec(idx):
        if not idx:
            return 1.0
        first, rest = idx[0], idx[1:]
        total = 0.0
        for k, j in enumerate(rest):
            if a[first, j] != 0:
                total += (-1) ** k * a[first, j] * rec(rest[:k] + rest[k + 1:])
        return total

    return rec(tuple(range(n)))


def _local_orthogonal(angles, flips) -> np.ndarray:
    n = len(angles)
    o = np.zeros((2 * n, 2 * n))
    for k, (a, m) in enumerate(zip(angles, flips)):
        block = rotation(a)
        if m:
            block = np.diag([1.0, -1.0]) @ block
        o[2 * k:2 * k + 2, 2 * k:2 * k + 2] = block
    return o


def glu_distance_by_search(g1, g2, rng: np.random.Generator, starts: int = 6,
                           allow_flips: bool = True) -> float:
    """Minimum of ``||O g1 O^T - g2||_F`` over local orthogonals, by multistart BFGS."""
    g1, g2 = np.asarray(g1, dtype=float), np.asarray(g2, dtype=float)
    n = g1.shape[0] // 2
    best = np.inf
    patterns = itertools.product((0, 1), repeat=n) if allow_flips else [(0,) * n]
    for flips in patterns:
        def cost(x, flips=flips):
            o = _local_orthogonal(x, flips)
            return float(np.sum((o @ g1 @ o.T - g2) ** 2))

        for _ in range(starts):
            res = minimize(cost, rng.uniform(-np.pi, np.pi, size=n), method="BFGS",
                           options={"gtol": 1e-14})
            best = min(best, float(np.sqrt(max(res.fun, 0.0))))
    return best


@lru_cache(maxsize=None)
def _compositions(total: int, parts: int) -> np.ndarray:
    """All non-negative integer vectors of length ``parts`` summing to ``total``."""
    if parts == 1:
        return np.array([[total]])
    rows = [np.hstack([np.full((len(rest), 1), k), rest])
            for k in range(total + 1) for rest in [_compositions(total - k, parts - 1)]]
    return np.vstack(rows)


def simplex_grid_min(cols: np.ndarray, b: np.ndarray, step: float = 1e-3) -> tuple[float, np.ndarray]:
    """Exhaustive minimum of ``||cols @ p - b||`` over a grid on the probability simplex."""
    steps = int(round(1 / step))
    grid = _compositions(steps, cols.shape[1]) / steps
    q = cols.T @ cols
    c = cols.T @ b
    sq = np.einsum("ki,ij,kj->k", grid, q, grid) - 2 * grid @ c + float(b @ b)
    # the expanded quadratic cancels badly near zero; rescore the leaders exactly
    lead = np.argsort(sq)[:8]
    exact = np.linalg.norm(grid[lead] @ cols.T - b, axis=1)
    k = int(lead[np.argmin(exact)])
    return float(np.linalg.norm(cols @ grid[k] - b)), grid[k]


def three_mode_zero_pattern_label(amps) -> tuple[str, str | None]:
    """Ground-truth class and split from which even amplitudes were set to zero.

    With two surviving basis strings the mode on which they agree is the one
    that factorizes.
    """
    strings = ("000", "011", "101", "110")
    alive = [s for s, a in zip(strings, amps) if a != 0]
    if len(alive) == 4:
        return "GHZ3", None
    if len(alive) == 3:
        return "W3", None
    if len(alive) == 2:
        lone = next(k for k in range(3) if alive[0][k] == alive[1][k]) + 1
        rest = "".join(str(k) for k in (1, 2, 3) if k != lone)
        return "Biseparable", f"{lone}|{rest}"
    return "Separable", None
