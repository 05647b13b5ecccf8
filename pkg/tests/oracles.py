"""Independent oracle implementations used to cross-check the library.

These deliberately avoid the library's own code paths: plain loops,
math.log, and brute-force enumeration only.
"""

from __future__ import annotations

import math

import numpy as np


def brute_force_lor(human_docs, edited_docs, word):
    """Log-odds ratio by direct counting and closed-form logs.

    Returns None when either side saturates (word in every document).
    """

    def smoothed(docs):
        k = 0
        for d in docs:
            if word in d:
                k += 1
        return (k + 1) / (len(docs) + 1)

    ph = smoothed(human_docs)
    pg = smoothed(edited_docs)
    if ph >= 1.0 or pg >= 1.0:
        return None
    return math.log(pg / (1.0 - pg)) - math.log(ph / (1.0 - ph))


def sse(y, X, w):
    n = len(y)
    total = 0.0
    for t in range(n):
        pred = 0.0
        for j in range(len(w)):
            pred += X[t][j] * w[j]
        total += (y[t] - pred) ** 2
    return total


def grid_search_pair(y, X, step=1e-4, refine_step=1e-6):
    """Enumerate weights (a, 1-a) on a 1-D grid, then refine locally."""
    y = np.asarray(y)
    X = np.asarray(X)

    def obj(a):
        r = y - (a * X[:, 0] + (1 - a) * X[:, 1])
        return float(r @ r)

    grid = np.arange(0.0, 1.0 + step / 2, step)
    vals = [obj(a) for a in grid]
    a_best = grid[int(np.argmin(vals))]
    lo = max(0.0, a_best - 2 * step)
    hi = min(1.0, a_best + 2 * step)
    fine = np.arange(lo, hi + refine_step / 2, refine_step)
    vals = [obj(a) for a in fine]
    i = int(np.argmin(vals))
    return float(vals[i]), np.array([fine[i], 1 - fine[i]])


def grid_search_simplex3(y, X, step=0.002, refinements=3):
    """Dense enumeration over the 3-donor simplex with local refinement."""
    y = np.asarray(y)
    X = np.asarray(X)

    def obj(w):
        r = y - X @ w
        return float(r @ r)

    best, best_w = math.inf, None
    a_grid = np.arange(0.0, 1.0 + step / 2, step)
    for a in a_grid:
        for b in np.arange(0.0, 1.0 - a + step / 2, step):
            w = np.array([a, b, max(0.0, 1.0 - a - b)])
            v = obj(w)
            if v < best:
                best, best_w = v, w
    for _ in range(refinements):
        step /= 10.0
        center = best_w
        for da in np.arange(-10 * step, 10 * step + step / 2, step):
            a = center[0] + da
            if a < 0 or a > 1:
                continue
            for db in np.arange(-10 * step, 10 * step + step / 2, step):
                b = center[1] + db
                if b < 0 or a + b > 1:
                    continue
                w = np.array([a, b, 1.0 - a - b])
                v = obj(w)
                if v < best:
                    best, best_w = v, w
    return best, best_w


def project_to_simplex(v):
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    rho = np.nonzero(u * np.arange(1, len(v) + 1) > (css - 1))[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1)
    return np.maximum(v - theta, 0.0)


def projected_gradient_simplex(y, X, iters=200000, tol=1e-16):
    """Plain projected gradient descent on the simplex."""
    y = np.asarray(y)
    X = np.asarray(X)
    n = X.shape[1]
    w = np.full(n, 1.0 / n)
    lip = 2.0 * np.linalg.norm(X, 2) ** 2
    step = 1.0 / lip
    prev = math.inf
    for _ in range(iters):
        grad = 2.0 * (X.T @ (X @ w - y))
        w = project_to_simplex(w - step * grad)
        r = y - X @ w
        obj = float(r @ r)
        if prev - obj < tol:
            break
        prev = obj
    return float(((y - X @ w) ** 2).sum()), w


def ols_normal_equations(X, y):
    return np.linalg.solve(X.T @ X, X.T @ y)
