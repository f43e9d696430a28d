"""Slow, obviously-correct reference implementations used by the tests."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


def frame_cost(a, b, i, j):
    return math.sqrt(sum((float(x) - float(y)) ** 2 for x, y in zip(a[i], b[j])))


def monotone_paths(la, lb):
    """Every warping path from (0,0) to (la-1, lb-1) with steps (1,0),(0,1),(1,1)."""

    @lru_cache(maxsize=None)
    def go(i, j):
        if (i, j) == (la - 1, lb - 1):
            return (((i, j),),)
        out = []
        for di, dj in ((1, 0), (0, 1), (1, 1)):
            ni, nj = i + di, j + dj
            if ni < la and nj < lb:
                out += [((i, j),) + rest for rest in go(ni, nj)]
        return tuple(out)

    return go(0, 0)


def dtw_enumerate(a, b, band=None):
    best = math.inf
    for path in monotone_paths(len(a), len(b)):
        if band is not None and any(abs(i - j) > band for i, j in path):
            continue
        best = min(best, sum(frame_cost(a, b, i, j) for i, j in path))
    return best


def euclid_loop(a, b):
    total = 0.0
    for x, y in zip(np.ravel(a), np.ravel(b)):
        total += (float(x) - float(y)) ** 2
    return math.sqrt(total)


def natural_spline(xk, yk, x):
    """Natural cubic spline by solving the tridiagonal second-derivative system."""
    n = len(xk)
    h = [xk[i + 1] - xk[i] for i in range(n - 1)]
    a = np.zeros((n, n))
    r = np.zeros(n)
    a[0, 0] = a[-1, -1] = 1.0
    for i in range(1, n - 1):
        a[i, i - 1] = h[i - 1]
        a[i, i] = 2 * (h[i - 1] + h[i])
        a[i, i + 1] = h[i]
        r[i] = 6 * ((yk[i + 1] - yk[i]) / h[i] - (yk[i] - yk[i - 1]) / h[i - 1])
    m = np.linalg.solve(a, r)
    out = []
    for t in x:
        i = min(max(int(np.searchsorted(xk, t, side="right")) - 1, 0), n - 2)
        t0, t1 = xk[i], xk[i + 1]
        u, v = t1 - t, t - t0
        out.append(m[i] * u ** 3 / (6 * h[i]) + m[i + 1] * v ** 3 / (6 * h[i])
                   + (yk[i] / h[i] - m[i] * h[i] / 6) * u + (yk[i + 1] / h[i] - m[i + 1] * h[i] / 6) * v)
    return np.array(out)


def greedy_cover(cover):
    """Greedy max-marginal coverage over a boolean (templates x samples) matrix."""
    cover = [set(np.flatnonzero(row)) for row in cover]
    taken, seen, order = set(), set(), []
    while len(order) < len(cover):
        gains = [(len(c - seen), -i) for i, c in enumerate(cover) if i not in taken]
        g, neg_i = max(gains)
        i = -neg_i
        order.append((i, g))
        taken.add(i)
        seen |= cover[i]
    return order


def timeline_spans(hits, total):
    """Connected components of a boolean timeline built from (start, length) hits."""
    line = [False] * total
    for s, n in hits:
        for t in range(s, s + n):
            line[t] = True
    spans, start = [], None
    for t, v in enumerate(line + [False]):
        if v and start is None:
            start = t
        if not v and start is not None:
            spans.append((start, t))
            start = None
    return spans
