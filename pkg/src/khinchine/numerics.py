"""Shared numeric machinery: geometric grids, bracketed concave maximization,
vectorized monotone inversion, simplex projection, and deterministic
counter-based random streams."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

#: default grid used by the norm sup (1e-4 .. 1e3, 64 points per decade)
NORM_GRID_LO = 1e-4
NORM_GRID_HI = 1e3
POINTS_PER_DECADE = 64


def geometric_grid(lo: float, hi: float, per_decade: int = POINTS_PER_DECADE) -> np.ndarray:
    """Log-spaced grid from lo to hi inclusive, per_decade points per decade."""
    if not (0 < lo < hi):
        raise ValueError(f"need 0 < lo < hi, got {lo}, {hi}")
    n = max(2, int(round(math.log10(hi / lo) * per_decade)) + 1)
    return np.geomspace(lo, hi, n)


def golden_max(f, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 400):
    """Maximize unimodal f on [lo, hi] by golden section.

    Returns (argmax, value). Ties prefer the smaller argument so results do
    not depend on evaluation order.
    """
    a, b = float(lo), float(hi)
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    it = 0
    while (b - a) > tol * max(1.0, abs(a), abs(b)) and it < max_iter:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
        it += 1
    cand = [(a, f(a)), (x1, f1), (x2, f2), (b, f(b))]
    best = max(cand, key=lambda t: (t[1], -t[0]))
    return best[0], best[1]


def invert_increasing_vec(f, y, hi_start: float = 1.0, iters: int = 200) -> np.ndarray:
    """Solve f(x) = y elementwise for f increasing on [0, inf), f(0) = 0.

    f must be vectorized and may return +inf for large arguments. y must be
    finite and >= 0; entries it cannot bracket keep growing until f overflows
    to inf, which still brackets.
    """
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 0
    y = np.atleast_1d(y)
    lo = np.zeros_like(y)
    hi = np.full_like(y, hi_start)
    for _ in range(180):
        with np.errstate(over="ignore", invalid="ignore"):
            need = f(hi) < y
        if not bool(np.any(need)):
            break
        hi = np.where(need, hi * 4.0, hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        with np.errstate(over="ignore", invalid="ignore"):
            below = f(mid) < y
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    out = np.where(y == 0.0, 0.0, out)
    return float(out[0]) if scalar else out


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    cond = u - css / idx > 0
    rho = idx[cond][-1]
    theta = css[cond][-1] / rho
    return np.maximum(v - theta, 0.0)


def substream(seed: int, *ids: int) -> np.random.Generator:
    """Deterministic generator for (seed, ids...).

    Counter-based Philox keyed on the seed and a multiplicative mix of the
    stream ids, so sub-streams are independent and the mapping never goes
    through Python's randomized hash().
    """
    key = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)
    mix = 0x9E3779B97F4A7C15
    for i in ids:
        mix = (mix * 1000003 + (int(i) & 0xFFFFFFFFFFFFFFFF) + 1) & 0xFFFFFFFFFFFFFFFF
    return np.random.Generator(np.random.Philox(key=np.array([key, mix], dtype=np.uint64)))


def ordered_map(fn, items, threads: int = 1) -> list:
    """Map fn over items preserving order.

    With threads > 1 the work runs on a thread pool; because every item is
    independent and the reduction order is the input order, the result is
    identical for any worker count.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def log_cosh(x: np.ndarray) -> np.ndarray:
    """log(cosh(x)), cancellation-free near 0 and overflow-free for large |x|.

    Near 0 the naive form loses ~8 digits (the leading x cancels); the exact
    identity cosh(x) = 1 + 2 sinh^2(x/2) keeps full relative precision, which
    the norm sup needs on its smallest grid points.
    """
    x = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
    out = np.empty_like(x)
    small = x < 20.0
    s = np.sinh(0.5 * x[small])
    out[small] = np.log1p(2.0 * s * s)
    xl = x[~small]
    out[~small] = xl + np.log1p(np.exp(-2.0 * xl)) - math.log(2.0)
    return out


def log_sinhc(x: np.ndarray) -> np.ndarray:
    """log(sinh(|x|)/|x|), stable at both ends (value 0 at x = 0)."""
    x = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
    out = np.empty_like(x)
    tiny = x < 1e-2
    mid = (~tiny) & (x < 1.0)
    big = x > 350.0
    rest = ~tiny & ~mid & ~big
    xs = x[tiny]
    # sinh(x)/x - 1 = x^2/6 + x^4/120 + O(x^6)
    out[tiny] = np.log1p(xs * xs / 6.0 * (1.0 + xs * xs / 20.0))
    xm = x[mid]
    out[mid] = np.log1p((np.sinh(xm) - xm) / xm)
    xr = x[rest]
    out[rest] = np.log(np.sinh(xr) / xr)
    xb = x[big]
    out[big] = xb - np.log(2.0 * xb)
    return out


def collapse_support(values: np.ndarray, probs: np.ndarray, tol: float = 1e-12):
    """Merge support points closer than tol (absolute), summing probabilities.

    The representative of a merged group is the probability-weighted mean, so
    symmetric supports stay symmetric.
    """
    order = np.argsort(values)
    v = values[order]
    p = probs[order]
    if v.size <= 1:
        return v, p
    new_group = np.empty(v.size, dtype=bool)
    new_group[0] = True
    new_group[1:] = np.diff(v) > tol
    starts = np.flatnonzero(new_group)
    pm = np.add.reduceat(p, starts)
    wv = np.add.reduceat(p * v, starts)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        mean = wv / pm
    # subnormal masses make the mean garbage (their products underflow);
    # fall back to the first member there, and drop zero-mass points
    safe = (pm > 1e-290) & np.isfinite(mean)
    rep = np.where(safe, mean, v[starts])
    keep = pm > 0.0
    return rep[keep], pm[keep]
