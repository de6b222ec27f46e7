"""Calculus on exponential-moment generating functions: evaluation,
monotone inversion, Legendre (Young-Fenchel) conjugation, the exponential
Orlicz N-function, convexity-class tests, the sup-over-n and sup-over-weights
transforms, moment-scale functions, and tail envelopes.

A member of the admissible class is even, convex, vanishes at 0, behaves like
a multiple of lambda^2 near 0, and is strictly increasing on [0, lambda0).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import Distribution, parse_distribution
from .numerics import (geometric_grid, golden_max, invert_increasing_vec,
                       project_simplex, substream)

OVERFLOW_EXPONENT = 700.0  # exp argument guard, inside double range with headroom
LEGENDRE_GRID_LO = 1e-6
LEGENDRE_GRID_HI = 1e6
LEGENDRE_EXTEND_CAP = 1e15


class DomainError(ValueError):
    """Argument outside the domain or range of a generating function."""


@dataclass(frozen=True)
class GeneratingFunction:
    """One generating function with its domain radius.

    family: 'subgaussian' (0.5*lam^2), 'power' (|lam|^m/m for |lam| >= 1,
    lam^2/m below 1, the value-continuous splice), 'natural' (max over signs
    of the log-MGF of `dist`), or 'tabulated' (piecewise-linear on knots).
    """

    family: str
    m: float | None = None
    dist: Distribution | None = None
    knots: np.ndarray | None = field(default=None, compare=False)
    knot_values: np.ndarray | None = field(default=None, compare=False)

    @property
    def lambda0(self) -> float:
        if self.family == "tabulated":
            return float(self.knots[-1])
        return math.inf

    @property
    def label(self) -> str:
        if self.family == "power":
            return f"power({self.m!r})"
        if self.family == "natural":
            return f"natural({self.dist.label})"
        if self.family == "tabulated":
            return f"tabulated[{self.knots.size}]"
        return self.family

    @property
    def curvature_at_zero(self) -> float:
        """Exact limit of phi(lam)/lam^2 as lam -> 0 (numeric for tabulated)."""
        if self.family == "subgaussian":
            return 0.5
        if self.family == "power":
            return 1.0 / self.m
        if self.family == "natural":
            return self.dist.variance / 2.0
        return float(self.knot_values[1] / self.knots[1] ** 2)

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        scalar = lam.ndim == 0
        x = np.abs(np.atleast_1d(lam))
        if self.lambda0 != math.inf and np.any(x > self.lambda0 * (1 + 1e-12)):
            raise DomainError(f"|lambda| exceeds domain radius {self.lambda0!r}")
        if self.family == "subgaussian":
            out = 0.5 * x * x
        elif self.family == "power":
            with np.errstate(over="ignore"):
                out = np.where(x <= 1.0, x * x / self.m, x**self.m / self.m)
        elif self.family == "natural":
            out = np.maximum(self.dist.log_mgf(x), self.dist.log_mgf(-x))
        else:
            out = np.interp(x, self.knots, self.knot_values)
        return float(out[0]) if scalar else out

    def derivative(self, x) -> np.ndarray:
        """Central-difference derivative on the positive axis."""
        x = np.asarray(x, dtype=float)
        h = 1e-6 * np.maximum(1.0, np.abs(x))
        hi = np.minimum(x + h, self.lambda0 * (1 - 1e-12)) if self.lambda0 != math.inf else x + h
        lo = np.maximum(x - h, 0.0)
        return (self(hi) - self(lo)) / (hi - lo)

    # -- serialization --------------------------------------------------------

    def to_json(self) -> dict:
        out: dict = {"family": self.family,
                     "lambda0": "inf" if self.lambda0 == math.inf else self.lambda0}
        if self.family == "power":
            out["m"] = self.m
            out["splice"] = "quadratic-value"
        if self.family == "natural":
            out["dist"] = self.dist.to_json()
        if self.family == "tabulated":
            out["knots"] = self.knots.tolist()
            out["values"] = self.knot_values.tolist()
        return out

    @staticmethod
    def from_json(obj: dict) -> "GeneratingFunction":
        fam = obj.get("family")
        if fam == "subgaussian":
            return phi_subgaussian()
        if fam == "power":
            return phi_power(obj["m"])
        if fam == "natural":
            return phi_natural(Distribution.from_json(obj["dist"]))
        if fam == "tabulated":
            return phi_tabulated(obj["knots"], obj["values"])
        raise DomainError(f"unknown generating-function family {fam!r}")


def phi_subgaussian() -> GeneratingFunction:
    return GeneratingFunction("subgaussian")


def phi_power(m: float) -> GeneratingFunction:
    """Power family with the quadratic value splice below |lam| = 1.

    Convex for m >= 2; for m in [1, 2) the splice kink breaks convexity, which
    conv_r_class and the membership report detect.
    """
    if not m >= 1:
        raise DomainError("power family needs m >= 1")
    return GeneratingFunction("power", m=float(m))


def phi_natural(dist: Distribution) -> GeneratingFunction:
    if not dist.satisfies_cramer:
        raise DomainError("natural generating function needs Cramer's condition")
    return GeneratingFunction("natural", dist=dist)


def phi_tabulated(knots, values) -> GeneratingFunction:
    k = np.asarray(knots, dtype=float)
    v = np.asarray(values, dtype=float)
    if k.ndim != 1 or k.shape != v.shape or k.size < 2:
        raise DomainError("tabulated family needs matching 1-d knots/values, >= 2 points")
    if k[0] != 0.0 or v[0] != 0.0:
        raise DomainError("tabulated knots must start at (0, 0)")
    if np.any(np.diff(k) <= 0) or np.any(np.diff(v) <= 0):
        raise DomainError("tabulated knots and values must be strictly increasing")
    return GeneratingFunction("tabulated", knots=k, knot_values=v)


def parse_phi(spec: str) -> GeneratingFunction:
    """Parse CLI specs: 'subgaussian', 'power:3', 'natural:<law spec>',
    or '@file.json'."""
    spec = spec.strip()
    if spec.startswith("@"):
        with open(spec[1:], "r", encoding="utf-8") as fh:
            return GeneratingFunction.from_json(json.load(fh))
    name, _, rest = spec.partition(":")
    name = name.replace("-", "_").lower()
    if name == "subgaussian":
        return phi_subgaussian()
    if name == "power":
        try:
            return phi_power(float(rest))
        except ValueError as exc:
            raise DomainError(f"bad power exponent {rest!r}") from exc
    if name == "natural":
        return phi_natural(parse_distribution(rest))
    raise DomainError(f"unknown generating-function spec {spec!r}")


# ---------------------------------------------------------------------------
# inversion
# ---------------------------------------------------------------------------

def phi_inverse(phi: GeneratingFunction, y: float) -> float:
    """The lambda in [0, lambda0) with phi(lambda) = y, by monotone bisection.

    Raises DomainError when lambda0 is finite and y exceeds the attainable
    range.
    """
    return float(phi_inverse_vec(phi, np.array([float(y)]))[0])


def phi_inverse_vec(phi: GeneratingFunction, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise DomainError("phi_inverse needs y >= 0")
    if phi.lambda0 == math.inf:
        out = invert_increasing_vec(phi, y)
    else:
        hi = phi.lambda0 * (1 - 1e-12)
        sup = phi(hi)
        if np.any(y > sup * (1 + 1e-9)):
            raise DomainError(f"y above attainable range sup = {sup!r} (finite domain radius)")
        lo_a = np.zeros_like(y)
        hi_a = np.full_like(y, hi)
        for _ in range(200):
            mid = 0.5 * (lo_a + hi_a)
            below = phi(mid) < y
            lo_a = np.where(below, mid, lo_a)
            hi_a = np.where(below, hi_a, mid)
        out = np.where(y == 0.0, 0.0, 0.5 * (lo_a + hi_a))
    return out


# ---------------------------------------------------------------------------
# Legendre transform and derived objects
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LegendreResult:
    value: float
    argmax: float
    boundary: bool = False   # finite domain radius, sup attained at the edge
    unbounded: bool = False  # lambda0 = inf and the objective keeps growing


def _legendre_grid(phi: GeneratingFunction, hi: float) -> np.ndarray:
    top = hi if phi.lambda0 == math.inf else min(hi, phi.lambda0 * (1 - 1e-12))
    g = geometric_grid(LEGENDRE_GRID_LO, top)
    return np.concatenate([[0.0], g])


def legendre(phi: GeneratingFunction, u: float) -> LegendreResult:
    """sup over lambda in [0, lambda0) of lambda*u - phi(lambda).

    Bracket the maximizer on a geometric grid (the objective is concave), then
    refine by golden section to 1e-12 relative bracket width. For lambda0 =
    inf the grid is extended geometrically while the objective still grows at
    the end; past the extension cap the transform is reported unbounded.
    """
    u = float(u)
    if u < 0:
        raise DomainError("legendre needs u >= 0")
    if u == 0.0:
        return LegendreResult(value=0.0, argmax=0.0)
    hi = LEGENDRE_GRID_HI
    while True:
        grid = _legendre_grid(phi, hi)
        with np.errstate(over="ignore", invalid="ignore"):
            g = grid * u - phi(grid)
        g = np.where(np.isnan(g), -np.inf, g)
        i = int(np.argmax(g))
        at_end = i == grid.size - 1
        if at_end and phi.lambda0 == math.inf and hi < LEGENDRE_EXTEND_CAP:
            hi *= 100.0
            continue
        break
    if at_end:
        if phi.lambda0 == math.inf:
            return LegendreResult(value=math.inf, argmax=math.inf, unbounded=True)
        lam = grid[-1]
        return LegendreResult(value=max(float(g[-1]), 0.0), argmax=float(lam), boundary=True)
    lo = grid[i - 1] if i > 0 else 0.0
    hi_b = grid[i + 1]
    arg, val = golden_max(lambda lam: lam * u - float(phi(lam)), lo, hi_b)
    if val <= 0.0:
        return LegendreResult(value=0.0, argmax=0.0)
    return LegendreResult(value=float(val), argmax=float(arg))


def biconjugate(phi: GeneratingFunction, lam: float) -> float:
    """sup over u >= 0 of lam*u - phi*(u); equals phi(lam) for closed convex
    members, which the invariant tests exercise."""
    lam = abs(float(lam))
    if lam == 0.0:
        return 0.0

    def neg_obj(u):
        return lam * u - legendre(phi, u).value

    # scan a geometric u grid for a bracket, then refine
    grid = np.concatenate([[0.0], geometric_grid(1e-6, 1e6)])
    vals = np.array([neg_obj(float(u)) for u in grid])
    vals = np.where(np.isnan(vals), -np.inf, vals)
    i = int(np.argmax(vals))
    if i == grid.size - 1:
        return float(vals[-1])
    lo = grid[i - 1] if i > 0 else 0.0
    arg, val = golden_max(neg_obj, lo, grid[i + 1], tol=1e-10)
    return max(float(val), 0.0)


@dataclass(frozen=True)
class ConjugateProfile:
    """Tabulated Legendre transform: knots u, values phi*(u), maximizers."""

    knots: np.ndarray
    values: np.ndarray
    lambda_argmax: np.ndarray
    boundary: np.ndarray
    unbounded: np.ndarray

    def to_json(self) -> dict:
        return {"knots": self.knots.tolist(), "values": self.values.tolist(),
                "lambda_argmax": self.lambda_argmax.tolist()}

    def validate(self, phi: GeneratingFunction, fy_tol: float = 1e-9) -> dict:
        """Check convexity/monotonicity of the values and the Fenchel-Young
        inequality on the grid pairs."""
        finite = np.isfinite(self.values)
        v = self.values[finite]
        ok_monotone = bool(np.all(np.diff(v) >= -1e-12))
        ok_zero = bool(abs(self.values[0]) <= 1e-12) if self.knots[0] == 0.0 else True
        t = self.knots[finite]
        ok_convex = True
        if v.size >= 3:
            s = np.diff(v) / np.diff(t)
            ok_convex = bool(np.all(np.diff(s) >= -1e-9 * np.maximum(1.0, np.abs(s[:-1]))))
        lam = np.concatenate([[0.0], geometric_grid(1e-4, 1e2)])
        lam = lam[lam < phi.lambda0]
        phil = phi(lam)
        worst = -math.inf
        for u, fv in zip(self.knots[finite], self.values[finite]):
            gap = lam * u - (phil + fv)
            worst = max(worst, float(np.max(gap)))
        return {"monotone": ok_monotone, "zero_at_zero": ok_zero,
                "convex": ok_convex, "fenchel_young_max_gap": worst,
                "fenchel_young_ok": worst <= fy_tol}


def conjugate_profile(phi: GeneratingFunction, u_knots) -> ConjugateProfile:
    u = np.asarray(u_knots, dtype=float)
    if np.any(np.diff(u) <= 0) or np.any(u < 0):
        raise DomainError("conjugate profile knots must be increasing and >= 0")
    res = [legendre(phi, float(x)) for x in u]
    return ConjugateProfile(
        knots=u,
        values=np.array([r.value for r in res]),
        lambda_argmax=np.array([r.argmax for r in res]),
        boundary=np.array([r.boundary for r in res]),
        unbounded=np.array([r.unbounded for r in res]),
    )


def orlicz_n(phi: GeneratingFunction, u: float) -> float:
    """Exponential Orlicz N-function exp(phi*(u)) - 1, with a +inf sentinel
    once the exponent passes the overflow guard."""
    val = legendre(phi, u).value
    if val > OVERFLOW_EXPONENT:
        return math.inf
    return math.expm1(val)


def tail_envelope(phi: GeneratingFunction, tau: float, u: float) -> float:
    """Chernoff-type tail bound exp(-phi*(u/tau)) for a variable of norm tau."""
    if not tau > 0:
        raise DomainError("tail_envelope needs tau > 0")
    if u < 0:
        raise DomainError("tail_envelope needs u >= 0")
    val = legendre(phi, u / tau).value
    return math.exp(-val) if math.isfinite(val) else 0.0


# ---------------------------------------------------------------------------
# convexity class
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvClassResult:
    member: bool
    r: float
    witness: tuple | None = None  # (t1, t2, t3) with decreasing slope


def conv_r_class(phi: GeneratingFunction, r: float,
                 lam_cap: float = 50.0, n_points: int = 10_000) -> ConvClassResult:
    """Grid test of whether t -> phi(t^(1/r)) is convex on (0, min(lambda0, cap)^r].

    Convexity on the (log-spaced, hence non-uniform) grid is checked as
    monotone chord slopes; on failure the first violating triple is returned.
    """
    if not 1.0 <= r <= 2.0:
        raise DomainError("conv_r_class needs r in [1, 2]")
    top = min(phi.lambda0 * (1 - 1e-12), lam_cap) ** r
    t = np.geomspace(top * 1e-12, top, n_points)
    f = phi(t ** (1.0 / r))
    s = np.diff(f) / np.diff(t)
    defect = np.diff(s)
    tol = -1e-9 * np.maximum(1.0, np.maximum(np.abs(s[:-1]), np.abs(s[1:])))
    bad = np.nonzero(defect < tol)[0]
    if bad.size == 0:
        return ConvClassResult(member=True, r=r)
    i = int(bad[np.argmin(defect[bad])])
    return ConvClassResult(member=False, r=r,
                           witness=(float(t[i]), float(t[i + 1]), float(t[i + 2])))


# ---------------------------------------------------------------------------
# sup-over-n transform
# ---------------------------------------------------------------------------

def overline_phi(phi: GeneratingFunction, lam: float, n_cap: int = 1_000_000) -> float:
    """sup over integer n >= 1 of n * phi(lam / sqrt(n)).

    A continuous 1-d search over t in [1, n_cap] brackets the maximizer, then
    the sup is taken exactly over the integers in the bracket (plus the
    endpoints, which covers the monotone cases).
    """
    lam = abs(float(lam))
    if lam >= phi.lambda0:
        raise DomainError("overline_phi needs |lambda| < lambda0")
    if lam == 0.0:
        return 0.0

    def h(t):
        return t * float(phi(lam / math.sqrt(t)))

    grid = np.unique(np.concatenate([[1.0], geometric_grid(1.0, float(n_cap), 64)]))
    vals = np.array([h(float(t)) for t in grid])
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    t_star, _ = golden_max(h, lo, hi, tol=1e-10)
    lo_n = max(1, int(math.floor(t_star)) - 64)
    hi_n = min(n_cap, int(math.ceil(t_star)) + 64)
    cands = set(range(lo_n, hi_n + 1)) | {1, n_cap}
    return max(h(float(n)) for n in sorted(cands))


# ---------------------------------------------------------------------------
# kappa: sup over n and unit-norm weights of sums of component functions
# ---------------------------------------------------------------------------

def _kappa_candidates(phis, n_max: int, restarts: int, seed: int,
                      opt_lams) -> list[np.ndarray]:
    """Candidate weight vectors b (b_k = a_k^2 on the simplex over the first
    n coordinates). Growing n_max only appends candidates, which keeps the
    reported lower bound monotone in n_max."""
    L = len(phis)
    N = min(n_max, L)
    cands: list[np.ndarray] = []
    for n in range(1, N + 1):
        cands.append(np.full(n, 1.0 / n))
    for k in range(N):
        b = np.zeros(k + 1)
        b[k] = 1.0
        cands.append(b)
    ns = sorted({min(2**j, N) for j in range(0, 30) if 2**j <= N} | {N})
    w_grid = (0.1, 0.3, 0.5, 0.7, 0.9)
    for n in ns:
        if n < 2:
            continue
        js = sorted({min(2**j, n - 1) for j in range(0, 30) if 2**j <= n - 1})
        for j in js:
            for w in w_grid:
                b = np.full(n, (1.0 - w) / (n - j))
                b[:j] = w / j
                cands.append(b.copy())
                cands.append(b[::-1].copy())
    for n in ns:
        for r in range(restarts):
            rng = substream(seed, 0xCA11, n, r)
            b0 = rng.dirichlet(np.ones(n))
            for lam in opt_lams:
                cands.append(_ascend_simplex(phis[:n], float(lam), b0))
    return cands


def _group_phis(phis):
    """Group component indices by the identity of their generating function so
    evaluations vectorize across repeated members of a cycled pool."""
    groups: dict[int, tuple[GeneratingFunction, list[int]]] = {}
    for k, p in enumerate(phis):
        key = id(p)
        if key not in groups:
            groups[key] = (p, [])
        groups[key][1].append(k)
    return [(p, np.asarray(idx)) for p, idx in groups.values()]


def _ascend_simplex(phis, lam: float, b0: np.ndarray,
                    iters: int = 80) -> np.ndarray:
    """Projected-gradient ascent of sum_k phi_k(lam * sqrt(b_k)) on the simplex."""
    groups = _group_phis(phis)
    b = b0.copy()

    def value(bv):
        x = lam * np.sqrt(np.maximum(bv, 0.0))
        return math.fsum(float(np.sum(p(x[idx]))) for p, idx in groups)

    def gradient(bv):
        x = lam * np.sqrt(np.maximum(bv, 1e-300))
        g = np.empty_like(bv)
        for p, idx in groups:
            g[idx] = p.derivative(x[idx])
        return g * lam / (2.0 * np.sqrt(np.maximum(bv, 1e-300)))

    cur = value(b)
    step = 0.5
    for _ in range(iters):
        grad = gradient(b)
        scale = np.max(np.abs(grad))
        if scale == 0 or not np.isfinite(scale):
            break
        improved = False
        while step > 1e-10:
            nb = project_simplex(b + step * grad / scale)
            nv = value(nb)
            if nv > cur + 1e-15:
                b, cur = nb, nv
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        step = min(step * 2.0, 0.5)
    return b


def _candidate_profile(phis, b: np.ndarray, lam_grid: np.ndarray):
    """Values sum_k phi_k(a_k*lam) across the lambda grid for one candidate.

    Candidates driving |a_k * lam| to a finite domain radius are discarded at
    those lambdas (returned as -inf with a flag).
    """
    a = np.sqrt(b)
    vals = np.zeros_like(lam_grid)
    flagged = False
    for p, idx in _group_phis(phis[:b.size]):
        ak = a[idx]
        ak = ak[ak > 0.0]
        if ak.size == 0:
            continue
        x = np.abs(np.multiply.outer(lam_grid, ak))
        if p.lambda0 != math.inf:
            bad = x >= p.lambda0
            if np.any(bad):
                flagged = True
                vals = np.where(np.any(bad, axis=1), -np.inf, vals)
                x = np.where(bad, 0.0, x)
        vals = vals + p(x.ravel()).reshape(x.shape).sum(axis=1)
    return vals, flagged


def kappa_profile(phis, lam_grid, n_max: int = 32, restarts: int = 3, seed: int = 0):
    """Lower estimate of kappa(lam) = sup_n sup_{a in D(n)} sum phi_k(a_k lam)
    across a lambda grid.

    Returns (values, witnesses, meta); witnesses[i] is the best weight vector
    b at lam_grid[i]. The value is explicitly a lower bound of the sup: only
    the enumerated and locally optimized candidates are examined.
    """
    if n_max < 1:
        raise DomainError("kappa needs n_max >= 1")
    lam_grid = np.atleast_1d(np.asarray(lam_grid, dtype=float))
    opt_lams = [float(x) for x in np.unique(np.abs(lam_grid[lam_grid != 0]))]
    if len(opt_lams) > 8:
        idx = np.linspace(0, len(opt_lams) - 1, 8).round().astype(int)
        opt_lams = [opt_lams[i] for i in idx]
    cands = _kappa_candidates(list(phis), n_max, restarts, seed, opt_lams)
    best = np.full(lam_grid.shape, -np.inf)
    witness = [None] * lam_grid.size
    discarded = 0
    for b in cands:
        vals, flagged = _candidate_profile(phis, b, lam_grid)
        discarded += int(flagged)
        for i in range(lam_grid.size):
            if vals[i] > best[i] + 1e-12:
                best[i] = vals[i]
                witness[i] = b
            elif witness[i] is not None and abs(vals[i] - best[i]) <= 1e-12:
                if tuple(b) < tuple(witness[i]):
                    witness[i] = b
    meta = {"candidates": len(cands), "discarded_domain": discarded,
            "n_max": min(n_max, len(phis)), "direction": "lower_bound_of_sup"}
    return best, witness, meta


def kappa(phis, lam: float, n_max: int = 32, restarts: int = 3, seed: int = 0):
    """Scalar kappa at one lambda; returns (value, witness_weights, meta)."""
    vals, wits, meta = kappa_profile(phis, [float(lam)], n_max, restarts, seed)
    return float(vals[0]), wits[0], meta


# ---------------------------------------------------------------------------
# moment-scale functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PsiFunction:
    """Grand-Lebesgue generating function on a p-grid."""

    p_grid: np.ndarray
    values: np.ndarray
    provenance: str = "explicit"

    def __post_init__(self):
        p = np.asarray(self.p_grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "p_grid", p)
        object.__setattr__(self, "values", v)
        if p.ndim != 1 or p.shape != v.shape or p.size == 0:
            raise DomainError("psi needs matching 1-d p_grid/values")
        if np.any(np.diff(p) <= 0):
            raise DomainError("psi p_grid must be strictly increasing")
        if np.any(v <= 0):
            raise DomainError("psi values must be strictly positive")

    @staticmethod
    def sqrt_p(p_grid) -> "PsiFunction":
        p = np.asarray(p_grid, dtype=float)
        return PsiFunction(p, np.sqrt(p), "explicit")

    @staticmethod
    def p_power(m: float, p_grid) -> "PsiFunction":
        p = np.asarray(p_grid, dtype=float)
        return PsiFunction(p, p ** (1.0 / m), "explicit")

    @staticmethod
    def natural(dist: Distribution, p_grid) -> "PsiFunction":
        p = np.asarray(p_grid, dtype=float)
        return PsiFunction(p, np.array([dist.lp_norm(x) for x in p]), "explicit")

    def to_json(self) -> dict:
        return {"p_grid": self.p_grid.tolist(), "values": self.values.tolist(),
                "provenance": self.provenance}


def psi_from_phi(phi: GeneratingFunction, p_grid, literal: bool = False) -> PsiFunction:
    """Moment-scale function induced by phi: psi(p) = phi^{-1}(p).

    With literal=True the variant phi^{-1}(p)/p is produced instead; it is
    kept behind this flag and not used by the verification suites.
    """
    p = np.asarray(p_grid, dtype=float)
    vals = phi_inverse_vec(phi, p)
    if literal:
        vals = vals / p
    return PsiFunction(p, vals, "from_phi")


# ---------------------------------------------------------------------------
# admissibility report
# ---------------------------------------------------------------------------

def phi_membership_report(phi: GeneratingFunction) -> dict:
    """Finite-grid checks of the admissibility conditions: evenness, zero at
    zero, convexity and strict increase on the positive axis, quadratic
    behavior near 0, and (for infinite domain radius) growth of phi(lam)/lam
    along the grid."""
    top = 50.0 if phi.lambda0 == math.inf else phi.lambda0 * (1 - 1e-9)
    grid = geometric_grid(1e-6, top)
    f_pos = phi(grid)
    f_neg = phi(-grid)
    even = bool(np.all(np.abs(f_pos - f_neg) <= 1e-12 * np.maximum(1.0, np.abs(f_pos))))
    zero = abs(float(phi(0.0))) <= 1e-300
    first = np.diff(f_pos)
    increasing = bool(np.all(first > 0))
    s = first / np.diff(grid)
    convex = bool(np.all(np.diff(s) >= -1e-10 * np.maximum(1.0, np.abs(s[:-1]))))
    small = geometric_grid(1e-6, 1e-3)
    ratio = phi(small) / small**2
    quad = bool(np.all(ratio > 0) and np.max(ratio) / np.min(ratio) < 1e6)
    report = {"even": even, "zero_at_zero": zero, "strictly_increasing": increasing,
              "convex": convex, "quadratic_near_zero": quad,
              "curvature_at_zero": phi.curvature_at_zero}
    if phi.lambda0 == math.inf:
        r = f_pos / grid
        report["ratio_to_lambda_increasing"] = bool(np.all(np.diff(r) > 0))
    report["admissible"] = all(v for k, v in report.items() if isinstance(v, bool))
    return report
