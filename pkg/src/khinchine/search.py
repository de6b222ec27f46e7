"""Search for the generalized Khintchine constants: one-sided bounds on the
sup/inf over n and unit-norm weight vectors of the normed weighted sum.

The sup/inf run over all n and the whole unit sphere, so a finite search can
only certify one side; estimates are reported with an explicit direction and
the witnessing weight vector. Candidate sets grow monotonically with n_max
(and with restarts), which makes the reported bounds monotone too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import Distribution
from .genfun import GeneratingFunction, PsiFunction
from .norms import (CoefficientVector, EngineRefusal, NormEstimate, bphi_norm,
                    gls_norm, weighted_sum_bphi, weighted_sum_gls,
                    weighted_sum_lp)
from .numerics import substream


@dataclass(frozen=True)
class NormSpec:
    """Which norm the constants are taken in: lp(p), gls(psi), or bphi(phi)."""

    kind: str  # lp | gls | bphi
    p: float | None = None
    psi: PsiFunction | None = None
    phi: GeneratingFunction | None = None

    def __post_init__(self):
        if self.kind == "lp":
            if self.p is None or self.p < 1:
                raise ValueError("lp norm spec needs p >= 1")
        elif self.kind == "gls":
            if self.psi is None:
                raise ValueError("gls norm spec needs a psi function")
        elif self.kind == "bphi":
            if self.phi is None:
                raise ValueError("bphi norm spec needs a generating function")
        else:
            raise ValueError(f"unknown norm spec kind {self.kind!r}")

    @property
    def label(self) -> str:
        if self.kind == "lp":
            return f"lp({self.p!r})"
        if self.kind == "gls":
            return f"gls({self.psi.provenance})"
        return f"bphi({self.phi.label})"

    @staticmethod
    def lp(p: float) -> "NormSpec":
        return NormSpec("lp", p=float(p))

    @staticmethod
    def gls(psi: PsiFunction) -> "NormSpec":
        return NormSpec("gls", psi=psi)

    @staticmethod
    def bphi(phi: GeneratingFunction) -> "NormSpec":
        return NormSpec("bphi", phi=phi)


def sum_norm(d: Distribution, a: CoefficientVector, spec: NormSpec,
             engine: str = "auto", budget: int | None = None,
             seed: int = 0) -> NormEstimate:
    """Norm of sum a_k X_k under the given spec."""
    if spec.kind == "lp":
        return weighted_sum_lp(d, a, spec.p, engine=engine, budget=budget, seed=seed)
    if spec.kind == "gls":
        return weighted_sum_gls(d, a, spec.psi, engine=engine, budget=budget, seed=seed)
    return weighted_sum_bphi(d, a, spec.phi)


def single_norm(d: Distribution, spec: NormSpec) -> float:
    """Norm of one copy of the law under the spec (the n = 1 anchor)."""
    if spec.kind == "lp":
        return d.lp_norm(spec.p)
    if spec.kind == "gls":
        return gls_norm(d, spec.psi).value
    return bphi_norm(d, spec.phi).value


@dataclass(frozen=True)
class KhinchineEstimate:
    value: float
    direction: str  # lower_bound_of_sup | upper_bound_of_inf
    norm_spec: str
    n_max: int
    witness: CoefficientVector
    trace: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"value": self.value, "direction": self.direction,
                "norm_spec": self.norm_spec, "n_max": self.n_max,
                "witness": self.witness.to_json(), "trace": list(self.trace),
                "meta": dict(self.meta)}


def _geometric_ns(n_max: int) -> list[int]:
    return sorted({min(2**j, n_max) for j in range(0, 30) if 2**j <= n_max} | {n_max})


def _scan_candidates(n_max: int):
    """Deterministic scan candidates: equal weights for every n, the one-hot
    vector, and two-level patterns on a geometric n subset. Growing n_max only
    appends candidates."""
    yield "one_hot", 1, CoefficientVector.one_hot(1)
    for n in range(1, n_max + 1):
        if n > 1:
            yield "equal", n, CoefficientVector.equal(n)
    for n in _geometric_ns(n_max):
        if n < 2:
            continue
        js = sorted({min(2**j, n - 1) for j in range(0, 30) if 2**j <= n - 1})
        for j in js:
            for w in (0.1, 0.3, 0.5, 0.7, 0.9):
                yield "two_level", n, CoefficientVector.two_level(n, j, w)


def _coordinate_search(evaluate, b0: np.ndarray, maximize: bool,
                       max_evals: int = 250):
    """Coordinate ascent/descent on b = a^2 over the simplex.

    Multiplicative coordinate moves of step 1.5 shrinking to 1.01; returns
    (best_b, best_value, evals) or None if the start refuses.
    """
    sign = 1.0 if maximize else -1.0
    b = b0 / b0.sum()
    cur = evaluate(b)
    if cur is None:
        return None
    cur *= sign
    evals = 1
    step = 1.5
    while step > 1.01 and evals < max_evals:
        improved = False
        for k in range(b.size):
            for factor in (step, 1.0 / step):
                nb = b.copy()
                nb[k] = max(nb[k], 1e-12) * factor
                nb /= nb.sum()
                val = evaluate(nb)
                evals += 1
                if val is not None and sign * val > cur + 1e-13:
                    b, cur = nb, sign * val
                    improved = True
                if evals >= max_evals:
                    break
            if evals >= max_evals:
                break
        if not improved:
            step = 1.0 + (step - 1.0) * 0.5
    return b, sign * cur, evals


def _khinchine_search(d: Distribution, spec: NormSpec, n_max: int,
                      restarts: int, seed: int, maximize: bool,
                      engine: str = "auto", budget: int | None = None) -> KhinchineEstimate:
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    sign = 1.0 if maximize else -1.0
    trace: list = []
    best_val = -math.inf
    best_wit: CoefficientVector | None = None
    refusals = 0

    def consider(kind: str, n: int, a: CoefficientVector):
        nonlocal best_val, best_wit, refusals
        try:
            est = sum_norm(d, a, spec, engine=engine, budget=budget, seed=seed)
        except EngineRefusal as exc:
            refusals += 1
            trace.append({"kind": kind, "n": n, "refused": str(exc)})
            return None
        v = sign * est.value
        trace.append({"kind": kind, "n": n, "value": est.value})
        if v > best_val + 1e-12:
            best_val, best_wit = v, a
        elif best_wit is not None and abs(v - best_val) <= 1e-12:
            # deterministic tie-break: lexicographically smallest witness
            if tuple(a.entries) < tuple(best_wit.entries):
                best_wit = a
        return est.value

    for kind, n, a in _scan_candidates(n_max):
        consider(kind, n, a)

    nonneg = d.is_symmetric  # sign of a_k provably irrelevant there
    for n in _geometric_ns(n_max):
        if n < 2:
            continue
        for r in range(restarts):
            rng = substream(seed, 0x5EA2C4, n, r)
            start = rng.dirichlet(np.ones(n))
            signs = np.ones(n) if nonneg else rng.choice([-1.0, 1.0], size=n)

            def evaluate(b):
                a = CoefficientVector.normalized(signs * np.sqrt(b))
                try:
                    return sum_norm(d, a, spec, engine=engine, budget=budget,
                                    seed=seed).value
                except EngineRefusal:
                    return None

            res = _coordinate_search(evaluate, start, maximize)
            if res is None:
                refusals += 1
                trace.append({"kind": "local_search", "n": n, "restart": r,
                              "refused": "engine refusal at start"})
                continue
            b, val, evals = res
            trace.append({"kind": "local_search", "n": n, "restart": r,
                          "value": val, "evals": evals})
            a = CoefficientVector.normalized(signs * np.sqrt(b))
            v = sign * val
            if v > best_val + 1e-12:
                best_val, best_wit = v, a
            elif best_wit is not None and abs(v - best_val) <= 1e-12:
                if tuple(a.entries) < tuple(best_wit.entries):
                    best_wit = a

    return KhinchineEstimate(
        value=sign * best_val,
        direction="lower_bound_of_sup" if maximize else "upper_bound_of_inf",
        norm_spec=spec.label,
        n_max=n_max,
        witness=best_wit,
        trace=trace,
        meta={"restarts": restarts, "seed": seed, "engine": engine,
              "refusals": refusals, "law": d.label},
    )


def khinchine_sup(d: Distribution, spec: NormSpec, n_max: int = 32,
                  restarts: int = 3, seed: int = 0, engine: str = "auto",
                  budget: int | None = None) -> KhinchineEstimate:
    """Lower bound of sup_n sup_{a in D(n)} ||sum a_k X_k||.

    Candidates: equal weights for every n <= n_max, the one-hot vector,
    two-level patterns, and coordinate-ascent local search on b = a_k^2 from
    `restarts` seeded starts. Engine refusals are recorded in the trace and
    the candidate skipped; nothing silently falls back to sampling.
    """
    return _khinchine_search(d, spec, n_max, restarts, seed, True, engine, budget)


def khinchine_inf(d: Distribution, spec: NormSpec, n_max: int = 32,
                  restarts: int = 3, seed: int = 0, engine: str = "auto",
                  budget: int | None = None) -> KhinchineEstimate:
    """Upper bound of inf_n inf_{a in D(n)} ||sum a_k X_k||."""
    return _khinchine_search(d, spec, n_max, restarts, seed, False, engine, budget)


def prelim_bounds(d: Distribution, spec: NormSpec) -> dict:
    """CLT floor/ceiling: the sup constant is >= max(||Z_sigma||, ||X||) and
    the inf constant is <= min of the same pair, with Z_sigma the centered
    Gaussian matching the law's variance."""
    var = d.variance
    if not (var > 0 and math.isfinite(var)):
        raise ValueError("prelim_bounds needs variance in (0, inf)")
    z = Distribution.gaussian(math.sqrt(var))
    gz = single_norm(z, spec)
    gx = single_norm(d, spec)
    return {"upper_floor": max(gz, gx), "lower_ceiling": min(gz, gx),
            "gaussian_norm": gz, "law_norm": gx}
