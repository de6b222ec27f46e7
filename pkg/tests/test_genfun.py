import json
import math

import numpy as np
import pytest

from khinchine.distributions import Distribution
from khinchine.genfun import (DomainError, GeneratingFunction, PsiFunction,
                              biconjugate, conjugate_profile, conv_r_class,
                              kappa, legendre, orlicz_n, overline_phi,
                              parse_phi, phi_inverse, phi_membership_report,
                              phi_natural, phi_power, phi_subgaussian,
                              phi_tabulated, psi_from_phi, tail_envelope)

PHI2 = phi_subgaussian()
RAD = Distribution.rademacher()
LNCOSH = phi_natural(RAD)
POIS_NAT = phi_natural(Distribution.centered_poisson(1.0))


# ---------------------------------------------------------------------------
# inversion
# ---------------------------------------------------------------------------

def test_phi_inverse_subgaussian():
    assert phi_inverse(PHI2, 2.0) == pytest.approx(2.0, abs=1e-10)
    assert phi_inverse(PHI2, 0.0) == 0.0


def bisect_oracle(f, y, hi=100.0):
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_phi_inverse_power_splice():
    p3 = phi_power(3.0)
    # independent bisection oracle on the same spliced evaluator
    oracle = bisect_oracle(lambda x: float(p3(x)), 9.0)
    assert oracle == pytest.approx(3.0, abs=1e-10)
    assert phi_inverse(p3, 9.0) == pytest.approx(3.0, abs=1e-9)


def test_phi_inverse_tolerance_contract():
    for y in (0.3, 1.0, 7.0, 123.0):
        lam = phi_inverse(POIS_NAT, y)
        assert abs(float(POIS_NAT(lam)) - y) <= 1e-10 * max(1.0, y)


def test_phi_inverse_finite_domain_range_error():
    tab = phi_tabulated([0.0, 1.0, 2.0], [0.0, 0.5, 2.0])
    with pytest.raises(DomainError, match="range"):
        phi_inverse(tab, 5.0)


# ---------------------------------------------------------------------------
# Legendre transform
# ---------------------------------------------------------------------------

def test_legendre_self_conjugate_subgaussian():
    for u in np.linspace(0.0, 20.0, 41):
        r = legendre(PHI2, float(u))
        assert abs(r.value - u * u / 2.0) <= 1e-9
        assert r.argmax == pytest.approx(u, abs=1e-6)


def test_legendre_at_zero():
    r = legendre(PHI2, 0.0)
    assert r.value == 0.0 and r.argmax == 0.0


def test_legendre_lncosh_dense_grid_oracle():
    # sup over 10^6 grid points of lam*u - ln cosh(lam) on [0, 20]
    lam = np.linspace(0.0, 20.0, 10**6)
    u = 0.5
    dense = float(np.max(lam * u - np.log(np.cosh(lam))))
    r = legendre(LNCOSH, u)
    assert r.value == pytest.approx(dense, abs=1e-6)
    # closed form of the conjugate of ln cosh on |u| < 1
    closed = (1 + u) / 2 * math.log(1 + u) + (1 - u) / 2 * math.log(1 - u)
    assert r.value == pytest.approx(closed, abs=1e-10)


def test_legendre_unbounded_for_linear_growth():
    # ln cosh grows linearly, so the conjugate is infinite past slope 1
    r = legendre(LNCOSH, 1.5)
    assert r.unbounded and r.value == math.inf


def test_legendre_boundary_flag_finite_domain():
    tab = phi_tabulated([0.0, 1.0, 2.0], [0.0, 0.5, 2.0])
    r = legendre(tab, 10.0)  # slope never reaches 10 inside the domain
    assert r.boundary
    assert r.value == pytest.approx(10.0 * 2.0 - 2.0, rel=1e-9)


# ---------------------------------------------------------------------------
# Orlicz N-function and tail envelope
# ---------------------------------------------------------------------------

def test_orlicz_values():
    assert orlicz_n(PHI2, 0.0) == 0.0
    assert orlicz_n(PHI2, 2.0) == pytest.approx(math.e**2 - 1, rel=1e-12)
    assert orlicz_n(PHI2, 40.0) == math.inf  # exponent 800 past the guard


def test_tail_envelope_values():
    assert tail_envelope(PHI2, 1.0, 2.0) == pytest.approx(math.exp(-2.0), rel=1e-9)
    assert tail_envelope(POIS_NAT, 2.0, 0.0) == 1.0
    # single Rademacher never exceeds 1.5, and the envelope collapses to 0
    assert tail_envelope(LNCOSH, 1.0, 1.5) == 0.0
    surv = 0.0  # P(|theta| >= 1.5) by enumeration over {-1, +1}
    assert tail_envelope(LNCOSH, 1.0, 1.5) >= surv


# ---------------------------------------------------------------------------
# convexity classes
# ---------------------------------------------------------------------------

def test_conv2_subgaussian():
    assert conv_r_class(PHI2, 2.0).member
    assert conv_r_class(PHI2, 1.0).member


def test_conv2_lncosh_fails_with_witness():
    # t -> ln cosh(sqrt t) has decreasing slopes (concave), so membership fails
    res = conv_r_class(LNCOSH, 2.0)
    assert not res.member
    t1, t2, t3 = res.witness
    f = lambda t: math.log(math.cosh(math.sqrt(t)))
    s1 = (f(t2) - f(t1)) / (t2 - t1)
    s2 = (f(t3) - f(t2)) / (t3 - t2)
    assert s2 < s1  # the witness triple really violates convexity


def test_conv2_poisson_natural():
    assert conv_r_class(POIS_NAT, 2.0).member


def test_power_below_two_splice_fails_convexity():
    res = conv_r_class(phi_power(1.5), 1.0)
    assert not res.member  # the value splice kinks concavely at |lam| = 1


def test_conv_r_requires_r_in_range():
    with pytest.raises(DomainError):
        conv_r_class(PHI2, 2.5)


# ---------------------------------------------------------------------------
# sup-over-n transform
# ---------------------------------------------------------------------------

def test_overline_subgaussian_fixed_point():
    for lam in (0.3, 1.7, 5.0, 40.0):
        assert overline_phi(PHI2, lam) == pytest.approx(lam * lam / 2.0, rel=1e-14)


def test_overline_lncosh_scan_oracle():
    lam = 2.0
    ns = np.arange(1, 10**6 + 1, dtype=float)
    oracle = float(np.max(ns * np.log(np.cosh(lam / np.sqrt(ns)))))
    val = overline_phi(LNCOSH, lam)
    assert val == pytest.approx(oracle, rel=1e-9)
    assert val <= lam * lam / 2.0  # ln cosh x <= x^2/2


def test_overline_power_splice_plateau():
    # for |lam/sqrt(n)| <= 1 the splice is quadratic, value lam^2/m at every n
    ns = np.arange(1, 2001, dtype=float)
    p4 = phi_power(4.0)
    oracle = float(np.max(ns * np.array([p4(0.5 / math.sqrt(n)) for n in ns])))
    assert oracle == pytest.approx(0.5**2 / 4.0, rel=1e-12)
    assert overline_phi(p4, 0.5) == pytest.approx(0.0625, rel=1e-12)


# ---------------------------------------------------------------------------
# kappa
# ---------------------------------------------------------------------------

def test_kappa_identical_subgaussian_is_weight_free():
    lam = 1.3
    value, witness, meta = kappa([PHI2] * 8, lam, n_max=8, restarts=2, seed=1)
    assert value == pytest.approx(lam * lam / 2.0, rel=1e-12)
    assert meta["direction"] == "lower_bound_of_sup"


def test_kappa_identical_lncosh_equal_weights_extremal():
    lam, n_max = 3.0, 64
    ns = np.arange(1, n_max + 1, dtype=float)
    oracle = float(np.max(ns * np.log(np.cosh(lam / np.sqrt(ns)))))
    value, witness, _ = kappa([LNCOSH] * n_max, lam, n_max=n_max, restarts=2, seed=0)
    assert value == pytest.approx(oracle, abs=1e-9)
    assert value <= overline_phi(LNCOSH, lam) + 1e-9


def test_kappa_mixed_grid_oracle():
    # 2-d case: sup over b in [0, 1] of phi2(0.1 sqrt(b)) + power4(0.1 sqrt(1-b))
    p4 = phi_power(4.0)
    b = np.arange(0.0, 1.0 + 1e-12, 1e-4)
    grid_oracle = float(np.max(PHI2(0.1 * np.sqrt(b)) + p4(0.1 * np.sqrt(1.0 - b))))
    value, witness, _ = kappa([PHI2, p4], 0.1, n_max=2, restarts=3, seed=2)
    assert grid_oracle == pytest.approx(0.1**2 / 2.0, rel=1e-9)
    assert value == pytest.approx(grid_oracle, abs=1e-10)
    assert witness[0] == pytest.approx(1.0, abs=1e-6)  # one-hot on the subgaussian


def test_kappa_dominates_first_component():
    for lam in (0.2, 1.0, 2.5):
        value, _, _ = kappa([LNCOSH, PHI2], lam, n_max=2, restarts=1, seed=0)
        assert value >= float(LNCOSH(lam)) - 1e-12


# ---------------------------------------------------------------------------
# psi functions
# ---------------------------------------------------------------------------

def test_psi_from_phi_examples():
    assert psi_from_phi(PHI2, [8.0]).values[0] == pytest.approx(4.0, abs=1e-9)
    assert psi_from_phi(phi_power(2.0), [2.0]).values[0] == pytest.approx(2.0, abs=1e-9)
    v = psi_from_phi(phi_power(4.0), [64.0]).values[0]
    assert v == pytest.approx((4.0 * 64.0) ** 0.25, abs=1e-8)


def test_psi_literal_variant():
    lit = psi_from_phi(PHI2, [8.0], literal=True)
    assert lit.values[0] == pytest.approx(0.5, abs=1e-10)
    assert lit.provenance == "from_phi"


def test_psi_validation():
    with pytest.raises(DomainError):
        PsiFunction(np.array([2.0, 2.0]), np.array([1.0, 1.0]))
    with pytest.raises(DomainError):
        PsiFunction(np.array([2.0, 4.0]), np.array([1.0, 0.0]))


# ---------------------------------------------------------------------------
# invariants
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("phi", [PHI2, LNCOSH, POIS_NAT, phi_power(3.0)],
                         ids=["phi2", "lncosh", "poisson", "power3"])
def test_fenchel_young(phi):
    lams = np.concatenate([[0.0], np.geomspace(1e-4, 50.0, 40)])
    us = np.concatenate([[0.0], np.geomspace(1e-3, 5.0, 25)])
    phil = phi(lams)
    for u in us:
        star = legendre(phi, float(u)).value
        if not math.isfinite(star):
            continue
        assert np.max(lams * u - (phil + star)) <= 1e-9


@pytest.mark.parametrize("phi,lam_hi", [(PHI2, 20.0), (LNCOSH, 3.0), (POIS_NAT, 4.0)],
                         ids=["phi2", "lncosh", "poisson"])
def test_biconjugacy(phi, lam_hi):
    for lam in np.linspace(0.0, lam_hi, 9):
        direct = float(phi(lam))
        bc = biconjugate(phi, float(lam))
        assert bc == pytest.approx(direct, rel=1e-6, abs=1e-9)


def test_conjugate_profile_valid():
    prof = conjugate_profile(PHI2, np.linspace(0.0, 10.0, 30))
    rep = prof.validate(PHI2)
    assert rep["monotone"] and rep["convex"] and rep["zero_at_zero"]
    assert rep["fenchel_young_ok"]
    assert prof.values[-1] == pytest.approx(50.0, abs=1e-9)


def test_monotone_transforms():
    us = np.linspace(0.0, 6.0, 25)
    stars = [legendre(PHI2, float(u)).value for u in us]
    assert np.all(np.diff(stars) >= -1e-12)
    orls = [orlicz_n(PHI2, float(u)) for u in us]
    assert np.all(np.diff(orls) >= -1e-12)
    lams = np.linspace(0.1, 4.0, 12)
    ovs = [overline_phi(LNCOSH, float(x)) for x in lams]
    assert np.all(np.diff(ovs) >= -1e-12)
    kaps = [kappa([LNCOSH] * 4, float(x), n_max=4, restarts=1, seed=0)[0]
            for x in lams]
    assert np.all(np.diff(kaps) >= -1e-12)


def test_evenness_and_zero():
    grid = np.geomspace(1e-6, 10.0, 50)
    for phi in (PHI2, LNCOSH, POIS_NAT, phi_power(3.0)):
        assert float(phi(0.0)) == 0.0
        assert np.allclose(phi(grid), phi(-grid), rtol=1e-12)


def test_membership_report():
    rep = phi_membership_report(PHI2)
    assert rep["admissible"]
    assert rep["curvature_at_zero"] == 0.5
    rep = phi_membership_report(phi_power(1.5))
    assert not rep["convex"]  # value splice below m = 2 kinks


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_json_roundtrip():
    for phi in (PHI2, phi_power(3.0), POIS_NAT,
                phi_tabulated([0.0, 1.0, 2.0], [0.0, 0.5, 2.0])):
        blob = json.dumps(phi.to_json())
        back = GeneratingFunction.from_json(json.loads(blob))
        grid = np.linspace(0.0, min(phi.lambda0 * 0.99, 3.0), 7)
        assert np.allclose(phi(grid), back(grid), rtol=1e-12)


def test_parse_phi_specs():
    assert parse_phi("subgaussian").family == "subgaussian"
    assert parse_phi("power:3").m == 3.0
    assert parse_phi("natural:rademacher").dist.law == "rademacher"
    with pytest.raises(DomainError):
        parse_phi("nope")
