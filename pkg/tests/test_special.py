import cmath
import math

import numpy as np
import pytest
from scipy.special import ellipj, ellipk, gamma

from qmk.algebra import QSpec, RatFunc
from qmk.parser import parse_equation
from qmk.rational import solve_riccati_B
from qmk.special import (
    PoleProximity, SolutionFamily, agm_K, build_punctured_product, build_riccati_solution,
    elliptic_context, family_from_ratfunc, fit_kappa, jacobi_sn, jacobi_sncndn,
    maclaurin_coefficients, punctured_product_report, residual, sample_regular_points,
    sn_maclaurin_expected, sn_ode_residual, sn_product, weierstrass_p, weierstrass_pair,
)

KS = (0.3, 0.5, 0.8)


def sn_complex_oracle(x, y, k):
    """sn(x + iy) from real-argument scipy values and the addition theorem."""
    s, c, d, _ = ellipj(x, k * k)
    s1, c1, d1, _ = ellipj(y, 1 - k * k)
    den = c1 ** 2 + k * k * s * s * s1 * s1
    return (s * d1 + 1j * c * d * s1 * c1) / den


@pytest.mark.parametrize("k", KS)
def test_complete_integrals(k):
    K, Kp = agm_K(k)
    assert abs(K - ellipk(k * k)) < 1e-14
    assert abs(Kp - ellipk(1 - k * k)) < 1e-14


def test_lemniscatic_value():
    K, Kp = agm_K(1 / math.sqrt(2))
    expect = gamma(0.25) ** 2 / (4 * math.sqrt(math.pi))
    assert abs(K - expect) < 1e-14 and abs(Kp - expect) < 1e-14


def test_bad_modulus():
    with pytest.raises(ValueError):
        agm_K(1.0)
    with pytest.raises(ValueError):
        jacobi_sn(0.3, 1.2)


@pytest.mark.parametrize("k", KS)
def test_real_axis_against_scipy(k):
    u = np.linspace(-9, 9, 73)
    s, c, d = jacobi_sncndn(u, k)
    S, C, D, _ = ellipj(u, k * k)
    assert np.max(np.abs(s - S)) < 1e-12
    assert np.max(np.abs(c - C)) < 1e-12
    assert np.max(np.abs(d - D)) < 1e-12


@pytest.mark.parametrize("k", KS)
def test_complex_against_addition_theorem(k):
    rng = np.random.default_rng(11)
    K, Kp = agm_K(k)
    x = rng.uniform(-2 * K, 2 * K, 60)
    y = rng.uniform(-0.8 * Kp, 0.8 * Kp, 60)
    ours = jacobi_sn(x + 1j * y, k)
    ref = sn_complex_oracle(x, y, k)
    assert np.max(np.abs(ours - ref) / (1 + np.abs(ref))) < 1e-10


def test_special_values():
    k = 0.5
    ctx = elliptic_context(k)
    s, c, d = jacobi_sncndn(ctx.K, k)
    assert abs(s - 1) < 1e-14 and abs(c) < 1e-14 and abs(d - math.sqrt(1 - k * k)) < 1e-14


def test_modulus_zero_is_sine():
    u = np.linspace(-5, 5, 41) + 0.4j
    assert np.max(np.abs(jacobi_sn(u, 0.0) - np.sin(u))) < 1e-10


@pytest.mark.parametrize("k", KS)
def test_odd_and_periodic(k):
    K, Kp = agm_K(k)
    u = sample_regular_points(k, 50, seed=2)
    assert np.max(np.abs(jacobi_sn(-u, k) + jacobi_sn(u, k))) < 1e-10
    assert np.max(np.abs(jacobi_sn(u + 4 * K, k) - jacobi_sn(u, k))) < 1e-8
    assert np.max(np.abs(jacobi_sn(u + 2j * Kp, k) - jacobi_sn(u, k))) < 1e-8


@pytest.mark.parametrize("k", KS)
def test_ode_residual(k):
    assert sn_ode_residual(k, sample_regular_points(k, 100, seed=5)) < 1e-8


@pytest.mark.parametrize("k", KS)
def test_maclaurin(k):
    K, Kp = agm_K(k)
    c = maclaurin_coefficients(lambda u: jacobi_sn(u, k), 6, 0.5 * min(K, Kp))
    for j, v in sn_maclaurin_expected(k).items():
        assert abs(c[j] - v) < 1e-6
    assert np.max(np.abs(c[[0, 2, 4, 6]])) < 1e-10


@pytest.mark.parametrize("k", KS)
def test_product_agrees_with_landen(k):
    u = sample_regular_points(k, 40, seed=4)
    assert np.max(np.abs(sn_product(u, k) - jacobi_sn(u, k))) < 1e-10


def test_pole_proximity():
    ctx = elliptic_context(0.5)
    with pytest.raises(PoleProximity) as exc:
        jacobi_sn(1j * ctx.K_prime + 1e-9, 0.5, pole_tol=1e-6)
    assert exc.value.distance < 1e-6


def test_weierstrass():
    rng = np.random.default_rng(3)
    z = rng.uniform(-1, 1, 50) + 1j * rng.uniform(-1, 1, 50)
    p, dp = weierstrass_p(z)
    assert np.max(np.abs(dp ** 2 - 4 * p ** 3 + 1) / (1 + np.abs(dp) ** 2)) < 1e-9
    # p' against a fourth-order central difference of p, away from the double pole
    w = z[np.abs(z) > 0.3]
    h = 1e-3
    P = lambda x: weierstrass_p(x)[0]
    fd = (8 * (P(w + h) - P(w - h)) - (P(w + 2 * h) - P(w - 2 * h))) / (12 * h)
    dpw = weierstrass_p(w)[1]
    assert np.max(np.abs(fd - dpw) / (1 + np.abs(dpw))) < 1e-7
    # Laurent start 1/z^2
    assert abs(weierstrass_p(1e-3)[0] * 1e-6 - 1) < 1e-6
    H, G = weierstrass_pair(z)
    assert np.max(np.abs(H ** 3 + G ** 3 - 1)) < 1e-9


RICCATI = "f(qz) = (f + A)/(1 - f)"


def riccati_residual(a1, a2, q, branch=0, literal=False):
    sol = build_riccati_solution(a1, a2, q, branch, literal)
    A = sol.params["A"]
    eq = parse_equation(RICCATI, QSpec.generic(adjoin_i=True), {"A": _exact(A)})
    rng = np.random.default_rng(8)
    pts = rng.uniform(-3, 3, 100) + 1j * rng.uniform(-3, 3, 100)
    return sol, residual(eq, sol, pts, q=q)


def _exact(A):
    from fractions import Fraction
    re = Fraction(A.real).limit_denominator(10 ** 9)
    im = Fraction(A.imag).limit_denominator(10 ** 9)
    return f"({re}) + ({im})*i" if im else f"({re})"


def test_riccati_parameters():
    sol = build_riccati_solution(1, 2, 2)
    assert abs(sol.params["b"] + 0.8) < 1e-15
    assert abs(sol.params["A"] + 16 / 25) < 1e-15


@pytest.mark.parametrize("a1,a2,q", [(1, 2, 2), (1 + 1j, 0.5, 3j), (2, -0.3, 0.5), (1, 3, -2)])
def test_riccati_residual(a1, a2, q):
    _, rep = riccati_residual(a1, a2, q)
    assert rep["max_residual"] < 1e-9
    assert rep["n_points"] >= 30


def test_riccati_branch_shift():
    s0, r0 = riccati_residual(1, 2, 2, 0)
    s1, r1 = riccati_residual(1, 2, 2, 1)
    assert abs(s1.params["a"] - s0.params["a"] - 2j * math.pi) < 1e-12
    assert r1["max_residual"] < 1e-9


def test_riccati_literal_offsets_fail():
    # denominators offset by a2 instead of a1 do not give a solution
    _, rep = riccati_residual(1, 2, 2, literal=True)
    assert rep["max_residual"] > 1e-2


def test_riccati_degenerate():
    with pytest.raises(ValueError):
        build_riccati_solution(1, 1, 2)
    with pytest.raises(ValueError):
        build_riccati_solution(1, -1, 2)


def test_residual_exact_rational_and_perturbed():
    spec = QSpec.root_of_unity(4)
    res = solve_riccati_B(1, spec, 2)
    eq = parse_equation("f(qz) = 1/f", spec)
    fam = family_from_ratfunc(res.families[0].member([1, 2]))
    rng = np.random.default_rng(1)
    pts = rng.uniform(-2, 2, 60) + 1j * rng.uniform(-2, 2, 60)
    assert residual(eq, fam, pts)["max_residual"] < 1e-12
    bad = SolutionFamily("perturbed", lambda z: fam(z) + 1e-3, "perturbed", fam.q)
    assert residual(eq, bad, pts)["max_residual"] > 1e-4


def test_punctured_product():
    rep = punctured_product_report(0.5, 1, 40)
    assert rep["consistency_max"] < 1e-6
    assert rep["single_valued_diff"] < 1e-8
    assert rep["truncation_bound"] < 1e-100
    sh = rep["kappa_shifted_q"]
    assert sh["spread"] < 1e-6 and abs(sh["kappa"] - 4.0) < 1e-9


def test_punctured_product_literal_multiplier_gives_no_constant_kappa():
    rep = punctured_product_report(0.5, 1, 40)
    assert rep["kappa_literal_q"]["spread"] > 1e-2


@pytest.mark.parametrize("k,m", [(0.3, 2), (0.8, -1)])
def test_half_period_kappa(k, m):
    rep = punctured_product_report(k, m, 40)
    assert abs(rep["kappa_shifted_q"]["kappa"] - 1 / k ** 2) < 1e-8


def test_punctured_product_preconditions():
    with pytest.raises(ValueError):
        build_punctured_product(0.5, 0, 40)
    with pytest.raises(ValueError):
        build_punctured_product(0.5, 1, 5)
