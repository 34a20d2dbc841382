"""Elliptic functions and closed-form solution families, all in double precision.

* complete elliptic integrals by the arithmetic-geometric mean
* Jacobi sn, cn, dn by descending Landen transformation (vectorised)
* sn from the nome product as an independent cross-check
* the Weierstrass pair H, G with H^3 + G^3 = 1 (lattice g2 = 0, g3 = 1)
* closed-form solutions of the q-Riccati normal form and the punctured-plane
  product solution of f(qz)^2 = (f^2 - kappa)/(f^2 - 1)
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .parser import QDiffEquation

DEFAULT_POLE_TOL = 1e-3


class PoleProximity(ArithmeticError):
    """Evaluation point lies too close to a pole."""

    def __init__(self, msg: str, distance: float):
        super().__init__(f"{msg} (distance {distance:.3e})")
        self.distance = distance


# -- complete integrals ----------------------------------------------------------

def agm(a: float, b: float, tol: float = 1e-16) -> float:
    for _ in range(64):
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        if abs(a - b) <= tol * a:
            break
    return 0.5 * (a + b)


def _K(k: float) -> float:
    return math.pi / (2.0 * agm(1.0, math.sqrt((1.0 - k) * (1.0 + k))))


def agm_K(k: float) -> tuple:
    """(K(k), K'(k)) with K'(k) = K(sqrt(1 - k^2))."""
    k = float(k)
    if not 0.0 < k < 1.0:
        raise ValueError("modulus must lie in (0, 1)")
    return _K(k), _K(math.sqrt((1.0 - k) * (1.0 + k)))


@dataclass(frozen=True)
class EllipticContext:
    k: float
    K: float
    K_prime: float

    @property
    def tau(self) -> complex:
        return 1j * self.K_prime / self.K

    @property
    def nome(self) -> float:
        return math.exp(-math.pi * self.K_prime / self.K)


def elliptic_context(k: float) -> EllipticContext:
    K, Kp = agm_K(k)
    return EllipticContext(float(k), K, Kp)


# -- Jacobi functions ------------------------------------------------------------

def _landen(u, k: float):
    """sn, cn, dn of complex arrays by descending Landen steps."""
    ks = []
    kk = k
    while kk > 1e-16 and len(ks) < 40:
        kp = math.sqrt((1.0 - kk) * (1.0 + kk))
        k1 = (1.0 - kp) / (1.0 + kp)
        ks.append(k1)
        kk = k1
    w = u
    for k1 in ks:
        w = w / (1.0 + k1)
    sn, cn, dn = np.sin(w), np.cos(w), np.ones_like(w)
    for k1 in reversed(ks):
        s2 = k1 * sn * sn
        den = 1.0 + s2
        # dn^2 = 1 - k1^2 sn^2 turns the usual dn step into a cancellation-free ratio
        sn, cn, dn = (1.0 + k1) * sn / den, cn * dn / den, (1.0 - s2) / den
    return sn, cn, dn


def _reduce(u, K: float, Kp: float):
    """Shift u into the period cell |Re u| <= 2K, |Im u| <= K'.

    sn has periods 4K and 2iK', cn has 4K and 2K+2iK', dn has 2K and 4iK';
    the returned signs restore cn and dn after the shift.
    """
    a = np.round(u.real / (4.0 * K))
    b = np.round(u.imag / (2.0 * Kp))
    r = u - 4.0 * K * a - 2j * Kp * b
    odd = np.mod(b, 2.0) != 0
    cn_sign = np.where(odd, -1.0, 1.0)
    dn_sign = np.where(odd, -1.0, 1.0)
    return r, cn_sign, dn_sign


def _pole_distance(r, K: float, Kp: float):
    """Distance of reduced points to the nearest pole 2mK + (2n+1)iK'."""
    best = np.full(r.shape, np.inf)
    for m in (-1, 0, 1):
        for n in (-1, 0):
            p = 2 * m * K + (2 * n + 1) * 1j * Kp
            best = np.minimum(best, np.abs(r - p))
    return best


def jacobi_sncndn(u, k: float, pole_tol: float | None = 0.0):
    """(sn, cn, dn)(u, k) for complex scalars or arrays, 0 <= k < 1.

    ``pole_tol`` raises PoleProximity when a point is closer than that to a pole;
    None disables the check.
    """
    k = float(k)
    if not 0.0 <= k < 1.0:
        raise ValueError("modulus must lie in [0, 1)")
    scalar = np.isscalar(u)
    z = np.asarray(u, dtype=complex)
    if k == 0.0:
        out = (np.sin(z), np.cos(z), np.ones_like(z))
    else:
        K, Kp = agm_K(k)
        r, cs, ds = _reduce(z, K, Kp)
        if pole_tol is not None and pole_tol > 0:
            d = _pole_distance(r, K, Kp)
            if np.any(d < pole_tol):
                raise PoleProximity("sn evaluated next to a pole", float(np.min(d)))
        sn, cn, dn = _landen(r, k)
        out = (sn, cn * cs, dn * ds)
    if scalar:
        return tuple(complex(x) for x in out)
    return out


def jacobi_sn(u, k: float, pole_tol: float | None = 0.0):
    return jacobi_sncndn(u, k, pole_tol)[0]


def sn_product(u, k: float, n_trunc: int = 40):
    """sn from the nome product, an algorithm independent of the Landen recursion."""
    ctx = elliptic_context(k)
    nq = ctx.nome
    z = np.asarray(u, dtype=complex)
    x = math.pi * z / (2.0 * ctx.K)
    c = np.cos(2.0 * x)
    val = 2.0 * nq ** 0.25 / math.sqrt(k) * np.sin(x)
    for n in range(1, n_trunc + 1):
        val = val * (1 - 2 * nq ** (2 * n) * c + nq ** (4 * n)) / (
            1 - 2 * nq ** (2 * n - 1) * c + nq ** (4 * n - 2))
    return complex(val) if np.isscalar(u) else val


def maclaurin_coefficients(func: Callable, order: int, radius: float, n_points: int = 256):
    """Taylor coefficients c_0..c_order from a discrete Cauchy integral on |z| = radius."""
    theta = 2.0 * np.pi * np.arange(n_points) / n_points
    z = radius * np.exp(1j * theta)
    vals = np.asarray(func(z), dtype=complex)
    coeffs = np.fft.fft(vals) / n_points
    return np.array([coeffs[j] / radius ** j for j in range(order + 1)])


def sn_maclaurin_expected(k: float) -> dict:
    """Nonzero Taylor coefficients of sn(u, k) through u^5."""
    k2 = k * k
    return {1: 1.0, 3: -(1 + k2) / 6.0, 5: (1 + 14 * k2 + k2 * k2) / 120.0}


# -- Weierstrass pair --------------------------------------------------------------

_E2 = 4.0 ** (-1.0 / 3.0)          # real root of 4t^3 - 1
_H2 = math.sqrt(3.0) * _E2
_M = 0.5 - math.sqrt(3.0) / 4.0     # parameter m = k^2 of the auxiliary sn


def weierstrass_p(z, pole_tol: float | None = 1e-8):
    """(p, p') for the lattice with g2 = 0, g3 = 1 through Jacobi functions."""
    zz = np.asarray(z, dtype=complex)
    u = zz * math.sqrt(_H2)
    s, c, d = jacobi_sncndn(u, math.sqrt(_M), pole_tol=None)
    if pole_tol is not None and np.any(np.abs(s) < pole_tol):
        raise PoleProximity("p evaluated next to a lattice point", float(np.min(np.abs(s))))
    s2 = s * s
    p = _E2 + _H2 * (1 - s2) / (s2 * (1 - _M * s2))
    dp = -2.0 * _H2 ** 1.5 * c * (1 - 2 * _M * s2 + _M * s2 * s2) / (s2 * s * d ** 3)
    if np.isscalar(z):
        return complex(p), complex(dp)
    return p, dp


def weierstrass_pair(z, pole_tol: float | None = 1e-8):
    """(H, G) with H = (1 + p'/sqrt3)/(2p), G = (1 - p'/sqrt3)/(2p)."""
    p, dp = weierstrass_p(z, pole_tol)
    r3 = math.sqrt(3.0)
    if pole_tol is not None and np.any(np.abs(p) < pole_tol):
        raise PoleProximity("p vanishes here", float(np.min(np.abs(p))))
    H = (1 + dp / r3) / (2 * p)
    G = (1 - dp / r3) / (2 * p)
    return H, G


# -- solution families --------------------------------------------------------------

@dataclass
class SolutionFamily:
    """A concrete solution with a numpy evaluator.

    ``valid`` returns a boolean mask of points where the evaluator may be used
    for a residual check (away from poles and branch cuts).  ``q`` is the
    multiplier of the equation the family solves.
    """

    kind: str
    evaluator: Callable
    provenance: str
    q: complex
    params: dict = dc_field(default_factory=dict)
    valid: Callable | None = None

    def __call__(self, z):
        return self.evaluator(z)


def _principal_log(z):
    return np.log(np.asarray(z, dtype=complex))


def build_riccati_solution(a1: complex, a2: complex, q: complex, branch: int = 0,
                           literal: bool = False) -> SolutionFamily:
    """Closed-form solution of f(qz) = (f + A)/(1 - f) with A = -b^2.

    b = -2 a1 a2/(a1^2 + a2^2) and X(z) = exp((a/log q) Log z) with
    a = Log((a1 - a2)^2/(a1 + a2)^2) + 2 pi i branch, so X(qz) = e^a X(z).
    The solution is f = -b (X - a1)/(X + a1).  ``literal=True`` evaluates
    -b (X - a1)/(X + a2) instead, which solves the equation only when a1 = a2.
    """
    a1, a2, q = complex(a1), complex(a2), complex(q)
    if a1 == 0 or a2 == 0:
        raise ValueError("a1 and a2 must be nonzero")
    if a1 * a1 + a2 * a2 == 0:
        raise ValueError("a1^2 + a2^2 must be nonzero")
    if abs(a1 - a2) < 1e-300 or abs(a1 + a2) < 1e-300:
        raise ValueError("degenerate parameters: a1 = +-a2")
    b = -2 * a1 * a2 / (a1 * a1 + a2 * a2)
    a = cmath.log((a1 - a2) ** 2 / (a1 + a2) ** 2) + 2j * math.pi * branch
    lq = cmath.log(q)
    expo = a / lq
    off = a2 if literal else a1

    def f(z):
        X = np.exp(expo * _principal_log(z))
        return -b * (X - a1) / (X + off)

    def valid(z):
        z = np.asarray(z, dtype=complex)
        ok = np.abs(np.angle(z) + cmath.phase(q)) < math.pi - 1e-9
        X = np.exp(expo * _principal_log(z))
        Xq = np.exp(expo * _principal_log(q * z))
        ok &= np.abs(X + off) > DEFAULT_POLE_TOL * (1 + abs(off))
        ok &= np.abs(Xq + off) > DEFAULT_POLE_TOL * (1 + abs(off))
        return ok

    return SolutionFamily(
        "riccati-formula", f, "closed-form q-Riccati solution with kappa = 1", q,
        {"a1": a1, "a2": a2, "branch": branch, "b": b, "A": -b * b, "a": a,
         "literal": literal},
        valid,
    )


def build_sn_composition(k: float, inner: Callable, q: complex = 0j,
                         provenance: str = "sn composed with an entire map") -> SolutionFamily:
    def f(z):
        return jacobi_sn(inner(np.asarray(z, dtype=complex)), k, pole_tol=None)

    return SolutionFamily("sn-composition", f, provenance, q, {"k": k})


def build_punctured_product(k: float, m: int, n_trunc: int = 40) -> SolutionFamily:
    """Nome-product solution on C - {0} with q = exp(i pi/(2 m K)).

    f(z) is the product expansion of sn evaluated at L = log z/log q, so
    f(exp(w log q)) = sn(w).  Single-valued because m is an integer.
    """
    if m == 0:
        raise ValueError("m must be a nonzero integer")
    if n_trunc < 10:
        raise ValueError("n_trunc must be at least 10")
    ctx = elliptic_context(k)
    lq = 1j * math.pi / (2 * m * ctx.K)
    q = cmath.exp(lq)

    def f(z, log_shift: int = 0):
        L = (_principal_log(z) + 2j * math.pi * log_shift) / lq
        return sn_product(L, k, n_trunc)

    nq = ctx.nome
    return SolutionFamily(
        "punctured-product", f, "nome product of sn in the variable log z/log q", q,
        {"k": k, "m": m, "n_trunc": n_trunc, "K": ctx.K, "K_prime": ctx.K_prime,
         "nome": nq, "log_q": lq, "truncation_bound": 4 * nq ** (2 * n_trunc + 1) / (1 - nq)},
    )


def fit_kappa(sol: SolutionFamily, multiplier: complex, points) -> dict:
    """Fit kappa in f(Qz)^2 = (f^2 - kappa)/(f^2 - 1) at points[0], verify at the rest."""
    z = np.asarray(points, dtype=complex)
    f = np.asarray(sol(z), dtype=complex)
    fq = np.asarray(sol(multiplier * z), dtype=complex)
    kap = f * f - fq * fq * (f * f - 1)
    k0 = kap[0]
    spread = float(np.max(np.abs(kap[1:] - k0)))
    return {"multiplier": multiplier, "kappa": k0, "spread": spread}


def punctured_product_report(k: float = 0.5, m: int = 1, n_trunc: int = 40,
                             n_points: int = 20, seed: int = 7) -> dict:
    """Self-consistency and kappa experiments for the punctured-plane product."""
    sol = build_punctured_product(k, m, n_trunc)
    ctx = elliptic_context(k)
    lq = sol.params["log_q"]
    rng = np.random.default_rng(seed)
    # sample w away from the poles of sn
    w = []
    while len(w) < n_points + 1:
        c = complex(rng.uniform(-ctx.K, ctx.K), rng.uniform(-0.6 * ctx.K_prime, 0.6 * ctx.K_prime))
        w.append(c)
    w = np.array(w)
    z = np.exp(w * lq)
    direct = jacobi_sn(w, k)
    prod = sol(z)
    consistency = float(np.max(np.abs(prod - direct)))
    single = float(np.max(np.abs(sol.evaluator(z, 1) - prod)))
    literal = fit_kappa(sol, sol.q, z)
    Q = cmath.exp((ctx.K + 1j * ctx.K_prime) * lq)
    shifted = fit_kappa(sol, Q, z)
    conv = []
    for nt in (10, 20, 40, 80):
        s2 = build_punctured_product(k, m, nt)
        conv.append((nt, float(np.max(np.abs(s2(z) - direct)))))
    return {
        "k": k, "m": m, "n_trunc": n_trunc, "q": sol.q,
        "consistency_max": consistency,
        "single_valued_diff": single,
        "truncation_bound": sol.params["truncation_bound"],
        "kappa_literal_q": literal,
        "kappa_shifted_q": {**shifted, "kappa_expected": 1 / k ** 2},
        "convergence": conv,
    }


# -- residual validator -------------------------------------------------------------

def residual(eq: QDiffEquation, sol: SolutionFamily, points, q: complex | None = None,
             pole_tol: float = DEFAULT_POLE_TOL) -> dict:
    """max |f(qz)^n - R(z, f(z))| over points, skipping points near singularities."""
    z = np.asarray(points, dtype=complex)
    qv = q if q is not None else (eq.qspec.value if eq.qspec.value is not None else sol.q)
    R = eq.alg.compile(eq.R)
    mask = np.ones(z.shape, dtype=bool)
    if sol.valid is not None:
        mask &= sol.valid(z)
    with np.errstate(all="ignore"):
        f = np.asarray(sol(z), dtype=complex)
        fq = np.asarray(sol(qv * z), dtype=complex)
        mask &= np.isfinite(f) & np.isfinite(fq)
        mask &= (np.abs(f) < 1 / pole_tol) & (np.abs(fq) < 1 / pole_tol)
        rhs = R(z, f, qv)
        mask &= np.isfinite(rhs)
    if not np.any(mask):
        raise ValueError("all sample points were filtered out")
    res = np.abs(fq ** eq.n - rhs)
    res = np.where(mask, res, -1.0)
    j = int(np.argmax(res))
    return {
        "max_residual": float(res[j]),
        "worst_point": complex(z[j]),
        "n_points": int(np.sum(mask)),
        "n_filtered": int(z.size - np.sum(mask)),
    }


def family_from_ratfunc(r, q: complex | None = None, kind: str = "rational") -> SolutionFamily:
    """Numeric evaluator for an exact rational solution."""
    qv = q if q is not None else r.alg.spec.value
    fn = r.alg.compile(r.el)

    def f(z):
        return fn(z, 0.0, qv)

    return SolutionFamily(kind, f, "exact rational solution", qv, {"text": r.to_text()})


def central_derivative(func: Callable, u, h: float = 1e-3):
    """Fourth-order central difference f'(u)."""
    u = np.asarray(u, dtype=complex)
    return (8 * (func(u + h) - func(u - h)) - (func(u + 2 * h) - func(u - 2 * h))) / (12 * h)


def sn_ode_residual(k: float, points) -> float:
    """max |sn'^2 - (1 - sn^2)(1 - k^2 sn^2)| / (1 + |sn|)^4 with sn' by central differences."""
    u = np.asarray(points, dtype=complex)
    fn = lambda x: jacobi_sn(x, k, pole_tol=None)
    s = fn(u)
    d = central_derivative(fn, u)
    res = np.abs(d * d - (1 - s * s) * (1 - k * k * s * s)) / (1 + np.abs(s)) ** 4
    return float(np.max(res))


def sample_regular_points(k: float, n: int, seed: int = 0, margin: float = 0.2) -> np.ndarray:
    """Random points in a period cell, kept ``margin * K'`` away from the poles of sn."""
    ctx = elliptic_context(k)
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        u = complex(rng.uniform(-2 * ctx.K, 2 * ctx.K), rng.uniform(-ctx.K_prime, ctx.K_prime))
        if _pole_distance(np.array([u]), ctx.K, ctx.K_prime)[0] > margin * ctx.K_prime:
            out.append(u)
    return np.array(out)
