"""Classification of f(qz)^n = R(z, f) against the thirteen canonical forms.

Matching works on the normalised coefficient lists of R = N(f)/D(f) (D monic
in f).  For each form a small extractor proposes the transformation parameter
and the form parameters from a few coefficients; the proposal is accepted only
if rebuilding the transformed canonical equation reproduces R exactly.

Transformations follow the convention that ``scale`` with parameter alpha means
the canonical equation holds for g = alpha*f, and ``inverse`` means it holds for
g = 1/(alpha*f).  Forms whose right-hand side depends only on g^e carry
A = alpha^e instead of alpha, so algebraic alpha with rational alpha^e is
covered without algebraic-function arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from .algebra import Algebra, DivisionByZero, QSpec, RatFunc, get_algebra
from .parser import QDiffEquation

FORM_IDS = (
    "Q-LINEAR", "Q-RICCATI", "FERMAT-SINE", "FERMAT-MOBIUS", "FERMAT-SHIFT3",
    "SN-KAPPA", "FERMAT-CUBIC-INV", "C1-DELTA1", "C2-DELTA2", "C3-DELTA3",
    "C4-DELTA4", "C5-CUBIC", "C6-DELTA5",
)

# exponent n of f(qz) and the power of alpha the form depends on
FORM_N = {
    "Q-LINEAR": 1, "Q-RICCATI": 1, "FERMAT-SINE": 2, "FERMAT-MOBIUS": 2,
    "FERMAT-SHIFT3": 2, "SN-KAPPA": 2, "FERMAT-CUBIC-INV": 3, "C1-DELTA1": 2,
    "C2-DELTA2": 2, "C3-DELTA3": 2, "C4-DELTA4": 2, "C5-CUBIC": 3, "C6-DELTA5": 2,
}
FORM_POWER = {
    "Q-LINEAR": 1, "Q-RICCATI": 1, "FERMAT-SINE": 2, "FERMAT-MOBIUS": 2,
    "FERMAT-SHIFT3": 1, "SN-KAPPA": 2, "FERMAT-CUBIC-INV": 3, "C1-DELTA1": 2,
    "C2-DELTA2": 2, "C3-DELTA3": 2, "C4-DELTA4": 2, "C5-CUBIC": 3, "C6-DELTA5": 1,
}

ZERO_ORDER_POSSIBLE = "ZERO-ORDER-POSSIBLE"
NO_TRANSCENDENTAL = "NO-TRANSCENDENTAL-WHEN-|q|≠1"
NO_ZERO_ORDER = "NO-ZERO-ORDER"
UNCLASSIFIED = "UNCLASSIFIED"

THEOREM_SET = {"Q-LINEAR", "Q-RICCATI", "FERMAT-MOBIUS"}
COROLLARY_SET = THEOREM_SET | {"FERMAT-SINE", "FERMAT-SHIFT3"}

DEGREE3_NOTE = "match up to unimplemented degree-3 scaling"


class DegenerateParameter(ValueError):
    """A parameter takes an excluded value (for example d = -1 in the C1 rewrite)."""


@dataclass(frozen=True)
class CanonicalForm:
    id: str
    params: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if self.id not in FORM_IDS:
            raise ValueError(f"unknown canonical form {self.id!r}")

    @property
    def n(self) -> int:
        return FORM_N[self.id]


@dataclass(frozen=True)
class Transformation:
    """``kind`` is identity, scale or inverse; ``value`` holds alpha**power."""

    kind: str
    power: int = 1
    value: RatFunc | None = None
    alpha: RatFunc | None = None

    def describe(self) -> str:
        if self.kind == "identity":
            return "identity"
        name = "alpha" if self.power == 1 else f"alpha^{self.power}"
        a = f", alpha={self.alpha.to_text()}" if self.alpha is not None and self.power > 1 else ""
        return f"{self.kind} {name}={self.value.to_text()}{a}"

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind != "identity":
            d["power"] = self.power
            d["value"] = self.value.to_text()
            if self.alpha is not None:
                d["alpha"] = self.alpha.to_text()
        return d


@dataclass(frozen=True)
class Witness:
    form: CanonicalForm
    transformation: Transformation
    residuals: tuple = ()

    @property
    def constraints_hold(self) -> bool:
        return all(r is not None and r.is_zero for _, r in self.residuals)


@dataclass
class ClassificationReport:
    malmquist: bool
    deg_f: int
    n: int
    canonical: CanonicalForm | None = None
    transformation: Transformation | None = None
    alternatives: list = dc_field(default_factory=list)
    constraint_residuals: list = dc_field(default_factory=list)
    verdict: str = UNCLASSIFIED
    constant_coefficients: bool = False
    notes: list = dc_field(default_factory=list)

    def to_dict(self) -> dict:
        d = {
            "malmquist": self.malmquist,
            "deg_f": self.deg_f,
            "n": self.n,
            "constant_coefficients": self.constant_coefficients,
            "verdict": self.verdict,
        }
        if self.canonical is not None:
            d["canonical"] = {
                "id": self.canonical.id,
                "params": {k: _param_text(v) for k, v in self.canonical.params.items()},
            }
            d["transformation"] = self.transformation.to_dict()
            if self.alternatives:
                d["alternatives"] = [
                    {"params": {k: _param_text(v) for k, v in w.form.params.items()},
                     "transformation": w.transformation.to_dict()}
                    for w in self.alternatives
                ]
        if self.constraint_residuals:
            d["constraint_residuals"] = [
                {"id": cid, "residual": None if r is None else r.to_text(),
                 "zero": None if r is None else r.is_zero}
                for cid, r in self.constraint_residuals
            ]
        if self.notes:
            d["notes"] = list(self.notes)
        return d


def _param_text(v):
    if isinstance(v, RatFunc):
        return v.to_text()
    return v


# -- canonical right-hand sides ------------------------------------------------

def canonical_rhs(form: CanonicalForm, alg: Algebra):
    """R(z, g) of the canonical equation as a field element in the generator f."""
    p = {k: alg.const(v) for k, v in form.params.items() if v is not None}
    g = alg.f
    one = alg.one
    fid = form.id
    if fid == "Q-LINEAR":
        return p["a1"] * g + p["a2"]
    if fid == "Q-RICCATI":
        return (p["b1"] * g + p["b2"]) / (g + p["b3"])
    if fid == "FERMAT-SINE":
        return one - g ** 2
    if fid == "FERMAT-MOBIUS":
        d = p["delta"]
        return one - ((d * g - 1) / (g - d)) ** 2
    if fid == "FERMAT-SHIFT3":
        return one - ((g + 3) / (g - 1)) ** 2
    if fid == "SN-KAPPA":
        return (g ** 2 - p["kappa"]) / (g ** 2 - 1)
    if fid == "FERMAT-CUBIC-INV":
        return one - g ** -3
    if fid == "C1-DELTA1":
        return p["delta1"] * (g ** 2 - 1)
    if fid == "C2-DELTA2":
        return p["delta2"] * (one - g ** -2)
    if fid == "C3-DELTA3":
        return (alg.shift(p["delta3"], 1) * g ** 2 - 1) / (g ** 2 - 1)
    if fid == "C4-DELTA4":
        t, d = p["theta"], p["delta4"]
        return t * (g ** 2 - d * g + 1) / (g ** 2 + d * g + 1)
    if fid == "C5-CUBIC":
        return one - g ** 3
    d = p["delta5"]
    c = (1 + d) ** 2 / (2 * (1 + d ** 2))
    return c * (g - 1) * (g - d ** 2) / (g - d) ** 2


def canonical_equation(form: CanonicalForm, qspec: QSpec) -> QDiffEquation:
    alg = get_algebra(qspec)
    return QDiffEquation(form.n, canonical_rhs(form, alg), qspec)


def apply_transformation(form: CanonicalForm, alpha, kind: str, qspec: QSpec) -> QDiffEquation:
    """Equation for f when the canonical equation holds for g = alpha*f (scale)
    or g = 1/(alpha*f) (inverse)."""
    alg = get_algebra(qspec)
    a = alg.const(alpha)
    if a == 0:
        raise ValueError("alpha must be nonzero")
    rhs = canonical_rhs(form, alg)
    n = form.n
    Sa = alg.shift(a, 1) ** n
    if kind in ("scale", "identity"):
        R = alg.subs_f(rhs, a * alg.f) / Sa
    elif kind == "inverse":
        R = 1 / (Sa * alg.subs_f(rhs, 1 / (a * alg.f)))
    else:
        raise ValueError(f"unknown transformation kind {kind!r}")
    return QDiffEquation(n, R, qspec)


# -- constraints -----------------------------------------------------------------

CONSTRAINT_IDS = ("C1", "C2", "C3", "C4", "C5")


def check_constraint(cid: str, d: RatFunc, theta: int | None = None) -> RatFunc:
    """Residual LHS - RHS of a coefficient constraint with d(qz) = q_shift(d, 1)."""
    s = d.q_shift(1)
    if cid == "C1":
        return s * (d + 1) + 1
    if cid == "C2":
        return s * d - (s + d)
    if cid == "C3":
        return s * d - 1
    if cid == "C4":
        if theta not in (1, -1):
            raise ValueError("C4 needs theta = +1 or -1")
        return s * (d - 4) - (2 * (1 - theta) * d - 8 * (1 + theta))
    if cid == "C5":
        return 8 * s ** 4 * (d ** 2 + 1) * d - (d + 1) ** 4
    raise ValueError(f"unknown constraint id {cid!r}")


def delta5_constant_roots(tol: float = 1e-10) -> list:
    """Roots of 8x^7 + 8x^5 - (x+1)^4 other than 0, +-1, +-i, Newton-polished."""
    coeffs = np.array([8, 0, 8, -1, -4, -6, -4, -1], dtype=complex)
    dcoeffs = np.polyder(coeffs)
    out = []
    for r in np.roots(coeffs):
        for _ in range(20):
            fr = np.polyval(coeffs, r)
            dr = np.polyval(dcoeffs, r)
            if dr == 0:
                break
            step = fr / dr
            r = r - step
            if abs(step) < 1e-16 * max(1.0, abs(r)):
                break
        if any(abs(r - x) < 1e-8 for x in (0, 1, -1, 1j, -1j)):
            continue
        out.append(complex(r))
    out.sort(key=lambda c: (round(c.real, 12), round(c.imag, 12)))
    for r in out:
        res = abs(8 * r ** 7 + 8 * r ** 5 - (r + 1) ** 4)
        if res >= tol:
            raise ArithmeticError(f"root {r} has residual {res}")
    return out


# -- iteration and transformation identities -------------------------------------------

def iterate_identity(form, d0=None) -> dict:
    """Compose the C1 or C2 equation with itself in the field Q(d0).

    With ``d0`` left symbolic the shifted coefficients d_k are rewritten through
    the constraint (C1: d_{k+1} = -1/(d_k+1); C2: d_{k+1} = d_k/(d_k-1)) and the
    iterates of X = f^2 are returned as text.  A concrete rational ``d0`` is
    substituted before iterating.
    """
    from sympy import QQ
    from sympy.polys.fields import field

    fid = form.id if isinstance(form, CanonicalForm) else form
    if d0 is None and isinstance(form, CanonicalForm):
        key = "delta1" if fid == "C1-DELTA1" else "delta2"
        v = form.params.get(key)
        if isinstance(v, RatFunc) and v.is_constant and v.alg.domain == QQ:
            d0 = Fraction(str(v.el.numer.LC / v.el.denom.LC))
    if fid not in ("C1-DELTA1", "C2-DELTA2"):
        raise ValueError("iteration identities exist for C1-DELTA1 and C2-DELTA2 only")
    K, d, X = field("d0,X", QQ)
    cur_d = d if d0 is None else K(QQ(Fraction(d0).numerator, Fraction(d0).denominator))
    steps = 3 if fid == "C1-DELTA1" else 4
    xs = [X]
    ds = [cur_d]
    for k in range(steps):
        dk = ds[-1]
        if fid == "C1-DELTA1":
            xs.append(dk * (xs[-1] - 1))
            if dk == -1:
                raise DegenerateParameter(f"d_{k} = -1 makes the C1 rewrite undefined")
            ds.append(-1 / (dk + 1))
        else:
            if xs[-1] == 0:
                raise DegenerateParameter("iterate vanishes")
            xs.append(dk * (xs[-1] - 1) / xs[-1])
            if dk == 1:
                raise DegenerateParameter(f"d_{k} = 1 makes the C2 rewrite undefined")
            ds.append(dk / (dk - 1))
    out = {
        "form": fid,
        "d0": "d0" if d0 is None else str(Fraction(d0)),
        "iterates": [str(x.as_expr()) for x in xs[1:]],
        "shifted_parameters": [str(x.as_expr()) for x in ds[1:]],
        "passed": xs[-1] == X,
    }
    if fid == "C1-DELTA1":
        expect = -d / (1 + d) * X + 1 if d0 is None else None
        if expect is not None:
            out["second_iterate_ok"] = xs[2] == expect
        else:
            out["second_iterate_ok"] = xs[2] == -cur_d / (1 + cur_d) * X + 1
        out["passed"] = out["passed"] and out["second_iterate_ok"]
    return out


def transform_chain(form: CanonicalForm, qspec: QSpec) -> dict:
    """Induced equation for w = f + 1/f (C4) or for g with g^2 = 1 - f^2 (C2)."""
    alg = get_algebra(qspec)
    f = alg.f
    if form.id == "C4-DELTA4":
        theta = form.params["theta"]
        theta = int(theta) if not isinstance(theta, RatFunc) else int(theta.to_complex().real)
        d = alg.const(form.params["delta4"])
        # f(qz)^2 = theta (w - d)/(w + d) and w(qz)^2 = (F + 1)^2 / F
        w = f
        F = theta * (w - d) / (w + d)
        Rw = (F + 1) ** 2 / F
        expect = 4 * w ** 2 / (w ** 2 - d ** 2) if theta == 1 else -4 * d ** 2 / (w ** 2 - d ** 2)
        # substitution check: w = f + 1/f and the C4 right-hand side
        rhs4 = canonical_rhs(form, alg)
        lhs = rhs4 + 1 / rhs4 + 2
        identity_ok = alg.eq(lhs, alg.subs_f(Rw, f + 1 / f)) and alg.eq(Rw, expect)
        A = RatFunc(alg, 1 / d ** 2)
        Sd2 = alg.shift(d, 1) ** 2
        if theta == 1:
            target, key, val, cid = "C1-DELTA1", "delta1", -Sd2 / 4, "C1"
        else:
            target, key, val, cid = "C2-DELTA2", "delta2", Sd2 / 4, "C2"
        induced = CanonicalForm(target, {key: RatFunc(alg, val)})
        rebuilt = apply_transformation(induced, 1, "identity", qspec)
        built = _rebuild(target, "inverse", A.el, {key: val}, alg)
        residual = check_constraint(cid, RatFunc(alg, val))
        return {
            "source": form.id,
            "variable": "w = f + 1/f",
            "equation": QDiffEquation(2, Rw, qspec).to_text(),
            "induced_form": target,
            "induced_params": {key: RatFunc(alg, val).to_text()},
            "transformation": Transformation("inverse", 2, A).to_dict(),
            "identity_verified": bool(identity_ok and alg.eq(built, Rw) and rebuilt.R is not None),
            "induced_constraint": cid,
            "induced_constraint_residual": residual.to_text(),
            "induced_constraint_zero": residual.is_zero,
        }
    if form.id == "C2-DELTA2":
        d2 = alg.const(form.params["delta2"])
        hat = 1 - d2  # value of the induced parameter at qz
        d3 = alg.shift(hat, -1)
        X = f ** 2
        g_rhs = (hat * X - 1) / (X - 1)  # C3 shape in X = g^2
        rhs2 = canonical_rhs(form, alg)
        identity_ok = alg.eq(_subs_square(alg, g_rhs, 1 - f ** 2), 1 - rhs2)
        induced = CanonicalForm("C3-DELTA3", {"delta3": RatFunc(alg, d3)})
        residual = check_constraint("C3", RatFunc(alg, d3))
        return {
            "source": form.id,
            "variable": "g with -g^2 = f^2 - 1",
            "equation": QDiffEquation(2, canonical_rhs(induced, alg), qspec).to_text(),
            "induced_form": "C3-DELTA3",
            "induced_params": {"delta3": RatFunc(alg, d3).to_text()},
            "transformation": Transformation("identity").to_dict(),
            "identity_verified": bool(identity_ok),
            "induced_constraint": "C3",
            "induced_constraint_residual": residual.to_text(),
            "induced_constraint_zero": residual.is_zero,
        }
    raise ValueError("transformation chains exist for C4-DELTA4 and C2-DELTA2 only")


def _subs_square(alg: Algebra, el, x2):
    """Substitute g^2 -> x2 in an element that is even in g."""
    num, den = alg.coeffs_in(el, 1)

    def ev(cs):
        acc = alg.zero
        for j in range(len(cs) - 1, -1, -1):
            if j % 2:
                if cs[j] != 0:
                    raise ValueError("element is not even in g")
                continue
            acc = acc * x2 + cs[j]
        return acc

    return ev(num) / ev(den)


# -- matching ----------------------------------------------------------------

def _coef(cs, j, zero):
    return cs[j] if 0 <= j < len(cs) else zero


def _rebuild(fid: str, kind: str, A, p: dict, alg: Algebra):
    """Transformed canonical right-hand side from (A, form parameters)."""
    f = alg.f
    e = FORM_POWER[fid]
    n = FORM_N[fid]
    SA = alg.shift(A, 1)
    if fid == "FERMAT-MOBIUS":
        if kind == "scale":
            u = p["u"]
            return (1 - u ** 2 * A) / SA * (f ** 2 - 1 / A) / (f - u) ** 2
        w = p["w"]
        return -1 / (SA * (w ** 2 * A - 1)) * (f - w) ** 2 / (f ** 2 - 1 / A)
    if fid == "C4-DELTA4":
        u = p["u"] if kind == "scale" else -p["u"]
        return p["theta"] / SA * (f ** 2 - u * f + 1 / A) / (f ** 2 + u * f + 1 / A)
    X = A * f ** e if kind == "scale" else 1 / (A * f ** e)
    one = alg.one
    if fid == "FERMAT-SINE" or fid == "C5-CUBIC":
        val = one - X
    elif fid == "SN-KAPPA":
        val = (X - p["kappa"]) / (X - 1)
    elif fid == "FERMAT-CUBIC-INV":
        val = (X - 1) / X
    elif fid == "C1-DELTA1":
        val = p["delta1"] * (X - 1)
    elif fid == "C2-DELTA2":
        val = p["delta2"] * (X - 1) / X
    elif fid == "C3-DELTA3":
        val = (p["d_shift"] * X - 1) / (X - 1)
    elif fid == "FERMAT-SHIFT3":
        val = -8 * (X + 1) / (X - 1) ** 2
    elif fid == "C6-DELTA5":
        d = p["delta5"]
        val = (1 + d) ** 2 / (2 * (1 + d ** 2)) * (X - 1) * (X - d ** 2) / (X - d) ** 2
    else:
        raise ValueError(fid)
    SAk = SA ** (n // e)
    return val / SAk if kind == "scale" else 1 / (SAk * val)


def _quad_roots(alg: Algebra, a, b, c):
    """Roots in the coefficient field of a x^2 + b x + c (a != 0)."""
    disc = b * b - 4 * a * c
    s = alg.sqrt(disc)
    if s is None:
        return []
    r1 = (-b + s) / (2 * a)
    r2 = (-b - s) / (2 * a)
    return [r1] if alg.eq(r1, r2) else [r1, r2]


def _candidates(fid: str, kind: str, N, D, alg: Algebra):
    """Proposed (A, params) pairs; params use internal names."""
    z = alg.zero
    c = lambda cs, j: _coef(cs, j, z)
    S = lambda x: alg.shift(x, 1)
    N0, N1, N2, N3 = (c(N, j) for j in range(4))
    D0, D1 = c(D, 0), c(D, 1)
    sc = kind == "scale"
    if fid in ("FERMAT-SINE", "C5-CUBIC"):
        k = 3 if fid == "C5-CUBIC" else 2
        return [(-c(N, k) / N0 if sc else -1 / D0, {})]
    if fid == "FERMAT-CUBIC-INV":
        return [(-N3 / N0 if sc else -1 / D0, {})]
    if fid == "FERMAT-SHIFT3":
        return [(-2 / D1 if sc else 1 / D1, {})]
    if fid == "SN-KAPPA":
        if sc:
            A = -1 / D0
            return [(A, {"kappa": -A * N0 / N2})]
        A = -N2 / N0
        return [(A, {"kappa": -1 / (A * D0)})]
    if fid == "C1-DELTA1":
        if sc:
            A = -N2 / N0
            return [(A, {"delta1": -N0 * S(A)})]
        A = -1 / D0
        return [(A, {"delta1": -1 / (S(A) * N2)})]
    if fid == "C2-DELTA2":
        if sc:
            A = -N2 / N0
            return [(A, {"delta2": N2 * S(A)})]
        A = -1 / D0
        return [(A, {"delta2": -1 / (S(A) * A * N0)})]
    if fid == "C3-DELTA3":
        if sc:
            A = -1 / D0
            return [(A, {"d_shift": N2 * S(A)})]
        A = -N2 / N0
        return [(A, {"d_shift": -A * D0})]
    if fid == "C4-DELTA4":
        A = 1 / D0
        u = D1 if sc else -D1
        return [(A, {"u": u, "theta": N2 * S(A)})]
    if fid == "FERMAT-MOBIUS":
        if sc:
            return [(-N2 / N0, {"u": -D1 / 2})]
        return [(-1 / D0, {"w": -N1 / (2 * N2)})]
    if fid == "C6-DELTA5":
        out = []
        if sc:
            v = -D1 / 2
            if v == 0:
                return []
            for a in _quad_roots(alg, v * v, N1 / N2, alg.one):
                out.append((a, {"delta5": v * a}))
        else:
            w = -N1 / (2 * N2)
            if w == 0:
                return []
            for a in _quad_roots(alg, w * w, D1, alg.one):
                if a != 0:
                    out.append((a, {"delta5": 1 / (w * a)}))
        return out
    return []


def _admissible(fid: str, A, p: dict, alg: Algebra) -> bool:
    if A == 0:
        return False
    one = alg.one
    if fid == "SN-KAPPA":
        return p["kappa"] != 0 and not alg.eq(p["kappa"], one)
    if fid == "C1-DELTA1":
        return p["delta1"] != 0
    if fid == "C2-DELTA2":
        return p["delta2"] != 0
    if fid == "C3-DELTA3":
        return p["d_shift"] != 0 and not alg.eq(p["d_shift"], one)
    if fid == "C4-DELTA4":
        return alg.eq(p["theta"], one) or alg.eq(p["theta"], -one)
    if fid == "FERMAT-MOBIUS":
        if "u" in p:
            d2 = p["u"] ** 2 * A
        else:
            if p["w"] == 0:
                return False
            d2 = 1 / (p["w"] ** 2 * A)
        p["delta_sq"] = d2
        return not alg.eq(d2, one)
    if fid == "C6-DELTA5":
        d = p["delta5"]
        return d != 0 and not alg.eq(d ** 2, one) and not alg.eq(d ** 2, -one)
    return True


def _finish(fid: str, kind: str, A, p: dict, alg: Algebra) -> Witness:
    """Turn internal parameters into the canonical form, transformation and residuals."""
    e = FORM_POWER[fid]
    alpha = None
    if e == 1:
        alpha = A
    elif e == 2:
        alpha = alg.sqrt(A)
    elif e == 3:
        alpha = _cube_root(alg, A)
    R = lambda x: None if x is None else RatFunc(alg, x)
    params = {}
    residuals = []
    if fid == "FERMAT-MOBIUS":
        params["delta_sq"] = R(p["delta_sq"])
        if alpha is not None:
            params["delta"] = R(p["u"] * alpha if "u" in p else 1 / (p["w"] * alpha))
    elif fid == "SN-KAPPA":
        params["kappa"] = R(p["kappa"])
        k = params["kappa"]
        residuals.append(("kappa-periodic", k.q_shift(1) - k))
    elif fid == "C1-DELTA1":
        params["delta1"] = R(p["delta1"])
        residuals.append(("C1", check_constraint("C1", params["delta1"])))
    elif fid == "C2-DELTA2":
        params["delta2"] = R(p["delta2"])
        residuals.append(("C2", check_constraint("C2", params["delta2"])))
    elif fid == "C3-DELTA3":
        params["delta3"] = R(alg.shift(p["d_shift"], -1))
        residuals.append(("C3", check_constraint("C3", params["delta3"])))
    elif fid == "C4-DELTA4":
        theta = 1 if alg.eq(p["theta"], alg.one) else -1
        params["theta"] = theta
        params["delta4_sq"] = R(p["u"] ** 2 * A)
        if alpha is not None:
            params["delta4"] = R(p["u"] * alpha)
            residuals.append(("C4", check_constraint("C4", params["delta4"], theta)))
        else:
            residuals.append(("C4", None))
    elif fid == "C6-DELTA5":
        params["delta5"] = R(p["delta5"])
        residuals.append(("C5", check_constraint("C5", params["delta5"])))
    if kind == "scale" and alg.eq(A, alg.one):
        tr = Transformation("identity", e, R(A), R(alg.one))
    else:
        tr = Transformation(kind, e, R(A), R(alpha))
    return Witness(CanonicalForm(fid, params), tr, tuple(residuals))


def _cube_root(alg: Algebra, A):
    """Exact cube root of a rational constant, else None."""
    if not (A.numer.is_ground and A.denom.is_ground):
        return None
    try:
        fr = Fraction(str(A.numer.LC / A.denom.LC))
    except (ValueError, TypeError):
        return None
    def icbrt(n):
        s = -1 if n < 0 else 1
        r = round(abs(n) ** (1 / 3))
        for c in (r - 1, r, r + 1):
            if c >= 0 and c ** 3 == abs(n):
                return s * c
        return None
    a, b = icbrt(fr.numerator), icbrt(fr.denominator)
    if a is None or b is None:
        return None
    return alg.const(Fraction(a, b))


def _match_n1(eq: QDiffEquation, N, D, alg: Algebra):
    one = RatFunc(alg, alg.one)
    if len(D) == 1 and len(N) == 2 and N[1] != 0:
        params = {"a1": RatFunc(alg, N[1]), "a2": RatFunc(alg, N[0])}
        return [Witness(CanonicalForm("Q-LINEAR", params), Transformation("identity", 1, one, one))]
    if len(D) == 2 and len(N) <= 2:
        b1 = _coef(N, 1, alg.zero)
        b2 = _coef(N, 0, alg.zero)
        b3 = D[0]
        if b1 * b3 - b2 != 0:
            params = {"b1": RatFunc(alg, b1), "b2": RatFunc(alg, b2), "b3": RatFunc(alg, b3)}
            return [Witness(CanonicalForm("Q-RICCATI", params), Transformation("identity", 1, one, one))]
    return []


def match_all(eq: QDiffEquation) -> list:
    """All verified witnesses of the first canonical id (in list order) that fits."""
    alg = eq.alg
    N, D = alg.coeffs_in(eq.R, 1)
    if eq.deg_f != eq.n:
        return []
    if eq.n == 1:
        return _match_n1(eq, N, D, alg)
    for fid in FORM_IDS[2:]:
        if FORM_N[fid] != eq.n:
            continue
        found = []
        for kind in ("scale", "inverse"):
            try:
                cands = _candidates(fid, kind, N, D, alg)
            except (ZeroDivisionError, KeyError):
                continue
            for A, p in cands:
                try:
                    if not _admissible(fid, A, p, alg):
                        continue
                    if not alg.eq(_rebuild(fid, kind, A, p, alg), eq.R):
                        continue
                except ZeroDivisionError:
                    continue
                w = _finish(fid, kind, A, p, alg)
                if all(not _same_witness(w, x) for x in found):
                    found.append(w)
        if found:
            order = {"identity": 0, "scale": 1, "inverse": 2}
            found.sort(key=lambda w: (not w.constraints_hold, order[w.transformation.kind]))
            return found
    return []


def _same_witness(a: Witness, b: Witness) -> bool:
    return (a.transformation.kind == b.transformation.kind
            and a.transformation.value == b.transformation.value
            and a.form.params.keys() == b.form.params.keys()
            and all(a.form.params[k] == b.form.params[k] for k in a.form.params))


def match_canonical(eq: QDiffEquation):
    """(CanonicalForm, Transformation) of the first matching id, or None."""
    ws = match_all(eq)
    if not ws:
        return None
    return ws[0].form, ws[0].transformation


def check_malmquist(eq: QDiffEquation) -> bool:
    return eq.deg_f == eq.n


def _looks_like_shift3(eq: QDiffEquation) -> bool:
    """Shape of FERMAT-SHIFT3 after some scaling: R = c (f - a)/(f - b)^2 or its inverse."""
    if eq.n != 2:
        return False
    N, D = eq.alg.coeffs_in(eq.R, 1)
    return (len(N) == 2 and len(D) == 3) or (len(N) == 3 and len(D) == 2)


def _regime(qspec: QSpec, regime: str) -> str:
    if regime != "auto":
        return regime
    if qspec.mode == "generic":
        return "generic"
    if qspec.on_unit_circle:
        return "unrestricted"
    if qspec.mode == "numeric" and abs(abs(qspec.value) - 1) <= 1e-12:
        return "unrestricted"
    return "generic"


def verdict(eq: QDiffEquation, report: ClassificationReport, regime: str = "auto") -> str:
    """Solvability verdict for the zero-order question.

    ``regime`` is ``generic`` (|q| != 1), ``unrestricted`` (any q, the constant
    coefficient statement applies) or ``auto`` (derived from the QSpec).
    """
    if not report.malmquist:
        return NO_ZERO_ORDER
    if report.canonical is None:
        return UNCLASSIFIED
    fid = report.canonical.id
    if _regime(eq.qspec, regime) == "generic":
        if fid in THEOREM_SET:
            return ZERO_ORDER_POSSIBLE
        if fid == "C6-DELTA5":
            return NO_ZERO_ORDER
        return NO_TRANSCENDENTAL
    if report.constant_coefficients:
        return ZERO_ORDER_POSSIBLE if fid in COROLLARY_SET else NO_ZERO_ORDER
    if fid in THEOREM_SET:
        return ZERO_ORDER_POSSIBLE
    return UNCLASSIFIED


def classify(eq: QDiffEquation, regime: str = "auto") -> ClassificationReport:
    alg = eq.alg
    rep = ClassificationReport(
        malmquist=check_malmquist(eq), deg_f=eq.deg_f, n=eq.n,
        constant_coefficients=not alg.has_z(eq.R),
    )
    if rep.malmquist:
        ws = match_all(eq)
        if ws:
            rep.canonical = ws[0].form
            rep.transformation = ws[0].transformation
            rep.alternatives = ws[1:]
            rep.constraint_residuals = list(ws[0].residuals)
            if any(r is None for _, r in ws[0].residuals):
                rep.notes.append("constraint not evaluated: alpha is not rational")
        elif _looks_like_shift3(eq):
            rep.notes.append(DEGREE3_NOTE)
    else:
        rep.notes.append(f"deg_f R = {eq.deg_f} differs from n = {eq.n}")
    rep.verdict = verdict(eq, rep, regime)
    return rep


def witness_matches(report_or_witnesses, fid: str, kind: str, value) -> bool:
    """True when (fid, kind, alpha^power == value) is among the recorded witnesses."""
    if isinstance(report_or_witnesses, ClassificationReport):
        rep = report_or_witnesses
        if rep.canonical is None or rep.canonical.id != fid:
            return False
        trs = [rep.transformation] + [w.transformation for w in rep.alternatives]
    else:
        ws = report_or_witnesses
        if not ws or ws[0].form.id != fid:
            return False
        trs = [w.transformation for w in ws]
    for t in trs:
        k = "scale" if t.kind == "identity" else t.kind
        if k == kind and t.value == value:
            return True
    return False


def _const_solutions(alg: Algebra):
    """Constant solutions of C1-C4 in an algebra containing sqrt(-3) and i."""
    c = alg.const
    s3 = alg.sqrt(c(-3))
    return [
        ("C1", None, [(-1 + s3) / 2, (-1 - s3) / 2]),
        ("C2", None, [c(0), c(2)]),
        ("C3", None, [c(1), c(-1)]),
        ("C4", -1, [c(0), c(8)]),
        ("C4", 1, [2 + 2 * s3, 2 - 2 * s3]),
    ]


def constraint_suite(tol: float = 1e-10) -> dict:
    """Exact residuals on the constant solutions, delta5 roots and iteration identities."""
    alg = get_algebra(QSpec.root_of_unity(3))
    rows = []
    ok = True
    for cid, theta, sols in _const_solutions(alg):
        for d in sols:
            r = check_constraint(cid, RatFunc(alg, d), theta)
            rows.append({"id": cid, "theta": theta, "value": alg.text(d),
                         "residual": r.to_text(), "zero": r.is_zero})
            ok &= r.is_zero
    roots = delta5_constant_roots(tol)
    d5 = []
    for x in roots:
        res = abs(8 * x ** 7 + 8 * x ** 5 - (x + 1) ** 4)
        d5.append({"root": [x.real, x.imag], "residual": res})
        ok &= res < tol
    iters = [iterate_identity("C1-DELTA1"), iterate_identity("C2-DELTA2")]
    ok &= all(it["passed"] for it in iters)
    return {"constant_solutions": rows, "delta5_roots": d5, "iterations": iters, "passed": bool(ok)}
