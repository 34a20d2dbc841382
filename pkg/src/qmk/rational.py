"""Rational solutions of autonomous first-order q-difference equations.

Every equation handled here is a constant-coefficient Moebius recursion

    f(qz) = (m11 f + m12) / (m21 f + m22),   M = [[m11, m12], [m21, m22]].

For a reduced solution f = P/Q the pairs (P(qz), Q(qz)) and M (P, Q) describe
the same function, so T v = lam M v for some constant lam, where v = (P, Q)
and T is z -> qz.  Comparing coefficients of z^j shows that the j-th
coefficient vector is an eigenvector of M for q^j/lam.  The solver groups the
degrees j by lam; the oracle instead solves the generalised eigenproblem on
the full coefficient space with a characteristic polynomial and nullspaces.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field

from sympy.polys.matrices import DomainMatrix
from sympy.polys.rings import ring

from .algebra import Algebra, QSpec, RatFunc, get_algebra
from .parser import QDiffEquation

DEFAULT_S_BOUND = 8


class SolverError(ValueError):
    """Rejected parameter (A = -1, B = 0, a = 0) or unsupported equation."""


@dataclass(frozen=True)
class Family:
    """Solutions P/Q with (P, Q) = sum_t c_t z^{j_t} v_t for free constants c_t."""

    lam: object
    terms: tuple  # ((j, (p, q)), ...) with field elements p, q
    alg: Algebra = dc_field(compare=False, repr=False)

    @property
    def degree(self) -> int:
        return max(j for j, _ in self.terms)

    @property
    def free_indices(self) -> tuple:
        return tuple(j for j, _ in self.terms)

    @property
    def leading(self) -> RatFunc | None:
        """Value of the generic member at infinity (None when it is infinite)."""
        top = [v for j, v in self.terms if j == self.degree]
        if len(top) != 1 or top[0][1] == 0:
            return None
        return RatFunc(self.alg, top[0][0] / top[0][1])

    def polys(self, coeffs):
        alg = self.alg
        P = alg.zero
        Q = alg.zero
        for c, (j, (p, q)) in zip(coeffs, self.terms):
            c = alg.const(c)
            P = P + c * p * alg.z ** j
            Q = Q + c * q * alg.z ** j
        return P, Q

    def member(self, coeffs) -> RatFunc:
        P, Q = self.polys(coeffs)
        if Q == 0:
            raise ZeroDivisionError("this choice of coefficients gives Q = 0")
        return RatFunc(self.alg, P / Q)

    def templates(self) -> tuple:
        """(P, Q) as text with free coefficients c0, c1, ..."""
        alg = self.alg
        ps, qs = [], []
        for t, (j, (p, q)) in enumerate(self.terms):
            zj = "" if j == 0 else ("*z" if j == 1 else f"*z^{j}")
            for vec, x in ((ps, p), (qs, q)):
                if x != 0:
                    ct = "" if alg.eq(x, alg.one) else f"{alg.text(x)}*"
                    vec.append(f"{ct}c{t}{zj}")
        return " + ".join(ps) or "0", " + ".join(qs) or "0"

    def to_dict(self) -> dict:
        P, Q = self.templates()
        lead = self.leading
        return {
            "lambda": self.alg.text(self.lam),
            "degree": self.degree,
            "free_indices": list(self.free_indices),
            "leading_coefficient": None if lead is None else lead.to_text(),
            "P": P,
            "Q": Q,
        }


@dataclass
class RationalSolutionSet:
    equation: str
    constants: list = dc_field(default_factory=list)
    all_constants: bool = False
    families: list = dc_field(default_factory=list)
    obstruction: str | None = None
    candidate_degrees: list = dc_field(default_factory=list)
    s_bound: int = DEFAULT_S_BOUND
    notes: list = dc_field(default_factory=list)

    @property
    def has_nonconstant(self) -> bool:
        return bool(self.families)

    def to_dict(self) -> dict:
        d = {
            "equation": self.equation,
            "s_bound": self.s_bound,
            "constants": [c.to_text() for c in self.constants],
            "all_constants": self.all_constants,
            "families": [f.to_dict() for f in self.families],
        }
        if self.candidate_degrees:
            d["candidate_degrees"] = list(self.candidate_degrees)
        if self.obstruction:
            d["obstruction"] = self.obstruction
        if self.notes:
            d["notes"] = list(self.notes)
        return d


# -- shared helpers ----------------------------------------------------------------

def _quad_roots(alg: Algebra, b, c):
    """Roots of x^2 + b x + c in the coefficient field."""
    s = alg.sqrt(b * b - 4 * c)
    if s is None:
        return []
    r1 = (-b + s) / 2
    r2 = (-b - s) / 2
    return [r1] if alg.eq(r1, r2) else [r1, r2]


def _eigen(alg: Algebra, M):
    """[(mu, [eigenvectors])] of a 2x2 matrix over the coefficient field."""
    (a, b), (c, d) = M
    if b == 0 and c == 0 and alg.eq(a, d):
        return [(a, [(alg.one, alg.zero), (alg.zero, alg.one)])]
    out = []
    for mu in _quad_roots(alg, -(a + d), a * d - b * c):
        if a - mu != 0 or b != 0:
            v = (b, mu - a)
        else:
            v = (mu - d, c)
        if v[1] != 0:
            v = (v[0] / v[1], alg.one)
        else:
            v = (alg.one, alg.zero)
        out.append((mu, [v]))
    return out


def _pdeg(p) -> int:
    """Degree in z of a ring element (-1 for zero)."""
    return max((m[0] for m in p.keys()), default=-1) if p else -1


def _admissible(alg: Algebra, P, Q, need_nonzero_at_0: bool) -> bool:
    """Q != 0, P/Q nonconstant, gcd(P, Q) = 1 and optionally P(0), Q(0) != 0."""
    if Q == 0:
        return False
    r = P / Q
    if not alg.has_z(r):
        return False
    if _pdeg(r.numer) != _pdeg(P.numer) or _pdeg(r.denom) != _pdeg(Q.numer):
        return False
    if need_nonzero_at_0:
        if _at_zero(P) == 0 or _at_zero(Q) == 0:
            return False
    return True


def _at_zero(el):
    """Constant term in z of a polynomial field element."""
    return sum((c for m, c in el.numer.items() if m[0] == 0), el.numer.ring.zero)


def _has_admissible_member(alg: Algebra, terms, need_nonzero_at_0: bool, seed: int = 0) -> bool:
    if not terms:
        return False
    rng = random.Random(seed)
    trials = [[1] * len(terms)] + [
        [rng.choice([-3, -2, -1, 1, 2, 3]) for _ in terms] for _ in range(12)
    ]
    for cs in trials:
        P = alg.zero
        Q = alg.zero
        for c, (j, (p, q)) in zip(cs, terms):
            P = P + c * p * alg.z ** j
            Q = Q + c * q * alg.z ** j
        if _admissible(alg, P, Q, need_nonzero_at_0):
            return True
    return False


def _span_key(fam: Family):
    """Canonical (lambda, RREF basis) of a family in coefficient layout (p_0..p_S, q_0..q_S)."""
    alg = fam.alg
    S = fam.degree
    rows = []
    for j, (p, q) in fam.terms:
        row = [alg.zero] * (2 * (S + 1))
        row[j] = p
        row[S + 1 + j] = q
        rows.append(row)
    return alg.text(fam.lam), _rref_key(alg, rows)


def _scalar(alg: Algebra, el):
    return el.numer.LC / el.denom.LC if el != 0 else alg.domain.zero


def _rref_key(alg: Algebra, rows):
    if not rows:
        return ()
    # trim unused top degrees so spans computed with different bounds compare
    width = len(rows[0]) // 2
    used = max((k % width for r in rows for k, x in enumerate(r) if x != 0), default=0)
    rows = [r[:used + 1] + r[width:width + used + 1] for r in rows]
    K = alg.domain
    dm = DomainMatrix([[_scalar(alg, x) for x in r] for r in rows], (len(rows), len(rows[0])), K)
    red, _ = dm.rref()
    out = []
    for r in red.to_list():
        if any(x != K.zero for x in r):
            out.append(tuple(alg.scalar_text(x) for x in r))
    return tuple(out)


def _group_families(alg: Algebra, M, S: int, need0: bool):
    """Closed-form families: degrees j with q^j = lam * mu grouped by lam."""
    eig = _eigen(alg, M)
    qpow = [alg.q ** j for j in range(S + 1)]
    lams = []
    for j in range(S + 1):
        for mu, _ in eig:
            lam = qpow[j] / mu
            if not any(alg.eq(lam, x) for x in lams):
                lams.append(lam)
    fams = []
    for lam in lams:
        terms = []
        for j in range(S + 1):
            for mu, vecs in eig:
                if alg.eq(qpow[j], lam * mu):
                    terms.extend((j, v) for v in vecs)
        if _has_admissible_member(alg, terms, need0):
            fams.append(Family(lam, tuple(terms), alg))
    return eig, fams


def _constants(alg: Algebra, eig):
    consts = []
    all_const = False
    for mu, vecs in eig:
        if len(vecs) == 2:
            all_const = True
            continue
        p, q = vecs[0]
        if q != 0:
            c = RatFunc(alg, p / q)
            if c not in consts:
                consts.append(c)
    return consts, all_const


def _check_qspec(qspec: QSpec | None) -> QSpec:
    return qspec or QSpec.generic()


# -- public solvers ----------------------------------------------------------------

def moebius_matrix(eq: QDiffEquation):
    """M for a first-order equation with constant coefficients, else SolverError."""
    alg = eq.alg
    if eq.n != 1 or eq.deg_f != 1 or alg.has_z(eq.R):
        raise SolverError("need f(qz) = (m11 f + m12)/(m21 f + m22) with constant coefficients")
    N, D = alg.coeffs_in(eq.R, 1)
    N = N + [alg.zero] * (2 - len(N))
    D = D + [alg.zero] * (2 - len(D))
    return ((N[1], N[0]), (D[1], D[0]))


def solve_moebius(M, qspec: QSpec, s_bound: int = DEFAULT_S_BOUND, label: str = "",
                  need_nonzero_at_0: bool = False) -> RationalSolutionSet:
    alg = get_algebra(qspec)
    M = tuple(tuple(alg.const(x) for x in row) for row in M)
    # same projective normalisation as a parsed equation (denominator monic in f)
    lead = M[1][0] if M[1][0] != 0 else M[1][1]
    M = tuple(tuple(x / lead for x in row) for row in M)
    eig, fams = _group_families(alg, M, s_bound, need_nonzero_at_0)
    consts, all_const = _constants(alg, eig)
    return RationalSolutionSet(label, consts, all_const, fams, s_bound=s_bound)


def _mu_ratio_note(alg: Algebra, eig, S: int):
    if len(eig) != 2:
        return None
    k = eig[0][0] / eig[1][0]
    return alg.text(k)


def solve_linear(a, b, qspec: QSpec | None = None, k_bound: int = DEFAULT_S_BOUND) -> RationalSolutionSet:
    """Rational solutions of f(qz) = a f(z) + b."""
    qspec = _check_qspec(qspec)
    alg = get_algebra(qspec)
    a = alg.const(a)
    b = alg.const(b)
    if a == 0:
        raise SolverError("a = 0 is not a q-difference equation")
    label = f"f(q*z) = {alg.text(a)}*f(z) + {alg.text(b)}"
    res = solve_moebius(((a, b), (0, 1)), qspec, k_bound, label)
    ks = [k for k in range(-k_bound, k_bound + 1) if k != 0 and alg.eq(alg.q ** k, a)]
    res.candidate_degrees = ks
    if alg.eq(a, alg.one):
        if b != 0:
            res.constants, res.families, res.all_constants = [], [], False
            res.obstruction = "a=1 requires b=0"
        elif qspec.mode == "root-of-unity":
            res.notes.append(f"solutions are the rational functions of z^{qspec.N}")
    elif not ks:
        res.obstruction = f"no integer k with q^k=a for 0<|k|<={k_bound}"
    return res


def solve_riccati_A(A, qspec: QSpec | None = None, s_bound: int = DEFAULT_S_BOUND) -> RationalSolutionSet:
    """Rational solutions of f(qz) = (f(z) + A)/(1 - f(z))."""
    qspec = _check_qspec(qspec)
    alg = get_algebra(qspec)
    A = alg.const(A)
    if alg.eq(A, -alg.one):
        raise SolverError("A = -1 is excluded")
    label = f"f(q*z) = (f(z) + {alg.text(A)})/(1 - f(z))"
    res = solve_moebius(((1, A), (-1, 1)), qspec, s_bound, label, need_nonzero_at_0=A != 0)
    res.candidate_degrees = [s for s in range(1, s_bound + 1) if alg.eq(alg.q ** s, alg.one)]
    _set_obstruction(res, alg, qspec, A == 0, "A=0 no-nonconstant", "q^s≠1", s_bound)
    return res


def solve_riccati_B(B, qspec: QSpec | None = None, s_bound: int = DEFAULT_S_BOUND) -> RationalSolutionSet:
    """Rational solutions of f(qz) = B/f(z)."""
    qspec = _check_qspec(qspec)
    alg = get_algebra(qspec)
    B = alg.const(B)
    if B == 0:
        raise SolverError("B = 0 is excluded")
    label = f"f(q*z) = {alg.text(B)}/f(z)"
    res = solve_moebius(((0, B), (1, 0)), qspec, s_bound, label, need_nonzero_at_0=True)
    res.candidate_degrees = [s for s in range(1, s_bound + 1) if alg.eq(alg.q ** (2 * s), alg.one)]
    _set_obstruction(res, alg, qspec, False, "", "q^{2s}≠1", s_bound)
    return res


def _set_obstruction(res, alg, qspec, trivial, trivial_msg, cond, s_bound):
    if res.families:
        return
    if trivial:
        res.obstruction = trivial_msg
    elif qspec.mode == "generic":
        res.obstruction = "generic-|q|≠1"
    elif not res.candidate_degrees:
        res.obstruction = f"{cond} for all s <= {s_bound}"
    else:
        res.obstruction = f"q^m differs from the eigenvalue ratio for all |m| <= {s_bound}"


def verify_solution(eq: QDiffEquation, r: RatFunc) -> bool:
    """Exact substitution check f(qz)^n == R(z, f(z))."""
    alg = eq.alg
    return alg.eq(alg.shift(r.el, 1) ** eq.n, alg.subs_f(eq.R, r.el))


# -- oracle ------------------------------------------------------------------------

def brute_force_oracle(eq: QDiffEquation, s_bound: int = DEFAULT_S_BOUND,
                       need_nonzero_at_0: bool | None = None) -> RationalSolutionSet:
    """Independent solve of the undetermined-coefficient problem.

    The unknowns are the coefficients of P and Q up to degree s_bound.  The
    cleared equation forces (P(qz), Q(qz)) = lam M (P, Q); the possible lam are
    the roots in the coefficient field of the characteristic polynomial of
    (M (x) I)^{-1} T, and each solution space is a nullspace.
    """
    if eq.qspec.mode == "generic":
        raise SolverError("the oracle needs a numeric or root-of-unity q")
    alg = eq.alg
    M = moebius_matrix(eq)
    if need_nonzero_at_0 is None:
        need_nonzero_at_0 = M[1][0] != 0 and M[0][1] != 0
    K = alg.domain
    S = s_bound
    n = 2 * (S + 1)
    k = lambda el: el.numer.LC / el.denom.LC if el != 0 else K.zero
    m = [[k(x) for x in row] for row in M]
    qv = k(alg.q)
    big = [[K.zero] * n for _ in range(n)]
    T = [[K.zero] * n for _ in range(n)]
    for j in range(S + 1):
        for r in range(2):
            for c in range(2):
                big[r * (S + 1) + j][c * (S + 1) + j] = m[r][c]
            T[r * (S + 1) + j][r * (S + 1) + j] = qv ** j
    Mb = DomainMatrix(big, (n, n), K)
    C = Mb.inv() * DomainMatrix(T, (n, n), K)
    cp = C.charpoly()
    R1, x = ring("x", K)
    poly = R1.from_list(cp)
    _, facs = poly.factor_list()
    lams = []
    for fac, _mult in facs:
        if fac.degree() == 1:
            lams.append(-fac.coeff(1) / fac.LC if fac.coeff(1) else K.zero)
    families = []
    for lam in lams:
        vecs = (C - DomainMatrix.eye(n, K) * lam).nullspace().to_list()
        terms = []
        for v in vecs:
            terms.append(tuple((j, (alg.F(v[j]), alg.F(v[S + 1 + j]))) for j in range(S + 1)))
        if _oracle_admissible(alg, terms, need_nonzero_at_0):
            fam = _OracleFamily(alg.F(lam), terms, alg)
            families.append(fam)
    # constants from the degree-0 problem
    consts = []
    all_const = False
    C0 = DomainMatrix([[m[0][0], m[0][1]], [m[1][0], m[1][1]]], (2, 2), K).inv()
    cp0 = C0.charpoly()
    _, f0 = R1.from_list(cp0).factor_list()
    for fac, _m in f0:
        if fac.degree() != 1:
            continue
        lam = -fac.coeff(1) / fac.LC if fac.coeff(1) else K.zero
        ns = (C0 - DomainMatrix.eye(2, K) * lam).nullspace().to_list()
        if len(ns) == 2:
            all_const = True
            continue
        for p, q in ns:
            if q != K.zero:
                c = RatFunc(alg, alg.F(p / q))
                if c not in consts:
                    consts.append(c)
    res = RationalSolutionSet(f"oracle: {eq.to_text()}", consts, all_const, s_bound=S)
    res.families = families
    return res


class _OracleFamily:
    """Family given by an arbitrary nullspace basis (each basis vector spans all degrees)."""

    def __init__(self, lam, basis, alg):
        self.lam = lam
        self.basis = basis
        self.alg = alg

    def key(self):
        S = len(self.basis[0]) - 1
        rows = []
        for vec in self.basis:
            row = [self.alg.zero] * (2 * (S + 1))
            for j, (p, q) in vec:
                row[j] = p
                row[S + 1 + j] = q
            rows.append(row)
        return self.alg.text(self.lam), _rref_key(self.alg, rows)


def _oracle_admissible(alg, basis, need0) -> bool:
    rng = random.Random(1)
    trials = [[1] * len(basis)] + [
        [rng.choice([-3, -2, -1, 1, 2, 3]) for _ in basis] for _ in range(12)
    ]
    for cs in trials:
        P = alg.zero
        Q = alg.zero
        for c, vec in zip(cs, basis):
            for j, (p, q) in vec:
                P = P + c * p * alg.z ** j
                Q = Q + c * q * alg.z ** j
        if _admissible(alg, P, Q, need0):
            return True
    return False


def solution_key(res: RationalSolutionSet):
    """Key used to compare solver and oracle output."""
    consts = frozenset(c.to_text() for c in res.constants)
    fams = frozenset(
        f.key() if isinstance(f, _OracleFamily) else _span_key(f) for f in res.families
    )
    return consts, res.all_constants, fams
