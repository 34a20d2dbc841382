"""Exact arithmetic for rational functions in z over Q(q) or a cyclotomic field.

Three coefficient regimes are supported, selected by a :class:`QSpec`:

* ``generic``        q is an indeterminate; coefficients live in Q(q)
                     (Q(i)(q) when ``adjoin_i`` is set).
* ``root-of-unity``  q is a primitive N-th root of unity; coefficients live in
                     the cyclotomic field Q(zeta_M), M = lcm(N, 4) when i is
                     adjoined, otherwise M = N.
* ``numeric``        q is a fixed complex number.  Its real and imaginary parts
                     are converted exactly to rationals, so arithmetic stays
                     exact over Q or Q(i).

All values are immutable.  Elements of every regime share one sparse sympy
fraction field in the generators ``z, f`` (plus ``q`` in generic mode); the
generator ``f`` is only used by the equation layer.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from sympy import I, QQ, exp, pi
from sympy.polys.domains import QQ_I
from sympy.polys.fields import field
from sympy.polys.rings import ring

DEFAULT_TOL = 1e-12

MODES = ("generic", "root-of-unity", "numeric")


class AlgebraError(ValueError):
    """Raised for invalid coefficient-field requests."""


class DivisionByZero(ZeroDivisionError):
    """Division of a rational function by the zero function."""


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, float)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(float(x))


@dataclass(frozen=True)
class QSpec:
    """Which q the arithmetic is performed for.

    Use the constructors :meth:`generic`, :meth:`root_of_unity`,
    :meth:`numeric` or :meth:`parse` rather than the raw fields.
    """

    mode: str = "generic"
    N: int | None = None
    re: Fraction | None = None
    im: Fraction | None = None
    adjoin_i: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise AlgebraError(f"unknown q mode {self.mode!r}")
        if self.mode == "root-of-unity":
            if self.N is None or self.N < 2:
                raise AlgebraError("root-of-unity mode needs N >= 2")
        if self.mode == "numeric":
            if self.re is None or self.im is None:
                raise AlgebraError("numeric mode needs a value")
            if self.im == 0 and self.re in (0, 1):
                raise AlgebraError("q must differ from 0 and 1")

    @classmethod
    def generic(cls, adjoin_i: bool = False) -> "QSpec":
        return cls("generic", adjoin_i=adjoin_i)

    @classmethod
    def root_of_unity(cls, N: int, adjoin_i: bool = True) -> "QSpec":
        return cls("root-of-unity", N=int(N), adjoin_i=adjoin_i)

    @classmethod
    def numeric(cls, value, adjoin_i: bool | None = None) -> "QSpec":
        if isinstance(value, tuple):
            re, im = (_to_fraction(v) for v in value)
        elif isinstance(value, complex):
            re, im = Fraction(value.real), Fraction(value.imag)
        elif isinstance(value, str) and ("j" in value or "i" in value):
            c = complex(value.replace("i", "j"))
            re, im = Fraction(c.real), Fraction(c.imag)
        else:
            re, im = _to_fraction(value), Fraction(0)
        if adjoin_i is None:
            adjoin_i = im != 0
        if im != 0 and not adjoin_i:
            raise AlgebraError("a non-real q needs i adjoined")
        return cls("numeric", re=re, im=im, adjoin_i=adjoin_i)

    @classmethod
    def parse(cls, text: str) -> "QSpec":
        """Parse ``generic``, ``generic+i``, ``root-of-unity:N`` or ``numeric:VALUE``.

        A bare number is read as a numeric q.
        """
        t = text.strip()
        if t in ("generic", "generic-symbolic"):
            return cls.generic()
        if t in ("generic+i", "generic-i"):
            return cls.generic(adjoin_i=True)
        head, _, tail = t.partition(":")
        if head in ("root-of-unity", "root", "rou"):
            return cls.root_of_unity(int(tail))
        if head == "numeric":
            return cls.numeric(tail)
        return cls.numeric(t)

    @property
    def value(self) -> complex | None:
        """Numeric value of q (None in generic mode)."""
        if self.mode == "numeric":
            return complex(float(self.re), float(self.im))
        if self.mode == "root-of-unity":
            return cmath.exp(2j * math.pi / self.N)
        return None

    @property
    def modulus(self) -> float | None:
        v = self.value
        return None if v is None else abs(v)

    @property
    def argument(self) -> float | None:
        v = self.value
        return None if v is None else cmath.phase(v)

    @property
    def on_unit_circle(self) -> bool:
        if self.mode == "root-of-unity":
            return True
        if self.mode == "numeric":
            return self.re * self.re + self.im * self.im == 1
        return False

    def describe(self) -> str:
        if self.mode == "generic":
            return "generic+i" if self.adjoin_i else "generic"
        if self.mode == "root-of-unity":
            return f"root-of-unity:{self.N}"
        v = self.value
        return f"numeric:{v.real!r}" if v.imag == 0 else f"numeric:{v!r}"


def _solve_generator_exponents(M: int, N: int) -> tuple[int, int]:
    """Return (a, b) with zeta_M = q**a * i**b where q = zeta_M**(M/N), i = zeta_M**(M/4)."""
    for a in range(M):
        for b in range(4):
            if (a * (M // N) + b * (M // 4)) % M == 1:
                return a, b
    raise AlgebraError("cannot express zeta in terms of q and i")


class Algebra:
    """Coefficient field and the rational-function field over it for one QSpec."""

    def __init__(self, spec: QSpec):
        self.spec = spec
        self._gen_value = None  # numeric value of the algebraic generator
        self._gen_text = None
        if spec.mode == "generic":
            dom = QQ_I if spec.adjoin_i else QQ
            self.F, self._z, self._f, self._q = field("z,f,q", dom)
            self.domain = dom
            self.q = self._q
        elif spec.mode == "root-of-unity":
            N = spec.N
            M = math.lcm(N, 4) if spec.adjoin_i else N
            self.M = M
            if M == 2:
                dom = QQ
                zeta = dom(-1)
            else:
                dom = QQ.algebraic_field(exp(2 * pi * I / M))
                zeta = dom.from_sympy(exp(2 * pi * I / M))
                self._gen_value = cmath.exp(2j * math.pi / M)
                if spec.adjoin_i:
                    a, b = _solve_generator_exponents(M, N)
                    self._gen_text = _monomial_text([("q", a), ("i", b)])
                else:
                    self._gen_text = "q"
            self.domain = dom
            self.F, self._z, self._f = field("z,f", dom)
            self._q = None
            self.q = self.F(zeta ** (M // N))
            self._zeta = zeta
        else:
            dom = QQ_I if spec.adjoin_i else QQ
            self.domain = dom
            self.F, self._z, self._f = field("z,f", dom)
            self._q = None
            if dom is QQ:
                self.q = self.F(QQ(spec.re.numerator, spec.re.denominator))
            else:
                self.q = self.F(
                    dom(QQ(spec.re.numerator, spec.re.denominator),
                        QQ(spec.im.numerator, spec.im.denominator))
                )
        self.R = self.F.ring
        self.z = self._z
        self.f = self._f
        self.one = self.F.one
        self.zero = self.F.zero
        self._i = self._make_i()

    # -- constants -----------------------------------------------------

    def _make_i(self):
        s = self.spec
        if not s.adjoin_i:
            return None
        if s.mode == "root-of-unity":
            return self.F(self._zeta ** (self.M // 4))
        return self.F(QQ_I(0, 1))

    @property
    def has_i(self) -> bool:
        return self._i is not None

    @property
    def i(self):
        if self._i is None:
            raise AlgebraError("i is not adjoined in this coefficient field")
        return self._i

    def const(self, x):
        """Field element for an int, Fraction, complex or RatFunc."""
        if isinstance(x, RatFunc):
            return x.el
        if isinstance(x, bool):
            raise TypeError("bool is not a coefficient")
        if isinstance(x, int):
            return self.F(x)
        if isinstance(x, Fraction):
            return self.F(QQ(x.numerator, x.denominator))
        if isinstance(x, float):
            return self.const(Fraction(x))
        if isinstance(x, complex):
            re = self.const(Fraction(x.real))
            if x.imag == 0:
                return re
            return re + self.i * self.const(Fraction(x.imag))
        if hasattr(x, "numer") and getattr(x, "field", None) is self.F:
            return x
        raise TypeError(f"cannot convert {type(x).__name__} to a coefficient")

    def rat(self, x) -> "RatFunc":
        return RatFunc(self, self.const(x) if not hasattr(x, "numer") else x)

    # -- structure -----------------------------------------------------

    @staticmethod
    def eq(a, b) -> bool:
        """Field equality; structural == is unreliable over algebraic domains."""
        if not hasattr(b, "numer"):
            b = a.field(b)
        if not hasattr(a, "numer"):
            a = b.field(a)
        return a.numer * b.denom == b.numer * a.denom

    def canon(self, el):
        """Representative with a monic denominator (leading term in the ring order)."""
        lc = el.denom.LC
        if lc == self.domain.one:
            return el
        return self.F.raw_new(el.numer.quo_ground(lc), el.denom.quo_ground(lc))

    @property
    def is_generic(self) -> bool:
        return self.spec.mode == "generic"

    def has_f(self, el) -> bool:
        return any(m[1] for m in el.numer.keys()) or any(m[1] for m in el.denom.keys())

    def has_z(self, el) -> bool:
        return any(m[0] for m in el.numer.keys()) or any(m[0] for m in el.denom.keys())

    def is_constant(self, el) -> bool:
        """True when el involves neither z nor f (q-dependence is allowed)."""
        return not self.has_z(el) and not self.has_f(el)

    def shift(self, el, k: int = 1):
        """Substitute z -> q**k z in a field element (f is left untouched)."""
        if k == 0 or not self.has_z(el):
            return el
        el = self.canon(el)
        num, den = el.numer, el.denom
        if self.is_generic:
            off = 0
            if k < 0:
                off = -k * max(max(m[0] for m in num.keys()), max(m[0] for m in den.keys()))

            def tr(p):
                return self.R.from_dict(
                    {(m[0], m[1], m[2] + k * m[0] + off): c for m, c in p.items()}
                )
        else:
            qc = self.q.numer.LC if k > 0 else self.domain.one / self.q.numer.LC
            qk = qc ** abs(k)
            cache = {}

            def pw(e):
                if e not in cache:
                    cache[e] = qk ** e
                return cache[e]

            def tr(p):
                return self.R.from_dict({m: c * pw(m[0]) for m, c in p.items()})
        return self.F.new(tr(num), tr(den))

    def coeffs_in(self, el, var: int):
        """Split el = sum_j c_j * x**j / sum_j d_j * x**j in generator ``var``.

        Returns (num, den) lists of field elements, normalised so the leading
        denominator coefficient is one.
        """
        def groups(p):
            out = {}
            for m, c in p.items():
                e = m[var]
                mm = list(m)
                mm[var] = 0
                out.setdefault(e, {})[tuple(mm)] = c
            deg = max(out)
            return [self.F(self.R.from_dict(out[j])) if j in out else self.zero
                    for j in range(deg + 1)]

        num = groups(el.numer)
        den = groups(el.denom)
        lc = den[-1]
        return [c / lc for c in num], [c / lc for c in den]

    def degree_in(self, el, var: int) -> int:
        if el.numer == 0:
            return -1
        return max(max(m[var] for m in el.numer.keys()),
                   max(m[var] for m in el.denom.keys()))

    def subs_f(self, el, value):
        """Substitute the generator f by the field element ``value``."""
        num, den = self.coeffs_in(el, 1)

        def horner(cs):
            acc = self.zero
            for c in reversed(cs):
                acc = acc * value + c
            return acc

        d = horner(den)
        if d == 0:
            raise DivisionByZero("substitution makes the denominator vanish")
        return horner(num) / d

    def from_f_coeffs(self, num, den=None):
        """Build sum num_j f**j / sum den_j f**j."""
        f = self.f
        n = self.zero
        for c in reversed(num):
            n = n * f + self.const(c)
        if den is None:
            return n
        d = self.zero
        for c in reversed(den):
            d = d * f + self.const(c)
        if d == 0:
            raise DivisionByZero("zero denominator")
        return n / d

    # -- square roots ------------------------------------------------------

    def _sqrt_scalar(self, c):
        dom = self.domain
        if dom is QQ:
            try:
                return QQ.exsqrt(c)
            except Exception:
                return None
        Rx, x = ring("x", dom)
        _, facs = (x ** 2 - c).factor_list()
        for fac, _m in facs:
            if fac.degree() == 1:
                lc = fac.LC
                return -fac.coeff(1) / lc if fac.coeff(1) is not None else dom.zero
        return None

    def _sqrt_poly(self, p):
        if p == 0:
            return p
        if p.is_ground:
            r = self._sqrt_scalar(p.LC)
            return None if r is None else self.R.ground_new(r)
        c, facs = p.sqf_list()
        h = self.R.one
        for fac, m in facs:
            if m % 2:
                return None
            h = h * fac ** (m // 2)
        rc = self._sqrt_scalar(c)
        if rc is None:
            return None
        h = h * rc
        return h if h * h == p else None

    def sqrt(self, el):
        """Exact square root of a field element, or None when it is not a square."""
        if el == 0:
            return el
        s = self._sqrt_poly(el.numer * el.denom)
        if s is None:
            return None
        return self.F.new(s, el.denom)

    # -- numeric embedding -------------------------------------------------

    def scalar_to_complex(self, c) -> complex:
        dom = self.domain
        if dom is QQ:
            return complex(float(c))
        if dom is QQ_I:
            return complex(float(c.x), float(c.y))
        coeffs = c.to_list()
        acc = 0j
        for a in coeffs:
            acc = acc * self._gen_value + float(a)
        return acc

    def compile(self, el):
        """Return a numpy-vectorised evaluator ``(z, f, q) -> value`` for el."""
        def terms(p):
            return [(self.scalar_to_complex(c), m) for m, c in p.items()]

        nt, dt = terms(el.numer), terms(el.denom)
        generic = self.is_generic

        def ev(ts, z, f, q):
            acc = 0j
            for c, m in ts:
                t = c * z ** m[0] * f ** m[1]
                if generic and m[2]:
                    t = t * q ** m[2]
                acc = acc + t
            return acc

        def fn(z, f=0.0, q=None):
            if generic and q is None:
                raise AlgebraError("generic mode needs a numeric q for evaluation")
            z = np.asarray(z, dtype=complex)
            f = np.asarray(f, dtype=complex)
            return ev(nt, z, f, q) / ev(dt, z, f, q)

        return fn

    # -- text ----------------------------------------------------------------

    def scalar_text(self, c) -> str:
        dom = self.domain
        if dom is QQ:
            fr = Fraction(int(c.numerator), int(c.denominator))
            return _fraction_text(fr)
        if dom is QQ_I:
            re = Fraction(int(c.x.numerator), int(c.x.denominator))
            im = Fraction(int(c.y.numerator), int(c.y.denominator))
            if im == 0:
                return _fraction_text(re)
            it = "i" if im == 1 else f"{_fraction_text(im)}*i"
            if re == 0:
                return it if im == 1 else f"({it})"
            return f"({_fraction_text(re)}+{it})"
        parts = []
        coeffs = c.to_list()
        deg = len(coeffs) - 1
        for j, a in enumerate(coeffs):
            e = deg - j
            fr = Fraction(int(a.numerator), int(a.denominator))
            if fr == 0:
                continue
            if e == 0:
                parts.append(_fraction_text(fr))
                continue
            g = self._gen_text if e == 1 else f"{self._gen_text}^{e}"
            parts.append(g if fr == 1 else f"{_fraction_text(fr)}*{g}")
        if len(parts) == 1:
            return parts[0]
        return "(" + ("+".join(parts) or "0") + ")"

    def poly_text(self, p, f_name: str = "f(z)") -> str:
        if p == 0:
            return "0"
        names = ["z", f_name, "q"]
        out = []
        for m, c in sorted(p.items(), reverse=True):
            factors = []
            for name, e in zip(names, m):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            ct = self.scalar_text(c)
            if not factors:
                factors = [ct]
            elif ct != "1":
                factors.insert(0, ct)
            out.append("*".join(factors))
        return " + ".join(out)

    def text(self, el, f_name: str = "f(z)") -> str:
        el = self.canon(el)
        if el.numer.is_ground and el.denom.is_ground:
            return self.scalar_text(el.numer.LC / el.denom.LC if el.numer else self.domain.zero)
        n = self.poly_text(el.numer, f_name)
        if el.denom.is_ground and el.denom.LC == self.domain.one:
            return f"({n})"
        return f"({n})/({self.poly_text(el.denom, f_name)})"


def _fraction_text(fr: Fraction) -> str:
    if fr.denominator == 1:
        return str(fr.numerator) if fr >= 0 else f"({fr.numerator})"
    return f"({fr.numerator}/{fr.denominator})"


def _monomial_text(pairs) -> str:
    bits = []
    for name, e in pairs:
        if e == 1:
            bits.append(name)
        elif e > 1:
            bits.append(f"{name}^{e}")
    return "(" + ("*".join(bits) or "1") + ")"


@lru_cache(maxsize=None)
def get_algebra(spec: QSpec) -> Algebra:
    return Algebra(spec)


class Poly:
    """Polynomial in z with constant coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        cs = list(coeffs)
        while cs and cs[-1].is_zero:
            cs.pop()
        self.coeffs = tuple(cs)

    @property
    def degree(self) -> float:
        return len(self.coeffs) - 1 if self.coeffs else -math.inf

    def __eq__(self, other):
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Poly({[str(c) for c in self.coeffs]})"


class RatFunc:
    """Reduced quotient of polynomials in z over the coefficient field of a QSpec."""

    __slots__ = ("alg", "el")

    def __init__(self, alg: Algebra, el):
        self.alg = alg
        self.el = alg.canon(el)

    @classmethod
    def from_value(cls, x, spec: QSpec | None = None) -> "RatFunc":
        alg = get_algebra(spec or QSpec.generic())
        return cls(alg, alg.const(x))

    @classmethod
    def z(cls, spec: QSpec | None = None) -> "RatFunc":
        alg = get_algebra(spec or QSpec.generic())
        return cls(alg, alg.z)

    @classmethod
    def q(cls, spec: QSpec | None = None) -> "RatFunc":
        alg = get_algebra(spec or QSpec.generic())
        return cls(alg, alg.q)

    def _coerce(self, other):
        if isinstance(other, RatFunc):
            if other.alg is not self.alg:
                raise AlgebraError("operands belong to different coefficient fields")
            return other.el
        return self.alg.const(other)

    def __add__(self, other):
        return RatFunc(self.alg, self.el + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return RatFunc(self.alg, self.el - self._coerce(other))

    def __rsub__(self, other):
        return RatFunc(self.alg, self._coerce(other) - self.el)

    def __mul__(self, other):
        return RatFunc(self.alg, self.el * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o == 0:
            raise DivisionByZero("division by the zero rational function")
        return RatFunc(self.alg, self.el / o)

    def __rtruediv__(self, other):
        if self.el == 0:
            raise DivisionByZero("division by the zero rational function")
        return RatFunc(self.alg, self._coerce(other) / self.el)

    def __neg__(self):
        return RatFunc(self.alg, -self.el)

    def __pow__(self, k: int):
        if k < 0 and self.el == 0:
            raise DivisionByZero("zero to a negative power")
        return RatFunc(self.alg, self.el ** k)

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except (TypeError, AlgebraError):
            return NotImplemented
        return Algebra.eq(self.el, o)

    def __hash__(self):
        return hash((self.el.numer, self.el.denom))

    def __repr__(self):
        return f"RatFunc({self})"

    def __str__(self):
        return self.to_text()

    @property
    def is_zero(self) -> bool:
        return self.el == 0

    @property
    def is_constant(self) -> bool:
        return not self.alg.has_z(self.el)

    def q_shift(self, k: int = 1) -> "RatFunc":
        return RatFunc(self.alg, self.alg.shift(self.el, k))

    def is_q_periodic(self) -> bool:
        return self.q_shift(1) == self

    def _z_coeffs(self):
        num, den = self.alg.coeffs_in(self.el, 0)
        return ([RatFunc(self.alg, c) for c in num], [RatFunc(self.alg, c) for c in den])

    @property
    def num(self) -> Poly:
        return Poly(self._z_coeffs()[0])

    @property
    def den(self) -> Poly:
        return Poly(self._z_coeffs()[1])

    def sqrt(self) -> "RatFunc | None":
        s = self.alg.sqrt(self.el)
        return None if s is None else RatFunc(self.alg, s)

    def to_text(self) -> str:
        return self.alg.text(self.el)

    def to_complex(self, q: complex | None = None) -> complex:
        if not self.is_constant:
            raise AlgebraError("not a constant")
        return complex(self.alg.compile(self.el)(0.0, 0.0, q))

    def __call__(self, z, q: complex | None = None):
        return self.alg.compile(self.el)(z, 0.0, q)


def q_shift(r: RatFunc, k: int = 1) -> RatFunc:
    """Replace z by q**k * z."""
    return r.q_shift(k)


def arith(a: RatFunc, b: RatFunc, op: str) -> RatFunc:
    """Exact field operation; ``op`` is one of ``+ - * /`` (also ``×`` and ``÷``)."""
    if op == "+":
        return a + b
    if op in ("-", "−"):
        return a - b
    if op in ("*", "×"):
        return a * b
    if op in ("/", "÷"):
        return a / b
    raise ValueError(f"unknown operator {op!r}")


def is_q_periodic(r: RatFunc) -> bool:
    return r.is_q_periodic()
