"""Text equations ``f(q*z)^n = R(z, f(z))`` to exact QDiffEquation values.

Grammar (whitespace-insensitive, ``*`` optional between factors)::

    equation := expr "=" expr
    expr     := term (("+" | "-") term)*
    term     := factor (("*" | "/")? factor)*
    factor   := base ("^" int)?
    base     := "f" "(" arg ")" | "z" | "q" | "i" | number | symbol
              | "(" expr ")" | "-" factor
    arg      := "q" "^"? int? "*"? "z" | "z"
    int      := digits | "-" digits | "(" "-"? digits ")"

A bare ``f`` is read as ``f(z)``.  Identifiers made only of the letters q, z
and i are split into single letters, so ``qz`` means ``q*z``.  Any other
identifier is a symbol whose value must be supplied through ``bindings``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .algebra import Algebra, DivisionByZero, QSpec, RatFunc, get_algebra


class ParseError(ValueError):
    """Syntax error; ``pos`` is the 0-based character offset."""

    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.msg = msg
        self.pos = pos


class NormalizeError(ValueError):
    """The equation parses but is not of the form f(qz)^n = R(z, f)."""


# -- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: Fraction
    text: str = dc_field(default="", compare=False)


@dataclass(frozen=True)
class Var:
    name: str  # z, q or i


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class FApp:
    shift: int  # 0 for f(z), 1 for f(q*z)


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exp: int


@dataclass(frozen=True)
class Eq:
    lhs: object
    rhs: object


# -- lexer -------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^()=])|(?P<bad>\S))"
)
_TRANSLATE = str.maketrans({"−": "-", "×": "*", "·": "*", "÷": "/"})


def _tokens(text: str):
    out = []
    pos = 0
    text = text.translate(_TRANSLATE)
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        val = m.group(kind)
        pos = m.end()
        if kind == "bad":
            raise ParseError(f"unexpected character {val!r}", start)
        if kind == "op" and val == "**":
            val = "^"
        if kind == "id" and set(val) <= {"q", "z", "i"} and len(val) > 1:
            for j, ch in enumerate(val):
                out.append(("id", ch, start + j))
            continue
        out.append((kind, val, start))
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokens(text)
        self.k = 0

    @property
    def cur(self):
        return self.toks[self.k]

    def take(self, val=None, kind=None):
        t = self.cur
        if (val is not None and t[1] != val) or (kind is not None and t[0] != kind):
            want = val if val is not None else kind
            got = t[1] or "end of input"
            raise ParseError(f"expected {want!r}, found {got!r}", t[2])
        self.k += 1
        return t

    def at(self, val):
        return self.cur[0] == "op" and self.cur[1] == val

    def equation(self):
        lhs = self.expr()
        self.take("=")
        rhs = self.expr()
        if self.cur[0] != "end":
            raise ParseError(f"unexpected {self.cur[1]!r}", self.cur[2])
        return Eq(lhs, rhs)

    def expr(self):
        node = self.term()
        while self.at("+") or self.at("-"):
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def _starts_factor(self):
        kind, val, _ = self.cur
        return kind in ("num", "id") or (kind == "op" and val == "(")

    def term(self):
        node = self.factor()
        while True:
            if self.at("*") or self.at("/"):
                op = self.take()[1]
                node = BinOp(op, node, self.factor())
            elif self._starts_factor():
                node = BinOp("*", node, self.factor())
            else:
                return node

    def factor(self):
        if self.at("-"):
            self.take()
            return Neg(self.factor())
        node = self.base()
        if self.at("^"):
            self.take()
            node = Pow(node, self.integer())
        return node

    def integer(self) -> int:
        t = self.cur
        paren = self.at("(")
        if paren:
            self.take()
        sign = 1
        if self.at("-"):
            self.take()
            sign = -1
        t = self.cur
        if t[0] != "num":
            raise ParseError("exponent must be an integer", t[2])
        if not t[1].isdigit():
            raise ParseError("non-integer exponent", t[2])
        self.take()
        if paren:
            self.take(")")
        return sign * int(t[1])

    def base(self):
        kind, val, pos = self.cur
        if kind == "num":
            self.take()
            return Num(Fraction(val), val)
        if kind == "op" and val == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        if kind == "id":
            self.take()
            if val == "f":
                if self.at("("):
                    return self.fapp()
                return FApp(0)
            if val in ("z", "q", "i"):
                return Var(val)
            return Sym(val)
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)

    def fapp(self):
        self.take("(")
        pos = self.cur[2]
        shift = 0
        if self.cur[1] == "q":
            self.take()
            shift = 1
            if self.at("^"):
                self.take()
                shift = self.integer()
            if self.at("*"):
                self.take()
        t = self.cur
        if t[1] != "z":
            raise ParseError("f must be applied to z or q*z", pos)
        self.take()
        if not self.at(")"):
            raise ParseError("f must be applied to z or q*z", pos)
        self.take(")")
        if shift not in (0, 1):
            raise ParseError("only f(z) and f(q*z) are allowed", pos)
        return FApp(shift)


def parse(text: str, qspec: QSpec | None = None):
    """Parse an equation string into an :class:`Eq` AST.

    ``qspec`` is accepted for interface symmetry; parsing does not depend on it.
    """
    return _Parser(text).equation()


def parse_expr(text: str):
    p = _Parser(text)
    node = p.expr()
    if p.cur[0] != "end":
        raise ParseError(f"unexpected {p.cur[1]!r}", p.cur[2])
    return node


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def unparse(node) -> str:
    """Render an AST back to text that re-parses to an equal AST."""
    if isinstance(node, Eq):
        return f"{unparse(node.lhs)} = {unparse(node.rhs)}"
    if isinstance(node, Num):
        return node.text or _num_text(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, FApp):
        return "f(q*z)" if node.shift == 1 else "f(z)"
    if isinstance(node, Neg):
        return f"-{_wrap(node.arg, 3)}"
    if isinstance(node, Pow):
        e = str(node.exp) if node.exp >= 0 else f"({node.exp})"
        return f"{_wrap(node.base, 5)}^{e}"
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        left = _wrap(node.left, p)
        right = _wrap(node.right, p + 1)
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an AST node: {node!r}")


def _num_text(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def _level(node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Pow):
        return 4
    if isinstance(node, Num) and node.value.denominator != 1 and not node.text:
        return 2
    return 5


def _wrap(node, need: int) -> str:
    s = unparse(node)
    return f"({s})" if _level(node) < need else s


# -- evaluation --------------------------------------------------------------

def _uses_i(node) -> bool:
    if isinstance(node, Var):
        return node.name == "i"
    if isinstance(node, (Neg,)):
        return _uses_i(node.arg)
    if isinstance(node, Pow):
        return _uses_i(node.base)
    if isinstance(node, (BinOp, Eq)):
        a, b = (node.left, node.right) if isinstance(node, BinOp) else (node.lhs, node.rhs)
        return _uses_i(a) or _uses_i(b)
    return False


def _eval(node, alg: Algebra, env: dict, allow_shift: bool = False):
    if isinstance(node, Num):
        return alg.const(node.value)
    if isinstance(node, Var):
        if node.name == "z":
            return alg.z
        if node.name == "q":
            return alg.q
        return alg.i
    if isinstance(node, Sym):
        if node.name not in env:
            raise NormalizeError(f"unbound symbol {node.name!r}")
        return env[node.name]
    if isinstance(node, FApp):
        if node.shift != 0 and not allow_shift:
            raise NormalizeError("right-hand side may only contain f(z)")
        return alg.f
    if isinstance(node, Neg):
        return -_eval(node.arg, alg, env)
    if isinstance(node, Pow):
        b = _eval(node.base, alg, env)
        if node.exp <= 0 and b == 0:
            raise NormalizeError("zero raised to a non-positive power")
        return b ** node.exp
    if isinstance(node, BinOp):
        a = _eval(node.left, alg, env)
        b = _eval(node.right, alg, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b == 0:
            raise NormalizeError("division by zero")
        return a / b
    raise TypeError(f"not an AST node: {node!r}")


def _resolve_binding(value, alg: Algebra):
    if isinstance(value, RatFunc):
        if value.alg is alg:
            return value.el
        value = value.to_text()
    if isinstance(value, str):
        node = parse_expr(value)
        return _eval(node, alg, {})
    return alg.const(value)


@dataclass(frozen=True, eq=False)
class QDiffEquation:
    """f(qz)^n = R(z, f) with R stored as one reduced element of the field."""

    n: int
    R: object
    qspec: QSpec

    @property
    def alg(self) -> Algebra:
        return get_algebra(self.qspec)

    def _parts(self):
        return self.alg.coeffs_in(self.R, 1)

    @property
    def R_num(self) -> list:
        return [RatFunc(self.alg, c) for c in self._parts()[0]]

    @property
    def R_den(self) -> list:
        return [RatFunc(self.alg, c) for c in self._parts()[1]]

    @property
    def deg_f(self) -> int:
        num, den = self._parts()
        return max(len(num), len(den)) - 1

    def __eq__(self, other):
        return (isinstance(other, QDiffEquation) and self.n == other.n
                and self.qspec == other.qspec and Algebra.eq(self.R, other.R))

    def __hash__(self):
        return hash((self.n, self.qspec))

    def rhs_text(self) -> str:
        num, den = self._parts()
        alg = self.alg
        return _fpoly_text(alg, num) if len(den) == 1 else (
            f"({_fpoly_text(alg, num)})/({_fpoly_text(alg, den)})")

    def to_text(self) -> str:
        lhs = "f(q*z)" if self.n == 1 else f"f(q*z)^{self.n}"
        return f"{lhs} = {self.rhs_text()}"

    def __str__(self):
        return self.to_text()


def _fpoly_text(alg: Algebra, cs) -> str:
    parts = []
    for j in range(len(cs) - 1, -1, -1):
        c = cs[j]
        if c == 0:
            continue
        ct = alg.text(c)
        if j == 0:
            parts.append(ct)
        else:
            fp = "f(z)" if j == 1 else f"f(z)^{j}"
            parts.append(fp if Algebra.eq(c, alg.one) else f"{ct}*{fp}")
    return " + ".join(parts) or "0"


def normalize(ast, qspec: QSpec | None = None, bindings: dict | None = None) -> QDiffEquation:
    """Collect the right-hand side into a reduced R(z, f) and read off n."""
    if not isinstance(ast, Eq):
        raise NormalizeError("not an equation")
    qspec = qspec or QSpec.generic()
    bindings = bindings or {}
    needs_i = _uses_i(ast) or any(
        isinstance(v, complex) and v.imag != 0 for v in bindings.values()
    ) or any(isinstance(v, str) and "i" in re.findall(r"[A-Za-z]+", v) for v in bindings.values())
    if needs_i and not qspec.adjoin_i:
        qspec = QSpec(qspec.mode, qspec.N, qspec.re, qspec.im, adjoin_i=True)
    alg = get_algebra(qspec)

    lhs = ast.lhs
    n = 1
    if isinstance(lhs, Pow):
        n = lhs.exp
        lhs = lhs.base
    if not isinstance(lhs, FApp) or lhs.shift != 1 or n < 1:
        raise NormalizeError("left-hand side must be f(q*z)^n with n >= 1")

    env = {name: _resolve_binding(v, alg) for name, v in bindings.items()}
    try:
        R = _eval(ast.rhs, alg, env)
    except DivisionByZero as exc:
        raise NormalizeError(str(exc)) from None
    if R == 0:
        raise NormalizeError("right-hand side is identically zero")
    return QDiffEquation(n, alg.canon(R), qspec)


def parse_equation(text: str, qspec: QSpec | None = None,
                   bindings: dict | None = None) -> QDiffEquation:
    return normalize(parse(text), qspec, bindings)


def make_equation(n: int, R, qspec: QSpec) -> QDiffEquation:
    """Wrap an already-built field element as an equation."""
    alg = get_algebra(qspec)
    if isinstance(R, RatFunc):
        R = R.el
    if R.field is not alg.F:
        raise NormalizeError("R belongs to a different coefficient field")
    return QDiffEquation(n, R, qspec)


def read_equations(lines):
    """Yield (line_number, text) for non-blank, non-comment lines."""
    for no, line in enumerate(lines, 1):
        s = line.strip()
        if s and not s.startswith("#"):
            yield no, s
