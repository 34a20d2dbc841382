"""Classification, rational solutions and numerics for q-difference equations
f(qz)^n = R(z, f) of Malmquist type."""

from .algebra import QSpec, RatFunc, q_shift, is_q_periodic, DivisionByZero
from .parser import parse, parse_equation, QDiffEquation, ParseError, NormalizeError
from .classify import classify, match_canonical, check_malmquist, check_constraint
from .rational import solve_linear, solve_riccati_A, solve_riccati_B, brute_force_oracle

__version__ = "0.1.0"

__all__ = [
    "QSpec", "RatFunc", "q_shift", "is_q_periodic", "DivisionByZero",
    "parse", "parse_equation", "QDiffEquation", "ParseError", "NormalizeError",
    "classify", "match_canonical", "check_malmquist", "check_constraint",
    "solve_linear", "solve_riccati_A", "solve_riccati_B", "brute_force_oracle",
    "__version__",
]
