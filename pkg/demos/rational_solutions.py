"""Rational solutions of the Riccati normal forms.

On the unit circle (q a root of unity) nonconstant families appear; for |q| != 1
the grid used by the tests only has constants.  The last case shows a nonconstant
solution with |q| = 2, produced when q equals the ratio of the two eigenvalues.
"""
from fractions import Fraction

from qmk.algebra import QSpec
from qmk.parser import parse_equation
from qmk.rational import brute_force_oracle, solution_key, solve_riccati_A, solve_riccati_B

CASES = [
    ("B", 1, QSpec.root_of_unity(4)),
    ("A", -4, QSpec.root_of_unity(3)),
    ("A", -4, QSpec.numeric("2")),
    ("A", Fraction(-1, 9), QSpec.numeric("2")),
]

if __name__ == "__main__":
    for kind, v, spec in CASES:
        if kind == "A":
            res = solve_riccati_A(v, spec, 3)
            eq = parse_equation("f(qz) = (f + A)/(1 - f)", spec, {"A": str(v)})
        else:
            res = solve_riccati_B(v, spec, 3)
            eq = parse_equation("f(qz) = B/f", spec, {"B": str(v)})
        agree = solution_key(res) == solution_key(brute_force_oracle(eq, 3))
        print(f"{kind}={v} q={spec.describe()}: {len(res.constants)} constants, "
              f"{len(res.families)} families, oracle agrees: {agree}")
        for fam in res.families:
            d = fam.to_dict()
            print(f"    degree {d['degree']}: P = {d['P']}, Q = {d['Q']}")
