"""Classify a few equations and show the transformation back to a canonical form."""
from qmk.algebra import QSpec
from qmk.classify import classify
from qmk.parser import parse_equation

EQUATIONS = [
    "f(qz)^2 = 1 - f^2",                      # canonical sine-type form
    "f(qz)^2 = (1 - 4f^2)/4",                 # the same form after f -> 2f
    "f(qz)^2 = f^2/(f^2 - 1)",                # inverse of the sine-type form
    "f(qz) = (3f + 1)/(f + 2)",               # Riccati
    "f(qz)^2 = 2 (f^2 - 1)",
    "f(qz)^2 = f^3",                          # degree mismatch
    "f(qz)^2 = z*(f^2+1)/(f^2+f+3)",          # no canonical form
]

if __name__ == "__main__":
    for text in EQUATIONS:
        rep = classify(parse_equation(text, QSpec.generic()))
        d = rep.to_dict()
        cid = d.get("canonical", {}).get("id", "-")
        tr = d.get("transformation", {})
        print(f"{text:40s} -> {cid:16s} {tr.get('kind', ''):9s} {tr.get('value', '')!s:10s} {rep.verdict}")
