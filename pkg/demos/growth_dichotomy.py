"""Ahlfors-Shimizu characteristic, order estimates and the hyper-type contrast."""
from qmk.growth import STANDARD_FAMILIES, dichotomy_check, rational8, run_standard

if __name__ == "__main__":
    for name, fam in STANDARD_FAMILIES.items():
        rep = run_standard(name)
        est = "-" if rep.order_estimate is None else f"{rep.order_estimate:.3f}"
        print(f"{name:10s} order {est:>6s} (expected {fam.expected_order})")
    d = dichotomy_check(rational8, 2.0)
    print("log T/r for rational(e^{z log 2}):", [round(x, 3) for x in d["zero_order"].hypertype_ratio])
    print("log T/r for sn(e^{z log 2})      :", [round(x, 3) for x in d["contrast"].hypertype_ratio])
    print("dichotomy holds:", d["dichotomy_holds"])
