import random
from fractions import Fraction as Fr

import numpy as np
import pytest

from qmk.algebra import QSpec, RatFunc, get_algebra
from qmk.parser import parse_equation
from qmk.classify import (
    FORM_IDS, FORM_POWER, THEOREM_SET, COROLLARY_SET, ZERO_ORDER_POSSIBLE, NO_TRANSCENDENTAL,
    NO_ZERO_ORDER, UNCLASSIFIED, CanonicalForm, DegenerateParameter, apply_transformation,
    canonical_equation, check_constraint, check_malmquist, classify, constraint_suite,
    delta5_constant_roots, iterate_identity, match_all, match_canonical, transform_chain,
    witness_matches,
)

G = QSpec.generic()
ALG = get_algebra(G)

SCALABLE = {
    "FERMAT-SINE": {}, "FERMAT-MOBIUS": {"delta": ALG.z}, "FERMAT-SHIFT3": {},
    "SN-KAPPA": {"kappa": Fr(1, 2)}, "FERMAT-CUBIC-INV": {}, "C1-DELTA1": {"delta1": 2},
    "C2-DELTA2": {"delta2": 2}, "C3-DELTA3": {"delta3": -1},
    "C4-DELTA4": {"theta": -1, "delta4": 8}, "C5-CUBIC": {}, "C6-DELTA5": {"delta5": 2},
}


def test_malmquist_examples():
    assert check_malmquist(parse_equation("f(qz)^2 = 1 - f^2"))
    assert not check_malmquist(parse_equation("f(qz)^2 = f^3"))
    assert check_malmquist(parse_equation("f(qz)^3 = 1 - f^(-3)"))


def test_match_examples():
    form, tr = match_canonical(parse_equation("f(qz)^2 = 1 - f^2"))
    assert form.id == "FERMAT-SINE" and tr.kind == "identity"
    form, tr = match_canonical(parse_equation("f(qz)^2 = (1 - 4f^2)/4"))
    assert form.id == "FERMAT-SINE" and tr.kind == "scale"
    assert tr.value == RatFunc.from_value(4, G)          # alpha^2 = 4, alpha = 2
    form, tr = match_canonical(parse_equation("f(qz) = (3f+1)/(f+2)"))
    assert form.id == "Q-RICCATI" and tr.kind == "identity"
    p = {k: v.to_text() for k, v in form.params.items()}
    assert p == {"b1": "3", "b2": "1", "b3": "2"}


def test_no_match_returns_none():
    assert match_canonical(parse_equation("f(qz)^2 = z*(f^2+1)/(f^2+f+3)")) is None


def test_canonical_corpus_identity():
    from importlib.resources import files
    lines = files("qmk").joinpath("data/canonical13.qde").read_text().splitlines()
    eqs = [l for l in lines if l.strip() and not l.startswith("#")]
    ids = []
    for t in eqs:
        rep = classify(parse_equation(t, G))
        assert rep.transformation.kind == "identity"
        ids.append(rep.canonical.id)
    assert tuple(ids) == FORM_IDS


@pytest.mark.parametrize("fid", sorted(SCALABLE))
@pytest.mark.parametrize("kind", ["scale", "inverse"])
def test_scaling_soundness(fid, kind):
    z = ALG.z
    for a in (Fr(2), Fr(-3, 5), (z + 1) / (z - 2)):
        eq = apply_transformation(CanonicalForm(fid, SCALABLE[fid]), a, kind, G)
        ws = match_all(eq)
        val = RatFunc(ALG, ALG.const(a) ** FORM_POWER[fid])
        assert witness_matches(ws, fid, kind, val), (fid, kind, a)


def test_scaling_in_root_of_unity_mode():
    spec = QSpec.root_of_unity(3)
    alg = get_algebra(spec)
    eq = apply_transformation(CanonicalForm("C3-DELTA3", {"delta3": -1}), alg.z + 1, "inverse", spec)
    ws = match_all(eq)
    assert witness_matches(ws, "C3-DELTA3", "inverse", RatFunc(alg, (alg.z + 1) ** 2))


def test_constraint_examples():
    r3 = get_algebra(QSpec.root_of_unity(3))
    w = RatFunc(r3, r3.q)   # primitive cube root of unity
    assert check_constraint("C1", w).is_zero
    assert check_constraint("C2", RatFunc.from_value(2, G)).is_zero
    assert check_constraint("C4", RatFunc.from_value(8, G), theta=-1).is_zero
    n2 = QSpec.root_of_unity(2)
    zz = RatFunc.z(n2)
    res = check_constraint("C3", zz)
    assert res == -zz ** 2 - 1


def test_constraint_suite_passes():
    rep = constraint_suite()
    assert rep["passed"]
    assert len(rep["delta5_roots"]) == 6


def test_delta5_roots():
    roots = delta5_constant_roots()
    coeffs = [8, 0, 8, -1, -4, -6, -4, -1]
    assert len(np.roots(coeffs)) == 7
    assert np.polyval(coeffs, 0) == -1
    for r in roots:
        assert abs(8 * r ** 7 + 8 * r ** 5 - (r + 1) ** 4) < 1e-10
    # frozen from an independent companion-matrix solve with numpy.linalg.eigvals
    comp = np.diag(np.ones(6), -1).astype(complex)
    comp[0, :] = -np.array(coeffs[1:]) / coeffs[0]
    ev = np.linalg.eigvals(comp)
    # the excluded root is delta = -1 only ((x+1)^4 factor vanishes there: 8(-1)^7+8(-1)^5 = -16 != 0)
    for r in roots:
        assert np.min(np.abs(ev - r)) < 1e-8


def test_iteration_identities_symbolic():
    c1 = iterate_identity("C1-DELTA1")
    assert c1["passed"] and c1["second_iterate_ok"]
    assert c1["iterates"][-1] == "X"
    c2 = iterate_identity("C2-DELTA2")
    assert c2["passed"]


def test_iteration_c2_constant():
    rep = iterate_identity("C2-DELTA2", d0=2)
    assert rep["passed"]
    assert rep["shifted_parameters"][0] == "2"


def test_iteration_degenerate():
    with pytest.raises(DegenerateParameter):
        iterate_identity("C1-DELTA1", d0=-1)
    with pytest.raises(DegenerateParameter):
        iterate_identity("C2-DELTA2", d0=1)


def test_transform_chain_shapes():
    r = transform_chain(CanonicalForm("C4-DELTA4", {"theta": 1, "delta4": ALG.z}), G)
    assert r["induced_form"] == "C1-DELTA1" and r["identity_verified"]
    r = transform_chain(CanonicalForm("C4-DELTA4", {"theta": -1, "delta4": 8}), G)
    assert r["induced_form"] == "C2-DELTA2" and r["identity_verified"]
    # the induced parameter need not satisfy its own constraint
    assert not r["induced_constraint_zero"]


def test_transform_chain_c2_to_c3_preserves_constraint():
    spec = QSpec.root_of_unity(2)
    alg = get_algebra(spec)
    d2 = 2 / (1 - alg.z)          # (d-1)(qz)(d-1)(z) = 1 at q = -1
    assert check_constraint("C2", RatFunc(alg, d2)).is_zero
    r = transform_chain(CanonicalForm("C2-DELTA2", {"delta2": d2}), spec)
    assert r["induced_form"] == "C3-DELTA3" and r["identity_verified"]
    assert r["induced_constraint_zero"]
    r = transform_chain(CanonicalForm("C2-DELTA2", {"delta2": 2}), G)
    assert r["induced_constraint_zero"]


def test_verdict_examples():
    mob = classify(parse_equation("f(qz)^2 = 1 - ((z f - 1)/(f - z))^2", G))
    assert mob.verdict == ZERO_ORDER_POSSIBLE
    c1 = classify(parse_equation("f(qz)^2 = 2 (f^2 - 1)", G))
    assert c1.verdict == NO_TRANSCENDENTAL
    sh = classify(parse_equation("f(qz)^2 = 1 - ((f+3)/(f-1))^2", QSpec.root_of_unity(5)), "unrestricted")
    assert sh.canonical.id == "FERMAT-SHIFT3" and sh.verdict == ZERO_ORDER_POSSIBLE
    assert classify(parse_equation("f(qz)^2 = f^3", G)).verdict == NO_ZERO_ORDER
    assert classify(parse_equation("f(qz)^2 = z*(f^2+1)/(f^2+f+3)", G)).verdict == UNCLASSIFIED


def test_verdict_consistency():
    rng = random.Random(3)
    for fid in FORM_IDS:
        for regime in ("generic", "unrestricted"):
            params = SCALABLE.get(fid, {"a1": 2, "a2": 1} if fid == "Q-LINEAR"
                                  else {"b1": 3, "b2": 1, "b3": 2})
            eq = canonical_equation(CanonicalForm(fid, params), G)
            rep = classify(eq, regime)
            if rep.verdict == ZERO_ORDER_POSSIBLE:
                assert fid in (THEOREM_SET if regime == "generic" else COROLLARY_SET)


def test_degenerate_parameters_rejected():
    # kappa = 0 is excluded for SN-KAPPA; with g = 1/f the equation is FERMAT-SINE
    rep = classify(parse_equation("f(qz)^2 = f^2/(f^2 - 1)", G))
    assert rep.canonical.id == "FERMAT-SINE"
    assert rep.transformation.kind == "inverse"


def test_report_is_json_ready():
    import json
    rep = classify(parse_equation("f(qz)^2 = 1 - ((z f - 1)/(f - z))^2", G))
    json.dumps(rep.to_dict())
