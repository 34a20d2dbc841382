from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings, strategies as st

from qmk.algebra import QSpec, RatFunc
from qmk.parser import parse_equation
from qmk.rational import (SolverError, brute_force_oracle, moebius_matrix, solution_key,
                          solve_linear, solve_moebius, solve_riccati_A, solve_riccati_B,
                          verify_solution)


def texts(xs):
    return sorted(c.to_text() for c in xs)


def riccati_A_eq(A, spec):
    return parse_equation("f(qz) = (f + A)/(1 - f)", spec, {"A": str(A)})


def riccati_B_eq(B, spec):
    return parse_equation("f(qz) = B/f", spec, {"B": str(B)})


def check_members(eq, res, samples=((1, 2, 3), (2, -1, 5), (1, 0, 0), (0, 0, 1))):
    for c in res.constants:
        assert verify_solution(eq, c)
    for fam in res.families:
        for s in samples:
            try:
                r = fam.member(s[:len(fam.terms)])
            except ZeroDivisionError:
                continue
            assert verify_solution(eq, r)


def test_linear_power_family():
    res = solve_linear(9, 0, QSpec.numeric(3), 5)
    assert len(res.families) == 1
    fam = res.families[0]
    member = fam.member([1, 1])
    z = RatFunc.z(QSpec.numeric(3))
    assert member == z ** 2


def test_linear_obstruction():
    res = solve_linear(2, 1, QSpec.numeric(3), 5)
    assert texts(res.constants) == ["(-1)"]
    assert not res.families
    assert "no integer k" in res.obstruction


def test_linear_a_equals_one():
    res = solve_linear(1, 1, QSpec.generic(), 5)
    assert not res.constants and not res.families and "b=0" in res.obstruction
    assert solve_linear(1, 0, QSpec.generic(), 5).all_constants


def test_riccati_A_constants():
    for spec in (QSpec.numeric(5), QSpec.generic(), QSpec.root_of_unity(3)):
        res = solve_riccati_A(-4, spec, 3)
        assert sorted(res.to_dict()["constants"]) == ["(-2)", "2"]
    eq = riccati_A_eq(-4, QSpec.numeric(5))
    assert solution_key(brute_force_oracle(eq, 4)) == solution_key(solve_riccati_A(-4, QSpec.numeric(5), 4))


def test_riccati_A_generic():
    res = solve_riccati_A(1, QSpec.generic(), 4)
    assert res.constants == [] and res.obstruction == "generic-|q|≠1"
    res = solve_riccati_A(1, QSpec.generic(adjoin_i=True), 4)
    assert len(res.constants) == 2


def test_riccati_A_root_of_unity_two():
    spec = QSpec.root_of_unity(2)
    res = solve_riccati_A(1, spec, 4)
    assert solution_key(res) == solution_key(brute_force_oracle(riccati_A_eq(1, spec), 4))
    assert res.candidate_degrees == [2, 4]


def test_riccati_B_examples():
    assert sorted(solve_riccati_B(9, QSpec.numeric(2), 3).to_dict()["constants"]) == ["(-3)", "3"]
    res = solve_riccati_B(1, QSpec.numeric("1j"), 4)
    assert res.candidate_degrees == [2, 4]
    spec = QSpec.root_of_unity(4)
    res = solve_riccati_B(1, spec, 2)
    assert [f.degree for f in res.families] == [2, 2]
    eq = riccati_B_eq(1, spec)
    check_members(eq, res)
    assert solution_key(res) == solution_key(brute_force_oracle(eq, 2))


def test_frozen_family_q_minus_one():
    # f(-z) = 1/f(z) is solved by any P(z)/P(-z)
    spec = QSpec.root_of_unity(2)
    res = solve_riccati_B(1, spec, 2)
    eq = riccati_B_eq(1, spec)
    assert solution_key(res) == solution_key(brute_force_oracle(eq, 2))
    z = RatFunc.z(spec)
    assert verify_solution(eq, (1 + z) / (1 - z))
    assert verify_solution(eq, (1 + z + z ** 2) / (1 - z + z ** 2))
    assert not verify_solution(eq, (1 - z ** 2) / (1 + z ** 2))


@pytest.mark.parametrize("fn,arg", [(solve_riccati_A, -1), (solve_riccati_B, 0)])
def test_rejected_parameters(fn, arg):
    with pytest.raises(SolverError):
        fn(arg, QSpec.generic())


def test_linear_zero_rejected():
    with pytest.raises(SolverError):
        solve_linear(0, 1, QSpec.generic())


def test_oracle_periodic_constants_only():
    eq = parse_equation("f(qz) = f", QSpec.numeric(3))
    res = brute_force_oracle(eq, 3)
    assert not res.families and res.all_constants


def test_eigenvalue_ratio_case_beyond_root_of_unity():
    # A = -1/9, q = 2: mu1/mu2 = 2 = q, so a nonconstant solution exists with |q| != 1
    spec = QSpec.numeric(2)
    res = solve_riccati_A(Fr(-1, 9), spec, 3)
    assert res.families
    eq = riccati_A_eq("-1/9", spec)
    z = RatFunc.z(spec)
    assert verify_solution(eq, (1 - z) / (3 * (1 + z)))
    assert solution_key(res) == solution_key(brute_force_oracle(eq, 3))


def test_general_moebius_input():
    spec = QSpec.root_of_unity(3)
    eq = parse_equation("f(qz) = (2f + 1)/(f + 2)", spec)
    res = solve_moebius(moebius_matrix(eq), spec, 3)
    assert solution_key(res) == solution_key(brute_force_oracle(eq, 3))
    check_members(eq, res)


def test_moebius_needs_constant_coefficients():
    with pytest.raises(SolverError):
        moebius_matrix(parse_equation("f(qz) = z f + 1"))


@pytest.mark.parametrize("N", [2, 3, 4, 6])
@pytest.mark.parametrize("kind,val", [("A", -4), ("A", 3), ("B", 1), ("B", -1)])
def test_oracle_equivalence_roots_of_unity(N, kind, val):
    spec = QSpec.root_of_unity(N)
    if kind == "A":
        res, eq = solve_riccati_A(val, spec, 4), riccati_A_eq(val, spec)
    else:
        res, eq = solve_riccati_B(val, spec, 4), riccati_B_eq(val, spec)
    assert solution_key(res) == solution_key(brute_force_oracle(eq, 4))
    check_members(eq, res)


@settings(max_examples=12, deadline=None)
@given(st.sampled_from([2, 3, 4, 6]), st.sampled_from([-4, -2, 2, 3]), st.integers(1, 3))
def test_degree_cap_monotone(N, A, s):
    spec = QSpec.root_of_unity(N)
    small = solve_riccati_A(A, spec, s)
    big = solve_riccati_A(A, spec, s + 1)
    big_keys = {(str(f.lam), f.degree, len(f.terms)) for f in big.families}
    for f in small.families:
        # each small family is a sub-family of a big one with the same lambda
        assert any(str(f.lam) == k[0] and k[2] >= len(f.terms) for k in big_keys)


@settings(max_examples=10, deadline=None)
@given(st.sampled_from(["2", "1/2", "3i"]), st.sampled_from([1, 4, -1]))
def test_obstruction_soundness(qv, B):
    spec = QSpec.numeric(qv)
    res = solve_riccati_B(B, spec, 3)
    if res.obstruction:
        assert not brute_force_oracle(riccati_B_eq(B, spec), 3).families
