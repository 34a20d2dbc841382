import math

import numpy as np
import pytest

from qmk.growth import (
    Grid, GrowthError, GrowthOverflow, GrowthReport, STANDARD_FAMILIES, ahlfors_shimizu_T,
    characteristic_profile, dichotomy_check, growth_report, order_estimate, rational8,
    run_standard,
)
from qmk.special import jacobi_sn


def test_constant_has_zero_characteristic():
    assert ahlfors_shimizu_T(lambda z: 0 * z + 3.0, 5.0, Grid(32, 64)) == 0.0


@pytest.mark.parametrize("r", [1.0, 10.0])
def test_identity_closed_form(r):
    T = ahlfors_shimizu_T(lambda z: z, r, Grid(200, 256))
    assert abs(T / (0.5 * math.log(1 + r * r)) - 1) < 0.02


def test_exp_closed_form():
    # T0(r, e^z) = r/pi + O(1)
    r = 30.0
    T = ahlfors_shimizu_T(np.exp, r, Grid(600, 4096))
    assert abs(T - r / math.pi) < 1.0


def test_coarse_grid_rejected():
    with pytest.raises(GrowthError):
        Grid(8, 64)


def test_order_preconditions():
    rep = GrowthReport([1, 2, 3], [1, 2, 3], None, [0, 0, 0], "x")
    with pytest.raises(GrowthError):
        order_estimate(rep)
    rep = GrowthReport([1, 2, 3, 4, 5], [1, 2, 3, 4, 5], None, [0] * 5, "x")
    with pytest.raises(GrowthError):
        order_estimate(rep)


def test_monotone_and_refinement_stable():
    fam = STANDARD_FAMILIES["sn"]
    radii = [2.0, 4.0, 6.0, 8.0]
    g = Grid(160, 512)
    T1 = characteristic_profile(fam.evaluator, radii, g)
    T2 = characteristic_profile(fam.evaluator, radii, g.refined())
    assert np.all(np.diff(T1) >= 0)
    assert np.max(np.abs(T2 / T1 - 1)) < 0.05


@pytest.mark.parametrize("name", ["rational", "exp", "sn"])
def test_standard_orders(name):
    fam = STANDARD_FAMILIES[name]
    rep = run_standard(name)
    assert abs(rep.order_estimate - fam.expected_order) <= fam.order_tol


def test_sn_square_order():
    fam = STANDARD_FAMILIES["sn-square"]
    rep = run_standard("sn-square")
    assert abs(rep.order_estimate - 4.0) <= 0.5


def test_report_serialisation():
    rep = growth_report(lambda z: z, [1.0, 2.0, 4.0, 8.0, 16.0], "identity", Grid(64, 64))
    d = rep.to_dict()
    assert d["function_id"] == "identity" and len(d["T_values"]) == 5
    assert rep.to_csv().splitlines()[0] == "r,T0"


def test_dichotomy():
    d = dichotomy_check(rational8, 2.0)
    assert d["zero_order_decreasing"]
    assert not d["contrast_decreasing"]
    assert d["contrast_final"] > 0
    assert d["dichotomy_holds"]


def test_dichotomy_constant():
    d = dichotomy_check(lambda w: 0 * w + 2.0, 2.0, r_list=[2.0, 3.0, 4.0],
                        contrast_r_list=[1.0, 2.0, 3.0])
    assert all(t == 0 for t in d["zero_order"].T_values)
    assert d["zero_order_decreasing"]


def test_sn_exp_ratio_not_decreasing():
    rep = run_standard("sn-exp")
    rat = rep.hypertype_ratio
    assert rat[-1] > rat[-2] > rat[-3]
    assert rat[-1] > 0.5


def test_dichotomy_rejects_unit_circle():
    with pytest.raises(GrowthError):
        dichotomy_check(rational8, 1j)


def test_overflow_reported():
    with pytest.raises(GrowthOverflow) as exc:
        dichotomy_check(rational8, 2.0, r_list=[100.0, 2000.0])
    assert exc.value.max_feasible_r == pytest.approx(700 / math.log(2))
