"""Numerical Nevanlinna growth through the Ahlfors-Shimizu characteristic.

T0(r) = (1/pi) * integral over |z| < r of rho(z) log(r/|z|) dA, where
rho = (|f'|/(1 + |f|^2))^2 is the squared spherical derivative.  This equals
(1/pi) int_0^r A(t)/t dt with A(t) the spherical area of the image of |z| < t.
"""

from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np

from .special import SolutionFamily, jacobi_sn

MIN_RADIAL_CELLS = 16
EXP_LIMIT = 700.0


class GrowthError(ValueError):
    pass


class GrowthOverflow(GrowthError):
    def __init__(self, msg: str, max_feasible_r: float):
        super().__init__(f"{msg}; largest feasible r is {max_feasible_r:.4g}")
        self.max_feasible_r = max_feasible_r


@dataclass(frozen=True)
class Grid:
    """Polar midpoint grid.  ``radial`` is "linear" or "log" (log cells outside r_inner)."""

    n_r: int = 400
    n_theta: int = 1024
    radial: str = "linear"
    r_inner: float = 1.0

    def __post_init__(self):
        if self.n_r < MIN_RADIAL_CELLS:
            raise GrowthError(f"grid too coarse: need at least {MIN_RADIAL_CELLS} radial cells")
        if self.n_theta < 8:
            raise GrowthError("grid too coarse: need at least 8 angular cells")
        if self.radial not in ("linear", "log"):
            raise GrowthError(f"unknown radial spacing {self.radial!r}")

    def edges(self, R: float) -> np.ndarray:
        if self.radial == "linear" or R <= self.r_inner:
            return np.linspace(0.0, R, self.n_r + 1)
        n_in = max(MIN_RADIAL_CELLS // 2, self.n_r // 8)
        inner = np.linspace(0.0, self.r_inner, n_in + 1)
        outer = np.geomspace(self.r_inner, R, self.n_r - n_in + 1)
        return np.concatenate([inner, outer[1:]])

    def refined(self) -> "Grid":
        return Grid(2 * self.n_r, 2 * self.n_theta, self.radial, self.r_inner)

    def to_dict(self) -> dict:
        return {"n_r": self.n_r, "n_theta": self.n_theta, "radial": self.radial,
                "r_inner": self.r_inner}


def spherical_density(evaluator: Callable, z: np.ndarray, h: np.ndarray | float) -> np.ndarray:
    """Squared spherical derivative by central differences.

    The difference quotient is taken in the chart where the function is bounded
    (f itself or 1/f), so cells next to poles stay finite.
    """
    with np.errstate(all="ignore"):
        f0 = np.asarray(evaluator(z), dtype=complex)
        fp = np.asarray(evaluator(z + h), dtype=complex)
        fm = np.asarray(evaluator(z - h), dtype=complex)
        big = ~(np.abs(f0) <= 1.0)
        g0 = np.where(big, 1.0 / f0, f0)
        gp = np.where(big, 1.0 / fp, fp)
        gm = np.where(big, 1.0 / fm, fm)
        d = np.abs(gp - gm) / (2.0 * h)
        rho = (d / (1.0 + np.abs(g0) ** 2)) ** 2
    # a pole hit exactly, or an overflowed sample, contributes a null cell
    return np.nan_to_num(rho, nan=0.0, posinf=0.0, neginf=0.0)


def characteristic_profile(evaluator: Callable, radii: Sequence[float], grid: Grid | None = None,
                           step: float = 1e-6) -> np.ndarray:
    """T0 at each radius, from one polar grid reaching max(radii)."""
    grid = grid or Grid()
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0):
        raise GrowthError("radii must be positive")
    R = float(np.max(radii))
    e = grid.edges(R)
    s = 0.5 * (e[1:] + e[:-1])
    ds = np.diff(e)
    th = 2.0 * np.pi * (np.arange(grid.n_theta) + 0.5) / grid.n_theta
    dth = 2.0 * np.pi / grid.n_theta
    z = s[:, None] * np.exp(1j * th)[None, :]
    h = step * np.maximum(1.0, s)[:, None]
    rho = spherical_density(evaluator, z, h)
    # radial profile, summed in a fixed order for reproducibility
    a = rho.sum(axis=1) * dth * s * ds
    out = []
    for r in radii:
        inside = e[1:] <= r * (1 + 1e-12)
        w = np.log(r / s[inside])
        out.append(float(np.sum(a[inside] * w)) / math.pi)
    return np.maximum(np.array(out), 0.0)


def ahlfors_shimizu_T(evaluator: Callable, r: float, grid: Grid | None = None) -> float:
    return float(characteristic_profile(evaluator, [r], grid)[0])


@dataclass
class GrowthReport:
    radii: list
    T_values: list
    order_estimate: float | None
    hypertype_ratio: list
    function_id: str
    grid: dict = dc_field(default_factory=dict)
    notes: list = dc_field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "function_id": self.function_id,
            "radii": [float(r) for r in self.radii],
            "T_values": [float(t) for t in self.T_values],
            "order_estimate": self.order_estimate,
            "hypertype_ratio": [float(x) for x in self.hypertype_ratio],
            "grid": self.grid,
            "notes": list(self.notes),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "T0"])
        for r, t in zip(self.radii, self.T_values):
            w.writerow([repr(float(r)), repr(float(t))])
        return buf.getvalue()


def _slope(radii, T) -> float:
    x = np.log(np.asarray(radii, dtype=float))
    y = np.log(np.asarray(T, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def order_estimate(report: GrowthReport, min_span: float = 10.0) -> float:
    """Least-squares slope of log T against log r.

    ``min_span`` is the required ratio r_max/r_min (one decade by default).
    """
    r = np.asarray(report.radii, dtype=float)
    T = np.asarray(report.T_values, dtype=float)
    if len(r) < 5:
        raise GrowthError("order estimate needs at least 5 radii")
    if r[-1] / r[0] < min_span * (1 - 1e-12):
        raise GrowthError(f"order estimate needs r_max/r_min >= {min_span:g}")
    if np.any(T <= 0):
        raise GrowthError("characteristic vanishes; order undefined")
    return _slope(r, T)


def growth_report(evaluator: Callable, radii: Sequence[float], function_id: str,
                  grid: Grid | None = None, fit_order: bool = True,
                  min_span: float = 10.0) -> GrowthReport:
    radii = [float(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise GrowthError("radii must be strictly increasing")
    grid = grid or Grid()
    T = characteristic_profile(evaluator, radii, grid)
    # monotone by construction up to rounding; enforce the invariant explicitly
    T = np.maximum.accumulate(T)
    rep = GrowthReport(radii, [float(t) for t in T], None,
                       [math.log(t) / r if t > 0 else 0.0 for r, t in zip(radii, T)],
                       function_id, grid.to_dict())
    if fit_order:
        try:
            rep.order_estimate = order_estimate(rep, min_span)
        except GrowthError as exc:
            rep.notes.append(str(exc))
    return rep


def omega(q: complex) -> Callable:
    """omega(z) = exp(z log q) with the principal logarithm."""
    lq = cmath.log(complex(q))

    def w(z):
        return np.exp(np.asarray(z, dtype=complex) * lq)

    return w


def _compose(f: Callable, q: complex, r_max: float) -> Callable:
    lq = cmath.log(complex(q))
    limit = EXP_LIMIT / abs(lq)
    if r_max * (1 + 1e-9) > limit:
        raise GrowthOverflow("exp(z log q) overflows on the requested disc", limit)
    w = omega(q)
    return lambda z: f(w(z))


DEFAULT_DICHOTOMY_RADII = tuple(np.linspace(2.0, 12.0, 11))
DEFAULT_CONTRAST_RADII = tuple(np.linspace(1.0, 4.0, 7))


def dichotomy_check(f_family, q: complex, r_list: Sequence[float] = DEFAULT_DICHOTOMY_RADII,
                    contrast_r_list: Sequence[float] = DEFAULT_CONTRAST_RADII,
                    contrast_k: float = 0.5, grid: Grid | None = None,
                    contrast_grid: Grid | None = None) -> dict:
    """Hypertype ratios log T(r, f o omega)/r for f and for the contrast sn o omega."""
    q = complex(q)
    if abs(abs(q) - 1.0) < 1e-12:
        raise GrowthError("dichotomy check needs |q| != 1")
    f = f_family.evaluator if isinstance(f_family, SolutionFamily) else f_family
    fid = f_family.kind if isinstance(f_family, SolutionFamily) else getattr(f, "__name__", "f")
    grid = grid or Grid(200, 512)
    contrast_grid = contrast_grid or Grid(400, 2048)
    g = _compose(f, q, max(r_list))
    h = _compose(lambda w: jacobi_sn(w, contrast_k, pole_tol=None), q, max(contrast_r_list))
    rep_f = growth_report(g, r_list, f"{fid} o omega", grid, fit_order=False)
    rep_s = growth_report(h, contrast_r_list, f"sn(., {contrast_k}) o omega", contrast_grid,
                          fit_order=False)

    def decreasing_tail(rat):
        tail = rat[-3:]
        return len(tail) == 3 and all(b < a for a, b in zip(tail, tail[1:]))

    zero = all(t == 0 for t in rep_f.T_values)
    # log T0/r is negative while T0 < 1, so the floor is only informative at the top radii
    floor = min(rep_s.hypertype_ratio) if rep_s.hypertype_ratio else 0.0
    return {
        "q": q,
        "zero_order": rep_f,
        "contrast": rep_s,
        "zero_order_decreasing": zero or decreasing_tail(rep_f.hypertype_ratio),
        "contrast_decreasing": decreasing_tail(rep_s.hypertype_ratio),
        "contrast_floor": floor,
        "contrast_final": rep_s.hypertype_ratio[-1] if rep_s.hypertype_ratio else 0.0,
        "dichotomy_holds": (zero or decreasing_tail(rep_f.hypertype_ratio))
        and not decreasing_tail(rep_s.hypertype_ratio),
    }


# -- standard test families ------------------------------------------------------------
# Radii and grids are chosen so the double-precision evaluators neither overflow
# nor under-resolve the spherical derivative.

def _rational3(z):
    return (z ** 3 - 2 * z + 1) / ((z - 2) * (z + 1j) * (z - 0.5))


_R8_ZEROS = (1, 2, -1j, 0.5 + 1j, 3, -2, 1j, -0.5)
_R8_POLES = (-1, -3, 2j, 0.7 - 1j, 1.5, -2.5j, 2 + 2j, -1 - 1j)


def rational8(w):
    """A fixed degree-8 rational function with zeros and poles in |w| <= 3."""
    w = np.asarray(w, dtype=complex)
    num = np.ones_like(w)
    den = np.ones_like(w)
    for a, b in zip(_R8_ZEROS, _R8_POLES):
        num = num * (w - a)
        den = den * (w - b)
    return num / den


def _sn_half(z):
    return jacobi_sn(z, 0.5, pole_tol=None)


def _sn_square(z):
    return jacobi_sn(np.asarray(z) ** 2, 0.5, pole_tol=None)


def _sn_exp(z):
    return jacobi_sn(np.exp(np.asarray(z)), 0.5, pole_tol=None)


@dataclass(frozen=True)
class StandardFamily:
    name: str
    evaluator: Callable
    radii: tuple
    grid: Grid
    expected_order: float | None = None
    order_tol: float | None = None
    min_span: float = 10.0


STANDARD_FAMILIES = {
    "rational": StandardFamily("rational", _rational3, tuple(np.geomspace(1e2, 1e6, 9)),
                               Grid(400, 256, "log"), 0.0, 0.2),
    "exp": StandardFamily("exp", np.exp, tuple(np.geomspace(5, 50, 8)), Grid(800, 4096), 1.0, 0.2),
    "sn": StandardFamily("sn", _sn_half, tuple(np.geomspace(5, 40, 8)), Grid(600, 2048),
                         2.0, 0.3, min_span=8.0),
    "sn-square": StandardFamily("sn-square", _sn_square, tuple(np.geomspace(1, 10, 8)),
                                Grid(800, 4096), 4.0, 0.5),
    "sn-exp": StandardFamily("sn-exp", _sn_exp, tuple(np.linspace(1, 4, 7)), Grid(400, 2048)),
}


def run_standard(name: str, grid: Grid | None = None) -> GrowthReport:
    fam = STANDARD_FAMILIES[name]
    fit = fam.expected_order is not None
    return growth_report(fam.evaluator, fam.radii, name, grid or fam.grid, fit_order=fit,
                         min_span=fam.min_span)
