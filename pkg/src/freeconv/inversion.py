"""Stieltjes-Perron recovery at height eta and distance functionals.

``recover`` samples density(x) = -(1/pi) Im G(x + i eta) on a uniform grid;
the CDF is a cumulative trapezoid plus a left-tail correction derived from
the 1/z asymptote of G (for x0 left of the support, the smoothed tail mass
is approximately -(eta/pi) Re G(x0 + i eta)).  Distances compare the
eta-smoothed CDFs of both inputs unless an analytic CDF is supplied, in
which case that side is exact.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InversionError

DEFAULT_ETA = 1e-3
DEFAULT_POINTS = 4001
_NEG_DENSITY_TOL = -1e-12


@dataclass(frozen=True)
class GriddedDistribution:
    grid: np.ndarray
    density: np.ndarray
    cdf: np.ndarray
    eta: float
    tail_mass: float

    @property
    def x_min(self) -> float:
        return float(self.grid[0])

    @property
    def x_max(self) -> float:
        return float(self.grid[-1])

    def cdf_at(self, x):
        """Linear interpolation of the CDF, constant beyond the window."""
        return np.interp(x, self.grid, self.cdf)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# eta={self.eta:.17g} tail_mass={self.tail_mass:.17g}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "density", "cdf"])
        for x, d, c in zip(self.grid, self.density, self.cdf):
            w.writerow([f"{x:.17g}", f"{d:.17g}", f"{c:.17g}"])
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "GriddedDistribution":
        lines = text.splitlines()
        meta = {}
        for tok in lines[0].lstrip("# ").split():
            k, v = tok.split("=")
            meta[k] = float(v)
        rows = list(csv.reader(lines[2:]))
        arr = np.array([[float(v) for v in r] for r in rows if r])
        return GriddedDistribution(grid=arr[:, 0], density=arr[:, 1], cdf=arr[:, 2],
                                   eta=meta["eta"], tail_mass=meta["tail_mass"])


def recover(g_eval, x_min: float, x_max: float, points: int = DEFAULT_POINTS,
            eta: float = DEFAULT_ETA) -> GriddedDistribution:
    """Recover the eta-smoothed density/CDF of the measure behind g_eval.

    ``g_eval`` maps a complex numpy array in C+ to G values.  A density dip
    below -1e-12 signals a broken transform and raises InversionError.
    """
    if not (x_min < x_max and eta > 0 and points >= 2):
        raise DomainError("recover requires x_min < x_max, eta > 0, points >= 2")
    grid = np.linspace(x_min, x_max, points)
    g = np.asarray(g_eval(grid + 1j * eta), dtype=complex)
    density = -g.imag / math.pi
    if np.min(density) < _NEG_DENSITY_TOL:
        raise InversionError(
            f"recovered density dips to {np.min(density):.3e} below -1e-12")
    density = np.maximum(density, 0.0)

    dx = grid[1] - grid[0]
    inner = np.concatenate([[0.0], np.cumsum(0.5 * (density[1:] + density[:-1]) * dx)])
    left_tail = max(0.0, -(eta / math.pi) * float(g[0].real))
    tail_mass = max(0.0, 1.0 - float(inner[-1]))
    cdf = np.clip(inner + left_tail, 0.0, 1.0)
    return GriddedDistribution(grid=grid, density=density, cdf=cdf,
                               eta=eta, tail_mass=tail_mass)


def _as_cdf_pair(a, b):
    """Common-grid CDF arrays for two inputs (gridded or callable CDFs)."""
    a_grid = isinstance(a, GriddedDistribution)
    b_grid = isinstance(b, GriddedDistribution)
    if a_grid and b_grid:
        grid = a.grid if a.grid.size >= b.grid.size else b.grid
        lo = min(a.x_min, b.x_min)
        hi = max(a.x_max, b.x_max)
        grid = np.linspace(lo, hi, grid.size)
        return grid, a.cdf_at(grid), b.cdf_at(grid)
    if a_grid:
        return a.grid, a.cdf, np.asarray(b(a.grid), dtype=float)
    if b_grid:
        return b.grid, np.asarray(a(b.grid), dtype=float), b.cdf
    grid = np.linspace(-4.0, 4.0, DEFAULT_POINTS)
    return grid, np.asarray(a(grid), dtype=float), np.asarray(b(grid), dtype=float)


def kolmogorov(a, b) -> float:
    """sup-norm distance between CDFs on the common grid."""
    _, ca, cb = _as_cdf_pair(a, b)
    return float(np.max(np.abs(ca - cb)))


def levy(a, b) -> float:
    """Levy distance by bisection over the grid CDFs; satisfies d_L <= Delta."""
    grid, ca, cb = _as_cdf_pair(a, b)

    def ok(s: float) -> bool:
        left = np.interp(grid - s, grid, ca, left=0.0, right=1.0) - s
        right = np.interp(grid + s, grid, ca, left=0.0, right=1.0) + s
        return bool(np.all(left <= cb + 1e-15) and np.all(cb <= right + 1e-15))

    lo, hi = 0.0, float(np.max(np.abs(ca - cb)))
    if ok(lo):
        return 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def delta_eps(a, b, eps: float) -> float:
    """Interval-probability sup over [-2+eps, 2-eps], anchored at -2+eps."""
    if not 0.0 < eps < 1.0:
        raise DomainError("eps must be in (0, 1)")
    grid, ca, cb = _as_cdf_pair(a, b)
    lo, hi = -2.0 + eps, 2.0 - eps
    if grid[0] > lo or grid[-1] < hi:
        raise DomainError("grids must cover [-2+eps, 2-eps]")
    xs = np.linspace(lo, hi, 1601)
    fa = np.interp(xs, grid, ca) - np.interp(lo, grid, ca)
    fb = np.interp(xs, grid, cb) - np.interp(lo, grid, cb)
    return float(np.max(np.abs(fa - fb)))


def _adaptive_simpson(f, a: float, b: float, tol: float = 1e-9,
                      max_depth: int = 30) -> float:
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        if depth >= max_depth or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (rec(a, m, fa, flm, fm, left, tol / 2.0, depth + 1)
                + rec(m, b, fm, frm, fb, right, tol / 2.0, depth + 1))

    return rec(a, b, fa, fm, fb, whole, tol, 0)


def delta_tilde(g_a, g_b, a: float, eps: float, u_points: int = 801) -> float:
    """Strip functional: sup_u int_a^1 |G_a - G_b| dv + a + eps^{3/2}."""
    if not (0.0 < a < 1.0):
        raise DomainError("a must be in (0, 1)")
    if not (0.0 < eps < 1.0):
        raise DomainError("eps must be in (0, 1)")
    us = np.linspace(-2.0 + eps / 2.0, 2.0 - eps / 2.0, u_points)
    sup = 0.0
    for u in us:
        val = _adaptive_simpson(
            lambda v: abs(complex(g_a(u + 1j * v)) - complex(g_b(u + 1j * v))),
            a, 1.0)
        sup = max(sup, val)
    return sup + a + eps**1.5


def bai_integrals(g_a, g_b, a: float, eps: float, radius: float = 50.0,
                  u_points: int = 801) -> tuple[float, float]:
    """The two integrals of Bai's smoothing inequality (diagnostic only).

    Returns (line integral of |G_a - G_b| along Im z = 1 over [-R, R] with a
    1/u^2 tail allowance added, sup over I_eps of the strip integral).
    """
    def diff1(u: float) -> float:
        return abs(complex(g_a(u + 1j)) - complex(g_b(u + 1j)))

    line = _adaptive_simpson(diff1, -radius, 0.0) + _adaptive_simpson(diff1, 0.0, radius)
    # beyond R, |G_a - G_b| decays like C/u^2; extrapolate from the endpoints
    c_tail = max(diff1(radius), diff1(-radius)) * radius**2
    line += 2.0 * c_tail / radius

    strip = delta_tilde(g_a, g_b, a, eps, u_points=u_points) - a - eps**1.5
    return line, strip
