"""Monotone rearrangement of grid functions on the unit square.

A grid function ``u`` with cell measure ``mu`` has distribution function
``rho(s) = mu * #{u > s}``. Its decreasing rearrangement on ``(-T, T)`` is
``g(t) = sup{s : rho(s) > V(t)}``, which for samples is the
``ceil(V(t)/mu)``-th largest value; ``f(t) = g(-t)`` is the increasing one.
Since every quantity only depends on ``V(t)``, integrals against
``eta dt = dV`` reduce to sums over sorted samples.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import io
from .isoperimetry import IsoProfile, RearrangedDomain, solve_volume_function

logger = logging.getLogger(__name__)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class GridFunction:
    """Cell-centred samples on a uniform grid over the unit square."""
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("grid values must be a 2-D array")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid values must be finite")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, fn, n: int) -> "GridFunction":
        x = (np.arange(n) + 0.5) / n
        X1, X2 = np.meshgrid(x, x, indexing="ij")
        return cls(fn(X1, X2))

    @classmethod
    def load(cls, path) -> "GridFunction":
        return cls(io.read_matrix(path))

    @property
    def shape(self):
        return self.values.shape

    @property
    def h(self) -> tuple[float, float]:
        return 1.0 / self.shape[0], 1.0 / self.shape[1]

    @property
    def cell_measure(self) -> float:
        return 1.0 / self.values.size

    @property
    def cell_diameter(self) -> float:
        return math.hypot(*self.h)

    def gradient(self):
        """Central differences inside, one-sided at the boundary."""
        return np.gradient(self.values, *self.h)

    def grad_norm(self) -> np.ndarray:
        g1, g2 = self.gradient()
        return np.hypot(g1, g2)

    def integral(self, arr=None) -> float:
        arr = self.values if arr is None else arr
        return float(np.sum(arr) * self.cell_measure)

    def sorted_desc(self) -> np.ndarray:
        return np.sort(self.values, axis=None)[::-1]


class DistributionFunction:
    """Right-continuous step function ``rho(s) = measure{u > s}``."""

    def __init__(self, u: GridFunction):
        self._asc = np.sort(u.values, axis=None)
        self._mu = u.cell_measure
        self.levels = np.unique(self._asc)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        count = self._asc.size - np.searchsorted(self._asc, s, side="right")
        return count * self._mu


def distribution_function(u: GridFunction) -> DistributionFunction:
    return DistributionFunction(u)


def slab_profile() -> IsoProfile:
    """``I* = 1``: the rearranged domain is the slab ``(-1/2, 1/2)`` with ``eta = 1``."""
    return IsoProfile(lambda v: np.ones_like(np.asarray(v, dtype=float)),
                      lambda v: np.zeros_like(np.asarray(v, dtype=float)),
                      n=1, name="slab", tail=(1.0, 0.0))


def slab_domain() -> RearrangedDomain:
    return solve_volume_function(slab_profile())


class Rearranged1D:
    """Step rearrangement ``g``/``f`` plus a smoothed ``f`` for gradient quantities.

    The smoothed version interpolates the quantile function ``F(V)`` linearly
    between ``n_knots + 1`` equally spaced volume levels, so that ``f(t) = F(V(t))``
    has a bounded derivative.
    """

    def __init__(self, u: GridFunction, dom: RearrangedDomain, n_knots: int | None = None):
        self.domain_ref = dom
        self._desc = u.sorted_desc()
        self._mu = u.cell_measure
        self.size = self._desc.size
        n_knots = n_knots or max(8, int(round(math.sqrt(self.size))))
        self.n_knots = n_knots
        # quantile F(V) = value at cumulative volume V from the bottom, sampled at knots
        asc = self._desc[::-1]
        centres = (np.arange(self.size) + 0.5) * self._mu
        self.knots_v = np.linspace(0.0, 1.0, n_knots + 1)
        self.knots_f = np.interp(self.knots_v, centres, asc)

    def _index(self, vol):
        k = np.ceil(np.asarray(vol, dtype=float) / self._mu - 1e-9).astype(int) - 1
        return np.clip(k, 0, self.size - 1)

    def g_of_volume(self, vol):
        """Decreasing, left-continuous: the ``ceil(vol/mu)``-th largest sample."""
        return self._desc[self._index(vol)]

    def f_of_volume(self, vol):
        return self.g_of_volume(1.0 - np.asarray(vol, dtype=float))

    def g(self, t):
        return self.g_of_volume(self.domain_ref.V(t))

    def f(self, t):
        return self.g(-np.asarray(t, dtype=float))

    def f_smooth(self, t):
        return np.interp(self.domain_ref.V(t), self.knots_v, self.knots_f)

    def level_measure(self, s) -> np.ndarray:
        """``eta``-measure of ``{f > s}``, read off the step structure."""
        s = np.asarray(s, dtype=float)
        count = np.searchsorted(-self._desc, -s, side="left")
        return count * self._mu

    def dirichlet(self, p: float = 2.0) -> float:
        """``int |f'|^p eta dt = sum_j |F'_j|^p int_{bin j} I*(v)^p dv`` for the smoothed ``f``."""
        istar = self.domain_ref.istar
        dv = np.diff(self.knots_v)
        slope = np.diff(self.knots_f) / dv
        mid = 0.5 * (self.knots_v[1:] + self.knots_v[:-1])
        vv = mid[:, None] + 0.5 * dv[:, None] * _GL_X[None, :]
        moments = np.sum(0.5 * dv[:, None] * _GL_W[None, :] * istar.eval(vv) ** p, axis=1)
        return float(np.sum(np.abs(slope) ** p * moments))

    def integral_of(self, fn) -> float:
        """``int fn(f) eta dt``; exact for the step rearrangement."""
        return float(np.sum(fn(self._desc)) * self._mu)

    def to_csv(self, path, samples: int = 2001) -> None:
        dom = self.domain_ref
        t = np.linspace(-dom.T, dom.T, samples)
        io.write_csv(path, ["t", "f", "eta"], [t, self.f(t), dom.istar.eval(dom.V(t))])


def rearrange(u: GridFunction, dom: RearrangedDomain, n_knots: int | None = None) -> Rearranged1D:
    return Rearranged1D(u, dom, n_knots)


def equimeasurability_defect(u: GridFunction, dom: RearrangedDomain, thresholds=None,
                             n_t: int = 1 << 18) -> float:
    """Max over thresholds of ``|measure{u > s} - eta-measure{f > s}|``.

    The right side is computed independently of the step bookkeeping: ``f`` is
    sampled at the midpoints of a fine ``t`` grid and each cell carries its
    exact ``eta``-mass ``V(t_{i+1}) - V(t_i)``.
    """
    r = rearrange(u, dom)
    rho = distribution_function(u)
    if thresholds is None:
        lv = rho.levels
        thresholds = np.r_[lv[:: max(1, lv.size // 64)], lv[-1], lv[0] - 1.0]
    t = np.linspace(-dom.T, dom.T, n_t + 1)
    mass = np.diff(dom.V(t))
    fm = r.f(0.5 * (t[1:] + t[:-1]))
    order = np.argsort(fm)
    fs, cm = fm[order], np.cumsum(mass[order][::-1])[::-1]
    idx = np.searchsorted(fs, thresholds, side="right")
    meas_f = np.where(idx < fs.size, cm[np.minimum(idx, fs.size - 1)], 0.0)
    return float(np.max(np.abs(rho(thresholds) - meas_f)))


def check_contraction(u1: GridFunction, u2: GridFunction, dom: RearrangedDomain | None = None):
    """``(||f_{u1} - f_{u2}||_{L1_eta}, ||u1 - u2||_{L1})``.

    Both rearrangements jump at the same volume levels, so the left side is the
    sum of differences of sorted samples times the cell measure.
    """
    if u1.shape != u2.shape:
        raise ValueError("fields must share a grid")
    mu = u1.cell_measure
    lhs = float(np.sum(np.abs(u1.sorted_desc() - u2.sorted_desc())) * mu)
    rhs = float(np.sum(np.abs(u1.values - u2.values)) * mu)
    return lhs, rhs


def check_truncation(u: GridFunction, s1: float, s2: float, dom: RearrangedDomain,
                     n_t: int = 4001, tol: float = 0.0) -> bool:
    """Truncating at ``[s1, s2]`` commutes with rearranging, pointwise on a ``t`` grid."""
    if not s1 < s2:
        raise ValueError("need s1 < s2")
    t = np.linspace(-dom.T, dom.T, n_t)
    left = np.clip(rearrange(u, dom).f(t), s1, s2)
    right = rearrange(GridFunction(np.clip(u.values, s1, s2)), dom).f(t)
    return bool(np.max(np.abs(left - right)) <= tol)


def polya_szego_pair(u: GridFunction, dom: RearrangedDomain, p: float = 2.0,
                     n_knots: int | None = None) -> tuple[float, float]:
    """``(int |f'|^p eta dt, int |grad u|^p dx)``."""
    lhs = rearrange(u, dom, n_knots).dirichlet(p)
    rhs = u.integral(u.grad_norm() ** p)
    return lhs, rhs


def discretization_slack(u: GridFunction, p: float = 2.0) -> float:
    """Allowance for grid defects in the gradient comparisons.

    ``(max|grad u| + 1) * cell_diameter`` scaled by ``||grad u||_p^p`` (the size of
    the compared quantity), i.e. a relative slack of order one cell.
    """
    gn = u.grad_norm()
    return float((gn.max() + 1.0) * u.cell_diameter * u.integral(gn ** p))


def rearranged_energy_pair(u: GridFunction, eps: float, p, dom: RearrangedDomain,
                           istar=None) -> dict:
    """Energies and masses before and after rearrangement.

    ``lhs = int W(u) + eps^2 |grad u|^2 dx`` and
    ``rhs = int (W(f) + eps^2 (f')^2) eta dt``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    r = rearrange(u, dom)
    lhs = u.integral(p.eval(u.values)) + eps * eps * u.integral(u.grad_norm() ** 2)
    rhs = r.integral_of(p.eval) + eps * eps * r.dirichlet(2.0)
    return {
        "lhs": float(lhs),
        "rhs": float(rhs),
        "mass_u": u.integral(),
        "mass_f": r.integral_of(lambda x: x),
        "slack": eps * eps * discretization_slack(u),
    }


def random_field(rng: np.random.Generator, n: int = 128, modes: int = 6,
                 decay: float = 1.5) -> GridFunction:
    """Smooth random field: a few cosine modes with decaying random amplitudes."""
    x = (np.arange(n) + 0.5) / n
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    out = np.zeros((n, n))
    for k1 in range(modes):
        for k2 in range(modes):
            amp = rng.normal() / (1.0 + k1 * k1 + k2 * k2) ** (decay / 2.0)
            ph1, ph2 = rng.uniform(0, 2 * math.pi, 2)
            out += amp * np.cos(math.pi * k1 * X1 + ph1) * np.cos(math.pi * k2 * X2 + ph2)
    return GridFunction(out)


@dataclass
class SuiteResult:
    checked: dict
    violations: dict
    worst: dict
    failures: list
    seed: int

    @property
    def passed(self) -> bool:
        return not any(self.violations.values())

    def as_dict(self) -> dict:
        return {"seed": self.seed, "passed": self.passed, "checked": dict(self.checked),
                "violations": dict(self.violations), "worst": dict(self.worst),
                "failures": list(self.failures)}


def property_suite(dom: RearrangedDomain, n_fields: int = 100, grid: int = 128, seed: int = 0,
                   n_t: int = 1 << 18, constant_pairs: int = 5) -> SuiteResult:
    """Seeded random-field checks of the rearrangement invariants.

    Each field gets its own child seed, recorded with any failure so the
    instance can be replayed with ``random_field(np.random.default_rng(child), grid)``.
    Tolerances: equimeasurability within one cell measure, contraction with a
    relative ``1e-12`` rounding allowance, truncation exactly, and Pólya-Szegő
    (p = 2) up to :func:`discretization_slack`.
    """
    children = np.random.SeedSequence(seed).generate_state(n_fields + 1, dtype=np.uint32)
    names = ("equimeasurability", "contraction", "truncation", "polya_szego", "constant_pairs")
    checked = dict.fromkeys(names, 0)
    violations = dict.fromkeys(names, 0)
    worst = {"equimeasurability_cells": 0.0, "contraction_ratio": 0.0, "polya_szego_ratio": 0.0}
    failures = []
    prev = None
    for i in range(n_fields):
        child = int(children[i])
        u = random_field(np.random.default_rng(child), n=grid)
        mu = u.cell_measure

        d = equimeasurability_defect(u, dom, n_t=n_t)
        checked["equimeasurability"] += 1
        worst["equimeasurability_cells"] = max(worst["equimeasurability_cells"], d / mu)
        if d > mu:
            violations["equimeasurability"] += 1
            failures.append({"check": "equimeasurability", "seed": child, "defect": d})

        if prev is not None:
            lhs, rhs = check_contraction(u, prev)
            checked["contraction"] += 1
            worst["contraction_ratio"] = max(worst["contraction_ratio"], lhs / rhs if rhs else 0.0)
            if lhs > rhs * (1.0 + 1e-12):
                violations["contraction"] += 1
                failures.append({"check": "contraction", "seed": child, "lhs": lhs, "rhs": rhs})
        prev = u

        s1, s2 = np.quantile(u.values, [0.25, 0.75])
        checked["truncation"] += 1
        if not check_truncation(u, float(s1), float(s2), dom):
            violations["truncation"] += 1
            failures.append({"check": "truncation", "seed": child})

        lhs, rhs = polya_szego_pair(u, dom, 2.0)
        slack = discretization_slack(u, 2.0)
        checked["polya_szego"] += 1
        worst["polya_szego_ratio"] = max(worst["polya_szego_ratio"], lhs / rhs)
        if lhs > rhs + slack:
            violations["polya_szego"] += 1
            failures.append({"check": "polya_szego", "seed": child, "lhs": lhs, "rhs": rhs,
                             "slack": slack})

    rng = np.random.default_rng(int(children[-1]))
    for _ in range(constant_pairs):
        c1, c2 = rng.normal(size=2)
        u1 = GridFunction(np.full((grid, grid), c1))
        u2 = GridFunction(np.full((grid, grid), c2))
        lhs, rhs = check_contraction(u1, u2)
        checked["constant_pairs"] += 1
        if lhs != rhs:
            violations["constant_pairs"] += 1
            failures.append({"check": "constant_pairs", "c1": float(c1), "c2": float(c2),
                             "lhs": lhs, "rhs": rhs})
    return SuiteResult(checked, violations, worst, failures, seed)
