"""Double-well potentials and the checks run against them.

A :class:`Potential` bundles the energy density ``W`` with its first two
derivatives and the well data ``(a, b, c, q, ell)``: wells ``a < b``, the
central critical point ``c``, the well exponent ``q`` and the limit ``ell`` of
``W''(s) / |s - well|**(q - 1)`` at the wells.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .errors import ConfigError, NonFiniteEvaluation

logger = logging.getLogger(__name__)

Array = np.ndarray
ScalarFn = Callable[[Array], Array]

# distance to a well inside which W'' is reported as singular when q < 1
SINGULAR_RADIUS = 1e-12


@dataclass(frozen=True)
class Potential:
    name: str
    W: ScalarFn
    dW: ScalarFn
    d2W: ScalarFn
    a: float
    b: float
    c: float
    q: float = 1.0
    ell: float = 1.0
    symmetric: bool = False
    params: dict = field(default_factory=dict)

    def eval(self, s):
        return self.W(np.asarray(s, dtype=float))

    def deriv(self, s):
        return self.dW(np.asarray(s, dtype=float))

    def deriv2(self, s):
        """Second derivative; ``inf`` next to a well when ``q < 1``."""
        s = np.asarray(s, dtype=float)
        if self.q >= 1.0:
            return self.d2W(s)
        near = (np.abs(s - self.a) < SINGULAR_RADIUS) | (np.abs(s - self.b) < SINGULAR_RADIUS)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(near, np.inf, self.d2W(np.where(near, self.c, s)))
        return out if out.ndim else float(out)

    @property
    def curvature_at_wells(self) -> float:
        """``W''(a)`` for quadratic wells; ``inf`` for sub-quadratic ones."""
        return float(self.ell) if self.q >= 1.0 else math.inf

    @property
    def well_gap(self) -> float:
        return self.b - self.a

    def describe(self) -> dict:
        return {"name": self.name, "a": self.a, "b": self.b, "c": self.c,
                "q": self.q, "ell": self.ell, "symmetric": self.symmetric,
                **{f"param_{k}": v for k, v in self.params.items()}}


# ---------------------------------------------------------------------------
# canonical potentials


def quartic() -> Potential:
    """The classical Cahn-Hilliard potential ``W(s) = (1 - s**2)**2 / 2``."""
    return Potential(
        name="quartic",
        W=lambda s: 0.5 * (1.0 - s * s) ** 2,
        dW=lambda s: 2.0 * s * (s * s - 1.0),
        d2W=lambda s: 6.0 * s * s - 2.0,
        a=-1.0, b=1.0, c=0.0, q=1.0, ell=4.0, symmetric=True,
    )


def subquadratic(q: float) -> Potential:
    """Symmetric family ``W_q(s) = |1 - s**2|**(1 + q) / (1 + q)``.

    Near ``s = +-1`` one has ``W''(s) ~ 2**(1 + q) q |s -+ 1|**(q - 1)``, so
    ``ell = 2**(1 + q) * q``. ``q = 1`` reproduces :func:`quartic`.
    """
    if not 0.0 < q <= 1.0:
        raise ValueError(f"well exponent q must lie in (0, 1], got {q}")

    def W(s):
        return np.abs(1.0 - s * s) ** (1.0 + q) / (1.0 + q)

    def dW(s):
        d = 1.0 - s * s
        return -2.0 * s * np.sign(d) * np.abs(d) ** q

    def d2W(s):
        d = 1.0 - s * s
        ad = np.abs(d)
        with np.errstate(divide="ignore", invalid="ignore"):
            return -2.0 * np.sign(d) * ad ** q + 4.0 * q * s * s * ad ** (q - 1.0)

    return Potential(
        name=f"subquadratic(q={q:g})", W=W, dW=dW, d2W=d2W,
        a=-1.0, b=1.0, c=0.0, q=float(q), ell=2.0 ** (1.0 + q) * q,
        symmetric=True, params={"q": float(q)},
    )


def skewed(p: float = 0.5) -> Potential:
    """Asymmetric quadratic-well potential on the wells ``0`` and ``1``.

    ``W(s) = 2 s**2 (1 - s)**2 (1 + p x (1 - x**2) / (1 + x**4))`` with
    ``x = 2 s - 1``. The modulation vanishes at both wells, so
    ``W''(0) = W''(1) = 4`` while ``W`` is not symmetric about ``1/2``.
    """
    if not 0.0 <= p < 2.0:
        raise ValueError("skew parameter must lie in [0, 2) to keep W positive")
    import sympy as sp

    s = sp.Symbol("s", real=True)
    x = 2 * s - 1
    expr = 2 * s**2 * (1 - s) ** 2 * (1 + p * x * (1 - x**2) / (1 + x**4))
    W = sp.lambdify(s, expr, "numpy")
    dW = sp.lambdify(s, sp.diff(expr, s), "numpy")
    d2W = sp.lambdify(s, sp.diff(expr, s, 2), "numpy")
    c = _bracketed_root(lambda v: float(dW(v)), 1e-6, 1.0 - 1e-6)
    return Potential(
        name=f"skewed(p={p:g})", W=W, dW=dW, d2W=d2W,
        a=0.0, b=1.0, c=c, q=1.0, ell=4.0, symmetric=(p == 0.0),
        params={"p": float(p)},
    )


def single_well() -> Potential:
    """``W(s) = s**2``; fails the two-zeros hypothesis (used as a negative case)."""
    return Potential(
        name="single_well", W=lambda s: s * s, dW=lambda s: 2.0 * s,
        d2W=lambda s: 2.0 + 0.0 * s, a=-1.0, b=1.0, c=0.0, q=1.0, ell=2.0,
    )


def tabulated(s, w, dw, q: float = 1.0, name: str = "tabulated") -> Potential:
    """Potential interpolated from samples of ``(s, W, W')``.

    The cubic Hermite interpolant honours the supplied slopes; its second
    derivative is only piecewise linear, which :func:`validate_potential`
    reports as a C^1-only warning rather than an error.
    """
    s = np.asarray(s, float)
    w = np.asarray(w, float)
    dw = np.asarray(dw, float)
    if s.ndim != 1 or len(s) < 5 or np.any(np.diff(s) <= 0):
        raise ConfigError("tabulated potential needs >= 5 strictly increasing samples")
    spline = CubicHermiteSpline(s, w, dw, extrapolate=True)
    d1 = spline.derivative(1)
    d2 = spline.derivative(2)

    # the wells are the two smallest local minima of the samples
    interior = np.flatnonzero((w[1:-1] <= w[:-2]) & (w[1:-1] <= w[2:])) + 1
    if len(interior) < 2:
        raise ConfigError("tabulated potential must have two wells")
    wells = sorted(interior[np.argsort(w[interior])[:2]])
    a, b = float(s[wells[0]]), float(s[wells[1]])
    c = _bracketed_root(lambda v: float(d1(v)), a + 1e-9 * (b - a), b - 1e-9 * (b - a))
    if q >= 1.0:
        ell = float(d2(a))
    else:
        h = 1e-3 * (b - a)
        ell = float(d2(a + h) / h ** (q - 1.0))
    return Potential(
        name=name, W=lambda v: spline(v), dW=lambda v: d1(v), d2W=lambda v: d2(v),
        a=a, b=b, c=c, q=float(q), ell=ell, symmetric=False,
        params={"tabulated": True},
    )


CANONICAL = {
    "quartic": lambda cfg: quartic(),
    "subquadratic": lambda cfg: subquadratic(float(cfg.get("q", 0.5))),
    "skewed": lambda cfg: skewed(float(cfg.get("p", 0.5))),
}


def potential_from_config(cfg: dict) -> Potential:
    """Build a potential from flat keys: ``name`` plus family parameters.

    ``name = tabulated`` reads ``file`` (CSV with columns ``s, W, dW``).
    """
    if "name" not in cfg:
        raise ConfigError("missing key 'potential.name'")
    name = str(cfg["name"]).strip()
    if name in CANONICAL:
        return CANONICAL[name](cfg)
    if name == "tabulated":
        if "file" not in cfg:
            raise ConfigError("missing key 'potential.file'")
        data = np.genfromtxt(cfg["file"], delimiter=",", names=True)
        return tabulated(data["s"], data["W"], data["dW"], q=float(cfg.get("q", 1.0)))
    raise ConfigError(f"unknown potential '{name}'")


# ---------------------------------------------------------------------------
# root finding and validation


def _bracketed_root(fn, lo: float, hi: float) -> float:
    # brentq = bisection safeguarding secant/inverse-quadratic steps
    return float(brentq(fn, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500))


def derivative_zeros(p: Potential, lo: float, hi: float, n: int = 4001) -> list[float]:
    """All sign changes of ``W'`` on ``[lo, hi]``, polished by bracketed root-finding."""
    grid = np.linspace(lo, hi, n)
    vals = p.deriv(grid)
    roots = []
    for i in range(n - 1):
        if vals[i] == 0.0:
            roots.append(float(grid[i]))
        elif vals[i] * vals[i + 1] < 0.0:
            roots.append(_bracketed_root(lambda v: float(p.deriv(v)), grid[i], grid[i + 1]))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


@dataclass
class HypothesisCheck:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    warning: str | None = None


@dataclass
class ValidationReport:
    potential: str
    checks: list[HypothesisCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> HypothesisCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {"potential": self.potential, "passed": self.passed,
                "checks": [{"name": c.name, "passed": c.passed, "warning": c.warning,
                            **c.detail} for c in self.checks]}


def validate_potential(p: Potential, n_samples: int = 2001, tol: float = 1e-8) -> ValidationReport:
    """Check the standing hypotheses on ``p`` by sampling.

    Raises :class:`NonFiniteEvaluation` if ``W`` is not finite on the grid.
    """
    if n_samples < 100:
        raise ValueError("n_samples must be >= 100")
    a, b, q = p.a, p.b, p.q
    width = b - a
    grid = np.linspace(a - width, b + width, n_samples)
    grid = np.union1d(grid, [a, b, p.c])
    w = p.eval(grid)
    if not np.all(np.isfinite(w)):
        raise NonFiniteEvaluation(f"W is not finite on the sample grid of {p.name}")
    checks = []

    # exactly two zeros, at a < b, and W >= 0
    is_min = np.r_[w[0] < w[1], (w[1:-1] <= w[:-2]) & (w[1:-1] <= w[2:]), w[-1] < w[-2]]
    zeros = [float(s) for s in grid[is_min & (w <= tol)]]
    two = (len(zeros) == 2 and abs(zeros[0] - a) <= 1e-6 * width
           and abs(zeros[1] - b) <= 1e-6 * width and np.all(w >= -tol))
    checks.append(HypothesisCheck("has precisely two zeros", bool(two),
                                  {"zeros": zeros, "W_min": float(w.min())}))

    # W' has exactly three zeros a < c < b, with W''(c) < 0
    roots = derivative_zeros(p, a - width, b + width)
    w2c = float(p.deriv2(p.c))
    three = (len(roots) == 3 and abs(roots[0] - a) < 1e-8 and abs(roots[2] - b) < 1e-8
             and abs(roots[1] - p.c) < 1e-9 and w2c < 0)
    checks.append(HypothesisCheck("W' has exactly 3 zeros", bool(three),
                                  {"derivative_zeros": roots, "W2_at_c": w2c}))

    # one-sided limits of W''(s) / |s - well|**(q - 1)
    hs = 10.0 ** -np.arange(3, 7)
    est = []
    for well, sign in ((a, -1.0), (a, 1.0), (b, -1.0), (b, 1.0)):
        s = well + sign * hs * width
        est.append(p.deriv2(s) / np.abs(s - well) ** (q - 1.0))
    est = np.array(est)
    ell_hat = float(np.mean(est[:, -1]))
    ok_ell = bool(np.all(np.isfinite(est)) and abs(ell_hat - p.ell) <= 1e-3 * abs(p.ell) + tol)
    checks.append(HypothesisCheck("well exponent limit", ok_ell,
                                  {"ell_hat": ell_hat, "ell": p.ell, "q": q}))

    # W(s)/|s-b|^(1+q) -> ell / (q (1 + q))
    ks = np.arange(2, 7)
    ratios = p.eval(b - 10.0 ** -ks) / (10.0 ** -ks) ** (1.0 + q)
    target = p.ell / (q * (1.0 + q))
    dev = np.abs(ratios - target) / target
    monotone = np.all(np.diff(dev) <= 1e-12) or dev.max() < 1e-6
    ok_lim = bool(dev[-1] < 0.05 and monotone)
    checks.append(HypothesisCheck("W limit at wells", ok_lim,
                                  {"ratios": ratios.tolist(), "target": target}))

    # |W'| bounded away from zero far out, and linear growth W(s) >= L|s|
    far = np.r_[np.linspace(b + width, b + 10 * width, 200), np.linspace(a - 10 * width, a - width, 200)]
    dwf = np.abs(p.deriv(far))
    lhat = float(np.min(p.eval(far) / np.abs(far)))
    checks.append(HypothesisCheck("liminf |W'| > 0", bool(dwf.min() > 0 and lhat > 0),
                                  {"min_abs_W1_far": float(dwf.min()), "linear_growth_L": lhat,
                                   "linear_growth_T": float(max(abs(a), abs(b)) + width)}))

    # C^2 away from the wells: jumps of W'' on a fine grid
    fine = np.linspace(a + 0.01 * width, b - 0.01 * width, 20001)
    d2 = p.deriv2(fine)
    jump = float(np.max(np.abs(np.diff(d2))))
    smooth = HypothesisCheck("W is C^2 away from the wells", True, {"max_W2_jump": jump})
    if jump > 1e-2 * (np.max(np.abs(d2)) + 1.0):
        smooth.warning = "second derivative looks discontinuous (C^1 only)"
        logger.warning("%s: %s", p.name, smooth.warning)
    checks.append(smooth)
    return ValidationReport(p.name, checks)


def well_data(p: Potential) -> tuple[float, float, float, float, float]:
    """``(a, b, c, q, ell)`` with ``c`` re-located as the interior root of ``W'``."""
    lo = p.a + 1e-9 * p.well_gap
    hi = p.b - 1e-9 * p.well_gap
    c = _bracketed_root(lambda v: float(p.deriv(v)), lo, hi)
    if abs(c - p.c) > 1e-9:
        logger.warning("%s: stored c=%r differs from root %r", p.name, p.c, c)
    return p.a, p.b, c, p.q, p.ell
