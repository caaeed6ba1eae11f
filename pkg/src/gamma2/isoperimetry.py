"""Isoperimetric profiles, the smoothed minorant I*, the volume function and weights.

The chain is ``IsoProfile -> ModifiedIsoProfile -> RearrangedDomain -> Weight``.
``I*`` is a positive C^1 minorant of ``I`` that touches it to first order at the
pinned volume ``v_m`` and behaves like ``C v**((n-1)/n)`` near zero. ``V`` solves
``V' = I*(V)``, ``V(0) = 1/2`` and the weight is ``eta = I*(V)``.
Weights coming from level sets of canonical sets are analytic instead.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp
from scipy.interpolate import BPoly, CubicHermiteSpline, PchipInterpolator
from scipy.optimize import brentq
from scipy.special import gamma

from . import io
from .errors import (HypothesisViolation, KinkAtMass, NonIntegrableTail,
                     UnsupportedSet)

logger = logging.getLogger(__name__)

KINK_TOL = 1e-9
TAIL_START = 1e-9  # volume below which V is continued by the exact power tail


def unit_ball_measure(k: int) -> float:
    """Lebesgue measure of the unit ball in R^k."""
    return math.pi ** (k / 2.0) / gamma(k / 2.0 + 1.0)


# ---------------------------------------------------------------------------
# isoperimetric profiles


class IsoProfile:
    """``I(v)`` on ``[0, 1]`` given by its values on ``[0, 1/2]`` and mirrored.

    ``half`` and ``dhalf`` evaluate the profile and its derivative for
    ``v <= 1/2``; ``kinks`` lists the points in ``(0, 1/2]`` where the
    derivative jumps (their mirrors are added automatically).
    """

    def __init__(self, half, dhalf, n: int = 2, kinks=(), name: str = "table",
                 tail: tuple[float, float] | None = None):
        self._half = half
        self._dhalf = dhalf
        self.n = int(n)
        k = sorted(float(x) for x in kinks if 0.0 < x <= 0.5)
        self.kinks = sorted(set(k + [1.0 - x for x in k if x < 0.5]))
        self.name = name
        # (coefficient, exponent) with I(v) = coef * v**exp exactly on (0, tail_end)
        self.tail = tail

    @property
    def alpha(self) -> float:
        return (self.n - 1.0) / self.n

    def eval(self, v):
        v = np.asarray(v, dtype=float)
        w = np.minimum(v, 1.0 - v)
        out = np.asarray(self._half(np.clip(w, 0.0, 0.5)), dtype=float)
        return np.where(w <= 0.0, 0.0, out)

    __call__ = eval

    def deriv(self, v, side: int = 0):
        """Derivative; at a kink ``side=-1`` or ``+1`` selects the one-sided value."""
        v = np.asarray(v, dtype=float)
        h = 1e-7 * side
        vv = v + h
        w = np.minimum(vv, 1.0 - vv)
        d = np.asarray(self._dhalf(np.clip(w, 1e-300, 0.5)), dtype=float)
        return np.where(vv <= 0.5, d, -d)

    def one_sided(self, v: float) -> tuple[float, float]:
        return float(self.deriv(v, -1)), float(self.deriv(v, +1))

    def is_kink(self, v: float, tol: float = KINK_TOL) -> bool:
        return any(abs(v - k) < tol for k in self.kinks)

    def lower_constant(self, samples: int = 2000) -> float:
        """Largest ``C1`` with ``I(v) >= C1 min(v, 1-v)**((n-1)/n)`` on a sample grid."""
        v = np.linspace(0.5 / samples, 0.5, samples)
        return float(np.min(self.eval(v) / v ** self.alpha))

    def to_csv(self, path, samples: int = 1001) -> None:
        v = np.linspace(0.0, 1.0, samples)
        io.write_csv(path, ["v", "I"], [v, self.eval(v)])


def square_iso_profile() -> IsoProfile:
    """Unit square: quarter disks in a corner up to ``v = 1/pi``, then straight cuts."""

    def half(v):
        return np.minimum(np.sqrt(math.pi * np.asarray(v, dtype=float)), 1.0)

    def dhalf(v):
        v = np.asarray(v, dtype=float)
        with np.errstate(divide="ignore"):
            d = 0.5 * math.sqrt(math.pi) / np.sqrt(v)
        return np.where(v < 1.0 / math.pi, d, 0.0)

    return IsoProfile(half, dhalf, n=2, kinks=[1.0 / math.pi], name="square",
                      tail=(math.sqrt(math.pi), 0.5))


def power_iso_profile(coef: float, n: int = 2) -> IsoProfile:
    """``I(v) = coef * min(v, 1-v)**((n-1)/n)``; handy for closed-form checks."""
    e = (n - 1.0) / n

    def half(v):
        return coef * np.asarray(v, dtype=float) ** e

    def dhalf(v):
        return coef * e * np.asarray(v, dtype=float) ** (e - 1.0)

    return IsoProfile(half, dhalf, n=n, kinks=[0.5], name=f"power({coef:g})", tail=(coef, e))


def iso_profile_from_table(v, values, n: int = 2, name: str = "table") -> IsoProfile:
    """Monotone cubic interpolation of user samples; symmetrized about ``1/2``."""
    v = np.asarray(v, dtype=float)
    values = np.asarray(values, dtype=float)
    w = np.minimum(v, 1.0 - v)
    order = np.argsort(w)
    w, values = w[order], values[order]
    # average the two halves where both were supplied
    uw, inv = np.unique(np.round(w, 14), return_inverse=True)
    uval = np.bincount(inv, weights=values) / np.bincount(inv)
    if uw[0] > 0.0:
        uw, uval = np.r_[0.0, uw], np.r_[0.0, uval]
    spl = PchipInterpolator(uw, uval, extrapolate=True)
    dspl = spl.derivative()
    return IsoProfile(spl, dspl, n=n, name=name)


def load_iso_profile(path, n: int = 2) -> IsoProfile:
    _, data = io.read_csv(path)
    return iso_profile_from_table(data[:, 0], data[:, 1], n=n, name=str(path))


# ---------------------------------------------------------------------------
# modified profile


@dataclass
class ModifiedIsoProfile:
    """Positive C^1 minorant of ``base`` pinned at ``v_m`` with a power tail.

    On ``[0, 1/2]`` the pieces are: ``tail_coeff * v**alpha`` on ``(0, delta_tail)``,
    a Hermite bridge, the local Taylor formula on ``[v_m - r, v_m + r]``, and a
    bridge with zero slope at ``1/2``. Values above ``1/2`` are mirrored.
    """
    base: IsoProfile
    v_m: float
    beta: float
    C0: float
    delta_tail: float
    tail_coeff: float
    radius: float
    _pieces: list = field(repr=False, default_factory=list)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def alpha(self) -> float:
        return (self.n - 1.0) / self.n

    @property
    def tail(self) -> tuple[float, float]:
        return self.tail_coeff, self.alpha

    @property
    def kinks(self) -> list[float]:
        return []

    @property
    def v_pin(self) -> float:
        """Pinned volume reflected into ``(0, 1/2]``."""
        return min(self.v_m, 1.0 - self.v_m)

    def _half(self, w, d: int = 0):
        out = np.zeros_like(w)
        for lo, hi, fn in self._pieces:
            m = (w >= lo) & (w <= hi)
            if m.any():
                out[m] = fn(w[m], d)
        return out

    def eval(self, v):
        v = np.asarray(v, dtype=float)
        w = np.clip(np.minimum(v, 1.0 - v), 0.0, 0.5)
        return self._half(np.atleast_1d(w)).reshape(w.shape)

    __call__ = eval

    def deriv(self, v, side: int = 0):
        v = np.asarray(v, dtype=float)
        w = np.clip(np.minimum(v, 1.0 - v), 1e-300, 0.5)
        d = self._half(np.atleast_1d(w), 1).reshape(w.shape)
        return np.where(v <= 0.5, d, -d)

    def is_kink(self, v: float, tol: float = KINK_TOL) -> bool:
        return False

    def check(self, samples: int = 20001) -> dict:
        """Dense-grid check of touching, symmetry, positivity and the minorant property."""
        v = np.linspace(0.0, 1.0, samples)[1:-1]
        gap = self.base.eval(v) - self.eval(v)
        far = (np.abs(v - self.v_m) > 1e-3) & (np.abs(v - (1.0 - self.v_m)) > 1e-3)
        return {
            "touch_value": float(abs(self.eval(self.v_m) - self.base.eval(self.v_m))),
            "touch_slope": float(abs(self.deriv(self.v_m) - self.base.deriv(self.v_m))),
            "min_gap": float(gap.min()),
            "min_gap_away_from_pin": float(gap[far].min()),
            "min_value": float(self.eval(v).min()),
            "symmetry": float(np.max(np.abs(self.eval(v) - self.eval(1.0 - v)))),
        }


def _hermite(x0, y0, d0, x1, y1, d1):
    spl = CubicHermiteSpline([x0, x1], [y0, y1], [d0, d1])
    dspl = spl.derivative()
    return lambda w, d: spl(w) if d == 0 else dspl(w)


def _taylor_defect_constant(base: IsoProfile, v_m: float, beta: float, r: float) -> float:
    s = v_m + r * np.r_[-np.logspace(-4, 0, 400)[::-1], np.logspace(-4, 0, 400)]
    s = s[(s > 0.0) & (s < 1.0)]
    i0, d0 = float(base.eval(v_m)), float(base.deriv(v_m))
    defect = np.abs(base.eval(s) - i0 - d0 * (s - v_m))
    return float(np.max(defect / np.abs(s - v_m) ** (1.0 + beta)))


def build_modified_profile(base: IsoProfile, v_m: float, beta: float = 1.0,
                           C0: float | None = None, delta_tail: float | None = None,
                           c0_floor: float = 0.25, samples: int = 20001) -> ModifiedIsoProfile:
    """Construct ``I*`` for ``base`` pinned at ``v_m``.

    ``C0`` defaults to twice the measured Taylor-defect constant (with a floor,
    since a flat branch measures zero). The neighbourhood radius, tail threshold
    and tail scale are searched for, largest first, until the dense-grid checks pass.
    """
    if not 0.0 < v_m < 1.0:
        raise ValueError("v_m must lie in (0, 1)")
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must lie in (0, 1]")
    if base.is_kink(v_m):
        left, right = base.one_sided(v_m)
        raise KinkAtMass(f"I is not differentiable at v_m={v_m:.12g}; "
                         f"one-sided derivatives [{left:.6g}, {right:.6g}]")
    w_m = min(v_m, 1.0 - v_m)
    alpha = base.alpha
    i_m, di_m = float(base.eval(w_m)), float(base.deriv(w_m))
    kinks = [k for k in base.kinks if k <= 0.5]
    near = min([abs(w_m - k) for k in kinks] + [w_m])
    r_max = 0.9 * near
    if w_m < 0.5:
        r_max = min(r_max, 0.9 * (0.5 - w_m))
    grid = np.linspace(0.0, 0.5, samples)[1:]
    ibase = base.eval(grid)
    for r in r_max * np.array([1.0, 0.7, 0.5, 0.35, 0.25, 0.15, 0.1, 0.05]):
        c0 = C0 if C0 is not None else 2.0 * max(_taylor_defect_constant(base, w_m, beta, r), c0_floor)
        if C0 is not None and _taylor_defect_constant(base, w_m, beta, r) > C0 * (1 + 1e-12):
            continue

        def local(w, d, c0=c0):
            x = w - w_m
            if d == 0:
                return i_m + di_m * x - 2.0 * c0 * np.abs(x) ** (1.0 + beta)
            return di_m - 2.0 * c0 * (1.0 + beta) * np.sign(x) * np.abs(x) ** beta

        lo_v, hi_v = w_m - r, min(w_m + r, 0.5)
        y_lo, d_lo = float(local(np.array(lo_v), 0)), float(local(np.array(lo_v), 1))
        y_hi, d_hi = float(local(np.array(hi_v), 0)), float(local(np.array(hi_v), 1))
        if y_lo <= 0.0:
            continue
        deltas = [delta_tail] if delta_tail is not None else list(lo_v * np.array([0.5, 0.25, 0.1, 0.05]))
        for delta in deltas:
            if not 0.0 < delta < lo_v:
                continue
            for scale in (0.9, 0.7, 0.5, 0.3, 0.15):
                coef = scale * float(base.eval(delta)) / delta ** alpha

                def tail(w, d, coef=coef):
                    if d == 0:
                        return coef * w ** alpha
                    return coef * alpha * w ** (alpha - 1.0)

                pieces = [(0.0, delta, tail),
                          (delta, lo_v, _hermite(delta, coef * delta ** alpha,
                                                 coef * alpha * delta ** (alpha - 1.0),
                                                 lo_v, y_lo, d_lo)),
                          (lo_v, hi_v, local)]
                thetas = [None] if hi_v >= 0.5 else [0.5, 0.25, 0.0, -0.25, -0.5]
                for theta in thetas:
                    pcs = list(pieces)
                    if theta is not None:
                        y_end = y_hi + theta * d_hi * (0.5 - hi_v)
                        pcs.append((hi_v, 0.5, _hermite(hi_v, y_hi, d_hi, 0.5, y_end, 0.0)))
                    ms = ModifiedIsoProfile(base, v_m, beta, c0, delta, coef, r, pcs)
                    val = ms.eval(grid)
                    gap = ibase - val
                    off = np.abs(grid - w_m) > 1e-3 * max(r, 1e-3)
                    if val.min() > 0.0 and gap.min() > -1e-13 and gap[off].min() > 0.0:
                        logger.debug("I* built: r=%.4g delta=%.4g scale=%.2g C0=%.4g", r, delta, scale, c0)
                        return ms
    raise HypothesisViolation(f"could not build a valid I* for v_m={v_m}")


# ---------------------------------------------------------------------------
# volume function and rearranged domain


class RearrangedDomain:
    """Solution of ``V' = I*(V)``, ``V(0) = 1/2`` on ``[-T, T]``."""

    def __init__(self, istar, t, V, T: float, T_quad: float, tail: tuple[float, float],
                 t_join: float):
        self.istar = istar
        self.n = istar.n
        self.t_nodes = t
        self.V_nodes = V
        self.T = T
        self.T_quad = T_quad
        self.alpha_nm1 = unit_ball_measure(self.n - 1)
        self._tail = tail  # (coef, exponent) of I* near 0
        self._t_join = t_join  # V is tabulated on [-t_join, t_join]
        d1 = istar.eval(V)
        d2 = istar.deriv(V) * d1
        self._spline = BPoly.from_derivatives(t, np.column_stack([V, d1, d2]))

    def _tail_volume(self, s):
        """Volume reached a time ``s`` after leaving the endpoint (exact for a power tail)."""
        coef, e = self._tail
        return (coef * (1.0 - e) * np.maximum(s, 0.0)) ** (1.0 / (1.0 - e))

    def V(self, t):
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        mid = np.abs(t) <= self._t_join
        out[mid] = self._spline(t[mid])
        lo = t < -self._t_join
        hi = t > self._t_join
        out[lo] = self._tail_volume(t[lo] + self.T)
        out[hi] = 1.0 - self._tail_volume(self.T - t[hi])
        return np.clip(out, 0.0, 1.0)

    __call__ = V

    def t_of_volume(self, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError("volume must lie in [0, 1]")
        if v in (0.0, 1.0):
            return -self.T if v == 0.0 else self.T
        return brentq(lambda s: float(self.V(s)) - v, -self.T, self.T, xtol=1e-15, rtol=1e-15)

    def radius(self, t):
        """Slice radius with ``alpha_{n-1} r**(n-1) = I*(V(t))``."""
        k = self.n - 1
        return (self.istar.eval(self.V(t)) / self.alpha_nm1) ** (1.0 / k)

    def to_csv(self, path, samples: int = 2001) -> None:
        t = np.linspace(-self.T, self.T, samples)
        v = self.V(t)
        io.write_csv(path, ["t", "V", "r", "eta"], [t, v, self.radius(t), self.istar.eval(v)])


def _tail_of(istar, v0: float) -> tuple[float, float]:
    if getattr(istar, "tail", None) is not None:
        return istar.tail
    e = istar.alpha
    return float(istar.eval(v0)) / v0 ** e, e


def half_width_by_quadrature(istar, v0: float = TAIL_START) -> float:
    """``T = int_0^{1/2} dv / I*(v)``, split at kinks, singular end handled by an algebraic weight."""
    v_small = np.array([1e-12, 1e-10])
    slope = np.diff(np.log(istar.eval(v_small)))[0] / np.diff(np.log(v_small))[0]
    if not np.isfinite(slope) or slope >= 1.0 - 1e-6:
        raise NonIntegrableTail(f"1/I* is not integrable at 0 (local exponent {slope:.4g})")
    e = istar.alpha
    breaks = [0.0] + [k for k in getattr(istar, "kinks", []) if 0.0 < k < 0.5] + [0.5]
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            for lo, hi in zip(breaks[:-1], breaks[1:]):
                if lo == 0.0:
                    f = lambda v: v ** e / float(istar.eval(v)) if v > 0 else 1.0 / _tail_of(istar, v0)[0]  # noqa: E731
                    val, _ = quad(f, lo, hi, weight="alg", wvar=(-e, 0.0), epsabs=1e-14, epsrel=1e-12, limit=200)
                else:
                    val, _ = quad(lambda v: 1.0 / float(istar.eval(v)), lo, hi,
                                  epsabs=1e-14, epsrel=1e-12, limit=200)
                total += val
        except IntegrationWarning as exc:
            raise NonIntegrableTail(f"quadrature for T did not converge: {exc}") from exc
    if not math.isfinite(total):
        raise NonIntegrableTail("quadrature for T diverged")
    return total


def solve_volume_function(istar, tol: float = 1e-12, v_tail: float = TAIL_START) -> RearrangedDomain:
    """Integrate ``V' = I*(V)`` from ``V(0) = 1/2`` in both directions.

    The ODE is stopped at kinks of ``I*`` (and restarted) and at ``V = v_tail``
    or ``1 - v_tail``, where the power tail of ``I*`` is integrated exactly.
    """
    T_quad = half_width_by_quadrature(istar, v_tail)
    kinks = sorted(k for k in getattr(istar, "kinks", []) if v_tail < k < 1.0 - v_tail)

    def rhs(t, y):
        return [float(istar.eval(min(max(y[0], 0.0), 1.0)))]

    legs = []
    for sign, stop in ((1.0, 1.0 - v_tail), (-1.0, v_tail)):
        levels = [k for k in kinks if (k - 0.5) * sign > 1e-15] + [stop]
        levels.sort(key=lambda x: sign * x)
        t0, v0 = 0.0, 0.5
        ts, vs = [0.0], [0.5]
        for level in levels:
            def hit(t, y, level=level):
                return y[0] - level
            hit.terminal = True
            sol = solve_ivp(rhs, (t0, sign * 10.0 * max(T_quad, 1.0)), [v0], method="DOP853",
                            rtol=tol, atol=tol * 1e-3, max_step=0.01, events=hit)
            if sol.status != 1:
                raise NonIntegrableTail("volume function did not reach the tail level")
            te = float(sol.t_events[0][0])
            ts.extend(list(sol.t[1:-1]) + [te])
            vs.extend(list(sol.y[0][1:-1]) + [level])
            t0, v0 = te, level
        legs.append((np.array(ts), np.array(vs)))
    (tf, vf), (tb, vb) = legs
    coef, e = _tail_of(istar, v_tail)
    tail_time = v_tail ** (1.0 - e) / (coef * (1.0 - e))
    t_join = 0.5 * (tf[-1] - tb[-1])
    T = t_join + tail_time
    t = np.r_[tb[::-1], tf[1:]]
    V = np.r_[vb[::-1], vf[1:]]
    keep = np.r_[True, np.diff(t) > 1e-14]
    t, V = t[keep], V[keep]
    # symmetric I*: the two legs end at +-t_join up to the ODE tolerance
    t[0], t[-1] = -t_join, t_join
    if abs(T - T_quad) > 1e-6:
        logger.warning("ODE half-width %.12g differs from quadrature %.12g", T, T_quad)
    return RearrangedDomain(istar, t, V, T, T_quad, (coef, e), t_join)


def perimeter_volume_pair(dom: RearrangedDomain, t: float) -> tuple[float, float]:
    """``(V(t), I*(V(t)))``: volume and relative perimeter of the slice below height ``t``."""
    if not -dom.T - 1e-14 <= t <= dom.T + 1e-14:
        raise ValueError("t outside [-T, T]")
    v = float(dom.V(t))
    return v, float(dom.istar.eval(v))


# ---------------------------------------------------------------------------
# weights


@dataclass(frozen=True)
class TailData:
    n1: int
    n2: int
    d1: float
    d2: float
    d3: float
    d4: float
    d5: float
    t_star: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class Weight:
    """Positive weight ``eta`` on ``(lo, hi)`` with derivative and metadata.

    ``antideriv`` (if given) is an exact primitive; otherwise integrals use quadrature.
    """
    fn: Callable
    dfn: Callable
    lo: float
    hi: float
    source: str = "user"
    name: str = "weight"
    antideriv: Callable | None = None
    breaks: tuple = ()
    meta: dict = field(default_factory=dict)

    def eval(self, t):
        return np.asarray(self.fn(np.asarray(t, dtype=float)), dtype=float)

    __call__ = eval

    def deriv(self, t):
        return np.asarray(self.dfn(np.asarray(t, dtype=float)), dtype=float)

    def integral(self, x0: float, x1: float) -> float:
        if self.antideriv is not None:
            return float(self.antideriv(x1) - self.antideriv(x0))
        pts = [p for p in self.breaks if min(x0, x1) < p < max(x0, x1)]
        val, _ = quad(lambda s: float(self.eval(s)), x0, x1, points=pts or None,
                      epsabs=1e-14, epsrel=1e-13, limit=400)
        return val

    def cumulative(self, t: float) -> float:
        return self.integral(self.lo, t)

    @property
    def total(self) -> float:
        return self.integral(self.lo, self.hi)

    @property
    def tail_data(self) -> TailData:
        if "tail_data" not in self.meta:
            self.meta["tail_data"] = measure_tail_data(self)
        return self.meta["tail_data"]

    def to_csv(self, path, samples: int = 2001) -> None:
        t = np.linspace(self.lo, self.hi, samples)
        io.write_csv(path, ["t", "eta", "deta"], [t, self.eval(t), self.deriv(t)])


def measure_tail_data(w: Weight, t_star: float | None = None) -> TailData:
    """Measure the endpoint exponents and constants and the log-derivative bound."""
    width = w.hi - w.lo
    t_star = 0.1 * width if t_star is None else t_star
    s = t_star * np.logspace(-6, 0, 300)
    out = []
    for end, sign in ((w.lo, 1.0), (w.hi, -1.0)):
        eta = w.eval(end + sign * s)
        if np.any(~np.isfinite(eta)) or np.any(eta <= 0.0):
            raise HypothesisViolation(f"weight {w.name} is not positive near {end:.6g}")
        slope = np.polyfit(np.log(s[:30]), np.log(eta[:30]), 1)[0]
        n_end = int(round(slope)) + 1
        if n_end < 1 or abs(slope - (n_end - 1)) > 0.05:
            raise HypothesisViolation(
                f"weight {w.name}: endpoint exponent {slope + 1:.4g} at {end:.6g} is not a natural number")
        ratio = eta / s ** (n_end - 1)
        out.append((n_end, float(ratio.min()), float(ratio.max())))
    t = np.linspace(w.lo, w.hi, 4003)[1:-1]
    eta = w.eval(t)
    if np.any(eta <= 0.0):
        raise HypothesisViolation(f"weight {w.name} vanishes inside the interval")
    dist = np.minimum(t - w.lo, w.hi - t)
    d5 = float(np.max(np.abs(w.deriv(t)) * dist / eta))
    if not math.isfinite(d5):
        raise HypothesisViolation(f"weight {w.name}: |eta'| dist / eta is unbounded")
    (n1, d1, d2), (n2, d3, d4) = out
    return TailData(n1, n2, d1, d2, d3, d4, d5, t_star)


def constant_weight(value: float = 1.0, lo: float = -1.0, hi: float = 1.0) -> Weight:
    return Weight(lambda t: np.full_like(t, value), lambda t: np.zeros_like(t), lo, hi,
                  source="user", name=f"constant({value:g})",
                  antideriv=lambda t: value * t)


def linear_weight(intercept: float = 1.0, slope: float = 1.0, lo: float = -1.0,
                  hi: float = 1.0) -> Weight:
    """``eta(t) = intercept + slope * t``; must stay positive inside ``(lo, hi)``."""
    if min(intercept + slope * lo, intercept + slope * hi) < 0.0:
        raise HypothesisViolation("linear weight changes sign on the interval")
    return Weight(lambda t: intercept + slope * t, lambda t: np.full_like(t, slope), lo, hi,
                  source="user", name=f"linear({intercept:g}+{slope:g}t)",
                  antideriv=lambda t: intercept * t + 0.5 * slope * t * t)


def weight_from_table(t, eta, name: str = "table") -> Weight:
    t = np.asarray(t, dtype=float)
    eta = np.asarray(eta, dtype=float)
    spl = PchipInterpolator(t, eta)
    anti = spl.antiderivative()
    return Weight(spl, spl.derivative(), float(t[0]), float(t[-1]), source="user", name=name,
                  antideriv=anti)


def load_weight(path) -> Weight:
    _, data = io.read_csv(path)
    return weight_from_table(data[:, 0], data[:, 1], name=str(path))


def rearranged_weight(dom: RearrangedDomain, istar=None, check: bool = True) -> Weight:
    """``eta = I*(V)`` on ``(-T, T)``; its primitive is ``V`` itself."""
    istar = istar if istar is not None else dom.istar

    def fn(t):
        return istar.eval(dom.V(t))

    def dfn(t):
        v = dom.V(t)
        return istar.deriv(v) * istar.eval(v)

    w = Weight(fn, dfn, -dom.T, dom.T, source="rearranged", name=f"I*(V) [{istar.base.name if hasattr(istar, 'base') else getattr(istar, 'name', '')}]",
               antideriv=lambda t: float(dom.V(t)), meta={"domain": dom})
    if check:
        td = measure_tail_data(w)
        if td.n1 != dom.n or td.n2 != dom.n:
            raise HypothesisViolation(f"rearranged weight exponents ({td.n1}, {td.n2}) differ from n={dom.n}")
        w.meta["tail_data"] = td
    return w


@dataclass(frozen=True)
class CanonicalSet:
    """Set ``E`` inside a container ``Omega`` whose level sets of ``d_E`` have known measure.

    kind: ``strip`` (``{x1 < s}`` in the unit square), ``quarter_disk`` (radius
    ``r`` at a corner of the unit square), ``disk`` (radius ``r`` centred in the
    unit square, ``r < 1/2``), ``ball`` (radius ``r`` centred in the unit ball of R^n).
    """
    kind: str
    size: float
    n: int = 2

    @property
    def curvature(self) -> float:
        """Mean curvature (average of principal curvatures) of the interface."""
        return 0.0 if self.kind == "strip" else 1.0 / self.size

    @property
    def perimeter(self) -> float:
        return float(levelset_weight(self).eval(0.0))

    @property
    def volume(self) -> float:
        """``|E|``, the measure of the inner (well ``a``) phase."""
        s = self.size
        if self.kind == "strip":
            return s
        if self.kind == "quarter_disk":
            return math.pi * s * s / 4.0
        if self.kind == "disk":
            return math.pi * s * s
        if self.kind == "ball":
            return unit_ball_measure(self.n) * s ** self.n
        raise UnsupportedSet(self.kind)

    @property
    def container_measure(self) -> float:
        return unit_ball_measure(self.n) if self.kind == "ball" else 1.0


def _corner_arc(rho):
    """Length of ``{|x| = rho}`` inside the unit square, corner at the origin."""
    rho = np.asarray(rho, dtype=float)
    out = np.zeros_like(rho)
    inner = (rho > 0) & (rho <= 1.0)
    outer = (rho > 1.0) & (rho < math.sqrt(2.0))
    out[inner] = 0.5 * math.pi * rho[inner]
    r = rho[outer]
    out[outer] = r * (0.5 * math.pi - 2.0 * np.arccos(1.0 / r))
    return out


def _corner_arc_deriv(rho):
    rho = np.asarray(rho, dtype=float)
    out = np.zeros_like(rho)
    inner = (rho > 0) & (rho <= 1.0)
    outer = (rho > 1.0) & (rho < math.sqrt(2.0))
    out[inner] = 0.5 * math.pi
    r = rho[outer]
    out[outer] = 0.5 * math.pi - 2.0 * np.arccos(1.0 / r) - 2.0 / np.sqrt(r * r - 1.0)
    return out


def levelset_weight(cset: CanonicalSet) -> Weight:
    """``eta(t) = H^{n-1}({d_E = t})`` for a canonical set, in closed form."""
    s = float(cset.size)
    if cset.kind == "strip":
        if not 0.0 < s < 1.0:
            raise UnsupportedSet("strip position must lie in (0, 1)")
        w = Weight(lambda t: np.ones_like(t), lambda t: np.zeros_like(t), -s, 1.0 - s,
                   source="levelset", name=f"strip({s:g})", antideriv=lambda t: t)
    elif cset.kind == "quarter_disk":
        if not 0.0 < s < 1.0:
            raise UnsupportedSet("quarter-disk radius must lie in (0, 1)")
        w = Weight(lambda t: _corner_arc(s + t), lambda t: _corner_arc_deriv(s + t),
                   -s, math.sqrt(2.0) - s, source="levelset", name=f"quarter_disk({s:g})",
                   breaks=(1.0 - s,))
    elif cset.kind == "disk":
        if not 0.0 < s < 0.5:
            raise UnsupportedSet("disk radius must lie in (0, 1/2)")
        # centred disk: rescaling the corner picture by 2 gives four corner arcs
        w = Weight(lambda t: 4.0 * 0.5 * _corner_arc(2.0 * (s + t)),
                   lambda t: 4.0 * _corner_arc_deriv(2.0 * (s + t)),
                   -s, math.sqrt(0.5) - s, source="levelset", name=f"disk({s:g})",
                   breaks=(0.5 - s,))
    elif cset.kind == "ball":
        n = int(cset.n)
        if not 0.0 < s < 1.0 or n < 2:
            raise UnsupportedSet("ball radius must lie in (0, 1) and n >= 2")
        area = n * unit_ball_measure(n)
        w = Weight(lambda t: area * (s + t) ** (n - 1), lambda t: area * (n - 1) * (s + t) ** (n - 2),
                   -s, 1.0 - s, source="levelset", name=f"ball({s:g}, n={n})",
                   antideriv=lambda t: unit_ball_measure(n) * (s + t) ** n)
    else:
        raise UnsupportedSet(f"no level-set formula for {cset.kind!r}")
    w.meta["set"] = cset
    return w
