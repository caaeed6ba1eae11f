"""Heteroclinic profile ``z' = sqrt(W(z)), z(0) = c`` and its scalar constants.

The profile is tabulated by an adaptive embedded Runge-Kutta pair and stored
as a quintic Hermite interpolant: at every node the exact derivatives
``z' = sqrt(W(z))`` and ``z'' = W'(z) / 2`` are known, so the interpolant is
accurate well beyond the step-size of the integrator.

Tails for quadratic wells (q = 1).  Near ``b``, ``W(s) ~ (ell / 2) (b - s)**2``
so ``z' ~ sqrt(ell / 2) (b - z)`` and ``b - z(t) ~ (b - z(t1)) exp(-k (t - t1))``
with ``k = sqrt(ell / 2)`` (for the quartic, ``k = sqrt(2)``, matching
``1 - tanh(t / sqrt(2)) ~ 2 exp(-sqrt(2) t)``).  Past the last node the
profile is continued by this exponential.  For ``q < 1`` the profile reaches
the wells at finite times ``t_a < 0 < t_b`` and is constant beyond them.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp
from scipy.interpolate import BPoly
from scipy.optimize import brentq

from .errors import NoBracket, StiffnessFailure
from .potential import Potential

WELL_GAP = 1e-13  # stop tabulating once the profile is this close to a well
SUB_GAP = 1e-6  # q < 1: switch to the inverse map t(z) this close to a well
MAX_STEP = 0.025  # keeps the quintic Hermite interpolation error below ~1e-12

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_GL4_X, _GL4_W = np.polynomial.legendre.leggauss(4)


@dataclass(frozen=True)
class ProfileConstants:
    c_w: float
    c_sym: float
    quadrature_error: float


class Profile:
    """Tabulated heteroclinic connection between the wells of a potential."""

    def __init__(self, potential: Potential, t: np.ndarray, z: np.ndarray, tol: float,
                 t_a: float | None = None, t_b: float | None = None):
        self.potential = potential
        self.potential_ref = potential.name
        self.tol = tol
        self.t = t
        self.nodes_z = z
        self.t_a = t_a
        self.t_b = t_b
        p = potential
        zc = np.clip(z, p.a, p.b)
        dz = np.sqrt(np.maximum(p.eval(zc), 0.0))
        d2z = 0.5 * p.deriv(zc)
        if t_a is not None:
            d2z[0] = 0.0
            dz[0] = 0.0
        if t_b is not None:
            d2z[-1] = 0.0
            dz[-1] = 0.0
        self._spline = BPoly.from_derivatives(t, np.column_stack([z, dz, d2z]))
        self._antider = self._spline.antiderivative()
        if p.q >= 1.0:
            self.tail_rate = math.sqrt(p.ell / 2.0)
        else:
            self.tail_rate = math.inf
        self.t_lo, self.t_hi = float(t[0]), float(t[-1])
        self.z_lo, self.z_hi = float(z[0]), float(z[-1])

    # -- evaluation ---------------------------------------------------------

    def z(self, t):
        t = np.asarray(t, dtype=float)
        p = self.potential
        out = np.empty_like(t)
        lo = t < self.t_lo
        hi = t > self.t_hi
        mid = ~(lo | hi)
        out[mid] = self._spline(t[mid])
        k = self.tail_rate
        if math.isinf(k):
            out[lo] = p.a
            out[hi] = p.b
        else:
            out[lo] = p.a + (self.z_lo - p.a) * np.exp(k * (t[lo] - self.t_lo))
            out[hi] = p.b - (p.b - self.z_hi) * np.exp(-k * (t[hi] - self.t_hi))
        return np.clip(out, p.a, p.b)

    __call__ = z

    def dz(self, t):
        """``z'(t)``, evaluated through the first integral ``sqrt(W(z))``."""
        return np.sqrt(np.maximum(self.potential.eval(self.z(t)), 0.0))

    def residual(self) -> float:
        """Max of ``|z' - sqrt(W(z))|`` at interval midpoints of the tabulation."""
        tm = 0.5 * (self.t[1:] + self.t[:-1])
        d = self._spline.derivative()(tm)
        w = np.sqrt(np.maximum(self.potential.eval(self._spline(tm)), 0.0))
        return float(np.max(np.abs(d - w)))

    def first_integral_defect(self) -> float:
        """Max of ``|(z')**2 - W(z)|`` with ``z'`` from the interpolant."""
        tm = np.linspace(self.t_lo, self.t_hi, 20 * len(self.t))
        d = self._spline.derivative()(tm)
        return float(np.max(np.abs(d * d - self.potential.eval(self._spline(tm)))))

    @cached_property
    def decay_rates(self) -> tuple[float, float]:
        """Tightest ``(c1, c2)`` with ``c1**2 (b-s)**(1+q) <= W(s) <= c2**2 (b-s)**(1+q)``.

        Sampled on ``[(a+b)/2, b)``; diagnostics only.
        """
        p = self.potential
        s = p.b - (p.b - 0.5 * (p.a + p.b)) * np.logspace(-8, 0, 4000)
        r = p.eval(s) / (p.b - s) ** (1.0 + p.q)
        return float(np.sqrt(r.min())), float(np.sqrt(r.max()))

    @cached_property
    def width(self) -> float:
        """Support width for q < 1, or the e-folding length ``1/k`` for q = 1."""
        if self.t_a is not None and self.t_b is not None:
            return self.t_b - self.t_a
        return 1.0 / self.tail_rate

    @cached_property
    def c_w(self) -> float:
        return compute_cw(self.potential)

    # -- integrals ------------------------------------------------------------

    def _gauss(self, fn, order: int = 8) -> tuple[float, float]:
        """Composite Gauss-Legendre of ``fn(t)`` over the tabulation intervals."""
        x, w = (_GL_X, _GL_W) if order == 8 else (_GL4_X, _GL4_W)
        h = np.diff(self.t)
        mid = 0.5 * (self.t[1:] + self.t[:-1])
        tt = mid[:, None] + 0.5 * h[:, None] * x[None, :]
        return float(np.sum(0.5 * h[:, None] * w[None, :] * fn(tt)))

    def shift_integral(self, tau: float) -> float:
        """``int_R z(t - tau) - sgn_ab(t) dt`` by exact integration of the interpolant."""
        p = self.potential
        u0 = -float(tau)
        k = self.tail_rate
        Z = self._antider
        tail_lo = 0.0 if math.isinf(k) else (self.z_lo - p.a) / k
        tail_hi = 0.0 if math.isinf(k) else (p.b - self.z_hi) / k
        # int_{-inf}^{u0} (z - a)
        if u0 <= self.t_lo:
            left = 0.0 if math.isinf(k) else tail_lo * math.exp(k * (u0 - self.t_lo))
        else:
            uc = min(u0, self.t_hi)
            left = tail_lo + float(Z(uc) - Z(self.t_lo)) - p.a * (uc - self.t_lo)
            if u0 > self.t_hi:
                left += (p.b - p.a) * (u0 - self.t_hi) - tail_hi * (
                    0.0 if math.isinf(k) else 1.0 - math.exp(-k * (u0 - self.t_hi)))
        # int_{u0}^{inf} (z - b)
        if u0 >= self.t_hi:
            right = 0.0 if math.isinf(k) else -tail_hi * math.exp(-k * (u0 - self.t_hi))
        else:
            uc = max(u0, self.t_lo)
            right = -tail_hi + float(Z(self.t_hi) - Z(uc)) - p.b * (self.t_hi - uc)
            if u0 < self.t_lo:
                right -= (p.b - p.a) * (self.t_lo - u0) - tail_lo * (
                    0.0 if math.isinf(k) else 1.0 - math.exp(k * (u0 - self.t_lo)))
        return left + right


def solve_profile(p: Potential, horizon: float = 40.0, tol: float = 1e-12) -> Profile:
    """Tabulate the profile on ``[-horizon, horizon]`` (or ``[t_a, t_b]`` if q < 1).

    Raises :class:`StiffnessFailure` when the adaptive step collapses.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if not 1e-14 < tol < 1e-4:
        raise ValueError("tol must lie in (1e-14, 1e-4)")
    a, b, c = p.a, p.b, p.c

    def rhs(t, y):
        s = min(max(y[0], a), b)
        return [math.sqrt(max(float(p.eval(s)), 0.0))]

    # sub-quadratic wells: hand over to the inverse map t(z) close to the wells
    gap = WELL_GAP if p.q >= 1.0 else SUB_GAP

    def hit_b(t, y):
        return b - y[0] - gap
    hit_b.terminal = True

    def hit_a(t, y):
        return y[0] - a - gap
    hit_a.terminal = True

    legs = []
    for t_end, event in ((horizon, hit_b), (-horizon, hit_a)):
        sol = solve_ivp(rhs, (0.0, t_end), [c], method="DOP853", rtol=tol,
                        atol=tol * 1e-3, max_step=MAX_STEP, events=event)
        if sol.status < 0:
            raise StiffnessFailure(f"profile integration failed for {p.name}: {sol.message}")
        steps = np.abs(np.diff(sol.t))
        if steps[1:].size and steps[1:].min() < 1e-14:
            raise StiffnessFailure(f"profile step collapsed below 1e-14 for {p.name}")
        legs.append((sol.t, sol.y[0], sol.status == 1))
    (tf, zf, fin_f), (tb, zb, fin_b) = legs
    t = np.r_[tb[::-1], tf[1:]]
    z = np.r_[zb[::-1], zf[1:]]
    t_a = t_b = None
    if p.q < 1.0:
        if not (fin_f and fin_b):
            raise StiffnessFailure("sub-quadratic profile did not reach the wells within the horizon")
        gaps = gap * 0.5 ** np.arange(1, 13)
        hi_t = [_time_to_well(p, b - g, b) for g in gaps]
        lo_t = [_time_to_well(p, a + g, a) for g in gaps]
        t_b = float(t[-1] + _time_to_well(p, z[-1], b))
        t_a = float(t[0] - _time_to_well(p, z[0], a))
        t = np.r_[t_a, t_a + np.array(lo_t[::-1]), t, t_b - np.array(hi_t), t_b]
        z = np.r_[a, a + gaps[::-1], z, b - gaps, b]
        keep = np.r_[True, np.diff(t) > 1e-15]
        t, z = t[keep], z[keep]
    return Profile(p, t, z, tol, t_a=t_a, t_b=t_b)


def _time_to_well(p: Potential, s0: float, well: float) -> float:
    """Time the profile needs to travel from ``s0`` to ``well`` (finite when q < 1)."""
    e = (1.0 + p.q) / 2.0
    f = lambda s: abs(s - well) ** e / math.sqrt(max(float(p.eval(s)), 1e-300))  # noqa: E731
    lo, hi = (s0, well) if well > s0 else (well, s0)
    wvar = (0.0, -e) if well > s0 else (-e, 0.0)
    # W loses relative precision right at the well, so quadpack may flag the
    # integrand as rough there; the endpoint weight absorbs the singularity
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(f, lo, hi, weight="alg", wvar=wvar, epsabs=1e-13, epsrel=1e-10, limit=200)
    return val


def compute_cw(p: Potential, tol: float = 1e-12) -> float:
    """``c_W = int_a^b sqrt(W(s)) ds``, split at ``c`` so each piece has one endpoint well."""
    return cw_with_error(p, tol)[0]


def cw_with_error(p: Potential, tol: float = 1e-12) -> tuple[float, float]:
    if p.b <= p.a:
        return 0.0, 0.0
    f = lambda s: math.sqrt(max(float(p.eval(s)), 0.0))  # noqa: E731
    v1, e1 = quad(f, p.a, p.c, epsabs=tol * 1e-2, epsrel=1e-14, limit=200)
    v2, e2 = quad(f, p.c, p.b, epsabs=tol * 1e-2, epsrel=1e-14, limit=200)
    return v1 + v2, e1 + e2


def compute_csym(prof: Profile, p: Potential | None = None, tol: float = 1e-10) -> float:
    """``c_sym = int_R W(z(t)) t dt``."""
    return csym_with_error(prof, p)[0]


def csym_with_error(prof: Profile, p: Potential | None = None) -> tuple[float, float]:
    p = p or prof.potential
    f = lambda t: p.eval(prof.z(t)) * t  # noqa: E731
    v8 = prof._gauss(f, 8)
    v4 = prof._gauss(f, 4)
    tail = 0.0
    k = prof.tail_rate
    if not math.isinf(k):
        # W(z) ~ (ell/2) (gap)^2 e^{-2k|t - t_end|} beyond the tabulation
        for t_end, gap, sgn in ((prof.t_hi, p.b - prof.z_hi, 1.0), (prof.t_lo, prof.z_lo - p.a, -1.0)):
            tail += 0.5 * p.ell * gap**2 * (t_end / (2 * k) + sgn / (4 * k * k))
    return v8 + tail, abs(v8 - v4) + abs(tail)


def profile_constants(prof: Profile) -> ProfileConstants:
    cw, e1 = cw_with_error(prof.potential)
    cs, e2 = csym_with_error(prof)
    return ProfileConstants(c_w=cw, c_sym=cs, quadrature_error=e1 + e2)


def shift_integral(prof: Profile, tau: float) -> float:
    return prof.shift_integral(tau)


def tau_for_multiplier(prof: Profile, eta_t0: float, lambda0: float, total_eta: float) -> float:
    """Shift ``tau`` with ``eta_t0 * S(tau) = lambda0 * total_eta / W''(a)`` (q = 1) or ``S(tau) = 0``.

    ``S`` is :meth:`Profile.shift_integral`. Raises :class:`NoBracket` if the
    residual keeps one sign on ``[-10 w, 10 w]`` with ``w`` the profile width.
    """
    if eta_t0 <= 0:
        raise ValueError("eta_t0 must be positive")
    p = prof.potential
    if p.q >= 1.0:
        target = lambda0 * total_eta / (p.ell * eta_t0)
    else:
        target = 0.0

    def resid(tau):
        return prof.shift_integral(tau) - target

    w = 10.0 * prof.width
    r_lo, r_hi = resid(-w), resid(w)
    if r_lo * r_hi > 0:
        raise NoBracket(f"shift equation has no root in [-{w:g}, {w:g}] (target {target:g})")
    tau = brentq(resid, -w, w, xtol=1e-15, rtol=1e-15, maxiter=200)
    if abs(resid(tau)) > 1e-10:
        raise NoBracket("shift equation residual above 1e-10")
    return float(tau)


def solve_tau(prof: Profile, eta_t0: float, kappa: float, n: int, total_eta: float = 1.0,
              perimeter: float | None = None) -> float:
    """``tau_u`` for an interface of mean curvature ``kappa`` and perimeter ``eta_t0``.

    ``perimeter`` is accepted as an alias of ``eta_t0`` (they coincide for
    level-set weights).
    """
    P = eta_t0 if perimeter is None else perimeter
    p = prof.potential
    lam = 2.0 * prof.c_w * (n - 1) * kappa / (p.b - p.a)
    return tau_for_multiplier(prof, P, lam, total_eta)
