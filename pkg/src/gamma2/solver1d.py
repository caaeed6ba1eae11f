"""Weighted 1D energy ``G_eps(v) = int (W(v) + eps^2 v'^2) eta dt`` under ``int v eta = m``.

Discretization: continuous piecewise-linear ``v`` on a graded grid, each cell
integrated with Gauss-Legendre (``W`` part) and the exact cell moment of
``eta`` (gradient part). Minimization is Newton on the KKT system with the
mass constraint kept exact; the constraint's dual variable is ``mu = -eps*lambda``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from .errors import (LeftLocalityBall, MassOutOfRange, NoBracket, NoConvergence,
                     RootCountChanged, UnresolvedEpsilon)
from .isoperimetry import Weight
from .potential import Potential
from .profile import Profile

logger = logging.getLogger(__name__)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(6)
_GX = 0.5 * (_GL_X + 1.0)  # nodes on [0, 1]
_GW = 0.5 * _GL_W
W2_CAP = 1e12  # Hessian cap for sub-quadratic wells where W'' blows up


def sgn_ab(t, a: float, b: float):
    """``a`` for ``t <= 0`` and ``b`` for ``t > 0``."""
    return np.where(np.asarray(t) <= 0.0, a, b)


# ---------------------------------------------------------------------------
# grid


@dataclass(frozen=True)
class Grid1D:
    nodes: np.ndarray
    t0: float | None = None
    fine_spacing: float | None = None
    eps: float | None = None

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def size(self) -> int:
        return self.nodes.size

    def resolves(self, eps: float, t0: float | None = None) -> bool:
        """Spacing at most ``eps/10`` within ``20 eps |log eps|`` of the interface."""
        t0 = self.t0 if t0 is None else t0
        if t0 is None:
            return bool(self.h.max() <= eps / 10.0 * (1 + 1e-9))
        mid = 0.5 * (self.nodes[1:] + self.nodes[:-1])
        band = np.abs(mid - t0) <= 20.0 * eps * abs(math.log(eps))
        return bool(not band.any() or self.h[band].max() <= eps / 10.0 * (1 + 1e-9))


def break_refinement(breaks, lo: float, hi: float, width: float = 0.05, levels: int = 40) -> np.ndarray:
    """Points ``b +- width * 2**-k`` around each break.

    Weights such as corner arcs have a square-root singularity in ``eta`` at a
    break, which plain Gauss-Legendre panels resolve only slowly.
    """
    out = []
    off = width * 0.5 ** np.arange(levels)
    for b in breaks:
        if lo < b < hi:
            out.append(np.r_[b, b - off, b + off])
    if not out:
        return np.zeros(0)
    pts = np.concatenate(out)
    return pts[(pts > lo) & (pts < hi)]


def graded_grid(lo: float, hi: float, t0: float, eps: float, fine_factor: float = 400.0,
                core: float = 20.0, ratio: float = 1.1, breaks=(), centre: float | None = None) -> Grid1D:
    """Nodes with spacing ``eps/fine_factor`` within ``core*eps`` of the layer centre,
    at most ``eps/10`` within ``20 eps |log eps|`` of ``t0`` and geometric growth beyond,
    capped at ``(hi-lo)/200`` and refined towards the endpoints.
    """
    if not lo < t0 < hi:
        raise ValueError("t0 must lie inside the interval")
    centre = t0 if centre is None else centre
    h_f = eps / fine_factor
    band = 20.0 * eps * abs(math.log(eps))
    cap = (hi - lo) / 200.0
    end_floor = cap / 50.0

    def spacing(t, prev):
        d = abs(t - centre)
        if d <= core * eps:
            h = h_f
        elif abs(t - t0) <= band:
            h = min(eps / 10.0, prev * ratio)
        else:
            h = prev * ratio
        h = min(h, cap, max(0.25 * min(t - lo, hi - t), end_floor))
        return max(h, h_f)

    pts = [centre]
    for direction, end in ((1.0, hi), (-1.0, lo)):
        t, prev = centre, h_f
        while direction * (end - t) > 0:
            h = spacing(t, prev)
            t = t + direction * h
            prev = h
            pts.append(t)
    nodes = np.unique(np.clip(np.array(pts), lo, hi))
    # add geometrically graded nodes around weight kinks, then merge near-duplicates
    nodes = np.unique(np.r_[lo, nodes, break_refinement(breaks, lo, hi, cap), hi])
    keep = np.r_[True, np.diff(nodes) > 0.25 * h_f]
    nodes = nodes[keep]
    nodes[-1] = hi
    return Grid1D(nodes, t0=t0, fine_spacing=h_f, eps=eps)


# ---------------------------------------------------------------------------
# fields and the discrete functional


@dataclass
class Field1D:
    t: np.ndarray
    values: np.ndarray
    mass: float
    bulk_energy: float  # int W(v) eta
    grad_energy: float  # int eps^2 v'^2 eta
    eps: float
    meta: dict = field(default_factory=dict)

    @property
    def energy(self) -> float:
        return self.bulk_energy + self.grad_energy

    def to_csv(self, path) -> None:
        from . import io
        io.write_csv(path, ["t", "v"], [self.t, self.values])


class DiscreteEnergy:
    """P1 discretization of ``G_eps`` with gradient and a tridiagonal Hessian."""

    def __init__(self, grid: Grid1D, weight: Weight, p: Potential, eps: float):
        self.grid = grid
        self.weight = weight
        self.p = p
        self.eps = eps
        t = grid.nodes
        h = np.diff(t)
        self.h = h
        tq = t[:-1, None] + h[:, None] * _GX[None, :]
        self.tq = tq
        self.eta_q = weight.eval(tq)
        self.wq = h[:, None] * _GW[None, :] * self.eta_q  # quadrature weights incl. eta
        self.cell_eta = self.wq.sum(axis=1)
        c = np.zeros(t.size)
        c[:-1] += np.sum(self.wq * (1.0 - _GX), axis=1)
        c[1:] += np.sum(self.wq * _GX, axis=1)
        self.c = c  # int phi_i eta
        self.stiff = eps * eps * self.cell_eta / (h * h)

    @property
    def size(self) -> int:
        return self.grid.size

    def _vq(self, v):
        return v[:-1, None] * (1.0 - _GX) + v[1:, None] * _GX

    def mass(self, v) -> float:
        return float(self.c @ v)

    def parts(self, v) -> tuple[float, float]:
        vq = self._vq(v)
        bulk = float(np.sum(self.p.eval(vq) * self.wq))
        dv = np.diff(v)
        grad = float(np.sum(self.stiff * dv * dv))
        return bulk, grad

    def energy(self, v) -> float:
        b, g = self.parts(v)
        return b + g

    def gradient(self, v) -> np.ndarray:
        vq = self._vq(v)
        f = self.p.deriv(vq) * self.wq
        g = np.zeros(v.size)
        g[:-1] += np.sum(f * (1.0 - _GX), axis=1)
        g[1:] += np.sum(f * _GX, axis=1)
        flux = 2.0 * self.stiff * np.diff(v)
        g[:-1] -= flux
        g[1:] += flux
        return g

    def hessian_bands(self, v) -> np.ndarray:
        """``(3, N)`` banded storage for :func:`scipy.linalg.solve_banded`."""
        vq = self._vq(v)
        w2 = np.minimum(self.p.deriv2(vq), W2_CAP) * self.wq
        d = np.zeros(v.size)
        d[:-1] += np.sum(w2 * (1.0 - _GX) ** 2, axis=1) + 2.0 * self.stiff
        d[1:] += np.sum(w2 * _GX ** 2, axis=1) + 2.0 * self.stiff
        off = np.sum(w2 * _GX * (1.0 - _GX), axis=1) - 2.0 * self.stiff
        ab = np.zeros((3, v.size))
        ab[0, 1:] = off
        ab[1] = d
        ab[2, :-1] = off
        return ab

    def hvp(self, v, w) -> np.ndarray:
        return _banded_matvec(self.hessian_bands(v), np.asarray(w, dtype=float))

    def field(self, v, **meta) -> Field1D:
        b, g = self.parts(v)
        return Field1D(self.grid.nodes.copy(), np.array(v, dtype=float), self.mass(v), b, g,
                       self.eps, dict(meta))

    def l1_distance(self, v, t0: float) -> float:
        """``||v - sgn_ab(. - t0)||_{L1_eta}``, with the cell containing ``t0`` split."""
        p = self.p
        vq = self._vq(v)
        ref = sgn_ab(self.tq - t0, p.a, p.b)
        tot = float(np.sum(np.abs(vq - ref) * self.wq))
        t = self.grid.nodes
        k = int(np.clip(np.searchsorted(t, t0) - 1, 0, t.size - 2))
        tot -= float(np.sum(np.abs(vq[k] - ref[k]) * self.wq[k]))
        for lo, hi, val in ((t[k], t0, p.a), (t0, t[k + 1], p.b)):
            if hi > lo:
                s = lo + (hi - lo) * _GX
                xi = (s - t[k]) / (t[k + 1] - t[k])
                vs = v[k] * (1.0 - xi) + v[k + 1] * xi
                tot += float(np.sum((hi - lo) * _GW * self.weight.eval(s) * np.abs(vs - val)))
        return tot


def gradient_check(functional: DiscreteEnergy, v, direction, h: float = 1e-6) -> float:
    """Relative error of ``grad G . d`` against a central difference of ``G`` along ``d``."""
    v = np.asarray(v, dtype=float)
    d = np.asarray(direction, dtype=float)
    fd = (functional.energy(v + h * d) - functional.energy(v - h * d)) / (2.0 * h)
    an = float(functional.gradient(v) @ d)
    return abs(fd - an) / max(abs(an), 1e-300)


def assemble_energy(grid: Grid1D, weight: Weight, p: Potential, eps: float,
                    t0: float | None = None) -> DiscreteEnergy:
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not grid.resolves(eps, t0):
        raise UnresolvedEpsilon(f"grid spacing exceeds eps/10 = {eps / 10:.3g} near the interface")
    return DiscreteEnergy(grid, weight, p, eps)


# ---------------------------------------------------------------------------
# interface location, well roots, recovery sequence


def reference_interface(weight: Weight, m: float, p: Potential) -> float:
    """Unique ``t0`` with ``a int_{lo}^{t0} eta + b int_{t0}^{hi} eta = m``."""
    total = weight.total
    lo_m, hi_m = p.a * total, p.b * total
    if not lo_m < m < hi_m:
        raise MassOutOfRange(f"mass {m:g} not in ({lo_m:g}, {hi_m:g})")

    def resid(t):
        left = weight.cumulative(t)
        return p.a * left + p.b * (total - left) - m

    t0 = brentq(resid, weight.lo, weight.hi, xtol=1e-15, rtol=1e-15, maxiter=300)
    if abs(resid(t0)) > 1e-12 * max(1.0, abs(m)):
        raise MassOutOfRange("interface location could not be resolved to 1e-12")
    return float(t0)


def bulk_threshold(p: Potential) -> float:
    """``w0``: smaller of the two bump heights of ``|W'|`` between the wells."""
    s1 = np.linspace(p.a, p.c, 2001)[1:-1]
    s2 = np.linspace(p.c, p.b, 2001)[1:-1]
    return float(min(np.abs(p.deriv(s1)).max(), np.abs(p.deriv(s2)).max()))


def well_roots(p: Potential, eps_lambda: float) -> tuple[float, float, float]:
    """Roots ``a_eps < c_eps < b_eps`` of ``W' + eps_lambda``."""
    if eps_lambda == 0.0:
        return p.a, p.c, p.b
    if abs(eps_lambda) >= 0.5 * bulk_threshold(p):
        raise ValueError("|eps*lambda| must stay below half the bump height of W'")
    gap = p.b - p.a
    s = np.linspace(p.a - 0.5 * gap, p.b + 0.5 * gap, 20001)
    f = p.deriv(s) + eps_lambda
    idx = np.where(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]
    if idx.size != 3:
        raise RootCountChanged(f"W' + {eps_lambda:g} has {idx.size} sign changes near the wells")
    fn = lambda x: float(p.deriv(x)) + eps_lambda  # noqa: E731
    roots = [brentq(fn, s[i], s[i + 1], xtol=1e-16, rtol=1e-15, maxiter=200) for i in idx]
    return roots[0], roots[1], roots[2]


def well_root_prediction(p: Potential, eps: float, lam: float) -> dict:
    """First-order corrections ``a_eps - a``, ``c_eps - c`` and ``b_eps - b``."""
    q, ell = p.q, p.ell
    corr = -lam * abs(lam) ** (1.0 / q - 1.0) * (q / ell) ** (1.0 / q) * eps ** (1.0 / q)
    return {"a": corr, "b": corr, "c": -lam * eps / float(p.deriv2(p.c))}


@dataclass
class Recovery:
    """``v(t) = z((t - t0)/eps - tau_eps) - shift`` with ``shift = lambda0 eps / W''(a)`` (q = 1)."""
    prof: Profile
    t0: float
    eps: float
    tau_eps: float
    shift: float
    lambda0: float
    lo: float
    hi: float

    def __call__(self, t):
        return self.prof.z((np.asarray(t, dtype=float) - self.t0) / self.eps - self.tau_eps) - self.shift

    def deriv(self, t):
        s = (np.asarray(t, dtype=float) - self.t0) / self.eps - self.tau_eps
        return self.prof.dz(s) / self.eps

    def panels(self, breaks=()) -> np.ndarray:
        """Integration panels: ``eps/4`` wide through the layer, geometric outside."""
        centre = self.t0 + self.eps * self.tau_eps
        span = 60.0
        if self.prof.t_a is not None:
            span = max(abs(self.prof.t_a), abs(self.prof.t_b)) + 1.0
        core = centre + self.eps * np.arange(-span, span + 1e-9, 0.25)
        pts = [core]
        for direction, end in ((1.0, self.hi), (-1.0, self.lo)):
            start = centre + direction * span * self.eps
            d = self.eps * 0.25 * 1.25 ** np.arange(1, 200)
            steps = start + direction * np.cumsum(d)
            pts.append(steps[direction * (end - steps) > 0])
        extra = list(break_refinement(breaks, self.lo, self.hi))
        if self.prof.t_a is not None:
            extra += [self.t0 + self.eps * (self.tau_eps + self.prof.t_a),
                      self.t0 + self.eps * (self.tau_eps + self.prof.t_b)]
        allp = np.concatenate(pts + [np.array(extra, dtype=float), [self.lo, self.hi]])
        allp = np.unique(allp[(allp >= self.lo) & (allp <= self.hi)])
        return allp

    def integrate(self, fn, weight: Weight, order: int = 8) -> float:
        x, w = np.polynomial.legendre.leggauss(order)
        edges = self.panels(weight.breaks)
        h = np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        tt = mid[:, None] + 0.5 * h[:, None] * x[None, :]
        return float(np.sum(0.5 * h[:, None] * w[None, :] * fn(tt) * weight.eval(tt)))

    def mass(self, weight: Weight) -> float:
        return self.integrate(self, weight)

    def energy_parts(self, weight: Weight, p: Potential) -> tuple[float, float]:
        bulk = self.integrate(lambda t: p.eval(self(t)), weight)
        grad = self.integrate(lambda t: self.eps ** 2 * self.deriv(t) ** 2, weight)
        return bulk, grad

    def nodal(self, t) -> np.ndarray:
        return np.asarray(self(t), dtype=float)


def recovery_sequence(prof: Profile, p: Potential, weight: Weight, t0: float, eps: float,
                      m: float, q: float | None = None, lambda0: float | None = None,
                      tau0: float = 0.0) -> Field1D:
    """Recovery function for ``eps`` with ``tau_eps`` fixed by the mass constraint.

    The returned field samples ``v`` on the integration panel edges; the
    callable itself is kept in ``meta['recovery']``.
    """
    q = p.q if q is None else q
    if lambda0 is None:
        lambda0 = 2.0 * float(weight.deriv(t0)) * prof.c_w / ((p.b - p.a) * float(weight.eval(t0)))
    shift = lambda0 * eps / p.ell if q >= 1.0 else 0.0
    rec = Recovery(prof, t0, eps, tau0, shift, lambda0, weight.lo, weight.hi)

    def resid(tau):
        rec.tau_eps = tau
        return rec.mass(weight) - m

    lo, hi = tau0 - 5.0, tau0 + 5.0
    r_lo, r_hi = resid(lo), resid(hi)
    if r_lo * r_hi > 0:
        raise NoBracket(f"recovery shift not bracketed on [{lo:g}, {hi:g}]")
    tau = brentq(resid, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=200)
    rec.tau_eps = tau
    mass = rec.mass(weight)
    bulk, grad = rec.energy_parts(weight, p)
    t = rec.panels(weight.breaks)
    return Field1D(t, rec.nodal(t), mass, bulk, grad, eps,
                   {"recovery": rec, "tau_eps": tau, "shift": shift, "lambda0": lambda0,
                    "mass_residual": mass - m})


def discrete_recovery(functional: DiscreteEnergy, rec: Recovery, m: float) -> np.ndarray:
    """Recovery sampled at the grid nodes, re-shifted so the discrete mass is exactly ``m``."""
    t = functional.grid.nodes
    base = rec.tau_eps

    def resid(dt):
        return functional.mass(rec.prof.z((t - rec.t0) / rec.eps - base - dt) - rec.shift) - m

    dt = brentq(resid, -1.0, 1.0, xtol=1e-15, rtol=1e-15, maxiter=200)
    v = rec.prof.z((t - rec.t0) / rec.eps - base - dt) - rec.shift
    # absorb the last rounding-level mass defect with a uniform shift
    v = v + (m - functional.mass(v)) / functional.c.sum()
    return v


# ---------------------------------------------------------------------------
# minimization


@dataclass
class MinimizerResult:
    field: Field1D
    lambda_eps: float
    lambda_bulk: float
    el_residual: float
    neumann_defect: float
    iterations: int
    well_roots: tuple[float, float, float]
    converged: bool
    energy_history: list = field(default_factory=list)
    locality: float = 0.0
    bound_violation: float = 0.0


def _banded_matvec(ab, x):
    out = ab[1] * x
    out[:-1] += ab[0, 1:] * x[1:]
    out[1:] += ab[2, :-1] * x[:-1]
    return out


def _kkt_step(ab, g, c, r, refine: int = 3):
    """Solve ``H dv - mu c = -g``, ``c.dv = r`` by block elimination.

    ``H`` is nearly singular along the layer-translation mode (which the mass
    constraint removes), so the elimination loses digits; a few rounds of
    iterative refinement restore them.
    """
    lu = (1, 1)
    dv = np.zeros_like(g)
    mu = 0.0
    rhs1, rhs2 = -g.copy(), float(r)
    for _ in range(refine + 1):
        x = solve_banded(lu, ab, np.column_stack([rhs1, c]), check_finite=False)
        x1, x2 = x[:, 0], x[:, 1]
        dmu = (rhs2 - c @ x1) / (c @ x2)
        dv = dv + x1 + dmu * x2
        mu = mu + dmu
        rhs1 = -g - (_banded_matvec(ab, dv) - mu * c)
        rhs2 = float(r - c @ dv)
    return dv, mu


def el_defect(functional: DiscreteEnergy, v) -> tuple[np.ndarray, float]:
    """Nodewise strong-form residual ``(grad G - mu c)_i / c_i`` and the multiplier ``mu``.

    ``mu = sum(grad G) / sum(c)`` is the weighted least-squares fit of the
    gradient against the constraint direction.
    """
    g = functional.gradient(v)
    c = functional.c
    mu = g.sum() / c.sum()
    return (g - mu * c) / c, float(mu)


def minimize_localized(functional: DiscreteEnergy, weight: Weight, p: Potential, eps: float,
                       m: float, delta_loc: float, v_init, t0: float, tol: float = 1e-9,
                       max_iter: int = 100) -> MinimizerResult:
    """Newton iteration on the KKT system inside the ``delta_loc`` ball around ``v0``."""
    v = np.array(v_init, dtype=float)
    c = functional.c
    if abs(functional.mass(v) - m) > 1e-10 * max(1.0, abs(m)):
        raise ValueError("v_init violates the mass constraint")
    dist = functional.l1_distance(v, t0)
    if dist > delta_loc:
        raise LeftLocalityBall(f"initial state is {dist:.3g} from v0 > delta_loc={delta_loc:.3g}")
    E = functional.energy(v)
    history = [E]
    converged = False
    lump = c / c.max()
    it = 0
    for it in range(1, max_iter + 1):
        res, mu = el_defect(functional, v)
        if np.max(np.abs(res)) < tol:
            converged = True
            it -= 1
            break
        g = functional.gradient(v)
        r = m - functional.mass(v)
        ab = functional.hessian_bands(v)
        sigma = 0.0
        accepted = False
        for _ in range(30):
            ab_s = ab.copy()
            ab_s[1] += sigma * lump
            try:
                dv, _mu = _kkt_step(ab_s, g, c, r)
            except (np.linalg.LinAlgError, ValueError):
                dv = None
            if dv is not None and np.all(np.isfinite(dv)) and g @ dv < 0:
                step = 1.0
                while step > 1e-10:
                    vn = v + step * dv
                    En = functional.energy(vn)
                    if En <= E + 1e-4 * step * (g @ dv) + 1e-15 * abs(E):
                        accepted = True
                        break
                    step *= 0.5
                if accepted:
                    break
            sigma = max(10.0 * sigma, 1e-6 * np.max(np.abs(ab[1])))
        if not accepted:
            # no decrease possible at machine precision: stop and report
            logger.debug("line search stalled at iteration %d", it)
            break
        vn = vn + (m - functional.mass(vn)) / c.sum()
        dist = functional.l1_distance(vn, t0)
        if dist > delta_loc:
            raise LeftLocalityBall(f"iterate {it} is {dist:.3g} from v0 > delta_loc={delta_loc:.3g}")
        v, E = vn, functional.energy(vn)
        history.append(E)
    res, mu = el_defect(functional, v)
    el_res = float(np.max(np.abs(res)))
    if el_res < tol:
        converged = True
    if not converged:
        raise NoConvergence(f"EL residual {el_res:.3g} after {it} iterations")
    lam = -mu / eps
    lam_bulk = bulk_multiplier(functional, v, t0)
    try:
        roots = well_roots(p, eps * lam)
    except (ValueError, RootCountChanged):
        roots = (float("nan"),) * 3
    lo_b, hi_b = min(roots[0], roots[2]), max(roots[0], roots[2])
    viol = float(max(0.0, lo_b - v.min(), v.max() - hi_b)) if np.isfinite(lo_b) else float("nan")
    h = functional.h
    neumann = float(max(abs(v[1] - v[0]) / h[0], abs(v[-1] - v[-2]) / h[-1]))
    fld = functional.field(v, lambda_eps=lam)
    return MinimizerResult(fld, lam, lam_bulk, el_res, neumann, it, roots, converged, history,
                           functional.l1_distance(v, t0), viol)


def bulk_multiplier(functional: DiscreteEnergy, v, t0: float, width: float = 15.0) -> float:
    """``lambda`` from the pointwise identity ``eps lambda = 2 eps^2 (v' eta)'/eta - W'(v)``.

    Finite differences on the nodes, averaged (``eta``-weighted) over nodes at
    least ``width * eps`` away from the layer. Independent of the dual variable.
    """
    eps = functional.eps
    t = functional.grid.nodes
    eta_mid = functional.cell_eta / functional.h
    flux = eta_mid * np.diff(v) / functional.h
    div = np.zeros_like(v)
    div[1:-1] = (flux[1:] - flux[:-1]) / (0.5 * (functional.h[1:] + functional.h[:-1]))
    eta = functional.weight.eval(t)
    centre = t[np.argmin(np.abs(v - functional.p.c))]
    sel = (np.abs(t - centre) > width * eps) & (np.abs(t - t0) > width * eps) & (eta > 0)
    sel[0] = sel[-1] = False
    if not sel.any():
        return float("nan")
    vals = (2.0 * eps * eps * div[sel] / eta[sel] - functional.p.deriv(v[sel])) / eps
    wts = functional.c[sel]
    return float(np.sum(vals * wts) / np.sum(wts))


def extract_multiplier(result: MinimizerResult) -> float:
    return result.lambda_eps


def default_delta_loc(weight: Weight, p: Potential, t0: float) -> float:
    r = min(t0 - weight.lo, weight.hi - t0)
    return (p.b - p.a) * float(weight.eval(t0)) * r / 4.0


@dataclass
class LocalizedSolve:
    """Bundle of a minimizer run and the recovery it started from (same discretization)."""
    result: MinimizerResult
    recovery: Field1D
    recovery_discrete: Field1D
    functional: DiscreteEnergy


def solve_localized(prof: Profile, p: Potential, weight: Weight, eps: float, m: float,
                    t0: float | None = None, tau0: float = 0.0, lambda0: float | None = None,
                    fine_factor: float = 400.0, tol: float = 1e-9, max_iter: int = 100,
                    delta_loc: float | None = None, grid: Grid1D | None = None) -> LocalizedSolve:
    """Recovery start, graded grid, Newton minimization; the usual end-to-end call."""
    t0 = reference_interface(weight, m, p) if t0 is None else t0
    rec = recovery_sequence(prof, p, weight, t0, eps, m, lambda0=lambda0, tau0=tau0)
    r = rec.meta["recovery"]
    if grid is None:
        grid = graded_grid(weight.lo, weight.hi, t0, eps, fine_factor=fine_factor,
                           breaks=weight.breaks, centre=t0 + eps * r.tau_eps)
    fun = assemble_energy(grid, weight, p, eps, t0)
    v_init = discrete_recovery(fun, r, m)
    delta_loc = default_delta_loc(weight, p, t0) if delta_loc is None else delta_loc
    res = minimize_localized(fun, weight, p, eps, m, delta_loc, v_init, t0, tol=tol, max_iter=max_iter)
    return LocalizedSolve(res, rec, fun.field(v_init), fun)
