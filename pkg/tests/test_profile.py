from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gamma2.errors import NoBracket
from gamma2.potential import quartic, subquadratic
from gamma2.profile import (compute_csym, compute_cw, cw_with_error, profile_constants, solve_profile,
                            solve_tau, tau_for_multiplier)

from conftest import CW_QUARTIC


def test_quartic_profile_is_tanh(quartic_prof):
    t = np.linspace(-5, 5, 201)
    assert np.max(np.abs(quartic_prof.z(t) - np.tanh(t / math.sqrt(2)))) < 1e-8
    assert quartic_prof.residual() < 1e-9


def test_quartic_constants(quartic_prof):
    assert compute_cw(quartic()) == pytest.approx(CW_QUARTIC, abs=1e-12)
    assert quartic_prof.c_w == pytest.approx(CW_QUARTIC, abs=1e-12)
    assert abs(compute_csym(quartic_prof)) < 1e-10


def test_cw_error_estimate_small():
    val, err = cw_with_error(quartic())
    assert err < 1e-10


def test_profile_monotone_and_bounded(skewed_prof):
    z = skewed_prof.nodes_z
    assert np.all(np.diff(z) >= -1e-14)
    assert z.min() >= 0.0 and z.max() <= 1.0


def test_skewed_csym_nonzero(skewed_prof):
    const = profile_constants(skewed_prof)
    assert abs(const.c_sym) > 1e-2
    assert const.quadrature_error < 1e-8


def test_first_integral(skewed_prof):
    assert skewed_prof.first_integral_defect() < 1e-8


def test_decay_rates_bracket_quadratic_well(quartic_prof):
    # W(s) / (1-s)^2 = (1+s)^2 / 2 runs from 1/2 at s = 0 up to 2 at the well
    c1, c2 = quartic_prof.decay_rates
    assert c1 ** 2 == pytest.approx(0.5, rel=1e-6)
    assert c2 ** 2 == pytest.approx(2.0, rel=1e-6)
    s = np.linspace(0.0, 1 - 1e-6, 1000)
    r = quartic().eval(s) / (1 - s) ** 2
    assert c1 ** 2 <= r.min() * (1 + 1e-9) and r.max() <= c2 ** 2 * (1 + 1e-9)


def test_subquadratic_finite_width(sub_prof):
    assert sub_prof.t_a is not None and sub_prof.t_b is not None
    assert math.isfinite(sub_prof.width)
    assert sub_prof.z(np.array([sub_prof.t_b + 1.0]))[0] == 1.0
    assert sub_prof.z(np.array([sub_prof.t_a - 1.0]))[0] == -1.0
    assert sub_prof.residual() < 1e-7


def test_subquadratic_cw_matches_beta_function():
    # int |1-s^2|^{3/4} ds / sqrt(3/2) over [-1, 1] = B(1/2, 7/4) / sqrt(1.5)
    from scipy.special import beta
    exact = beta(0.5, 1.75) / math.sqrt(1.5)
    assert compute_cw(subquadratic(0.5)) == pytest.approx(exact, rel=1e-10)


@given(st.floats(-3.0, 3.0))
@settings(max_examples=20, deadline=None)
def test_cw_invariant_under_translation_of_profile(shift):
    # c_W = int (z')^2 dt is unaffected by moving the profile
    prof = solve_profile(quartic())
    t = np.linspace(-30, 30, 20001)
    val = np.trapezoid(prof.dz(t + shift) ** 2, t)
    assert val == pytest.approx(CW_QUARTIC, rel=1e-6)


def test_shift_integral_is_linear(skewed_prof):
    p = skewed_prof.potential
    s0 = skewed_prof.shift_integral(0.0)
    for tau in (-1.0, 0.3, 2.0):
        assert skewed_prof.shift_integral(tau) == pytest.approx(s0 - tau * (p.b - p.a), abs=1e-9)


def test_tau_zero_for_symmetric_zero_multiplier(quartic_prof):
    assert abs(tau_for_multiplier(quartic_prof, 1.0, 0.0, 1.0)) < 1e-10


def test_tau_solves_equation(quartic_prof):
    tau = solve_tau(quartic_prof, 1.0, 1.0, 2, total_eta=1.0)
    lam = 2 * CW_QUARTIC / 2
    assert quartic_prof.shift_integral(tau) == pytest.approx(lam / 4.0, abs=1e-10)


def test_tau_no_bracket(quartic_prof):
    with pytest.raises(NoBracket):
        tau_for_multiplier(quartic_prof, 1e-6, 10.0, 1.0)


def test_tau_requires_positive_eta(quartic_prof):
    with pytest.raises(ValueError):
        tau_for_multiplier(quartic_prof, 0.0, 1.0, 1.0)
