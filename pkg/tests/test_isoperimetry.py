from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gamma2.errors import HypothesisViolation, KinkAtMass, NonIntegrableTail, UnsupportedSet
from gamma2.isoperimetry import (CanonicalSet, IsoProfile, build_modified_profile, constant_weight,
                                 half_width_by_quadrature, iso_profile_from_table, levelset_weight,
                                 linear_weight, load_weight, measure_tail_data, perimeter_volume_pair,
                                 power_iso_profile, rearranged_weight, solve_volume_function,
                                 square_iso_profile, unit_ball_measure)

SQUARE_T = 0.5 + 1.0 / math.pi


def test_unit_ball_measure():
    assert unit_ball_measure(2) == pytest.approx(math.pi)
    assert unit_ball_measure(3) == pytest.approx(4 * math.pi / 3)


def test_square_profile_values():
    I = square_iso_profile()
    assert I.eval(0.5) == 1.0
    assert I.eval(0.1) == pytest.approx(math.sqrt(0.1 * math.pi))
    assert I.eval(0.9) == pytest.approx(I.eval(0.1))
    assert I.is_kink(1 / math.pi) and I.is_kink(1 - 1 / math.pi)


def test_square_half_width_ode_and_quadrature():
    dom = solve_volume_function(square_iso_profile())
    assert dom.T == pytest.approx(SQUARE_T, abs=1e-6)
    assert dom.T_quad == pytest.approx(SQUARE_T, abs=1e-10)


def test_power_profile_half_width():
    # I = C v^(1/2) on (0, 1/2): T = int_0^{1/2} dv / (C sqrt v) = sqrt(2) / C
    C = 2.0
    dom = solve_volume_function(power_iso_profile(C))
    assert dom.T == pytest.approx(math.sqrt(2) / C, abs=1e-7)


def test_nonintegrable_tail():
    flat = IsoProfile(lambda v: np.asarray(v, float), lambda v: np.ones_like(np.asarray(v, float)), n=2)
    with pytest.raises(NonIntegrableTail):
        half_width_by_quadrature(flat)


def test_volume_function_is_increasing_and_centred(square_domain):
    t = np.linspace(-square_domain.T, square_domain.T, 501)
    V = square_domain.V(t)
    assert np.all(np.diff(V) > 0)
    assert square_domain.V(0.0) == pytest.approx(0.5, abs=1e-12)
    assert V[0] == pytest.approx(0.0, abs=1e-9) and V[-1] == pytest.approx(1.0, abs=1e-9)


def test_volume_derivative_is_istar(square_domain):
    t = np.linspace(-0.9 * square_domain.T, 0.9 * square_domain.T, 41)
    h = 1e-6
    dV = (square_domain.V(t + h) - square_domain.V(t - h)) / (2 * h)
    assert np.max(np.abs(dV - square_domain.istar.eval(square_domain.V(t)))) < 1e-6


def test_perimeter_volume_pair(square_domain):
    v, per = perimeter_volume_pair(square_domain, 0.0)
    assert v == pytest.approx(0.5, abs=1e-12)
    assert per == pytest.approx(float(square_domain.istar.eval(0.5)))
    with pytest.raises(ValueError):
        perimeter_volume_pair(square_domain, 10.0)


@pytest.mark.parametrize("v_m", [0.2, 0.4, 0.5, 0.7])
def test_modified_profile_properties(v_m):
    ms = build_modified_profile(square_iso_profile(), v_m)
    chk = ms.check()
    assert chk["touch_value"] < 1e-12
    assert chk["touch_slope"] < 1e-9
    assert chk["min_gap"] > -1e-12
    assert chk["min_gap_away_from_pin"] > 0
    assert chk["min_value"] > 0
    assert chk["symmetry"] < 1e-14


@given(st.floats(0.03, 0.3))
@settings(max_examples=10, deadline=None)
def test_modified_profile_complement_symmetry(v_m):
    ms = build_modified_profile(square_iso_profile(), v_m)
    v = np.linspace(0.01, 0.99, 97)
    assert np.allclose(ms.eval(v), ms.eval(1 - v), atol=1e-15)
    # pinning at v_m or at 1 - v_m produces the same profile
    other = build_modified_profile(square_iso_profile(), 1 - v_m)
    assert np.allclose(ms.eval(v), other.eval(v), atol=1e-12)


def test_kink_at_mass_reports_one_sided_derivatives():
    with pytest.raises(KinkAtMass, match=r"\[.*,.*\]"):
        build_modified_profile(square_iso_profile(), 1 / math.pi)


def test_modified_profile_bad_arguments():
    with pytest.raises(ValueError):
        build_modified_profile(square_iso_profile(), 1.2)
    with pytest.raises(ValueError):
        build_modified_profile(square_iso_profile(), 0.3, beta=2.0)


def test_table_profile_symmetrized():
    v = np.linspace(0, 1, 41)
    vals = np.minimum(v, 1 - v) ** 0.5
    prof = iso_profile_from_table(v, vals)
    x = np.linspace(0.02, 0.98, 25)
    assert np.allclose(prof.eval(x), prof.eval(1 - x))
    assert np.max(np.abs(prof.eval(x) - np.minimum(x, 1 - x) ** 0.5)) < 2e-2


def test_rearranged_weight_tail_exponents(square_domain):
    w = rearranged_weight(square_domain)
    td = w.tail_data
    assert (td.n1, td.n2) == (2, 2)
    assert w.total == pytest.approx(1.0, abs=1e-10)


def test_rearranged_weight_derivative_at_pin():
    # eta = I*(V) so eta'(t_m) = I'(v_m) I(v_m); for v_m = 0.2 this is pi/2
    ms = build_modified_profile(square_iso_profile(), 0.2)
    dom = solve_volume_function(ms)
    w = rearranged_weight(dom)
    t_m = float(dom.t_of_volume(0.2))
    assert float(w.deriv(t_m)) == pytest.approx(math.pi / 2, rel=1e-9)


def test_linear_weight_integrals():
    w = linear_weight(1, 1)
    assert w.total == pytest.approx(2.0)
    assert w.cumulative(0.0) == pytest.approx(0.5)
    with pytest.raises(HypothesisViolation):
        linear_weight(1, 2)


def test_tail_data_constant_weight():
    td = measure_tail_data(constant_weight(2.0))
    assert (td.n1, td.n2) == (1, 1)
    assert td.d1 == pytest.approx(2.0) and td.d5 == 0.0


def test_tail_data_linear_vanishing_endpoint():
    td = measure_tail_data(linear_weight(1, 1))  # eta(-1) = 0 linearly
    assert (td.n1, td.n2) == (2, 1)


def test_tail_data_rejects_fractional_exponent():
    from gamma2.isoperimetry import Weight
    w = Weight(lambda t: np.sqrt(1 + t), lambda t: 0.5 / np.sqrt(1 + t), -1.0, 1.0)
    with pytest.raises(HypothesisViolation):
        measure_tail_data(w)


def test_weight_table_roundtrip(tmp_path):
    w0 = linear_weight(1.0, 0.5)
    path = tmp_path / "eta.csv"
    w0.to_csv(path, samples=201)
    w = load_weight(path)
    t = np.linspace(-0.9, 0.9, 19)
    assert np.allclose(w.eval(t), w0.eval(t), atol=1e-12)
    assert w.total == pytest.approx(w0.total, rel=1e-10)


def test_quarter_disk_weight():
    cs = CanonicalSet("quarter_disk", 0.5)
    w = levelset_weight(cs)
    assert float(w.eval(0.0)) == pytest.approx(math.pi / 4)
    assert float(w.deriv(0.0)) == pytest.approx(math.pi / 2)
    assert w.total == pytest.approx(1.0, abs=1e-10)
    assert cs.curvature == 2.0
    # eta'(0) = (n-1) kappa P
    assert float(w.deriv(0.0)) == pytest.approx((cs.n - 1) * cs.curvature * cs.perimeter, rel=1e-14)


@pytest.mark.parametrize("cs", [CanonicalSet("strip", 0.3), CanonicalSet("disk", 0.3),
                                CanonicalSet("ball", 0.4, n=3)])
def test_levelset_weights_integrate_to_container(cs):
    w = levelset_weight(cs)
    assert w.total == pytest.approx(cs.container_measure, rel=1e-9)
    assert w.cumulative(0.0) == pytest.approx(cs.volume, rel=1e-9)
    assert float(w.deriv(0.0)) == pytest.approx((cs.n - 1) * cs.curvature * cs.perimeter, rel=1e-12)


def test_unsupported_sets():
    with pytest.raises(UnsupportedSet):
        levelset_weight(CanonicalSet("annulus", 0.3))
    with pytest.raises(UnsupportedSet):
        levelset_weight(CanonicalSet("disk", 0.7))
