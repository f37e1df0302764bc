"""Reaction terms, parameter derivation, and the polynomial growth bounds."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monorhythm.ionic import (
    DerivedParameters,
    PhysiologicalParameters,
    RescalingParameters,
    derive_parameters,
    f_hat,
    f_ion_raw,
    f_transformed,
    g_hat,
    g_raw,
    period_raw,
    rescale_period,
)


def make_params(**overrides):
    """Defaults mirror the shipped configuration: amplitude-100 potential range."""
    kw = dict(u_res=0.0, u_peak=100.0, a=0.25, c1=125.0, c2=100.0, c3=1.0, b=1.0)
    kw.update(overrides)
    return PhysiologicalParameters(**kw)


RESC = RescalingParameters(epsilon=0.032, xi=3.75)


def test_derivation_hand_example():
    # hand evaluation of the defining formulas with u_amp = 2
    phys = PhysiologicalParameters(u_res=0.0, u_peak=2.0, a=0.25, c1=1.0, c2=1.0, c3=1.0, b=1.0)
    d = derive_parameters(phys, RESC)
    assert d.a1 == pytest.approx(0.25, rel=1e-15)
    assert d.u_th == pytest.approx(0.5, rel=1e-15)
    assert d.u_tr == pytest.approx(0.5, rel=1e-15)
    assert d.u_pr == pytest.approx(2.0, rel=1e-15)
    assert d.c4 == pytest.approx(0.25, rel=1e-15)


def test_unit_amplitude_gives_unit_coefficients():
    phys = make_params(u_res=0.0, u_peak=1.0, c1=1.0, c2=1.0)
    d = derive_parameters(phys, RESC)
    assert d.a1 == 1.0
    assert d.a2 == 1.0


def test_recovery_growth_constants():
    # B1 = B2 = epsilon * b / 2 with epsilon = 0.032, b = 1
    d = derive_parameters(make_params(b=1.0), RescalingParameters(epsilon=0.032, xi=3.75))
    assert d.B1 == pytest.approx(0.016, rel=1e-15)
    assert d.B2 == pytest.approx(0.016, rel=1e-15)
    assert d.B3 == pytest.approx(3.75, rel=1e-15)
    assert d.p_exponent == 4


def test_invalid_parameters_rejected():
    with pytest.raises(ValueError):
        PhysiologicalParameters(u_res=1.0, u_peak=1.0, a=0.25, c1=1.0, c2=1.0, c3=1.0, b=1.0)
    with pytest.raises(ValueError):
        make_params(a=1.5)
    with pytest.raises(ValueError):
        make_params(c3=0.0)
    with pytest.raises(ValueError):
        RescalingParameters(epsilon=0.0, xi=1.0)


def test_zero_reaction_coefficients_allowed():
    d = derive_parameters(make_params(c1=0.0, c2=0.0), RESC)
    assert d.a1 == 0.0 and d.a2 == 0.0 and d.c4 == 0.0


def test_c4_override():
    d = derive_parameters(make_params(c1=0.0, c2=0.0), RESC, c4_override=31.25)
    assert d.c4 == 31.25
    assert d.a1 == 0.0


def test_f_ion_raw_roots():
    d = derive_parameters(make_params(), RESC)
    assert f_ion_raw(d.u_res, 7.3, d) == 0.0
    assert f_ion_raw(d.u_th, 0.0, d) == 0.0
    assert f_ion_raw(d.u_peak, 0.0, d) == 0.0


def test_f_ion_raw_value():
    # a1=1, a2=1, u_res=0, u_th=0.5, u_peak=1: f(2, 1) = 2*1.5*1 + 2*1 = 5
    phys = PhysiologicalParameters(u_res=0.0, u_peak=1.0, a=0.5, c1=1.0, c2=1.0, c3=1.0, b=1.0)
    d = derive_parameters(phys, RESC)
    assert f_ion_raw(2.0, 1.0, d) == pytest.approx(5.0, rel=1e-15)


def test_g_raw():
    d = derive_parameters(make_params(b=1.0, c3=1.0), RESC)
    assert g_raw(d.u_res, 0.0, d) == 0.0
    assert g_raw(d.u_res + 2.0, 1.0, d) == pytest.approx(1.0, rel=1e-15)
    # linear in both arguments
    assert g_raw(d.u_res + 4.0, 2.0, d) == pytest.approx(2.0 * g_raw(d.u_res + 2.0, 1.0, d))


def test_f_transformed_zero_at_zero():
    d = derive_parameters(make_params(), RESC)
    assert f_transformed(0.0, -3.0, d, RESC) == 0.0
    assert f_hat(0.0, 11.0, d, RESC) == 0.0


def test_f_transformed_hand_value():
    # direct formula evaluation with synthetic constants u_pr + u_tr = 0
    d = DerivedParameters(
        u_amp=1.0, u_th=0.0, u_tr=0.0, u_pr=0.0, a1=1.0, a2=1.0, c4=0.0,
        l1=0.0, l2=0.0, A1=0.0, A2=0.0, A3=0.0, B1=0.0, B2=0.0, B3=0.0,
        p_exponent=4, u_res=0.0, u_peak=1.0, C=1.0, b=1.0, c3=1.0, sigma_const=1.0,
    )
    one = RescalingParameters(epsilon=1.0, xi=1.0)
    assert f_transformed(2.0, 3.0, d, one) == pytest.approx(14.0, rel=1e-15)


def test_g_hat_values():
    d = derive_parameters(make_params(b=1.0), RescalingParameters(epsilon=0.032, xi=3.75))
    assert g_hat(0.0, 0.0, d, RescalingParameters(epsilon=0.032, xi=3.75)) == 0.0
    assert g_hat(1.0, 0.0, d, RescalingParameters(epsilon=0.032, xi=3.75)) == pytest.approx(
        0.032, rel=1e-15
    )


def test_rescale_period():
    assert rescale_period(0.8, RescalingParameters(epsilon=0.032, xi=1.0)) == pytest.approx(25.0)
    ident = RescalingParameters(epsilon=1.0, xi=1.0)
    assert rescale_period(0.8, ident) == 0.8
    assert period_raw(rescale_period(0.8, RESC), RESC) == pytest.approx(0.8, rel=1e-15)
    with pytest.raises(ValueError):
        rescale_period(0.0, RESC)


@given(
    u=st.floats(-8.0, 8.0, allow_nan=False),
    w=st.floats(-8.0, 8.0, allow_nan=False),
)
@settings(max_examples=200, deadline=None)
def test_transformed_consistent_with_raw(u, w):
    """f_hat(u, w) must equal (eps/C) * f_ion_raw(u + u_res, xi * w) identically."""
    d = derive_parameters(make_params(), RESC)
    lhs = f_hat(u, w, d, RESC)
    rhs = (RESC.epsilon / d.C) * f_ion_raw(u + d.u_res, RESC.xi * w, d)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


@given(
    u_res=st.floats(-80.0, 20.0),
    amp=st.floats(0.5, 150.0),
    c1=st.floats(0.1, 50.0),
    c2=st.floats(0.1, 50.0),
)
@settings(max_examples=200, deadline=None)
def test_scale_consistency(u_res, amp, c1, c2):
    """Doubling the potential amplitude quarters a1 and halves a2."""
    base = PhysiologicalParameters(
        u_res=u_res, u_peak=u_res + amp, a=0.3, c1=c1, c2=c2, c3=1.0, b=1.0
    )
    wide = PhysiologicalParameters(
        u_res=u_res, u_peak=u_res + 2.0 * amp, a=0.3, c1=c1, c2=c2, c3=1.0, b=1.0
    )
    d1, d2 = derive_parameters(base, RESC), derive_parameters(wide, RESC)
    assert d2.a1 == pytest.approx(d1.a1 / 4.0, rel=1e-12)
    assert d2.a2 == pytest.approx(d1.a2 / 2.0, rel=1e-12)


def test_growth_bounds_hold_on_samples():
    """The split f = f1(u) + f2(u) * (xi w) obeys |f1| <= l1 + l2 |u|^3 and
    |f2| <= a2 |u|; the recovery part obeys |eps b u| <= (b/2)(1 + u^2).

    Valid whenever eps/C <= 1 and eps <= 1, which the shipped defaults satisfy.
    """
    d = derive_parameters(make_params(), RESC)
    rng = np.random.default_rng(20240817)
    u = rng.uniform(-30.0, 30.0, size=10_000)
    f1 = f_transformed(u, np.zeros_like(u), d, RESC)
    f2 = (f_transformed(u, np.ones_like(u), d, RESC) - f1) / RESC.xi
    assert np.all(np.abs(f1) <= d.l1 + d.l2 * np.abs(u) ** 3 + 1e-12)
    assert np.all(np.abs(f2) <= d.a2 * np.abs(u) + 1e-12)
    g1 = g_hat(u, np.zeros_like(u), d, RESC)
    assert np.all(np.abs(g1) <= (d.b / 2.0) * (1.0 + u**2) + 1e-12)
